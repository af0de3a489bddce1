#include "symalign/synth.hpp"

#include "symalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace symalign {

TempoCurve::TempoCurve(double bpm) : TempoCurve(std::vector<std::pair<double, double>>{{0.0, bpm}}) {}

TempoCurve::TempoCurve(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error("tempo curve needs at least one point");
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!(points_[k].second > 0.0) || !std::isfinite(points_[k].second))
            throw Error("tempo curve: bpm must be positive");
        if (k > 0 && !(points_[k].first > points_[k - 1].first))
            throw Error("tempo curve: beats must strictly increase");
    }
}

double TempoCurve::bpm_at(double beat) const noexcept {
    if (beat <= points_.front().first) return points_.front().second;
    if (beat >= points_.back().first) return points_.back().second;
    auto hi = std::upper_bound(points_.begin(), points_.end(), beat,
                               [](double b, const auto& p) { return b < p.first; });
    auto lo = hi - 1;
    const double t = (beat - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

namespace {

// Seconds spent between beat a and beat b inside one segment whose bpm is
// linear from bpm_a (at a) to bpm_b (at b).
double segment_seconds(double a, double b, double bpm_a, double bpm_b) {
    const double span = b - a;
    if (span == 0.0) return 0.0;
    if (bpm_a == bpm_b) return 60.0 * span / bpm_a;
    const double slope = (bpm_b - bpm_a) / span;
    return 60.0 / slope * std::log(bpm_b / bpm_a);
}

} // namespace

double TempoCurve::seconds_at(double beat) const noexcept {
    // Integral of 60 / bpm(b) from 0 to beat, taken piecewise.
    auto integral_from_first = [&](double x) {
        const auto& first = points_.front();
        if (x <= first.first) return 60.0 * (x - first.first) / first.second;
        double total = 0.0;
        for (std::size_t k = 1; k < points_.size(); ++k) {
            const auto& lo = points_[k - 1];
            const auto& hi = points_[k];
            if (x <= hi.first) return total + segment_seconds(lo.first, x, lo.second, bpm_at(x));
            total += segment_seconds(lo.first, hi.first, lo.second, hi.second);
        }
        return total + 60.0 * (x - points_.back().first) / points_.back().second;
    };
    if (points_.size() == 1) return 60.0 * beat / points_.front().second;
    return integral_from_first(beat) - integral_from_first(0.0);
}

SyntheticPerformance generate_performance(const Score& score, const SynthParams& params) {
    if (params.p_insert < 0.0 || params.p_insert > 1.0 || params.p_delete < 0.0 || params.p_delete > 1.0)
        throw Error("generate_performance: probabilities must lie in [0, 1]");
    if (params.jitter_ms < 0.0 || params.chord_spread_ms < 0.0)
        throw Error("generate_performance: jitter and spread must be non-negative");

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, params.jitter_ms / 1000.0);
    std::uniform_int_distribution<int> velocity(40, 100);
    std::uniform_int_distribution<int> neighbour(0, 3);

    std::vector<PerfNote> notes;
    std::vector<AlignmentRecord> matches, insertions, deletions;
    std::size_t played = 0;

    for (const auto& onset : score.onsets()) {
        double t = params.tempo.seconds_at(onset.beat);
        if (params.jitter_ms > 0.0) t += jitter(rng);
        const bool chord = onset.note_ids.size() > 1;

        // A pitch sounds once per onset; voices doubling it beyond the first
        // go unplayed.
        for (const auto& [pitch, ids] : onset.note_ids) {
            for (std::size_t v = 1; v < ids.size(); ++v) deletions.push_back(AlignmentRecord::deletion(ids[v]));
            if (unit(rng) < params.p_delete) {
                deletions.push_back(AlignmentRecord::deletion(ids.front()));
                continue;
            }
            double at = t;
            if (chord && params.chord_spread_ms > 0.0) at += unit(rng) * params.chord_spread_ms / 1000.0;
            std::string id = "p" + std::to_string(played++);
            matches.push_back(AlignmentRecord::match(id, ids.front()));
            notes.push_back({std::move(id), pitch, at, velocity(rng)});

            if (unit(rng) < params.p_insert) {
                static constexpr int kOffsets[4] = {-2, -1, 1, 2};
                int p = pitch.value() + kOffsets[neighbour(rng)];
                if (!PitchIndex::valid(p)) p = pitch.value() - (p - pitch.value());
                const double when = at + 0.02 + 0.13 * unit(rng);
                std::string ins = "x" + std::to_string(insertions.size());
                notes.push_back({ins, PitchIndex(p), when, velocity(rng)});
                insertions.push_back(AlignmentRecord::insertion(ins));
            }
        }
    }

    if (!notes.empty()) {
        const double earliest = std::ranges::min_element(notes, {}, &PerfNote::onset_sec)->onset_sec;
        if (earliest < 0.0)
            for (auto& n : notes) n.onset_sec -= earliest;
    }

    SyntheticPerformance out;
    out.performance = Performance(std::move(notes));
    out.truth.records = std::move(matches);
    out.truth.records.insert(out.truth.records.end(), insertions.begin(), insertions.end());
    out.truth.records.insert(out.truth.records.end(), deletions.begin(), deletions.end());
    return out;
}

Score generate_score(const ScoreGenParams& params) {
    if (params.low_midi + 12 > params.high_midi || !PitchIndex::valid_midi(params.low_midi) ||
        !PitchIndex::valid_midi(params.high_midi))
        throw Error("generate_score: pitch range must span at least an octave inside 21..108");

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> step(-5, 5);
    std::uniform_int_distribution<int> below(3, 16);
    std::uniform_int_distribution<std::size_t> extra(1, std::max<std::size_t>(1, params.max_chord - 1));
    static constexpr double kDurations[] = {0.25, 0.5, 0.5, 1.0, 1.0, 1.5, 2.0};
    std::uniform_int_distribution<std::size_t> duration(0, std::size(kDurations) - 1);

    const int melody_low = params.low_midi + 12;
    int melody = std::clamp(72, melody_low, params.high_midi);
    double beat = 0.0;
    std::vector<int> previous;
    std::vector<ScoreNote> notes;
    std::size_t next_id = 0;

    for (std::size_t k = 0; k < params.onsets; ++k) {
        std::vector<int> pitches;
        if (!previous.empty() && unit(rng) < params.repeat_probability) {
            pitches = previous;
        } else {
            melody += step(rng);
            if (melody < melody_low) melody = 2 * melody_low - melody;
            if (melody > params.high_midi) melody = 2 * params.high_midi - melody;
            pitches.push_back(melody);
            if (params.max_chord > 1 && unit(rng) < params.chord_probability) {
                const std::size_t n = extra(rng);
                for (std::size_t m = 0; m < n; ++m) {
                    const int p = std::max(params.low_midi, melody - below(rng));
                    if (std::ranges::find(pitches, p) == pitches.end()) pitches.push_back(p);
                }
            }
        }
        previous = pitches;
        if (unit(rng) < params.doubling_probability) pitches.push_back(pitches.front());

        const double length = kDurations[duration(rng)];
        for (int p : pitches)
            notes.push_back({"s" + std::to_string(next_id++), PitchIndex::from_midi(p), beat, length});
        beat += length;
    }
    return score_from_notes(notes);
}

TempoCurve random_tempo_curve(std::uint64_t seed, double beats, double min_bpm, double max_bpm) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> start(min_bpm, max_bpm);
    std::normal_distribution<double> drift(0.0, 0.08 * (max_bpm - min_bpm));
    std::vector<std::pair<double, double>> points;
    double bpm = start(rng);
    for (double b = 0.0; b <= beats + 8.0; b += 8.0) {
        points.emplace_back(b, bpm);
        bpm = std::clamp(bpm + drift(rng), min_bpm, max_bpm);
    }
    return TempoCurve(std::move(points));
}

} // namespace symalign
