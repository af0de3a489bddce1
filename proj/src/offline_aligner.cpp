#include "symalign/offline_aligner.hpp"

#include "symalign/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

namespace symalign {

PathAgreement pitch_sequence_align(const Score& score, const Performance& perf) {
    if (score.empty() || perf.empty()) throw Error("pitch_sequence_align requires a non-empty score and performance");
    auto metric = [](const PerfNote& n, const ScoreOnset& o) { return inclusion_cost(n.pitch, o.pitch_set); };
    const auto fwd = dtw(perf.notes(), score.onsets(), metric);
    const auto bwd = dtw_backward(perf.notes(), score.onsets(), metric);
    return disagreement_brackets(fwd.path, bwd.path);
}

namespace {

using Claims = std::set<std::pair<std::size_t, PitchIndex>>;

// A pitch is one key press per onset however many voices double it.
std::size_t free_voices(const Score& score, std::size_t j, PitchIndex p, const Claims& claimed) {
    return score[j].pitch_set.contains(p) && !claimed.contains({j, p}) ? 1 : 0;
}

// Score onsets for `count` bracketed notes of pitch `p`, in temporal order. Unclaimed voices at the anchor onsets join when that
// makes the counts agree: both edges, then neither, then lower, then upper.
std::optional<std::vector<std::size_t>> bracket_occurrences(const Bracket& b, PitchIndex p, std::size_t count,
                                                            const Score& score, const Claims& claimed) {
    std::vector<std::size_t> inner;
    for (std::size_t j = b.b_begin(); j < b.b_end(); ++j) inner.insert(inner.end(), free_voices(score, j, p, {}), j);
    const std::size_t lo = free_voices(score, b.lower.j, p, claimed);
    const std::size_t hi = b.upper.j == b.lower.j ? 0 : free_voices(score, b.upper.j, p, claimed);
    for (auto [use_lo, use_hi] : {std::pair{true, true}, {false, false}, {true, false}, {false, true}}) {
        if (inner.size() + (use_lo ? lo : 0) + (use_hi ? hi : 0) != count) continue;
        std::vector<std::size_t> out(use_lo ? lo : 0, b.lower.j);
        out.insert(out.end(), inner.begin(), inner.end());
        out.insert(out.end(), use_hi ? hi : 0, b.upper.j);
        return out;
    }
    return std::nullopt;
}

} // namespace

std::vector<IndexPair> resolve_brackets(const std::vector<Bracket>& brackets, const Score& score,
                                        const Performance& perf, std::span<const IndexPair> agreed) {
    std::set<IndexPair> claims(agreed.begin(), agreed.end());
    for (const auto& b : brackets) {
        claims.insert(b.lower);
        claims.insert(b.upper);
    }
    Claims claimed;
    for (const auto& c : claims) claimed.insert({c.j, perf[c.i].pitch});

    std::vector<IndexPair> out;
    for (const auto& b : brackets) {
        std::map<PitchIndex, std::vector<std::size_t>> perf_by_pitch;
        for (std::size_t i = b.a_begin(); i < b.a_end(); ++i) perf_by_pitch[perf[i].pitch].push_back(i);

        std::vector<std::optional<std::size_t>> placed(b.a_end() - b.a_begin());
        for (const auto& [pitch, notes] : perf_by_pitch) {
            const auto onsets = bracket_occurrences(b, pitch, notes.size(), score, claimed);
            if (!onsets) continue;
            for (std::size_t k = 0; k < notes.size(); ++k) placed[notes[k] - b.a_begin()] = (*onsets)[k];
        }

        const double di = static_cast<double>(b.upper.i) - static_cast<double>(b.lower.i);
        const double dj = static_cast<double>(b.upper.j) - static_cast<double>(b.lower.j);
        for (std::size_t i = b.a_begin(); i < b.a_end(); ++i) {
            auto& slot = placed[i - b.a_begin()];
            if (!slot) {
                const double t = (static_cast<double>(i) - static_cast<double>(b.lower.i)) / di;
                slot = b.lower.j + static_cast<std::size_t>(std::lround(t * dj));
            }
            out.push_back({i, *slot});
        }
    }
    std::ranges::sort(out);
    return out;
}

TimeMap build_time_map(const std::vector<IndexPair>& pairs, const Score& score, const Performance& perf) {
    if (pairs.empty()) throw Error("build_time_map needs at least one pair");
    std::map<std::size_t, std::vector<double>> secs_by_onset;
    for (const auto& p : pairs) {
        if (p.i >= perf.size() || p.j >= score.size()) throw Error("build_time_map: pair index out of range");
        secs_by_onset[p.j].push_back(perf[p.i].onset_sec);
    }

    std::vector<TimeAnchor> anchors;
    for (auto& [j, secs] : secs_by_onset) {
        std::ranges::sort(secs);
        const std::size_t n = secs.size();
        const double median = n % 2 == 1 ? secs[n / 2] : 0.5 * (secs[n / 2 - 1] + secs[n / 2]);
        if (!anchors.empty() && median < anchors.back().sec) continue;
        anchors.push_back({score[j].beat, median});
    }
    return TimeMap(std::move(anchors));
}

std::vector<PitchChannel> split_by_pitch(const Score& score, const Performance& perf) {
    std::map<PitchIndex, PitchChannel> channels;
    auto channel = [&](PitchIndex p) -> PitchChannel& {
        auto [it, inserted] = channels.try_emplace(p);
        if (inserted) it->second.pitch = p;
        return it->second;
    };
    for (std::size_t i = 0; i < perf.size(); ++i) channel(perf[i].pitch).perf.push_back({i, perf[i].onset_sec});
    for (std::size_t j = 0; j < score.size(); ++j)
        for (const auto& [pitch, ids] : score[j].note_ids) channel(pitch).score.push_back({j, score[j].beat, ids});

    std::vector<PitchChannel> out;
    out.reserve(channels.size());
    for (auto& [p, c] : channels) out.push_back(std::move(c));
    return out;
}

namespace {

struct ChannelMatch {
    std::size_t perf_index;
    std::string score_id;
};

std::vector<ChannelMatch> match_channel(const PitchChannel& ch, const TimeMap& map, double cutoff) {
    std::vector<ChannelMatch> matches;
    if (ch.perf.empty() || ch.score.empty()) return matches;

    std::vector<double> projected(ch.score.size());
    for (std::size_t j = 0; j < ch.score.size(); ++j) projected[j] = map(ch.score[j].beat);
    std::vector<double> played(ch.perf.size());
    for (std::size_t i = 0; i < ch.perf.size(); ++i) played[i] = ch.perf[i].onset_sec;

    const auto path = dtw(played, projected, [](double a, double b) { return std::abs(a - b); }).path.pairs;

    // Lowest-distance links win; ties keep path order.
    std::vector<std::size_t> order(path.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    auto dist = [&](std::size_t k) { return std::abs(played[path[k].i] - projected[path[k].j]); };
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });

    // One key press per score onset; doubling voices beyond the first stay
    // unmatched.
    std::vector<bool> perf_used(ch.perf.size(), false);
    std::vector<bool> onset_used(ch.score.size(), false);
    for (std::size_t k : order) {
        const auto [i, j] = path[k];
        if (dist(k) > cutoff) break;
        if (perf_used[i] || onset_used[j]) continue;
        perf_used[i] = onset_used[j] = true;
        matches.push_back({ch.perf[i].perf_index, ch.score[j].score_ids.front()});
    }
    return matches;
}

} // namespace

NoteAlignment onset_align(const Score& score, const Performance& perf, const TimeMap& map,
                          const OfflineConfig& config) {
    const auto channels = split_by_pitch(score, perf);
    std::vector<std::vector<ChannelMatch>> per_channel(channels.size());
    const std::size_t threads = config.threads == 0 ? thread_budget() : config.threads;
    parallel_for(channels.size(), threads,
                 [&](std::size_t c) { per_channel[c] = match_channel(channels[c], map, config.cutoff_sec); });

    std::vector<const std::string*> matched_score(perf.size(), nullptr);
    std::map<std::string, bool> score_matched;
    for (const auto& matches : per_channel) {
        for (const auto& m : matches) {
            matched_score[m.perf_index] = &m.score_id;
            score_matched[m.score_id] = true;
        }
    }

    NoteAlignment out;
    for (std::size_t i = 0; i < perf.size(); ++i) {
        if (matched_score[i] != nullptr)
            out.records.push_back(AlignmentRecord::match(perf[i].id, *matched_score[i]));
        else
            out.records.push_back(AlignmentRecord::insertion(perf[i].id));
    }
    for (const auto& onset : score.onsets())
        for (const auto& [pitch, ids] : onset.note_ids)
            for (const auto& id : ids)
                if (!score_matched.contains(id)) out.records.push_back(AlignmentRecord::deletion(id));
    return out;
}

NoteAlignment align_offline(const Score& score, const Performance& perf, const OfflineConfig& config) {
    const auto agreement = pitch_sequence_align(score, perf);
    auto pairs = agreement.agreed;
    const auto filled = resolve_brackets(agreement.brackets, score, perf, agreement.agreed);
    pairs.insert(pairs.end(), filled.begin(), filled.end());
    std::ranges::sort(pairs);
    const TimeMap map = build_time_map(pairs, score, perf);
    return onset_align(score, perf, map, config);
}

} // namespace symalign
