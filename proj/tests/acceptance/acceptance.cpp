// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   symalign_acceptance [--vienna DIR]
//
// DIR holds <name>.score.json, <name>.perf.json (or .mid) and
// <name>.truth.json triples.

#include "../support/oracles.hpp"
#include "../support/states.hpp"
#include "symalign/metrics.hpp"
#include "symalign/midi.hpp"
#include "symalign/note_json.hpp"
#include "symalign/offline_aligner.hpp"
#include "symalign/online_aligner.hpp"
#include "symalign/state_sampler.hpp"
#include "symalign/synth.hpp"
#include "symalign/value_model.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace symalign;
using namespace symalign::testing;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s  %-44s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void skip(const std::string& name, const std::string& detail) {
    std::printf("SKIP  %-44s %s\n", name.c_str(), detail.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Piece {
    Score score;
    SyntheticPerformance synth;
};

constexpr std::size_t kPieces = 50;

Piece corpus_piece(std::size_t k, bool perturbed) {
    Piece p;
    p.score = generate_score({.onsets = 200, .seed = 1000 + k});
    SynthParams params;
    params.tempo = random_tempo_curve(2000 + k, p.score.onsets().back().beat);
    params.seed = 3000 + k;
    if (perturbed) {
        params.jitter_ms = 30;
        params.p_insert = 0.02;
        params.p_delete = 0.02;
        params.chord_spread_ms = 20;
    }
    p.synth = generate_performance(p.score, params);
    return p;
}

void dtw_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<std::size_t> len(1, 8);
    std::uniform_int_distribution<int> pitch(40, 46);
    std::uniform_int_distribution<std::size_t> chord(1, 3);
    std::size_t exact = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PitchIndex> a;
        std::vector<PitchSet> b;
        for (std::size_t i = len(rng); i > 0; --i) a.emplace_back(pitch(rng));
        for (std::size_t j = len(rng); j > 0; --j) {
            std::vector<PitchIndex> s;
            for (std::size_t c = chord(rng); c > 0; --c) s.emplace_back(pitch(rng));
            b.emplace_back(s);
        }
        const auto oracle = enumerate_paths(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
            return inclusion_cost(a[i], b[j]);
        });
        const auto fwd = dtw(a, b, inclusion_cost);
        const auto bwd = dtw_backward(a, b, inclusion_cost);
        exact += fwd.cost == oracle.best && bwd.cost == oracle.best;
    }
    const double secs = seconds_since(t0);
    report(exact == 200 && secs < 5.0, "DTW equals brute-force enumeration",
           fmt("%zu/200 exact, %.2f s (limit 5 s)", exact, secs));
}

void offline_clean() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t perfect = 0;
    double worst = 1.0;
    for (std::size_t k = 0; k < kPieces; ++k) {
        const auto p = corpus_piece(k, false);
        const double f = fscore(align_offline(p.score, p.synth.performance), p.synth.truth).f;
        perfect += f == 1.0;
        worst = std::min(worst, f);
    }
    const double secs = seconds_since(t0);
    report(perfect == kPieces && secs < 10.0, "offline, clean corpus: F = 1 per piece",
           fmt("%zu/%zu pieces at F=1, min F %.4f, %.2f s (limit 10 s)", perfect, kPieces, worst, secs));
}

void offline_perturbed() {
    double total = 0.0, worst = 1.0;
    for (std::size_t k = 0; k < kPieces; ++k) {
        const auto p = corpus_piece(k, true);
        const double f = fscore(align_offline(p.score, p.synth.performance), p.synth.truth).f;
        total += f;
        worst = std::min(worst, f);
    }
    const double mean = total / kPieces;
    report(mean >= 0.98, "offline, perturbed corpus: mean F >= 0.98", fmt("mean F %.4f, min F %.4f", mean, worst));
}

Performance load_any_performance(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".mid" || ext == ".midi") return load_performance_midi(path).performance;
    return load_performance_json(path);
}

void offline_vienna(const std::optional<fs::path>& dir) {
    const std::string name = "offline, Vienna 4x22: mean F >= 0.99";
    if (!dir) {
        skip(name, "corpus not supplied (--vienna DIR)");
        return;
    }
    double total = 0.0;
    std::size_t pieces = 0;
    try {
        for (const auto& entry : fs::directory_iterator(*dir)) {
            const std::string file = entry.path().filename().string();
            const std::string suffix = ".score.json";
            if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0)
                continue;
            const std::string stem = file.substr(0, file.size() - suffix.size());
            fs::path perf = *dir / (stem + ".perf.json");
            if (!fs::exists(perf)) perf = *dir / (stem + ".mid");
            const Score score = load_score_json(entry.path());
            const Performance performance = load_any_performance(perf);
            const NoteAlignment truth = load_alignment_json(*dir / (stem + ".truth.json"));
            total += fscore(align_offline(score, performance), truth).f;
            ++pieces;
        }
    } catch (const std::exception& e) {
        report(false, name, std::string("error: ") + e.what());
        return;
    }
    if (pieces == 0) {
        report(false, name, "no <name>.score.json files in " + dir->string());
        return;
    }
    const double mean = total / static_cast<double>(pieces);
    report(mean >= 0.99, name, fmt("mean F %.4f over %zu performances", mean, pieces));
}

void invariances() {
    std::mt19937_64 rng(777);
    const auto weights = ValueModelWeights::random(31, {}, 0.3f);
    std::size_t perm_ok = 0, shift_ok = 0, net_ok = 0;
    constexpr std::size_t kStates = 1000;
    std::uniform_int_distribution<int> shift(-12, 12);
    for (std::size_t k = 0; k < kStates; ++k) {
        const AgentState s = random_state(rng);
        const auto base = heuristic_values(s);

        AgentState permuted = s;
        for (auto& set : permuted.score_window) {
            auto v = set.pitches();
            std::shuffle(v.begin(), v.end(), rng);
            set = PitchSet(v);
        }
        perm_ok += heuristic_values(permuted).greedy_slot() == base.greedy_slot();

        const auto seq = tokenize(s);
        TokenSeq shuffled = seq;
        for (auto& slot : shuffled.score) std::shuffle(slot.begin(), slot.end(), rng);
        net_ok += forward(seq, weights).q == forward(shuffled, weights).q;

        const auto moved = augment_pitch_shift({s, kCenterSlot}, shift(rng));
        shift_ok += heuristic_values(moved.state).greedy_slot() == base.greedy_slot();
    }
    report(perm_ok == kStates && net_ok == kStates, "set-permutation invariance (1000 states)",
           fmt("argmax %zu/1000, network outputs %zu/1000 identical", perm_ok, net_ok));
    report(shift_ok == kStates, "pitch-shift argmax invariance (1000 states)", fmt("%zu/1000", shift_ok));
}

void online() {
    const HeuristicValueFunction heuristic;
    std::size_t oam_perfect = 0, gam_exact = 0;
    std::size_t gam_wrong_notes = 0, notes = 0;
    for (std::size_t k = 0; k < kPieces; ++k) {
        const auto p = corpus_piece(k, false);
        oam_perfect += fscore(align_online(p.score, p.synth.performance, heuristic), p.synth.truth).f == 1.0;

        std::map<std::string, std::size_t> onset_of, truth_onset;
        for (std::size_t j = 0; j < p.score.size(); ++j)
            for (const auto& [pitch, ids] : p.score[j].note_ids)
                for (const auto& id : ids) onset_of[id] = j;
        for (const auto& r : p.synth.truth.records) truth_onset[r.perf_id] = onset_of[r.score_id];
        const auto trace = follow_performance(p.score, p.synth.performance, heuristic, Policy::greedy);
        std::size_t wrong = 0;
        for (std::size_t n = 0; n < trace.size(); ++n)
            wrong += trace[n].onset_index != truth_onset[p.synth.performance[n].id];
        gam_exact += wrong == 0;
        gam_wrong_notes += wrong;
        notes += trace.size();
    }
    report(oam_perfect == kPieces, "online OAM, clean corpus: F = 1 per piece",
           fmt("%zu/%zu pieces", oam_perfect, kPieces));
    report(gam_exact == kPieces, "online GAM, clean corpus: exact onset trace",
           fmt("%zu/%zu pieces, %zu/%zu notes off", gam_exact, kPieces, gam_wrong_notes, notes));

    std::vector<double> oam_medians, gam_medians;
    double oam_sum = 0, gam_sum = 0;
    for (std::size_t k = 0; k < kPieces; ++k) {
        const auto p = corpus_piece(k, true);
        auto median_of = [&](Policy policy) {
            const auto reports = follow_performance(p.score, p.synth.performance, heuristic, policy);
            std::vector<EstimatedPosition> est;
            for (std::size_t n = 0; n < reports.size(); ++n)
                if (!reports[n].insertion) est.push_back({n, reports[n].onset_index});
            return asynchrony(est, p.score, p.synth.performance, p.synth.truth).median_ms;
        };
        oam_sum += median_of(Policy::alignment);
        gam_sum += median_of(Policy::greedy);
    }
    const double oam = oam_sum / kPieces, gam = gam_sum / kPieces;
    report(oam <= gam, "online, perturbed corpus: OAM median <= GAM",
           fmt("mean per-piece median asynchrony OAM %.2f ms, GAM %.2f ms", oam, gam));
}

void latency() {
    const auto weights = ValueModelWeights::random(5);
    std::mt19937_64 rng(9);
    std::vector<TokenSeq> seqs;
    for (int k = 0; k < 64; ++k) seqs.push_back(tokenize(random_state(rng)));
    double sink = 0.0;
    for (int k = 0; k < 20; ++k) sink += forward(seqs[k % seqs.size()], weights).q[kCenterSlot];
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < 1000; ++k) sink += forward(seqs[k % seqs.size()], weights).q[kCenterSlot];
    const double ms = seconds_since(t0);
    report(ms < 10.0 && sink == sink, "forward latency < 10 ms per call",
           fmt("%.3f ms mean over 1000 calls, %zu parameters", ms, weights.parameter_count()));
}

void weight_files() {
    const fs::path dir = fs::temp_directory_path() / "symalign_acceptance_weights";
    fs::create_directories(dir);
    std::size_t identical = 0, rejected = 0, corrupt_cases = 0;
    std::string sample;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto w = ValueModelWeights::random(100 + k, {}, 0.02f + 0.01f * static_cast<float>(k % 7));
        const fs::path path = dir / ("w" + std::to_string(k) + ".smaw");
        save_weights(w, path);
        const auto back = load_weights(path);
        identical += back == w && encode_weights(back) == encode_weights(w);

        auto bytes = encode_weights(w);
        std::mt19937_64 rng(k);
        std::vector<std::vector<std::uint8_t>> broken;
        broken.emplace_back(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(rng() % bytes.size()));
        auto flipped = bytes;
        flipped[rng() % flipped.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        broken.push_back(flipped);
        auto magic = bytes;
        magic[1] = 'X';
        broken.push_back(magic);
        for (const auto& b : broken) {
            ++corrupt_cases;
            try {
                decode_weights(b);
            } catch (const Error& e) {
                ++rejected;
                if (sample.empty()) sample = e.what();
            }
        }
    }
    fs::remove_all(dir);
    report(identical == 50 && rejected == corrupt_cases, "weight files round-trip; corruption rejected",
           fmt("%zu/50 bit-identical, %zu/%zu corrupt rejected", identical, rejected, corrupt_cases) +
               (sample.empty() ? "" : " (e.g. \"" + sample + "\")"));
}

void sampler() {
    const Score score = generate_score({.onsets = 100, .seed = 55});
    SynthParams params;
    params.seed = 56;
    const auto synth = generate_performance(score, params);
    const auto states = sample_states(score, synth.performance, synth.truth);

    std::map<std::string, std::size_t> onset_of;
    for (std::size_t j = 0; j < score.size(); ++j)
        for (const auto& [pitch, ids] : score[j].note_ids)
            for (const auto& id : ids) onset_of[id] = j;
    std::size_t expected = 0;
    const long n = static_cast<long>(score.size());
    for (const auto& r : synth.truth.records) {
        if (r.kind != AlignmentRecord::Kind::match) continue;
        const long o = static_cast<long>(onset_of[r.score_id]);
        const long lo = std::max<long>(0, o + 8 - n), hi = std::min<long>(15, o + 7);
        if (hi >= lo) expected += static_cast<std::size_t>(hi - lo + 1);
    }
    std::set<std::size_t> slots;
    for (const auto& s : states) slots.insert(s.target_slot);
    report(states.size() == expected && slots.size() == 16, "state sampler count and slot coverage",
           fmt("%zu states (closed form %zu), %zu/16 target slots", states.size(), expected, slots.size()));
}

} // namespace

int main(int argc, char** argv) {
    std::optional<fs::path> vienna;
    for (int k = 1; k < argc; ++k) {
        const std::string arg = argv[k];
        if (arg == "--vienna" && k + 1 < argc) {
            vienna = argv[++k];
        } else {
            std::fprintf(stderr, "usage: %s [--vienna DIR]\n", argv[0]);
            return 2;
        }
    }
    dtw_oracle();
    offline_clean();
    offline_perturbed();
    offline_vienna(vienna);
    invariances();
    online();
    latency();
    weight_files();
    sampler();
    std::printf("%s: %d failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures;
}
