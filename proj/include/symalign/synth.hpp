#pragma once

#include "symalign/note_types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace symalign {

/// Tempo in BPM as a piecewise-linear function of score beats, constant
/// beyond its first and last points.
class TempoCurve {
public:
    explicit TempoCurve(double bpm = 120.0);
    /// Points as (beat, bpm); beats strictly increasing, bpm > 0.
    explicit TempoCurve(std::vector<std::pair<double, double>> points);

    double bpm_at(double beat) const noexcept;
    /// Elapsed seconds from beat 0 to `beat` (negative before beat 0).
    double seconds_at(double beat) const noexcept;

private:
    std::vector<std::pair<double, double>> points_;
};

struct SynthParams {
    TempoCurve tempo{120.0};
    double jitter_ms = 0.0;        // std of a per-onset timing offset
    double chord_spread_ms = 0.0;  // chord notes roll over [0, spread]
    double p_insert = 0.0;         // per played note
    double p_delete = 0.0;         // per score note
    std::uint64_t seed = 0;
};

struct SyntheticPerformance {
    Performance performance;
    NoteAlignment truth;
};

/// Renders `score` as a performance with known ground truth. Deterministic
/// for a fixed seed.
SyntheticPerformance generate_performance(const Score& score, const SynthParams& params);

struct ScoreGenParams {
    std::size_t onsets = 200;
    double chord_probability = 0.35;
    std::size_t max_chord = 4;
    double repeat_probability = 0.08;   // onset repeats the previous pitch set
    double doubling_probability = 0.03; // two voices share a pitch
    int low_midi = 36;
    int high_midi = 96;
    std::uint64_t seed = 0;
};

/// Random piano-like piece: a melody over optional chords, with repeated
/// onsets and voice doublings to exercise ambiguity handling.
Score generate_score(const ScoreGenParams& params);

/// Random tempo curve between `min_bpm` and `max_bpm` over `beats` beats.
TempoCurve random_tempo_curve(std::uint64_t seed, double beats, double min_bpm = 80.0, double max_bpm = 140.0);

} // namespace symalign
