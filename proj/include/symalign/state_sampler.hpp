#pragma once

#include "symalign/agent_state.hpp"
#include "symalign/note_types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace symalign {

/// A training state with its reward label: slot `target_slot` earns 1, every
/// other unmasked slot 0.
struct SampledState {
    AgentState state;
    std::size_t target_slot = 0;

    bool operator==(const SampledState&) const = default;
};

/// For every truth-matched performance note, one state per placement of its
/// true onset at slots 0..15 whose implied center lies inside the score.
/// The performance window ends with the note itself.
std::vector<SampledState> sample_states(const Score& score, const Performance& perf, const NoteAlignment& truth);

/// Shifts every pitch of both windows by `shift` semitones, first clamped
/// so all pitches stay within 1..88.
SampledState augment_pitch_shift(const SampledState& s, int shift);

// Newline-delimited records:
//   {"perf_pitches":[int],"score_sets":[[int]],"center":int,"target_slot":int,"first_onset":int}
// Pitches are piano indices 1..88; score_sets lists the window contiguously
// and center indexes into it. target_slot uses the 16-slot layout (center
// at slot 7). first_onset is optional on input and defaults to 0.
std::string states_to_ndjson(const std::vector<SampledState>& states);
std::vector<SampledState> parse_states_ndjson(const std::string& text);

void export_states(const std::vector<SampledState>& states, const std::filesystem::path& path);
std::vector<SampledState> import_states(const std::filesystem::path& path);

} // namespace symalign
