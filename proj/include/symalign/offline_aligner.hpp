#pragma once

#include "symalign/dtw.hpp"
#include "symalign/note_types.hpp"
#include "symalign/time_map.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace symalign {

// Two-step offline alignment: pitch-sequence warping with bracket cleanup
// yields a score-to-performance time map; per-pitch onset warping under that
// map then produces the note alignment.
//
// Throughout, IndexPair::i indexes performance notes and IndexPair::j
// indexes score onsets.

struct OfflineConfig {
    /// Links between a performed note and a projected score onset further
    /// apart than this are broken.
    double cutoff_sec = 5.0;
    /// Worker count for per-pitch channels; 0 reads SYMALIGN_THREADS.
    std::size_t threads = 0;
};

/// Forward and backward inclusion-metric DTW of the performance pitch
/// sequence against the score pitch-set sequence, split into agreed pairs
/// and ambiguity brackets.
PathAgreement pitch_sequence_align(const Score& score, const Performance& perf);

/// Fills brackets: per pitch, equal performance/score counts are paired in
/// temporal order; every other bracketed performance note is placed by linear
/// interpolation between the bracket's anchors. A score pitch counts once per
/// onset; the anchor onsets add the pitches not already taken by `agreed` or
/// by the anchors themselves. Emits exactly one pair per bracketed performance
/// note, sorted by performance index.
std::vector<IndexPair> resolve_brackets(const std::vector<Bracket>& brackets, const Score& score,
                                        const Performance& perf, std::span<const IndexPair> agreed = {});

/// One anchor per paired score onset at the median time of its performance
/// notes. Anchors that would make the map run backwards are dropped, keeping
/// the earlier one. Throws Error on an empty pair list.
TimeMap build_time_map(const std::vector<IndexPair>& pairs, const Score& score, const Performance& perf);

struct ChannelPerfNote {
    std::size_t perf_index;
    double onset_sec;
};

struct ChannelScoreOnset {
    std::size_t onset_index;
    double beat;
    std::vector<std::string> score_ids;  // several voices may double a pitch
};

/// Performance and score onsets of a single pitch, each in temporal order.
struct PitchChannel {
    PitchIndex pitch{PitchIndex::kMin};
    std::vector<ChannelPerfNote> perf;
    std::vector<ChannelScoreOnset> score;
};

/// One channel per pitch in the union of score and performance pitches,
/// ordered by pitch.
std::vector<PitchChannel> split_by_pitch(const Score& score, const Performance& perf);

/// Per-pitch L1 DTW between performed onsets and score onsets projected
/// through `map`. Multiple links on one note keep the lowest distance;
/// links beyond the cutoff are dropped. A score onset takes one performed
/// note per pitch, matched to its first voice id. Unlinked performance notes become
/// insertions and unlinked score notes deletions.
NoteAlignment onset_align(const Score& score, const Performance& perf, const TimeMap& map,
                          const OfflineConfig& config = {});

/// Full pipeline. Both inputs must be non-empty.
NoteAlignment align_offline(const Score& score, const Performance& perf, const OfflineConfig& config = {});

} // namespace symalign
