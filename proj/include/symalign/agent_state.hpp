#pragma once

#include "symalign/note_types.hpp"

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace symalign {

// Window geometry: 7 past onsets, the current onset, 8 future onsets on the
// score side; the 8 most recent notes on the performance side.
inline constexpr std::size_t kPerfContext = 8;
inline constexpr std::size_t kPastOnsets = 7;
inline constexpr std::size_t kFutureOnsets = 8;
inline constexpr std::size_t kScoreSlots = kPastOnsets + 1 + kFutureOnsets;
inline constexpr std::size_t kCenterSlot = kPastOnsets;
inline constexpr std::size_t kMaxSetSize = 7;

/// What the agent sees before matching the newest performance note.
///
/// `score_window` is a contiguous run of score onsets starting at
/// `first_onset`; `center` indexes the last predicted onset inside it. Slots
/// are laid out with the center on slot 7, so a window shortened at a piece
/// boundary leaves the outer slots empty.
struct AgentState {
    std::vector<PitchIndex> perf_window;  // oldest first, newest last
    std::vector<PitchSet> score_window;
    std::size_t first_onset = 0;
    std::size_t center = 0;

    /// Slot (0..15) holding score_window[k].
    std::size_t slot_of(std::size_t k) const noexcept { return kCenterSlot - center + k; }
    /// Index into score_window shown at `slot`, if any.
    std::optional<std::size_t> window_index(std::size_t slot) const noexcept;
    /// Absolute score onset index shown at `slot`, if any.
    std::optional<std::size_t> onset_at_slot(std::size_t slot) const noexcept;

    /// Throws Error when the window sizes or center break the layout.
    void validate() const;

    bool operator==(const AgentState&) const = default;
};

/// State centered on `center_onset`, using the last (up to 8) entries of
/// `history` as the performance window.
AgentState make_state(const Score& score, std::span<const PitchIndex> history, std::size_t center_onset);

namespace token {
inline constexpr int kNoPitch = 88;
inline constexpr int kDelimiter = 89;
inline constexpr int kEnd = 90;
inline constexpr int kVocabulary = 91;

inline int of(PitchIndex p) noexcept { return p.value() - 1; }
} // namespace token

/// Fixed 26-slot layout: 8 performance slots, delimiter, 16 score slots, end.
/// Score slots hold up to 7 pitch tokens each (no_pitch filled).
struct TokenSeq {
    static constexpr std::size_t kLength = kPerfContext + 1 + kScoreSlots + 1;
    static constexpr std::size_t kDelimiterPos = kPerfContext;
    static constexpr std::size_t kFirstScorePos = kPerfContext + 1;
    static constexpr std::size_t kEndPos = kLength - 1;

    std::array<int, kPerfContext> perf{};
    std::array<std::array<int, kMaxSetSize>, kScoreSlots> score{};
    std::array<bool, kLength> mask{};  // true = real token

    bool operator==(const TokenSeq&) const = default;
};

/// Performance notes are right-aligned against the delimiter; score sets
/// larger than 7 keep their 7 lowest pitches.
TokenSeq tokenize(const AgentState& state);

/// Per-slot probability that choosing the slot earns reward 1. Slots outside
/// the window hold -infinity. Values are independent per slot and need not
/// sum to one.
struct ActionValues {
    static constexpr double kMasked = -std::numeric_limits<double>::infinity();

    std::array<double, kScoreSlots> q;

    ActionValues() { q.fill(kMasked); }

    bool masked(std::size_t slot) const noexcept { return q[slot] == kMasked; }

    /// Highest value; ties go to the slot nearest the center, then the
    /// earlier slot. Returns nullopt only if every slot is masked.
    std::optional<std::size_t> greedy_slot() const noexcept;

    /// Up to `k` unmasked slots ranked as greedy_slot() would rank them.
    std::vector<std::size_t> top_slots(std::size_t k) const;
};

} // namespace symalign
