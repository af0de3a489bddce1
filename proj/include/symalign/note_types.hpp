#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace symalign {

/// Piano key index 1..88 (MIDI pitch minus 20).
class PitchIndex {
public:
    static constexpr int kMin = 1;
    static constexpr int kMax = 88;
    static constexpr int kMidiOffset = 20;

    /// Throws Error when value is outside 1..88.
    explicit PitchIndex(int value);

    static PitchIndex from_midi(int midi_pitch);
    static bool valid(int value) noexcept { return value >= kMin && value <= kMax; }
    static bool valid_midi(int midi_pitch) noexcept { return valid(midi_pitch - kMidiOffset); }

    int value() const noexcept { return value_; }
    int midi() const noexcept { return value_ + kMidiOffset; }

    auto operator<=>(const PitchIndex&) const = default;

private:
    int value_;
};

/// Sorted, duplicate-free set of pitches sounding at one score onset.
class PitchSet {
public:
    PitchSet() = default;
    explicit PitchSet(std::vector<PitchIndex> pitches);

    bool contains(PitchIndex p) const noexcept;
    bool empty() const noexcept { return pitches_.empty(); }
    std::size_t size() const noexcept { return pitches_.size(); }
    const std::vector<PitchIndex>& pitches() const noexcept { return pitches_; }
    auto begin() const noexcept { return pitches_.begin(); }
    auto end() const noexcept { return pitches_.end(); }

    bool operator==(const PitchSet&) const = default;

private:
    std::vector<PitchIndex> pitches_;
};

struct PerfNote {
    std::string id;
    PitchIndex pitch{PitchIndex::kMin};
    double onset_sec = 0.0;
    int velocity = 64;

    bool operator==(const PerfNote&) const = default;
};

/// Performed notes ordered by onset, then pitch, then id.
class Performance {
public:
    Performance() = default;
    /// Sorts the notes; throws SchemaError on duplicate ids or bad fields.
    explicit Performance(std::vector<PerfNote> notes);

    const std::vector<PerfNote>& notes() const noexcept { return notes_; }
    std::size_t size() const noexcept { return notes_.size(); }
    bool empty() const noexcept { return notes_.empty(); }
    const PerfNote& operator[](std::size_t i) const { return notes_[i]; }

    bool operator==(const Performance&) const = default;

private:
    std::vector<PerfNote> notes_;
};

struct ScoreOnset {
    double beat = 0.0;
    PitchSet pitch_set;
    /// Score-note ids per sounding pitch. Several voices may share a pitch.
    std::map<PitchIndex, std::vector<std::string>> note_ids;

    bool operator==(const ScoreOnset&) const = default;
};

class Score {
public:
    Score() = default;
    /// Throws SchemaError unless beats strictly increase, every onset is
    /// non-empty, and score-note ids are unique.
    explicit Score(std::vector<ScoreOnset> onsets);

    const std::vector<ScoreOnset>& onsets() const noexcept { return onsets_; }
    std::size_t size() const noexcept { return onsets_.size(); }
    bool empty() const noexcept { return onsets_.empty(); }
    const ScoreOnset& operator[](std::size_t i) const { return onsets_[i]; }

    std::size_t note_count() const noexcept;

    bool operator==(const Score&) const = default;

private:
    std::vector<ScoreOnset> onsets_;
};

/// Input to score_from_notes: one notated note.
struct ScoreNote {
    std::string id;
    PitchIndex pitch{PitchIndex::kMin};
    double onset_beat = 0.0;
    double duration_beat = 0.0;
};

/// Groups notes sharing an onset beat into one ScoreOnset. Duplicate pitches
/// at one beat collapse in the pitch set but keep every id, in input order.
Score score_from_notes(const std::vector<ScoreNote>& notes);

struct AlignmentRecord {
    enum class Kind { match, insertion, deletion };

    Kind kind = Kind::match;
    std::string perf_id;   // empty for deletions
    std::string score_id;  // empty for insertions

    static AlignmentRecord match(std::string perf_id, std::string score_id);
    static AlignmentRecord insertion(std::string perf_id);
    static AlignmentRecord deletion(std::string score_id);

    bool operator==(const AlignmentRecord&) const = default;
};

const char* to_string(AlignmentRecord::Kind kind) noexcept;

struct NoteAlignment {
    std::vector<AlignmentRecord> records;

    std::size_t count(AlignmentRecord::Kind kind) const noexcept;

    bool operator==(const NoteAlignment&) const = default;
};

/// Throws Error if any perf id or score id appears in more than one record.
void check_alignment(const NoteAlignment& alignment);

/// Stronger form: additionally every note of `score` and `perf` appears in
/// exactly one record, no unknown ids appear, and every match pairs equal
/// pitches.
void check_alignment(const NoteAlignment& alignment, const Score& score, const Performance& perf);

} // namespace symalign
