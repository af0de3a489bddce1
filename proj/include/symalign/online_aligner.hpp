#pragma once

#include "symalign/note_types.hpp"
#include "symalign/time_map.hpp"
#include "symalign/value_model.hpp"

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace symalign {

struct OnlineConfig {
    /// How many top-valued slots the alignment policy considers.
    std::size_t candidates = 3;
    /// Beat period assumed before two distinct beats have been matched.
    double default_beat_period = 0.5;
    /// Distinct matched beats used for the tempo regression.
    std::size_t tempo_points = 5;
    double min_beat_period = 0.05;
    double max_beat_period = 5.0;
    /// Alignment candidates whose expected time misses the note by more than
    /// this plus the time since the last match are dropped. Unset keeps all.
    std::optional<double> time_slack_sec = 1.0;
};

/// A performed note placed at a score onset.
struct MatchedOnset {
    std::size_t onset_index = 0;
    double onset_sec = 0.0;
    double beat = 0.0;
};

struct TempoEstimate {
    double beat_period = 0.5;  // seconds per beat
    TimeAnchor anchor;

    /// Linear extrapolation from the anchor.
    double predict(double beat) const noexcept { return anchor.sec + beat_period * (beat - anchor.beat); }
};

/// Least-squares slope of seconds over beats across the most recent
/// `tempo_points` distinct matched beats (times at one beat are averaged),
/// clamped to the configured range. With fewer than two distinct beats the
/// default period is used. The anchor is the latest match, else `fallback`.
TempoEstimate estimate_tempo(std::span<const MatchedOnset> matched, const OnlineConfig& config = {},
                             std::optional<TimeAnchor> fallback = std::nullopt);

struct OnlineDecision {
    enum class Kind { match, insertion };

    Kind kind = Kind::insertion;
    std::size_t onset_index = 0;  // position after the decision
    std::string score_id;         // set for matches
};

enum class Policy {
    greedy,     // GAM: follow the argmax slot
    alignment,  // OAM: top candidates filtered by pitch and tempo
};

struct FollowReport {
    std::size_t onset_index = 0;
    double beat = 0.0;
    double estimated_sec = 0.0;  // tempo-model time of the reported onset
    bool insertion = false;
};

/// Per-performance follower state. Notes must be fed in performance order;
/// each decision sees only the notes fed so far. The score and value
/// function must outlive the session.
class FollowerSession {
public:
    FollowerSession(const Score& score, const ValueFunction& value_fn, OnlineConfig config = {});

    /// Greedy step: moves to the argmax slot of the value function.
    std::size_t gam_step(const PerfNote& note);

    /// Alignment step: shortcut at the current onset, otherwise top
    /// candidates still expecting the pitch, chosen by expected onset time.
    OnlineDecision oam_step(const PerfNote& note);

    FollowReport follow(const PerfNote& note, Policy policy);

    /// Alignment so far plus a deletion for every score note never consumed.
    /// A pitch sounds once per onset: matching it consumes every voice that
    /// doubles it, and all but the first become deletions.
    NoteAlignment finalize() const;

    std::size_t current_onset() const noexcept { return current_; }
    const std::vector<MatchedOnset>& matched() const noexcept { return matched_; }
    /// How many times the value function was consulted.
    std::size_t value_calls() const noexcept { return value_calls_; }
    TempoEstimate tempo() const;

private:
    void observe(const PerfNote& note);
    void consume(std::size_t onset, const PerfNote& note, std::string& score_id);

    const Score& score_;
    const ValueFunction& value_fn_;
    OnlineConfig config_;
    std::size_t current_ = 0;
    std::vector<PitchIndex> history_;
    std::vector<MatchedOnset> matched_;
    std::vector<std::map<PitchIndex, std::deque<std::string>>> pending_;
    std::vector<std::string> doubled_;  // voices sharing a key that was already struck
    NoteAlignment emitted_;
    std::optional<double> first_note_sec_;
    std::size_t value_calls_ = 0;
};

/// Runs a whole performance through a fresh OAM session.
NoteAlignment align_online(const Score& score, const Performance& perf, const ValueFunction& value_fn,
                           const OnlineConfig& config = {});

/// Runs a whole performance through a fresh session, one report per note.
std::vector<FollowReport> follow_performance(const Score& score, const Performance& perf,
                                             const ValueFunction& value_fn, Policy policy,
                                             const OnlineConfig& config = {});

} // namespace symalign
