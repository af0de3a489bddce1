#include "symalign/online_aligner.hpp"

#include "symalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

namespace symalign {

TempoEstimate estimate_tempo(std::span<const MatchedOnset> matched, const OnlineConfig& config,
                             std::optional<TimeAnchor> fallback) {
    TempoEstimate est;
    est.beat_period = config.default_beat_period;
    if (matched.empty()) {
        est.anchor = fallback.value_or(TimeAnchor{0.0, 0.0});
        return est;
    }
    est.anchor = {matched.back().beat, matched.back().onset_sec};

    struct Point {
        double beat;
        double sec_sum;
        int count;
    };
    std::vector<Point> points;
    for (auto it = matched.rbegin(); it != matched.rend(); ++it) {
        auto p = std::ranges::find_if(points, [&](const Point& q) { return q.beat == it->beat; });
        if (p != points.end()) {
            p->sec_sum += it->onset_sec;
            ++p->count;
            continue;
        }
        if (points.size() == config.tempo_points) break;
        points.push_back({it->beat, it->onset_sec, 1});
    }
    if (points.size() < 2) return est;

    double mean_b = 0.0, mean_t = 0.0;
    for (const auto& p : points) {
        mean_b += p.beat;
        mean_t += p.sec_sum / p.count;
    }
    mean_b /= static_cast<double>(points.size());
    mean_t /= static_cast<double>(points.size());
    double sbt = 0.0, sbb = 0.0;
    for (const auto& p : points) {
        const double db = p.beat - mean_b;
        sbt += db * (p.sec_sum / p.count - mean_t);
        sbb += db * db;
    }
    est.beat_period = std::clamp(sbt / sbb, config.min_beat_period, config.max_beat_period);
    return est;
}

FollowerSession::FollowerSession(const Score& score, const ValueFunction& value_fn, OnlineConfig config)
    : score_(score), value_fn_(value_fn), config_(config), pending_(score.size()) {
    if (score.empty()) throw Error("follower session needs a non-empty score");
    if (config_.candidates == 0) throw Error("follower session needs at least one candidate");
    for (std::size_t j = 0; j < score.size(); ++j)
        for (const auto& [pitch, ids] : score[j].note_ids) pending_[j][pitch].assign(ids.begin(), ids.end());
}

void FollowerSession::observe(const PerfNote& note) {
    if (!first_note_sec_) first_note_sec_ = note.onset_sec;
    history_.push_back(note.pitch);
    if (history_.size() > kPerfContext) history_.erase(history_.begin());
}

TempoEstimate FollowerSession::tempo() const {
    std::optional<TimeAnchor> fallback;
    if (first_note_sec_) fallback = TimeAnchor{score_[0].beat, *first_note_sec_};
    return estimate_tempo(matched_, config_, fallback);
}

void FollowerSession::consume(std::size_t onset, const PerfNote& note, std::string& score_id) {
    auto& queue = pending_[onset][note.pitch];
    score_id = std::move(queue.front());
    queue.pop_front();
    std::ranges::move(queue, std::back_inserter(doubled_));
    queue.clear();
    current_ = onset;
    matched_.push_back({onset, note.onset_sec, score_[onset].beat});
    emitted_.records.push_back(AlignmentRecord::match(note.id, score_id));
}

std::size_t FollowerSession::gam_step(const PerfNote& note) {
    observe(note);
    const AgentState state = make_state(score_, history_, current_);
    ++value_calls_;
    if (const auto slot = value_fn_.evaluate(state).greedy_slot())
        if (const auto onset = state.onset_at_slot(*slot)) current_ = *onset;
    matched_.push_back({current_, note.onset_sec, score_[current_].beat});
    return current_;
}

OnlineDecision FollowerSession::oam_step(const PerfNote& note) {
    observe(note);
    OnlineDecision decision;

    auto has_pending = [&](std::size_t onset) {
        auto it = pending_[onset].find(note.pitch);
        return it != pending_[onset].end() && !it->second.empty();
    };

    if (has_pending(current_)) {
        decision.kind = OnlineDecision::Kind::match;
        consume(current_, note, decision.score_id);
        decision.onset_index = current_;
        return decision;
    }

    const AgentState state = make_state(score_, history_, current_);
    ++value_calls_;
    const ActionValues values = value_fn_.evaluate(state);
    const TempoEstimate est = tempo();
    double slack = std::numeric_limits<double>::infinity();
    if (config_.time_slack_sec && !matched_.empty())
        slack = *config_.time_slack_sec + std::max(0.0, note.onset_sec - matched_.back().onset_sec);

    std::optional<std::size_t> best;
    double best_gap = 0.0;
    for (std::size_t slot : values.top_slots(config_.candidates)) {
        const auto onset = state.onset_at_slot(slot);
        if (!onset || !score_[*onset].pitch_set.contains(note.pitch) || !has_pending(*onset)) continue;
        const double gap = std::abs(note.onset_sec - est.predict(score_[*onset].beat));
        if (gap > slack) continue;
        if (!best || gap < best_gap) {
            best = *onset;
            best_gap = gap;
        }
    }
    if (!best) {
        decision.kind = OnlineDecision::Kind::insertion;
        decision.onset_index = current_;
        emitted_.records.push_back(AlignmentRecord::insertion(note.id));
        return decision;
    }

    decision.kind = OnlineDecision::Kind::match;
    consume(*best, note, decision.score_id);
    decision.onset_index = current_;
    return decision;
}

FollowReport FollowerSession::follow(const PerfNote& note, Policy policy) {
    FollowReport report;
    if (policy == Policy::greedy) {
        report.onset_index = gam_step(note);
    } else {
        const auto d = oam_step(note);
        report.onset_index = d.onset_index;
        report.insertion = d.kind == OnlineDecision::Kind::insertion;
    }
    report.beat = score_[report.onset_index].beat;
    report.estimated_sec = tempo().predict(report.beat);
    return report;
}

NoteAlignment FollowerSession::finalize() const {
    NoteAlignment out = emitted_;
    for (const auto& onset : pending_)
        for (const auto& [pitch, ids] : onset)
            for (const auto& id : ids) out.records.push_back(AlignmentRecord::deletion(id));
    for (const auto& id : doubled_) out.records.push_back(AlignmentRecord::deletion(id));
    return out;
}

NoteAlignment align_online(const Score& score, const Performance& perf, const ValueFunction& value_fn,
                           const OnlineConfig& config) {
    FollowerSession session(score, value_fn, config);
    for (const auto& note : perf.notes()) session.oam_step(note);
    return session.finalize();
}

std::vector<FollowReport> follow_performance(const Score& score, const Performance& perf,
                                             const ValueFunction& value_fn, Policy policy,
                                             const OnlineConfig& config) {
    FollowerSession session(score, value_fn, config);
    std::vector<FollowReport> reports;
    reports.reserve(perf.size());
    for (const auto& note : perf.notes()) reports.push_back(session.follow(note, policy));
    return reports;
}

} // namespace symalign
