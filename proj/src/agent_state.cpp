#include "symalign/agent_state.hpp"

#include "symalign/error.hpp"

#include <algorithm>
#include <string>

namespace symalign {

std::optional<std::size_t> AgentState::window_index(std::size_t slot) const noexcept {
    if (slot >= kScoreSlots || slot + center < kCenterSlot) return std::nullopt;
    const std::size_t k = slot + center - kCenterSlot;
    if (k >= score_window.size()) return std::nullopt;
    return k;
}

std::optional<std::size_t> AgentState::onset_at_slot(std::size_t slot) const noexcept {
    auto k = window_index(slot);
    if (!k) return std::nullopt;
    return first_onset + *k;
}

void AgentState::validate() const {
    if (perf_window.empty() || perf_window.size() > kPerfContext)
        throw Error("agent state: performance window must hold 1..8 notes, has " + std::to_string(perf_window.size()));
    if (score_window.empty() || score_window.size() > kScoreSlots)
        throw Error("agent state: score window must hold 1..16 onsets, has " + std::to_string(score_window.size()));
    if (center >= score_window.size() || center > kPastOnsets)
        throw Error("agent state: center " + std::to_string(center) + " outside the past-onset range");
    if (score_window.size() - center - 1 > kFutureOnsets)
        throw Error("agent state: more than 8 future onsets");
    for (std::size_t k = 0; k < score_window.size(); ++k)
        if (score_window[k].empty()) throw Error("agent state: empty pitch set at window index " + std::to_string(k));
}

AgentState make_state(const Score& score, std::span<const PitchIndex> history, std::size_t center_onset) {
    if (center_onset >= score.size()) throw Error("make_state: center onset out of range");
    AgentState s;
    const std::size_t take = std::min(history.size(), kPerfContext);
    s.perf_window.assign(history.end() - static_cast<std::ptrdiff_t>(take), history.end());
    s.first_onset = center_onset >= kPastOnsets ? center_onset - kPastOnsets : 0;
    const std::size_t last = std::min(score.size() - 1, center_onset + kFutureOnsets);
    for (std::size_t j = s.first_onset; j <= last; ++j) s.score_window.push_back(score[j].pitch_set);
    s.center = center_onset - s.first_onset;
    return s;
}

TokenSeq tokenize(const AgentState& state) {
    state.validate();
    TokenSeq seq;
    seq.perf.fill(token::kNoPitch);
    for (auto& slot : seq.score) slot.fill(token::kNoPitch);

    const std::size_t pad = kPerfContext - state.perf_window.size();
    for (std::size_t k = 0; k < state.perf_window.size(); ++k) {
        seq.perf[pad + k] = token::of(state.perf_window[k]);
        seq.mask[pad + k] = true;
    }
    seq.mask[TokenSeq::kDelimiterPos] = true;
    seq.mask[TokenSeq::kEndPos] = true;

    for (std::size_t k = 0; k < state.score_window.size(); ++k) {
        const std::size_t slot = state.slot_of(k);
        const auto& pitches = state.score_window[k].pitches();  // ascending
        const std::size_t n = std::min(pitches.size(), kMaxSetSize);
        for (std::size_t m = 0; m < n; ++m) seq.score[slot][m] = token::of(pitches[m]);
        seq.mask[TokenSeq::kFirstScorePos + slot] = true;
    }
    return seq;
}

namespace {

// Strict weak order: better value first, then closer to center, then earlier.
bool ranks_before(const ActionValues& v, std::size_t a, std::size_t b) {
    if (v.q[a] != v.q[b]) return v.q[a] > v.q[b];
    auto dist = [](std::size_t s) { return s > kCenterSlot ? s - kCenterSlot : kCenterSlot - s; };
    if (dist(a) != dist(b)) return dist(a) < dist(b);
    return a < b;
}

} // namespace

std::optional<std::size_t> ActionValues::greedy_slot() const noexcept {
    std::optional<std::size_t> best;
    for (std::size_t s = 0; s < kScoreSlots; ++s) {
        if (masked(s)) continue;
        if (!best || ranks_before(*this, s, *best)) best = s;
    }
    return best;
}

std::vector<std::size_t> ActionValues::top_slots(std::size_t k) const {
    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < kScoreSlots; ++s)
        if (!masked(s)) slots.push_back(s);
    std::ranges::sort(slots, [this](std::size_t a, std::size_t b) { return ranks_before(*this, a, b); });
    if (slots.size() > k) slots.resize(k);
    return slots;
}

} // namespace symalign
