#pragma once

#include "symalign/agent_state.hpp"

#include <algorithm>
#include <random>

namespace symalign::testing {

/// Random valid agent state. Pitches stay within [low, high] so callers can
/// shift them without leaving the piano range.
inline AgentState random_state(std::mt19937_64& rng, int low = 13, int high = 76) {
    auto pick = [&](std::size_t a, std::size_t b) { return std::uniform_int_distribution<std::size_t>(a, b)(rng); };
    std::uniform_int_distribution<int> pitch(low, high);
    AgentState s;
    const std::size_t perf = pick(1, kPerfContext);
    for (std::size_t k = 0; k < perf; ++k) s.perf_window.emplace_back(pitch(rng));
    s.center = pick(0, kPastOnsets);
    const std::size_t future = pick(0, kFutureOnsets);
    s.first_onset = s.center == kPastOnsets ? pick(0, 500) : 0;
    for (std::size_t k = 0; k < s.center + 1 + future; ++k) {
        std::vector<PitchIndex> set;
        for (std::size_t m = pick(1, 9); m > 0; --m) set.emplace_back(pitch(rng));
        s.score_window.emplace_back(set);
    }
    // Plant the newest note in a few slots so the heuristic has a real choice.
    for (std::size_t k = 0; k < s.score_window.size(); ++k)
        if (pick(0, 3) == 0) {
            auto v = s.score_window[k].pitches();
            v.push_back(s.perf_window.back());
            s.score_window[k] = PitchSet(v);
        }
    return s;
}

} // namespace symalign::testing
