#include "symalign/value_model.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace symalign {

namespace {

constexpr double kPenalty = 1e-3;

struct Fit {
    long gain = 0;  // matched notes minus skipped onsets
    long disorder = 0;

    double score() const noexcept { return static_cast<double>(gain) - kPenalty * static_cast<double>(disorder); }
    bool operator<(const Fit& o) const noexcept { return gain != o.gain ? gain < o.gain : disorder > o.disorder; }
};

// Best placement of the longest suffix of `perf`, newest note first, into
// window slots ending at `end`. Notes move to earlier slots in order; a slot
// absorbs any run of notes it contains. Every onset skipped between slots
// costs one matched note. Simultaneous notes arrive in ascending pitch, so
// each consecutive pair inside one slot that does not rise costs a fraction.
class SuffixFit {
public:
    SuffixFit(const std::vector<PitchIndex>& perf, const std::vector<PitchSet>& window)
        : perf_(perf), window_(window) {}

    Fit at(std::size_t end) {
        if (!window_[end].contains(perf_.back())) return {};
        return from(perf_.size() - 1, end);
    }

private:
    // Notes m, m-1, ... with note m opening a group at slot `pos`.
    Fit from(std::size_t m, std::size_t pos) {
        auto& cell = memo_[m][pos];
        if (cell) return *cell;
        Fit best;
        long disorder = 0;
        for (std::size_t g = m + 1; g-- > 0;) {
            if (!window_[pos].contains(perf_[g])) break;
            if (g < m && !(perf_[g] < perf_[g + 1])) ++disorder;
            Fit here{static_cast<long>(m + 1 - g), disorder};
            if (g > 0) {
                Fit tail;
                for (std::size_t k = pos; k-- > 0;) {
                    if (!window_[k].contains(perf_[g - 1])) continue;
                    Fit next = from(g - 1, k);
                    next.gain -= static_cast<long>(pos - k - 1);
                    if (tail < next) tail = next;
                }
                here.gain += tail.gain;
                here.disorder += tail.disorder;
            }
            if (best < here) best = here;
        }
        cell = best;
        return best;
    }

    const std::vector<PitchIndex>& perf_;
    const std::vector<PitchSet>& window_;
    std::array<std::array<std::optional<Fit>, kScoreSlots>, kPerfContext> memo_{};
};

} // namespace

ActionValues heuristic_values(const AgentState& state) {
    state.validate();
    ActionValues out;
    const double n = static_cast<double>(state.perf_window.size());
    SuffixFit fit(state.perf_window, state.score_window);
    for (std::size_t k = 0; k < state.score_window.size(); ++k)
        out.q[state.slot_of(k)] = std::max(0.0, fit.at(k).score() / n);
    return out;
}

} // namespace symalign
