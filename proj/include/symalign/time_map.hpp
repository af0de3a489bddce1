#pragma once

#include <vector>

namespace symalign {

struct TimeAnchor {
    double beat = 0.0;
    double sec = 0.0;

    bool operator==(const TimeAnchor&) const = default;
};

/// Monotone piecewise-linear score-time -> performance-time map. Beyond the
/// first and last anchors the end segments extrapolate linearly; a single
/// anchor implies a constant tempo of `kDefaultBeatPeriod` sec/beat.
class TimeMap {
public:
    static constexpr double kDefaultBeatPeriod = 0.5;

    /// Throws Error unless there is at least one anchor, beats strictly
    /// increase and seconds never decrease.
    explicit TimeMap(std::vector<TimeAnchor> anchors);

    double operator()(double beat) const noexcept;

    const std::vector<TimeAnchor>& anchors() const noexcept { return anchors_; }

private:
    std::vector<TimeAnchor> anchors_;
};

} // namespace symalign
