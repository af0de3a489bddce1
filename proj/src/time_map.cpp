#include "symalign/time_map.hpp"

#include "symalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symalign {

TimeMap::TimeMap(std::vector<TimeAnchor> anchors) : anchors_(std::move(anchors)) {
    if (anchors_.empty()) throw Error("time map needs at least one anchor");
    for (std::size_t k = 0; k < anchors_.size(); ++k) {
        if (!std::isfinite(anchors_[k].beat) || !std::isfinite(anchors_[k].sec))
            throw Error("time map anchor " + std::to_string(k) + " is not finite");
        if (k == 0) continue;
        if (!(anchors_[k].beat > anchors_[k - 1].beat))
            throw Error("time map anchor " + std::to_string(k) + ": beats must strictly increase");
        if (anchors_[k].sec < anchors_[k - 1].sec)
            throw Error("time map anchor " + std::to_string(k) + ": seconds must not decrease");
    }
}

double TimeMap::operator()(double beat) const noexcept {
    if (anchors_.size() == 1) return anchors_[0].sec + (beat - anchors_[0].beat) * kDefaultBeatPeriod;

    auto upper = std::upper_bound(anchors_.begin(), anchors_.end(), beat,
                                  [](double b, const TimeAnchor& a) { return b < a.beat; });
    if (upper == anchors_.begin()) ++upper;
    if (upper == anchors_.end()) --upper;
    const TimeAnchor& lo = *(upper - 1);
    const TimeAnchor& hi = *upper;
    const double slope = (hi.sec - lo.sec) / (hi.beat - lo.beat);
    return lo.sec + (beat - lo.beat) * slope;
}

} // namespace symalign
