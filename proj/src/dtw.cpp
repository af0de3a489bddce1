#include "symalign/dtw.hpp"

#include <algorithm>
#include <iterator>

namespace symalign {

PathAgreement disagreement_brackets(const WarpPath& forward, const WarpPath& backward) {
    if (forward.pairs.empty() || backward.pairs.empty() || forward.pairs.front() != backward.pairs.front() ||
        forward.pairs.back() != backward.pairs.back())
        throw Error("disagreement_brackets: paths must span the same grid");

    // Monotone paths are already sorted lexicographically.
    PathAgreement out;
    std::ranges::set_intersection(forward.pairs, backward.pairs, std::back_inserter(out.agreed));

    std::size_t kf = 0, kb = 0;
    for (std::size_t k = 1; k < out.agreed.size(); ++k) {
        const IndexPair lo = out.agreed[k - 1];
        const IndexPair hi = out.agreed[k];
        while (forward.pairs[kf] != lo) ++kf;
        while (backward.pairs[kb] != lo) ++kb;
        const bool direct = forward.pairs[kf + 1] == hi && backward.pairs[kb + 1] == hi;
        if (direct) continue;
        Bracket b{lo, hi};
        if (b.a_begin() < b.a_end() || b.b_begin() < b.b_end()) out.brackets.push_back(b);
    }
    return out;
}

bool is_valid_path(const WarpPath& path, std::size_t n, std::size_t m) {
    if (path.pairs.empty() || n == 0 || m == 0) return false;
    if (path.pairs.front() != IndexPair{0, 0} || path.pairs.back() != IndexPair{n - 1, m - 1}) return false;
    for (std::size_t k = 1; k < path.pairs.size(); ++k) {
        const auto& a = path.pairs[k - 1];
        const auto& b = path.pairs[k];
        if (b.i < a.i || b.j < a.j) return false;
        const std::size_t di = b.i - a.i, dj = b.j - a.j;
        if (di > 1 || dj > 1 || di + dj == 0) return false;
    }
    return true;
}

} // namespace symalign
