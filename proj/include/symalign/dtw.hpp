#pragma once

#include "symalign/error.hpp"
#include "symalign/note_types.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ranges>
#include <vector>

namespace symalign {

struct IndexPair {
    std::size_t i = 0;  // index into sequence A
    std::size_t j = 0;  // index into sequence B

    auto operator<=>(const IndexPair&) const = default;
};

/// Monotone warping path from (0,0) to (|A|-1,|B|-1) with unit steps.
struct WarpPath {
    std::vector<IndexPair> pairs;

    bool operator==(const WarpPath&) const = default;
};

struct WarpResult {
    double cost = 0.0;
    WarpPath path;
};

/// Inclusion metric: 0 when the performed pitch sounds in the onset, else 1.
inline double inclusion_cost(PitchIndex p, const PitchSet& s) { return s.contains(p) ? 0.0 : 1.0; }

namespace detail {

/// Predecessor codes packed four to a byte.
class StepMatrix {
public:
    enum Step : std::uint8_t { origin = 0, diagonal = 1, advance_a = 2, advance_b = 3 };

    StepMatrix(std::size_t rows, std::size_t cols) : cols_(cols), bits_((rows * cols + 3) / 4, 0) {}

    void set(std::size_t i, std::size_t j, Step s) {
        const std::size_t k = i * cols_ + j;
        bits_[k / 4] |= static_cast<std::uint8_t>(s << (2 * (k % 4)));
    }

    Step get(std::size_t i, std::size_t j) const {
        const std::size_t k = i * cols_ + j;
        return static_cast<Step>((bits_[k / 4] >> (2 * (k % 4))) & 0x3);
    }

private:
    std::size_t cols_;
    std::vector<std::uint8_t> bits_;
};

/// Cumulative-cost DP over an n x m grid with steps (1,0), (0,1), (1,1).
/// Ties prefer the diagonal, then the A-advancing step, then the B-advancing
/// step.
template <class Cost>
WarpResult warp(std::size_t n, std::size_t m, Cost&& cost) {
    if (n == 0 || m == 0) throw Error("dtw requires two non-empty sequences");

    StepMatrix steps(n, m);
    std::vector<double> prev(m), cur(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double local = cost(i, j);
            if (i == 0 && j == 0) {
                cur[0] = local;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            StepMatrix::Step step = StepMatrix::origin;
            if (i > 0 && j > 0) {
                best = prev[j - 1];
                step = StepMatrix::diagonal;
            }
            if (i > 0 && prev[j] < best) {
                best = prev[j];
                step = StepMatrix::advance_a;
            }
            if (j > 0 && cur[j - 1] < best) {
                best = cur[j - 1];
                step = StepMatrix::advance_b;
            }
            cur[j] = best + local;
            steps.set(i, j, step);
        }
        std::swap(prev, cur);
    }

    WarpResult result;
    result.cost = prev[m - 1];
    std::size_t i = n - 1, j = m - 1;
    result.path.pairs.push_back({i, j});
    while (i > 0 || j > 0) {
        switch (steps.get(i, j)) {
        case StepMatrix::diagonal: --i, --j; break;
        case StepMatrix::advance_a: --i; break;
        case StepMatrix::advance_b: --j; break;
        case StepMatrix::origin: throw Error("dtw backtrack reached an unset cell");
        }
        result.path.pairs.push_back({i, j});
    }
    std::ranges::reverse(result.path.pairs);
    return result;
}

} // namespace detail

/// Standard DTW between `a` and `b` under `metric(a[i], b[j]) >= 0`.
/// Returns the unnormalized optimal cost and one optimal path.
template <std::ranges::random_access_range A, std::ranges::random_access_range B, class Metric>
WarpResult dtw(const A& a, const B& b, Metric&& metric) {
    const auto n = static_cast<std::size_t>(std::ranges::size(a));
    const auto m = static_cast<std::size_t>(std::ranges::size(b));
    auto ia = std::ranges::begin(a);
    auto ib = std::ranges::begin(b);
    return detail::warp(n, m, [&](std::size_t i, std::size_t j) {
        return static_cast<double>(metric(ia[static_cast<std::ptrdiff_t>(i)], ib[static_cast<std::ptrdiff_t>(j)]));
    });
}

/// DTW on the reversed sequences, mapped back to forward orientation. The
/// cost equals the forward cost; the path may differ where optima tie.
template <std::ranges::random_access_range A, std::ranges::random_access_range B, class Metric>
WarpResult dtw_backward(const A& a, const B& b, Metric&& metric) {
    const auto n = static_cast<std::size_t>(std::ranges::size(a));
    const auto m = static_cast<std::size_t>(std::ranges::size(b));
    auto ia = std::ranges::begin(a);
    auto ib = std::ranges::begin(b);
    auto result = detail::warp(n, m, [&](std::size_t i, std::size_t j) {
        return static_cast<double>(metric(ia[static_cast<std::ptrdiff_t>(n - 1 - i)],
                                          ib[static_cast<std::ptrdiff_t>(m - 1 - j)]));
    });
    for (auto& p : result.path.pairs) p = {n - 1 - p.i, m - 1 - p.j};
    std::ranges::reverse(result.path.pairs);
    return result;
}

/// Region between two consecutive agreed pairs where the paths disagree.
/// Index ranges are half-open and exclude the anchors themselves.
struct Bracket {
    IndexPair lower;  // agreed anchor preceding the region
    IndexPair upper;  // agreed anchor following the region

    std::size_t a_begin() const noexcept { return lower.i + 1; }
    std::size_t a_end() const noexcept { return upper.i; }
    std::size_t b_begin() const noexcept { return lower.j + 1; }
    std::size_t b_end() const noexcept { return upper.j; }

    bool operator==(const Bracket&) const = default;
};

struct PathAgreement {
    std::vector<IndexPair> agreed;
    std::vector<Bracket> brackets;
};

/// Splits two warping paths over the same grid into the pairs both contain
/// and the brackets between consecutive agreed pairs where they differ.
/// Brackets whose open index ranges are both empty carry no unassigned
/// element and are omitted. Every index of A and B is either part of an
/// agreed pair or inside a bracket range.
PathAgreement disagreement_brackets(const WarpPath& forward, const WarpPath& backward);

/// True when `path` starts at (0,0), ends at (n-1,m-1) and only takes unit
/// steps (1,0), (0,1), (1,1).
bool is_valid_path(const WarpPath& path, std::size_t n, std::size_t m);

} // namespace symalign
