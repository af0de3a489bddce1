#pragma once

#include "symalign/dtw.hpp"
#include "symalign/note_types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace symalign::testing {

/// Every monotone unit-step path through an n x m grid, explored by plain
/// recursion. Exponential; keep n, m <= 8.
struct PathEnumeration {
    double best = std::numeric_limits<double>::infinity();
    std::vector<WarpPath> optimal;  // all paths achieving `best`
    std::size_t total = 0;          // number of monotone paths
};

inline PathEnumeration enumerate_paths(std::size_t n, std::size_t m,
                                       const std::function<double(std::size_t, std::size_t)>& cost) {
    PathEnumeration out;
    WarpPath cur;
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        cur.pairs.push_back({i, j});
        acc += cost(i, j);
        if (i == n - 1 && j == m - 1) {
            ++out.total;
            if (acc < out.best) {
                out.best = acc;
                out.optimal.clear();
            }
            if (acc == out.best) out.optimal.push_back(cur);
        } else {
            if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
            if (i + 1 < n) walk(i + 1, j, acc);
            if (j + 1 < m) walk(i, j + 1, acc);
        }
        cur.pairs.pop_back();
    };
    walk(0, 0, 0.0);
    return out;
}

/// Delannoy number D(a, b): count of monotone unit-step paths between
/// opposite corners of an (a+1) x (b+1) grid.
inline std::uint64_t delannoy(std::size_t a, std::size_t b) {
    std::vector<std::vector<std::uint64_t>> d(a + 1, std::vector<std::uint64_t>(b + 1, 1));
    for (std::size_t i = 1; i <= a; ++i)
        for (std::size_t j = 1; j <= b; ++j) d[i][j] = d[i - 1][j] + d[i][j - 1] + d[i - 1][j - 1];
    return d[a][b];
}

/// Ordinary least-squares slope of y over x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Score from (beat, MIDI pitches) rows. Note ids are `s<onset>_<midi>`,
/// with a `b` suffix on a second voice of the same pitch.
inline Score make_score(const std::vector<std::pair<double, std::vector<int>>>& rows) {
    std::vector<ScoreOnset> onsets;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        ScoreOnset o;
        o.beat = rows[k].first;
        std::vector<PitchIndex> pitches;
        for (int midi : rows[k].second) {
            const auto p = PitchIndex::from_midi(midi);
            auto& ids = o.note_ids[p];
            ids.push_back("s" + std::to_string(k) + "_" + std::to_string(midi) + (ids.empty() ? "" : "b"));
            pitches.push_back(p);
        }
        o.pitch_set = PitchSet(pitches);
        onsets.push_back(std::move(o));
    }
    return Score(std::move(onsets));
}

/// Performance from (MIDI pitch, seconds) rows, ids `p0`, `p1`, ... in row order.
inline Performance make_perf(const std::vector<std::pair<int, double>>& rows) {
    std::vector<PerfNote> notes;
    for (std::size_t k = 0; k < rows.size(); ++k)
        notes.push_back({"p" + std::to_string(k), PitchIndex::from_midi(rows[k].first), rows[k].second, 64});
    return Performance(std::move(notes));
}

/// Monophonic score with one onset per beat.
inline Score mono_score(const std::vector<int>& midi) {
    std::vector<std::pair<double, std::vector<int>>> rows;
    for (std::size_t k = 0; k < midi.size(); ++k) rows.push_back({static_cast<double>(k), {midi[k]}});
    return make_score(rows);
}

inline PitchSet set_of(std::initializer_list<int> values) {
    std::vector<PitchIndex> v;
    for (int x : values) v.emplace_back(x);
    return PitchSet(v);
}

} // namespace symalign::testing
