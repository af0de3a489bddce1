#include "symalign/metrics.hpp"

#include "symalign/error.hpp"
#include "symalign/time_map.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <unordered_map>

namespace symalign {

namespace {

using IdPair = std::pair<std::string, std::string>;

struct Universe {
    std::set<std::string> perf;
    std::set<std::string> score;
    std::set<IdPair> matches;
};

Universe universe_of(const NoteAlignment& a) {
    Universe u;
    for (const auto& r : a.records) {
        if (!r.perf_id.empty()) u.perf.insert(r.perf_id);
        if (!r.score_id.empty()) u.score.insert(r.score_id);
        if (r.kind == AlignmentRecord::Kind::match) u.matches.emplace(r.perf_id, r.score_id);
    }
    return u;
}

} // namespace

MatchFScore fscore(const NoteAlignment& pred, const NoteAlignment& truth) {
    const Universe p = universe_of(pred);
    const Universe t = universe_of(truth);
    if (p.perf != t.perf) throw Error("fscore: alignments cover different performance notes");
    if (p.score != t.score) throw Error("fscore: alignments cover different score notes");

    MatchFScore out;
    for (const auto& m : p.matches) out.tp += t.matches.count(m);
    out.fp = p.matches.size() - out.tp;
    out.fn = t.matches.size() - out.tp;
    if (out.tp + out.fp > 0) out.precision = static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp);
    if (out.tp + out.fn > 0) out.recall = static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn);
    if (out.precision + out.recall > 0.0) out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

TopKRates topk_hits(const std::vector<SampledState>& states, const ValueFunction& value_fn) {
    if (states.empty()) throw Error("topk_hits: no states");
    std::size_t hits[3] = {0, 0, 0};
    for (const auto& s : states) {
        const auto slot = value_fn.evaluate(s.state).greedy_slot();
        if (!slot) continue;
        const std::size_t d = *slot > s.target_slot ? *slot - s.target_slot : s.target_slot - *slot;
        for (std::size_t k = 0; k < 3; ++k)
            if (d <= k) ++hits[k];
    }
    const auto n = static_cast<double>(states.size());
    return {static_cast<double>(hits[0]) / n, static_cast<double>(hits[1]) / n, static_cast<double>(hits[2]) / n};
}

AsyncReport asynchrony(const std::vector<EstimatedPosition>& estimates, const Score& score, const Performance& perf,
                       const NoteAlignment& truth) {
    std::unordered_map<std::string, double> perf_time;
    for (const auto& n : perf.notes()) perf_time.emplace(n.id, n.onset_sec);
    std::unordered_map<std::string, std::size_t> onset_of;
    for (std::size_t j = 0; j < score.size(); ++j)
        for (const auto& [pitch, ids] : score[j].note_ids)
            for (const auto& id : ids) onset_of.emplace(id, j);

    std::vector<std::optional<double>> played(score.size());
    for (const auto& r : truth.records) {
        if (r.kind != AlignmentRecord::Kind::match) continue;
        auto pt = perf_time.find(r.perf_id);
        auto on = onset_of.find(r.score_id);
        if (pt == perf_time.end() || on == onset_of.end())
            throw Error("asynchrony: truth match '" + r.perf_id + "' -> '" + r.score_id + "' names unknown notes");
        auto& slot = played[on->second];
        slot = slot ? std::min(*slot, pt->second) : pt->second;
    }

    std::vector<TimeAnchor> anchors;
    for (std::size_t j = 0; j < score.size(); ++j) {
        if (!played[j]) continue;
        if (!anchors.empty() && *played[j] < anchors.back().sec) continue;
        anchors.push_back({score[j].beat, *played[j]});
    }

    AsyncReport report;
    if (estimates.empty()) {
        report.excluded = perf.size();
        return report;
    }
    if (anchors.empty()) throw Error("asynchrony: truth has no matches to anchor onset times");
    const TimeMap map(std::move(anchors));

    std::vector<double> ms;
    ms.reserve(estimates.size());
    for (const auto& e : estimates) {
        if (e.note_index >= perf.size() || e.onset_index >= score.size())
            throw Error("asynchrony: estimate index out of range");
        const double expected = played[e.onset_index] ? *played[e.onset_index] : map(score[e.onset_index].beat);
        ms.push_back(1000.0 * std::abs(perf[e.note_index].onset_sec - expected));
    }
    std::ranges::sort(ms);
    const std::size_t n = ms.size();
    report.median_ms = n % 2 == 1 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
    auto pct = [&](double limit) {
        // 1e-9 ms slack absorbs rounding at the threshold.
        const auto within = std::upper_bound(ms.begin(), ms.end(), limit + 1e-9) - ms.begin();
        return 100.0 * static_cast<double>(within) / static_cast<double>(n);
    };
    report.pct_le_25 = pct(25.0);
    report.pct_le_50 = pct(50.0);
    report.pct_le_100 = pct(100.0);
    report.evaluated = n;
    report.excluded = perf.size() - std::min(perf.size(), n);
    return report;
}

} // namespace symalign
