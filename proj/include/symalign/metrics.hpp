#pragma once

#include "symalign/note_types.hpp"
#include "symalign/state_sampler.hpp"
#include "symalign/value_model.hpp"

#include <cstddef>
#include <vector>

namespace symalign {

struct MatchFScore {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

/// F-score over match records only. A predicted match is a true positive
/// when the truth holds the identical (perf_id, score_id) pair. Throws Error
/// when the two alignments do not cover the same note ids.
MatchFScore fscore(const NoteAlignment& pred, const NoteAlignment& truth);

struct TopKRates {
    double top0 = 0.0;
    double top1 = 0.0;
    double top2 = 0.0;
};

/// Fraction of states whose greedy slot lies within 0, 1 and 2 onsets of
/// the target slot. Throws Error on an empty state list.
TopKRates topk_hits(const std::vector<SampledState>& states, const ValueFunction& value_fn);

struct EstimatedPosition {
    std::size_t note_index = 0;   // into Performance::notes()
    std::size_t onset_index = 0;  // estimated score onset
};

struct AsyncReport {
    double median_ms = 0.0;
    double pct_le_25 = 0.0;
    double pct_le_50 = 0.0;
    double pct_le_100 = 0.0;
    std::size_t evaluated = 0;
    /// Performance notes without an estimate (e.g. insertion decisions).
    std::size_t excluded = 0;
};

/// Per estimate, |t(note) - T(onset)| where T is the earliest truth-matched
/// performance time at that onset. Onsets nobody played take their time
/// from a map interpolated through the played ones.
AsyncReport asynchrony(const std::vector<EstimatedPosition>& estimates, const Score& score, const Performance& perf,
                       const NoteAlignment& truth);

} // namespace symalign
