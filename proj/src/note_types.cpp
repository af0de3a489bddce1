#include "symalign/note_types.hpp"

#include "symalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace symalign {

PitchIndex::PitchIndex(int value) : value_(value) {
    if (!valid(value)) throw Error("pitch index " + std::to_string(value) + " outside 1..88");
}

PitchIndex PitchIndex::from_midi(int midi_pitch) {
    if (!valid_midi(midi_pitch))
        throw Error("MIDI pitch " + std::to_string(midi_pitch) + " outside 21..108");
    return PitchIndex(midi_pitch - kMidiOffset);
}

PitchSet::PitchSet(std::vector<PitchIndex> pitches) : pitches_(std::move(pitches)) {
    std::sort(pitches_.begin(), pitches_.end());
    pitches_.erase(std::unique(pitches_.begin(), pitches_.end()), pitches_.end());
}

bool PitchSet::contains(PitchIndex p) const noexcept {
    return std::binary_search(pitches_.begin(), pitches_.end(), p);
}

Performance::Performance(std::vector<PerfNote> notes) : notes_(std::move(notes)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < notes_.size(); ++i) {
        const auto& n = notes_[i];
        const std::string where = "notes[" + std::to_string(i) + "]";
        if (!seen.insert(n.id).second) throw SchemaError(where + ".id", "duplicate id '" + n.id + "'");
        if (!std::isfinite(n.onset_sec) || n.onset_sec < 0.0)
            throw SchemaError(where + ".onset_sec", "must be finite and >= 0");
        if (n.velocity < 1 || n.velocity > 127) throw SchemaError(where + ".velocity", "must be in 1..127");
    }
    std::sort(notes_.begin(), notes_.end(), [](const PerfNote& a, const PerfNote& b) {
        if (a.onset_sec != b.onset_sec) return a.onset_sec < b.onset_sec;
        if (a.pitch != b.pitch) return a.pitch < b.pitch;
        return a.id < b.id;
    });
}

Score::Score(std::vector<ScoreOnset> onsets) : onsets_(std::move(onsets)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < onsets_.size(); ++i) {
        const auto& o = onsets_[i];
        const std::string where = "onsets[" + std::to_string(i) + "]";
        if (!std::isfinite(o.beat)) throw SchemaError(where + ".beat", "must be finite");
        if (i > 0 && !(o.beat > onsets_[i - 1].beat))
            throw SchemaError(where + ".beat", "beats must be strictly increasing");
        if (o.pitch_set.empty()) throw SchemaError(where + ".notes", "onset has no pitches");
        for (const auto& [pitch, ids] : o.note_ids) {
            if (!o.pitch_set.contains(pitch))
                throw SchemaError(where + ".notes", "note id listed under a pitch missing from the pitch set");
            for (const auto& id : ids) {
                if (!seen.insert(id).second) throw SchemaError(where + ".notes", "duplicate score note id '" + id + "'");
            }
        }
    }
}

std::size_t Score::note_count() const noexcept {
    std::size_t n = 0;
    for (const auto& o : onsets_)
        for (const auto& [pitch, ids] : o.note_ids) n += ids.size();
    return n;
}

Score score_from_notes(const std::vector<ScoreNote>& notes) {
    std::vector<std::size_t> order(notes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return notes[a].onset_beat < notes[b].onset_beat; });

    std::vector<ScoreOnset> onsets;
    std::vector<PitchIndex> pending;
    for (std::size_t k : order) {
        const auto& n = notes[k];
        if (!std::isfinite(n.onset_beat)) throw Error("score note '" + n.id + "' has a non-finite beat");
        if (onsets.empty() || onsets.back().beat != n.onset_beat) {
            if (!onsets.empty()) onsets.back().pitch_set = PitchSet(std::move(pending));
            pending.clear();
            onsets.push_back(ScoreOnset{n.onset_beat, {}, {}});
        }
        pending.push_back(n.pitch);
        onsets.back().note_ids[n.pitch].push_back(n.id);
    }
    if (!onsets.empty()) onsets.back().pitch_set = PitchSet(std::move(pending));
    return Score(std::move(onsets));
}

AlignmentRecord AlignmentRecord::match(std::string perf_id, std::string score_id) {
    return {Kind::match, std::move(perf_id), std::move(score_id)};
}

AlignmentRecord AlignmentRecord::insertion(std::string perf_id) {
    return {Kind::insertion, std::move(perf_id), {}};
}

AlignmentRecord AlignmentRecord::deletion(std::string score_id) {
    return {Kind::deletion, {}, std::move(score_id)};
}

const char* to_string(AlignmentRecord::Kind kind) noexcept {
    switch (kind) {
    case AlignmentRecord::Kind::match: return "match";
    case AlignmentRecord::Kind::insertion: return "insertion";
    case AlignmentRecord::Kind::deletion: return "deletion";
    }
    return "?";
}

std::size_t NoteAlignment::count(AlignmentRecord::Kind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [kind](const auto& r) { return r.kind == kind; }));
}

namespace {

void collect_ids(const NoteAlignment& alignment, std::unordered_set<std::string>& perf_ids,
                 std::unordered_set<std::string>& score_ids) {
    using Kind = AlignmentRecord::Kind;
    for (std::size_t i = 0; i < alignment.records.size(); ++i) {
        const auto& r = alignment.records[i];
        const std::string where = "records[" + std::to_string(i) + "]";
        if (r.kind != Kind::deletion) {
            if (r.perf_id.empty()) throw SchemaError(where + ".perf_id", "missing");
            if (!perf_ids.insert(r.perf_id).second)
                throw Error(where + ": performance note '" + r.perf_id + "' appears in more than one record");
        }
        if (r.kind != Kind::insertion) {
            if (r.score_id.empty()) throw SchemaError(where + ".score_id", "missing");
            if (!score_ids.insert(r.score_id).second)
                throw Error(where + ": score note '" + r.score_id + "' appears in more than one record");
        }
    }
}

} // namespace

void check_alignment(const NoteAlignment& alignment) {
    std::unordered_set<std::string> perf_ids, score_ids;
    collect_ids(alignment, perf_ids, score_ids);
}

void check_alignment(const NoteAlignment& alignment, const Score& score, const Performance& perf) {
    std::unordered_set<std::string> perf_ids, score_ids;
    collect_ids(alignment, perf_ids, score_ids);

    std::unordered_map<std::string, PitchIndex> perf_pitch;
    for (const auto& n : perf.notes()) perf_pitch.emplace(n.id, n.pitch);
    std::unordered_map<std::string, PitchIndex> score_pitch;
    for (const auto& o : score.onsets())
        for (const auto& [pitch, ids] : o.note_ids)
            for (const auto& id : ids) score_pitch.emplace(id, pitch);

    if (perf_ids.size() != perf_pitch.size())
        throw Error("alignment covers " + std::to_string(perf_ids.size()) + " performance notes, expected " +
                    std::to_string(perf_pitch.size()));
    if (score_ids.size() != score_pitch.size())
        throw Error("alignment covers " + std::to_string(score_ids.size()) + " score notes, expected " +
                    std::to_string(score_pitch.size()));
    for (const auto& r : alignment.records) {
        auto p = perf_pitch.end();
        auto s = score_pitch.end();
        if (!r.perf_id.empty() && (p = perf_pitch.find(r.perf_id)) == perf_pitch.end())
            throw Error("unknown performance note '" + r.perf_id + "'");
        if (!r.score_id.empty() && (s = score_pitch.find(r.score_id)) == score_pitch.end())
            throw Error("unknown score note '" + r.score_id + "'");
        if (r.kind == AlignmentRecord::Kind::match && p->second != s->second)
            throw Error("match '" + r.perf_id + "' -> '" + r.score_id + "' pairs different pitches");
    }
}

} // namespace symalign
