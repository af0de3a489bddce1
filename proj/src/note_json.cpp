#include "symalign/note_json.hpp"

#include "symalign/error.hpp"
#include "symalign/util.hpp"

#include <json.hpp>

namespace symalign {

using nlohmann::json;

namespace {

json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + "." + key, "missing");
    return *it;
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_array()) throw SchemaError(where + "." + key, "expected an array");
    return v;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string() || v.get_ref<const std::string&>().empty())
        throw SchemaError(where + "." + key, "expected a non-empty string");
    return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number()) throw SchemaError(where + "." + key, "expected a number");
    return v.get<double>();
}

long long require_integer(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number_integer()) throw SchemaError(where + "." + key, "expected an integer");
    return v.get<long long>();
}

PitchIndex require_midi_pitch(const json& obj, const std::string& where) {
    auto midi = require_integer(obj, "pitch", where);
    if (midi < 21 || midi > 108)
        throw SchemaError(where + ".pitch", "MIDI pitch " + std::to_string(midi) + " outside 21..108");
    return PitchIndex::from_midi(static_cast<int>(midi));
}

std::string item(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

} // namespace

Score parse_score_json(const std::string& text) {
    const json doc = parse_document(text);
    const auto& arr = require_array(doc, "onsets", "$");
    std::vector<ScoreOnset> onsets;
    onsets.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = item("onsets", i);
        ScoreOnset onset;
        onset.beat = require_number(arr[i], "beat", where);
        const auto& notes = require_array(arr[i], "notes", where);
        if (notes.empty()) throw SchemaError(where + ".notes", "onset has no notes");
        std::vector<PitchIndex> pitches;
        for (std::size_t k = 0; k < notes.size(); ++k) {
            const std::string nw = item(where + ".notes", k);
            auto id = require_string(notes[k], "id", nw);
            auto pitch = require_midi_pitch(notes[k], nw);
            pitches.push_back(pitch);
            onset.note_ids[pitch].push_back(std::move(id));
        }
        onset.pitch_set = PitchSet(std::move(pitches));
        onsets.push_back(std::move(onset));
    }
    return Score(std::move(onsets));
}

Performance parse_performance_json(const std::string& text) {
    const json doc = parse_document(text);
    const auto& arr = require_array(doc, "notes", "$");
    std::vector<PerfNote> notes;
    notes.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = item("notes", i);
        PerfNote n;
        n.id = require_string(arr[i], "id", where);
        n.pitch = require_midi_pitch(arr[i], where);
        n.onset_sec = require_number(arr[i], "onset_sec", where);
        auto vel = require_integer(arr[i], "velocity", where);
        if (vel < 1 || vel > 127) throw SchemaError(where + ".velocity", "must be in 1..127");
        n.velocity = static_cast<int>(vel);
        notes.push_back(std::move(n));
    }
    return Performance(std::move(notes));
}

NoteAlignment parse_alignment_json(const std::string& text) {
    const json doc = parse_document(text);
    const auto& arr = require_array(doc, "records", "$");
    NoteAlignment a;
    a.records.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = item("records", i);
        const auto kind = require_string(arr[i], "kind", where);
        if (kind == "match") {
            a.records.push_back(AlignmentRecord::match(require_string(arr[i], "perf_id", where),
                                                       require_string(arr[i], "score_id", where)));
        } else if (kind == "insertion") {
            a.records.push_back(AlignmentRecord::insertion(require_string(arr[i], "perf_id", where)));
        } else if (kind == "deletion") {
            a.records.push_back(AlignmentRecord::deletion(require_string(arr[i], "score_id", where)));
        } else {
            throw SchemaError(where + ".kind", "unknown record kind '" + kind + "'");
        }
    }
    check_alignment(a);
    return a;
}

std::string score_to_json(const Score& score) {
    json onsets = json::array();
    for (const auto& o : score.onsets()) {
        json notes = json::array();
        for (const auto& [pitch, ids] : o.note_ids)
            for (const auto& id : ids) notes.push_back({{"id", id}, {"pitch", pitch.midi()}});
        onsets.push_back({{"beat", o.beat}, {"notes", std::move(notes)}});
    }
    return json{{"onsets", std::move(onsets)}}.dump(2) + "\n";
}

std::string performance_to_json(const Performance& perf) {
    json notes = json::array();
    for (const auto& n : perf.notes())
        notes.push_back({{"id", n.id}, {"pitch", n.pitch.midi()}, {"onset_sec", n.onset_sec}, {"velocity", n.velocity}});
    return json{{"notes", std::move(notes)}}.dump(2) + "\n";
}

std::string alignment_to_json(const NoteAlignment& alignment) {
    json records = json::array();
    for (const auto& r : alignment.records) {
        json rec{{"kind", to_string(r.kind)}};
        if (r.kind != AlignmentRecord::Kind::deletion) rec["perf_id"] = r.perf_id;
        if (r.kind != AlignmentRecord::Kind::insertion) rec["score_id"] = r.score_id;
        records.push_back(std::move(rec));
    }
    return json{{"records", std::move(records)}}.dump(2) + "\n";
}

Score load_score_json(const std::filesystem::path& path) { return parse_score_json(read_file(path)); }

Performance load_performance_json(const std::filesystem::path& path) {
    return parse_performance_json(read_file(path));
}

NoteAlignment load_alignment_json(const std::filesystem::path& path) {
    return parse_alignment_json(read_file(path));
}

void save_score_json(const Score& score, const std::filesystem::path& path) {
    write_file_atomic(path, score_to_json(score));
}

void save_performance_json(const Performance& perf, const std::filesystem::path& path) {
    write_file_atomic(path, performance_to_json(perf));
}

void save_alignment_json(const NoteAlignment& alignment, const std::filesystem::path& path) {
    write_file_atomic(path, alignment_to_json(alignment));
}

} // namespace symalign
