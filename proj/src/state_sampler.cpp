#include "symalign/state_sampler.hpp"

#include "symalign/error.hpp"
#include "symalign/util.hpp"

#include <algorithm>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

namespace symalign {

using nlohmann::json;

std::vector<SampledState> sample_states(const Score& score, const Performance& perf, const NoteAlignment& truth) {
    std::unordered_map<std::string, std::size_t> onset_of;
    for (std::size_t j = 0; j < score.size(); ++j)
        for (const auto& [pitch, ids] : score[j].note_ids)
            for (const auto& id : ids) onset_of.emplace(id, j);
    std::unordered_map<std::string, std::size_t> target_of;
    for (const auto& r : truth.records) {
        if (r.kind != AlignmentRecord::Kind::match) continue;
        auto it = onset_of.find(r.score_id);
        if (it == onset_of.end()) throw Error("sample_states: truth names unknown score note '" + r.score_id + "'");
        target_of.emplace(r.perf_id, it->second);
    }

    std::vector<PitchIndex> pitches;
    pitches.reserve(perf.size());
    for (const auto& n : perf.notes()) pitches.push_back(n.pitch);

    std::vector<SampledState> out;
    for (std::size_t k = 0; k < perf.size(); ++k) {
        auto it = target_of.find(perf[k].id);
        if (it == target_of.end()) continue;
        const std::size_t target = it->second;
        const std::size_t from = k + 1 >= kPerfContext ? k + 1 - kPerfContext : 0;
        const std::span<const PitchIndex> history(pitches.data() + from, k + 1 - from);
        for (std::size_t slot = 0; slot < kScoreSlots; ++slot) {
            // The target sits at `slot` when the center is target + 7 - slot.
            if (target + kCenterSlot < slot) continue;
            const std::size_t center = target + kCenterSlot - slot;
            if (center >= score.size()) continue;
            out.push_back({make_state(score, history, center), slot});
        }
    }
    return out;
}

SampledState augment_pitch_shift(const SampledState& s, int shift) {
    int lo = PitchIndex::kMax, hi = PitchIndex::kMin;
    auto scan = [&](PitchIndex p) {
        lo = std::min(lo, p.value());
        hi = std::max(hi, p.value());
    };
    for (auto p : s.state.perf_window) scan(p);
    for (const auto& set : s.state.score_window)
        for (auto p : set) scan(p);
    shift = std::clamp(shift, PitchIndex::kMin - lo, PitchIndex::kMax - hi);

    SampledState out = s;
    for (auto& p : out.state.perf_window) p = PitchIndex(p.value() + shift);
    for (auto& set : out.state.score_window) {
        std::vector<PitchIndex> moved;
        for (auto p : set) moved.emplace_back(p.value() + shift);
        set = PitchSet(std::move(moved));
    }
    return out;
}

std::string states_to_ndjson(const std::vector<SampledState>& states) {
    std::string out;
    for (const auto& s : states) {
        json perf = json::array();
        for (auto p : s.state.perf_window) perf.push_back(p.value());
        json sets = json::array();
        for (const auto& set : s.state.score_window) {
            json one = json::array();
            for (auto p : set) one.push_back(p.value());
            sets.push_back(std::move(one));
        }
        json rec{{"perf_pitches", std::move(perf)},
                 {"score_sets", std::move(sets)},
                 {"center", s.state.center},
                 {"target_slot", s.target_slot},
                 {"first_onset", s.state.first_onset}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

namespace {

std::size_t require_index(const json& rec, const char* key, const std::string& where) {
    auto it = rec.find(key);
    if (it == rec.end()) throw SchemaError(where + "." + key, "missing");
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
        throw SchemaError(where + "." + key, "expected a non-negative integer");
    return it->get<std::size_t>();
}

PitchIndex require_pitch(const json& v, const std::string& where) {
    if (!v.is_number_integer() || !PitchIndex::valid(v.get<int>()))
        throw SchemaError(where, "expected a pitch index in 1..88");
    return PitchIndex(v.get<int>());
}

} // namespace

std::vector<SampledState> parse_states_ndjson(const std::string& text) {
    std::vector<SampledState> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        const std::string where = "line " + std::to_string(++lineno);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(where, std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object()) throw SchemaError(where, "expected an object");
        SampledState s;
        const auto perf = rec.find("perf_pitches");
        if (perf == rec.end() || !perf->is_array()) throw SchemaError(where + ".perf_pitches", "expected an array");
        for (std::size_t k = 0; k < perf->size(); ++k)
            s.state.perf_window.push_back(require_pitch((*perf)[k], where + ".perf_pitches[" + std::to_string(k) + "]"));
        const auto sets = rec.find("score_sets");
        if (sets == rec.end() || !sets->is_array()) throw SchemaError(where + ".score_sets", "expected an array");
        for (std::size_t k = 0; k < sets->size(); ++k) {
            const std::string sw = where + ".score_sets[" + std::to_string(k) + "]";
            if (!(*sets)[k].is_array()) throw SchemaError(sw, "expected an array");
            std::vector<PitchIndex> pitches;
            for (std::size_t m = 0; m < (*sets)[k].size(); ++m)
                pitches.push_back(require_pitch((*sets)[k][m], sw + "[" + std::to_string(m) + "]"));
            s.state.score_window.emplace_back(std::move(pitches));
        }
        s.state.center = require_index(rec, "center", where);
        s.target_slot = require_index(rec, "target_slot", where);
        s.state.first_onset = rec.contains("first_onset") ? require_index(rec, "first_onset", where) : 0;
        try {
            s.state.validate();
        } catch (const Error& e) {
            throw SchemaError(where, e.what());
        }
        if (!s.state.window_index(s.target_slot)) throw SchemaError(where + ".target_slot", "slot is outside the window");
        out.push_back(std::move(s));
    }
    return out;
}

void export_states(const std::vector<SampledState>& states, const std::filesystem::path& path) {
    write_file_atomic(path, states_to_ndjson(states));
}

std::vector<SampledState> import_states(const std::filesystem::path& path) {
    return parse_states_ndjson(read_file(path));
}

} // namespace symalign
