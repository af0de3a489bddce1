#pragma once

#include "symalign/note_types.hpp"

#include <filesystem>
#include <string>

namespace symalign {

// Canonical JSON documents. Pitches are MIDI numbers on disk and PitchIndex
// in memory. Parse errors throw SchemaError naming the offending field.
//
//   score:       {"onsets":[{"beat":f,"notes":[{"id":s,"pitch":i}]}]}
//   performance: {"notes":[{"id":s,"pitch":i,"onset_sec":f,"velocity":i}]}
//   alignment:   {"records":[{"kind":"match","perf_id":s,"score_id":s}
//                           |{"kind":"insertion","perf_id":s}
//                           |{"kind":"deletion","score_id":s}]}

Score parse_score_json(const std::string& text);
Performance parse_performance_json(const std::string& text);
NoteAlignment parse_alignment_json(const std::string& text);

std::string score_to_json(const Score& score);
std::string performance_to_json(const Performance& perf);
std::string alignment_to_json(const NoteAlignment& alignment);

Score load_score_json(const std::filesystem::path& path);
Performance load_performance_json(const std::filesystem::path& path);
NoteAlignment load_alignment_json(const std::filesystem::path& path);

void save_score_json(const Score& score, const std::filesystem::path& path);
void save_performance_json(const Performance& perf, const std::filesystem::path& path);
void save_alignment_json(const NoteAlignment& alignment, const std::filesystem::path& path);

} // namespace symalign
