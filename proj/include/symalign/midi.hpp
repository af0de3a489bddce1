#pragma once

#include "symalign/note_types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>

namespace symalign {

struct MidiImport {
    Performance performance;
    /// Note-ons whose pitch fell outside the piano range (MIDI 21..108).
    std::size_t dropped_out_of_range = 0;
};

/// Reads a type-0 or type-1 standard MIDI file. Every note-on with velocity
/// > 0 becomes one PerfNote; onsets are resolved through the merged tempo map
/// of all tracks. Note ids are `n0`, `n1`, ... in performance order.
/// Throws ParseError (with byte offset) on malformed input.
MidiImport parse_midi(std::span<const std::uint8_t> bytes);

MidiImport load_performance_midi(const std::filesystem::path& path);

} // namespace symalign
