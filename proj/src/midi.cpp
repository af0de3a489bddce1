#include "symalign/midi.hpp"

#include "symalign/error.hpp"
#include "symalign/util.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace symalign {

namespace {

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint8_t peek() {
        need(1);
        return bytes_[pos_];
    }

    std::uint32_t be(int n) {
        need(static_cast<std::size_t>(n));
        std::uint32_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 8) | bytes_[pos_++];
        return v;
    }

    std::uint32_t vlq() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = u8();
            v = (v << 7) | (b & 0x7F);
            if ((b & 0x80) == 0) return v;
        }
        throw ParseError(pos_ - 1, "variable-length quantity longer than 4 bytes");
    }

    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

    void expect_tag(const char* tag) {
        const std::size_t at = pos_;
        need(4);
        if (!std::equal(tag, tag + 4, bytes_.begin() + static_cast<std::ptrdiff_t>(pos_)))
            throw ParseError(at, std::string("expected chunk '") + tag + "'");
        pos_ += 4;
    }

private:
    void need(std::size_t n) const {
        if (remaining() < n)
            throw ParseError(pos_, "unexpected end of file (need " + std::to_string(n) + " bytes, " +
                                       std::to_string(remaining()) + " available)");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

struct TempoChange {
    std::uint64_t tick;
    std::uint32_t usec_per_quarter;
};

struct RawNote {
    std::uint64_t tick;
    int pitch;
    int velocity;
};

void read_track(Reader& r, std::vector<TempoChange>& tempos, std::vector<RawNote>& notes) {
    r.expect_tag("MTrk");
    const std::uint32_t length = r.be(4);
    if (length > r.remaining()) throw ParseError(r.pos() - 4, "track length exceeds file size");
    const std::size_t end = r.pos() + length;

    std::uint64_t tick = 0;
    std::uint8_t running = 0;
    while (r.pos() < end) {
        tick += r.vlq();
        const std::size_t status_at = r.pos();
        std::uint8_t status = r.peek();
        if (status & 0x80) {
            r.u8();
        } else {
            if (running == 0) throw ParseError(status_at, "data byte without running status");
            status = running;
        }

        if (status == 0xFF) {
            const std::uint8_t type = r.u8();
            const std::uint32_t len = r.vlq();
            if (type == 0x51) {
                if (len != 3) throw ParseError(status_at, "tempo event with length " + std::to_string(len));
                tempos.push_back({tick, r.be(3)});
            } else if (type == 0x2F) {
                r.skip(len);
                break;
            } else {
                r.skip(len);
            }
            running = 0;
        } else if (status == 0xF0 || status == 0xF7) {
            r.skip(r.vlq());
            running = 0;
        } else if (status >= 0xF0) {
            throw ParseError(status_at, "unsupported system message in track");
        } else {
            running = status;
            const std::uint8_t kind = status & 0xF0;
            const std::uint8_t d1 = r.u8();
            if (kind == 0xC0 || kind == 0xD0) continue;
            const std::uint8_t d2 = r.u8();
            if ((d1 | d2) & 0x80) throw ParseError(status_at, "data byte with high bit set");
            if (kind == 0x90 && d2 > 0) notes.push_back({tick, d1, d2});
        }
        if (r.pos() > end) throw ParseError(end, "event runs past end of track");
    }
    if (r.pos() > end) throw ParseError(end, "event runs past end of track");
    r.skip(end - r.pos());
}

} // namespace

MidiImport parse_midi(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.expect_tag("MThd");
    const std::uint32_t header_len = r.be(4);
    if (header_len < 6) throw ParseError(4, "header chunk shorter than 6 bytes");
    const std::size_t format_at = r.pos();
    const std::uint32_t format = r.be(2);
    const std::uint32_t ntracks = r.be(2);
    const std::size_t division_at = r.pos();
    const std::uint32_t division = r.be(2);
    r.skip(header_len - 6);
    if (format > 1) throw ParseError(format_at, "MIDI format " + std::to_string(format) + " not supported");
    if (format == 0 && ntracks != 1) throw ParseError(format_at, "format 0 file must have exactly one track");

    // Seconds per tick either follow the tempo map (PPQ) or are fixed (SMPTE).
    double smpte_sec_per_tick = 0.0;
    std::uint32_t ppq = 0;
    if (division & 0x8000) {
        const int fps = -static_cast<int>(static_cast<std::int8_t>(division >> 8));
        const int ticks_per_frame = static_cast<int>(division & 0xFF);
        if (fps <= 0 || ticks_per_frame == 0) throw ParseError(division_at, "invalid SMPTE division");
        smpte_sec_per_tick = 1.0 / (fps == 29 ? 29.97 : fps) / ticks_per_frame;
    } else {
        ppq = division;
        if (ppq == 0) throw ParseError(division_at, "zero ticks per quarter note");
    }

    std::vector<TempoChange> tempos;
    std::vector<RawNote> raw;
    for (std::uint32_t t = 0; t < ntracks; ++t) read_track(r, tempos, raw);

    std::stable_sort(tempos.begin(), tempos.end(),
                     [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });

    auto tick_to_sec = [&](std::uint64_t tick) {
        if (ppq == 0) return static_cast<double>(tick) * smpte_sec_per_tick;
        double sec = 0.0;
        std::uint64_t last_tick = 0;
        double usec = 500000.0;
        for (const auto& tc : tempos) {
            if (tc.tick >= tick) break;
            sec += static_cast<double>(tc.tick - last_tick) * usec / 1e6 / ppq;
            last_tick = tc.tick;
            usec = tc.usec_per_quarter;
        }
        return sec + static_cast<double>(tick - last_tick) * usec / 1e6 / ppq;
    };

    MidiImport result;
    std::vector<PerfNote> notes;
    notes.reserve(raw.size());
    for (const auto& n : raw) {
        if (!PitchIndex::valid_midi(n.pitch)) {
            ++result.dropped_out_of_range;
            continue;
        }
        notes.push_back(PerfNote{{}, PitchIndex::from_midi(n.pitch), tick_to_sec(n.tick), n.velocity});
    }
    std::stable_sort(notes.begin(), notes.end(), [](const PerfNote& a, const PerfNote& b) {
        if (a.onset_sec != b.onset_sec) return a.onset_sec < b.onset_sec;
        return a.pitch < b.pitch;
    });
    for (std::size_t i = 0; i < notes.size(); ++i) notes[i].id = "n" + std::to_string(i);
    result.performance = Performance(std::move(notes));
    return result;
}

MidiImport load_performance_midi(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    return parse_midi(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

} // namespace symalign
