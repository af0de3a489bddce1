#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace symalign::testing {

/// Minimal standard MIDI file writer used as the fixture oracle for the
/// importer.
class MidiWriter {
public:
    struct Event {
        std::uint32_t tick;
        std::vector<std::uint8_t> bytes;
    };

    explicit MidiWriter(std::uint16_t ppq = 480, std::uint16_t format = 1) : ppq_(ppq), format_(format) {}

    std::size_t add_track() {
        tracks_.emplace_back();
        return tracks_.size() - 1;
    }

    void tempo(std::size_t track, std::uint32_t tick, std::uint32_t usec_per_quarter) {
        tracks_[track].push_back({tick, {0xFF, 0x51, 0x03, std::uint8_t(usec_per_quarter >> 16),
                                         std::uint8_t(usec_per_quarter >> 8), std::uint8_t(usec_per_quarter)}});
    }
    void note_on(std::size_t track, std::uint32_t tick, int pitch, int velocity = 80, int channel = 0) {
        tracks_[track].push_back({tick, {std::uint8_t(0x90 | channel), std::uint8_t(pitch), std::uint8_t(velocity)}});
    }
    void note_off(std::size_t track, std::uint32_t tick, int pitch, int channel = 0) {
        tracks_[track].push_back({tick, {std::uint8_t(0x80 | channel), std::uint8_t(pitch), 0}});
    }

    std::vector<std::uint8_t> bytes() const {
        std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd', 0, 0, 0, 6};
        be16(out, format_);
        be16(out, static_cast<std::uint16_t>(tracks_.size()));
        be16(out, ppq_);
        for (auto events : tracks_) {
            std::stable_sort(events.begin(), events.end(),
                             [](const Event& a, const Event& b) { return a.tick < b.tick; });
            std::vector<std::uint8_t> body;
            std::uint32_t last = 0;
            for (const auto& e : events) {
                vlq(body, e.tick - last);
                last = e.tick;
                body.insert(body.end(), e.bytes.begin(), e.bytes.end());
            }
            vlq(body, 0);
            body.insert(body.end(), {0xFF, 0x2F, 0x00});
            out.insert(out.end(), {'M', 'T', 'r', 'k'});
            be32(out, static_cast<std::uint32_t>(body.size()));
            out.insert(out.end(), body.begin(), body.end());
        }
        return out;
    }

private:
    static void be16(std::vector<std::uint8_t>& o, std::uint16_t v) {
        o.push_back(std::uint8_t(v >> 8));
        o.push_back(std::uint8_t(v));
    }
    static void be32(std::vector<std::uint8_t>& o, std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) o.push_back(std::uint8_t(v >> s));
    }
    static void vlq(std::vector<std::uint8_t>& o, std::uint32_t v) {
        std::uint8_t buf[5];
        int n = 0;
        buf[n++] = v & 0x7F;
        while (v >>= 7) buf[n++] = std::uint8_t((v & 0x7F) | 0x80);
        while (n) o.push_back(buf[--n]);
    }

    std::uint16_t ppq_;
    std::uint16_t format_;
    std::vector<std::vector<Event>> tracks_;
};

} // namespace symalign::testing
