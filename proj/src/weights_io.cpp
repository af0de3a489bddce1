#include "symalign/error.hpp"
#include "symalign/util.hpp"
#include "symalign/value_model.hpp"

#include <bit>
#include <cstring>

#include <zlib.h>

namespace symalign {

static_assert(std::numeric_limits<float>::is_iec559, "SMAW payloads are IEEE-754 binary32");

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'M', 'A', 'W'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float f) { le(std::bit_cast<std::uint32_t>(f), 4); }
    std::vector<std::uint8_t>& data() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    std::size_t pos() const noexcept { return pos_; }

    void need(std::size_t n, const char* what) const {
        if (b_.size() - pos_ < n)
            throw ParseError(pos_, std::string("truncated ") + what + ": expected " + std::to_string(n) +
                                       " bytes, " + std::to_string(b_.size() - pos_) + " available");
    }
    std::uint64_t le(int n, const char* what) {
        need(static_cast<std::size_t>(n), what);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
        return v;
    }
    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for very large files.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = ::crc32(crc, bytes.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

} // namespace

std::vector<std::uint8_t> encode_weights(const ValueModelWeights& w) {
    Writer out;
    out.bytes(kMagic, 4);
    out.le(kSmawVersion, 4);
    out.le(w.tensors().size(), 4);
    for (const auto& t : w.tensors()) {
        if (t.name.size() > 0xFFFF) throw Error("weights: tensor name too long: " + t.name.substr(0, 32));
        out.le(t.name.size(), 2);
        out.bytes(t.name.data(), t.name.size());
        out.le(t.shape.size(), 1);
        for (auto d : t.shape) out.le(d, 4);
        for (float f : t.data) out.f32(f);
    }
    out.le(crc32_of(out.data()), 4);
    return std::move(out.data());
}

ValueModelWeights decode_weights(std::span<const std::uint8_t> bytes, std::size_t heads) {
    Reader in(bytes);
    in.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError(0, "bad magic, not a SMAW weight file");
    in.le(4, "magic");
    const auto version = in.le(4, "version");
    if (version != kSmawVersion) throw ParseError(4, "unsupported SMAW version " + std::to_string(version));
    const auto count = in.le(4, "tensor count");

    std::vector<NamedTensor> tensors;
    for (std::uint64_t k = 0; k < count; ++k) {
        NamedTensor t;
        const auto name_len = in.le(2, "tensor name length");
        t.name = in.str(name_len, "tensor name");
        const auto rank = in.le(1, "tensor rank");
        std::uint64_t elements = 1;
        for (std::uint64_t r = 0; r < rank; ++r) {
            const auto d = in.le(4, "tensor shape");
            t.shape.push_back(static_cast<std::uint32_t>(d));
            elements = d == 0 ? 0 : std::min<std::uint64_t>(elements * d, bytes.size() + 1);
        }
        in.need(elements * 4, "tensor payload");
        t.data.resize(elements);
        for (auto& f : t.data) f = std::bit_cast<float>(static_cast<std::uint32_t>(in.le(4, "tensor payload")));
        tensors.push_back(std::move(t));
    }
    const std::size_t body = in.pos();
    const auto stored = in.le(4, "checksum");
    if (in.pos() != bytes.size())
        throw ParseError(in.pos(), std::to_string(bytes.size() - in.pos()) + " trailing bytes after checksum");
    const auto actual = crc32_of(bytes.first(body));
    if (stored != actual) throw ParseError(body, "CRC-32 mismatch, file is corrupt");
    return ValueModelWeights(std::move(tensors), heads);
}

ValueModelWeights load_weights(const std::filesystem::path& path, std::size_t heads) {
    const std::string data = read_file(path);
    try {
        return decode_weights(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()), heads);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void save_weights(const ValueModelWeights& w, const std::filesystem::path& path) {
    const auto bytes = encode_weights(w);
    write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

} // namespace symalign
