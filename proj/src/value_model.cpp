#include "symalign/value_model.hpp"

#include "symalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace symalign {

namespace {

constexpr std::size_t kPerLayer = 16;
constexpr float kNormEps = 1e-5f;

enum LayerTensor : std::size_t {
    norm1_scale, norm1_bias,
    query_w, query_b, key_w, key_b, value_w, value_b, output_w, output_b,
    norm2_scale, norm2_bias,
    hidden_w, hidden_b, ff_out_w, ff_out_b,
};

} // namespace

std::size_t NamedTensor::element_count() const noexcept {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::vector<std::pair<std::string, std::vector<std::uint32_t>>> expected_layout(const ModelConfig& c) {
    const auto W = static_cast<std::uint32_t>(c.width);
    const auto F = static_cast<std::uint32_t>(c.ff_width);
    std::vector<std::pair<std::string, std::vector<std::uint32_t>>> out;
    out.push_back({"embed.pitch", {token::kVocabulary, W}});
    out.push_back({"embed.position", {static_cast<std::uint32_t>(TokenSeq::kLength), W}});
    for (std::size_t l = 0; l < c.layers; ++l) {
        const std::string p = "layers." + std::to_string(l) + ".";
        out.push_back({p + "norm1.scale", {W}});
        out.push_back({p + "norm1.bias", {W}});
        for (const char* proj : {"query", "key", "value", "output"}) {
            out.push_back({p + "attn." + proj + ".weight", {W, W}});
            out.push_back({p + "attn." + proj + ".bias", {W}});
        }
        out.push_back({p + "norm2.scale", {W}});
        out.push_back({p + "norm2.bias", {W}});
        out.push_back({p + "ff.hidden.weight", {W, F}});
        out.push_back({p + "ff.hidden.bias", {F}});
        out.push_back({p + "ff.output.weight", {F, W}});
        out.push_back({p + "ff.output.bias", {W}});
    }
    out.push_back({"final_norm.scale", {W}});
    out.push_back({"final_norm.bias", {W}});
    out.push_back({"head.weight", {W, 2}});
    out.push_back({"head.bias", {2}});
    return out;
}

struct WeightsAccess {
    const ValueModelWeights& w;

    const float* at(std::size_t canonical) const { return w.tensors_[w.slot_[canonical]].data.data(); }
    const float* pitch_table() const { return at(0); }
    const float* position_table() const { return at(1); }
    const float* layer(std::size_t l, LayerTensor t) const { return at(2 + l * kPerLayer + t); }
    const float* tail(std::size_t k) const { return at(2 + w.config_.layers * kPerLayer + k); }
};

namespace {

std::string shape_string(const std::vector<std::uint32_t>& shape) {
    std::string s = "[";
    for (std::size_t k = 0; k < shape.size(); ++k) s += (k ? "," : "") + std::to_string(shape[k]);
    return s + "]";
}

} // namespace

ValueModelWeights::ValueModelWeights(std::vector<NamedTensor> tensors, std::size_t heads)
    : tensors_(std::move(tensors)) {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t k = 0; k < tensors_.size(); ++k) {
        const auto& t = tensors_[k];
        if (!by_name.emplace(t.name, k).second) throw Error("weights: duplicate tensor '" + t.name + "'");
        if (t.data.size() != t.element_count())
            throw Error("weights: tensor '" + t.name + "' payload does not match its shape");
        for (float v : t.data)
            if (!std::isfinite(v)) throw Error("weights: tensor '" + t.name + "' holds a non-finite value");
    }

    auto find = [&](const std::string& name) -> const NamedTensor& {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw Error("weights: missing tensor '" + name + "'");
        return tensors_[it->second];
    };
    const auto& pitch = find("embed.pitch");
    if (pitch.shape.size() != 2) throw Error("weights: embed.pitch must be rank 2");
    config_.width = pitch.shape[1];
    config_.heads = heads;
    config_.layers = 0;
    while (by_name.contains("layers." + std::to_string(config_.layers) + ".norm1.scale")) ++config_.layers;
    if (config_.layers == 0) throw Error("weights: no attention layers found");
    const auto& hidden = find("layers.0.ff.hidden.weight");
    if (hidden.shape.size() != 2) throw Error("weights: layers.0.ff.hidden.weight must be rank 2");
    config_.ff_width = hidden.shape[1];
    if (heads == 0 || config_.width % heads != 0)
        throw Error("weights: width " + std::to_string(config_.width) + " not divisible by " + std::to_string(heads) +
                    " heads");

    const auto layout = expected_layout(config_);
    slot_.reserve(layout.size());
    for (const auto& [name, shape] : layout) {
        const auto& t = find(name);
        if (t.shape != shape)
            throw Error("weights: tensor '" + name + "' has shape " + shape_string(t.shape) + ", expected " +
                        shape_string(shape));
        slot_.push_back(by_name.at(name));
    }
    if (layout.size() != tensors_.size()) {
        for (const auto& [name, shape] : layout) by_name.erase(name);
        throw Error("weights: unexpected tensor '" + by_name.begin()->first + "'");
    }
}

ValueModelWeights ValueModelWeights::zeros(const ModelConfig& config) {
    std::vector<NamedTensor> tensors;
    for (auto& [name, shape] : expected_layout(config)) {
        NamedTensor t{name, shape, {}};
        t.data.assign(t.element_count(), 0.0f);
        tensors.push_back(std::move(t));
    }
    return ValueModelWeights(std::move(tensors), config.heads);
}

ValueModelWeights ValueModelWeights::random(std::uint64_t seed, const ModelConfig& config, float stddev) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, stddev);
    std::vector<NamedTensor> tensors;
    for (auto& [name, shape] : expected_layout(config)) {
        NamedTensor t{name, shape, {}};
        const bool is_norm = name.find("norm") != std::string::npos;
        const bool is_scale = name.ends_with(".scale");
        t.data.resize(t.element_count());
        for (auto& v : t.data) v = is_norm ? (is_scale ? 1.0f : 0.0f) : normal(rng);
        tensors.push_back(std::move(t));
    }
    return ValueModelWeights(std::move(tensors), config.heads);
}

const NamedTensor& ValueModelWeights::tensor(const std::string& name) const {
    for (const auto& t : tensors_)
        if (t.name == name) return t;
    throw Error("weights: no tensor named '" + name + "'");
}

std::size_t ValueModelWeights::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.element_count();
    return n;
}

Activations embed(const TokenSeq& seq, const ValueModelWeights& w) {
    const WeightsAccess acc{w};
    const std::size_t W = w.config().width;
    Activations x{TokenSeq::kLength, W, std::vector<float>(TokenSeq::kLength * W, 0.0f)};
    const float* table = acc.pitch_table();
    auto add_row = [&](float* dst, int token) {
        if (token < 0 || token >= token::kVocabulary) throw Error("embed: token id " + std::to_string(token) + " out of range");
        const float* src = table + static_cast<std::size_t>(token) * W;
        for (std::size_t c = 0; c < W; ++c) dst[c] += src[c];
    };

    for (std::size_t k = 0; k < kPerfContext; ++k) add_row(x.row(k), seq.perf[k]);
    add_row(x.row(TokenSeq::kDelimiterPos), token::kDelimiter);
    for (std::size_t s = 0; s < kScoreSlots; ++s) {
        // Summation in ascending token order keeps the row independent of
        // the order pitches were listed in.
        std::array<int, kMaxSetSize> tokens = seq.score[s];
        std::ranges::sort(tokens);
        float* dst = x.row(TokenSeq::kFirstScorePos + s);
        bool any = false;
        for (int t : tokens) {
            if (t == token::kNoPitch) continue;
            add_row(dst, t);
            any = true;
        }
        if (!any) add_row(dst, token::kNoPitch);
    }
    add_row(x.row(TokenSeq::kEndPos), token::kEnd);

    const float* pos = acc.position_table();
    for (std::size_t r = 0; r < TokenSeq::kLength; ++r)
        for (std::size_t c = 0; c < W; ++c) x.row(r)[c] += pos[r * W + c];
    return x;
}

namespace {

void layer_norm(const Activations& x, const float* scale, const float* bias, Activations& out) {
    const std::size_t W = x.cols;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const float* in = x.row(r);
        float mean = 0.0f;
        for (std::size_t c = 0; c < W; ++c) mean += in[c];
        mean /= static_cast<float>(W);
        float var = 0.0f;
        for (std::size_t c = 0; c < W; ++c) var += (in[c] - mean) * (in[c] - mean);
        var /= static_cast<float>(W);
        const float inv = 1.0f / std::sqrt(var + kNormEps);
        float* o = out.row(r);
        for (std::size_t c = 0; c < W; ++c) o[c] = (in[c] - mean) * inv * scale[c] + bias[c];
    }
}

// out[r] = x[r] * weight + bias, weight is [in x out].
void linear(const Activations& x, const float* weight, const float* bias, std::size_t out_cols, Activations& out) {
    out.rows = x.rows;
    out.cols = out_cols;
    out.data.resize(x.rows * out_cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        float* o = out.row(r);
        std::copy(bias, bias + out_cols, o);
        const float* in = x.row(r);
        for (std::size_t i = 0; i < x.cols; ++i) {
            const float xi = in[i];
            const float* wrow = weight + i * out_cols;
            for (std::size_t c = 0; c < out_cols; ++c) o[c] += xi * wrow[c];
        }
    }
}

} // namespace

ActionValues forward(const TokenSeq& seq, const ValueModelWeights& w) {
    const WeightsAccess acc{w};
    const auto& cfg = w.config();
    const std::size_t W = cfg.width;
    const std::size_t H = cfg.heads;
    const std::size_t D = W / H;
    const std::size_t N = TokenSeq::kLength;
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(D));

    Activations x = embed(seq, w);
    Activations h{N, W, std::vector<float>(N * W)};
    Activations q, k, v, attn{N, W, std::vector<float>(N * W)}, proj, hidden;
    std::array<float, TokenSeq::kLength> scores{};

    for (std::size_t l = 0; l < cfg.layers; ++l) {
        layer_norm(x, acc.layer(l, norm1_scale), acc.layer(l, norm1_bias), h);
        linear(h, acc.layer(l, query_w), acc.layer(l, query_b), W, q);
        linear(h, acc.layer(l, key_w), acc.layer(l, key_b), W, k);
        linear(h, acc.layer(l, value_w), acc.layer(l, value_b), W, v);

        for (std::size_t head = 0; head < H; ++head) {
            const std::size_t off = head * D;
            for (std::size_t r = 0; r < N; ++r) {
                const float* qr = q.row(r) + off;
                float peak = -std::numeric_limits<float>::infinity();
                for (std::size_t c = 0; c < N; ++c) {
                    if (!seq.mask[c]) continue;
                    const float* kc = k.row(c) + off;
                    float dot = 0.0f;
                    for (std::size_t d = 0; d < D; ++d) dot += qr[d] * kc[d];
                    scores[c] = dot * inv_sqrt_d;
                    peak = std::max(peak, scores[c]);
                }
                float total = 0.0f;
                for (std::size_t c = 0; c < N; ++c) {
                    scores[c] = seq.mask[c] ? std::exp(scores[c] - peak) : 0.0f;
                    total += scores[c];
                }
                float* o = attn.row(r) + off;
                std::fill(o, o + D, 0.0f);
                for (std::size_t c = 0; c < N; ++c) {
                    if (scores[c] == 0.0f) continue;
                    const float p = scores[c] / total;
                    const float* vc = v.row(c) + off;
                    for (std::size_t d = 0; d < D; ++d) o[d] += p * vc[d];
                }
            }
        }
        linear(attn, acc.layer(l, output_w), acc.layer(l, output_b), W, proj);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += proj.data[i];

        layer_norm(x, acc.layer(l, norm2_scale), acc.layer(l, norm2_bias), h);
        linear(h, acc.layer(l, hidden_w), acc.layer(l, hidden_b), cfg.ff_width, hidden);
        for (auto& a : hidden.data) a = std::max(a, 0.0f);
        linear(hidden, acc.layer(l, ff_out_w), acc.layer(l, ff_out_b), W, proj);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += proj.data[i];
    }
    layer_norm(x, acc.tail(0), acc.tail(1), h);

    const float* head_w = acc.tail(2);
    const float* head_b = acc.tail(3);
    ActionValues out;
    for (std::size_t s = 0; s < kScoreSlots; ++s) {
        const std::size_t r = TokenSeq::kFirstScorePos + s;
        if (!seq.mask[r]) continue;
        float logit0 = head_b[0], logit1 = head_b[1];
        const float* hr = h.row(r);
        for (std::size_t c = 0; c < W; ++c) {
            logit0 += hr[c] * head_w[c * 2];
            logit1 += hr[c] * head_w[c * 2 + 1];
        }
        if (!std::isfinite(logit0) || !std::isfinite(logit1))
            throw Error("forward: non-finite activation at score slot " + std::to_string(s));
        // Two-way softmax, probability of class "reward = 1".
        out.q[s] = 1.0 / (1.0 + std::exp(static_cast<double>(logit0) - static_cast<double>(logit1)));
    }
    return out;
}

NetworkValueFunction::NetworkValueFunction(std::shared_ptr<const ValueModelWeights> weights)
    : weights_(std::move(weights)) {
    if (!weights_) throw Error("NetworkValueFunction: null weights");
}

ActionValues NetworkValueFunction::evaluate(const AgentState& state) const {
    return forward(tokenize(state), *weights_);
}

} // namespace symalign
