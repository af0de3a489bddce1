#pragma once

#include "symalign/agent_state.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace symalign {

/// Architecture of the value network. Width, depth and feed-forward size are
/// recovered from tensor shapes on load; the head count is not stored in the
/// file and must be supplied.
struct ModelConfig {
    std::size_t width = 64;
    std::size_t heads = 8;
    std::size_t layers = 6;
    std::size_t ff_width = 64;

    bool operator==(const ModelConfig&) const = default;
};

struct NamedTensor {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<float> data;  // row-major

    std::size_t element_count() const noexcept;
    bool operator==(const NamedTensor&) const = default;
};

/// Tensor names and shapes expected for `config`, in canonical file order.
///
///   embed.pitch                     [91, W]
///   embed.position                  [26, W]
///   layers.L.norm1.scale|bias       [W]
///   layers.L.attn.{query,key,value,output}.weight  [W, W]   (input-major)
///   layers.L.attn.{query,key,value,output}.bias    [W]
///   layers.L.norm2.scale|bias       [W]
///   layers.L.ff.hidden.weight       [W, F]
///   layers.L.ff.hidden.bias         [F]
///   layers.L.ff.output.weight       [F, W]
///   layers.L.ff.output.bias         [W]
///   final_norm.scale|bias           [W]
///   head.weight                     [W, 2]
///   head.bias                       [2]
///
/// Linear layers compute y = x * weight + bias with x as a row vector.
std::vector<std::pair<std::string, std::vector<std::uint32_t>>> expected_layout(const ModelConfig& config);

/// Validated, immutable parameter set for the value network.
class ValueModelWeights {
public:
    /// Checks every expected tensor is present exactly once with the right
    /// shape and values are finite. Throws Error naming the first problem.
    ValueModelWeights(std::vector<NamedTensor> tensors, std::size_t heads = 8);

    static ValueModelWeights zeros(const ModelConfig& config = {});
    /// Gaussian init (norm scales 1, norm biases 0) from a fixed seed.
    static ValueModelWeights random(std::uint64_t seed, const ModelConfig& config = {}, float stddev = 0.02f);

    const ModelConfig& config() const noexcept { return config_; }
    const std::vector<NamedTensor>& tensors() const noexcept { return tensors_; }
    const NamedTensor& tensor(const std::string& name) const;
    std::size_t parameter_count() const noexcept;

    bool operator==(const ValueModelWeights& other) const { return tensors_ == other.tensors_; }

private:
    friend struct WeightsAccess;

    std::vector<NamedTensor> tensors_;
    ModelConfig config_;
    std::vector<std::size_t> slot_;  // canonical position -> index into tensors_
};

/// Row-major [TokenSeq::kLength x width] activations.
struct Activations {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    float* row(std::size_t r) noexcept { return data.data() + r * cols; }
    const float* row(std::size_t r) const noexcept { return data.data() + r * cols; }
};

/// Token plus position embeddings. A score slot embeds as the sum of its
/// pitch embeddings (order-independent); an all-padding slot embeds as
/// no_pitch.
Activations embed(const TokenSeq& seq, const ValueModelWeights& w);

/// Pre-norm attention stack with key padding mask, then the shared binary
/// head on every score slot. q = P(reward = 1). Throws Error if any
/// activation turns non-finite.
ActionValues forward(const TokenSeq& seq, const ValueModelWeights& w);

// SMAW weight file (little-endian): "SMAW", u32 version = 1, u32 count;
// per tensor u16 name length, UTF-8 name, u8 rank, rank x u32 dims, f32
// payload; trailing u32 CRC-32 over all preceding bytes.
inline constexpr std::uint32_t kSmawVersion = 1;

std::vector<std::uint8_t> encode_weights(const ValueModelWeights& w);
ValueModelWeights decode_weights(std::span<const std::uint8_t> bytes, std::size_t heads = 8);

ValueModelWeights load_weights(const std::filesystem::path& path, std::size_t heads = 8);
void save_weights(const ValueModelWeights& w, const std::filesystem::path& path);

/// Common interface over the trained network and the heuristic.
class ValueFunction {
public:
    virtual ~ValueFunction() = default;
    virtual ActionValues evaluate(const AgentState& state) const = 0;
};

class NetworkValueFunction final : public ValueFunction {
public:
    explicit NetworkValueFunction(std::shared_ptr<const ValueModelWeights> weights);
    ActionValues evaluate(const AgentState& state) const override;

    const ValueModelWeights& weights() const noexcept { return *weights_; }

private:
    std::shared_ptr<const ValueModelWeights> weights_;
};

/// Training-free stand-in for the network: for each slot, the best placement
/// of a suffix of the performance window, in order, into score slots ending
/// at that slot, divided by the window length. A placement scores its note
/// count minus the number of onsets it skips, less 1e-3 for each pair of
/// consecutive notes in one slot whose pitch does not rise.
ActionValues heuristic_values(const AgentState& state);

class HeuristicValueFunction final : public ValueFunction {
public:
    ActionValues evaluate(const AgentState& state) const override { return heuristic_values(state); }
};

} // namespace symalign
