// SPDX-License-Identifier: Apache-2.0
//
// uavsec: secrecy-rate simulation and solvers for multi-UAV RSMA downlinks
// Copyright (C) 2026 The uavsec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace uavsec::nn {

/// Dense real tensor, row-major, batch dimension first.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    [[nodiscard]] const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
    [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    const double& operator[](std::size_t i) const noexcept { return data_[i]; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

    /// Same entries, new shape with the same element count.
    [[nodiscard]] Tensor reshaped(std::vector<std::size_t> shape) const;
    [[nodiscard]] bool all_finite() const noexcept;
    void fill(double v) noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

enum class Mode { Train, Eval };

enum class LayerKind { Dense, Conv3x3, BatchNorm, Relu, MaxPool, Tanh, Flatten };

class Layer {
public:
    virtual ~Layer() = default;
    [[nodiscard]] virtual LayerKind kind() const noexcept = 0;
    [[nodiscard]] virtual std::unique_ptr<Layer> clone() const = 0;

    /// `saved` receives whatever backward needs.
    virtual Tensor forward(const Tensor& x, Mode mode, std::vector<Tensor>& saved) const = 0;
    /// Applies side effects of a train-mode forward (running statistics).
    virtual void commit(const std::vector<Tensor>& /*saved*/) {}
    /// Writes parameter gradients (one per params() entry) and returns the input gradient.
    virtual Tensor backward(const std::vector<Tensor>& saved, const Tensor& grad_out,
                            std::vector<Tensor>& param_grads) const = 0;

    virtual std::vector<Tensor*> params() { return {}; }
    [[nodiscard]] virtual std::vector<const Tensor*> params() const { return {}; }
    /// Non-trainable state saved in checkpoints (batchnorm running statistics).
    virtual std::vector<Tensor*> buffers() { return {}; }
    [[nodiscard]] virtual std::vector<const Tensor*> buffers() const { return {}; }
    /// Integers that reconstruct the layer (e.g. {in, out} for dense).
    [[nodiscard]] virtual std::vector<std::size_t> config() const { return {}; }
    virtual void init(std::mt19937_64& /*rng*/) {}
};

std::unique_ptr<Layer> make_dense(std::size_t in, std::size_t out);
std::unique_ptr<Layer> make_conv3x3(std::size_t in_channels, std::size_t out_channels);
std::unique_ptr<Layer> make_batchnorm(std::size_t channels);
std::unique_ptr<Layer> make_relu();
std::unique_ptr<Layer> make_maxpool();
std::unique_ptr<Layer> make_tanh();
std::unique_ptr<Layer> make_flatten();
std::unique_ptr<Layer> make_layer(LayerKind kind, const std::vector<std::size_t>& config);

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

struct ForwardCache {
    std::uint64_t generation = 0;
    std::vector<std::vector<Tensor>> saved;  // per layer
};

struct Gradients {
    std::vector<Tensor> params;  // flattened over layers in params() order
    Tensor input;
};

/// Sequential network. Parameter changes bump a generation counter; backward on a
/// cache from an older generation throws StaleCache.
class Network {
public:
    Network() = default;
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    Network& add(std::unique_ptr<Layer> layer);
    [[nodiscard]] std::size_t num_layers() const noexcept { return layers_.size(); }
    [[nodiscard]] const Layer& layer(std::size_t i) const { return *layers_.at(i); }

    /// Fan-in uniform initialization, seeded.
    void init(std::uint64_t seed);

    Tensor forward(const Tensor& x, Mode mode, ForwardCache* cache = nullptr);
    /// Eval-mode forward that leaves the network untouched.
    [[nodiscard]] Tensor predict(const Tensor& x) const;
    [[nodiscard]] Gradients backward(const ForwardCache& cache, const Tensor& grad_out) const;

    std::vector<Tensor*> params();
    [[nodiscard]] std::vector<const Tensor*> params() const;
    std::vector<Tensor*> buffers();
    [[nodiscard]] std::vector<const Tensor*> buffers() const;
    [[nodiscard]] std::size_t num_params() const;

    /// Call after editing parameters in place.
    void touch() noexcept { ++generation_; }
    [[nodiscard]] std::uint64_t generation() const noexcept { return generation_; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    std::uint64_t generation_ = 1;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t t = 0;
};

/// One Adam update on raw parameter slices (one slice per tensor).
void adam_update(std::vector<std::span<double>> params, const std::vector<std::span<const double>>& grads,
                 AdamState& state, const AdamConfig& cfg);

void adam_step(Network& net, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

/// θ_target ← τ·θ + (1 − τ)·θ_target over parameters and buffers.
void soft_update(Network& target, const Network& source, double tau);

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    /// A ReLU input or max-pool runner-up lies within the kink margin; finite
    /// differences may straddle the kink and the result is not meaningful.
    bool near_kink = false;
};

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kKinkMargin = 1e-4;
/// Gradients smaller than this are compared in absolute rather than relative terms.
inline constexpr double kGradCheckFloor = 1e-4;

/// Compares backward against central differences of a fixed random projection of the
/// output, over at least `min_samples` parameters (all of them if fewer) plus input entries.
GradCheckResult grad_check(const Network& net, const Tensor& input, Mode mode, std::uint64_t seed,
                           std::size_t min_samples = 200);

/// Named networks and real vectors in one versioned text file. Values are written as
/// hexadecimal floats, so a round trip is bit-exact.
struct Checkpoint {
    std::uint64_t seed = 0;
    std::map<std::string, Network> networks;
    std::map<std::string, std::vector<double>> vectors;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace uavsec::nn
