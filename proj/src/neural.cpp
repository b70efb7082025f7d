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
#include "uavsec/neural.hpp"

#include "uavsec/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

namespace uavsec::nn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

[[noreturn]] void shape_error(const std::string& layer, const std::vector<std::size_t>& got) {
    throw Error(ErrorCode::ShapeMismatch, layer + ": unexpected input shape " + shape_str(got));
}

void fill_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.values()) v = dist(rng);
}

// ---- dense ---------------------------------------------------------------

class Dense final : public Layer {
public:
    Dense(std::size_t in, std::size_t out) : in_(in), out_(out), w_({out, in}), b_({out}) {
        if (in == 0 || out == 0) throw Error(ErrorCode::InvalidArgument, "dense: zero width");
    }
    LayerKind kind() const noexcept override { return LayerKind::Dense; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

    Tensor forward(const Tensor& x, Mode, std::vector<Tensor>& saved) const override {
        if (x.rank() != 2 || x.dim(1) != in_) shape_error("dense", x.shape());
        const std::size_t batch = x.dim(0);
        Tensor y({batch, out_});
        for (std::size_t n = 0; n < batch; ++n) {
            const double* xr = &x[n * in_];
            for (std::size_t o = 0; o < out_; ++o) {
                const double* wr = &w_[o * in_];
                double acc = b_[o];
                for (std::size_t i = 0; i < in_; ++i) acc += wr[i] * xr[i];
                y[n * out_ + o] = acc;
            }
        }
        saved = {x};
        return y;
    }

    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        const Tensor& x = saved.at(0);
        const std::size_t batch = x.dim(0);
        if (g.shape() != std::vector<std::size_t>{batch, out_}) shape_error("dense backward", g.shape());
        Tensor gw({out_, in_});
        Tensor gb({out_});
        Tensor gx({batch, in_});
        for (std::size_t n = 0; n < batch; ++n) {
            const double* xr = &x[n * in_];
            double* gxr = &gx[n * in_];
            for (std::size_t o = 0; o < out_; ++o) {
                const double go = g[n * out_ + o];
                if (go == 0.0) continue;
                gb[o] += go;
                double* gwr = &gw[o * in_];
                const double* wr = &w_[o * in_];
                for (std::size_t i = 0; i < in_; ++i) {
                    gwr[i] += go * xr[i];
                    gxr[i] += go * wr[i];
                }
            }
        }
        pg = {std::move(gw), std::move(gb)};
        return gx;
    }

    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<const Tensor*> params() const override { return {&w_, &b_}; }
    std::vector<std::size_t> config() const override { return {in_, out_}; }
    void init(std::mt19937_64& rng) override {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
        fill_uniform(w_, bound, rng);
        fill_uniform(b_, bound, rng);
    }

private:
    std::size_t in_, out_;
    Tensor w_, b_;
};

// ---- conv3x3, padding 1 --------------------------------------------------

class Conv3x3 final : public Layer {
public:
    Conv3x3(std::size_t cin, std::size_t cout) : cin_(cin), cout_(cout), w_({cout, cin, 3, 3}), b_({cout}) {
        if (cin == 0 || cout == 0) throw Error(ErrorCode::InvalidArgument, "conv3x3: zero channels");
    }
    LayerKind kind() const noexcept override { return LayerKind::Conv3x3; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv3x3>(*this); }

    Tensor forward(const Tensor& x, Mode, std::vector<Tensor>& saved) const override {
        if (x.rank() != 4 || x.dim(1) != cin_) shape_error("conv3x3", x.shape());
        const std::size_t batch = x.dim(0), h = x.dim(2), wd = x.dim(3), plane = h * wd;
        const std::size_t taps = cin_ * 9;
        Tensor y({batch, cout_, h, wd});
        std::vector<double> col(taps * plane);
        for (std::size_t n = 0; n < batch; ++n) {
            im2col(&x[n * cin_ * plane], h, wd, col.data());
            for (std::size_t o = 0; o < cout_; ++o) {
                double* out = &y[(n * cout_ + o) * plane];
                const double* k = &w_[o * taps];
                std::size_t p = 0;
                for (; p + kBlock <= plane; p += kBlock) {
                    double acc[kBlock];
                    std::fill(acc, acc + kBlock, b_[o]);
                    for (std::size_t j = 0; j < taps; ++j) {
                        const double* src = col.data() + j * plane + p;
                        for (std::size_t q = 0; q < kBlock; ++q) acc[q] += k[j] * src[q];
                    }
                    std::copy(acc, acc + kBlock, out + p);
                }
                for (; p < plane; ++p) {
                    double acc = b_[o];
                    for (std::size_t j = 0; j < taps; ++j) acc += k[j] * col[j * plane + p];
                    out[p] = acc;
                }
            }
        }
        saved = {x};
        return y;
    }

    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        const Tensor& x = saved.at(0);
        const std::size_t batch = x.dim(0), h = x.dim(2), wd = x.dim(3), plane = h * wd;
        if (g.shape() != std::vector<std::size_t>{batch, cout_, h, wd}) shape_error("conv3x3 backward", g.shape());
        const std::size_t taps = cin_ * 9;
        Tensor gw(w_.shape());
        Tensor gb({cout_});
        Tensor gx(x.shape());
        std::vector<double> col(taps * plane), gcol(taps * plane);
        for (std::size_t n = 0; n < batch; ++n) {
            im2col(&x[n * cin_ * plane], h, wd, col.data());
            const double* gn = &g[n * cout_ * plane];
            for (std::size_t o = 0; o < cout_; ++o) {
                const double* go = gn + o * plane;
                for (std::size_t p = 0; p < plane; ++p) gb[o] += go[p];
                double* gk = &gw[o * taps];
                for (std::size_t j = 0; j < taps; ++j) {
                    const double* src = col.data() + j * plane;
                    double acc = 0.0;
                    for (std::size_t p = 0; p < plane; ++p) acc += go[p] * src[p];
                    gk[j] += acc;
                }
            }
            for (std::size_t j = 0; j < taps; ++j) {
                double* gsrc = gcol.data() + j * plane;
                std::size_t p = 0;
                for (; p + kBlock <= plane; p += kBlock) {
                    double acc[kBlock] = {};
                    for (std::size_t o = 0; o < cout_; ++o) {
                        const double kv = w_[o * taps + j];
                        const double* go = gn + o * plane + p;
                        for (std::size_t q = 0; q < kBlock; ++q) acc[q] += kv * go[q];
                    }
                    std::copy(acc, acc + kBlock, gsrc + p);
                }
                for (; p < plane; ++p) {
                    double acc = 0.0;
                    for (std::size_t o = 0; o < cout_; ++o) acc += w_[o * taps + j] * gn[o * plane + p];
                    gsrc[p] = acc;
                }
            }
            col2im(gcol.data(), h, wd, &gx[n * cin_ * plane]);
        }
        pg = {std::move(gw), std::move(gb)};
        return gx;
    }

    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<const Tensor*> params() const override { return {&w_, &b_}; }
    std::vector<std::size_t> config() const override { return {cin_, cout_}; }
    void init(std::mt19937_64& rng) override {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cin_ * 9));
        fill_uniform(w_, bound, rng);
        fill_uniform(b_, bound, rng);
    }

private:
    static constexpr std::size_t kBlock = 16;

    // Row (c, ky, kx) of `col` holds the input plane of channel c shifted by (ky-1, kx-1), zero padded.
    void im2col(const double* in, std::size_t h, std::size_t wd, double* col) const {
        const std::size_t plane = h * wd;
        for (std::size_t c = 0; c < cin_; ++c) {
            for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    double* row = col + ((c * 3 + ky) * 3 + kx) * plane;
                    std::fill(row, row + plane, 0.0);
                    const std::size_t y0 = ky == 0 ? 1 : 0, y1 = ky == 2 ? h - 1 : h;
                    const std::size_t x0 = kx == 0 ? 1 : 0, x1 = kx == 2 ? wd - 1 : wd;
                    for (std::size_t r = y0; r < y1; ++r) {
                        const double* src = in + c * plane + (r + ky - 1) * wd + (kx - 1);
                        for (std::size_t q = x0; q < x1; ++q) row[r * wd + q] = src[q];
                    }
                }
            }
        }
    }

    void col2im(const double* gcol, std::size_t h, std::size_t wd, double* gin) const {
        const std::size_t plane = h * wd;
        for (std::size_t c = 0; c < cin_; ++c) {
            for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    const double* row = gcol + ((c * 3 + ky) * 3 + kx) * plane;
                    const std::size_t y0 = ky == 0 ? 1 : 0, y1 = ky == 2 ? h - 1 : h;
                    const std::size_t x0 = kx == 0 ? 1 : 0, x1 = kx == 2 ? wd - 1 : wd;
                    for (std::size_t r = y0; r < y1; ++r) {
                        double* dst = gin + c * plane + (r + ky - 1) * wd + (kx - 1);
                        for (std::size_t q = x0; q < x1; ++q) dst[q] += row[r * wd + q];
                    }
                }
            }
        }
    }

    std::size_t cin_, cout_;
    Tensor w_, b_;
};

// ---- batch normalization -------------------------------------------------
// Per feature on [B, F] inputs, per channel on [B, C, H, W] inputs.

class BatchNorm final : public Layer {
public:
    explicit BatchNorm(std::size_t channels)
        : ch_(channels), gamma_({channels}, 1.0), beta_({channels}), mean_({channels}), var_({channels}, 1.0) {
        if (channels == 0) throw Error(ErrorCode::InvalidArgument, "batchnorm: zero channels");
    }
    LayerKind kind() const noexcept override { return LayerKind::BatchNorm; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

    Tensor forward(const Tensor& x, Mode mode, std::vector<Tensor>& saved) const override {
        if ((x.rank() != 2 && x.rank() != 4) || x.dim(1) != ch_) shape_error("batchnorm", x.shape());
        const std::size_t batch = x.dim(0), spatial = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
        const std::size_t count = batch * spatial;
        Tensor mean({ch_}), var({ch_}), inv_std({ch_});
        if (mode == Mode::Train) {
            if (count < 2) throw Error(ErrorCode::ShapeMismatch, "batchnorm: train mode needs more than one value per channel");
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch_; ++c) {
                    const double* p = &x[(n * ch_ + c) * spatial];
                    for (std::size_t s = 0; s < spatial; ++s) mean[c] += p[s];
                }
            for (std::size_t c = 0; c < ch_; ++c) mean[c] /= static_cast<double>(count);
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch_; ++c) {
                    const double* p = &x[(n * ch_ + c) * spatial];
                    for (std::size_t s = 0; s < spatial; ++s) var[c] += (p[s] - mean[c]) * (p[s] - mean[c]);
                }
            for (std::size_t c = 0; c < ch_; ++c) var[c] /= static_cast<double>(count);
        } else {
            mean = mean_;
            var = var_;
        }
        for (std::size_t c = 0; c < ch_; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + kBatchNormEps);
        Tensor xhat(x.shape()), y(x.shape());
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t c = 0; c < ch_; ++c) {
                const std::size_t off = (n * ch_ + c) * spatial;
                for (std::size_t s = 0; s < spatial; ++s) {
                    xhat[off + s] = (x[off + s] - mean[c]) * inv_std[c];
                    y[off + s] = gamma_[c] * xhat[off + s] + beta_[c];
                }
            }
        saved = {std::move(xhat), std::move(inv_std), Tensor({1}, mode == Mode::Train ? 1.0 : 0.0), std::move(mean),
                 std::move(var), Tensor({1}, static_cast<double>(count))};
        return y;
    }

    void commit(const std::vector<Tensor>& saved) override {
        if (saved.at(2)[0] != 1.0) return;
        const double count = saved.at(5)[0];
        for (std::size_t c = 0; c < ch_; ++c) {
            const double unbiased = saved[4][c] * count / (count - 1.0);
            mean_[c] = (1.0 - kBatchNormMomentum) * mean_[c] + kBatchNormMomentum * saved[3][c];
            var_[c] = (1.0 - kBatchNormMomentum) * var_[c] + kBatchNormMomentum * unbiased;
        }
    }

    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        const Tensor& xhat = saved.at(0);
        const Tensor& inv_std = saved.at(1);
        const bool train = saved.at(2)[0] == 1.0;
        if (g.shape() != xhat.shape()) shape_error("batchnorm backward", g.shape());
        const std::size_t batch = xhat.dim(0), spatial = xhat.rank() == 4 ? xhat.dim(2) * xhat.dim(3) : 1;
        const double count = static_cast<double>(batch * spatial);
        Tensor gg({ch_}), gbeta({ch_});
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t c = 0; c < ch_; ++c) {
                const std::size_t off = (n * ch_ + c) * spatial;
                for (std::size_t s = 0; s < spatial; ++s) {
                    gg[c] += g[off + s] * xhat[off + s];
                    gbeta[c] += g[off + s];
                }
            }
        Tensor gx(xhat.shape());
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t c = 0; c < ch_; ++c) {
                const std::size_t off = (n * ch_ + c) * spatial;
                const double scale = gamma_[c] * inv_std[c];
                for (std::size_t s = 0; s < spatial; ++s) {
                    gx[off + s] = train ? scale * (g[off + s] - (gbeta[c] + xhat[off + s] * gg[c]) / count)
                                        : scale * g[off + s];
                }
            }
        pg = {std::move(gg), std::move(gbeta)};
        return gx;
    }

    std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
    std::vector<const Tensor*> params() const override { return {&gamma_, &beta_}; }
    std::vector<Tensor*> buffers() override { return {&mean_, &var_}; }
    std::vector<const Tensor*> buffers() const override { return {&mean_, &var_}; }
    std::vector<std::size_t> config() const override { return {ch_}; }
    void init(std::mt19937_64&) override {
        gamma_.fill(1.0);
        beta_.fill(0.0);
        mean_.fill(0.0);
        var_.fill(1.0);
    }

private:
    std::size_t ch_;
    Tensor gamma_, beta_, mean_, var_;
};

// ---- elementwise and reshaping layers ------------------------------------

class Relu final : public Layer {
public:
    LayerKind kind() const noexcept override { return LayerKind::Relu; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
    Tensor forward(const Tensor& x, Mode, std::vector<Tensor>& saved) const override {
        Tensor y = x;
        for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
        saved = {x};
        return y;
    }
    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        const Tensor& x = saved.at(0);
        if (g.shape() != x.shape()) shape_error("relu backward", g.shape());
        Tensor gx(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0.0 ? g[i] : 0.0;
        pg.clear();
        return gx;
    }
};

class Tanh final : public Layer {
public:
    LayerKind kind() const noexcept override { return LayerKind::Tanh; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Tanh>(*this); }
    Tensor forward(const Tensor& x, Mode, std::vector<Tensor>& saved) const override {
        Tensor y = x;
        for (double& v : y.values()) v = std::tanh(v);
        saved = {y};
        return y;
    }
    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        const Tensor& y = saved.at(0);
        if (g.shape() != y.shape()) shape_error("tanh backward", g.shape());
        Tensor gx(y.shape());
        for (std::size_t i = 0; i < y.size(); ++i) gx[i] = g[i] * (1.0 - y[i] * y[i]);
        pg.clear();
        return gx;
    }
};

// 2×2 windows, stride 2; odd trailing rows and columns are dropped.
class MaxPool final : public Layer {
public:
    LayerKind kind() const noexcept override { return LayerKind::MaxPool; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool>(*this); }
    Tensor forward(const Tensor& x, Mode, std::vector<Tensor>& saved) const override {
        if (x.rank() != 4 || x.dim(2) < 2 || x.dim(3) < 2) shape_error("maxpool", x.shape());
        const std::size_t batch = x.dim(0), ch = x.dim(1), h = x.dim(2), wd = x.dim(3);
        const std::size_t oh = h / 2, ow = wd / 2;
        Tensor y({batch, ch, oh, ow});
        Tensor arg({batch, ch, oh, ow});
        Tensor gap({batch, ch, oh, ow});
        for (std::size_t p = 0; p < batch * ch; ++p) {
            const std::size_t in_off = p * h * wd, out_off = p * oh * ow;
            for (std::size_t r = 0; r < oh; ++r)
                for (std::size_t s = 0; s < ow; ++s) {
                    std::size_t best = in_off + 2 * r * wd + 2 * s;
                    double top = x[best], second = -INFINITY;
                    for (std::size_t dy = 0; dy < 2; ++dy)
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            if (dy == 0 && dx == 0) continue;
                            const std::size_t idx = in_off + (2 * r + dy) * wd + 2 * s + dx;
                            if (x[idx] > top) {
                                second = top;
                                top = x[idx];
                                best = idx;
                            } else if (x[idx] > second) {
                                second = x[idx];
                            }
                        }
                    const std::size_t o = out_off + r * ow + s;
                    y[o] = top;
                    arg[o] = static_cast<double>(best);
                    // A tie among zeros clamped by an earlier ReLU carries no gradient either way.
                    gap[o] = top == 0.0 && second == 0.0 ? INFINITY : top - second;
                }
        }
        saved = {std::move(arg), std::move(gap), Tensor({x.rank()}, std::vector<double>(x.shape().begin(), x.shape().end()))};
        return y;
    }
    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        const Tensor& arg = saved.at(0);
        if (g.shape() != arg.shape()) shape_error("maxpool backward", g.shape());
        std::vector<std::size_t> in_shape;
        for (double d : saved.at(2).values()) in_shape.push_back(static_cast<std::size_t>(d));
        Tensor gx(in_shape);
        for (std::size_t i = 0; i < arg.size(); ++i) gx[static_cast<std::size_t>(arg[i])] += g[i];
        pg.clear();
        return gx;
    }
};

class Flatten final : public Layer {
public:
    LayerKind kind() const noexcept override { return LayerKind::Flatten; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
    Tensor forward(const Tensor& x, Mode, std::vector<Tensor>& saved) const override {
        if (x.rank() < 1) shape_error("flatten", x.shape());
        const std::size_t batch = x.dim(0);
        saved = {Tensor({x.rank()}, std::vector<double>(x.shape().begin(), x.shape().end()))};
        return x.reshaped({batch, batch == 0 ? 0 : x.size() / batch});
    }
    Tensor backward(const std::vector<Tensor>& saved, const Tensor& g, std::vector<Tensor>& pg) const override {
        std::vector<std::size_t> in_shape;
        for (double d : saved.at(0).values()) in_shape.push_back(static_cast<std::size_t>(d));
        pg.clear();
        return g.reshaped(in_shape);
    }
};

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

} // namespace

// ---- tensor --------------------------------------------------------------

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != product(shape_))
        throw Error(ErrorCode::ShapeMismatch, "tensor: " + std::to_string(data_.size()) + " entries for shape " + shape_str(shape_));
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (product(shape) != data_.size())
        throw Error(ErrorCode::ShapeMismatch, "reshape " + shape_str(shape_) + " to " + shape_str(shape));
    return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

// ---- factories -----------------------------------------------------------

std::unique_ptr<Layer> make_dense(std::size_t in, std::size_t out) { return std::make_unique<Dense>(in, out); }
std::unique_ptr<Layer> make_conv3x3(std::size_t in_channels, std::size_t out_channels) {
    return std::make_unique<Conv3x3>(in_channels, out_channels);
}
std::unique_ptr<Layer> make_batchnorm(std::size_t channels) { return std::make_unique<BatchNorm>(channels); }
std::unique_ptr<Layer> make_relu() { return std::make_unique<Relu>(); }
std::unique_ptr<Layer> make_maxpool() { return std::make_unique<MaxPool>(); }
std::unique_ptr<Layer> make_tanh() { return std::make_unique<Tanh>(); }
std::unique_ptr<Layer> make_flatten() { return std::make_unique<Flatten>(); }

std::unique_ptr<Layer> make_layer(LayerKind kind, const std::vector<std::size_t>& config) {
    auto need = [&](std::size_t n) {
        if (config.size() != n)
            throw Error(ErrorCode::InvalidArgument, to_string(kind) + ": expected " + std::to_string(n) + " config values");
    };
    switch (kind) {
    case LayerKind::Dense: need(2); return make_dense(config[0], config[1]);
    case LayerKind::Conv3x3: need(2); return make_conv3x3(config[0], config[1]);
    case LayerKind::BatchNorm: need(1); return make_batchnorm(config[0]);
    case LayerKind::Relu: need(0); return make_relu();
    case LayerKind::MaxPool: need(0); return make_maxpool();
    case LayerKind::Tanh: need(0); return make_tanh();
    case LayerKind::Flatten: need(0); return make_flatten();
    }
    throw Error(ErrorCode::InvalidArgument, "unknown layer kind");
}

std::string to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv3x3: return "conv3x3";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Tanh: return "tanh";
    case LayerKind::Flatten: return "flatten";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
    for (LayerKind k : {LayerKind::Dense, LayerKind::Conv3x3, LayerKind::BatchNorm, LayerKind::Relu, LayerKind::MaxPool,
                        LayerKind::Tanh, LayerKind::Flatten})
        if (to_string(k) == name) return k;
    throw Error(ErrorCode::InvalidArgument, "unknown layer kind '" + name + "'");
}

// ---- network -------------------------------------------------------------

Network::Network(const Network& other) : generation_(other.generation_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        Network tmp(other);
        layers_ = std::move(tmp.layers_);
        generation_ = std::max(generation_, other.generation_) + 1;
    }
    return *this;
}

Network& Network::add(std::unique_ptr<Layer> layer) {
    if (!layer) throw Error(ErrorCode::InvalidArgument, "network: null layer");
    layers_.push_back(std::move(layer));
    touch();
    return *this;
}

void Network::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& l : layers_) l->init(rng);
    touch();
}

Tensor Network::forward(const Tensor& x, Mode mode, ForwardCache* cache) {
    if (cache) {
        cache->generation = 0;
        cache->saved.assign(layers_.size(), {});
    }
    Tensor h = x;
    std::vector<Tensor> scratch;
    bool updated = false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        std::vector<Tensor>& saved = cache ? cache->saved[i] : scratch;
        h = layers_[i]->forward(h, mode, saved);
        if (mode == Mode::Train && !std::as_const(*layers_[i]).buffers().empty()) {
            layers_[i]->commit(saved);
            updated = true;
        }
    }
    // Running statistics do not enter train-mode gradients, so the cache stays valid.
    if (updated) {
        ++generation_;
    }
    if (cache) cache->generation = generation_;
    return h;
}

Tensor Network::predict(const Tensor& x) const {
    Tensor h = x;
    std::vector<Tensor> scratch;
    for (const auto& l : layers_) h = l->forward(h, Mode::Eval, scratch);
    return h;
}

Gradients Network::backward(const ForwardCache& cache, const Tensor& grad_out) const {
    if (cache.generation != generation_ || cache.saved.size() != layers_.size())
        throw Error(ErrorCode::StaleCache, "network parameters changed since the forward pass");
    Gradients out;
    std::vector<std::vector<Tensor>> per_layer(layers_.size());
    Tensor g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(cache.saved[i], g, per_layer[i]);
    for (auto& pl : per_layer)
        for (auto& t : pl) out.params.push_back(std::move(t));
    out.input = std::move(g);
    return out;
}

std::vector<Tensor*> Network::params() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (Tensor* t : l->params()) out.push_back(t);
    return out;
}

std::vector<const Tensor*> Network::params() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_)
        for (const Tensor* t : static_cast<const Layer&>(*l).params()) out.push_back(t);
    return out;
}

std::vector<Tensor*> Network::buffers() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (Tensor* t : l->buffers()) out.push_back(t);
    return out;
}

std::vector<const Tensor*> Network::buffers() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_)
        for (const Tensor* t : static_cast<const Layer&>(*l).buffers()) out.push_back(t);
    return out;
}

std::size_t Network::num_params() const {
    std::size_t n = 0;
    for (const Tensor* t : params()) n += t->size();
    return n;
}

// ---- optimizer -----------------------------------------------------------

void adam_update(std::vector<std::span<double>> params, const std::vector<std::span<const double>>& grads,
                 AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size()) throw Error(ErrorCode::ShapeMismatch, "adam: parameter/gradient count");
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].size(), 0.0);
            state.v[i].assign(params[i].size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "adam: state does not match parameters");
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size() || state.m[i].size() != params[i].size())
            throw Error(ErrorCode::ShapeMismatch, "adam: tensor " + std::to_string(i) + " size");
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < params[i].size(); ++j) {
            const double g = grads[i][j];
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
            params[i][j] -= cfg.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg.eps);
        }
    }
}

void adam_step(Network& net, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
    auto ps = net.params();
    if (ps.size() != grads.params.size()) throw Error(ErrorCode::ShapeMismatch, "adam: gradient count");
    std::vector<std::span<double>> p;
    std::vector<std::span<const double>> g;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        p.push_back(ps[i]->data());
        g.push_back(grads.params[i].data());
    }
    adam_update(std::move(p), g, state, cfg);
    net.touch();
}

void soft_update(Network& target, const Network& source, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "soft_update: tau outside [0, 1]");
    auto blend = [&](std::vector<Tensor*> t, std::vector<const Tensor*> s) {
        if (t.size() != s.size()) throw Error(ErrorCode::ShapeMismatch, "soft_update: network structure differs");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i]->shape() != s[i]->shape()) throw Error(ErrorCode::ShapeMismatch, "soft_update: tensor shape differs");
            for (std::size_t j = 0; j < t[i]->size(); ++j) (*t[i])[j] = tau * (*s[i])[j] + (1.0 - tau) * (*t[i])[j];
        }
    };
    blend(target.params(), source.params());
    blend(target.buffers(), source.buffers());
    target.touch();
}

// ---- finite-difference check ---------------------------------------------

namespace {

double projected(const Network& net, const Tensor& x, Mode mode, const Tensor& r) {
    Tensor y = x;
    std::vector<Tensor> scratch;
    for (std::size_t i = 0; i < net.num_layers(); ++i) y = net.layer(i).forward(y, mode, scratch);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
    return s;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (k >= n) return idx;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

GradCheckResult grad_check(const Network& net, const Tensor& input, Mode mode, std::uint64_t seed,
                           std::size_t min_samples) {
    Network work(net);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    // Forward without committing running statistics, so the check leaves `net` semantics intact.
    ForwardCache cache;
    cache.saved.assign(work.num_layers(), {});
    Tensor y = input;
    for (std::size_t i = 0; i < work.num_layers(); ++i) y = work.layer(i).forward(y, mode, cache.saved[i]);
    cache.generation = work.generation();

    GradCheckResult result;
    for (std::size_t i = 0; i < work.num_layers(); ++i) {
        const auto kind = work.layer(i).kind();
        const auto& s = cache.saved[i];
        if (kind == LayerKind::Relu)
            for (double v : s[0].values()) result.near_kink |= std::abs(v) < kKinkMargin;
        if (kind == LayerKind::MaxPool)
            for (double v : s[1].values()) result.near_kink |= v < kKinkMargin;
    }

    Tensor r(y.shape());
    for (double& v : r.values()) v = normal(rng);
    const Gradients analytic = work.backward(cache, r);

    auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kGradCheckFloor});
    };
    auto central = [&](double& slot, const Tensor& x) {
        const double keep = slot;
        slot = keep + kGradCheckStep;
        const double up = projected(work, x, mode, r);
        slot = keep - kGradCheckStep;
        const double down = projected(work, x, mode, r);
        slot = keep;
        return (up - down) / (2.0 * kGradCheckStep);
    };

    auto ps = work.params();
    std::vector<std::pair<std::size_t, std::size_t>> flat;
    for (std::size_t t = 0; t < ps.size(); ++t)
        for (std::size_t j = 0; j < ps[t]->size(); ++j) flat.emplace_back(t, j);
    for (std::size_t k : sample_indices(flat.size(), min_samples, rng)) {
        const auto [t, j] = flat[k];
        const double numeric = central((*ps[t])[j], input);
        result.max_rel_error = std::max(result.max_rel_error, rel(analytic.params[t][j], numeric));
        ++result.checked;
    }
    Tensor x = input;
    for (std::size_t k : sample_indices(x.size(), std::max<std::size_t>(min_samples / 4, 1), rng)) {
        const double numeric = central(x[k], x);
        result.max_rel_error = std::max(result.max_rel_error, rel(analytic.input[k], numeric));
        ++result.checked;
    }
    return result;
}

// ---- checkpoints ---------------------------------------------------------

namespace {

void write_values(std::ostream& out, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << hex(v[i]);
    out << '\n';
}

void write_tensor(std::ostream& out, const Tensor& t) {
    out << "tensor " << t.rank();
    for (std::size_t d : t.shape()) out << ' ' << d;
    out << '\n';
    write_values(out, t.data());
}

void check_name(const std::string& name) {
    if (name.empty() || std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }))
        throw Error(ErrorCode::IoError, "checkpoint: invalid name '" + name + "'");
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw Error(ErrorCode::IoError, "checkpoint: unexpected end of input");
        return w;
    }
    void expect(const std::string& w) {
        const std::string got = word();
        if (got != w) throw Error(ErrorCode::IoError, "checkpoint: expected '" + w + "', found '" + got + "'");
    }
    std::size_t count() {
        const std::string w = word();
        char* end = nullptr;
        const unsigned long long v = std::strtoull(w.c_str(), &end, 10);
        if (w.empty() || *end != '\0' || w[0] == '-') throw Error(ErrorCode::IoError, "checkpoint: bad count '" + w + "'");
        return static_cast<std::size_t>(v);
    }
    double real() {
        const std::string w = word();
        char* end = nullptr;
        const double v = std::strtod(w.c_str(), &end);
        if (*end != '\0') throw Error(ErrorCode::IoError, "checkpoint: bad value '" + w + "'");
        return v;
    }
    Tensor tensor(const std::vector<std::size_t>& expected_shape) {
        expect("tensor");
        const std::size_t rank = count();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = count();
        if (shape != expected_shape)
            throw Error(ErrorCode::IoError, "checkpoint: tensor shape " + shape_str(shape) + ", layer expects " +
                                                shape_str(expected_shape));
        Tensor t(shape);
        for (double& v : t.values()) v = real();
        return t;
    }

private:
    std::istream& in_;
};

} // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out << "uavsec-checkpoint " << kCheckpointVersion << '\n';
    out << "seed " << ckpt.seed << '\n';
    for (const auto& [name, net] : ckpt.networks) {
        check_name(name);
        out << "network " << name << ' ' << net.num_layers() << '\n';
        for (std::size_t i = 0; i < net.num_layers(); ++i) {
            const Layer& l = net.layer(i);
            const auto cfg = l.config();
            out << "layer " << to_string(l.kind()) << ' ' << cfg.size();
            for (std::size_t c : cfg) out << ' ' << c;
            out << '\n';
        }
        for (const Tensor* t : net.params()) write_tensor(out, *t);
        for (const Tensor* t : net.buffers()) write_tensor(out, *t);
    }
    for (const auto& [name, v] : ckpt.vectors) {
        check_name(name);
        out << "vector " << name << ' ' << v.size() << '\n';
        write_values(out, v);
    }
    out << "end\n";
    if (!out) throw Error(ErrorCode::IoError, "checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
    Reader rd(in);
    rd.expect("uavsec-checkpoint");
    const std::size_t version = rd.count();
    if (version != static_cast<std::size_t>(kCheckpointVersion))
        throw Error(ErrorCode::IoError, "checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    rd.expect("seed");
    {
        const std::string w = rd.word();
        char* end = nullptr;
        ckpt.seed = std::strtoull(w.c_str(), &end, 10);
        if (*end != '\0') throw Error(ErrorCode::IoError, "checkpoint: bad seed");
    }
    for (;;) {
        const std::string tag = rd.word();
        if (tag == "end") break;
        if (tag == "network") {
            const std::string name = rd.word();
            const std::size_t layers = rd.count();
            Network net;
            for (std::size_t i = 0; i < layers; ++i) {
                rd.expect("layer");
                const LayerKind kind = layer_kind_from_string(rd.word());
                std::vector<std::size_t> cfg(rd.count());
                for (auto& c : cfg) c = rd.count();
                net.add(make_layer(kind, cfg));
            }
            for (Tensor* t : net.params()) *t = rd.tensor(t->shape());
            for (Tensor* t : net.buffers()) *t = rd.tensor(t->shape());
            net.touch();
            ckpt.networks.emplace(name, std::move(net));
        } else if (tag == "vector") {
            const std::string name = rd.word();
            std::vector<double> v(rd.count());
            for (double& x : v) x = rd.real();
            ckpt.vectors.emplace(name, std::move(v));
        } else {
            throw Error(ErrorCode::IoError, "checkpoint: unknown section '" + tag + "'");
        }
    }
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return read_checkpoint(in);
}

} // namespace uavsec::nn
