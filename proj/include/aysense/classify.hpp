// SPDX-License-Identifier: Apache-2.0
//
// Residual CNN built from scratch: tensors, convolution, batch norm, ELU,
// dropout, dense layers, softmax/cross-entropy backprop and Adam. Templated
// on the scalar type: double for gradient checking, float for training
// speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "aysense/common.hpp"

namespace aysense::classify {

struct NetworkSpec {
    int in_h = 59;
    int in_w = 400;
    int in_c = 1;
    std::vector<int> block_filters = {8, 16, 32, 64}; // 3x3 kernels, first conv stride 2
    int dense_units = 64;
    int n_classes = 4;
    double dropout_blocks = 0.5;
    double dropout_dense = 0.2;
};

struct TrainConfig {
    double lr = 1e-4;
    int epochs = 120;
    int batch = 16;
    std::uint64_t seed = 1;
    // optional early stop once training accuracy reaches this level (0 = off)
    double target_accuracy = 0.0;
};

struct LabeledDataset {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<double>> samples; // row-major rows x cols
    std::vector<int> labels;
    std::vector<std::string> label_names;
};

// Batch of channel-last feature maps.
template <typename T> struct Batch {
    int n = 0, h = 0, w = 0, c = 0;
    std::vector<T> v;

    void resize(int n_, int h_, int w_, int c_)
    {
        n = n_;
        h = h_;
        w = w_;
        c = c_;
        v.assign(static_cast<size_t>(n) * h * w * c, T(0));
    }
    T *at(int i, int y, int x) { return v.data() + ((static_cast<size_t>(i) * h + y) * w + x) * c; }
    const T *at(int i, int y, int x) const { return v.data() + ((static_cast<size_t>(i) * h + y) * w + x) * c; }
};

namespace detail {

inline int conv_out(int in, int stride) { return (in + stride - 1) / stride; }

// y += conv(x, w) with 3x3 or 1x1 kernel, zero same-padding.
// w layout: [ky][kx][ci][co].
template <typename T>
void conv_forward(const Batch<T> &x, Batch<T> &y, const T *w, const T *b, int k, int stride)
{
    const int kh = k / 2;
    for (int i = 0; i < x.n; ++i) {
        for (int oy = 0; oy < y.h; ++oy) {
            for (int ox = 0; ox < y.w; ++ox) {
                T *out = y.at(i, oy, ox);
                for (int co = 0; co < y.c; ++co)
                    out[co] = b[co];
                for (int ky = 0; ky < k; ++ky) {
                    int iy = oy * stride + ky - kh;
                    if (iy < 0 || iy >= x.h)
                        continue;
                    for (int kx = 0; kx < k; ++kx) {
                        int ix = ox * stride + kx - kh;
                        if (ix < 0 || ix >= x.w)
                            continue;
                        const T *in = x.at(i, iy, ix);
                        const T *wp = w + ((static_cast<size_t>(ky) * k + kx) * x.c) * y.c;
                        for (int ci = 0; ci < x.c; ++ci) {
                            T xv = in[ci];
                            const T *wrow = wp + static_cast<size_t>(ci) * y.c;
                            for (int co = 0; co < y.c; ++co)
                                out[co] += xv * wrow[co];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv_backward(const Batch<T> &x, const Batch<T> &dy, Batch<T> &dx, const T *w, T *dw, T *db, int k,
                   int stride)
{
    const int kh = k / 2;
    dx.resize(x.n, x.h, x.w, x.c);
    for (int i = 0; i < x.n; ++i) {
        for (int oy = 0; oy < dy.h; ++oy) {
            for (int ox = 0; ox < dy.w; ++ox) {
                const T *g = dy.at(i, oy, ox);
                for (int co = 0; co < dy.c; ++co)
                    db[co] += g[co];
                for (int ky = 0; ky < k; ++ky) {
                    int iy = oy * stride + ky - kh;
                    if (iy < 0 || iy >= x.h)
                        continue;
                    for (int kx = 0; kx < k; ++kx) {
                        int ix = ox * stride + kx - kh;
                        if (ix < 0 || ix >= x.w)
                            continue;
                        const T *in = x.at(i, iy, ix);
                        T *dxp = dx.at(i, iy, ix);
                        size_t woff = (static_cast<size_t>(ky) * k + kx) * x.c * dy.c;
                        for (int ci = 0; ci < x.c; ++ci) {
                            const T *wrow = w + woff + static_cast<size_t>(ci) * dy.c;
                            T *dwrow = dw + woff + static_cast<size_t>(ci) * dy.c;
                            T xv = in[ci];
                            T acc = 0;
                            for (int co = 0; co < dy.c; ++co) {
                                dwrow[co] += xv * g[co];
                                acc += wrow[co] * g[co];
                            }
                            dxp[ci] += acc;
                        }
                    }
                }
            }
        }
    }
}

template <typename T> inline T elu(T x) { return x > 0 ? x : std::expm1(x); }
template <typename T> inline T elu_grad(T x, T fx) { return x > 0 ? T(1) : fx + T(1); }

} // namespace detail

// One parameter tensor inside the flat parameter vector.
struct ParamSlot {
    std::string name;
    size_t offset = 0;
    size_t count = 0;
};

template <typename T> class Network {
  public:
    explicit Network(NetworkSpec spec, std::uint64_t seed = 1) : spec_(std::move(spec)), rng_(mix64(seed ^ 0xa7c15ULL))
    {
        build();
        init_params(seed);
    }

    const NetworkSpec &spec() const { return spec_; }
    std::vector<T> &params() { return params_; }
    const std::vector<T> &params() const { return params_; }
    std::vector<T> &grads() { return grads_; }
    const std::vector<ParamSlot> &slots() const { return slots_; }

    struct Mode {
        bool batch_stats = false; // batch norm from the batch vs running stats
        bool dropout = false;
        bool update_running = false;
    };
    static Mode train_mode() { return {true, true, true}; }
    static Mode eval_mode() { return {false, false, false}; }
    static Mode frozen_mode() { return {false, false, false}; } // for gradient checks

    // Softmax probabilities, n x n_classes row-major.
    std::vector<T> forward(const Batch<T> &input, Mode mode);

    // Mean cross-entropy over the batch; fills grads() via backprop. The
    // dropout masks of the preceding forward are reused, so one call does
    // forward + backward consistently.
    T loss_and_grads(const Batch<T> &input, const std::vector<int> &labels, Mode mode);

    std::pair<int, double> predict(const std::vector<double> &values, int rows, int cols);

    // Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8.
    void adam_step(double lr);

    void save(const std::string &path) const;
    static Network<T> load(const std::string &path);

    // Training loop: seeded shuffling, per-epoch mean loss history. Throws
    // on a non-finite loss.
    std::vector<double> train(const LabeledDataset &ds, const TrainConfig &cfg);

    double accuracy(const LabeledDataset &ds);

    // batch-normalized activations of the last forward, for tests
    const std::vector<T> &running_stats() const { return running_; }
    std::vector<T> &running_stats() { return running_; }
    const Batch<T> &last_block_output() const { return blocks_.back().out; }

  private:
    struct BnCache {
        std::vector<T> xhat;
        std::vector<T> inv_std; // per channel
        std::vector<T> mean;
        int count = 0;
    };
    struct BlockCache {
        Batch<T> x, a1, e1, n1, a2, e2, n2, sc, z, e3, out;
        BnCache bn1, bn2, bn3;
    };

    NetworkSpec spec_;
    std::vector<ParamSlot> slots_;
    std::vector<T> params_, grads_;
    std::vector<T> adam_m_, adam_v_;
    long adam_t_ = 0;
    std::vector<T> running_; // [bn index] -> mean[c], var[c] pairs, flattened
    std::vector<size_t> running_off_;
    std::vector<int> bn_channels_;
    std::mt19937_64 rng_;

    // caches from the last forward
    std::vector<BlockCache> blocks_;
    std::vector<T> gap_, drop0_, d1_, e_d1_, drop1_, logits_, probs_;
    std::vector<T> mask0_, mask1_;
    Batch<T> input_cache_;

    size_t add_slot(const std::string &name, size_t count)
    {
        size_t off = params_.size();
        slots_.push_back({name, off, count});
        params_.resize(off + count, T(0));
        return off;
    }
    size_t add_bn(int channels)
    {
        running_off_.push_back(running_.size());
        bn_channels_.push_back(channels);
        for (int c = 0; c < channels; ++c)
            running_.push_back(T(0)); // mean
        for (int c = 0; c < channels; ++c)
            running_.push_back(T(1)); // var
        return running_off_.size() - 1;
    }

    struct BlockParams {
        size_t w1, b1, g1, be1, w2, b2, g2, be2, wsc, bsc, g3, be3;
        size_t bn1, bn2, bn3; // running stat indices
        int cin, cout;
    };
    std::vector<BlockParams> bp_;
    size_t dense1_w_ = 0, dense1_b_ = 0, dense2_w_ = 0, dense2_b_ = 0;
    int feat_ = 0; // GAP feature count

    void build();
    void init_params(std::uint64_t seed);

    void bn_forward(const Batch<T> &x, Batch<T> &y, size_t g_off, size_t b_off, size_t bn_idx, Mode mode,
                    BnCache &cache);
    void bn_backward(const Batch<T> &dy, Batch<T> &dx, size_t g_off, size_t b_off, const BnCache &cache,
                     bool batch_stats, size_t bn_idx);
};

// ---------------------------------------------------------------------------

template <typename T> void Network<T>::build()
{
    int h = spec_.in_h, w = spec_.in_w, cin = spec_.in_c;
    for (size_t b = 0; b < spec_.block_filters.size(); ++b) {
        int cout = spec_.block_filters[b];
        BlockParams p{};
        p.cin = cin;
        p.cout = cout;
        p.w1 = add_slot("block" + std::to_string(b) + ".conv1.w", 9ULL * cin * cout);
        p.b1 = add_slot("block" + std::to_string(b) + ".conv1.b", static_cast<size_t>(cout));
        p.g1 = add_slot("block" + std::to_string(b) + ".bn1.gamma", static_cast<size_t>(cout));
        p.be1 = add_slot("block" + std::to_string(b) + ".bn1.beta", static_cast<size_t>(cout));
        p.w2 = add_slot("block" + std::to_string(b) + ".conv2.w", 9ULL * cout * cout);
        p.b2 = add_slot("block" + std::to_string(b) + ".conv2.b", static_cast<size_t>(cout));
        p.g2 = add_slot("block" + std::to_string(b) + ".bn2.gamma", static_cast<size_t>(cout));
        p.be2 = add_slot("block" + std::to_string(b) + ".bn2.beta", static_cast<size_t>(cout));
        p.wsc = add_slot("block" + std::to_string(b) + ".shortcut.w", 1ULL * cin * cout);
        p.bsc = add_slot("block" + std::to_string(b) + ".shortcut.b", static_cast<size_t>(cout));
        p.g3 = add_slot("block" + std::to_string(b) + ".bn3.gamma", static_cast<size_t>(cout));
        p.be3 = add_slot("block" + std::to_string(b) + ".bn3.beta", static_cast<size_t>(cout));
        p.bn1 = add_bn(cout);
        p.bn2 = add_bn(cout);
        p.bn3 = add_bn(cout);
        bp_.push_back(p);
        h = detail::conv_out(h, 2);
        w = detail::conv_out(w, 2);
        cin = cout;
    }
    feat_ = cin;
    dense1_w_ = add_slot("dense1.w", static_cast<size_t>(feat_) * spec_.dense_units);
    dense1_b_ = add_slot("dense1.b", static_cast<size_t>(spec_.dense_units));
    dense2_w_ = add_slot("dense2.w", static_cast<size_t>(spec_.dense_units) * spec_.n_classes);
    dense2_b_ = add_slot("dense2.b", static_cast<size_t>(spec_.n_classes));
    grads_.assign(params_.size(), T(0));
    adam_m_.assign(params_.size(), T(0));
    adam_v_.assign(params_.size(), T(0));
    blocks_.resize(bp_.size());
}

template <typename T> void Network<T>::init_params(std::uint64_t seed)
{
    std::mt19937_64 rng(mix64(seed));
    auto he = [&](size_t off, size_t count, double fan_in) {
        std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / fan_in));
        for (size_t i = 0; i < count; ++i)
            params_[off + i] = static_cast<T>(nd(rng));
    };
    for (size_t b = 0; b < bp_.size(); ++b) {
        const auto &p = bp_[b];
        he(p.w1, 9ULL * p.cin * p.cout, 9.0 * p.cin);
        he(p.w2, 9ULL * p.cout * p.cout, 9.0 * p.cout);
        he(p.wsc, 1ULL * p.cin * p.cout, 1.0 * p.cin);
        std::fill_n(params_.begin() + static_cast<long>(p.g1), p.cout, T(1));
        std::fill_n(params_.begin() + static_cast<long>(p.g2), p.cout, T(1));
        std::fill_n(params_.begin() + static_cast<long>(p.g3), p.cout, T(1));
    }
    he(dense1_w_, static_cast<size_t>(feat_) * spec_.dense_units, feat_);
    he(dense2_w_, static_cast<size_t>(spec_.dense_units) * spec_.n_classes, spec_.dense_units);
}

template <typename T>
void Network<T>::bn_forward(const Batch<T> &x, Batch<T> &y, size_t g_off, size_t b_off, size_t bn_idx,
                            Mode mode, BnCache &cache)
{
    constexpr T eps = T(1e-5);
    const int c = x.c;
    const long count = static_cast<long>(x.n) * x.h * x.w;
    y.resize(x.n, x.h, x.w, c);
    cache.mean.assign(static_cast<size_t>(c), T(0));
    cache.inv_std.assign(static_cast<size_t>(c), T(0));
    cache.count = static_cast<int>(count);

    T *rm = running_.data() + running_off_[bn_idx];
    T *rv = rm + c;

    std::vector<T> mean(static_cast<size_t>(c), T(0)), var(static_cast<size_t>(c), T(0));
    if (mode.batch_stats) {
        for (long i = 0; i < count; ++i) {
            const T *p = x.v.data() + static_cast<size_t>(i) * c;
            for (int ch = 0; ch < c; ++ch)
                mean[static_cast<size_t>(ch)] += p[ch];
        }
        for (int ch = 0; ch < c; ++ch)
            mean[static_cast<size_t>(ch)] /= static_cast<T>(count);
        for (long i = 0; i < count; ++i) {
            const T *p = x.v.data() + static_cast<size_t>(i) * c;
            for (int ch = 0; ch < c; ++ch) {
                T d = p[ch] - mean[static_cast<size_t>(ch)];
                var[static_cast<size_t>(ch)] += d * d;
            }
        }
        for (int ch = 0; ch < c; ++ch)
            var[static_cast<size_t>(ch)] /= static_cast<T>(count);
        if (mode.update_running) {
            for (int ch = 0; ch < c; ++ch) {
                rm[ch] = T(0.9) * rm[ch] + T(0.1) * mean[static_cast<size_t>(ch)];
                rv[ch] = T(0.9) * rv[ch] + T(0.1) * var[static_cast<size_t>(ch)];
            }
        }
    } else {
        for (int ch = 0; ch < c; ++ch) {
            mean[static_cast<size_t>(ch)] = rm[ch];
            var[static_cast<size_t>(ch)] = rv[ch];
        }
    }
    for (int ch = 0; ch < c; ++ch) {
        cache.mean[static_cast<size_t>(ch)] = mean[static_cast<size_t>(ch)];
        cache.inv_std[static_cast<size_t>(ch)] = T(1) / std::sqrt(var[static_cast<size_t>(ch)] + eps);
    }

    cache.xhat.resize(x.v.size());
    const T *g = params_.data() + g_off;
    const T *be = params_.data() + b_off;
    for (long i = 0; i < count; ++i) {
        const T *p = x.v.data() + static_cast<size_t>(i) * c;
        T *q = y.v.data() + static_cast<size_t>(i) * c;
        T *xh = cache.xhat.data() + static_cast<size_t>(i) * c;
        for (int ch = 0; ch < c; ++ch) {
            xh[ch] = (p[ch] - cache.mean[static_cast<size_t>(ch)]) * cache.inv_std[static_cast<size_t>(ch)];
            q[ch] = g[ch] * xh[ch] + be[ch];
        }
    }
}

template <typename T>
void Network<T>::bn_backward(const Batch<T> &dy, Batch<T> &dx, size_t g_off, size_t b_off, const BnCache &cache,
                             bool batch_stats, size_t)
{
    const int c = dy.c;
    const long count = static_cast<long>(dy.n) * dy.h * dy.w;
    dx.resize(dy.n, dy.h, dy.w, c);
    const T *g = params_.data() + g_off;
    T *dg = grads_.data() + g_off;
    T *db = grads_.data() + b_off;

    std::vector<T> sum_dy(static_cast<size_t>(c), T(0)), sum_dy_xhat(static_cast<size_t>(c), T(0));
    for (long i = 0; i < count; ++i) {
        const T *gy = dy.v.data() + static_cast<size_t>(i) * c;
        const T *xh = cache.xhat.data() + static_cast<size_t>(i) * c;
        for (int ch = 0; ch < c; ++ch) {
            sum_dy[static_cast<size_t>(ch)] += gy[ch];
            sum_dy_xhat[static_cast<size_t>(ch)] += gy[ch] * xh[ch];
        }
    }
    for (int ch = 0; ch < c; ++ch) {
        dg[ch] += sum_dy_xhat[static_cast<size_t>(ch)];
        db[ch] += sum_dy[static_cast<size_t>(ch)];
    }
    const T inv_n = T(1) / static_cast<T>(count);
    for (long i = 0; i < count; ++i) {
        const T *gy = dy.v.data() + static_cast<size_t>(i) * c;
        const T *xh = cache.xhat.data() + static_cast<size_t>(i) * c;
        T *gx = dx.v.data() + static_cast<size_t>(i) * c;
        for (int ch = 0; ch < c; ++ch) {
            if (batch_stats) {
                gx[ch] = g[ch] * cache.inv_std[static_cast<size_t>(ch)] *
                         (gy[ch] - inv_n * sum_dy[static_cast<size_t>(ch)] -
                          inv_n * xh[ch] * sum_dy_xhat[static_cast<size_t>(ch)]);
            } else {
                gx[ch] = g[ch] * cache.inv_std[static_cast<size_t>(ch)] * gy[ch];
            }
        }
    }
}

template <typename T> std::vector<T> Network<T>::forward(const Batch<T> &input, Mode mode)
{
    if (input.h != spec_.in_h || input.w != spec_.in_w || input.c != spec_.in_c)
        throw std::invalid_argument("Network::forward: input shape mismatch");
    input_cache_ = input;
    const Batch<T> *cur = &input_cache_;

    for (size_t b = 0; b < bp_.size(); ++b) {
        const auto &p = bp_[b];
        BlockCache &bc = blocks_[b];
        bc.x = *cur;
        int oh = detail::conv_out(cur->h, 2), ow = detail::conv_out(cur->w, 2);

        bc.a1.resize(cur->n, oh, ow, p.cout);
        detail::conv_forward(bc.x, bc.a1, params_.data() + p.w1, params_.data() + p.b1, 3, 2);
        bc.e1.resize(cur->n, oh, ow, p.cout);
        for (size_t i = 0; i < bc.a1.v.size(); ++i)
            bc.e1.v[i] = detail::elu(bc.a1.v[i]);
        bn_forward(bc.e1, bc.n1, p.g1, p.be1, p.bn1, mode, bc.bn1);

        bc.a2.resize(cur->n, oh, ow, p.cout);
        detail::conv_forward(bc.n1, bc.a2, params_.data() + p.w2, params_.data() + p.b2, 3, 1);
        bc.e2.resize(cur->n, oh, ow, p.cout);
        for (size_t i = 0; i < bc.a2.v.size(); ++i)
            bc.e2.v[i] = detail::elu(bc.a2.v[i]);
        bn_forward(bc.e2, bc.n2, p.g2, p.be2, p.bn2, mode, bc.bn2);

        bc.sc.resize(cur->n, oh, ow, p.cout);
        detail::conv_forward(bc.x, bc.sc, params_.data() + p.wsc, params_.data() + p.bsc, 1, 2);

        bc.z.resize(cur->n, oh, ow, p.cout);
        for (size_t i = 0; i < bc.z.v.size(); ++i)
            bc.z.v[i] = bc.n2.v[i] + bc.sc.v[i];
        bc.e3.resize(cur->n, oh, ow, p.cout);
        for (size_t i = 0; i < bc.z.v.size(); ++i)
            bc.e3.v[i] = detail::elu(bc.z.v[i]);
        bn_forward(bc.e3, bc.out, p.g3, p.be3, p.bn3, mode, bc.bn3);
        cur = &bc.out;
    }

    // global average pooling
    const Batch<T> &last = *cur;
    const int n = last.n;
    gap_.assign(static_cast<size_t>(n) * feat_, T(0));
    const long hw = static_cast<long>(last.h) * last.w;
    for (int i = 0; i < n; ++i) {
        for (long px = 0; px < hw; ++px) {
            const T *p = last.v.data() + (static_cast<size_t>(i) * hw + static_cast<size_t>(px)) * feat_;
            for (int ch = 0; ch < feat_; ++ch)
                gap_[static_cast<size_t>(i) * feat_ + ch] += p[ch];
        }
        for (int ch = 0; ch < feat_; ++ch)
            gap_[static_cast<size_t>(i) * feat_ + ch] /= static_cast<T>(hw);
    }

    auto dropout = [&](const std::vector<T> &in, std::vector<T> &mask, double rate) {
        std::vector<T> out(in.size());
        mask.assign(in.size(), T(1));
        if (mode.dropout && rate > 0.0) {
            std::uniform_real_distribution<double> ud(0.0, 1.0);
            const T scale = static_cast<T>(1.0 / (1.0 - rate));
            for (size_t i = 0; i < in.size(); ++i)
                mask[i] = ud(rng_) < rate ? T(0) : scale;
        }
        for (size_t i = 0; i < in.size(); ++i)
            out[i] = in[i] * mask[i];
        return out;
    };

    drop0_ = dropout(gap_, mask0_, spec_.dropout_blocks);

    // dense1 + ELU
    d1_.assign(static_cast<size_t>(n) * spec_.dense_units, T(0));
    const T *w1 = params_.data() + dense1_w_;
    const T *b1 = params_.data() + dense1_b_;
    for (int i = 0; i < n; ++i) {
        for (int u = 0; u < spec_.dense_units; ++u) {
            T acc = b1[u];
            for (int f = 0; f < feat_; ++f)
                acc += drop0_[static_cast<size_t>(i) * feat_ + f] * w1[static_cast<size_t>(f) * spec_.dense_units + u];
            d1_[static_cast<size_t>(i) * spec_.dense_units + u] = acc;
        }
    }
    e_d1_.resize(d1_.size());
    for (size_t i = 0; i < d1_.size(); ++i)
        e_d1_[i] = detail::elu(d1_[i]);

    drop1_ = dropout(e_d1_, mask1_, spec_.dropout_dense);

    // dense2 + softmax
    const int nc = spec_.n_classes;
    logits_.assign(static_cast<size_t>(n) * nc, T(0));
    const T *w2 = params_.data() + dense2_w_;
    const T *b2 = params_.data() + dense2_b_;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < nc; ++j) {
            T acc = b2[j];
            for (int u = 0; u < spec_.dense_units; ++u)
                acc += drop1_[static_cast<size_t>(i) * spec_.dense_units + u] * w2[static_cast<size_t>(u) * nc + j];
            logits_[static_cast<size_t>(i) * nc + j] = acc;
        }
    }
    probs_.resize(logits_.size());
    for (int i = 0; i < n; ++i) {
        const T *lg = logits_.data() + static_cast<size_t>(i) * nc;
        T *pr = probs_.data() + static_cast<size_t>(i) * nc;
        T mx = lg[0];
        for (int j = 1; j < nc; ++j)
            mx = std::max(mx, lg[j]);
        T sum = T(0);
        for (int j = 0; j < nc; ++j) {
            pr[j] = std::exp(lg[j] - mx);
            sum += pr[j];
        }
        for (int j = 0; j < nc; ++j)
            pr[j] /= sum;
    }
    return probs_;
}

template <typename T>
T Network<T>::loss_and_grads(const Batch<T> &input, const std::vector<int> &labels, Mode mode)
{
    if (labels.empty() || static_cast<int>(labels.size()) != input.n)
        throw std::invalid_argument("loss_and_grads: batch/label size mismatch");
    for (int l : labels)
        if (l < 0 || l >= spec_.n_classes)
            throw std::invalid_argument("loss_and_grads: label out of range");

    forward(input, mode);
    std::fill(grads_.begin(), grads_.end(), T(0));

    const int n = input.n;
    const int nc = spec_.n_classes;
    T loss = T(0);
    std::vector<T> dlogits(static_cast<size_t>(n) * nc);
    for (int i = 0; i < n; ++i) {
        const T *pr = probs_.data() + static_cast<size_t>(i) * nc;
        loss -= std::log(std::max(pr[labels[static_cast<size_t>(i)]], T(1e-30)));
        for (int j = 0; j < nc; ++j)
            dlogits[static_cast<size_t>(i) * nc + j] =
                (pr[j] - (j == labels[static_cast<size_t>(i)] ? T(1) : T(0))) / static_cast<T>(n);
    }
    loss /= static_cast<T>(n);

    // dense2 backward
    const T *w2 = params_.data() + dense2_w_;
    T *dw2 = grads_.data() + dense2_w_;
    T *db2 = grads_.data() + dense2_b_;
    std::vector<T> ddrop1(drop1_.size(), T(0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < nc; ++j) {
            T g = dlogits[static_cast<size_t>(i) * nc + j];
            db2[j] += g;
            for (int u = 0; u < spec_.dense_units; ++u) {
                dw2[static_cast<size_t>(u) * nc + j] += drop1_[static_cast<size_t>(i) * spec_.dense_units + u] * g;
                ddrop1[static_cast<size_t>(i) * spec_.dense_units + u] += w2[static_cast<size_t>(u) * nc + j] * g;
            }
        }
    }
    // dropout1 + ELU backward
    std::vector<T> dd1(d1_.size());
    for (size_t i = 0; i < dd1.size(); ++i)
        dd1[i] = ddrop1[i] * mask1_[i] * detail::elu_grad(d1_[i], e_d1_[i]);

    // dense1 backward
    const T *w1 = params_.data() + dense1_w_;
    T *dw1 = grads_.data() + dense1_w_;
    T *db1 = grads_.data() + dense1_b_;
    std::vector<T> ddrop0(drop0_.size(), T(0));
    for (int i = 0; i < n; ++i) {
        for (int u = 0; u < spec_.dense_units; ++u) {
            T g = dd1[static_cast<size_t>(i) * spec_.dense_units + u];
            db1[u] += g;
            for (int f = 0; f < feat_; ++f) {
                dw1[static_cast<size_t>(f) * spec_.dense_units + u] += drop0_[static_cast<size_t>(i) * feat_ + f] * g;
                ddrop0[static_cast<size_t>(i) * feat_ + f] += w1[static_cast<size_t>(f) * spec_.dense_units + u] * g;
            }
        }
    }
    std::vector<T> dgap(gap_.size());
    for (size_t i = 0; i < dgap.size(); ++i)
        dgap[i] = ddrop0[i] * mask0_[i];

    // un-pool
    const Batch<T> &last_out = blocks_.back().out;
    Batch<T> dcur;
    dcur.resize(last_out.n, last_out.h, last_out.w, last_out.c);
    const long hw = static_cast<long>(last_out.h) * last_out.w;
    const T inv_hw = T(1) / static_cast<T>(hw);
    for (int i = 0; i < n; ++i)
        for (long px = 0; px < hw; ++px) {
            T *p = dcur.v.data() + (static_cast<size_t>(i) * hw + static_cast<size_t>(px)) * feat_;
            for (int ch = 0; ch < feat_; ++ch)
                p[ch] = dgap[static_cast<size_t>(i) * feat_ + ch] * inv_hw;
        }

    // residual blocks, reverse order
    for (size_t b = bp_.size(); b-- > 0;) {
        const auto &p = bp_[b];
        BlockCache &bc = blocks_[b];

        Batch<T> de3;
        bn_backward(dcur, de3, p.g3, p.be3, bc.bn3, mode.batch_stats, p.bn3);
        Batch<T> dz;
        dz.resize(de3.n, de3.h, de3.w, de3.c);
        for (size_t i = 0; i < dz.v.size(); ++i)
            dz.v[i] = de3.v[i] * detail::elu_grad(bc.z.v[i], bc.e3.v[i]);

        // shortcut path
        Batch<T> dx_sc;
        detail::conv_backward(bc.x, dz, dx_sc, params_.data() + p.wsc, grads_.data() + p.wsc,
                              grads_.data() + p.bsc, 1, 2);

        // main path
        Batch<T> de2;
        bn_backward(dz, de2, p.g2, p.be2, bc.bn2, mode.batch_stats, p.bn2);
        Batch<T> da2;
        da2.resize(de2.n, de2.h, de2.w, de2.c);
        for (size_t i = 0; i < da2.v.size(); ++i)
            da2.v[i] = de2.v[i] * detail::elu_grad(bc.a2.v[i], bc.e2.v[i]);
        Batch<T> dn1;
        detail::conv_backward(bc.n1, da2, dn1, params_.data() + p.w2, grads_.data() + p.w2,
                              grads_.data() + p.b2, 3, 1);
        Batch<T> de1;
        bn_backward(dn1, de1, p.g1, p.be1, bc.bn1, mode.batch_stats, p.bn1);
        Batch<T> da1;
        da1.resize(de1.n, de1.h, de1.w, de1.c);
        for (size_t i = 0; i < da1.v.size(); ++i)
            da1.v[i] = de1.v[i] * detail::elu_grad(bc.a1.v[i], bc.e1.v[i]);
        Batch<T> dx_main;
        detail::conv_backward(bc.x, da1, dx_main, params_.data() + p.w1, grads_.data() + p.w1,
                              grads_.data() + p.b1, 3, 2);

        dcur.resize(bc.x.n, bc.x.h, bc.x.w, bc.x.c);
        for (size_t i = 0; i < dcur.v.size(); ++i)
            dcur.v[i] = dx_main.v[i] + dx_sc.v[i];
    }
    return loss;
}

template <typename T> std::pair<int, double> Network<T>::predict(const std::vector<double> &values, int rows, int cols)
{
    if (rows != spec_.in_h || cols != spec_.in_w)
        throw std::invalid_argument("predict: shape mismatch");
    Batch<T> in;
    in.resize(1, rows, cols, 1);
    for (size_t i = 0; i < values.size(); ++i)
        in.v[i] = static_cast<T>(values[i]);
    auto pr = forward(in, eval_mode());
    int best = 0;
    for (int j = 1; j < spec_.n_classes; ++j)
        if (pr[static_cast<size_t>(j)] > pr[static_cast<size_t>(best)])
            best = j;
    return {best, static_cast<double>(pr[static_cast<size_t>(best)])};
}

template <typename T> void Network<T>::adam_step(double lr)
{
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++adam_t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        double g = static_cast<double>(grads_[i]);
        double m = b1 * static_cast<double>(adam_m_[i]) + (1.0 - b1) * g;
        double v = b2 * static_cast<double>(adam_v_[i]) + (1.0 - b2) * g * g;
        adam_m_[i] = static_cast<T>(m);
        adam_v_[i] = static_cast<T>(v);
        params_[i] -= static_cast<T>(lr * (m / c1) / (std::sqrt(v / c2) + eps));
    }
}

template <typename T> std::vector<double> Network<T>::train(const LabeledDataset &ds, const TrainConfig &cfg)
{
    if (ds.samples.empty())
        throw std::invalid_argument("train: empty dataset");
    if (cfg.lr < 0.0)
        throw std::invalid_argument("train: negative learning rate");

    const int n = static_cast<int>(ds.samples.size());
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        order[static_cast<size_t>(i)] = i;

    std::vector<double> history;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto erng = make_rng(cfg.seed, 0x65706f63ULL, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), erng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (int s = 0; s < n; s += cfg.batch) {
            const int bs = std::min(cfg.batch, n - s);
            Batch<T> in;
            in.resize(bs, ds.rows, ds.cols, 1);
            std::vector<int> labels(static_cast<size_t>(bs));
            for (int i = 0; i < bs; ++i) {
                const auto &sample = ds.samples[static_cast<size_t>(order[static_cast<size_t>(s + i)])];
                for (size_t j = 0; j < sample.size(); ++j)
                    in.v[static_cast<size_t>(i) * sample.size() + j] = static_cast<T>(sample[j]);
                labels[static_cast<size_t>(i)] = ds.labels[static_cast<size_t>(order[static_cast<size_t>(s + i)])];
            }
            T loss = loss_and_grads(in, labels, train_mode());
            if (!std::isfinite(static_cast<double>(loss)))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
            if (cfg.lr > 0.0)
                adam_step(cfg.lr);
            epoch_loss += static_cast<double>(loss);
            ++batches;
        }
        history.push_back(epoch_loss / std::max(batches, 1));
        if (cfg.target_accuracy > 0.0 && accuracy(ds) >= cfg.target_accuracy)
            break;
    }
    return history;
}

template <typename T> double Network<T>::accuracy(const LabeledDataset &ds)
{
    int ok = 0;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        auto [label, conf] = predict(ds.samples[i], ds.rows, ds.cols);
        (void)conf;
        if (label == ds.labels[i])
            ++ok;
    }
    return ds.samples.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(ds.samples.size());
}

// Checkpoint: magic "AYNET1", u32 shape/arch descriptor, u64 parameter
// count, parameters as little-endian f64 in declaration order, then the
// batch-norm running statistics.
template <typename T> void Network<T>::save(const std::string &path) const
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open checkpoint for writing: " + path);
    f.write("AYNET1", 6);
    auto w32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char *>(&v), 4); };
    auto w64 = [&](std::uint64_t v) { f.write(reinterpret_cast<const char *>(&v), 8); };
    w32(static_cast<std::uint32_t>(spec_.in_h));
    w32(static_cast<std::uint32_t>(spec_.in_w));
    w32(static_cast<std::uint32_t>(spec_.in_c));
    w32(static_cast<std::uint32_t>(spec_.block_filters.size()));
    for (int bf : spec_.block_filters)
        w32(static_cast<std::uint32_t>(bf));
    w32(static_cast<std::uint32_t>(spec_.dense_units));
    w32(static_cast<std::uint32_t>(spec_.n_classes));
    w64(params_.size());
    for (T p : params_) {
        double d = static_cast<double>(p);
        f.write(reinterpret_cast<const char *>(&d), 8);
    }
    w64(running_.size());
    for (T p : running_) {
        double d = static_cast<double>(p);
        f.write(reinterpret_cast<const char *>(&d), 8);
    }
}

template <typename T> Network<T> Network<T>::load(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[6];
    f.read(magic, 6);
    if (f.gcount() != 6 || std::string(magic, 6) != "AYNET1")
        throw std::runtime_error("bad checkpoint magic: " + path);
    auto r32 = [&]() {
        std::uint32_t v = 0;
        f.read(reinterpret_cast<char *>(&v), 4);
        return v;
    };
    auto r64 = [&]() {
        std::uint64_t v = 0;
        f.read(reinterpret_cast<char *>(&v), 8);
        return v;
    };
    NetworkSpec spec;
    spec.in_h = static_cast<int>(r32());
    spec.in_w = static_cast<int>(r32());
    spec.in_c = static_cast<int>(r32());
    std::uint32_t nb = r32();
    spec.block_filters.clear();
    for (std::uint32_t i = 0; i < nb; ++i)
        spec.block_filters.push_back(static_cast<int>(r32()));
    spec.dense_units = static_cast<int>(r32());
    spec.n_classes = static_cast<int>(r32());
    Network<T> net(spec, 0);
    std::uint64_t np = r64();
    if (np != net.params_.size())
        throw std::runtime_error("checkpoint parameter count mismatch");
    for (auto &p : net.params_) {
        double d;
        f.read(reinterpret_cast<char *>(&d), 8);
        p = static_cast<T>(d);
    }
    std::uint64_t nr = r64();
    if (nr != net.running_.size())
        throw std::runtime_error("checkpoint running-stat count mismatch");
    for (auto &p : net.running_) {
        double d;
        f.read(reinterpret_cast<char *>(&d), 8);
        p = static_cast<T>(d);
    }
    if (!f)
        throw std::runtime_error("truncated checkpoint: " + path);
    return net;
}

// Dataset manifest: one "<csv path>,<label index>" line per sample, with
// optional "label: <index> <name>" header lines. Implemented in dataset.cpp.
LabeledDataset load_manifest(const std::string &path);
void save_spectrogram_csv(const std::string &path, const std::vector<double> &values, int rows, int cols,
                          const std::vector<double> &velocity_axis);
std::vector<std::vector<double>> load_csv_matrix(const std::string &path, int &rows, int &cols);

} // namespace aysense::classify
