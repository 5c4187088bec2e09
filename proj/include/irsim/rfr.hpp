#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "irsim/rng.hpp"

namespace irsim::rfr {

// Dense CHW feature tensor (double precision reference kernels).
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int c, int h, int w)
        : channels(c), height(h), width(w), data(static_cast<size_t>(c) * h * w, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    bool same_shape(const FeatureMap& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

// Convolution kernel weights, Cout x Cin x kh x kw.
struct Tensor4 {
    int co = 0, ci = 0, kh = 0, kw = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int o, int i, int h, int w)
        : co(o), ci(i), kh(h), kw(w), data(static_cast<size_t>(o) * i * h * w, 0.0) {}
    double& at(int o, int i, int y, int x) {
        return data[((static_cast<size_t>(o) * ci + i) * kh + y) * kw + x];
    }
    double at(int o, int i, int y, int x) const {
        return data[((static_cast<size_t>(o) * ci + i) * kh + y) * kw + x];
    }
};

// Plain convolution, zero padding, arbitrary stride (same-padding at stride 1).
FeatureMap conv2d(const FeatureMap& f, const Tensor4& w,
                  const std::vector<double>& bias = {}, int stride = 1);

// Gradient of conv2d output w.r.t. its input.
FeatureMap conv2d_vjp_input(const Tensor4& w, const FeatureMap& grad_out,
                            int in_h, int in_w, int stride = 1);

// Modulated deformable convolution parameters. Offsets hold interleaved
// (dy, dx) pairs per tap (2*N channels, N = kh*kw); modulation holds N
// channels expected in [0,1].
struct DeformParams {
    Tensor4 weights;
    FeatureMap offsets;
    FeatureMap modulation;
};

// f_a(p0) = sum_n w(p_n) * f(p0 + p_n + dp_n) * dm_n, bilinear sampling,
// zero contribution outside bounds.
FeatureMap deform_conv(const FeatureMap& f, const DeformParams& p);

struct DeformConvGrads {
    FeatureMap d_input;
    FeatureMap d_offsets;
    FeatureMap d_modulation;
};
DeformConvGrads deform_conv_vjp(const FeatureMap& f, const DeformParams& p,
                                const FeatureMap& grad_out);

// ---- Temporal / spatial / frequency modulation ----

struct TemporalWeights {
    Tensor4 embed_prev; // 1x1, C -> C
    Tensor4 embed_cur;  // 1x1, C -> C
    Tensor4 fuse;       // 3x3, 2C -> C
    std::vector<double> fuse_bias;
};

// Per-pixel channel inner product of the two embeddings, sigmoid-activated.
FeatureMap temporal_attention(const FeatureMap& f_aligned, const FeatureMap& g_cur,
                              const TemporalWeights& w);
FeatureMap temporal_modulation(const FeatureMap& f_aligned, const FeatureMap& g_cur,
                               const TemporalWeights& w);
std::pair<FeatureMap, FeatureMap> temporal_modulation_vjp(const FeatureMap& f_aligned,
                                                          const FeatureMap& g_cur,
                                                          const TemporalWeights& w,
                                                          const FeatureMap& grad_out);

struct SpatialWeights {
    Tensor4 conv; // 1 out, 2 in (channel max, channel mean), k x k
    std::vector<double> bias;
};
FeatureMap spatial_attention(const FeatureMap& f, const SpatialWeights& w); // 1 x H x W
FeatureMap spatial_modulation(const FeatureMap& f, const SpatialWeights& w);
FeatureMap spatial_modulation_vjp(const FeatureMap& f, const SpatialWeights& w,
                                  const FeatureMap& grad_out);

// 2D DCT-II component basis per channel group: B(h,w) =
// cos(pi*u*(h+0.5)/H) * cos(pi*v*(w+0.5)/W).
struct DctBasis {
    int height = 0;
    int width = 0;
    std::vector<std::pair<int, int>> uv; // (u,v) per group

    int groups() const { return static_cast<int>(uv.size()); }
    double value(int g, int h, int w) const;
};

// Lowest n components in a fixed zig-zag order (u+v diagonals, u ascending).
DctBasis make_dct_basis(int height, int width, int groups);
DctBasis make_dct_basis(int height, int width, std::vector<std::pair<int, int>> uv);

struct FrequencyWeights {
    std::vector<double> fc;   // C x C, row-major
    std::vector<double> bias; // C
};

// Per-channel DCT projection onto the group basis (length-C vector).
std::vector<double> frequency_vector(const FeatureMap& f, const DctBasis& basis);
FeatureMap frequency_modulation(const FeatureMap& f, const DctBasis& basis,
                                const FrequencyWeights& w);
FeatureMap frequency_modulation_vjp(const FeatureMap& f, const DctBasis& basis,
                                    const FrequencyWeights& w, const FeatureMap& grad_out);

// ---- Pyramid deformable alignment ----

struct AlignWeights {
    int levels = 3;
    int kernel = 3; // DCN and predictor kernel size
    // Shared stride-2 pyramid convs (levels-1 entries).
    std::vector<Tensor4> down_w;
    std::vector<std::vector<double>> down_b;
    // Offset predictors per level; input is [f_l, g_l] at the coarsest level
    // and [f_l, g_l, upsampled offsets] elsewhere. Output 2*N channels.
    std::vector<Tensor4> off_w;
    std::vector<std::vector<double>> off_b;
    // DCN kernels per level (no bias, modulation fixed to 1).
    std::vector<Tensor4> dcn_w;
    // Fusion convs per level; input is the DCN output at the coarsest level
    // and [DCN output, upsampled aligned] elsewhere.
    std::vector<Tensor4> fuse_w;
    std::vector<std::vector<double>> fuse_b;
};

struct AlignOptions {
    // Upsampled offsets scale with resolution; 2.0 is the correct factor for
    // a x2 pyramid (exposed so the mutation check can disable it).
    double offset_upscale = 2.0;
};

FeatureMap upsample2_bilinear(const FeatureMap& f, int out_h, int out_w);

FeatureMap pyramid_align(const FeatureMap& f_prev, const FeatureMap& g_cur,
                         const AlignWeights& w, const AlignOptions& opts = {});

AlignWeights random_align_weights(Rng& rng, int channels, int levels, int kernel = 3,
                                  double scale = 0.1);

// ---- Verification harness ----

using ForwardFn = std::function<std::vector<double>(const std::vector<double>&)>;
using VjpFn = std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)>;

// Max relative error between central-difference directional derivatives
// <u, J v> and analytic VJP contractions <vjp(u), v> over random probes.
double finite_diff_check(const ForwardFn& forward, const VjpFn& vjp,
                         const std::vector<double>& x0, double eps, int probes, Rng& rng);

struct CheckLine {
    std::string name;
    bool pass = false;
    double value = 0.0;     // measured error / deviation
    double tolerance = 0.0;
};

// The full property + gradient suite on seeded random weights.
std::vector<CheckLine> run_kernel_checks(double eps, std::uint64_t seed);

FeatureMap random_feature(Rng& rng, int c, int h, int w, double lo = -1.0, double hi = 1.0);
Tensor4 random_tensor(Rng& rng, int co, int ci, int kh, int kw, double scale = 0.5);

} // namespace irsim::rfr
