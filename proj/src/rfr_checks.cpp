#include <algorithm>
#include <cmath>

#include "irsim/rfr.hpp"

namespace irsim::rfr {

namespace {

FeatureMap from_flat(const std::vector<double>& x, int c, int h, int w) {
    FeatureMap f(c, h, w);
    f.data = x;
    return f;
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// Smooth analytic feature so integer shifts are exact.
double smooth_value(int c, int y, double x) {
    return std::sin(0.37 * x + 0.61 * c) * std::cos(0.23 * y - 0.11 * c) + 0.2 * c;
}

DeformParams make_params(Rng& rng, int channels, int h, int w, int k, bool fractional_offsets) {
    DeformParams p;
    p.weights = random_tensor(rng, channels, channels, k, k, 0.5);
    p.offsets = FeatureMap(2 * k * k, h, w);
    if (fractional_offsets)
        for (auto& v : p.offsets.data) {
            v = rng.uniform(-0.7, 0.7);
            // keep sampling points clear of the integer lattice so central
            // differences stay on one linear piece
            const double fr = v - std::floor(v);
            if (fr < 0.05) v += 0.1;
            if (fr > 0.95) v -= 0.1;
        }
    p.modulation = FeatureMap(k * k, h, w);
    for (auto& v : p.modulation.data) v = rng.uniform(0.1, 1.0);
    return p;
}

// Pass-through pyramid weights for the planted-shift oracle: the coarsest
// predictor emits the true coarse-level shift as a constant bias, finer
// predictors copy the upsampled offsets, DCN and fusion kernels are identity
// taps on the aligned channels.
AlignWeights planted_weights(int channels, int levels, int kernel, double coarse_dx) {
    AlignWeights w;
    w.levels = levels;
    w.kernel = kernel;
    const int n_taps = kernel * kernel;
    for (int l = 0; l + 1 < levels; ++l) {
        Tensor4 down(channels, channels, 3, 3);
        for (int c = 0; c < channels; ++c) down.at(c, c, 1, 1) = 1.0; // stride-2 picking
        w.down_w.push_back(down);
        w.down_b.emplace_back(static_cast<size_t>(channels), 0.0);
    }
    for (int l = 0; l < levels; ++l) {
        const bool coarsest = (l == levels - 1);
        const int off_in = coarsest ? 2 * channels : 2 * channels + 2 * n_taps;
        Tensor4 off(2 * n_taps, off_in, kernel, kernel);
        std::vector<double> off_bias(static_cast<size_t>(2 * n_taps), 0.0);
        if (coarsest) {
            for (int n = 0; n < n_taps; ++n) off_bias[2 * n + 1] = coarse_dx;
        } else {
            for (int o = 0; o < 2 * n_taps; ++o) off.at(o, 2 * channels + o, kernel / 2, kernel / 2) = 1.0;
        }
        w.off_w.push_back(off);
        w.off_b.push_back(off_bias);

        Tensor4 dcn(channels, channels, kernel, kernel);
        for (int c = 0; c < channels; ++c) dcn.at(c, c, kernel / 2, kernel / 2) = 1.0;
        w.dcn_w.push_back(dcn);

        const int fuse_in = coarsest ? channels : 2 * channels;
        Tensor4 fuse(channels, fuse_in, 3, 3);
        for (int c = 0; c < channels; ++c) fuse.at(c, c, 1, 1) = 1.0; // ignore upsampled aligned
        w.fuse_w.push_back(fuse);
        w.fuse_b.emplace_back(static_cast<size_t>(channels), 0.0);
    }
    return w;
}

double planted_shift_error(double offset_upscale) {
    const int C = 2, H = 16, W = 16, L = 3, K = 3;
    const double shift = 2.0; // f_prev(x) = g(x - shift)
    FeatureMap g(C, H, W), f_prev(C, H, W);
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                g.at(c, y, x) = smooth_value(c, y, x);
                f_prev.at(c, y, x) = smooth_value(c, y, x - shift);
            }
    const AlignWeights w = planted_weights(C, L, K, shift / (1 << (L - 1)));
    AlignOptions opts;
    opts.offset_upscale = offset_upscale;
    const FeatureMap aligned = pyramid_align(f_prev, g, w, opts);

    const int margin = 4;
    double err = 0.0;
    for (int c = 0; c < C; ++c)
        for (int y = margin; y < H - margin; ++y)
            for (int x = margin; x < W - margin; ++x)
                err = std::max(err, std::abs(aligned.at(c, y, x) - g.at(c, y, x)));
    return err;
}

// Reference pyramid with deform_conv replaced by a plain convolution.
FeatureMap conv_pyramid_reference(const FeatureMap& f_prev, const FeatureMap& g_cur,
                                  const AlignWeights& w) {
    const int L = w.levels;
    std::vector<FeatureMap> fp(static_cast<size_t>(L)), gp(static_cast<size_t>(L));
    fp[0] = f_prev;
    gp[0] = g_cur;
    for (int l = 1; l < L; ++l) {
        fp[l] = conv2d(fp[l - 1], w.down_w[l - 1], w.down_b[l - 1], 2);
        gp[l] = conv2d(gp[l - 1], w.down_w[l - 1], w.down_b[l - 1], 2);
    }
    FeatureMap aligned, aligned_up;
    for (int l = L - 1; l >= 0; --l) {
        const FeatureMap plain = conv2d(fp[l], w.dcn_w[l]);
        FeatureMap fuse_in = plain;
        if (l < L - 1) {
            FeatureMap cat(plain.channels + aligned_up.channels, plain.height, plain.width);
            std::copy(plain.data.begin(), plain.data.end(), cat.data.begin());
            std::copy(aligned_up.data.begin(), aligned_up.data.end(),
                      cat.data.begin() + static_cast<long>(plain.data.size()));
            fuse_in = cat;
        }
        aligned = conv2d(fuse_in, w.fuse_w[l], w.fuse_b[l]);
        if (l > 0) aligned_up = upsample2_bilinear(aligned, fp[l - 1].height, fp[l - 1].width);
    }
    return aligned;
}

} // namespace

std::vector<CheckLine> run_kernel_checks(double eps, std::uint64_t seed) {
    std::vector<CheckLine> lines;
    auto add = [&](const std::string& name, double value, double tol, bool pass_when_below = true) {
        lines.push_back(CheckLine{name, pass_when_below ? (value < tol) : (value > tol), value, tol});
    };

    Rng rng = Rng::stream(seed, 7000);

    // Plain convolution: gradient of a linear map is exact.
    {
        const int C = 3, H = 10, W = 10;
        const Tensor4 w = random_tensor(rng, C, C, 3, 3, 0.5);
        const FeatureMap x0 = random_feature(rng, C, H, W);
        Rng probe = Rng::stream(seed, 7001);
        const double err = finite_diff_check(
            [&](const std::vector<double>& x) { return conv2d(from_flat(x, C, H, W), w).data; },
            [&](const std::vector<double>&, const std::vector<double>& u) {
                return conv2d_vjp_input(w, from_flat(u, C, H, W), H, W).data;
            },
            x0.data, eps, 4, probe);
        add("conv_gradient_input", err, 1e-9);
    }

    // Deformable convolution reductions and gradients.
    {
        const int C = 3, H = 12, W = 12, K = 3;
        DeformParams zero = make_params(rng, C, H, W, K, false);
        std::fill(zero.modulation.data.begin(), zero.modulation.data.end(), 1.0);
        const FeatureMap f = random_feature(rng, C, H, W);
        add("deform_zero_offset_equals_conv",
            max_abs_diff(deform_conv(f, zero), conv2d(f, zero.weights)), 1e-12);

        DeformParams zmod = zero;
        std::fill(zmod.modulation.data.begin(), zmod.modulation.data.end(), 0.0);
        double zmax = 0.0;
        for (double v : deform_conv(f, zmod).data) zmax = std::max(zmax, std::abs(v));
        add("deform_zero_modulation_zero_output", zmax, 1e-300);

        DeformParams p = make_params(rng, C, H, W, K, true);
        const FeatureMap f1 = random_feature(rng, C, H, W);
        const FeatureMap f2 = random_feature(rng, C, H, W);
        const double a = 0.7, b = -1.3;
        FeatureMap mix(C, H, W);
        for (size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = a * f1.data[i] + b * f2.data[i];
        const FeatureMap o1 = deform_conv(f1, p);
        const FeatureMap o2 = deform_conv(f2, p);
        const FeatureMap om = deform_conv(mix, p);
        double lin = 0.0;
        for (size_t i = 0; i < om.data.size(); ++i)
            lin = std::max(lin, std::abs(om.data[i] - a * o1.data[i] - b * o2.data[i]));
        add("deform_linearity_in_input", lin, 1e-10);

        Rng probe = Rng::stream(seed, 7002);
        const double gin = finite_diff_check(
            [&](const std::vector<double>& x) { return deform_conv(from_flat(x, C, H, W), p).data; },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                return deform_conv_vjp(from_flat(x, C, H, W), p, from_flat(u, C, H, W)).d_input.data;
            },
            f1.data, eps, 4, probe);
        add("deform_gradient_input", gin, 1e-8);

        const double goff = finite_diff_check(
            [&](const std::vector<double>& x) {
                DeformParams q = p;
                q.offsets.data = x;
                return deform_conv(f1, q).data;
            },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                DeformParams q = p;
                q.offsets.data = x;
                return deform_conv_vjp(f1, q, from_flat(u, C, H, W)).d_offsets.data;
            },
            p.offsets.data, eps, 4, probe);
        add("deform_gradient_offsets", goff, 1e-4);

        const double gmod = finite_diff_check(
            [&](const std::vector<double>& x) {
                DeformParams q = p;
                q.modulation.data = x;
                return deform_conv(f1, q).data;
            },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                DeformParams q = p;
                q.modulation.data = x;
                return deform_conv_vjp(f1, q, from_flat(u, C, H, W)).d_modulation.data;
            },
            p.modulation.data, eps, 4, probe);
        add("deform_gradient_modulation", gmod, 1e-8);
    }

    // Temporal modulation.
    {
        const int C = 4, H = 8, W = 8;
        TemporalWeights tw;
        tw.embed_prev = random_tensor(rng, C, C, 1, 1, 0.5);
        tw.embed_cur = random_tensor(rng, C, C, 1, 1, 0.5);
        tw.fuse = random_tensor(rng, C, 2 * C, 3, 3, 0.3);
        tw.fuse_bias.assign(static_cast<size_t>(C), 0.05);
        const FeatureMap fa = random_feature(rng, C, H, W);
        const FeatureMap g = random_feature(rng, C, H, W);

        const FeatureMap att = temporal_attention(fa, g, tw);
        double lo = 1.0, hi = 0.0;
        for (double v : att.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        add("temporal_attention_in_open_unit_interval",
            (lo > 0.0 && hi < 1.0) ? 0.0 : 1.0, 0.5);

        Rng probe = Rng::stream(seed, 7003);
        const double gfa = finite_diff_check(
            [&](const std::vector<double>& x) {
                return temporal_modulation(from_flat(x, C, H, W), g, tw).data;
            },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                return temporal_modulation_vjp(from_flat(x, C, H, W), g, tw, from_flat(u, C, H, W))
                    .first.data;
            },
            fa.data, eps, 4, probe);
        add("temporal_gradient_aligned_input", gfa, 1e-5);

        const double gg = finite_diff_check(
            [&](const std::vector<double>& x) {
                return temporal_modulation(fa, from_flat(x, C, H, W), tw).data;
            },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                return temporal_modulation_vjp(fa, from_flat(x, C, H, W), tw, from_flat(u, C, H, W))
                    .second.data;
            },
            g.data, eps, 4, probe);
        add("temporal_gradient_current_input", gg, 1e-5);
    }

    // Spatial modulation.
    {
        const int C = 5, H = 9, W = 9;
        SpatialWeights sw;
        sw.conv = random_tensor(rng, 1, 2, 5, 5, 0.4);
        sw.bias.assign(1, -0.1);
        const FeatureMap f = random_feature(rng, C, H, W);
        const FeatureMap att = spatial_attention(f, sw);
        double lo = 1.0, hi = 0.0;
        for (double v : att.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        add("spatial_attention_in_open_unit_interval", (lo > 0.0 && hi < 1.0) ? 0.0 : 1.0, 0.5);

        Rng probe = Rng::stream(seed, 7004);
        const double gf = finite_diff_check(
            [&](const std::vector<double>& x) { return spatial_modulation(from_flat(x, C, H, W), sw).data; },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                return spatial_modulation_vjp(from_flat(x, C, H, W), sw, from_flat(u, C, H, W)).data;
            },
            f.data, eps, 4, probe);
        add("spatial_gradient_input", gf, 1e-5);
    }

    // Frequency modulation + DCT basis.
    {
        const int C = 8, H = 8, W = 8, N = 4;
        const DctBasis basis = make_dct_basis(H, W, N);
        double ortho = 0.0;
        for (int g1 = 0; g1 < N; ++g1)
            for (int g2 = g1 + 1; g2 < N; ++g2) {
                double dot = 0.0, n1 = 0.0, n2 = 0.0;
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) {
                        const double a = basis.value(g1, y, x);
                        const double b = basis.value(g2, y, x);
                        dot += a * b;
                        n1 += a * a;
                        n2 += b * b;
                    }
                ortho = std::max(ortho, std::abs(dot) / std::sqrt(n1 * n2));
            }
        add("dct_basis_orthogonality", ortho, 1e-10);

        FrequencyWeights fw;
        fw.fc.assign(static_cast<size_t>(C) * C, 0.0);
        fw.bias.assign(static_cast<size_t>(C), 0.0);
        const FeatureMap f = random_feature(rng, C, H, W);
        const FeatureMap half = frequency_modulation(f, basis, fw);
        double dev = 0.0;
        for (size_t i = 0; i < f.data.size(); ++i)
            dev = std::max(dev, std::abs(half.data[i] - 0.5 * f.data[i]));
        add("frequency_zero_fc_is_half_scaling", dev, 1e-15);

        Rng wrng = Rng::stream(seed, 7005);
        for (auto& v : fw.fc) v = wrng.uniform(-0.2, 0.2);
        for (auto& v : fw.bias) v = wrng.uniform(-0.2, 0.2);
        Rng probe = Rng::stream(seed, 7006);
        const double gf = finite_diff_check(
            [&](const std::vector<double>& x) {
                return frequency_modulation(from_flat(x, C, H, W), basis, fw).data;
            },
            [&](const std::vector<double>& x, const std::vector<double>& u) {
                return frequency_modulation_vjp(from_flat(x, C, H, W), basis, fw, from_flat(u, C, H, W))
                    .data;
            },
            f.data, eps, 4, probe);
        add("frequency_gradient_input", gf, 1e-5);
    }

    // Pyramid alignment oracles.
    {
        add("pda_planted_shift_recovery", planted_shift_error(2.0), 1e-6);
        add("pda_offset_upscale_mutation_detected", planted_shift_error(1.0), 1e-2, false);

        // L=1 collapses to deform_conv + fusion conv.
        const int C = 3, H = 8, W = 8;
        Rng wrng = Rng::stream(seed, 7007);
        AlignWeights w1 = random_align_weights(wrng, C, 1);
        const FeatureMap f = random_feature(rng, C, H, W);
        const FeatureMap g = random_feature(rng, C, H, W);
        const FeatureMap out = pyramid_align(f, g, w1);

        FeatureMap off_in(2 * C, H, W);
        std::copy(f.data.begin(), f.data.end(), off_in.data.begin());
        std::copy(g.data.begin(), g.data.end(), off_in.data.begin() + static_cast<long>(f.data.size()));
        DeformParams p;
        p.weights = w1.dcn_w[0];
        p.offsets = conv2d(off_in, w1.off_w[0], w1.off_b[0]);
        p.modulation = FeatureMap(9, H, W);
        std::fill(p.modulation.data.begin(), p.modulation.data.end(), 1.0);
        const FeatureMap ref = conv2d(deform_conv(f, p), w1.fuse_w[0], w1.fuse_b[0]);
        add("pda_level1_equals_deform_plus_fuse", max_abs_diff(out, ref), 1e-12);

        // Zero offset predictors reduce every DCN to a plain convolution.
        Rng wrng3 = Rng::stream(seed, 7008);
        AlignWeights w3 = random_align_weights(wrng3, C, 3);
        for (auto& t : w3.off_w) std::fill(t.data.begin(), t.data.end(), 0.0);
        for (auto& b : w3.off_b) std::fill(b.begin(), b.end(), 0.0);
        const FeatureMap same = random_feature(rng, C, 16, 16);
        const FeatureMap out3 = pyramid_align(same, same, w3);
        const FeatureMap ref3 = conv_pyramid_reference(same, same, w3);
        add("pda_zero_predictor_equals_conv_path", max_abs_diff(out3, ref3), 1e-12);
    }

    return lines;
}

} // namespace irsim::rfr
