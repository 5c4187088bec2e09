#include "irsim/rfr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim::rfr {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Bilinear read with zero outside bounds.
double sample_zero(const FeatureMap& f, int c, double y, double x) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0;
    const double fx = x - x0;
    double v = 0.0;
    auto tap = [&](int yy, int xx, double w) {
        if (w == 0.0) return;
        if (yy < 0 || yy >= f.height || xx < 0 || xx >= f.width) return;
        v += w * f.at(c, yy, xx);
    };
    tap(y0, x0, (1 - fy) * (1 - fx));
    tap(y0, x0 + 1, (1 - fy) * fx);
    tap(y0 + 1, x0, fy * (1 - fx));
    tap(y0 + 1, x0 + 1, fy * fx);
    return v;
}

// d(sample)/dy and d(sample)/dx at the same point.
void sample_zero_grad(const FeatureMap& f, int c, double y, double x, double* gy, double* gx) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0;
    const double fx = x - x0;
    auto val = [&](int yy, int xx) -> double {
        if (yy < 0 || yy >= f.height || xx < 0 || xx >= f.width) return 0.0;
        return f.at(c, yy, xx);
    };
    const double v00 = val(y0, x0), v01 = val(y0, x0 + 1);
    const double v10 = val(y0 + 1, x0), v11 = val(y0 + 1, x0 + 1);
    *gy = (1 - fx) * (v10 - v00) + fx * (v11 - v01);
    *gx = (1 - fy) * (v01 - v00) + fy * (v11 - v10);
}

void scatter_zero(FeatureMap& f, int c, double y, double x, double g) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0;
    const double fx = x - x0;
    auto tap = [&](int yy, int xx, double w) {
        if (w == 0.0) return;
        if (yy < 0 || yy >= f.height || xx < 0 || xx >= f.width) return;
        f.at(c, yy, xx) += w * g;
    };
    tap(y0, x0, (1 - fy) * (1 - fx));
    tap(y0, x0 + 1, (1 - fy) * fx);
    tap(y0 + 1, x0, fy * (1 - fx));
    tap(y0 + 1, x0 + 1, fy * fx);
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument("concat: spatial shape mismatch");
    FeatureMap out(a.channels + b.channels, a.height, a.width);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<long>(a.data.size()));
    return out;
}

} // namespace

FeatureMap conv2d(const FeatureMap& f, const Tensor4& w, const std::vector<double>& bias, int stride) {
    if (w.ci != f.channels) throw std::invalid_argument("conv2d: channel mismatch");
    if (!bias.empty() && static_cast<int>(bias.size()) != w.co)
        throw std::invalid_argument("conv2d: bias size mismatch");
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");

    const int oh = (f.height + stride - 1) / stride;
    const int ow = (f.width + stride - 1) / stride;
    const int ry = w.kh / 2;
    const int rx = w.kw / 2;
    FeatureMap out(w.co, oh, ow);
    for (int co = 0; co < w.co; ++co) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double acc = bias.empty() ? 0.0 : bias[co];
                for (int ci = 0; ci < w.ci; ++ci) {
                    for (int ky = 0; ky < w.kh; ++ky) {
                        const int sy = y * stride + ky - ry;
                        if (sy < 0 || sy >= f.height) continue;
                        for (int kx = 0; kx < w.kw; ++kx) {
                            const int sx = x * stride + kx - rx;
                            if (sx < 0 || sx >= f.width) continue;
                            acc += w.at(co, ci, ky, kx) * f.at(ci, sy, sx);
                        }
                    }
                }
                out.at(co, y, x) = acc;
            }
        }
    }
    return out;
}

FeatureMap conv2d_vjp_input(const Tensor4& w, const FeatureMap& grad_out, int in_h, int in_w, int stride) {
    if (w.co != grad_out.channels) throw std::invalid_argument("conv2d_vjp_input: channel mismatch");
    const int ry = w.kh / 2;
    const int rx = w.kw / 2;
    FeatureMap din(w.ci, in_h, in_w);
    for (int co = 0; co < w.co; ++co)
        for (int y = 0; y < grad_out.height; ++y)
            for (int x = 0; x < grad_out.width; ++x) {
                const double g = grad_out.at(co, y, x);
                if (g == 0.0) continue;
                for (int ci = 0; ci < w.ci; ++ci)
                    for (int ky = 0; ky < w.kh; ++ky) {
                        const int sy = y * stride + ky - ry;
                        if (sy < 0 || sy >= in_h) continue;
                        for (int kx = 0; kx < w.kw; ++kx) {
                            const int sx = x * stride + kx - rx;
                            if (sx < 0 || sx >= in_w) continue;
                            din.at(ci, sy, sx) += w.at(co, ci, ky, kx) * g;
                        }
                    }
            }
    return din;
}

FeatureMap deform_conv(const FeatureMap& f, const DeformParams& p) {
    const int n_taps = p.weights.kh * p.weights.kw;
    if (p.weights.ci != f.channels) throw std::invalid_argument("deform_conv: channel mismatch");
    if (p.offsets.channels != 2 * n_taps || p.offsets.height != f.height || p.offsets.width != f.width)
        throw std::invalid_argument("deform_conv: offsets shape mismatch");
    if (p.modulation.channels != n_taps || p.modulation.height != f.height || p.modulation.width != f.width)
        throw std::invalid_argument("deform_conv: modulation shape mismatch");

    const int ry = p.weights.kh / 2;
    const int rx = p.weights.kw / 2;
    FeatureMap out(p.weights.co, f.height, f.width);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            for (int n = 0; n < n_taps; ++n) {
                const int ky = n / p.weights.kw;
                const int kx = n % p.weights.kw;
                const double sy = y + ky - ry + p.offsets.at(2 * n, y, x);
                const double sx = x + kx - rx + p.offsets.at(2 * n + 1, y, x);
                const double m = p.modulation.at(n, y, x);
                if (m == 0.0) continue;
                for (int ci = 0; ci < f.channels; ++ci) {
                    const double v = sample_zero(f, ci, sy, sx);
                    if (v == 0.0) continue;
                    for (int co = 0; co < p.weights.co; ++co)
                        out.at(co, y, x) += p.weights.at(co, ci, ky, kx) * v * m;
                }
            }
        }
    }
    return out;
}

DeformConvGrads deform_conv_vjp(const FeatureMap& f, const DeformParams& p, const FeatureMap& grad_out) {
    const int n_taps = p.weights.kh * p.weights.kw;
    if (grad_out.channels != p.weights.co || grad_out.height != f.height || grad_out.width != f.width)
        throw std::invalid_argument("deform_conv_vjp: grad shape mismatch");

    DeformConvGrads g;
    g.d_input = FeatureMap(f.channels, f.height, f.width);
    g.d_offsets = FeatureMap(2 * n_taps, f.height, f.width);
    g.d_modulation = FeatureMap(n_taps, f.height, f.width);

    const int ry = p.weights.kh / 2;
    const int rx = p.weights.kw / 2;
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            for (int n = 0; n < n_taps; ++n) {
                const int ky = n / p.weights.kw;
                const int kx = n % p.weights.kw;
                const double sy = y + ky - ry + p.offsets.at(2 * n, y, x);
                const double sx = x + kx - rx + p.offsets.at(2 * n + 1, y, x);
                const double m = p.modulation.at(n, y, x);
                double dm = 0.0, doy = 0.0, dox = 0.0;
                for (int ci = 0; ci < f.channels; ++ci) {
                    double wsum = 0.0;
                    for (int co = 0; co < p.weights.co; ++co)
                        wsum += p.weights.at(co, ci, ky, kx) * grad_out.at(co, y, x);
                    if (wsum == 0.0) continue;
                    const double v = sample_zero(f, ci, sy, sx);
                    dm += wsum * v;
                    double gy = 0.0, gx = 0.0;
                    sample_zero_grad(f, ci, sy, sx, &gy, &gx);
                    doy += wsum * m * gy;
                    dox += wsum * m * gx;
                    scatter_zero(g.d_input, ci, sy, sx, wsum * m);
                }
                g.d_modulation.at(n, y, x) = dm;
                g.d_offsets.at(2 * n, y, x) = doy;
                g.d_offsets.at(2 * n + 1, y, x) = dox;
            }
        }
    }
    return g;
}

FeatureMap temporal_attention(const FeatureMap& f_aligned, const FeatureMap& g_cur,
                              const TemporalWeights& w) {
    if (!f_aligned.same_shape(g_cur)) throw std::invalid_argument("temporal_attention: shape mismatch");
    const FeatureMap e1 = conv2d(f_aligned, w.embed_prev);
    const FeatureMap e2 = conv2d(g_cur, w.embed_cur);
    FeatureMap att(1, f_aligned.height, f_aligned.width);
    for (int y = 0; y < att.height; ++y)
        for (int x = 0; x < att.width; ++x) {
            double s = 0.0;
            for (int c = 0; c < e1.channels; ++c) s += e1.at(c, y, x) * e2.at(c, y, x);
            att.at(0, y, x) = sigmoid(s);
        }
    return att;
}

FeatureMap temporal_modulation(const FeatureMap& f_aligned, const FeatureMap& g_cur,
                               const TemporalWeights& w) {
    const FeatureMap att = temporal_attention(f_aligned, g_cur, w);
    FeatureMap weighted = f_aligned;
    for (int c = 0; c < weighted.channels; ++c)
        for (int y = 0; y < weighted.height; ++y)
            for (int x = 0; x < weighted.width; ++x) weighted.at(c, y, x) *= att.at(0, y, x);
    return conv2d(concat_channels(weighted, g_cur), w.fuse, w.fuse_bias);
}

std::pair<FeatureMap, FeatureMap> temporal_modulation_vjp(const FeatureMap& f_aligned,
                                                          const FeatureMap& g_cur,
                                                          const TemporalWeights& w,
                                                          const FeatureMap& grad_out) {
    const int C = f_aligned.channels;
    const FeatureMap e1 = conv2d(f_aligned, w.embed_prev);
    const FeatureMap e2 = conv2d(g_cur, w.embed_cur);
    FeatureMap att(1, f_aligned.height, f_aligned.width);
    for (int y = 0; y < att.height; ++y)
        for (int x = 0; x < att.width; ++x) {
            double s = 0.0;
            for (int c = 0; c < C; ++c) s += e1.at(c, y, x) * e2.at(c, y, x);
            att.at(0, y, x) = sigmoid(s);
        }

    const FeatureMap d_fuse_in = conv2d_vjp_input(w.fuse, grad_out, f_aligned.height, f_aligned.width);

    FeatureMap d_f(C, f_aligned.height, f_aligned.width);
    FeatureMap d_g(C, f_aligned.height, f_aligned.width);
    FeatureMap d_att(1, f_aligned.height, f_aligned.width);
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < f_aligned.height; ++y)
            for (int x = 0; x < f_aligned.width; ++x) {
                const double dfm = d_fuse_in.at(c, y, x);
                d_f.at(c, y, x) += dfm * att.at(0, y, x);
                d_att.at(0, y, x) += dfm * f_aligned.at(c, y, x);
                d_g.at(c, y, x) += d_fuse_in.at(C + c, y, x);
            }

    FeatureMap d_e1(C, f_aligned.height, f_aligned.width);
    FeatureMap d_e2(C, f_aligned.height, f_aligned.width);
    for (int y = 0; y < f_aligned.height; ++y)
        for (int x = 0; x < f_aligned.width; ++x) {
            const double a = att.at(0, y, x);
            const double ds = d_att.at(0, y, x) * a * (1.0 - a);
            for (int c = 0; c < C; ++c) {
                d_e1.at(c, y, x) = ds * e2.at(c, y, x);
                d_e2.at(c, y, x) = ds * e1.at(c, y, x);
            }
        }
    const FeatureMap d_f2 = conv2d_vjp_input(w.embed_prev, d_e1, f_aligned.height, f_aligned.width);
    const FeatureMap d_g2 = conv2d_vjp_input(w.embed_cur, d_e2, f_aligned.height, f_aligned.width);
    for (size_t i = 0; i < d_f.data.size(); ++i) {
        d_f.data[i] += d_f2.data[i];
        d_g.data[i] += d_g2.data[i];
    }
    return {d_f, d_g};
}

namespace {

FeatureMap channel_max_mean(const FeatureMap& f, std::vector<int>* argmax) {
    FeatureMap pooled(2, f.height, f.width);
    if (argmax) argmax->assign(static_cast<size_t>(f.height) * f.width, 0);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double mx = f.at(0, y, x);
            int arg = 0;
            double sum = 0.0;
            for (int c = 0; c < f.channels; ++c) {
                const double v = f.at(c, y, x);
                sum += v;
                if (v > mx) {
                    mx = v;
                    arg = c;
                }
            }
            pooled.at(0, y, x) = mx;
            pooled.at(1, y, x) = sum / f.channels;
            if (argmax) (*argmax)[static_cast<size_t>(y) * f.width + x] = arg;
        }
    return pooled;
}

} // namespace

FeatureMap spatial_attention(const FeatureMap& f, const SpatialWeights& w) {
    const FeatureMap pooled = channel_max_mean(f, nullptr);
    FeatureMap att = conv2d(pooled, w.conv, w.bias);
    for (auto& v : att.data) v = sigmoid(v);
    return att;
}

FeatureMap spatial_modulation(const FeatureMap& f, const SpatialWeights& w) {
    const FeatureMap att = spatial_attention(f, w);
    FeatureMap out = f;
    for (int c = 0; c < f.channels; ++c)
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) out.at(c, y, x) *= att.at(0, y, x);
    return out;
}

FeatureMap spatial_modulation_vjp(const FeatureMap& f, const SpatialWeights& w,
                                  const FeatureMap& grad_out) {
    std::vector<int> argmax;
    const FeatureMap pooled = channel_max_mean(f, &argmax);
    FeatureMap logits = conv2d(pooled, w.conv, w.bias);

    FeatureMap d_f(f.channels, f.height, f.width);
    FeatureMap d_att(1, f.height, f.width);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const double a = sigmoid(logits.at(0, y, x));
            double acc = 0.0;
            for (int c = 0; c < f.channels; ++c) {
                d_f.at(c, y, x) += grad_out.at(c, y, x) * a;
                acc += grad_out.at(c, y, x) * f.at(c, y, x);
            }
            d_att.at(0, y, x) = acc * a * (1.0 - a);
        }

    const FeatureMap d_pooled = conv2d_vjp_input(w.conv, d_att, f.height, f.width);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            d_f.at(argmax[static_cast<size_t>(y) * f.width + x], y, x) += d_pooled.at(0, y, x);
            const double dm = d_pooled.at(1, y, x) / f.channels;
            for (int c = 0; c < f.channels; ++c) d_f.at(c, y, x) += dm;
        }
    return d_f;
}

double DctBasis::value(int g, int h, int w) const {
    constexpr double kPi = 3.14159265358979323846;
    const auto [u, v] = uv[g];
    return std::cos(kPi * u * (h + 0.5) / height) * std::cos(kPi * v * (w + 0.5) / width);
}

DctBasis make_dct_basis(int height, int width, int groups) {
    if (groups < 1) throw std::invalid_argument("make_dct_basis: groups must be >= 1");
    std::vector<std::pair<int, int>> uv;
    for (int d = 0; static_cast<int>(uv.size()) < groups; ++d) {
        if (d >= height + width - 1)
            throw std::invalid_argument("make_dct_basis: not enough frequency components");
        for (int u = 0; u <= d && static_cast<int>(uv.size()) < groups; ++u) {
            const int v = d - u;
            if (u < height && v < width) uv.emplace_back(u, v);
        }
    }
    return make_dct_basis(height, width, std::move(uv));
}

DctBasis make_dct_basis(int height, int width, std::vector<std::pair<int, int>> uv) {
    DctBasis b;
    b.height = height;
    b.width = width;
    for (const auto& [u, v] : uv)
        if (u < 0 || u >= height || v < 0 || v >= width)
            throw std::invalid_argument("make_dct_basis: component index out of range");
    b.uv = std::move(uv);
    return b;
}

std::vector<double> frequency_vector(const FeatureMap& f, const DctBasis& basis) {
    const int n = basis.groups();
    if (n == 0 || f.channels % n != 0)
        throw std::invalid_argument("frequency_vector: channels must be divisible by group count");
    if (basis.height != f.height || basis.width != f.width)
        throw std::invalid_argument("frequency_vector: basis shape mismatch");
    const int cg = f.channels / n;
    std::vector<double> z(static_cast<size_t>(f.channels), 0.0);
    for (int c = 0; c < f.channels; ++c) {
        const int g = c / cg;
        double acc = 0.0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) acc += f.at(c, y, x) * basis.value(g, y, x);
        z[c] = acc;
    }
    return z;
}

FeatureMap frequency_modulation(const FeatureMap& f, const DctBasis& basis, const FrequencyWeights& w) {
    const int C = f.channels;
    if (static_cast<int>(w.fc.size()) != C * C || static_cast<int>(w.bias.size()) != C)
        throw std::invalid_argument("frequency_modulation: fc weight shape mismatch");
    const std::vector<double> z = frequency_vector(f, basis);
    FeatureMap out = f;
    for (int c = 0; c < C; ++c) {
        double logit = w.bias[c];
        for (int j = 0; j < C; ++j) logit += w.fc[static_cast<size_t>(c) * C + j] * z[j];
        const double m = sigmoid(logit);
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) out.at(c, y, x) *= m;
    }
    return out;
}

FeatureMap frequency_modulation_vjp(const FeatureMap& f, const DctBasis& basis,
                                    const FrequencyWeights& w, const FeatureMap& grad_out) {
    const int C = f.channels;
    const int cg = C / basis.groups();
    const std::vector<double> z = frequency_vector(f, basis);
    std::vector<double> m(static_cast<size_t>(C)), dlogit(static_cast<size_t>(C));
    for (int c = 0; c < C; ++c) {
        double logit = w.bias[c];
        for (int j = 0; j < C; ++j) logit += w.fc[static_cast<size_t>(c) * C + j] * z[j];
        m[c] = sigmoid(logit);
    }
    FeatureMap d_f(C, f.height, f.width);
    for (int c = 0; c < C; ++c) {
        double dm = 0.0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                d_f.at(c, y, x) += grad_out.at(c, y, x) * m[c];
                dm += grad_out.at(c, y, x) * f.at(c, y, x);
            }
        dlogit[c] = dm * m[c] * (1.0 - m[c]);
    }
    std::vector<double> dz(static_cast<size_t>(C), 0.0);
    for (int c = 0; c < C; ++c)
        for (int j = 0; j < C; ++j) dz[j] += w.fc[static_cast<size_t>(c) * C + j] * dlogit[c];
    for (int c = 0; c < C; ++c) {
        const int g = c / cg;
        if (dz[c] == 0.0) continue;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) d_f.at(c, y, x) += dz[c] * basis.value(g, y, x);
    }
    return d_f;
}

FeatureMap upsample2_bilinear(const FeatureMap& f, int out_h, int out_w) {
    FeatureMap out(f.channels, out_h, out_w);
    for (int c = 0; c < f.channels; ++c)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) {
                // Pixel-center mapping, edge-clamped.
                double sy = (y + 0.5) * f.height / out_h - 0.5;
                double sx = (x + 0.5) * f.width / out_w - 0.5;
                sy = std::clamp(sy, 0.0, static_cast<double>(f.height - 1));
                sx = std::clamp(sx, 0.0, static_cast<double>(f.width - 1));
                const int y0 = static_cast<int>(std::floor(sy));
                const int x0 = static_cast<int>(std::floor(sx));
                const double fy = sy - y0;
                const double fx = sx - x0;
                const int y1 = std::min(y0 + 1, f.height - 1);
                const int x1 = std::min(x0 + 1, f.width - 1);
                out.at(c, y, x) = (1 - fy) * ((1 - fx) * f.at(c, y0, x0) + fx * f.at(c, y0, x1)) +
                                  fy * ((1 - fx) * f.at(c, y1, x0) + fx * f.at(c, y1, x1));
            }
    return out;
}

FeatureMap pyramid_align(const FeatureMap& f_prev, const FeatureMap& g_cur,
                         const AlignWeights& w, const AlignOptions& opts) {
    if (!f_prev.same_shape(g_cur)) throw std::invalid_argument("pyramid_align: shape mismatch");
    const int L = w.levels;
    if (L < 1) throw std::invalid_argument("pyramid_align: levels must be >= 1");
    const int down = 1 << (L - 1);
    if (f_prev.height % down != 0 || f_prev.width % down != 0)
        throw std::invalid_argument("pyramid_align: dims must be divisible by 2^(levels-1)");

    std::vector<FeatureMap> fp(static_cast<size_t>(L)), gp(static_cast<size_t>(L));
    fp[0] = f_prev;
    gp[0] = g_cur;
    for (int l = 1; l < L; ++l) {
        fp[l] = conv2d(fp[l - 1], w.down_w[l - 1], w.down_b[l - 1], 2);
        gp[l] = conv2d(gp[l - 1], w.down_w[l - 1], w.down_b[l - 1], 2);
    }

    const int n_taps = w.kernel * w.kernel;
    FeatureMap offsets_up, aligned_up;
    FeatureMap aligned;
    for (int l = L - 1; l >= 0; --l) {
        FeatureMap off_in = concat_channels(fp[l], gp[l]);
        if (l < L - 1) off_in = concat_channels(off_in, offsets_up);
        const FeatureMap offsets = conv2d(off_in, w.off_w[l], w.off_b[l]);
        if (offsets.channels != 2 * n_taps)
            throw std::invalid_argument("pyramid_align: offset predictor output must have 2*N channels");

        DeformParams params;
        params.weights = w.dcn_w[l];
        params.offsets = offsets;
        params.modulation = FeatureMap(n_taps, fp[l].height, fp[l].width);
        std::fill(params.modulation.data.begin(), params.modulation.data.end(), 1.0);
        const FeatureMap dcn_out = deform_conv(fp[l], params);

        FeatureMap fuse_in = (l < L - 1) ? concat_channels(dcn_out, aligned_up) : dcn_out;
        aligned = conv2d(fuse_in, w.fuse_w[l], w.fuse_b[l]);

        if (l > 0) {
            offsets_up = upsample2_bilinear(offsets, fp[l - 1].height, fp[l - 1].width);
            for (auto& v : offsets_up.data) v *= opts.offset_upscale;
            aligned_up = upsample2_bilinear(aligned, fp[l - 1].height, fp[l - 1].width);
        }
    }
    return aligned;
}

AlignWeights random_align_weights(Rng& rng, int channels, int levels, int kernel, double scale) {
    AlignWeights w;
    w.levels = levels;
    w.kernel = kernel;
    const int n_taps = kernel * kernel;
    for (int l = 0; l + 1 < levels; ++l) {
        w.down_w.push_back(random_tensor(rng, channels, channels, 3, 3, scale));
        w.down_b.emplace_back(static_cast<size_t>(channels), 0.0);
    }
    for (int l = 0; l < levels; ++l) {
        const int off_in = (l < levels - 1) ? 2 * channels + 2 * n_taps : 2 * channels;
        w.off_w.push_back(random_tensor(rng, 2 * n_taps, off_in, kernel, kernel, scale * 0.1));
        w.off_b.emplace_back(static_cast<size_t>(2 * n_taps), 0.0);
        w.dcn_w.push_back(random_tensor(rng, channels, channels, kernel, kernel, scale));
        const int fuse_in = (l < levels - 1) ? 2 * channels : channels;
        w.fuse_w.push_back(random_tensor(rng, channels, fuse_in, 3, 3, scale));
        w.fuse_b.emplace_back(static_cast<size_t>(channels), 0.0);
    }
    return w;
}

double finite_diff_check(const ForwardFn& forward, const VjpFn& vjp,
                         const std::vector<double>& x0, double eps, int probes, Rng& rng) {
    if (!(eps >= 1e-7 && eps <= 1e-3))
        throw std::invalid_argument("finite_diff_check: eps must lie in [1e-7, 1e-3]");
    const std::vector<double> y0 = forward(x0);
    double max_rel = 0.0;
    for (int k = 0; k < probes; ++k) {
        std::vector<double> v(x0.size()), u(y0.size());
        double nv = 0.0, nu = 0.0;
        for (auto& e : v) {
            e = rng.uniform(-1.0, 1.0);
            nv += e * e;
        }
        for (auto& e : u) {
            e = rng.uniform(-1.0, 1.0);
            nu += e * e;
        }
        nv = std::sqrt(nv);
        nu = std::sqrt(nu);
        for (auto& e : v) e /= (nv > 0 ? nv : 1.0);
        for (auto& e : u) e /= (nu > 0 ? nu : 1.0);

        std::vector<double> xp = x0, xm = x0;
        for (size_t i = 0; i < x0.size(); ++i) {
            xp[i] += eps * v[i];
            xm[i] -= eps * v[i];
        }
        const std::vector<double> yp = forward(xp);
        const std::vector<double> ym = forward(xm);
        double numeric = 0.0;
        for (size_t i = 0; i < y0.size(); ++i) {
            if (!std::isfinite(yp[i]) || !std::isfinite(ym[i]))
                throw std::runtime_error("finite_diff_check: non-finite intermediate");
            numeric += u[i] * (yp[i] - ym[i]) / (2.0 * eps);
        }
        const std::vector<double> g = vjp(x0, u);
        double analytic = 0.0;
        for (size_t i = 0; i < x0.size(); ++i) analytic += g[i] * v[i];

        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
    }
    return max_rel;
}

FeatureMap random_feature(Rng& rng, int c, int h, int w, double lo, double hi) {
    FeatureMap f(c, h, w);
    for (auto& v : f.data) v = rng.uniform(lo, hi);
    return f;
}

Tensor4 random_tensor(Rng& rng, int co, int ci, int kh, int kw, double scale) {
    Tensor4 t(co, ci, kh, kw);
    for (auto& v : t.data) v = rng.uniform(-scale, scale);
    return t;
}

} // namespace irsim::rfr
