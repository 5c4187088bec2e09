#include "irsim/compose.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "irsim/stats.hpp"

namespace irsim {

namespace {

// Bilinear splat of a template patch centered at fractional `pos`:
// returns the effective grid-aligned patch and its frame-space anchor.
struct Splat {
    int x0 = 0;
    int y0 = 0;
    ImageF patch;
    double peak = 0.0;
};

Splat splat_template(const ImageF& tmpl, Vec2 pos) {
    const int ru = tmpl.height / 2;
    const int rv = tmpl.width / 2;
    const int ix = static_cast<int>(std::floor(pos.x));
    const int iy = static_cast<int>(std::floor(pos.y));
    const double fx = pos.x - ix;
    const double fy = pos.y - iy;

    Splat s;
    s.x0 = ix - rv;
    s.y0 = iy - ru;
    s.patch = ImageF(tmpl.height + 1, tmpl.width + 1, 0.0);
    const double w00 = (1 - fy) * (1 - fx);
    const double w01 = (1 - fy) * fx;
    const double w10 = fy * (1 - fx);
    const double w11 = fy * fx;
    for (int i = 0; i < tmpl.height; ++i) {
        for (int j = 0; j < tmpl.width; ++j) {
            const double v = tmpl.at(i, j);
            if (v <= 0.0) continue;
            s.patch.at(i, j) += v * w00;
            s.patch.at(i, j + 1) += v * w01;
            s.patch.at(i + 1, j) += v * w10;
            s.patch.at(i + 1, j + 1) += v * w11;
        }
    }
    for (double v : s.patch.data) s.peak = std::max(s.peak, v);
    return s;
}

// In-place Eq.-style adaptive blend; returns the in-frame bounding box of the
// modified region through *bx0.. when a pixel was touched.
bool blend_into(ImageF& frame, const ImageF& tmpl, double intensity, Vec2 pos,
                int* bx0, int* bx1, int* by0, int* by1) {
    double tmax = 0.0;
    for (double v : tmpl.data) tmax = std::max(tmax, v);
    if (!(tmax > 0.0) || !(intensity > 0.0))
        throw std::runtime_error("blend: degenerate template (max(I_T) <= 0)");

    const Splat s = splat_template(tmpl, pos);
    const int fx0 = std::max(0, s.x0);
    const int fy0 = std::max(0, s.y0);
    const int fx1 = std::min(frame.width - 1, s.x0 + s.patch.width - 1);
    const int fy1 = std::min(frame.height - 1, s.y0 + s.patch.height - 1);
    if (fx0 > fx1 || fy0 > fy1) return false;

    bool touched = false;
    int tx0 = frame.width, tx1 = -1, ty0 = frame.height, ty1 = -1;
    for (int y = fy0; y <= fy1; ++y) {
        for (int x = fx0; x <= fx1; ++x) {
            const double sv = s.patch.at(y - s.y0, x - s.x0);
            if (sv <= 0.0) continue;
            const double norm = sv / s.peak;
            const double it = sv * intensity;
            frame.at(y, x) = norm * it + (1.0 - norm) * frame.at(y, x);
            touched = true;
            tx0 = std::min(tx0, x);
            tx1 = std::max(tx1, x);
            ty0 = std::min(ty0, y);
            ty1 = std::max(ty1, y);
        }
    }
    if (touched && bx0) {
        *bx0 = tx0;
        *bx1 = tx1;
        *by0 = ty0;
        *by1 = ty1;
    }
    return touched;
}

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

} // namespace

double target_intensity(const IntensityModel& model, int t) {
    double a = 0.0;
    if (!model.accel.empty()) {
        if (t < 1 || t > static_cast<int>(model.accel.size()))
            throw std::invalid_argument("target_intensity: frame index out of range");
        a = model.accel[t - 1];
    }
    const double e = (model.scr * model.sigma_lb1 + model.mu_lb1) * (1.0 + a);
    if (1.0 + a <= 0.0)
        std::cerr << "irsim: target_intensity: degenerate acceleration (1+a <= 0) at frame " << t
                  << ", intensity " << e << "\n";
    return e;
}

ImageF blend_patch(const ImageF& background, const ImageF& tmpl, double intensity,
                   Vec2 position, bool* visible) {
    ImageF out = background;
    const bool v = blend_into(out, tmpl, intensity, position, nullptr, nullptr, nullptr, nullptr);
    if (visible) *visible = v;
    return out;
}

ImageF gaussian_blur_patch(const ImageF& patch, int kernel, double sigma) {
    if (kernel < 1 || kernel % 2 == 0)
        throw std::invalid_argument("gaussian_blur_patch: kernel size must be odd and >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur_patch: sigma must be > 0");

    const int r = kernel / 2;
    std::vector<double> k1(static_cast<size_t>(kernel));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k1[i + r] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k1[i + r];
    }
    for (auto& v : k1) v /= sum;

    // Separable passes, symmetric reflect padding.
    ImageF tmp(patch.height, patch.width);
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k1[i + r] * patch.at(y, reflect_index(x + i, patch.width));
            tmp.at(y, x) = acc;
        }
    ImageF out(patch.height, patch.width);
    out.valid = patch.valid;
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k1[i + r] * tmp.at(reflect_index(y + i, patch.height), x);
            out.at(y, x) = acc;
        }
    return out;
}

MaskPatch place_mask(const ImageF& tmpl, Vec2 position, double threshold,
                     int frame_height, int frame_width) {
    MaskPatch mask;
    const int ru = tmpl.height / 2;
    const int rv = tmpl.width / 2;
    const int cx = static_cast<int>(std::lround(position.x));
    const int cy = static_cast<int>(std::lround(position.y));

    const int x0 = std::max(0, cx - rv);
    const int y0 = std::max(0, cy - ru);
    const int x1 = std::min(frame_width - 1, cx + rv);
    const int y1 = std::min(frame_height - 1, cy + ru);
    if (x0 > x1 || y0 > y1) return mask;

    mask.x0 = x0;
    mask.y0 = y0;
    mask.width = x1 - x0 + 1;
    mask.height = y1 - y0 + 1;
    mask.data.assign(static_cast<size_t>(mask.width) * mask.height, 0);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double v = tmpl.at(y - cy + ru, x - cx + rv);
            if (v >= threshold)
                mask.data[static_cast<size_t>(y - y0) * mask.width + (x - x0)] = 1;
        }
    if (mask.empty()) return MaskPatch{};
    return mask;
}

RenderContext prepare_render(const SequenceSpec& spec, ImageF global_background) {
    if (spec.frames < 1) throw std::invalid_argument("render: frames must be >= 1");
    if (spec.fov_height <= 0 || spec.fov_width <= 0)
        throw std::invalid_argument("render: field of view must be positive");
    if (!(spec.mask_threshold > 0.0 && spec.mask_threshold < 1.0) ||
        !(spec.render_threshold > 0.0 && spec.render_threshold < 1.0))
        throw std::invalid_argument("render: thresholds must lie in (0,1)");
    if (global_background.data.empty() || !global_background.all_finite())
        throw std::invalid_argument("render: background image is empty or non-finite");

    RenderContext ctx;
    ctx.spec = spec;
    ctx.global = std::move(global_background);
    ctx.global_mean = ctx.global.mean();

    Rng seq_rng = Rng::stream(spec.seed, 0);
    Rng pose_rng = Rng::stream(spec.seed, 1);

    MotionSpec motion;
    motion.frames = spec.frames;
    motion.fov_height = spec.fov_height;
    motion.fov_width = spec.fov_width;
    motion.global_height = ctx.global.height;
    motion.global_width = ctx.global.width;
    motion.focal = spec.focal;
    motion.attitude = spec.attitude;
    motion.translation = spec.translation;
    motion.has_fixed_attitude = spec.has_fixed_attitude;
    motion.fixed_attitude = spec.fixed_attitude;
    if (spec.static_background) {
        motion.has_fixed_attitude = true;
        motion.fixed_attitude = Vec3{0, 0, 0};
        motion.has_fixed_translation = true;
        motion.fixed_translation.assign(
            static_cast<size_t>(spec.frames),
            Vec2{(ctx.global.width - spec.fov_width) / 2.0, (ctx.global.height - spec.fov_height) / 2.0});
    }
    ctx.pose = pose_sequence(motion, pose_rng);

    const int n_targets = (spec.target_count >= 0)
                              ? spec.target_count
                              : static_cast<int>(seq_rng.uniform_int(1, 6));
    ctx.blur_kernel = (spec.blur.kernel > 0) ? spec.blur.kernel
                                             : static_cast<int>(2 * seq_rng.uniform_int(1, 3) + 1);
    ctx.blur_sigma = (spec.blur.sigma > 0.0) ? spec.blur.sigma : seq_rng.uniform(0.2, 0.6);
    if (ctx.blur_kernel % 2 == 0) throw std::invalid_argument("render: blur kernel must be odd");

    const Vec2 fov{static_cast<double>(spec.fov_width), static_cast<double>(spec.fov_height)};
    for (int i = 0; i < n_targets; ++i) {
        const TargetConfig& cfg =
            (i < static_cast<int>(spec.targets.size())) ? spec.targets[i] : spec.target_defaults;
        Rng trng = Rng::stream(spec.seed, 100 + static_cast<std::uint64_t>(i));
        ctx.tracks.push_back(make_target_track(i + 1, trng, spec.frames, fov, ctx.pose.relative, cfg));
    }

    // Frame-1 local background statistics (Eq.-style intensity anchor).
    const ImageF bg1 = warp(ctx.global, ctx.pose.absolute[0], spec.fov_height, spec.fov_width,
                            ctx.global_mean);
    for (const auto& track : ctx.tracks) {
        IntensityModel model;
        model.scr = track.scr;
        model.accel = track.accel;

        const ImageF tmpl = render_gaussian(track.appearance[0], spec.render_threshold);
        const MaskPatch m = place_mask(tmpl, track.traj_cur[0], spec.mask_threshold,
                                       spec.fov_height, spec.fov_width);
        int nx0 = 0, nx1 = bg1.width - 1, ny0 = 0, ny1 = bg1.height - 1;
        if (!m.data.empty()) {
            nx0 = std::max(0, m.x0 - spec.neighborhood_d);
            nx1 = std::min(bg1.width - 1, m.x0 + m.width - 1 + spec.neighborhood_d);
            ny0 = std::max(0, m.y0 - spec.neighborhood_d);
            ny1 = std::min(bg1.height - 1, m.y0 + m.height - 1 + spec.neighborhood_d);
        }
        double sum = 0.0, sum2 = 0.0;
        long n = 0;
        for (int y = ny0; y <= ny1; ++y)
            for (int x = nx0; x <= nx1; ++x) {
                if (!bg1.is_valid(y, x)) continue;
                const double v = bg1.at(y, x);
                sum += v;
                sum2 += v * v;
                ++n;
            }
        if (n == 0) { // fully filled region: fall back to the fill value
            sum = ctx.global_mean;
            sum2 = ctx.global_mean * ctx.global_mean;
            n = 1;
        }
        model.mu_lb1 = sum / n;
        model.sigma_lb1 = std::sqrt(std::max(0.0, sum2 / n - model.mu_lb1 * model.mu_lb1));
        ctx.intensity.push_back(std::move(model));
    }
    return ctx;
}

ImageF render_frame(const RenderContext& ctx, int t, FrameAnnotation* annotation) {
    if (t < 0 || t >= ctx.spec.frames) throw std::invalid_argument("render_frame: frame index out of range");

    ImageF frame = warp(ctx.global, ctx.pose.absolute[t], ctx.spec.fov_height, ctx.spec.fov_width,
                        ctx.global_mean);

    const int r = ctx.blur_kernel / 2;
    std::vector<ImageF> templates(ctx.tracks.size());
    std::vector<char> drawn(ctx.tracks.size(), 0);

    for (size_t i = 0; i < ctx.tracks.size(); ++i) {
        const auto& track = ctx.tracks[i];
        templates[i] = render_gaussian(track.appearance[t], ctx.spec.render_threshold);
        const double e = target_intensity(ctx.intensity[i], t + 1);
        if (!(e > 0.0)) continue;

        int bx0 = 0, bx1 = 0, by0 = 0, by1 = 0;
        if (!blend_into(frame, templates[i], e, track.traj_cur[t], &bx0, &bx1, &by0, &by1)) continue;
        drawn[i] = 1;

        // Blur the composited patch: read support + 2r, write support + r, so
        // pixels beyond the blur radius stay bit-identical to the background.
        const int px0 = std::max(0, bx0 - 2 * r);
        const int px1 = std::min(frame.width - 1, bx1 + 2 * r);
        const int py0 = std::max(0, by0 - 2 * r);
        const int py1 = std::min(frame.height - 1, by1 + 2 * r);
        if (r > 0) {
            ImageF patch(py1 - py0 + 1, px1 - px0 + 1);
            for (int y = py0; y <= py1; ++y)
                for (int x = px0; x <= px1; ++x) patch.at(y - py0, x - px0) = frame.at(y, x);
            const ImageF blurred = gaussian_blur_patch(patch, ctx.blur_kernel, ctx.blur_sigma);
            const int wx0 = std::max(0, bx0 - r);
            const int wx1 = std::min(frame.width - 1, bx1 + r);
            const int wy0 = std::max(0, by0 - r);
            const int wy1 = std::min(frame.height - 1, by1 + r);
            for (int y = wy0; y <= wy1; ++y)
                for (int x = wx0; x <= wx1; ++x) frame.at(y, x) = blurred.at(y - py0, x - px0);
        }
    }

    if (!frame.all_finite()) throw std::runtime_error("render_frame: non-finite pixel produced");

    if (annotation) {
        annotation->frame = t + 1;
        annotation->instances.clear();
        for (size_t i = 0; i < ctx.tracks.size(); ++i) {
            if (!drawn[i]) continue;
            const auto& track = ctx.tracks[i];
            MaskPatch mask = place_mask(templates[i], track.traj_cur[t], ctx.spec.mask_threshold,
                                        ctx.spec.fov_height, ctx.spec.fov_width);
            if (mask.data.empty()) continue;

            InstanceAnnotation inst;
            inst.id = track.id;
            inst.centroid = track.traj_cur[t];
            inst.visible = true;
            int mx0 = mask.width, mx1 = -1, my0 = mask.height, my1 = -1;
            for (int y = 0; y < mask.height; ++y)
                for (int x = 0; x < mask.width; ++x)
                    if (mask.get(y, x)) {
                        mx0 = std::min(mx0, x);
                        mx1 = std::max(mx1, x);
                        my0 = std::min(my0, y);
                        my1 = std::max(my1, y);
                    }
            inst.bbox_x = mask.x0 + mx0;
            inst.bbox_y = mask.y0 + my0;
            inst.bbox_w = mx1 - mx0 + 1;
            inst.bbox_h = my1 - my0 + 1;
            inst.scr = scr(frame, mask, ctx.spec.neighborhood_d);
            inst.mask = std::move(mask);
            annotation->instances.push_back(std::move(inst));
        }
    }
    return frame;
}

RenderedSequence render_sequence(const SequenceSpec& spec, ImageF global_background) {
    RenderedSequence seq;
    seq.ctx = prepare_render(spec, std::move(global_background));
    seq.frames.resize(static_cast<size_t>(spec.frames));
    seq.annotations.resize(static_cast<size_t>(spec.frames));
    for (int t = 0; t < spec.frames; ++t)
        seq.frames[t] = render_frame(seq.ctx, t, &seq.annotations[t]);
    return seq;
}

} // namespace irsim
