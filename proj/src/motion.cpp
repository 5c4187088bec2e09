#include "irsim/motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim {

AttitudeMode draw_attitude_mode(Rng& rng, double p_constant) {
    return rng.bernoulli(p_constant) ? AttitudeMode::Constant : AttitudeMode::Linear;
}

std::vector<Vec3> attitude_schedule(AttitudeMode mode, Rng& rng, int frames, const AttitudeConfig& cfg) {
    if (frames < 1) throw std::invalid_argument("attitude_schedule: frames must be >= 1");
    std::vector<Vec3> out(static_cast<size_t>(frames));
    if (mode == AttitudeMode::Constant) {
        const Vec3 a{rng.uniform(-cfg.constant_range, cfg.constant_range),
                     rng.uniform(-cfg.constant_range, cfg.constant_range),
                     rng.uniform(-cfg.constant_range, cfg.constant_range)};
        std::fill(out.begin(), out.end(), a);
        return out;
    }
    const Vec3 start{rng.uniform(-cfg.constant_range, cfg.constant_range),
                     rng.uniform(-cfg.constant_range, cfg.constant_range),
                     rng.uniform(-cfg.constant_range, cfg.constant_range)};
    const Vec3 delta{rng.uniform(-cfg.delta_range, cfg.delta_range),
                     rng.uniform(-cfg.delta_range, cfg.delta_range),
                     rng.uniform(-cfg.delta_range, cfg.delta_range)};
    for (int t = 0; t < frames; ++t) {
        const double u = (frames == 1) ? 0.0 : static_cast<double>(t) / (frames - 1);
        out[t] = {start.x + delta.x * u, start.y + delta.y * u, start.z + delta.z * u};
    }
    return out;
}

std::vector<Vec2> curve_sample(const CurveSpec& spec, int frames) {
    if (frames < 2) throw std::invalid_argument("curve_sample: frames must be >= 2");
    if (!(spec.order > 0.0 && spec.order < 3.0))
        throw std::invalid_argument("curve_sample: order must lie in (0,3)");

    std::vector<Vec2> out(static_cast<size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        const double u = static_cast<double>(t) / (frames - 1);
        const double s = (spec.direction_sign >= 0) ? std::pow(u, spec.order)
                                                    : 1.0 - std::pow(1.0 - u, spec.order);
        const double pu = spec.param_is_x ? u : s;
        const double pv = spec.param_is_x ? s : u;
        out[t] = {spec.start.x + (spec.end.x - spec.start.x) * pu,
                  spec.start.y + (spec.end.y - spec.start.y) * pv};
    }
    out.front() = spec.start;
    out.back() = spec.end;
    return out;
}

std::vector<Vec2> translation_path(Rng& rng, int frames, const TranslationConfig& cfg) {
    if (frames < 2) throw std::invalid_argument("translation_path: frames must be >= 2");
    const double vx = rng.uniform(cfg.speed_min, cfg.speed_max) * rng.sign();
    const double vy = rng.uniform(cfg.speed_min, cfg.speed_max) * rng.sign();
    CurveSpec c;
    c.start = {0.0, 0.0};
    c.end = {vx * frames, vy * frames};
    c.order = rng.uniform(cfg.order_min, cfg.order_max);
    c.param_is_x = rng.bernoulli(0.5);
    c.direction_sign = rng.sign();
    return curve_sample(c, frames);
}

PoseSequence pose_sequence(const MotionSpec& spec, Rng& rng) {
    if (spec.frames < 1) throw std::invalid_argument("pose_sequence: frames must be >= 1");
    if (spec.global_height <= 0 || spec.global_width <= 0)
        throw std::invalid_argument("pose_sequence: global image size must be set");

    std::vector<Vec3> attitudes;
    if (spec.has_fixed_attitude) {
        attitudes.assign(static_cast<size_t>(spec.frames), spec.fixed_attitude);
    } else {
        const AttitudeMode mode = draw_attitude_mode(rng, spec.attitude.p_constant);
        attitudes = attitude_schedule(mode, rng, spec.frames, spec.attitude);
    }

    std::vector<Vec2> origins;
    if (spec.has_fixed_translation) {
        if (static_cast<int>(spec.fixed_translation.size()) != spec.frames)
            throw std::invalid_argument("pose_sequence: fixed translation length != frames");
        origins = spec.fixed_translation;
    } else if (spec.frames == 1) {
        origins = {Vec2{(spec.global_width - spec.fov_width) / 2.0,
                        (spec.global_height - spec.fov_height) / 2.0}};
    } else {
        std::vector<Vec2> path = translation_path(rng, spec.frames, spec.translation);
        // Center the drift so the crop window stays inside the global image
        // as much as the drift allows; warp fill covers any excursion.
        const Vec2 mid{(path.front().x + path.back().x) / 2.0, (path.front().y + path.back().y) / 2.0};
        const Vec2 anchor{(spec.global_width - spec.fov_width) / 2.0 - mid.x,
                          (spec.global_height - spec.fov_height) / 2.0 - mid.y};
        origins.resize(path.size());
        for (size_t i = 0; i < path.size(); ++i)
            origins[i] = {path[i].x + anchor.x, path[i].y + anchor.y};
    }

    const double focal = (spec.focal > 0.0) ? spec.focal
                                            : static_cast<double>(std::max(spec.global_width, spec.global_height));
    const Vec2 pp{spec.global_width / 2.0, spec.global_height / 2.0};

    PoseSequence seq;
    seq.samples.resize(static_cast<size_t>(spec.frames));
    seq.absolute.resize(static_cast<size_t>(spec.frames));
    seq.relative.resize(static_cast<size_t>(spec.frames));
    for (int t = 0; t < spec.frames; ++t) {
        seq.samples[t] = PoseSample{t + 1, attitudes[t], origins[t]};
        seq.absolute[t] = build_homography(attitudes[t].x, attitudes[t].y, attitudes[t].z,
                                           -origins[t].x, -origins[t].y, focal, pp);
    }
    const Homography ref_inv = seq.absolute[0].inverse();
    for (int t = 0; t < spec.frames; ++t) seq.relative[t] = seq.absolute[t].compose(ref_inv);
    return seq;
}

} // namespace irsim
