#include "irsim/target.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim {

void GaussianSpec::validate() const {
    if (!(w > 0.0 && h >= w)) throw std::invalid_argument("GaussianSpec: requires h >= w > 0");
    if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("GaussianSpec: sigma must be in (0,1]");
}

ImageF render_gaussian(const GaussianSpec& spec, double support_threshold) {
    spec.validate();
    if (!(support_threshold > 0.0 && support_threshold < 1.0))
        throw std::invalid_argument("render_gaussian: support_threshold must be in (0,1)");

    const double su = spec.sigma * spec.h / 2.0; // rows
    const double sv = spec.sigma * spec.w / 2.0; // cols
    const double c2 = 2.0 * std::log(1.0 / support_threshold); // (du/su)^2+(dv/sv)^2 <= c2
    const int ru = static_cast<int>(std::floor(su * std::sqrt(c2)));
    const int rv = static_cast<int>(std::floor(sv * std::sqrt(c2)));

    ImageF patch(2 * ru + 1, 2 * rv + 1, 0.0);
    for (int du = -ru; du <= ru; ++du) {
        for (int dv = -rv; dv <= rv; ++dv) {
            const double q = (du / su) * (du / su) + (dv / sv) * (dv / sv);
            const double v = std::exp(-0.5 * q);
            patch.at(du + ru, dv + rv) = (v >= support_threshold) ? v : 0.0;
        }
    }
    patch.at(ru, rv) = 1.0;
    return patch;
}

std::vector<GaussianSpec> interpolate_appearance(
    const std::vector<std::pair<int, GaussianSpec>>& keys, int frames, Rng& rng,
    const TargetConfig& cfg) {
    if (keys.size() < 2) throw std::invalid_argument("interpolate_appearance: need at least 2 keys");
    if (keys.front().first != 1 || keys.back().first != frames)
        throw std::invalid_argument("interpolate_appearance: keys must span frames 1..T");
    for (size_t i = 1; i < keys.size(); ++i)
        if (keys[i].first <= keys[i - 1].first)
            throw std::invalid_argument("interpolate_appearance: key frames must be strictly increasing");
    for (const auto& k : keys) k.second.validate();

    std::vector<GaussianSpec> out(static_cast<size_t>(frames));
    auto interp_scalar = [&](double a, double b, int n, std::vector<double>& dst) {
        CurveSpec c;
        c.start = {0.0, a};
        c.end = {static_cast<double>(n - 1), b};
        c.order = rng.uniform(cfg.curve_order_min, cfg.curve_order_max);
        c.param_is_x = true;
        c.direction_sign = rng.sign();
        const auto pts = curve_sample(c, n);
        dst.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) dst[i] = pts[i].y;
    };

    for (size_t k = 0; k + 1 < keys.size(); ++k) {
        const int t0 = keys[k].first - 1;
        const int t1 = keys[k + 1].first - 1;
        const int n = t1 - t0 + 1;
        std::vector<double> hs, ws, ss;
        interp_scalar(keys[k].second.h, keys[k + 1].second.h, n, hs);
        interp_scalar(keys[k].second.w, keys[k + 1].second.w, n, ws);
        interp_scalar(keys[k].second.sigma, keys[k + 1].second.sigma, n, ss);
        for (int i = 0; i < n; ++i) {
            double h = std::clamp(hs[i], cfg.axis_min, cfg.axis_max);
            double w = std::clamp(ws[i], cfg.axis_min, cfg.axis_max);
            if (w > h) std::swap(h, w);
            out[t0 + i] = GaussianSpec{h, w, std::clamp(ss[i], cfg.sigma_min, cfg.sigma_max)};
        }
    }
    return out;
}

std::vector<Vec2> synthesize_trajectory(Rng& rng, int frames, int swerves, Vec2 fov,
                                        int smooth_window, const TargetConfig& cfg) {
    if (swerves < 0 || swerves > 2) throw std::invalid_argument("synthesize_trajectory: swerves must be 0, 1 or 2");
    const int segments = swerves + 1;
    if (frames < 2 * segments)
        throw std::invalid_argument("synthesize_trajectory: frames must be >= 2*(swerves+1)");

    // Junction frames: even split with +-20% jitter, each segment >= 2 frames.
    std::vector<int> bounds; // 0-based segment boundaries, bounds[0]=0, bounds[segments]=frames-1
    bounds.push_back(0);
    for (int k = 1; k < segments; ++k) {
        const double base = static_cast<double>(frames - 1) * k / segments;
        const double jitter = rng.uniform(-0.2, 0.2) * (frames - 1) / segments;
        int j = static_cast<int>(std::lround(base + jitter));
        j = std::clamp(j, bounds.back() + 1, frames - 1 - (segments - k));
        bounds.push_back(j);
    }
    bounds.push_back(frames - 1);

    const Vec2 start{rng.uniform(cfg.start_margin, 1.0 - cfg.start_margin) * fov.x,
                     rng.uniform(cfg.start_margin, 1.0 - cfg.start_margin) * fov.y};

    std::vector<Vec2> raw(static_cast<size_t>(frames));
    Vec2 cursor = start;
    for (int k = 0; k < segments; ++k) {
        const int n = bounds[k + 1] - bounds[k] + 1;
        const double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        CurveSpec c;
        c.start = cursor;
        c.end = {cursor.x + speed * (n - 1) * std::cos(heading),
                 cursor.y + speed * (n - 1) * std::sin(heading)};
        c.order = rng.uniform(cfg.curve_order_min, cfg.curve_order_max);
        c.param_is_x = rng.bernoulli(0.5);
        c.direction_sign = rng.sign();
        const auto pts = curve_sample(c, n);
        for (int i = 0; i < n; ++i) raw[bounds[k] + i] = pts[i];
        cursor = c.end;
    }

    if (swerves == 0 || smooth_window <= 0) return raw;

    // 1D moving-average smoothing of each coordinate around every junction.
    std::vector<Vec2> out = raw;
    for (int k = 1; k < segments; ++k) {
        const int j = bounds[k];
        for (int t = std::max(0, j - smooth_window); t <= std::min(frames - 1, j + smooth_window); ++t) {
            const int lo = std::max(0, t - smooth_window);
            const int hi = std::min(frames - 1, t + smooth_window);
            double sx = 0.0, sy = 0.0;
            for (int i = lo; i <= hi; ++i) {
                sx += raw[i].x;
                sy += raw[i].y;
            }
            out[t] = {sx / (hi - lo + 1), sy / (hi - lo + 1)};
        }
    }
    return out;
}

std::vector<Vec2> transform_to_current(const std::vector<Vec2>& traj_ref1,
                                       const std::vector<Homography>& chain) {
    if (traj_ref1.size() != chain.size())
        throw std::invalid_argument("transform_to_current: chain length must equal trajectory length");
    std::vector<Vec2> out(traj_ref1.size());
    for (size_t t = 0; t < traj_ref1.size(); ++t) out[t] = chain[t].apply(traj_ref1[t]);
    return out;
}

TargetTrack make_target_track(int id, Rng& rng, int frames, Vec2 fov,
                              const std::vector<Homography>& rel_chain,
                              const TargetConfig& cfg) {
    if (static_cast<int>(rel_chain.size()) != frames)
        throw std::invalid_argument("make_target_track: chain length must equal frames");

    TargetTrack track;
    track.id = id;
    track.swerves = cfg.has_fixed_swerves ? cfg.fixed_swerves
                                          : static_cast<int>(rng.uniform_int(cfg.swerves_min, cfg.swerves_max));
    track.scr = cfg.has_fixed_scr ? cfg.fixed_scr : rng.uniform(cfg.scr_min, cfg.scr_max);

    auto draw_spec = [&]() {
        if (cfg.has_fixed_appearance) return cfg.fixed_appearance;
        double a = rng.uniform(cfg.axis_min, cfg.axis_max);
        double b = rng.uniform(cfg.axis_min, cfg.axis_max);
        if (b > a) std::swap(a, b);
        return GaussianSpec{a, b, rng.uniform(cfg.sigma_min, cfg.sigma_max)};
    };

    const int kmax = std::min(cfg.keys_max, std::max(cfg.keys_min, frames));
    const int kmin = std::min(cfg.keys_min, kmax);
    int K = (frames < 2) ? 1 : static_cast<int>(rng.uniform_int(kmin, kmax));
    if (frames >= 2 && K < 2) K = 2;

    if (frames == 1) {
        track.key_appearances = {{1, draw_spec()}};
        track.appearance = {track.key_appearances[0].second};
    } else {
        // Interior key frames: distinct draws in (1, T), sorted.
        std::vector<int> interior;
        while (static_cast<int>(interior.size()) < K - 2) {
            const int f = static_cast<int>(rng.uniform_int(2, frames - 1));
            if (std::find(interior.begin(), interior.end(), f) == interior.end()) interior.push_back(f);
            if (frames - 2 <= static_cast<int>(interior.size())) break;
        }
        std::sort(interior.begin(), interior.end());
        track.key_appearances.emplace_back(1, draw_spec());
        for (int f : interior) track.key_appearances.emplace_back(f, draw_spec());
        track.key_appearances.emplace_back(frames, draw_spec());
        track.appearance = interpolate_appearance(track.key_appearances, frames, rng, cfg);
    }

    if (cfg.has_fixed_position) {
        track.traj_ref1.assign(static_cast<size_t>(frames), cfg.fixed_position);
    } else if (frames == 1) {
        track.traj_ref1 = {Vec2{fov.x / 2.0, fov.y / 2.0}};
    } else {
        track.traj_ref1 = synthesize_trajectory(rng, frames, track.swerves, fov, cfg.smooth_window, cfg);
    }
    track.traj_cur = transform_to_current(track.traj_ref1, rel_chain);

    // Acceleration sequence a_nt: smooth low-order curve inside [-amp, amp].
    track.accel.assign(static_cast<size_t>(frames), 0.0);
    if (!cfg.zero_accel && cfg.accel_amplitude > 0.0 && frames >= 2) {
        CurveSpec c;
        c.start = {0.0, rng.uniform(-cfg.accel_amplitude, cfg.accel_amplitude)};
        c.end = {static_cast<double>(frames - 1), rng.uniform(-cfg.accel_amplitude, cfg.accel_amplitude)};
        c.order = rng.uniform(1.0, 2.0);
        c.param_is_x = true;
        c.direction_sign = rng.sign();
        const auto pts = curve_sample(c, frames);
        for (int t = 0; t < frames; ++t) track.accel[t] = pts[t].y;
    }
    return track;
}

} // namespace irsim
