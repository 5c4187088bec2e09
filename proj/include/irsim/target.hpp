#pragma once

#include <utility>
#include <vector>

#include "irsim/image.hpp"
#include "irsim/motion.hpp"
#include "irsim/rng.hpp"

namespace irsim {

// Anisotropic Gaussian target: major/minor axis lengths in pixels and the
// shared shape scalar. Axis convention: the major axis h runs along image
// rows (y), the minor axis w along columns (x).
struct GaussianSpec {
    double h = 3.0;     // major axis, h >= w
    double w = 3.0;     // minor axis
    double sigma = 0.5; // in (0,1]; std devs are sigma*h/2 and sigma*w/2

    void validate() const;
};

struct TargetConfig {
    double axis_min = 1.0;
    double axis_max = 9.0;
    double sigma_min = 0.1;
    double sigma_max = 1.0;
    int keys_min = 2; // number of key appearances K
    int keys_max = 5;
    int swerves_min = 0;
    int swerves_max = 2;
    double scr_min = 1.0;
    double scr_max = 20.0;
    double accel_amplitude = 0.2; // a_nt drawn as a smooth curve in [-amp, amp]
    double speed_min = 1.0 / 20.0;
    double speed_max = 2.0;
    double curve_order_min = 0.5;
    double curve_order_max = 2.5;
    int smooth_window = 5;
    double start_margin = 0.1; // trajectory start at least this fraction inside the FOV

    // Optional per-target pins (tests / controlled sequences).
    bool has_fixed_appearance = false;
    GaussianSpec fixed_appearance;
    bool has_fixed_scr = false;
    double fixed_scr = 10.0;
    bool has_fixed_swerves = false;
    int fixed_swerves = 0;
    bool has_fixed_position = false;
    Vec2 fixed_position; // static target pinned at this frame-1 position
    bool zero_accel = false;
};

struct TargetTrack {
    int id = 0;
    std::vector<std::pair<int, GaussianSpec>> key_appearances; // (1-based frame, spec)
    std::vector<GaussianSpec> appearance; // per frame
    std::vector<Vec2> traj_ref1;          // frame-1 reference
    std::vector<Vec2> traj_cur;           // current-frame reference
    std::vector<double> accel;            // a_nt per frame
    int swerves = 0;
    double scr = 10.0; // requested SCR at frame 1
};

// Axis-aligned Gaussian template on an odd-sized patch, peak exactly 1 at the
// center pixel; values below support_threshold are clipped to 0 and the patch
// is sized to the thresholded support.
ImageF render_gaussian(const GaussianSpec& spec, double support_threshold);

// Per-frame appearance between key frames; each of (h, w, sigma) follows an
// independently drawn low-order curve. Values are clamped to the configured
// ranges and h >= w is restored by swapping where interpolation crosses.
std::vector<GaussianSpec> interpolate_appearance(
    const std::vector<std::pair<int, GaussianSpec>>& keys, int frames, Rng& rng,
    const TargetConfig& cfg = {});

// S+1 low-order-curve segments joined end-to-end, each junction smoothed by a
// centered moving average over +-smooth_window frames.
std::vector<Vec2> synthesize_trajectory(Rng& rng, int frames, int swerves,
                                        Vec2 fov, int smooth_window,
                                        const TargetConfig& cfg = {});

// Projective transfer of a frame-1-reference trajectory through the
// per-frame homography chain (chain[0] must correspond to frame 1).
std::vector<Vec2> transform_to_current(const std::vector<Vec2>& traj_ref1,
                                       const std::vector<Homography>& chain);

// Draws a complete track (keys, per-frame appearance, trajectory in both
// references, acceleration signal) from one owned RNG stream.
TargetTrack make_target_track(int id, Rng& rng, int frames, Vec2 fov,
                              const std::vector<Homography>& rel_chain,
                              const TargetConfig& cfg = {});

} // namespace irsim
