#pragma once

#include <vector>

#include "irsim/image.hpp"
#include "irsim/rng.hpp"

namespace irsim {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

enum class AttitudeMode { Constant, Linear };

// Low-order curve segment: the parameter coordinate advances linearly from
// start to end while the other coordinate follows u^p (direction_sign = +1)
// or its mirrored form 1-(1-u)^p (direction_sign = -1), u in [0,1].
struct CurveSpec {
    Vec2 start;
    Vec2 end;
    double order = 2.0; // p in (0,3)
    bool param_is_x = true;
    int direction_sign = 1;
};

struct AttitudeConfig {
    double p_constant = 0.5;      // probability of the constant mode
    double constant_range = 10.0; // constant angles drawn from [-range, range]
    double delta_range = 5.0;     // linear-mode total change drawn from [-range, range]
};

struct TranslationConfig {
    double speed_min = 1.0 / 20.0; // per-axis |end-start|/T bounds, px/frame
    double speed_max = 2.0;
    double order_min = 1.0; // curve order draw range; [1,2] keeps per-frame
    double order_max = 2.0; // steps within 2x the mean axis speed
};

struct PoseSample {
    int t = 1;           // 1-based frame index
    Vec3 attitude;       // pitch, yaw, roll in degrees
    Vec2 translation;    // crop origin in global-image pixels
};

struct PoseSequence {
    std::vector<PoseSample> samples;
    // absolute[t]: global-image coords -> frame-t local coords
    std::vector<Homography> absolute;
    // relative[t] = absolute[t] * absolute[0]^-1: frame-1 local -> frame-t
    // local coords; relative[0] is the identity.
    std::vector<Homography> relative;
};

struct MotionSpec {
    int frames = 200;
    int fov_height = 1024;
    int fov_width = 1024;
    int global_height = 0; // background image size; anchors the crop path
    int global_width = 0;
    double focal = 0.0;    // 0 -> max(global dims)
    AttitudeConfig attitude;
    TranslationConfig translation;
    bool has_fixed_attitude = false;
    Vec3 fixed_attitude;          // used when has_fixed_attitude
    bool has_fixed_translation = false;
    std::vector<Vec2> fixed_translation; // explicit crop origins, length = frames
};

AttitudeMode draw_attitude_mode(Rng& rng, double p_constant = 0.5);

// Per-frame attitude triples. Constant mode holds one draw from
// [-constant_range, constant_range]^3; linear mode interpolates from a drawn
// start to start+delta with per-angle delta in [-delta_range, delta_range].
std::vector<Vec3> attitude_schedule(AttitudeMode mode, Rng& rng, int frames,
                                    const AttitudeConfig& cfg = {});

// T points along the curve; point[0] == start and point[T-1] == end exactly.
std::vector<Vec2> curve_sample(const CurveSpec& spec, int frames);

// Random translation path starting at (0,0) whose per-axis endpoint speed
// |end-start|/T lies in [speed_min, speed_max], signs drawn independently.
std::vector<Vec2> translation_path(Rng& rng, int frames, const TranslationConfig& cfg = {});

// Draws attitude + translation schedules and builds the per-frame homography
// chains (absolute and frame-1-relative).
PoseSequence pose_sequence(const MotionSpec& spec, Rng& rng);

} // namespace irsim
