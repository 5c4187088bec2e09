#pragma once

#include <vector>

#include "irsim/image.hpp"

namespace irsim {

enum class ComplexityLevel { Easy, Medium, Complex, Extreme };
enum class SpeedLevel { Slow, Medium, Fast, VeryFast };
enum class SceneLevel { Easy, Medium, Complex };

struct ComplexityReport {
    std::vector<double> per_frame;
    double mean = 0.0;
    ComplexityLevel level = ComplexityLevel::Easy;
};

struct TargetAttributes {
    double scr = 0.0;
    SpeedLevel speed_level = SpeedLevel::Slow;
    int swerves = 0;
    double area = 0.0;
    double eccentricity = 0.0;
    int shape_bin = 0; // S0..S4
};

// Signal-to-clutter ratio |mu_t - mu_b| / sigma_b. The local background is
// the mask bbox expanded by d on every side (clipped to the frame) minus the
// target pixels; sigma_b is the population std dev; fill pixels (invalid in
// the frame mask) are excluded. Returns +inf when sigma_b == 0.
double scr(const ImageF& frame, const MaskPatch& mask, int d = 20);

// Entropy-variance complexity of one frame: values are min-max quantized to
// 256 gray levels and C = -sum_s (s - mean_s) p_s ln(p_s), with 0 ln 0 = 0.
double frame_complexity(const ImageF& frame);

ComplexityReport background_complexity(const std::vector<ImageF>& frames);

ComplexityLevel complexity_level(double mean_complexity);

double mean_speed(const std::vector<Vec2>& path); // mean per-frame displacement

SpeedLevel speed_level(const std::vector<Vec2>& path);
SpeedLevel speed_level_of(double mean_px_per_frame);

double eccentricity(double h, double w); // sqrt(1 - (w/h)^2), h >= w

int shape_bin(double e); // S0..S4 over [0,.2),[.2,.4),[.4,.6),[.6,.8),[.8,1]

int scr_bin(double scr_value); // 0..3 over [0,3),[3,6),[6,10),[10,inf)

// Scene difficulty from mean target SCR and mean background complexity:
// easy when SCR > 6 and complexity < 1000, complex when SCR < 6 and
// complexity > 1000, medium otherwise.
SceneLevel scene_level(double mean_scr, double mean_complexity);

const char* to_string(ComplexityLevel);
const char* to_string(SpeedLevel);
const char* to_string(SceneLevel);

} // namespace irsim
