#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsim/motion.hpp"
#include "irsim/target.hpp"

namespace irsim {

inline constexpr const char* kVersion = "1.0.0";

// Seeded fallback background: multi-octave smoothed value noise plus a few
// broad bright blobs standing in for cloud cover.
struct SyntheticBackgroundSpec {
    int height = 1536;
    int width = 1536;
    double base = 2000.0;
    double amplitude = 1200.0;
    int octaves = 3;
    double cell = 96.0; // coarsest noise cell size in pixels
    int clouds = 2;
    double cloud_amplitude = 900.0;
    double noise_sigma = 0.0; // extra per-pixel white noise
};

struct BlurSpec {
    int kernel = 0;     // 0 -> drawn from {3,5,7}
    double sigma = 0.0; // <= 0 -> drawn from [0.2, 0.6]
};

// Declarative recipe for one synthetic sequence. Unset (sentinel) fields are
// drawn from their configured ranges with the sequence RNG stream; the fully
// resolved draw is written next to the generated data.
struct SequenceSpec {
    std::uint64_t seed = 0;
    std::string name = "seq";
    int frames = 200;
    int fov_height = 1024;
    int fov_width = 1024;

    std::string background_path; // empty -> synthetic fallback
    SyntheticBackgroundSpec synthetic;

    double focal = 0.0; // 0 -> max(global image dims)
    AttitudeConfig attitude;
    bool has_fixed_attitude = false;
    Vec3 fixed_attitude;
    TranslationConfig translation;
    bool static_background = false; // pin attitude and translation to frame 1

    int target_count = -1;             // -1 -> drawn from {1..6}
    TargetConfig target_defaults;
    std::vector<TargetConfig> targets; // optional per-target overrides

    BlurSpec blur;
    double mask_threshold = 0.75;  // annotation mask, fraction of peak
    double render_threshold = 0.05; // rendered template support, fraction of peak
    int neighborhood_d = 20;       // SCR local-background extension
};

// Table I range validation; violations are collected into `errors`. Returns
// true when the spec is inside all configured ranges.
bool validate_spec(const SequenceSpec& spec, std::vector<std::string>* errors);

// JSON round trip (used by the CLI spec files and reproducibility records).
std::string spec_to_json(const SequenceSpec& spec);
SequenceSpec spec_from_json(const std::string& text);
SequenceSpec load_spec_file(const std::string& path);

} // namespace irsim
