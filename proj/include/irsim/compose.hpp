#pragma once

#include <vector>

#include "irsim/image.hpp"
#include "irsim/spec.hpp"
#include "irsim/target.hpp"

namespace irsim {

struct InstanceAnnotation {
    int id = 0;
    double bbox_x = 0, bbox_y = 0, bbox_w = 0, bbox_h = 0; // tight box of the mask
    Vec2 centroid;   // continuous trajectory position
    MaskPatch mask;  // clipped to the frame; empty when not visible
    bool visible = false;
    double scr = 0.0; // measured on the final frame
};

struct FrameAnnotation {
    int frame = 1; // 1-based
    std::vector<InstanceAnnotation> instances;
};

struct IntensityModel {
    double scr = 10.0;       // requested SCR at frame 1
    double mu_lb1 = 0.0;     // frame-1 local background mean
    double sigma_lb1 = 0.0;  // frame-1 local background std dev
    std::vector<double> accel; // a_nt per frame; empty means 0
};

// E_nt = (scr * sigma_lb1 + mu_lb1) * (1 + a_nt). `t` is 1-based.
double target_intensity(const IntensityModel& model, int t);

// Adaptive weighted superposition of a target template into the background
// at a fractional position: the template is bilinearly splatted onto the
// pixel grid, scaled by `intensity`, and blended as
//   out = Norm(I_T) .* I_T + (1 - Norm(I_T)) .* background
// with Norm(I) = I / max(I). Positions whose splat support misses the frame
// leave the background untouched (visible=false).
ImageF blend_patch(const ImageF& background, const ImageF& tmpl, double intensity,
                   Vec2 position, bool* visible = nullptr);

// Normalized 2D Gaussian blur (kernel sums to 1), reflect padding.
ImageF gaussian_blur_patch(const ImageF& patch, int kernel, double sigma);

// Everything drawn and precomputed for one sequence; frames can then be
// rendered independently (and in parallel) with render_frame.
struct RenderContext {
    SequenceSpec spec;     // input spec (with seed)
    ImageF global;         // global background image
    double global_mean = 0.0;
    PoseSequence pose;
    std::vector<TargetTrack> tracks;
    std::vector<IntensityModel> intensity;
    int blur_kernel = 3;
    double blur_sigma = 0.3;
};

RenderContext prepare_render(const SequenceSpec& spec, ImageF global_background);

// Renders frame t (0-based) and its annotation. Pure function of the context.
ImageF render_frame(const RenderContext& ctx, int t, FrameAnnotation* annotation);

struct RenderedSequence {
    RenderContext ctx;
    std::vector<ImageF> frames;
    std::vector<FrameAnnotation> annotations;
};

// Convenience wrapper holding all frames in memory.
RenderedSequence render_sequence(const SequenceSpec& spec, ImageF global_background);

// Annotation mask for one target at one frame: thresholded template support
// placed at the rounded position, clipped to the frame.
MaskPatch place_mask(const ImageF& tmpl, Vec2 position, double threshold,
                     int frame_height, int frame_width);

} // namespace irsim
