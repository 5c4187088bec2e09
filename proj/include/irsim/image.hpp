#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace irsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Grayscale image, row-major doubles. `valid` is an optional per-pixel mask:
// empty means every pixel originates from source data; otherwise 1 marks
// source pixels and 0 marks fill (out-of-bounds) pixels.
struct ImageF {
    int height = 0;
    int width = 0;
    std::vector<double> data;
    std::vector<std::uint8_t> valid;

    ImageF() = default;
    ImageF(int h, int w, double fill = 0.0) : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

    bool has_mask() const { return !valid.empty(); }
    bool is_valid(int y, int x) const {
        return valid.empty() || valid[static_cast<size_t>(y) * width + x] != 0;
    }
    void ensure_mask() {
        if (valid.empty()) valid.assign(data.size(), 1);
    }

    bool in_bounds(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }

    // Mean over valid pixels; falls back to all pixels when none are valid.
    double mean() const;
    bool all_finite() const;
};

// Binary patch anchored at (x0,y0) in frame coordinates; nonzero bytes mark
// target pixels.
struct MaskPatch {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    bool empty() const {
        for (auto v : data)
            if (v) return false;
        return true;
    }
    int count() const {
        int n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }
    bool get(int y, int x) const { return data[static_cast<size_t>(y) * width + x] != 0; }
};

// 3x3 plane projective map, row-major, normalized so m[8] == 1.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Homography identity() { return Homography{}; }
    static Homography translation(double dx, double dy);

    double det() const;
    void normalize();           // scales so m[8] == 1; throws if m[8] ~ 0
    Homography inverse() const; // throws on |det| < 1e-12
    // Composition: (a.compose(b)).apply(p) == a.apply(b.apply(p)).
    Homography compose(const Homography& rhs) const;
    Vec2 apply(const Vec2& p) const;
};

// Pinhole-model homography T(tx,ty) * K * Rz(roll) * Ry(yaw) * Rx(pitch) * K^-1.
// Angles in degrees, |angle| <= 45. Translation in image-plane pixels,
// applied after the rotational part.
Homography build_homography(double pitch_deg, double yaw_deg, double roll_deg,
                            double tx, double ty,
                            double focal_px, Vec2 principal_point);

// Inverse-mapped bilinear warp: out(p) = img sampled at h^-1 * p.
// Samples falling outside the source get `fill` and valid=0; samples touching
// an invalid source pixel with nonzero weight are marked invalid as well.
ImageF warp(const ImageF& img, const Homography& h, int out_height, int out_width, double fill);

// Bilinear-resampled window of size (height,width) anchored at fractional
// `origin` (x,y). Out-of-source pixels are filled with the source mean.
ImageF crop(const ImageF& img, Vec2 origin, int out_height, int out_width);

// Bilinear read at fractional coordinates; returns false when the sample
// footprint leaves the image (value is then left untouched).
bool sample_bilinear(const ImageF& img, double x, double y, double* value, bool* touches_invalid);

} // namespace irsim
