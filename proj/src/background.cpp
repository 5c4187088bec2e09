#include "irsim/background.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim {

namespace {

// Bilinear value noise: random amplitudes on a coarse lattice, sampled
// smoothly between lattice points.
void add_value_noise(ImageF& img, Rng& rng, double cell, double amplitude) {
    const int gw = static_cast<int>(std::ceil(img.width / cell)) + 2;
    const int gh = static_cast<int>(std::ceil(img.height / cell)) + 2;
    std::vector<double> grid(static_cast<size_t>(gw) * gh);
    for (auto& v : grid) v = rng.uniform(-1.0, 1.0);

    for (int y = 0; y < img.height; ++y) {
        const double gy = y / cell;
        const int y0 = static_cast<int>(gy);
        const double fy = gy - y0;
        for (int x = 0; x < img.width; ++x) {
            const double gx = x / cell;
            const int x0 = static_cast<int>(gx);
            const double fx = gx - x0;
            const double v00 = grid[static_cast<size_t>(y0) * gw + x0];
            const double v10 = grid[static_cast<size_t>(y0) * gw + x0 + 1];
            const double v01 = grid[static_cast<size_t>(y0 + 1) * gw + x0];
            const double v11 = grid[static_cast<size_t>(y0 + 1) * gw + x0 + 1];
            const double v = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
            img.at(y, x) += amplitude * v;
        }
    }
}

} // namespace

ImageF make_synthetic_background(const SyntheticBackgroundSpec& spec, Rng& rng) {
    if (spec.height <= 0 || spec.width <= 0)
        throw std::invalid_argument("make_synthetic_background: size must be positive");

    ImageF img(spec.height, spec.width, spec.base);

    double cell = std::max(4.0, spec.cell);
    double amp = spec.amplitude * 0.5;
    for (int o = 0; o < std::max(1, spec.octaves); ++o) {
        add_value_noise(img, rng, cell, amp);
        cell = std::max(2.0, cell / 2.0);
        amp *= 0.5;
    }

    for (int c = 0; c < spec.clouds; ++c) {
        const double cx = rng.uniform(0.0, spec.width);
        const double cy = rng.uniform(0.0, spec.height);
        const double rx = rng.uniform(0.08, 0.25) * spec.width;
        const double ry = rng.uniform(0.08, 0.25) * spec.height;
        const double a = rng.uniform(0.4, 1.0) * spec.cloud_amplitude;
        const int x0 = std::max(0, static_cast<int>(cx - 3 * rx));
        const int x1 = std::min(spec.width - 1, static_cast<int>(cx + 3 * rx));
        const int y0 = std::max(0, static_cast<int>(cy - 3 * ry));
        const int y1 = std::min(spec.height - 1, static_cast<int>(cy + 3 * ry));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double dx = (x - cx) / rx;
                const double dy = (y - cy) / ry;
                img.at(y, x) += a * std::exp(-0.5 * (dx * dx + dy * dy));
            }
    }

    if (spec.noise_sigma > 0.0)
        for (auto& v : img.data) v += rng.normal(0.0, spec.noise_sigma);

    // SWIR-like data is non-negative.
    for (auto& v : img.data) v = std::max(0.0, v);
    return img;
}

} // namespace irsim
