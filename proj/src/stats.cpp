#include "irsim/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace irsim {

double scr(const ImageF& frame, const MaskPatch& mask, int d) {
    if (mask.width <= 0 || mask.height <= 0 || mask.empty())
        throw std::invalid_argument("scr: mask is empty");
    if (mask.x0 < 0 || mask.y0 < 0 || mask.x0 + mask.width > frame.width ||
        mask.y0 + mask.height > frame.height)
        throw std::invalid_argument("scr: mask extends outside the frame");

    // Tight bbox of mask-true pixels.
    int bx0 = mask.width, bx1 = -1, by0 = mask.height, by1 = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(y, x)) {
                bx0 = std::min(bx0, x);
                bx1 = std::max(bx1, x);
                by0 = std::min(by0, y);
                by1 = std::max(by1, y);
            }
    bx0 += mask.x0;
    bx1 += mask.x0;
    by0 += mask.y0;
    by1 += mask.y0;

    const int nx0 = std::max(0, bx0 - d);
    const int nx1 = std::min(frame.width - 1, bx1 + d);
    const int ny0 = std::max(0, by0 - d);
    const int ny1 = std::min(frame.height - 1, by1 + d);

    auto in_mask = [&](int y, int x) {
        const int my = y - mask.y0;
        const int mx = x - mask.x0;
        return my >= 0 && my < mask.height && mx >= 0 && mx < mask.width && mask.get(my, mx);
    };

    double sum_t = 0.0;
    long n_t = 0;
    double sum_b = 0.0, sum_b2 = 0.0;
    long n_b = 0;
    for (int y = ny0; y <= ny1; ++y) {
        for (int x = nx0; x <= nx1; ++x) {
            const double v = frame.at(y, x);
            if (in_mask(y, x)) {
                sum_t += v;
                ++n_t;
            } else if (frame.is_valid(y, x)) {
                sum_b += v;
                sum_b2 += v * v;
                ++n_b;
            }
        }
    }
    if (n_t == 0) throw std::invalid_argument("scr: mask has no pixels inside the frame");
    if (n_b == 0) return std::numeric_limits<double>::infinity();

    const double mu_t = sum_t / n_t;
    const double mu_b = sum_b / n_b;
    const double var_b = std::max(0.0, sum_b2 / n_b - mu_b * mu_b);
    const double sigma_b = std::sqrt(var_b);
    if (sigma_b == 0.0) {
        std::cerr << "irsim: scr: flat local background (sigma_b = 0), returning +inf\n";
        return std::numeric_limits<double>::infinity();
    }
    return std::abs(mu_t - mu_b) / sigma_b;
}

double frame_complexity(const ImageF& frame) {
    if (frame.data.empty()) throw std::invalid_argument("frame_complexity: empty frame");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    long n = 0;
    for (size_t i = 0; i < frame.data.size(); ++i) {
        if (!frame.valid.empty() && !frame.valid[i]) continue;
        lo = std::min(lo, frame.data[i]);
        hi = std::max(hi, frame.data[i]);
        ++n;
    }
    if (n == 0) { // fully invalid frame: fall back to all pixels
        lo = hi = frame.data[0];
        for (double v : frame.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    std::array<long, 256> hist{};
    long total = 0;
    const double range = hi - lo;
    for (size_t i = 0; i < frame.data.size(); ++i) {
        if (n != 0 && !frame.valid.empty() && !frame.valid[i]) continue;
        int s = 0;
        if (range > 0.0) s = std::min(255, static_cast<int>(std::floor((frame.data[i] - lo) / range * 256.0)));
        ++hist[s];
        ++total;
    }

    double mean_s = 0.0;
    for (int s = 0; s < 256; ++s) mean_s += static_cast<double>(s) * hist[s] / total;

    double c = 0.0;
    for (int s = 0; s < 256; ++s) {
        if (hist[s] == 0) continue; // 0 * log 0 = 0
        const double p = static_cast<double>(hist[s]) / total;
        c -= (s - mean_s) * p * std::log(p);
    }
    return c;
}

ComplexityReport background_complexity(const std::vector<ImageF>& frames) {
    if (frames.empty()) throw std::invalid_argument("background_complexity: empty sequence");
    ComplexityReport rep;
    rep.per_frame.reserve(frames.size());
    double sum = 0.0;
    for (const auto& f : frames) {
        rep.per_frame.push_back(frame_complexity(f));
        sum += rep.per_frame.back();
    }
    rep.mean = sum / frames.size();
    rep.level = complexity_level(rep.mean);
    return rep;
}

ComplexityLevel complexity_level(double c) {
    if (c < 200.0) return ComplexityLevel::Easy;
    if (c < 1000.0) return ComplexityLevel::Medium;
    if (c < 2000.0) return ComplexityLevel::Complex;
    return ComplexityLevel::Extreme;
}

double mean_speed(const std::vector<Vec2>& path) {
    if (path.size() < 2) throw std::invalid_argument("mean_speed: need at least 2 points");
    double sum = 0.0;
    for (size_t i = 1; i < path.size(); ++i)
        sum += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
    return sum / (path.size() - 1);
}

SpeedLevel speed_level_of(double v) {
    if (v < 0.1) return SpeedLevel::Slow;
    if (v < 1.0 / 3.0) return SpeedLevel::Medium;
    if (v < 1.0) return SpeedLevel::Fast;
    return SpeedLevel::VeryFast;
}

SpeedLevel speed_level(const std::vector<Vec2>& path) { return speed_level_of(mean_speed(path)); }

double eccentricity(double h, double w) {
    if (!(h > 0.0) || w < 0.0 || w > h) throw std::invalid_argument("eccentricity: requires h >= w >= 0, h > 0");
    const double r = w / h;
    return std::sqrt(std::max(0.0, 1.0 - r * r));
}

int shape_bin(double e) {
    if (e < 0.0 || e > 1.0) throw std::invalid_argument("shape_bin: eccentricity must be in [0,1]");
    if (e < 0.2) return 0;
    if (e < 0.4) return 1;
    if (e < 0.6) return 2;
    if (e < 0.8) return 3;
    return 4;
}

int scr_bin(double v) {
    if (v < 3.0) return 0;
    if (v < 6.0) return 1;
    if (v < 10.0) return 2;
    return 3;
}

SceneLevel scene_level(double mean_scr, double c) {
    if (mean_scr > 6.0 && c < 1000.0) return SceneLevel::Easy;
    if (mean_scr < 6.0 && c > 1000.0) return SceneLevel::Complex;
    return SceneLevel::Medium;
}

const char* to_string(ComplexityLevel l) {
    switch (l) {
        case ComplexityLevel::Easy: return "easy";
        case ComplexityLevel::Medium: return "medium";
        case ComplexityLevel::Complex: return "complex";
        default: return "extreme";
    }
}

const char* to_string(SpeedLevel l) {
    switch (l) {
        case SpeedLevel::Slow: return "slow";
        case SpeedLevel::Medium: return "medium";
        case SpeedLevel::Fast: return "fast";
        default: return "very_fast";
    }
}

const char* to_string(SceneLevel l) {
    switch (l) {
        case SceneLevel::Easy: return "easy";
        case SceneLevel::Medium: return "medium";
        default: return "complex";
    }
}

} // namespace irsim
