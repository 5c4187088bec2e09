#include "irsim/image.hpp"

#include <cmath>
#include <stdexcept>

namespace irsim {

namespace {

constexpr double kDegToRad = 0.017453292519943295;

std::array<double, 9> matmul(const std::array<double, 9>& a, const std::array<double, 9>& b) {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
            r[i * 3 + j] = s;
        }
    return r;
}

} // namespace

double ImageF::mean() const {
    if (data.empty()) return 0.0;
    double sum = 0.0;
    size_t n = 0;
    if (!valid.empty()) {
        for (size_t i = 0; i < data.size(); ++i)
            if (valid[i]) {
                sum += data[i];
                ++n;
            }
    }
    if (n == 0) {
        sum = 0.0;
        for (double v : data) sum += v;
        n = data.size();
    }
    return sum / static_cast<double>(n);
}

bool ImageF::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Homography Homography::translation(double dx, double dy) {
    Homography h;
    h.m = {1, 0, dx, 0, 1, dy, 0, 0, 1};
    return h;
}

double Homography::det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

void Homography::normalize() {
    if (std::abs(m[8]) < 1e-300) throw std::runtime_error("homography: cannot normalize, m[2][2] ~ 0");
    const double s = 1.0 / m[8];
    for (double& v : m) v *= s;
}

Homography Homography::inverse() const {
    const double d = det();
    if (!(std::abs(d) > 1e-12)) throw std::runtime_error("homography: singular (|det| < 1e-12)");
    const double inv = 1.0 / d;
    Homography r;
    r.m[0] = (m[4] * m[8] - m[5] * m[7]) * inv;
    r.m[1] = (m[2] * m[7] - m[1] * m[8]) * inv;
    r.m[2] = (m[1] * m[5] - m[2] * m[4]) * inv;
    r.m[3] = (m[5] * m[6] - m[3] * m[8]) * inv;
    r.m[4] = (m[0] * m[8] - m[2] * m[6]) * inv;
    r.m[5] = (m[2] * m[3] - m[0] * m[5]) * inv;
    r.m[6] = (m[3] * m[7] - m[4] * m[6]) * inv;
    r.m[7] = (m[1] * m[6] - m[0] * m[7]) * inv;
    r.m[8] = (m[0] * m[4] - m[1] * m[3]) * inv;
    r.normalize();
    return r;
}

Homography Homography::compose(const Homography& rhs) const {
    Homography r;
    r.m = matmul(m, rhs.m);
    r.normalize();
    return r;
}

Vec2 Homography::apply(const Vec2& p) const {
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    if (std::abs(w) < 1e-300) throw std::runtime_error("homography: point maps to infinity");
    return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography build_homography(double pitch_deg, double yaw_deg, double roll_deg,
                            double tx, double ty,
                            double focal_px, Vec2 pp) {
    for (double v : {pitch_deg, yaw_deg, roll_deg, tx, ty, focal_px, pp.x, pp.y})
        if (!std::isfinite(v)) throw std::invalid_argument("build_homography: non-finite input");
    if (!(focal_px > 0.0)) throw std::invalid_argument("build_homography: focal must be > 0");
    if (std::abs(pitch_deg) > 45.0 || std::abs(yaw_deg) > 45.0 || std::abs(roll_deg) > 45.0)
        throw std::invalid_argument("build_homography: |angle| must be <= 45 degrees");

    const double a = pitch_deg * kDegToRad;
    const double b = yaw_deg * kDegToRad;
    const double c = roll_deg * kDegToRad;
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);

    const std::array<double, 9> rx = {1, 0, 0, 0, ca, -sa, 0, sa, ca};
    const std::array<double, 9> ry = {cb, 0, sb, 0, 1, 0, -sb, 0, cb};
    const std::array<double, 9> rz = {cc, -sc, 0, sc, cc, 0, 0, 0, 1};
    const std::array<double, 9> k = {focal_px, 0, pp.x, 0, focal_px, pp.y, 0, 0, 1};
    const std::array<double, 9> kinv = {1.0 / focal_px, 0, -pp.x / focal_px,
                                        0, 1.0 / focal_px, -pp.y / focal_px,
                                        0, 0, 1};
    const std::array<double, 9> t = {1, 0, tx, 0, 1, ty, 0, 0, 1};

    Homography h;
    h.m = matmul(t, matmul(k, matmul(rz, matmul(ry, matmul(rx, kinv)))));
    h.normalize();
    return h;
}

bool sample_bilinear(const ImageF& img, double x, double y, double* value, bool* touches_invalid) {
    if (!(x >= 0.0 && x <= img.width - 1 && y >= 0.0 && y <= img.height - 1)) return false;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const int x1 = (fx > 0.0) ? x0 + 1 : x0;
    const int y1 = (fy > 0.0) ? y0 + 1 : y0;

    const double v00 = img.at(y0, x0);
    const double v10 = img.at(y0, x1);
    const double v01 = img.at(y1, x0);
    const double v11 = img.at(y1, x1);
    *value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);

    if (touches_invalid) {
        bool bad = !img.is_valid(y0, x0);
        if (fx > 0.0) bad = bad || !img.is_valid(y0, x1);
        if (fy > 0.0) bad = bad || !img.is_valid(y1, x0);
        if (fx > 0.0 && fy > 0.0) bad = bad || !img.is_valid(y1, x1);
        *touches_invalid = bad;
    }
    return true;
}

ImageF warp(const ImageF& img, const Homography& h, int out_height, int out_width, double fill) {
    if (out_height <= 0 || out_width <= 0) throw std::invalid_argument("warp: output size must be positive");
    const Homography hinv = h.inverse(); // throws degenerate-homography

    ImageF out(out_height, out_width);
    out.valid.assign(out.data.size(), 0);
    const auto& mi = hinv.m;
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const double w = mi[6] * x + mi[7] * y + mi[8];
            const double sx = (mi[0] * x + mi[1] * y + mi[2]) / w;
            const double sy = (mi[3] * x + mi[4] * y + mi[5]) / w;
            double v = fill;
            bool touches_invalid = false;
            const bool inside = sample_bilinear(img, sx, sy, &v, &touches_invalid);
            const size_t idx = static_cast<size_t>(y) * out_width + x;
            out.data[idx] = inside ? v : fill;
            out.valid[idx] = (inside && !touches_invalid) ? 1 : 0;
        }
    }
    return out;
}

ImageF crop(const ImageF& img, Vec2 origin, int out_height, int out_width) {
    if (out_height <= 0 || out_width <= 0) throw std::invalid_argument("crop: size must be positive");
    return warp(img, Homography::translation(-origin.x, -origin.y), out_height, out_width, img.mean());
}

} // namespace irsim
