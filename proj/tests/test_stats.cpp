#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>

#include "irsim/rng.hpp"
#include "irsim/stats.hpp"

using namespace irsim;

namespace {

MaskPatch rect_mask(int x0, int y0, int w, int h) {
    MaskPatch m;
    m.x0 = x0;
    m.y0 = y0;
    m.width = w;
    m.height = h;
    m.data.assign(static_cast<size_t>(w) * h, 1);
    return m;
}

} // namespace

TEST_CASE("scr: direct substitution on a two-level background") {
    // background alternates 90/110 (mean 100, population sigma 10), target 150
    ImageF frame(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) frame.at(y, x) = ((x + y) % 2 == 0) ? 90.0 : 110.0;
    frame.at(32, 32) = 150.0;
    frame.at(32, 33) = 150.0;
    const MaskPatch m = rect_mask(32, 32, 2, 1);
    const double v = scr(frame, m, 20);
    // neighborhood has equal counts of 90/110 when spanning full parity blocks;
    // allow tiny imbalance from the odd window size
    CHECK(v == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("scr: target equal to the background mean gives zero") {
    ImageF frame(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) frame.at(y, x) = ((x + y) % 2 == 0) ? 90.0 : 110.0;
    // a 2x1 target covering one 90 and one 110 pixel has mean 100
    const MaskPatch m = rect_mask(10, 10, 2, 1);
    CHECK(scr(frame, m, 10) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("scr: agrees with an independent two-pass oracle on random frames") {
    Rng rng(100);
    for (int it = 0; it < 10; ++it) {
        ImageF frame(64, 64);
        for (auto& v : frame.data) v = rng.uniform(0, 1000);
        const int mx = static_cast<int>(rng.uniform_int(5, 50));
        const int my = static_cast<int>(rng.uniform_int(5, 50));
        MaskPatch m = rect_mask(mx, my, 3, 2);
        m.data[1] = 0; // irregular mask
        const int d = 20;
        const double got = scr(frame, m, d);

        // oracle: explicit pixel partitioning
        int bx0 = 64, bx1 = -1, by0 = 64, by1 = -1;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.get(y, x)) {
                    bx0 = std::min(bx0, m.x0 + x);
                    bx1 = std::max(bx1, m.x0 + x);
                    by0 = std::min(by0, m.y0 + y);
                    by1 = std::max(by1, m.y0 + y);
                }
        double st = 0.0;
        int nt = 0;
        std::vector<double> bg;
        for (int y = std::max(0, by0 - d); y <= std::min(63, by1 + d); ++y)
            for (int x = std::max(0, bx0 - d); x <= std::min(63, bx1 + d); ++x) {
                const int lx = x - m.x0, ly = y - m.y0;
                const bool in_mask =
                    lx >= 0 && lx < m.width && ly >= 0 && ly < m.height && m.get(ly, lx);
                if (in_mask) {
                    st += frame.at(y, x);
                    ++nt;
                } else {
                    bg.push_back(frame.at(y, x));
                }
            }
        const double mu_t = st / nt;
        double mu_b = 0.0;
        for (double v : bg) mu_b += v;
        mu_b /= bg.size();
        double var = 0.0;
        for (double v : bg) var += (v - mu_b) * (v - mu_b);
        var /= bg.size();
        const double expected = std::abs(mu_t - mu_b) / std::sqrt(var);
        CHECK(std::abs(got - expected) < 1e-12);
    }
}

TEST_CASE("scr: invalid masks throw; flat background returns +inf") {
    ImageF frame(16, 16, 5.0);
    CHECK_THROWS_AS(scr(frame, rect_mask(14, 14, 4, 4), 5), std::invalid_argument);
    MaskPatch empty = rect_mask(2, 2, 2, 2);
    empty.data.assign(4, 0);
    CHECK_THROWS_AS(scr(frame, empty, 5), std::invalid_argument);
    frame.at(3, 3) = 50.0;
    CHECK(std::isinf(scr(frame, rect_mask(3, 3, 1, 1), 5)));
}

TEST_CASE("scr: invariant to adding a constant; contrast scales against noise") {
    Rng rng(101);
    ImageF frame(48, 48);
    for (auto& v : frame.data) v = rng.uniform(100, 200);
    const MaskPatch m = rect_mask(20, 20, 2, 2);
    const double base = scr(frame, m, 15);
    ImageF shifted = frame;
    for (auto& v : shifted.data) v += 500.0;
    CHECK(scr(shifted, m, 15) == doctest::Approx(base).epsilon(1e-9));

    // scaling deviations around the mean by k halves the ratio for fixed contrast
    ImageF scaled = frame;
    double mu = 0.0;
    for (double v : frame.data) mu += v;
    mu /= frame.data.size();
    for (auto& v : scaled.data) v = mu + 2.0 * (v - mu);
    // target contrast also scales by 2, so scr is invariant under this map
    CHECK(scr(scaled, m, 15) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("frame_complexity: constant image has zero complexity") {
    ImageF img(32, 32, 123.0);
    CHECK(frame_complexity(img) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("frame_complexity: symmetric two-level image cancels to zero") {
    ImageF img(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) img.at(y, x) = ((x + y) % 2 == 0) ? 0.0 : 255.0;
    // C = -[(0-127.5) + (255-127.5)] * 0.5 * log 0.5 = 0 by symmetry
    CHECK(frame_complexity(img) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("background_complexity: mean over frames, order invariant") {
    Rng rng(102);
    std::vector<ImageF> frames;
    for (int t = 0; t < 4; ++t) {
        ImageF img(32, 32);
        for (auto& v : img.data) v = rng.uniform(0, 4000);
        frames.push_back(std::move(img));
    }
    const auto rep = background_complexity(frames);
    double mean = 0.0;
    for (double c : rep.per_frame) mean += c;
    mean /= rep.per_frame.size();
    CHECK(rep.mean == doctest::Approx(mean).epsilon(1e-12));

    std::vector<ImageF> shuffled = {frames[2], frames[0], frames[3], frames[1]};
    CHECK(background_complexity(shuffled).mean == doctest::Approx(rep.mean).epsilon(1e-12));

    CHECK_THROWS_AS(background_complexity({}), std::invalid_argument);
}

TEST_CASE("complexity_level: boundary-exact half-open intervals") {
    CHECK(complexity_level(0.0) == ComplexityLevel::Easy);
    CHECK(complexity_level(199.999) == ComplexityLevel::Easy);
    CHECK(complexity_level(200.0) == ComplexityLevel::Medium);
    CHECK(complexity_level(999.999) == ComplexityLevel::Medium);
    CHECK(complexity_level(1000.0) == ComplexityLevel::Complex);
    CHECK(complexity_level(2000.0) == ComplexityLevel::Extreme);
    CHECK(complexity_level(5596.0) == ComplexityLevel::Extreme);
}

TEST_CASE("speed_level: boundary-exact bins and oracle agreement") {
    CHECK(speed_level_of(0.0) == SpeedLevel::Slow);
    CHECK(speed_level_of(0.0999) == SpeedLevel::Slow);
    CHECK(speed_level_of(0.1) == SpeedLevel::Medium);
    CHECK(speed_level_of(1.0 / 3.0) == SpeedLevel::Fast);
    CHECK(speed_level_of(0.5) == SpeedLevel::Fast);
    CHECK(speed_level_of(1.0) == SpeedLevel::VeryFast);
    CHECK(speed_level_of(2.0) == SpeedLevel::VeryFast);

    std::vector<Vec2> stat(5, Vec2{10, 10});
    CHECK(speed_level(stat) == SpeedLevel::Slow);
    std::vector<Vec2> path;
    for (int t = 0; t < 10; ++t) path.push_back({0.5 * t, 0.0});
    CHECK(speed_level(path) == SpeedLevel::Fast);

    Rng rng(103);
    std::vector<Vec2> rnd;
    for (int t = 0; t < 20; ++t) rnd.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    double sum = 0.0;
    for (size_t i = 1; i < rnd.size(); ++i)
        sum += std::hypot(rnd[i].x - rnd[i - 1].x, rnd[i].y - rnd[i - 1].y);
    CHECK(mean_speed(rnd) == doctest::Approx(sum / (rnd.size() - 1)).epsilon(1e-12));
}

TEST_CASE("eccentricity and shape bins") {
    CHECK(eccentricity(5, 5) == doctest::Approx(0.0));
    CHECK(eccentricity(2, 1) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(eccentricity(2, 3), std::invalid_argument);
    CHECK(shape_bin(0.0) == 0);
    CHECK(shape_bin(0.19999) == 0);
    CHECK(shape_bin(0.2) == 1);
    CHECK(shape_bin(0.4) == 2);
    CHECK(shape_bin(0.6) == 3);
    CHECK(shape_bin(0.8) == 4);
    CHECK(shape_bin(1.0) == 4);
}

TEST_CASE("scr bins and scene levels") {
    CHECK(scr_bin(0.5) == 0);
    CHECK(scr_bin(3.0) == 1);
    CHECK(scr_bin(6.0) == 2);
    CHECK(scr_bin(10.0) == 3);
    CHECK(scene_level(8.0, 500.0) == SceneLevel::Easy);
    CHECK(scene_level(4.0, 1500.0) == SceneLevel::Complex);
    CHECK(scene_level(8.0, 1500.0) == SceneLevel::Medium);
    CHECK(scene_level(4.0, 500.0) == SceneLevel::Medium);
    CHECK(scene_level(6.0, 1000.0) == SceneLevel::Medium); // boundaries are medium
}
