#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <climits>
#include <cmath>
#include <functional>

#include "irsim/metrics.hpp"
#include "irsim/rng.hpp"

using namespace irsim;

namespace {

// Exhaustive assignment oracle: maximum number of one-to-one (pred, gt)
// pairs with distance < threshold, by recursion over predictions.
int brute_force_td(const std::vector<Component>& pred, const std::vector<Vec2>& gt, double thr) {
    std::vector<char> used(gt.size(), 0);
    std::function<int(size_t)> go = [&](size_t p) -> int {
        if (p == pred.size()) return 0;
        int best = go(p + 1);
        for (size_t g = 0; g < gt.size(); ++g) {
            if (used[g]) continue;
            const double d = std::hypot(pred[p].centroid.x - gt[g].x, pred[p].centroid.y - gt[g].y);
            if (d >= thr) continue;
            used[g] = 1;
            best = std::max(best, 1 + go(p + 1));
            used[g] = 0;
        }
        return best;
    };
    return go(0);
}

Bitmap blob(int h, int w, int cy, int cx, int size) {
    Bitmap b(h, w);
    for (int i = 0; i < size; ++i)
        if (cx + i < w) b.set(cy, cx + i);
    return b;
}

} // namespace

TEST_CASE("connected_components: labels, sizes and centroids") {
    Bitmap b(8, 8);
    b.set(1, 1);
    b.set(2, 2); // diagonal touch: 8-connectivity joins them
    b.set(5, 5);
    const auto comps = connected_components(b);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].pixels == 2);
    CHECK(comps[0].centroid.x == doctest::Approx(1.5));
    CHECK(comps[0].centroid.y == doctest::Approx(1.5));
    CHECK(comps[1].pixels == 1);
}

TEST_CASE("match_detections: simple hits and misses") {
    std::vector<Component> pred = {{{11, 11}, 1}};
    std::vector<Vec2> gt = {{10, 10}};
    CHECK(match_detections(pred, gt).truly_detected == 1); // sqrt(2) < 3

    pred[0].centroid = {20, 20};
    CHECK(match_detections(pred, gt).truly_detected == 0);
}

TEST_CASE("match_detections: threshold boundary at 2.9 and 3.1 px") {
    std::vector<Vec2> gt = {{32, 32}};
    std::vector<Component> near = {{{32 + 2.9, 32.0}, 1}};
    std::vector<Component> far = {{{32 + 3.1, 32.0}, 1}};
    CHECK(match_detections(near, gt).truly_detected == 1);
    CHECK(match_detections(far, gt).truly_detected == 0);
}

TEST_CASE("match_detections: greedy and optimal agree with the exhaustive oracle") {
    Rng rng(200);
    int greedy_disagreements = 0;
    for (int it = 0; it < 200; ++it) {
        const int n_gt = static_cast<int>(rng.uniform_int(0, 5));
        const int n_pred = static_cast<int>(rng.uniform_int(0, 8));
        std::vector<Vec2> gt;
        std::vector<Component> pred;
        // enforce pairwise distance gaps > 1 px (non-ambiguous configurations)
        auto far_enough = [&](const Vec2& p) {
            for (const auto& g : gt)
                if (std::hypot(p.x - g.x, p.y - g.y) < 1.0) return false;
            for (const auto& q : pred)
                if (std::hypot(p.x - q.centroid.x, p.y - q.centroid.y) < 1.0) return false;
            return true;
        };
        while (static_cast<int>(gt.size()) < n_gt) {
            const Vec2 p{rng.uniform(0, 64), rng.uniform(0, 64)};
            if (far_enough(p)) gt.push_back(p);
        }
        while (static_cast<int>(pred.size()) < n_pred) {
            const Vec2 p{rng.uniform(0, 64), rng.uniform(0, 64)};
            if (far_enough(p)) pred.push_back({p, static_cast<long>(rng.uniform_int(1, 4))});
        }
        const int oracle = brute_force_td(pred, gt, 3.0);
        const int opt = match_detections(pred, gt, 3.0, MatchMode::Optimal).truly_detected;
        const int grd = match_detections(pred, gt, 3.0, MatchMode::Greedy).truly_detected;
        CHECK(opt == oracle);
        if (grd != oracle) ++greedy_disagreements;
    }
    CHECK(greedy_disagreements == 0);
}

TEST_CASE("match_detections: invariant under relabeling of inputs") {
    Rng rng(201);
    std::vector<Vec2> gt;
    std::vector<Component> pred;
    for (int i = 0; i < 5; ++i) gt.push_back({rng.uniform(0, 50), rng.uniform(0, 50)});
    for (int i = 0; i < 6; ++i) pred.push_back({{rng.uniform(0, 50), rng.uniform(0, 50)}, 1});
    const int base = match_detections(pred, gt).truly_detected;
    std::reverse(pred.begin(), pred.end());
    std::reverse(gt.begin(), gt.end());
    CHECK(match_detections(pred, gt).truly_detected == base);
}

TEST_CASE("pd_fa: perfect and empty predictions") {
    Bitmap mask(32, 32);
    mask.set(10, 10);
    mask.set(10, 11);
    std::vector<std::vector<Vec2>> gt = {{{10.5, 10.0}}};
    const auto perfect = pd_fa({mask}, gt);
    CHECK(perfect.pd == doctest::Approx(1.0));
    CHECK(perfect.fa == doctest::Approx(0.0));

    const auto empty = pd_fa({Bitmap(32, 32)}, gt);
    CHECK(empty.pd == doctest::Approx(0.0));
    CHECK(empty.fa == doctest::Approx(0.0));
}

TEST_CASE("pd_fa: spurious blob pixel accounting") {
    std::vector<Bitmap> masks(10, Bitmap(1024, 1024));
    std::vector<std::vector<Vec2>> gt(10);
    masks[3] = blob(1024, 1024, 100, 100, 5);
    const auto r = pd_fa(masks, gt);
    CHECK(r.false_pixels == 5);
    CHECK(r.all_pixels == 10L * 1024 * 1024);
    CHECK(r.fa == doctest::Approx(5.0 / (10.0 * 1024 * 1024)).epsilon(1e-12));
    CHECK(std::isnan(r.pd)); // no targets at all
}

TEST_CASE("pd_fa: frame count mismatch throws") {
    CHECK_THROWS_AS(pd_fa(std::vector<Bitmap>(2, Bitmap(4, 4)), {{}}), std::invalid_argument);
}

TEST_CASE("roc_auc: oracle confidence map scores a perfect curve") {
    ImageF conf(32, 32, 0.0);
    conf.at(10, 10) = 1.0;
    conf.at(20, 25) = 1.0;
    std::vector<std::vector<Vec2>> gt = {{{10, 10}, {25, 20}}};
    const auto r = roc_auc({conf}, gt, 11);
    CHECK(r.auc == doctest::Approx(1.0));
    for (const auto& [fa, pd] : r.points) CHECK(fa == 0.0);
}

TEST_CASE("roc_auc: constant zero map gives a single (0,0) point") {
    const auto r = roc_auc({ImageF(16, 16, 0.0)}, {{{5, 5}}}, 5);
    CHECK(r.auc == doctest::Approx(0.0));
    for (const auto& [fa, pd] : r.points) {
        CHECK(fa == 0.0);
        CHECK(pd == 0.0);
    }
}

TEST_CASE("roc_auc: hand-enumerated toy sweep") {
    // 8x8 map: a true blob at 0.9 on the GT, a false blob at 0.3 elsewhere
    ImageF conf(8, 8, 0.0);
    conf.at(1, 1) = 0.9;
    conf.at(6, 6) = 0.3;
    conf.at(6, 7) = 0.3;
    std::vector<std::vector<Vec2>> gt = {{{1, 1}}};
    const auto r = roc_auc({conf}, gt, 3); // thresholds 0, 0.5, 1
    // tau=0:   both blobs -> pd=1, fa=2/64
    // tau=0.5: true blob   -> pd=1, fa=0
    // tau=1:   nothing     -> pd=0, fa=0
    // staircase: (0,0),(0,0),(0,1),(2/64,1),(2/64,1)
    REQUIRE(r.points.size() == 5);
    CHECK(r.points.back().first == doctest::Approx(2.0 / 64.0));
    CHECK(r.points.back().second == doctest::Approx(1.0));
    CHECK(r.auc == doctest::Approx(1.0)); // pd reaches 1 before any false pixels
}

TEST_CASE("roc_auc: staircase is monotone and fa never negative") {
    Rng rng(202);
    ImageF conf(24, 24);
    for (auto& v : conf.data) v = rng.uniform(0.0, 1.0);
    std::vector<std::vector<Vec2>> gt = {{{5, 5}, {18, 12}}};
    const auto r = roc_auc({conf}, gt, 21);
    CHECK(r.auc >= 0.0);
    CHECK(r.auc <= 1.0);
    for (size_t i = 1; i < r.points.size(); ++i) {
        CHECK(r.points[i].first >= r.points[i - 1].first);
        CHECK(r.points[i].second >= r.points[i - 1].second);
        CHECK(r.points[i].first >= 0.0);
    }
}

TEST_CASE("roc_auc: sweep monotonicity of TD and FD on well-separated blobs") {
    ImageF conf(32, 32, 0.0);
    conf.at(5, 5) = 0.8;
    conf.at(15, 15) = 0.6;
    conf.at(25, 25) = 0.4;
    std::vector<std::vector<Vec2>> gt = {{{5, 5}, {15, 15}}};
    long prev_td = LONG_MAX, prev_fd = LONG_MAX;
    for (double tau : {0.9, 0.7, 0.5, 0.3, 0.1}) { // descending thresholds
        Bitmap mask(32, 32);
        for (size_t i = 0; i < conf.data.size(); ++i) mask.data[i] = conf.data[i] > tau;
        const auto r = pd_fa({mask}, gt);
        if (prev_td != LONG_MAX) {
            CHECK(r.truly_detected >= prev_td);
            CHECK(r.false_pixels >= prev_fd);
        }
        prev_td = r.truly_detected;
        prev_fd = r.false_pixels;
    }
}

TEST_CASE("roc_auc: scoring is invariant to frame order") {
    Rng rng(203);
    std::vector<ImageF> conf;
    std::vector<std::vector<Vec2>> gt;
    for (int t = 0; t < 3; ++t) {
        ImageF c(16, 16);
        for (auto& v : c.data) v = rng.uniform(0.0, 1.0);
        conf.push_back(std::move(c));
        gt.push_back({{rng.uniform(2, 14), rng.uniform(2, 14)}});
    }
    const auto a = roc_auc(conf, gt, 11);
    std::vector<ImageF> conf2 = {conf[2], conf[0], conf[1]};
    std::vector<std::vector<Vec2>> gt2 = {gt[2], gt[0], gt[1]};
    const auto b = roc_auc(conf2, gt2, 11);
    CHECK(a.auc == doctest::Approx(b.auc).epsilon(1e-12));
}

TEST_CASE("roc_auc: rejects invalid confidences") {
    ImageF bad(4, 4, 2.0);
    CHECK_THROWS_AS(roc_auc({bad}, {{}}, 5), std::invalid_argument);
    ImageF nanmap(4, 4, 0.5);
    nanmap.at(0, 0) = std::nan("");
    CHECK_THROWS_AS(roc_auc({nanmap}, {{}}, 5), std::invalid_argument);
}
