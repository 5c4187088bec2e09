#include "irsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace irsim {

std::vector<Component> connected_components(const Bitmap& map) {
    std::vector<Component> out;
    if (map.data.empty()) return out;

    std::vector<std::int32_t> label(map.data.size(), -1);
    std::vector<std::pair<int, int>> stack;
    const int dy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    const int dx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const size_t idx = static_cast<size_t>(y) * map.width + x;
            if (!map.data[idx] || label[idx] >= 0) continue;
            const std::int32_t id = static_cast<std::int32_t>(out.size());
            label[idx] = id;
            stack.clear();
            stack.emplace_back(y, x);
            double sx = 0.0, sy = 0.0;
            long n = 0;
            while (!stack.empty()) {
                const auto [cy, cx] = stack.back();
                stack.pop_back();
                sx += cx;
                sy += cy;
                ++n;
                for (int k = 0; k < 8; ++k) {
                    const int ny = cy + dy[k];
                    const int nx = cx + dx[k];
                    if (ny < 0 || ny >= map.height || nx < 0 || nx >= map.width) continue;
                    const size_t nidx = static_cast<size_t>(ny) * map.width + nx;
                    if (!map.data[nidx] || label[nidx] >= 0) continue;
                    label[nidx] = id;
                    stack.emplace_back(ny, nx);
                }
            }
            out.push_back(Component{Vec2{sx / n, sy / n}, n});
        }
    }
    return out;
}

namespace {

struct Pair {
    double dist;
    int pred;
    int gt;
};

std::vector<Pair> candidate_pairs(const std::vector<Component>& pred,
                                  const std::vector<Vec2>& gt, double threshold) {
    std::vector<Pair> pairs;
    for (int p = 0; p < static_cast<int>(pred.size()); ++p)
        for (int g = 0; g < static_cast<int>(gt.size()); ++g) {
            const double d = std::hypot(pred[p].centroid.x - gt[g].x, pred[p].centroid.y - gt[g].y);
            if (d < threshold) pairs.push_back(Pair{d, p, g});
        }
    return pairs;
}

// Maximum bipartite matching via augmenting paths over the candidate graph.
int max_matching(const std::vector<Pair>& pairs, int n_pred, int n_gt, std::vector<int>* pred_to_gt) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(n_pred));
    for (const auto& p : pairs) adj[p.pred].push_back(p.gt);
    std::vector<int> gt_owner(static_cast<size_t>(n_gt), -1);
    std::vector<char> seen;

    std::function<bool(int)> try_assign = [&](int p) -> bool {
        for (int g : adj[p]) {
            if (seen[g]) continue;
            seen[g] = 1;
            if (gt_owner[g] < 0 || try_assign(gt_owner[g])) {
                gt_owner[g] = p;
                return true;
            }
        }
        return false;
    };

    int matched = 0;
    for (int p = 0; p < n_pred; ++p) {
        seen.assign(static_cast<size_t>(n_gt), 0);
        if (try_assign(p)) ++matched;
    }
    if (pred_to_gt) {
        pred_to_gt->assign(static_cast<size_t>(n_pred), -1);
        for (int g = 0; g < n_gt; ++g)
            if (gt_owner[g] >= 0) (*pred_to_gt)[gt_owner[g]] = g;
    }
    return matched;
}

} // namespace

MatchResult match_detections(const std::vector<Component>& predictions,
                             const std::vector<Vec2>& gt_centroids,
                             double threshold, MatchMode mode) {
    if (!(threshold > 0.0)) throw std::invalid_argument("match_detections: threshold must be > 0");

    MatchResult res;
    res.pred_to_gt.assign(predictions.size(), -1);
    auto pairs = candidate_pairs(predictions, gt_centroids, threshold);

    if (mode == MatchMode::Optimal) {
        res.truly_detected = max_matching(pairs, static_cast<int>(predictions.size()),
                                          static_cast<int>(gt_centroids.size()), &res.pred_to_gt);
        return res;
    }

    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.pred != b.pred) return a.pred < b.pred;
        return a.gt < b.gt;
    });
    std::vector<char> gt_used(gt_centroids.size(), 0);
    for (const auto& p : pairs) {
        if (res.pred_to_gt[p.pred] >= 0 || gt_used[p.gt]) continue;
        res.pred_to_gt[p.pred] = p.gt;
        gt_used[p.gt] = 1;
        ++res.truly_detected;
    }
    return res;
}

PdFaResult pd_fa(const std::vector<Bitmap>& pred_masks,
                 const std::vector<std::vector<Vec2>>& gt_centroids,
                 double threshold, MatchMode mode) {
    if (pred_masks.size() != gt_centroids.size())
        throw std::invalid_argument("pd_fa: prediction and ground-truth frame counts differ");

    PdFaResult r;
    for (size_t t = 0; t < pred_masks.size(); ++t) {
        const auto comps = connected_components(pred_masks[t]);
        const auto match = match_detections(comps, gt_centroids[t], threshold, mode);
        r.truly_detected += match.truly_detected;
        r.all_targets += static_cast<long>(gt_centroids[t].size());
        for (size_t c = 0; c < comps.size(); ++c)
            if (match.pred_to_gt[c] < 0) r.false_pixels += comps[c].pixels;
        r.all_pixels += static_cast<long>(pred_masks[t].data.size());
    }
    r.pd = (r.all_targets > 0) ? static_cast<double>(r.truly_detected) / r.all_targets
                               : std::numeric_limits<double>::quiet_NaN();
    r.fa = (r.all_pixels > 0) ? static_cast<double>(r.false_pixels) / r.all_pixels : 0.0;
    return r;
}

RocResult roc_auc(const std::vector<ImageF>& confidence,
                  const std::vector<std::vector<Vec2>>& gt_centroids,
                  int n_thresholds, double match_threshold, MatchMode mode, FaDomain domain) {
    if (confidence.size() != gt_centroids.size())
        throw std::invalid_argument("roc_auc: confidence and ground-truth frame counts differ");
    if (n_thresholds < 2) throw std::invalid_argument("roc_auc: need at least 2 thresholds");
    for (const auto& c : confidence) {
        for (double v : c.data) {
            if (!std::isfinite(v)) throw std::invalid_argument("roc_auc: non-finite confidence value");
            if (v < 0.0 || v > 1.0) throw std::invalid_argument("roc_auc: confidence must lie in [0,1]");
        }
    }

    RocResult out;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n_thresholds; ++i) {
        const double tau = static_cast<double>(i) / (n_thresholds - 1);
        std::vector<Bitmap> masks(confidence.size());
        for (size_t t = 0; t < confidence.size(); ++t) {
            masks[t] = Bitmap(confidence[t].height, confidence[t].width);
            for (size_t j = 0; j < confidence[t].data.size(); ++j)
                masks[t].data[j] = confidence[t].data[j] > tau ? 1 : 0;
        }
        const PdFaResult r = pd_fa(masks, gt_centroids, match_threshold, mode);
        pts.emplace_back(r.fa, std::isnan(r.pd) ? 0.0 : r.pd);
    }

    std::sort(pts.begin(), pts.end());
    // ROC staircase: pd is made nondecreasing along increasing fa.
    double running = 0.0;
    for (auto& p : pts) {
        running = std::max(running, p.second);
        p.second = running;
    }

    out.points.emplace_back(0.0, 0.0);
    out.points.insert(out.points.end(), pts.begin(), pts.end());
    const double fa_max_obs = out.points.back().first;
    const double pd_max = running;
    out.points.emplace_back(fa_max_obs, pd_max);

    const double fa_scale = (domain == FaDomain::Fixed) ? 1e-4 : fa_max_obs;
    if (fa_scale <= 0.0) {
        out.auc = pd_max; // all mass at fa = 0
        return out;
    }
    double auc = 0.0;
    for (size_t i = 1; i < out.points.size(); ++i) {
        const double x0 = std::min(out.points[i - 1].first, fa_scale) / fa_scale;
        const double x1 = std::min(out.points[i].first, fa_scale) / fa_scale;
        auc += (x1 - x0) * (out.points[i - 1].second + out.points[i].second) / 2.0;
    }
    if (domain == FaDomain::Fixed && fa_max_obs < fa_scale)
        auc += (1.0 - fa_max_obs / fa_scale) * pd_max; // extend flat to the domain edge
    out.auc = auc;
    return out;
}

} // namespace irsim
