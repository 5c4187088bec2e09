#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "irsim/image.hpp"
#include "irsim/stats.hpp"

namespace irsim {

struct Bitmap {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    Bitmap() = default;
    Bitmap(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}
    bool get(int y, int x) const { return data[static_cast<size_t>(y) * width + x] != 0; }
    void set(int y, int x, bool v = true) { data[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
};

struct Component {
    Vec2 centroid;
    long pixels = 0;
};

// 8-connected components of the nonzero pixels.
std::vector<Component> connected_components(const Bitmap& map);

enum class MatchMode { Greedy, Optimal };

struct MatchResult {
    int truly_detected = 0;
    std::vector<int> pred_to_gt; // -1 for unmatched predictions
};

// One-to-one centroid matching under a distance threshold. Greedy takes
// candidate pairs in ascending distance; Optimal maximizes the number of
// matched pairs (maximum bipartite matching on the same candidate graph).
MatchResult match_detections(const std::vector<Component>& predictions,
                             const std::vector<Vec2>& gt_centroids,
                             double threshold = 3.0,
                             MatchMode mode = MatchMode::Greedy);

struct PdFaResult {
    double pd = 0.0;
    double fa = 0.0;
    long truly_detected = 0;
    long all_targets = 0;
    long false_pixels = 0;
    long all_pixels = 0;
};

// Sequence-level Pd = TD/AT and Fa = FD/NP; FD counts the pixels of predicted
// components whose centroid matched no ground-truth target. AT == 0 yields a
// NaN pd sentinel.
PdFaResult pd_fa(const std::vector<Bitmap>& pred_masks,
                 const std::vector<std::vector<Vec2>>& gt_centroids,
                 double threshold = 3.0,
                 MatchMode mode = MatchMode::Greedy);

enum class FaDomain { Normalized, Fixed }; // AUC fa-axis: observed max, or [0, 1e-4]

struct RocResult {
    std::vector<std::pair<double, double>> points; // (fa, pd), fa nondecreasing
    double auc = 0.0;
};

// Threshold sweep over confidence maps in [0,1] (binarized with value > tau,
// tau evenly spaced over [0,1] including both ends), cumulative-max pd
// staircase, trapezoidal AUC over the normalized fa axis.
RocResult roc_auc(const std::vector<ImageF>& confidence,
                  const std::vector<std::vector<Vec2>>& gt_centroids,
                  int n_thresholds = 101,
                  double match_threshold = 3.0,
                  MatchMode mode = MatchMode::Greedy,
                  FaDomain domain = FaDomain::Normalized);

struct ScoreReport {
    PdFaResult total;
    RocResult roc;
    std::map<std::string, PdFaResult> per_scene; // easy / medium / complex
    std::map<std::string, double> per_scene_auc;
};

} // namespace irsim
