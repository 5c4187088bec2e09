// irsim: synthetic infrared satellite-video sequences, dataset statistics,
// detection scoring, and reference kernel verification.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "irsim/background.hpp"
#include "irsim/compose.hpp"
#include "irsim/dataset.hpp"
#include "irsim/metrics.hpp"
#include "irsim/pngio.hpp"
#include "irsim/rfr.hpp"
#include "irsim/spec.hpp"
#include "irsim/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace irsim;

namespace {

int default_workers() {
    if (const char* env = std::getenv("IRSIM_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(t) for t in [0, count) across `workers` threads; any exception is
// rethrown on the calling thread.
void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int t = 0; t < count; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    std::vector<std::string> errors(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            while (!failed.load()) {
                const int t = next.fetch_add(1);
                if (t >= count) break;
                try {
                    fn(t);
                } catch (const std::exception& e) {
                    errors[w] = e.what();
                    failed.store(true);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) {
        for (const auto& e : errors)
            if (!e.empty()) throw std::runtime_error(e);
        throw std::runtime_error("worker failed");
    }
}

ImageF resolve_background(const SequenceSpec& spec) {
    if (!spec.background_path.empty()) {
        ImageF img = read_png_gray(spec.background_path);
        if (img.height < spec.fov_height || img.width < spec.fov_width)
            throw std::runtime_error("background image smaller than the field of view");
        return img;
    }
    Rng rng = Rng::stream(spec.seed, 2);
    return make_synthetic_background(spec.synthetic, rng);
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir, int count,
                 bool has_seed, std::uint64_t seed_override, int workers, bool allow_oor) {
    SequenceSpec base = load_spec_file(spec_path);
    if (has_seed) base.seed = seed_override;

    std::vector<std::string> violations;
    if (!validate_spec(base, &violations)) {
        if (!allow_oor) {
            std::cerr << "error: spec outside Table ranges (pass --allow-out-of-range to proceed):\n";
            for (const auto& v : violations) std::cerr << "  - " << v << "\n";
            return 2;
        }
        for (const auto& v : violations) std::cerr << "note: out-of-range (acknowledged): " << v << "\n";
    }

    for (int i = 0; i < count; ++i) {
        SequenceSpec spec = base;
        if (count > 1) {
            spec.seed = Rng::stream(base.seed, 5000 + static_cast<std::uint64_t>(i)).next_u64();
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "_%03d", i);
            spec.name = base.name + suffix;
        }
        const std::string seq_dir = (fs::path(out_dir) / spec.name).string();

        RenderContext ctx = prepare_render(spec, resolve_background(spec));
        std::vector<FrameAnnotation> annotations(static_cast<size_t>(spec.frames));

        // Pass 1: render for annotations, masks and the global intensity range.
        std::vector<double> lo(static_cast<size_t>(spec.frames));
        std::vector<double> hi(static_cast<size_t>(spec.frames));
        parallel_for(spec.frames, workers, [&](int t) {
            const ImageF frame = render_frame(ctx, t, &annotations[t]);
            double l = frame.data[0], h = frame.data[0];
            for (double v : frame.data) {
                l = std::min(l, v);
                h = std::max(h, v);
            }
            lo[t] = l;
            hi[t] = h;
            dataset::write_mask_png(seq_dir, t + 1, annotations[t].instances, frame.height, frame.width);
        });
        dataset::FrameScale scale{lo[0], hi[0]};
        for (int t = 1; t < spec.frames; ++t) {
            scale.lo = std::min(scale.lo, lo[t]);
            scale.hi = std::max(scale.hi, hi[t]);
        }

        // Pass 2: quantize with the sequence-wide scale.
        parallel_for(spec.frames, workers, [&](int t) {
            const ImageF frame = render_frame(ctx, t, nullptr);
            dataset::write_frame_png(seq_dir, t + 1, frame, scale);
        });

        dataset::write_annotations(seq_dir, spec.name, annotations);
        dataset::write_record(seq_dir, ctx, scale);

        long instances = 0;
        for (const auto& fa : annotations) instances += static_cast<long>(fa.instances.size());
        std::cout << "generated " << spec.name << ": " << spec.frames << " frames, "
                  << ctx.tracks.size() << " targets, " << instances << " annotations -> " << seq_dir
                  << "\n";
    }
    return 0;
}

json pdfa_to_json(const PdFaResult& r) {
    return json{{"pd", std::isnan(r.pd) ? json("undefined") : json(r.pd)},
                {"fa", r.fa},
                {"truly_detected", r.truly_detected},
                {"all_targets", r.all_targets},
                {"false_pixels", r.false_pixels},
                {"all_pixels", r.all_pixels}};
}

int cmd_stats(const std::string& data_dir, const std::string& out_path) {
    const auto dirs = dataset::list_sequence_dirs(data_dir);
    json report;
    report["version"] = kVersion;
    json seqs = json::array();

    std::map<std::string, int> complexity_bins, speed_bins;
    std::vector<int> scr_bins(4, 0), shape_bins(5, 0);

    for (const auto& dir : dirs) {
        const auto seq = dataset::load_sequence(dir);
        json js;
        js["name"] = seq.name;
        js["frames"] = seq.frames;

        // Background complexity from the stored 16-bit frames.
        double csum = 0.0;
        int cn = 0;
        for (const auto& fp : seq.frame_paths) {
            csum += frame_complexity(read_png_gray(fp));
            ++cn;
        }
        if (cn > 0) {
            const double cbar = csum / cn;
            js["complexity"] = cbar;
            js["complexity_level"] = to_string(complexity_level(cbar));
            complexity_bins[to_string(complexity_level(cbar))]++;
        }

        // Per-target attributes from annotations (+ record when present).
        std::map<int, std::vector<Vec2>> paths;
        std::map<int, double> first_scr;
        std::map<int, long> area_sum;
        std::map<int, int> area_n;
        for (const auto& fa : seq.annotations)
            for (const auto& inst : fa.instances) {
                if (!inst.visible) continue;
                paths[inst.id].push_back(inst.centroid);
                if (!first_scr.count(inst.id)) first_scr[inst.id] = inst.scr;
                area_sum[inst.id] += static_cast<long>(inst.bbox_w * inst.bbox_h);
                area_n[inst.id]++;
            }

        json targets = json::array();
        double scr_total = 0.0;
        int scr_count = 0;
        for (const auto& [id, path] : paths) {
            json jt;
            jt["id"] = id;
            const double s = first_scr[id];
            jt["scr_frame1"] = std::isfinite(s) ? json(s) : json("inf");
            if (std::isfinite(s)) {
                scr_bins[scr_bin(s)]++;
                scr_total += s;
                ++scr_count;
            }
            if (path.size() >= 2) {
                jt["speed"] = mean_speed(path);
                jt["speed_level"] = to_string(speed_level(path));
                speed_bins[to_string(speed_level(path))]++;
            }
            jt["mean_bbox_area"] = area_n[id] ? static_cast<double>(area_sum[id]) / area_n[id] : 0.0;
            for (const auto& tr : seq.targets) {
                if (tr.id != id || tr.h1 <= 0.0) continue;
                const double e = eccentricity(tr.h1, tr.w1);
                jt["eccentricity"] = e;
                jt["shape_bin"] = shape_bin(e);
                shape_bins[shape_bin(e)]++;
                jt["swerves"] = tr.swerves;
            }
            targets.push_back(std::move(jt));
        }
        js["targets"] = std::move(targets);
        if (scr_count > 0 && cn > 0)
            js["scene_level"] = to_string(scene_level(scr_total / scr_count, csum / cn));
        seqs.push_back(std::move(js));
    }
    report["sequences"] = std::move(seqs);
    report["aggregate"] = {{"complexity_levels", complexity_bins},
                           {"speed_levels", speed_bins},
                           {"scr_bins", scr_bins},
                           {"shape_bins", shape_bins}};

    const std::string text = report.dump(2);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 2;
        }
        out << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
}

struct SequenceEvalData {
    std::vector<ImageF> confidence;
    std::vector<std::vector<Vec2>> gt;
    SceneLevel scene = SceneLevel::Medium;
    bool has_scene = false;
};

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, double threshold,
             const std::string& match_mode, double bin_threshold, int roc_points,
             const std::string& fa_domain, const std::string& out_path) {
    const MatchMode mode = (match_mode == "optimal") ? MatchMode::Optimal : MatchMode::Greedy;
    const FaDomain domain = (fa_domain == "fixed") ? FaDomain::Fixed : FaDomain::Normalized;

    const auto gt_seq_dirs = dataset::list_sequence_dirs(gt_dir);
    std::vector<SequenceEvalData> data;

    for (const auto& dir : gt_seq_dirs) {
        const auto seq = dataset::load_sequence(dir);
        const std::string name = fs::path(dir).filename().string();
        fs::path pdir = fs::path(pred_dir) / name;
        if (gt_seq_dirs.size() == 1 && !fs::is_directory(pdir)) pdir = pred_dir;
        if (!fs::is_directory(pdir)) {
            std::cerr << "error: missing prediction directory " << pdir << "\n";
            return 2;
        }
        std::vector<std::string> pred_files;
        for (const auto& e : fs::directory_iterator(pdir))
            if (e.path().extension() == ".png") pred_files.push_back(e.path().string());
        std::sort(pred_files.begin(), pred_files.end());
        if (static_cast<int>(pred_files.size()) != seq.frames) {
            std::cerr << "error: frame count mismatch for " << name << ": ground truth has "
                      << seq.frames << " frames, predictions have " << pred_files.size() << ":\n";
            std::cerr << "  gt: " << dir << "\n  pred: " << pdir << "\n";
            return 2;
        }

        SequenceEvalData d;
        for (int t = 0; t < seq.frames; ++t) {
            int depth = 8;
            ImageF conf = read_png_gray(pred_files[t], &depth);
            const double denom = (depth == 16) ? 65535.0 : 255.0;
            for (auto& v : conf.data) v /= denom;
            d.confidence.push_back(std::move(conf));
            std::vector<Vec2> centroids;
            for (const auto& inst : seq.annotations[t].instances)
                if (inst.visible) centroids.push_back(inst.centroid);
            d.gt.push_back(std::move(centroids));
        }

        // Scene level from measured frame-1 SCR and stored-frame complexity.
        double scr_sum = 0.0;
        int scr_n = 0;
        std::map<int, bool> seen;
        for (const auto& fa : seq.annotations)
            for (const auto& inst : fa.instances)
                if (inst.visible && !seen[inst.id] && std::isfinite(inst.scr)) {
                    seen[inst.id] = true;
                    scr_sum += inst.scr;
                    ++scr_n;
                }
        if (scr_n > 0 && !seq.frame_paths.empty()) {
            double csum = 0.0;
            for (const auto& fp : seq.frame_paths) csum += frame_complexity(read_png_gray(fp));
            d.scene = scene_level(scr_sum / scr_n, csum / seq.frame_paths.size());
            d.has_scene = true;
        }
        data.push_back(std::move(d));
    }

    auto score = [&](const std::vector<const SequenceEvalData*>& group) {
        std::vector<ImageF> conf;
        std::vector<std::vector<Vec2>> gt;
        for (const auto* d : group) {
            conf.insert(conf.end(), d->confidence.begin(), d->confidence.end());
            gt.insert(gt.end(), d->gt.begin(), d->gt.end());
        }
        std::vector<Bitmap> masks(conf.size());
        for (size_t t = 0; t < conf.size(); ++t) {
            masks[t] = Bitmap(conf[t].height, conf[t].width);
            for (size_t i = 0; i < conf[t].data.size(); ++i)
                masks[t].data[i] = conf[t].data[i] >= bin_threshold ? 1 : 0;
        }
        ScoreReport rep;
        rep.total = pd_fa(masks, gt, threshold, mode);
        rep.roc = roc_auc(conf, gt, roc_points, threshold, mode, domain);
        return rep;
    };

    std::vector<const SequenceEvalData*> all;
    for (const auto& d : data) all.push_back(&d);
    ScoreReport total = score(all);

    json j;
    j["version"] = kVersion;
    j["matching"] = (mode == MatchMode::Optimal) ? "optimal" : "greedy";
    j["centroid_threshold"] = threshold;
    j["binarization_threshold"] = bin_threshold;
    j["fa_domain"] = (domain == FaDomain::Fixed) ? "fixed" : "normalized";
    j["total"] = pdfa_to_json(total.total);
    j["total"]["auc"] = total.roc.auc;
    json roc = json::array();
    for (const auto& [fa, pd] : total.roc.points) roc.push_back(json::array({fa, pd}));
    j["roc"] = std::move(roc);

    json per_scene;
    for (const auto level : {SceneLevel::Easy, SceneLevel::Medium, SceneLevel::Complex}) {
        std::vector<const SequenceEvalData*> group;
        for (const auto& d : data)
            if (d.has_scene && d.scene == level) group.push_back(&d);
        if (group.empty()) continue;
        const ScoreReport rep = score(group);
        json js = pdfa_to_json(rep.total);
        js["auc"] = rep.roc.auc;
        js["sequences"] = group.size();
        per_scene[to_string(level)] = std::move(js);
    }
    j["per_scene"] = std::move(per_scene);

    const std::string text = j.dump(2);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 2;
        }
        out << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
}

int cmd_check(double eps, std::uint64_t seed, const std::string& out_path) {
    const auto lines = rfr::run_kernel_checks(eps, seed);
    bool all_pass = true;
    json j;
    j["version"] = kVersion;
    j["eps"] = eps;
    j["seed"] = seed;
    json checks = json::array();
    for (const auto& l : lines) {
        all_pass = all_pass && l.pass;
        std::cout << (l.pass ? "[PASS] " : "[FAIL] ") << l.name << "  value=" << l.value
                  << "  tolerance=" << l.tolerance << "\n";
        checks.push_back({{"name", l.name}, {"pass", l.pass}, {"value", l.value}, {"tolerance", l.tolerance}});
    }
    j["checks"] = std::move(checks);
    j["all_pass"] = all_pass;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 2;
        }
        out << j.dump(2) << "\n";
    }
    std::cout << (all_pass ? "all kernel checks passed" : "kernel checks FAILED") << "\n";
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"irsim: infrared satellite video synthesis and evaluation toolbox"};
    app.require_subcommand(1);

    // generate
    std::string spec_path, out_dir = "out";
    int count = 1;
    std::uint64_t seed_override = 0;
    bool allow_oor = false;
    int workers = default_workers();
    auto* gen = app.add_subcommand("generate", "synthesize sequences from a spec file");
    gen->add_option("--spec", spec_path, "sequence spec JSON file")->required();
    gen->add_option("--out", out_dir, "output dataset directory");
    gen->add_option("--count", count, "number of sequences to derive from the spec")
        ->check(CLI::PositiveNumber);
    auto* seed_opt = gen->add_option("--seed", seed_override, "override the spec seed");
    gen->add_option("--workers", workers, "worker threads (env IRSIM_WORKERS)")
        ->check(CLI::PositiveNumber);
    gen->add_flag("--allow-out-of-range", allow_oor, "accept spec values outside Table ranges");

    // stats
    std::string data_dir, stats_out;
    auto* st = app.add_subcommand("stats", "dataset statistics report");
    st->add_option("--data", data_dir, "dataset directory (or one sequence directory)")->required();
    st->add_option("--out", stats_out, "write the JSON report here");

    // eval
    std::string pred_dir, gt_dir, match_mode = "greedy", fa_domain = "normalized", eval_out;
    double threshold = 3.0, bin_threshold = 0.5;
    int roc_points = 101;
    auto* ev = app.add_subcommand("eval", "score prediction maps against ground truth");
    ev->add_option("--pred", pred_dir, "prediction PNG directory")->required();
    ev->add_option("--gt", gt_dir, "ground-truth dataset directory")->required();
    ev->add_option("--threshold", threshold, "centroid match threshold in px");
    ev->add_option("--match", match_mode, "matching mode")->check(CLI::IsMember({"greedy", "optimal"}));
    ev->add_option("--bin-threshold", bin_threshold, "fixed binarization threshold");
    ev->add_option("--roc-points", roc_points, "number of ROC sweep thresholds");
    ev->add_option("--fa-domain", fa_domain, "AUC fa-axis normalization")
        ->check(CLI::IsMember({"normalized", "fixed"}));
    ev->add_option("--out", eval_out, "write the JSON report here");

    // check
    double eps = 1e-5;
    std::uint64_t check_seed = 20240901;
    std::string check_out;
    auto* ck = app.add_subcommand("check", "run kernel property and gradient suites");
    ck->add_option("--eps", eps, "finite-difference step");
    ck->add_option("--seed", check_seed, "suite RNG seed");
    ck->add_option("--out", check_out, "write the JSON summary here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(spec_path, out_dir, count, seed_opt->count() > 0, seed_override,
                                workers, allow_oor);
        if (st->parsed()) return cmd_stats(data_dir, stats_out);
        if (ev->parsed())
            return cmd_eval(pred_dir, gt_dir, threshold, match_mode, bin_threshold, roc_points,
                            fa_domain, eval_out);
        if (ck->parsed()) return cmd_check(eps, check_seed, check_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
