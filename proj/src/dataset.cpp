#include "irsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "irsim/pngio.hpp"
#include "irsim/spec.hpp"

namespace irsim::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

std::string frame_name(int t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.png", t);
    return buf;
}

void write_frame_png(const std::string& seq_dir, int t, const ImageF& frame, FrameScale scale) {
    fs::create_directories(fs::path(seq_dir) / "frames");
    std::vector<std::uint16_t> q(frame.data.size(), 0);
    const double range = scale.hi - scale.lo;
    if (range > 0.0) {
        for (size_t i = 0; i < frame.data.size(); ++i) {
            const double v = (frame.data[i] - scale.lo) / range * 65535.0;
            q[i] = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 65535.0)));
        }
    }
    write_png_gray16((fs::path(seq_dir) / "frames" / frame_name(t)).string(), q, frame.height,
                     frame.width);
}

void write_mask_png(const std::string& seq_dir, int t, const std::vector<InstanceAnnotation>& instances,
                    int height, int width) {
    fs::create_directories(fs::path(seq_dir) / "masks");
    std::vector<std::uint8_t> ids(static_cast<size_t>(height) * width, 0);
    for (const auto& inst : instances) {
        if (!inst.visible) continue;
        const auto& m = inst.mask;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.get(y, x))
                    ids[static_cast<size_t>(m.y0 + y) * width + (m.x0 + x)] =
                        static_cast<std::uint8_t>(inst.id);
    }
    write_png_gray8((fs::path(seq_dir) / "masks" / frame_name(t)).string(), ids, height, width);
}

void write_annotations(const std::string& seq_dir, const std::string& name,
                       const std::vector<FrameAnnotation>& annotations) {
    json j;
    j["version"] = kVersion;
    j["sequence"] = name;
    json frames = json::array();
    for (const auto& fa : annotations) {
        json jf;
        jf["frame"] = fa.frame;
        json insts = json::array();
        for (const auto& inst : fa.instances) {
            json ji;
            ji["id"] = inst.id;
            ji["bbox"] = json::array({inst.bbox_x, inst.bbox_y, inst.bbox_w, inst.bbox_h});
            ji["centroid"] = json::array({inst.centroid.x, inst.centroid.y});
            ji["visible"] = inst.visible;
            ji["scr"] = std::isfinite(inst.scr) ? json(inst.scr) : json("inf");
            ji["area"] = inst.mask.count();
            insts.push_back(std::move(ji));
        }
        jf["instances"] = std::move(insts);
        frames.push_back(std::move(jf));
    }
    j["frames"] = std::move(frames);
    fs::create_directories(seq_dir);
    std::ofstream out(fs::path(seq_dir) / "annotations.json");
    if (!out) throw std::runtime_error("write_annotations: cannot write in " + seq_dir);
    out << j.dump(2) << "\n";
}

void write_record(const std::string& seq_dir, const RenderContext& ctx, FrameScale scale) {
    json j;
    j["version"] = kVersion;
    j["rng"] = Rng::kAlgorithm;
    j["seed"] = ctx.spec.seed;
    j["spec"] = json::parse(spec_to_json(ctx.spec));
    j["intensity_scale"] = {{"lo", scale.lo}, {"hi", scale.hi}};
    j["blur"] = {{"kernel", ctx.blur_kernel}, {"sigma", ctx.blur_sigma}};

    json targets = json::array();
    for (size_t i = 0; i < ctx.tracks.size(); ++i) {
        const auto& tr = ctx.tracks[i];
        json jt;
        jt["id"] = tr.id;
        jt["scr"] = tr.scr;
        jt["swerves"] = tr.swerves;
        json keys = json::array();
        for (const auto& [frame, g] : tr.key_appearances)
            keys.push_back({{"frame", frame}, {"h", g.h}, {"w", g.w}, {"sigma", g.sigma}});
        jt["keys"] = std::move(keys);
        jt["appearance_frame1"] = {{"h", tr.appearance[0].h},
                                   {"w", tr.appearance[0].w},
                                   {"sigma", tr.appearance[0].sigma}};
        jt["mu_lb1"] = ctx.intensity[i].mu_lb1;
        jt["sigma_lb1"] = ctx.intensity[i].sigma_lb1;
        targets.push_back(std::move(jt));
    }
    j["targets"] = std::move(targets);

    json pose;
    const auto& first = ctx.pose.samples.front();
    const auto& last = ctx.pose.samples.back();
    pose["attitude_first"] = json::array({first.attitude.x, first.attitude.y, first.attitude.z});
    pose["attitude_last"] = json::array({last.attitude.x, last.attitude.y, last.attitude.z});
    pose["translation_first"] = json::array({first.translation.x, first.translation.y});
    pose["translation_last"] = json::array({last.translation.x, last.translation.y});
    j["pose"] = std::move(pose);

    fs::create_directories(seq_dir);
    std::ofstream out(fs::path(seq_dir) / "record.json");
    if (!out) throw std::runtime_error("write_record: cannot write in " + seq_dir);
    out << j.dump(2) << "\n";
}

LoadedSequence load_sequence(const std::string& seq_dir) {
    LoadedSequence seq;
    seq.dir = seq_dir;

    const fs::path anno_path = fs::path(seq_dir) / "annotations.json";
    std::ifstream in(anno_path);
    if (!in) throw std::runtime_error("load_sequence: missing " + anno_path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("load_sequence: bad annotations.json: " + std::string(e.what()));
    }
    seq.name = j.value("sequence", fs::path(seq_dir).filename().string());
    for (const auto& jf : j.at("frames")) {
        FrameAnnotation fa;
        fa.frame = jf.at("frame").get<int>();
        for (const auto& ji : jf.at("instances")) {
            InstanceAnnotation inst;
            inst.id = ji.at("id").get<int>();
            const auto& bb = ji.at("bbox");
            inst.bbox_x = bb[0].get<double>();
            inst.bbox_y = bb[1].get<double>();
            inst.bbox_w = bb[2].get<double>();
            inst.bbox_h = bb[3].get<double>();
            inst.centroid = Vec2{ji.at("centroid")[0].get<double>(), ji.at("centroid")[1].get<double>()};
            inst.visible = ji.at("visible").get<bool>();
            inst.scr = ji.at("scr").is_string() ? std::numeric_limits<double>::infinity()
                                                : ji.at("scr").get<double>();
            inst.mask.width = 0; // not materialized from JSON
            fa.instances.push_back(std::move(inst));
        }
        seq.annotations.push_back(std::move(fa));
    }
    seq.frames = static_cast<int>(seq.annotations.size());

    for (const char* sub : {"frames", "masks"}) {
        const fs::path d = fs::path(seq_dir) / sub;
        std::vector<std::string>& dst = (std::string(sub) == "frames") ? seq.frame_paths : seq.mask_paths;
        if (fs::is_directory(d)) {
            for (const auto& e : fs::directory_iterator(d))
                if (e.path().extension() == ".png") dst.push_back(e.path().string());
            std::sort(dst.begin(), dst.end());
        }
    }

    const fs::path rec_path = fs::path(seq_dir) / "record.json";
    if (fs::exists(rec_path)) {
        std::ifstream rin(rec_path);
        json r;
        rin >> r;
        seq.has_record = true;
        seq.seed = r.value("seed", std::uint64_t{0});
        if (r.contains("intensity_scale")) {
            seq.scale.lo = r.at("intensity_scale").value("lo", 0.0);
            seq.scale.hi = r.at("intensity_scale").value("hi", 0.0);
        }
        if (r.contains("targets"))
            for (const auto& jt : r.at("targets")) {
                TargetRecord tr;
                tr.id = jt.value("id", 0);
                tr.scr = jt.value("scr", 0.0);
                tr.swerves = jt.value("swerves", 0);
                if (jt.contains("appearance_frame1")) {
                    tr.h1 = jt.at("appearance_frame1").value("h", 0.0);
                    tr.w1 = jt.at("appearance_frame1").value("w", 0.0);
                    tr.sigma1 = jt.at("appearance_frame1").value("sigma", 0.0);
                }
                seq.targets.push_back(tr);
            }
    }
    return seq;
}

std::vector<std::string> list_sequence_dirs(const std::string& root) {
    std::vector<std::string> dirs;
    if (fs::exists(fs::path(root) / "annotations.json")) {
        dirs.push_back(root);
        return dirs;
    }
    if (!fs::is_directory(root)) throw std::runtime_error("dataset: no such directory: " + root);
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "annotations.json"))
            dirs.push_back(e.path().string());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw std::runtime_error("dataset: no sequences (annotations.json) under " + root);
    return dirs;
}

} // namespace irsim::dataset
