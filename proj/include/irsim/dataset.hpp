#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsim/compose.hpp"

namespace irsim::dataset {

// On-disk layout of one generated sequence:
//   <dir>/frames/000001.png   16-bit grayscale, per-sequence min-max scaled
//   <dir>/masks/000001.png    8-bit instance ids (0 = background)
//   <dir>/annotations.json    per-frame instance records
//   <dir>/record.json         resolved spec, drawn parameters, scale, version

struct FrameScale {
    double lo = 0.0;
    double hi = 0.0;
};

std::string frame_name(int t); // 1-based, zero padded, ".png"

void write_frame_png(const std::string& seq_dir, int t, const ImageF& frame, FrameScale scale);
void write_mask_png(const std::string& seq_dir, int t, const std::vector<InstanceAnnotation>& instances,
                    int height, int width);
void write_annotations(const std::string& seq_dir, const std::string& name,
                       const std::vector<FrameAnnotation>& annotations);
void write_record(const std::string& seq_dir, const RenderContext& ctx, FrameScale scale);

struct TargetRecord {
    int id = 0;
    double scr = 0.0;
    int swerves = 0;
    double h1 = 0.0, w1 = 0.0, sigma1 = 0.0; // frame-1 appearance
};

struct LoadedSequence {
    std::string dir;
    std::string name;
    int frames = 0;
    std::vector<std::string> frame_paths; // may be empty when frames/ absent
    std::vector<std::string> mask_paths;
    std::vector<FrameAnnotation> annotations; // masks not populated
    bool has_record = false;
    std::uint64_t seed = 0;
    std::vector<TargetRecord> targets;
    FrameScale scale;
};

LoadedSequence load_sequence(const std::string& seq_dir);

// Sequence directories under root (directories containing annotations.json);
// root itself when it is a sequence directory.
std::vector<std::string> list_sequence_dirs(const std::string& root);

} // namespace irsim::dataset
