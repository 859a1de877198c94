#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "printleak/cascade.hpp"
#include "printleak/features.hpp"
#include "printleak/gcode.hpp"
#include "printleak/ingest.hpp"
#include "printleak/reconstruct.hpp"
#include "printleak/simulate.hpp"

namespace printleak::pipeline {

struct PipelineConfig {
    simulate::SimConfig sim = simulate::SimConfig::preset(15.0);
    double frame_ms = 100.0;
    features::FeatureConfig features;
    cascade::CascadeParams cascade;
    reconstruct::ReconstructParams reconstruct;
    // Feature time-series smoothing across frames (sigma in frames). Off by
    // default for classification: blending features across segment boundaries
    // costs exactness; the features CLI exposes it for inspection exports.
    double feature_smooth_sigma = 0.0;
    int train_frames_per_class = 500;
};

// The desk benchmark object: an axis-aligned square printed for `layers`
// layers. Side traversal and layer lift durations land exactly on frame
// boundaries with the default feeds.
gcode::Toolpath square_toolpath(double side_mm = 10.0, int layers = 3,
                                double print_feed = 600.0, double z_feed = 120.0,
                                double layer_height = 0.2, Vec3 start = {});

// A contiguous exercise routine covering every movement class: ping-pong X
// and Y strokes for each speed/extrusion combination, Z stair climbs, and the
// travel moves that link the blocks. Produces at least `frames_per_class`
// frames for each of XLeft/XRight/YUp/YDown/Z.
gcode::Toolpath training_toolpath(int frames_per_class, const simulate::SimConfig& cfg,
                                  std::uint64_t seed);

// Frame features for a trace (align + build_feature_vector per frame,
// optional cross-frame smoothing).
std::vector<features::FeatureVector> extract_features(const ingest::SensorTrace& trace,
                                                      double frame_ms,
                                                      const features::FeatureConfig& cfg,
                                                      double smooth_sigma = 0.0);

// Label CSV: header "frame_idx,label", labels in to_string form.
void write_label_csv(std::ostream& out, const std::vector<gcode::MovementLabel>& labels);
std::vector<gcode::MovementLabel> read_label_csv(std::istream& in);

// Simulate -> features -> train, in memory.
cascade::CascadeModel train_from_trace(const ingest::SensorTrace& trace,
                                       const std::vector<gcode::MovementLabel>& labels,
                                       const PipelineConfig& cfg);

struct SquareRun {
    double distance_cm = 0.0;
    double mte_percent = 0.0;
    reconstruct::MteBreakdown mte;
    cascade::CascadeModel model;
    gcode::Toolpath original;
    gcode::Toolpath reconstructed;
    double heldout_macro_mean = 0.0;
};

// One end-to-end pass at a distance preset: train on the routine, simulate
// the square, classify, rebuild, score.
SquareRun run_square(std::uint64_t seed, double distance_cm, const PipelineConfig& cfg);

struct ReproResult {
    std::vector<SquareRun> runs; // one per distance
    std::string table_text;     // distance / MTE / node accuracy table
};

// The full benchmark: run_square at each distance preset with a shared seed.
ReproResult repro_square(std::uint64_t seed, const std::vector<double>& distances_cm,
                         const PipelineConfig& cfg);

} // namespace printleak::pipeline
