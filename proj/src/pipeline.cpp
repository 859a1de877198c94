#include "printleak/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "printleak/errors.hpp"
#include "printleak/rng.hpp"
#include "text_util.hpp"

namespace printleak::pipeline {

namespace {

using gcode::Axis;
using gcode::Direction;
using gcode::Header;
using gcode::MotionSegment;
using gcode::MovementLabel;
using gcode::Plane;
using gcode::Toolpath;

// Appends a move to `path`, classifying and tracking the layer index the way
// to_toolpath does.
class PathBuilder {
public:
    PathBuilder(Vec3 start, gcode::LabelConfig label_cfg)
        : pos_(start), label_cfg_(label_cfg) {
        path_.origin = start;
    }

    void move_to(Vec3 target, double feed, bool extruding) {
        if (distance(target, pos_) <= 0.0) return;
        MotionSegment seg;
        seg.start = pos_;
        seg.end = target;
        seg.feed_mm_min = feed;
        seg.extruding = extruding;
        seg.label = gcode::classify_segment(seg, label_cfg_);
        if (seg.label.plane == Plane::Z && target.z > pos_.z) ++layer_;
        seg.layer = layer_;
        path_.segments.push_back(seg);
        pos_ = target;
    }

    void move_by(Vec3 delta, double feed, bool extruding) {
        move_to(pos_ + delta, feed, extruding);
    }

    Vec3 position() const { return pos_; }
    Toolpath take() { return std::move(path_); }

private:
    Toolpath path_;
    Vec3 pos_;
    int layer_ = 0;
    gcode::LabelConfig label_cfg_;
};

} // namespace

Toolpath square_toolpath(double side_mm, int layers, double print_feed, double z_feed,
                         double layer_height, Vec3 start) {
    if (side_mm <= 0.0 || layers < 1) throw DataError("square_toolpath: bad dimensions");
    PathBuilder b(start, {});
    for (int layer = 0; layer < layers; ++layer) {
        if (layer > 0) b.move_by({0.0, 0.0, layer_height}, z_feed, false);
        b.move_by({side_mm, 0.0, 0.0}, print_feed, true);
        b.move_by({0.0, side_mm, 0.0}, print_feed, true);
        b.move_by({-side_mm, 0.0, 0.0}, print_feed, true);
        b.move_by({0.0, -side_mm, 0.0}, print_feed, true);
    }
    return b.take();
}

Toolpath training_toolpath(int frames_per_class, const simulate::SimConfig& cfg,
                           std::uint64_t seed) {
    if (frames_per_class < 8) throw DataError("training_toolpath: needs at least 8 frames/class");

    // All durations are multiples of the 100 ms frame so ground-truth labels
    // are exact: slow XY moves cover 1 mm per frame, fast ones 5 mm, slow Z
    // steps 0.2 mm.
    constexpr double kFrameS = 0.1;
    constexpr double kSlowFeed = 600.0;
    constexpr double kFastFeed = 3000.0;
    constexpr double kZFeed = 120.0;
    constexpr int kStrokeFrames = 10;

    Rng rng(seed);
    PathBuilder b(Vec3{80.0, 80.0, 0.2}, cfg.labels);

    // Per (speed, header) combo each direction gets frames_per_class / 4
    // frames; ping-pong strokes keep the toolpath contiguous and give both
    // directions identical position coverage.
    const int frames_per_combo = (frames_per_class + 3) / 4;
    const int pairs = (frames_per_combo + kStrokeFrames - 1) / kStrokeFrames;

    struct Combo {
        double feed;
        bool extruding;
    };
    const Combo combos[4] = {
        {kSlowFeed, true},  // printing, slow
        {kSlowFeed, false}, // positioning, slow
        {kFastFeed, true},  // printing, fast
        {kFastFeed, false}, // positioning, fast
    };

    const auto reposition = [&](double margin) {
        // Fast travel to a seeded grid point; 5 mm per frame keeps alignment.
        const double gx = 20.0 + 5.0 * static_cast<double>(rng.below(24));
        const double gy = 20.0 + 5.0 * static_cast<double>(rng.below(24));
        (void)margin;
        const Vec3 pos = b.position();
        if (std::fabs(gx - pos.x) > 0.0) b.move_to({gx, pos.y, pos.z}, kFastFeed, false);
        const Vec3 pos2 = b.position();
        if (std::fabs(gy - pos2.y) > 0.0) b.move_to({pos2.x, gy, pos2.z}, kFastFeed, false);
    };

    for (const Combo& combo : combos) {
        const double stroke_mm = combo.feed / 60.0 * kFrameS * kStrokeFrames;
        // X block: right then left, `pairs` times.
        reposition(stroke_mm);
        for (int p = 0; p < pairs; ++p) {
            b.move_by({stroke_mm, 0.0, 0.0}, combo.feed, combo.extruding);
            b.move_by({-stroke_mm, 0.0, 0.0}, combo.feed, combo.extruding);
        }
        // Y block: up then down.
        reposition(stroke_mm);
        for (int p = 0; p < pairs; ++p) {
            b.move_by({0.0, stroke_mm, 0.0}, combo.feed, combo.extruding);
            b.move_by({0.0, -stroke_mm, 0.0}, combo.feed, combo.extruding);
        }
    }

    // Z stairs: slow positioning climbs, ping-ponged to stay near the bed.
    const double z_step = kZFeed / 60.0 * kFrameS * kStrokeFrames; // 2 mm per stroke
    const int z_pairs = (frames_per_class + 2 * kStrokeFrames - 1) / (2 * kStrokeFrames);
    for (int p = 0; p < z_pairs; ++p) {
        b.move_by({0.0, 0.0, z_step}, kZFeed, false);
        b.move_by({0.0, 0.0, -z_step}, kZFeed, false);
    }
    return b.take();
}

std::vector<features::FeatureVector> extract_features(const ingest::SensorTrace& trace,
                                                      double frame_ms,
                                                      const features::FeatureConfig& cfg,
                                                      double smooth_sigma) {
    const auto frames = ingest::align_channels(trace, frame_ms);
    std::vector<features::FeatureVector> rows;
    rows.reserve(frames.size());
    for (const auto& fr : frames) rows.push_back(features::build_feature_vector(fr, cfg));
    if (smooth_sigma > 0.0) return features::smooth_feature_matrix(rows, smooth_sigma);
    return rows;
}

void write_label_csv(std::ostream& out, const std::vector<MovementLabel>& labels) {
    out << "frame_idx,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << gcode::to_string(labels[i]) << '\n';
    }
}

std::vector<MovementLabel> read_label_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("label csv: empty stream");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "frame_idx,label") {
        throw ParseError("label csv: header must be 'frame_idx,label'");
    }
    std::vector<MovementLabel> labels;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != 2) {
            throw ParseError("label csv row " + std::to_string(row) + ": want 2 columns");
        }
        const auto idx = detail::parse_int(fields[0]);
        if (!idx || *idx != static_cast<long long>(labels.size())) {
            throw ParseError("label csv row " + std::to_string(row) + ": bad frame index");
        }
        labels.push_back(gcode::label_from_string(std::string(fields[1])));
    }
    return labels;
}

cascade::CascadeModel train_from_trace(const ingest::SensorTrace& trace,
                                       const std::vector<MovementLabel>& labels,
                                       const PipelineConfig& cfg) {
    auto rows = extract_features(trace, cfg.frame_ms, cfg.features, cfg.feature_smooth_sigma);
    if (rows.size() != labels.size()) {
        throw DataError("train_from_trace: " + std::to_string(rows.size()) + " frames vs " +
                        std::to_string(labels.size()) + " labels");
    }
    cascade::CascadeParams params = cfg.cascade;
    params.feature_config = cfg.features;
    return cascade::train_cascade(rows, labels, params);
}

SquareRun run_square(std::uint64_t seed, double distance_cm, const PipelineConfig& cfg) {
    Rng rng(seed);
    const std::uint64_t toolpath_seed = rng.next_u64();
    const std::uint64_t corpus_seed = rng.next_u64();
    const std::uint64_t square_seed = rng.next_u64();
    const std::uint64_t cascade_seed = rng.next_u64();

    simulate::SimConfig sim = cfg.sim;
    {
        const auto preset = simulate::SimConfig::preset(distance_cm, sim.seed);
        sim.distance_cm = preset.distance_cm;
        sim.sensor_pos_cm = preset.sensor_pos_cm;
    }

    // Train at the same placement the attack runs at.
    simulate::SimConfig corpus_sim = sim;
    corpus_sim.seed = corpus_seed;
    const Toolpath corpus = training_toolpath(cfg.train_frames_per_class, corpus_sim, toolpath_seed);
    const auto corpus_trace = simulate::simulate_emissions(corpus, corpus_sim);
    const auto corpus_labels = simulate::label_trace(corpus, corpus_sim, cfg.frame_ms);

    PipelineConfig train_cfg = cfg;
    train_cfg.cascade.seed = cascade_seed;
    SquareRun run;
    run.distance_cm = distance_cm;
    run.model = train_from_trace(corpus_trace, corpus_labels, train_cfg);
    double macro = 0.0;
    for (const auto& rep : run.model.heldout) macro += rep.accuracy;
    run.heldout_macro_mean = macro / cascade::kNodeCount;

    // The benchmark object.
    run.original = square_toolpath(10.0, 3, cfg.reconstruct.slow_feed, 120.0,
                                   cfg.reconstruct.layer_height, Vec3{});
    simulate::SimConfig square_sim = sim;
    square_sim.seed = square_seed;
    const auto square_trace = simulate::simulate_emissions(run.original, square_sim);
    const auto rows =
        extract_features(square_trace, cfg.frame_ms, cfg.features, cfg.feature_smooth_sigma);

    std::vector<MovementLabel> predicted;
    predicted.reserve(rows.size());
    for (const auto& row : rows) predicted.push_back(cascade::classify_frame(run.model, row));
    predicted = reconstruct::smooth_labels(predicted, cfg.reconstruct.smooth_window);

    reconstruct::ReconstructParams rp = cfg.reconstruct;
    rp.frame_ms = cfg.frame_ms;
    const auto segs = reconstruct::segment_labels(predicted, rp);
    run.reconstructed = reconstruct::segments_to_toolpath(segs, run.original.origin, rp);
    run.mte = reconstruct::mte_breakdown(run.reconstructed, run.original);
    run.mte_percent = run.mte.mte_percent;
    return run;
}

ReproResult repro_square(std::uint64_t seed, const std::vector<double>& distances_cm,
                         const PipelineConfig& cfg) {
    ReproResult result;
    std::ostringstream table;
    table << "square reconstruction benchmark (seed " << seed << ", "
          << cfg.train_frames_per_class << " frames/class)\n";
    table << "distance_cm  mte_percent  heldout_macro  layer   axial   dir_x   dir_y   header  speed\n";
    for (double d : distances_cm) {
        SquareRun run = run_square(seed, d, cfg);
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "%-11.4g  %-11.4f  %-13.4f  %-6.4f  %-6.4f  %-6.4f  %-6.4f  %-6.4f  %-6.4f\n",
                      d, run.mte_percent, run.heldout_macro_mean,
                      run.model.heldout[0].accuracy, run.model.heldout[1].accuracy,
                      run.model.heldout[2].accuracy, run.model.heldout[3].accuracy,
                      run.model.heldout[4].accuracy, run.model.heldout[5].accuracy);
        table << buf;
        result.runs.push_back(std::move(run));
    }
    result.table_text = table.str();
    return result;
}

} // namespace printleak::pipeline
