#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "printleak/features.hpp"
#include "printleak/gbdt.hpp"
#include "printleak/gcode.hpp"

namespace printleak::cascade {

// Decision nodes, evaluated in taxonomy order: plane first, then axis, then
// the direction node matching the axis; header and speed always run.
enum class NodeId { Layer = 0, Axial, DirX, DirY, Header, Speed };
inline constexpr int kNodeCount = 6;

const char* node_name(NodeId id);
std::array<std::string, 2> node_class_names(NodeId id);

enum class FeatureMask { All, AcousticOnly, MagneticOnly };

struct CascadeParams {
    gbdt::TrainParams gbdt;
    double train_fraction = 0.25; // stratified; remainder is the held-out set
    std::uint64_t seed = 0;

    // Per-node feature masks. Direction and axial nodes default to magnetic
    // statistics, header and speed to acoustic features; the layer node uses
    // both channels (configurable, since either choice is defensible).
    FeatureMask layer_mask = FeatureMask::All;
    FeatureMask axial_mask = FeatureMask::MagneticOnly;
    FeatureMask dir_mask = FeatureMask::MagneticOnly;
    FeatureMask header_mask = FeatureMask::AcousticOnly;
    FeatureMask speed_mask = FeatureMask::AcousticOnly;

    features::FeatureConfig feature_config;
};

struct NodeReport {
    double accuracy = 0.0;
    int n_eval = 0;
    // confusion[truth][predicted], class order per node_class_names.
    std::array<std::array<int, 2>, 2> confusion{};
};

struct CascadeModel {
    std::array<gbdt::GbdtModel, kNodeCount> nodes;
    std::array<std::vector<int>, kNodeCount> masks;
    std::array<NodeReport, kNodeCount> heldout;
    CascadeParams params;
    int n_features = 0;
};

struct EvalReport {
    std::array<NodeReport, kNodeCount> nodes;
    double macro_mean = 0.0;

    std::string to_text() const;
    void to_csv(std::ostream& out) const;
};

// Trains the six node models, each on the frames relevant to it (e.g. dir_x
// only on XY/X frames), with a deterministic stratified train/held-out split.
// Throws ModelError naming the node when one of its classes is absent.
CascadeModel train_cascade(const std::vector<features::FeatureVector>& frames,
                           const std::vector<gcode::MovementLabel>& labels,
                           const CascadeParams& params);

// Full label for one frame; at most layer + axial + one direction node plus
// header and speed are evaluated.
gcode::MovementLabel classify_frame(const CascadeModel& c, const features::FeatureVector& v);

// Per-node accuracy and confusion counts on ground-truth-routed frames.
EvalReport evaluate_cascade(const CascadeModel& c,
                            const std::vector<features::FeatureVector>& frames,
                            const std::vector<gcode::MovementLabel>& labels);

// Container file: magic header, masks, held-out reports and the six
// embedded model blocks.
void save_cascade(const CascadeModel& c, std::ostream& out);
CascadeModel load_cascade(std::istream& in);

std::string heldout_report_text(const CascadeModel& c);

} // namespace printleak::cascade
