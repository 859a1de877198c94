#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "printleak/gcode.hpp"
#include "printleak/geom.hpp"

namespace printleak::reconstruct {

struct ReconstructParams {
    int smooth_window = 3; // odd; sliding-window majority vote
    double frame_ms = 100.0;
    double slow_feed = 600.0;  // class -> feed map, mm/min
    double fast_feed = 3000.0;
    double layer_height = 0.2; // mm per detected Z run
};

struct PredictedSegment {
    gcode::MovementLabel label;
    int n_frames = 0;
    double duration_s = 0.0;
    double inferred_feed = 0.0;   // mm/min
    double inferred_length = 0.0; // mm; Z runs are re-measured as layer_height
};

// Sliding-window majority vote over full labels. Window must be odd and
// positive; positions where the window does not fit keep their original
// label. Suppresses single-frame misclassifications before segmentation.
std::vector<gcode::MovementLabel> smooth_labels(const std::vector<gcode::MovementLabel>& labels,
                                                int window = 3);

// Collapses maximal runs of identical movement (plane, axis, direction,
// header); the majority speed class within a run sets the inferred feed.
std::vector<PredictedSegment> segment_labels(const std::vector<gcode::MovementLabel>& labels,
                                             const ReconstructParams& params = {});

// Chains segments head-to-tail from `start`: direction gives the unit vector,
// feed x duration the length; Z runs rise by layer_height.
gcode::Toolpath segments_to_toolpath(const std::vector<PredictedSegment>& segs, Vec3 start = {},
                                     const ReconstructParams& params = {});

struct SegmentMatch {
    int rec_index = -1;  // -1 when the original segment went unmatched
    int orig_index = -1; // -1 when the reconstructed segment is spurious
    double rec_length = 0.0;
    double orig_length = 0.0;
    double error_percent = 0.0; // |rec-orig|/orig * 100, or 100 for unmatched
};

struct MteBreakdown {
    double mte_percent = 0.0;          // normative score
    double weighted_percent = 0.0;     // length-weighted alternate
    double signed_percent = 0.0;       // mean signed error over matched pairs
    int matched = 0;
    int unmatched_rec = 0;
    int unmatched_orig = 0;
    std::vector<SegmentMatch> per_segment;
};

// Mean Tendency Error: segments are aligned by an order-preserving greedy
// match on (plane, axis, direction); the score is the mean over matched pairs
// of |len_rec - len_orig| / len_orig, with every unmatched segment counting as
// 100%. Throws DataError when the original is empty.
MteBreakdown mte_breakdown(const gcode::Toolpath& reconstructed, const gcode::Toolpath& original);
double mean_tendency_error(const gcode::Toolpath& reconstructed, const gcode::Toolpath& original);

struct OverlayPolyline {
    int layer = 0;
    std::vector<Vec3> points; // XY projection, z kept for reference
};

struct OverlayData {
    std::vector<OverlayPolyline> original;
    std::vector<OverlayPolyline> reconstructed;
};

// XY-projected polylines per layer for plotting both paths on top of each
// other.
OverlayData compare_overlay(const gcode::Toolpath& reconstructed,
                            const gcode::Toolpath& original);
void write_overlay_csv(const OverlayData& overlay, std::ostream& out);
void write_overlay_svg(const OverlayData& overlay, std::ostream& out);

struct ReconstructionReport {
    gcode::Toolpath reconstructed;
    MteBreakdown mte;
    std::string to_text() const;
};

} // namespace printleak::reconstruct
