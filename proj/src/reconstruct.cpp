#include "printleak/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "printleak/errors.hpp"
#include "text_util.hpp"

namespace printleak::reconstruct {

namespace {

using gcode::Axis;
using gcode::Direction;
using gcode::Header;
using gcode::MovementLabel;
using gcode::Plane;
using gcode::SpeedClass;

// Match key: movement identity without header/speed. Two segments can only
// be paired when they move the same way.
struct MatchKey {
    Plane plane;
    std::optional<Axis> axis;
    std::optional<Direction> direction;

    friend bool operator==(const MatchKey&, const MatchKey&) = default;
};

MatchKey key_of(const MovementLabel& l) { return {l.plane, l.axis, l.direction}; }
MatchKey key_of(const gcode::MotionSegment& s) { return key_of(s.label); }

Vec3 unit_vector(const MovementLabel& label) {
    if (label.plane == Plane::Z) return {0.0, 0.0, 1.0};
    switch (*label.direction) {
        case Direction::XLeft: return {-1.0, 0.0, 0.0};
        case Direction::XRight: return {1.0, 0.0, 0.0};
        case Direction::YUp: return {0.0, 1.0, 0.0};
        case Direction::YDown: return {0.0, -1.0, 0.0};
    }
    return {};
}

} // namespace

std::vector<MovementLabel> smooth_labels(const std::vector<MovementLabel>& labels, int window) {
    if (window <= 0 || window % 2 == 0) {
        throw DataError("smooth_labels: window must be odd and positive");
    }
    if (window == 1 || labels.size() < static_cast<std::size_t>(window)) return labels;

    const long half = window / 2;
    const long n = static_cast<long>(labels.size());
    std::vector<MovementLabel> out = labels;
    const auto at = [&](long idx) -> const MovementLabel& {
        return labels[static_cast<std::size_t>(idx)];
    };
    for (long i = half; i + half < n; ++i) {
        // Majority vote over the window; ties keep the center label.
        const auto count_of = [&](const MovementLabel& cand) {
            int count = 0;
            for (long b = i - half; b <= i + half; ++b) {
                if (at(b) == cand) ++count;
            }
            return count;
        };
        int best_count = 0;
        MovementLabel best = at(i);
        for (long a = i - half; a <= i + half; ++a) {
            const int count = count_of(at(a));
            if (count > best_count) {
                best_count = count;
                best = at(a);
            }
        }
        if (best_count > count_of(at(i))) out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

std::vector<PredictedSegment> segment_labels(const std::vector<MovementLabel>& labels,
                                             const ReconstructParams& params) {
    std::vector<PredictedSegment> segs;
    std::size_t i = 0;
    while (i < labels.size()) {
        std::size_t j = i;
        int fast_votes = 0;
        while (j < labels.size() && labels[j].same_movement(labels[i])) {
            if (labels[j].speed_class == SpeedClass::Fast) ++fast_votes;
            ++j;
        }
        const int n = static_cast<int>(j - i);
        PredictedSegment seg;
        seg.label = labels[i];
        seg.label.speed_class = 2 * fast_votes > n ? SpeedClass::Fast : SpeedClass::Slow;
        seg.n_frames = n;
        seg.duration_s = static_cast<double>(n) * params.frame_ms / 1000.0;
        seg.inferred_feed =
            seg.label.speed_class == SpeedClass::Fast ? params.fast_feed : params.slow_feed;
        seg.inferred_length = seg.inferred_feed * seg.duration_s / 60.0;
        segs.push_back(seg);
        i = j;
    }
    return segs;
}

gcode::Toolpath segments_to_toolpath(const std::vector<PredictedSegment>& segs, Vec3 start,
                                     const ReconstructParams& params) {
    gcode::Toolpath path;
    path.origin = start;
    Vec3 pos = start;
    int layer = 0;
    for (const auto& ps : segs) {
        gcode::MotionSegment seg;
        seg.start = pos;
        const double length =
            ps.label.plane == Plane::Z ? params.layer_height : ps.inferred_length;
        seg.end = pos + unit_vector(ps.label) * length;
        seg.feed_mm_min = ps.inferred_feed;
        seg.extruding = ps.label.header == Header::Printing;
        seg.label = ps.label;
        if (ps.label.plane == Plane::Z) ++layer;
        seg.layer = layer;
        path.segments.push_back(seg);
        pos = seg.end;
    }
    return path;
}

MteBreakdown mte_breakdown(const gcode::Toolpath& reconstructed, const gcode::Toolpath& original) {
    if (original.empty()) throw DataError("mean_tendency_error: empty original toolpath");

    const auto& rec = reconstructed.segments;
    const auto& orig = original.segments;

    // Order-preserving greedy alignment: on a key mismatch, skip the side
    // whose next same-key partner is closer; ties drop the reconstructed
    // segment (a spurious detection).
    MteBreakdown out;
    std::size_t i = 0, j = 0;
    const std::size_t inf = std::numeric_limits<std::size_t>::max();
    auto next_with_key = [](const auto& segs, std::size_t from, const MatchKey& key) {
        for (std::size_t k = from; k < segs.size(); ++k) {
            if (key_of(segs[k]) == key) return k;
        }
        return std::numeric_limits<std::size_t>::max();
    };

    double err_sum = 0.0;
    double signed_sum = 0.0;
    double abs_len_err = 0.0;
    double matched_orig_len = 0.0;
    double unmatched_len = 0.0;

    auto drop_rec = [&](std::size_t k) {
        out.per_segment.push_back({static_cast<int>(k), -1, rec[k].length(), 0.0, 100.0});
        out.unmatched_rec++;
        unmatched_len += rec[k].length();
    };
    auto drop_orig = [&](std::size_t k) {
        out.per_segment.push_back({-1, static_cast<int>(k), 0.0, orig[k].length(), 100.0});
        out.unmatched_orig++;
        unmatched_len += orig[k].length();
        matched_orig_len += orig[k].length();
    };

    while (i < rec.size() && j < orig.size()) {
        if (key_of(rec[i]) == key_of(orig[j])) {
            const double lr = rec[i].length();
            const double lo = orig[j].length();
            const double err = std::fabs(lr - lo) / lo;
            err_sum += err;
            signed_sum += (lr - lo) / lo;
            abs_len_err += std::fabs(lr - lo);
            matched_orig_len += lo;
            out.per_segment.push_back(
                {static_cast<int>(i), static_cast<int>(j), lr, lo, 100.0 * err});
            out.matched++;
            ++i;
            ++j;
            continue;
        }
        const std::size_t rec_next = next_with_key(rec, i, key_of(orig[j]));
        const std::size_t orig_next = next_with_key(orig, j, key_of(rec[i]));
        const std::size_t rec_skip = rec_next == inf ? inf : rec_next - i;
        const std::size_t orig_skip = orig_next == inf ? inf : orig_next - j;
        if (rec_skip == inf && orig_skip == inf) {
            drop_rec(i++);
            drop_orig(j++);
        } else if (rec_skip <= orig_skip) {
            drop_rec(i++);
        } else {
            drop_orig(j++);
        }
    }
    while (i < rec.size()) drop_rec(i++);
    while (j < orig.size()) drop_orig(j++);

    const int unmatched = out.unmatched_rec + out.unmatched_orig;
    const int total = out.matched + unmatched;
    out.mte_percent =
        total > 0 ? 100.0 * (err_sum + static_cast<double>(unmatched)) / static_cast<double>(total)
                  : 0.0;
    out.signed_percent = out.matched > 0 ? 100.0 * signed_sum / out.matched : 0.0;
    out.weighted_percent = matched_orig_len > 0.0
                               ? 100.0 * (abs_len_err + unmatched_len) / matched_orig_len
                               : (unmatched > 0 ? 100.0 : 0.0);
    return out;
}

double mean_tendency_error(const gcode::Toolpath& reconstructed, const gcode::Toolpath& original) {
    return mte_breakdown(reconstructed, original).mte_percent;
}

namespace {

std::vector<OverlayPolyline> polylines_of(const gcode::Toolpath& t) {
    std::vector<OverlayPolyline> lines;
    const gcode::MotionSegment* prev = nullptr;
    for (const auto& seg : t.segments) {
        if (seg.label.plane == Plane::Z) {
            prev = nullptr;
            continue;
        }
        if (!prev || prev->layer != seg.layer ||
            distance(prev->end, seg.start) > 1e-9) {
            lines.push_back({seg.layer, {seg.start, seg.end}});
        } else {
            lines.back().points.push_back(seg.end);
        }
        prev = &seg;
    }
    return lines;
}

} // namespace

OverlayData compare_overlay(const gcode::Toolpath& reconstructed, const gcode::Toolpath& original) {
    OverlayData overlay;
    overlay.original = polylines_of(original);
    overlay.reconstructed = polylines_of(reconstructed);
    return overlay;
}

void write_overlay_csv(const OverlayData& overlay, std::ostream& out) {
    out << "source,layer,x_mm,y_mm\n";
    const auto dump = [&](const char* source, const std::vector<OverlayPolyline>& lines) {
        for (const auto& line : lines) {
            for (const auto& p : line.points) {
                out << source << ',' << line.layer << ',' << detail::format_fixed(p.x, 3) << ','
                    << detail::format_fixed(p.y, 3) << '\n';
            }
        }
    };
    dump("original", overlay.original);
    dump("reconstructed", overlay.reconstructed);
}

void write_overlay_svg(const OverlayData& overlay, std::ostream& out) {
    double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
    bool first = true;
    const auto scan = [&](const std::vector<OverlayPolyline>& lines) {
        for (const auto& line : lines) {
            for (const auto& p : line.points) {
                if (first) {
                    min_x = max_x = p.x;
                    min_y = max_y = p.y;
                    first = false;
                } else {
                    min_x = std::min(min_x, p.x);
                    max_x = std::max(max_x, p.x);
                    min_y = std::min(min_y, p.y);
                    max_y = std::max(max_y, p.y);
                }
            }
        }
    };
    scan(overlay.original);
    scan(overlay.reconstructed);
    const double pad = 2.0;
    min_x -= pad;
    min_y -= pad;
    max_x += pad;
    max_y += pad;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
        << detail::format_fixed(min_x, 3) << ' ' << detail::format_fixed(min_y, 3) << ' '
        << detail::format_fixed(max_x - min_x, 3) << ' ' << detail::format_fixed(max_y - min_y, 3)
        << "\">\n";
    const auto draw = [&](const std::vector<OverlayPolyline>& lines, const char* stroke,
                          const char* dash) {
        for (const auto& line : lines) {
            out << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"0.25\"";
            if (dash[0] != '\0') out << " stroke-dasharray=\"" << dash << "\"";
            out << " points=\"";
            bool first_pt = true;
            for (const auto& p : line.points) {
                if (!first_pt) out << ' ';
                // SVG y grows downward; flip so the bed reads naturally.
                out << detail::format_fixed(p.x, 3) << ','
                    << detail::format_fixed(max_y + min_y - p.y, 3);
                first_pt = false;
            }
            out << "\"/>\n";
        }
    };
    draw(overlay.original, "#1f77b4", "");
    draw(overlay.reconstructed, "#d62728", "0.8,0.4");
    out << "</svg>\n";
}

std::string ReconstructionReport::to_text() const {
    std::ostringstream out;
    out << "reconstruction report\n";
    out << "segments reconstructed: " << reconstructed.segments.size() << '\n';
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "MTE: %.4f%%  (weighted %.4f%%, signed %+.4f%%)\n"
                  "matched %d, spurious %d, missed %d\n",
                  mte.mte_percent, mte.weighted_percent, mte.signed_percent, mte.matched,
                  mte.unmatched_rec, mte.unmatched_orig);
    out << buf;
    out << "idx_rec,idx_orig,len_rec_mm,len_orig_mm,error_percent\n";
    for (const auto& m : mte.per_segment) {
        out << m.rec_index << ',' << m.orig_index << ',' << detail::format_fixed(m.rec_length, 3)
            << ',' << detail::format_fixed(m.orig_length, 3) << ','
            << detail::format_fixed(m.error_percent, 4) << '\n';
    }
    return out.str();
}

} // namespace printleak::reconstruct
