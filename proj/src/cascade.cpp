#include "printleak/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "printleak/errors.hpp"
#include "printleak/rng.hpp"
#include "text_util.hpp"

namespace printleak::cascade {

namespace {

constexpr const char* kMagic = "printleak-cascade";
constexpr int kVersion = 1;

const std::array<NodeId, kNodeCount> kAllNodes = {NodeId::Layer, NodeId::Axial, NodeId::DirX,
                                                  NodeId::DirY, NodeId::Header, NodeId::Speed};

// Class index for a frame at one node, or nullopt when the frame is not
// routed through that node.
std::optional<int> node_class(NodeId id, const gcode::MovementLabel& label) {
    using gcode::Axis;
    using gcode::Direction;
    using gcode::Header;
    using gcode::Plane;
    using gcode::SpeedClass;
    switch (id) {
        case NodeId::Layer:
            return label.plane == Plane::Z ? 0 : 1;
        case NodeId::Axial:
            if (label.plane != Plane::XY) return std::nullopt;
            return *label.axis == Axis::X ? 0 : 1;
        case NodeId::DirX:
            if (label.plane != Plane::XY || *label.axis != Axis::X) return std::nullopt;
            return *label.direction == Direction::XLeft ? 0 : 1;
        case NodeId::DirY:
            if (label.plane != Plane::XY || *label.axis != Axis::Y) return std::nullopt;
            return *label.direction == Direction::YUp ? 0 : 1;
        case NodeId::Header:
            return label.header == Header::Printing ? 0 : 1;
        case NodeId::Speed:
            return label.speed_class == SpeedClass::Slow ? 0 : 1;
    }
    return std::nullopt;
}

FeatureMask mask_kind(const CascadeParams& p, NodeId id) {
    switch (id) {
        case NodeId::Layer: return p.layer_mask;
        case NodeId::Axial: return p.axial_mask;
        case NodeId::DirX:
        case NodeId::DirY: return p.dir_mask;
        case NodeId::Header: return p.header_mask;
        case NodeId::Speed: return p.speed_mask;
    }
    return FeatureMask::All;
}

std::vector<int> resolve_mask(FeatureMask kind, const features::FeatureConfig& cfg) {
    switch (kind) {
        case FeatureMask::AcousticOnly: return features::acoustic_indices(cfg);
        case FeatureMask::MagneticOnly: return features::magnetic_indices(cfg);
        case FeatureMask::All: return features::all_indices(cfg);
    }
    return features::all_indices(cfg);
}

} // namespace

const char* node_name(NodeId id) {
    switch (id) {
        case NodeId::Layer: return "layer";
        case NodeId::Axial: return "axial";
        case NodeId::DirX: return "dir_x";
        case NodeId::DirY: return "dir_y";
        case NodeId::Header: return "header";
        case NodeId::Speed: return "speed";
    }
    return "?";
}

std::array<std::string, 2> node_class_names(NodeId id) {
    switch (id) {
        case NodeId::Layer: return {"Z", "XY"};
        case NodeId::Axial: return {"X", "Y"};
        case NodeId::DirX: return {"XLeft", "XRight"};
        case NodeId::DirY: return {"YUp", "YDown"};
        case NodeId::Header: return {"Printing", "Positioning"};
        case NodeId::Speed: return {"Slow", "Fast"};
    }
    return {"?", "?"};
}

CascadeModel train_cascade(const std::vector<features::FeatureVector>& frames,
                           const std::vector<gcode::MovementLabel>& labels,
                           const CascadeParams& params) {
    if (frames.empty()) throw ModelError("train_cascade: no frames");
    if (frames.size() != labels.size()) {
        throw ModelError("train_cascade: frames/labels size mismatch");
    }
    if (params.train_fraction <= 0.0 || params.train_fraction >= 1.0) {
        throw ModelError("train_cascade: train_fraction must be in (0, 1)");
    }
    const std::size_t dim = frames.front().values.size();
    if (dim != features::feature_dim(params.feature_config)) {
        throw ModelError("train_cascade: feature width does not match the feature config");
    }

    CascadeModel model;
    model.params = params;
    model.n_features = static_cast<int>(dim);

    Rng root(params.seed);
    for (std::size_t ni = 0; ni < kAllNodes.size(); ++ni) {
        const NodeId id = kAllNodes[ni];

        std::array<std::vector<int>, 2> by_class;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const auto cls = node_class(id, labels[i]);
            if (cls) by_class[static_cast<std::size_t>(*cls)].push_back(static_cast<int>(i));
        }
        const auto names = node_class_names(id);
        for (int c = 0; c < 2; ++c) {
            if (by_class[static_cast<std::size_t>(c)].empty()) {
                throw ModelError(std::string(node_name(id)) + " missing class " +
                                 names[static_cast<std::size_t>(c)]);
            }
        }

        // Stratified deterministic split: train_fraction of each class,
        // at least one frame per class on both sides.
        Rng node_rng = root.fork(ni + 1);
        std::vector<int> train_idx, eval_idx;
        std::vector<int> train_cls, eval_cls;
        for (int c = 0; c < 2; ++c) {
            auto& pool = by_class[static_cast<std::size_t>(c)];
            node_rng.shuffle(pool);
            std::size_t n_train = static_cast<std::size_t>(
                std::round(params.train_fraction * static_cast<double>(pool.size())));
            n_train = std::clamp<std::size_t>(n_train, 1, pool.size() - 1);
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (i < n_train) {
                    train_idx.push_back(pool[i]);
                    train_cls.push_back(c);
                } else {
                    eval_idx.push_back(pool[i]);
                    eval_cls.push_back(c);
                }
            }
        }

        gbdt::Dataset ds;
        ds.n_classes = 2;
        ds.feature_mask = resolve_mask(mask_kind(params, id), params.feature_config);
        ds.rows.reserve(train_idx.size());
        for (int i : train_idx) ds.rows.push_back(frames[static_cast<std::size_t>(i)].values);
        ds.labels = train_cls;

        gbdt::TrainParams tp = params.gbdt;
        tp.seed = node_rng.next_u64();
        model.nodes[ni] = gbdt::train(ds, tp);
        model.masks[ni] = ds.feature_mask;

        NodeReport rep;
        rep.n_eval = static_cast<int>(eval_idx.size());
        int correct = 0;
        for (std::size_t i = 0; i < eval_idx.size(); ++i) {
            const int pred = gbdt::predict_class(
                model.nodes[ni], frames[static_cast<std::size_t>(eval_idx[i])].values);
            const int truth = eval_cls[i];
            rep.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)]++;
            if (pred == truth) ++correct;
        }
        rep.accuracy = eval_idx.empty()
                           ? 0.0
                           : static_cast<double>(correct) / static_cast<double>(eval_idx.size());
        model.heldout[ni] = rep;
    }
    return model;
}

gcode::MovementLabel classify_frame(const CascadeModel& c, const features::FeatureVector& v) {
    using gcode::Axis;
    using gcode::Direction;
    using gcode::Header;
    using gcode::Plane;
    using gcode::SpeedClass;

    gcode::MovementLabel label;
    const auto node = [&](NodeId id) -> const gbdt::GbdtModel& {
        return c.nodes[static_cast<std::size_t>(id)];
    };

    if (gbdt::predict_class(node(NodeId::Layer), v.values) == 0) {
        label.plane = Plane::Z;
    } else {
        label.plane = Plane::XY;
        if (gbdt::predict_class(node(NodeId::Axial), v.values) == 0) {
            label.axis = Axis::X;
            label.direction = gbdt::predict_class(node(NodeId::DirX), v.values) == 0
                                  ? Direction::XLeft
                                  : Direction::XRight;
        } else {
            label.axis = Axis::Y;
            label.direction = gbdt::predict_class(node(NodeId::DirY), v.values) == 0
                                  ? Direction::YUp
                                  : Direction::YDown;
        }
    }
    label.header = gbdt::predict_class(node(NodeId::Header), v.values) == 0
                       ? Header::Printing
                       : Header::Positioning;
    label.speed_class = gbdt::predict_class(node(NodeId::Speed), v.values) == 0
                            ? SpeedClass::Slow
                            : SpeedClass::Fast;
    return label;
}

EvalReport evaluate_cascade(const CascadeModel& c,
                            const std::vector<features::FeatureVector>& frames,
                            const std::vector<gcode::MovementLabel>& labels) {
    if (frames.size() != labels.size()) {
        throw ModelError("evaluate_cascade: frames/labels size mismatch");
    }
    EvalReport report;
    double acc_sum = 0.0;
    for (std::size_t ni = 0; ni < kAllNodes.size(); ++ni) {
        const NodeId id = kAllNodes[ni];
        NodeReport rep;
        int correct = 0;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const auto truth = node_class(id, labels[i]);
            if (!truth) continue;
            const int pred = gbdt::predict_class(c.nodes[ni], frames[i].values);
            rep.confusion[static_cast<std::size_t>(*truth)][static_cast<std::size_t>(pred)]++;
            rep.n_eval++;
            if (pred == *truth) ++correct;
        }
        rep.accuracy =
            rep.n_eval > 0 ? static_cast<double>(correct) / static_cast<double>(rep.n_eval) : 0.0;
        report.nodes[ni] = rep;
        acc_sum += rep.accuracy;
    }
    report.macro_mean = acc_sum / static_cast<double>(kNodeCount);
    return report;
}

namespace {

void format_node_table(std::ostream& out, const std::array<NodeReport, kNodeCount>& nodes) {
    out << "node      classes                  n_eval  accuracy  confusion (t0p0 t0p1 t1p0 t1p1)\n";
    for (std::size_t ni = 0; ni < kAllNodes.size(); ++ni) {
        const NodeId id = kAllNodes[ni];
        const auto names = node_class_names(id);
        const NodeReport& r = nodes[ni];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-9s %-11s/%-11s %7d  %8.4f  %d %d %d %d\n",
                      node_name(id), names[0].c_str(), names[1].c_str(), r.n_eval, r.accuracy,
                      r.confusion[0][0], r.confusion[0][1], r.confusion[1][0], r.confusion[1][1]);
        out << buf;
    }
}

} // namespace

std::string EvalReport::to_text() const {
    std::ostringstream out;
    out << "cascade evaluation\n";
    format_node_table(out, nodes);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "macro mean accuracy: %.4f\n", macro_mean);
    out << buf;
    return out.str();
}

void EvalReport::to_csv(std::ostream& out) const {
    out << "node,class0,class1,n_eval,accuracy,t0p0,t0p1,t1p0,t1p1\n";
    for (std::size_t ni = 0; ni < kAllNodes.size(); ++ni) {
        const NodeId id = kAllNodes[ni];
        const auto names = node_class_names(id);
        const NodeReport& r = nodes[ni];
        out << node_name(id) << ',' << names[0] << ',' << names[1] << ',' << r.n_eval << ','
            << detail::format_general(r.accuracy, 9) << ',' << r.confusion[0][0] << ','
            << r.confusion[0][1] << ',' << r.confusion[1][0] << ',' << r.confusion[1][1] << '\n';
    }
}

std::string heldout_report_text(const CascadeModel& c) {
    std::ostringstream out;
    out << "held-out node accuracy (train fraction "
        << detail::format_general(c.params.train_fraction, 4) << ")\n";
    format_node_table(out, c.heldout);
    double sum = 0.0;
    for (const auto& r : c.heldout) sum += r.accuracy;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "macro mean accuracy: %.4f\n",
                  sum / static_cast<double>(kNodeCount));
    out << buf;
    return out.str();
}

void save_cascade(const CascadeModel& c, std::ostream& out) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "n_features " << c.n_features << '\n';
    out << "train_fraction " << detail::format_exact(c.params.train_fraction) << '\n';
    out << "seed " << c.params.seed << '\n';
    for (std::size_t ni = 0; ni < kAllNodes.size(); ++ni) {
        const NodeReport& r = c.heldout[ni];
        out << "node " << node_name(kAllNodes[ni]) << '\n';
        out << "mask " << c.masks[ni].size();
        for (int f : c.masks[ni]) out << ' ' << f;
        out << '\n';
        out << "heldout " << detail::format_exact(r.accuracy) << ' ' << r.n_eval << ' '
            << r.confusion[0][0] << ' ' << r.confusion[0][1] << ' ' << r.confusion[1][0] << ' '
            << r.confusion[1][1] << '\n';
        gbdt::save_model(c.nodes[ni], out);
    }
    out << "end-cascade\n";
}

CascadeModel load_cascade(std::istream& in) {
    std::string magic;
    if (!(in >> magic)) throw ModelError("cascade load: empty stream");
    if (magic != kMagic) throw ModelError("cascade load: bad magic '" + magic + "'");
    int version = 0;
    if (!(in >> version) || version != kVersion) {
        throw ModelError("cascade load: unsupported version");
    }

    CascadeModel c;
    std::string tok;
    auto expect = [&](const char* want) {
        if (!(in >> tok) || tok != want) {
            throw ModelError(std::string("cascade load: expected '") + want + "'");
        }
    };
    expect("n_features");
    if (!(in >> c.n_features)) throw ModelError("cascade load: truncated");
    expect("train_fraction");
    if (!(in >> c.params.train_fraction)) throw ModelError("cascade load: truncated");
    expect("seed");
    if (!(in >> c.params.seed)) throw ModelError("cascade load: truncated");

    for (std::size_t ni = 0; ni < kAllNodes.size(); ++ni) {
        expect("node");
        if (!(in >> tok) || tok != node_name(kAllNodes[ni])) {
            throw ModelError("cascade load: nodes out of order");
        }
        expect("mask");
        std::size_t mask_size = 0;
        if (!(in >> mask_size)) throw ModelError("cascade load: truncated mask");
        c.masks[ni].resize(mask_size);
        for (auto& f : c.masks[ni]) {
            if (!(in >> f)) throw ModelError("cascade load: truncated mask");
        }
        expect("heldout");
        NodeReport& r = c.heldout[ni];
        if (!(in >> r.accuracy >> r.n_eval >> r.confusion[0][0] >> r.confusion[0][1] >>
              r.confusion[1][0] >> r.confusion[1][1])) {
            throw ModelError("cascade load: truncated heldout report");
        }
        c.nodes[ni] = gbdt::load_model(in);
    }
    expect("end-cascade");
    return c;
}

} // namespace printleak::cascade
