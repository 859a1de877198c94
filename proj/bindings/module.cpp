#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "printleak/cascade.hpp"
#include "printleak/errors.hpp"
#include "printleak/features.hpp"
#include "printleak/gcode.hpp"
#include "printleak/ingest.hpp"
#include "printleak/pipeline.hpp"
#include "printleak/reconstruct.hpp"
#include "printleak/simulate.hpp"

namespace py = pybind11;
using namespace printleak;

namespace {

std::vector<gcode::MovementLabel> labels_from_strings(const std::vector<std::string>& texts) {
    std::vector<gcode::MovementLabel> labels;
    labels.reserve(texts.size());
    for (const auto& t : texts) labels.push_back(gcode::label_from_string(t));
    return labels;
}

std::vector<std::string> labels_to_strings(const std::vector<gcode::MovementLabel>& labels) {
    std::vector<std::string> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(gcode::to_string(l));
    return out;
}

std::vector<features::FeatureVector> rows_from_lists(
    const std::vector<std::vector<double>>& values) {
    std::vector<features::FeatureVector> rows;
    rows.reserve(values.size());
    for (const auto& v : values) rows.push_back({v, true});
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "printleak: 3D printer side-channel emission and G-code reconstruction toolkit";

    py::register_exception<ParseError>(m, "GcodeParseError", PyExc_ValueError);
    py::register_exception<DataError>(m, "SensorDataError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "CascadeModelError", PyExc_RuntimeError);

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<>())
        .def(py::init([](double x, double y, double z) { return Vec3{x, y, z}; }))
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("__repr__", [](const Vec3& v) {
            std::ostringstream s;
            s << "Vec3(" << v.x << ", " << v.y << ", " << v.z << ")";
            return s.str();
        });

    py::class_<gcode::MotionSegment>(m, "MotionSegment")
        .def_readonly("start", &gcode::MotionSegment::start)
        .def_readonly("end", &gcode::MotionSegment::end)
        .def_readonly("feed_mm_min", &gcode::MotionSegment::feed_mm_min)
        .def_readonly("extruding", &gcode::MotionSegment::extruding)
        .def_readonly("layer", &gcode::MotionSegment::layer)
        .def_property_readonly(
            "label", [](const gcode::MotionSegment& s) { return gcode::to_string(s.label); })
        .def_property_readonly("length", &gcode::MotionSegment::length)
        .def_property_readonly("duration_s", &gcode::MotionSegment::duration_s);

    py::class_<gcode::Toolpath>(m, "Toolpath")
        .def_readonly("segments", &gcode::Toolpath::segments)
        .def_readonly("origin", &gcode::Toolpath::origin)
        .def_property_readonly("duration_s", &gcode::Toolpath::duration_s)
        .def_property_readonly("total_length", &gcode::Toolpath::total_length)
        .def("__len__", [](const gcode::Toolpath& t) { return t.segments.size(); });

    m.def(
        "toolpath_from_gcode",
        [](const std::string& text, const Vec3& start) {
            return gcode::to_toolpath(gcode::parse_gcode(text), start);
        },
        py::arg("text"), py::arg("start") = Vec3{},
        "Parse G-code text into a labeled toolpath");
    m.def("emit_gcode", py::overload_cast<const gcode::Toolpath&>(&gcode::emit_gcode),
          py::arg("toolpath"), "Emit deterministic absolute-mode G-code");

    py::class_<ingest::SensorTrace>(m, "SensorTrace")
        .def(py::init<>())
        .def_readwrite("acoustic", &ingest::SensorTrace::acoustic)
        .def_readwrite("acoustic_rate", &ingest::SensorTrace::acoustic_rate)
        .def_readwrite("magnetic", &ingest::SensorTrace::magnetic)
        .def_readwrite("magnetic_rate", &ingest::SensorTrace::magnetic_rate)
        .def_readwrite("start_time", &ingest::SensorTrace::start_time)
        .def_property_readonly("duration_s", &ingest::SensorTrace::duration_s)
        .def("acoustic_db", &ingest::SensorTrace::acoustic_db);

    m.def("write_sensor_csv", [](const ingest::SensorTrace& trace) {
        std::ostringstream out;
        ingest::write_sensor_csv(trace, out);
        return out.str();
    });
    m.def("read_sensor_csv", [](const std::string& text) {
        std::istringstream in(text);
        return ingest::read_sensor_csv(in);
    });

    py::class_<simulate::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_static("preset", &simulate::SimConfig::preset, py::arg("distance_cm"),
                    py::arg("seed") = 0)
        .def("with_noise_disabled", &simulate::SimConfig::with_noise_disabled)
        .def_readwrite("seed", &simulate::SimConfig::seed)
        .def_readwrite("acoustic_rate", &simulate::SimConfig::acoustic_rate)
        .def_readwrite("magnetic_rate", &simulate::SimConfig::magnetic_rate)
        .def_readwrite("distance_cm", &simulate::SimConfig::distance_cm)
        .def_readwrite("sensor_pos_cm", &simulate::SimConfig::sensor_pos_cm)
        .def_readwrite("noise_db", &simulate::SimConfig::noise_db)
        .def_readwrite("mag_noise_uT", &simulate::SimConfig::mag_noise_uT);

    m.def("simulate_emissions", &simulate::simulate_emissions, py::arg("toolpath"),
          py::arg("config"), "Synthesize the dual-channel sensor trace for a toolpath");
    m.def(
        "label_trace",
        [](const gcode::Toolpath& t, const simulate::SimConfig& cfg, double frame_ms) {
            return labels_to_strings(simulate::label_trace(t, cfg, frame_ms));
        },
        py::arg("toolpath"), py::arg("config"), py::arg("frame_ms") = 100.0,
        "Ground-truth movement label per frame");

    m.def("square_toolpath", &pipeline::square_toolpath, py::arg("side_mm") = 10.0,
          py::arg("layers") = 3, py::arg("print_feed") = 600.0, py::arg("z_feed") = 120.0,
          py::arg("layer_height") = 0.2, py::arg("start") = Vec3{});
    m.def("training_toolpath", &pipeline::training_toolpath, py::arg("frames_per_class"),
          py::arg("config"), py::arg("seed"));

    m.def("feature_names", [] { return features::feature_names({}); });
    m.def(
        "extract_features",
        [](const ingest::SensorTrace& trace, double frame_ms, double smooth_sigma) {
            std::vector<std::vector<double>> out;
            for (auto& row : pipeline::extract_features(trace, frame_ms, {}, smooth_sigma)) {
                out.push_back(std::move(row.values));
            }
            return out;
        },
        py::arg("trace"), py::arg("frame_ms") = 100.0, py::arg("smooth_sigma") = 0.0,
        "Per-frame feature rows (see feature_names())");

    py::class_<cascade::CascadeModel>(m, "CascadeModel")
        .def_property_readonly("heldout_accuracy",
                               [](const cascade::CascadeModel& c) {
                                   py::dict d;
                                   for (int i = 0; i < cascade::kNodeCount; ++i) {
                                       d[cascade::node_name(static_cast<cascade::NodeId>(i))] =
                                           c.heldout[static_cast<std::size_t>(i)].accuracy;
                                   }
                                   return d;
                               })
        .def("save", [](const cascade::CascadeModel& c) {
            std::ostringstream out;
            cascade::save_cascade(c, out);
            return out.str();
        });
    m.def("load_cascade", [](const std::string& text) {
        std::istringstream in(text);
        return cascade::load_cascade(in);
    });

    m.def(
        "train_cascade",
        [](const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels,
           int n_rounds, int max_depth, double learning_rate, int min_leaf,
           double train_fraction, std::uint64_t seed) {
            cascade::CascadeParams params;
            params.gbdt.n_rounds = n_rounds;
            params.gbdt.max_depth = max_depth;
            params.gbdt.learning_rate = learning_rate;
            params.gbdt.min_leaf = min_leaf;
            params.train_fraction = train_fraction;
            params.seed = seed;
            return cascade::train_cascade(rows_from_lists(rows), labels_from_strings(labels),
                                          params);
        },
        py::arg("features"), py::arg("labels"), py::arg("n_rounds") = 200,
        py::arg("max_depth") = 3, py::arg("learning_rate") = 0.1, py::arg("min_leaf") = 5,
        py::arg("train_fraction") = 0.25, py::arg("seed") = 0,
        "Train the six-node movement cascade on labeled feature rows");

    m.def(
        "classify_frames",
        [](const cascade::CascadeModel& model, const std::vector<std::vector<double>>& rows) {
            std::vector<std::string> out;
            out.reserve(rows.size());
            for (const auto& row : rows) {
                out.push_back(
                    gcode::to_string(cascade::classify_frame(model, {row, true})));
            }
            return out;
        },
        py::arg("model"), py::arg("features"));

    m.def(
        "smooth_labels",
        [](const std::vector<std::string>& labels, int window) {
            return labels_to_strings(
                reconstruct::smooth_labels(labels_from_strings(labels), window));
        },
        py::arg("labels"), py::arg("window") = 3);

    m.def(
        "reconstruct_toolpath",
        [](const std::vector<std::string>& labels, double frame_ms, double slow_feed,
           double fast_feed, double layer_height, const Vec3& start) {
            reconstruct::ReconstructParams params;
            params.frame_ms = frame_ms;
            params.slow_feed = slow_feed;
            params.fast_feed = fast_feed;
            params.layer_height = layer_height;
            const auto segs =
                reconstruct::segment_labels(labels_from_strings(labels), params);
            return reconstruct::segments_to_toolpath(segs, start, params);
        },
        py::arg("labels"), py::arg("frame_ms") = 100.0, py::arg("slow_feed") = 600.0,
        py::arg("fast_feed") = 3000.0, py::arg("layer_height") = 0.2, py::arg("start") = Vec3{},
        "Collapse per-frame labels into a toolpath");

    m.def("mean_tendency_error", &reconstruct::mean_tendency_error, py::arg("reconstructed"),
          py::arg("original"),
          "Mean relative segment-length error, in percent; unmatched segments count 100%");

    m.def(
        "run_square",
        [](std::uint64_t seed, double distance_cm, int frames_per_class, bool zero_noise) {
            pipeline::PipelineConfig cfg;
            cfg.train_frames_per_class = frames_per_class;
            if (zero_noise) cfg.sim = cfg.sim.with_noise_disabled();
            const auto run = pipeline::run_square(seed, distance_cm, cfg);
            py::dict d;
            d["distance_cm"] = run.distance_cm;
            d["mte_percent"] = run.mte_percent;
            d["heldout_macro_mean"] = run.heldout_macro_mean;
            py::dict nodes;
            for (int i = 0; i < cascade::kNodeCount; ++i) {
                nodes[cascade::node_name(static_cast<cascade::NodeId>(i))] =
                    run.model.heldout[static_cast<std::size_t>(i)].accuracy;
            }
            d["heldout"] = nodes;
            return d;
        },
        py::arg("seed"), py::arg("distance_cm") = 15.0, py::arg("frames_per_class") = 500,
        py::arg("zero_noise") = false,
        "End-to-end benchmark run: train, attack the square, score MTE");
}
