#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "printleak/cascade.hpp"
#include "printleak/errors.hpp"
#include "printleak/features.hpp"
#include "printleak/gcode.hpp"
#include "printleak/ingest.hpp"
#include "printleak/pipeline.hpp"
#include "printleak/reconstruct.hpp"
#include "printleak/simulate.hpp"

namespace {

using namespace printleak;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // LF line endings everywhere
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    return out;
}

gcode::Toolpath load_toolpath(const std::string& path) {
    auto in = open_input(path);
    const auto commands = gcode::parse_gcode(in);
    return gcode::to_toolpath(commands);
}

// Sensor/simulator options shared by the commands that synthesize traces.
struct SimOpts {
    std::string sim_config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> distance_cm;
    std::optional<double> noise_db;
    std::optional<double> mag_noise;
    std::optional<double> acoustic_rate;
    std::optional<double> magnetic_rate;
    bool zero_noise = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--sim-config", sim_config_path,
                        "key=value file with simulator settings (flags override)");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--distance", distance_cm, "sensor distance in cm (15/20/30 presets)");
        cmd->add_option("--noise-db", noise_db, "ambient acoustic noise floor in dB");
        cmd->add_option("--mag-noise", mag_noise, "magnetometer noise std in uT");
        cmd->add_option("--acoustic-rate", acoustic_rate, "acoustic sample rate in Hz");
        cmd->add_option("--magnetic-rate", magnetic_rate, "magnetometer rate in Hz");
        cmd->add_flag("--zero-noise", zero_noise, "disable ambient and magnetometer noise");
    }

    simulate::SimConfig resolve() const {
        simulate::SimConfig cfg = simulate::SimConfig::preset(15.0);
        if (!sim_config_path.empty()) {
            auto in = open_input(sim_config_path);
            cfg = simulate::load_sim_config(in, cfg);
        }
        if (distance_cm) {
            const auto preset = simulate::SimConfig::preset(*distance_cm, cfg.seed);
            cfg.distance_cm = preset.distance_cm;
            cfg.sensor_pos_cm = preset.sensor_pos_cm;
        }
        if (seed) cfg.seed = *seed;
        if (noise_db) cfg.noise_db = *noise_db;
        if (mag_noise) cfg.mag_noise_uT = *mag_noise;
        if (acoustic_rate) cfg.acoustic_rate = *acoustic_rate;
        if (magnetic_rate) cfg.magnetic_rate = *magnetic_rate;
        if (zero_noise) cfg = cfg.with_noise_disabled();
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"printleak: 3D printer side-channel emission and G-code reconstruction toolkit"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "synthesize a sensor trace from G-code");
    std::string sim_gcode, sim_routine, sim_trace_out, sim_labels_out, sim_gcode_out;
    double sim_frame_ms = 100.0;
    int sim_frames_per_class = 500;
    SimOpts sim_opts;
    cmd_sim->add_option("--gcode", sim_gcode, "input G-code file");
    cmd_sim->add_option("--routine", sim_routine, "builtin toolpath: 'square' or 'training'")
        ->check(CLI::IsMember({"square", "training"}));
    cmd_sim->add_option("--trace", sim_trace_out, "output sensor CSV")->required();
    cmd_sim->add_option("--labels", sim_labels_out, "output ground-truth label CSV");
    cmd_sim->add_option("--gcode-out", sim_gcode_out, "write the simulated toolpath as G-code");
    cmd_sim->add_option("--frame-ms", sim_frame_ms, "frame length for --labels (default 100)");
    cmd_sim->add_option("--frames-per-class", sim_frames_per_class,
                        "frames per movement class for --routine training");
    sim_opts.add_to(cmd_sim);
    cmd_sim->callback([&] {
        if (sim_gcode.empty() == sim_routine.empty()) {
            throw CLI::ValidationError("simulate", "give exactly one of --gcode or --routine");
        }
        const auto cfg = sim_opts.resolve();
        gcode::Toolpath path;
        if (!sim_gcode.empty()) {
            path = load_toolpath(sim_gcode);
        } else if (sim_routine == "square") {
            path = pipeline::square_toolpath();
        } else {
            path = pipeline::training_toolpath(sim_frames_per_class, cfg, cfg.seed);
        }
        const auto trace = simulate::simulate_emissions(path, cfg);
        {
            auto out = open_output(sim_trace_out);
            ingest::write_sensor_csv(trace, out);
        }
        if (!sim_labels_out.empty()) {
            const auto labels = simulate::label_trace(path, cfg, sim_frame_ms);
            auto out = open_output(sim_labels_out);
            pipeline::write_label_csv(out, labels);
        }
        if (!sim_gcode_out.empty()) {
            auto out = open_output(sim_gcode_out);
            gcode::emit_gcode(path, out);
        }
        std::cout << "simulated " << path.segments.size() << " segments, "
                  << trace.acoustic.size() << " acoustic samples, " << trace.magnetic.size()
                  << " magnetic samples\n";
    });

    // ---- features -----------------------------------------------------
    auto* cmd_feat = app.add_subcommand("features", "extract per-frame features to CSV");
    std::string feat_trace, feat_labels, feat_out;
    double feat_frame_ms = 100.0, feat_sigma = 0.0;
    cmd_feat->add_option("--trace", feat_trace, "input sensor CSV")->required();
    cmd_feat->add_option("--labels", feat_labels, "label CSV to join into the output");
    cmd_feat->add_option("--out", feat_out, "output feature CSV")->required();
    cmd_feat->add_option("--frame-ms", feat_frame_ms, "frame length (default 100)");
    cmd_feat->add_option("--smooth-sigma", feat_sigma,
                         "Gaussian sigma (frames) for feature time-series smoothing; 0 = off");
    cmd_feat->callback([&] {
        auto in = open_input(feat_trace);
        const auto trace = ingest::read_sensor_csv(in);
        const features::FeatureConfig fcfg;
        const auto rows = pipeline::extract_features(trace, feat_frame_ms, fcfg, feat_sigma);
        std::vector<std::string> label_text;
        if (!feat_labels.empty()) {
            auto lin = open_input(feat_labels);
            for (const auto& l : pipeline::read_label_csv(lin)) {
                label_text.push_back(gcode::to_string(l));
            }
        }
        auto out = open_output(feat_out);
        features::write_feature_csv(out, rows, label_text, fcfg);
        std::cout << "wrote " << rows.size() << " feature rows\n";
    });

    // ---- train ----------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "train the movement cascade from a trace");
    std::string train_trace, train_labels, train_model, train_report;
    double train_frame_ms = 100.0, train_fraction = 0.25, train_eta = 0.1, train_subsample = 1.0;
    int train_rounds = 200, train_depth = 3, train_min_leaf = 5;
    std::uint64_t train_seed = 0;
    std::string layer_mask = "all";
    cmd_train->add_option("--trace", train_trace, "input sensor CSV")->required();
    cmd_train->add_option("--labels", train_labels, "ground-truth label CSV")->required();
    cmd_train->add_option("--model", train_model, "output cascade file")->required();
    cmd_train->add_option("--report", train_report, "write the held-out accuracy report here");
    cmd_train->add_option("--frame-ms", train_frame_ms, "frame length (default 100)");
    cmd_train->add_option("--rounds", train_rounds, "boosting rounds (default 200)");
    cmd_train->add_option("--depth", train_depth, "max tree depth (default 3)");
    cmd_train->add_option("--eta", train_eta, "learning rate (default 0.1)");
    cmd_train->add_option("--min-leaf", train_min_leaf, "min rows per leaf (default 5)");
    cmd_train->add_option("--subsample", train_subsample, "row subsample per round (default 1.0)");
    cmd_train->add_option("--train-fraction", train_fraction,
                          "fraction used for training, rest held out (default 0.25)");
    cmd_train->add_option("--seed", train_seed, "training seed");
    cmd_train->add_option("--layer-mask", layer_mask, "layer-node features: all|acoustic|magnetic")
        ->check(CLI::IsMember({"all", "acoustic", "magnetic"}));
    cmd_train->callback([&] {
        auto tin = open_input(train_trace);
        const auto trace = ingest::read_sensor_csv(tin);
        auto lin = open_input(train_labels);
        const auto labels = pipeline::read_label_csv(lin);

        pipeline::PipelineConfig cfg;
        cfg.frame_ms = train_frame_ms;
        cfg.cascade.gbdt.n_rounds = train_rounds;
        cfg.cascade.gbdt.max_depth = train_depth;
        cfg.cascade.gbdt.learning_rate = train_eta;
        cfg.cascade.gbdt.min_leaf = train_min_leaf;
        cfg.cascade.gbdt.subsample = train_subsample;
        cfg.cascade.train_fraction = train_fraction;
        cfg.cascade.seed = train_seed;
        if (layer_mask == "acoustic") cfg.cascade.layer_mask = cascade::FeatureMask::AcousticOnly;
        if (layer_mask == "magnetic") cfg.cascade.layer_mask = cascade::FeatureMask::MagneticOnly;

        const auto model = pipeline::train_from_trace(trace, labels, cfg);
        {
            auto out = open_output(train_model);
            cascade::save_cascade(model, out);
        }
        const std::string report = cascade::heldout_report_text(model);
        if (!train_report.empty()) {
            auto out = open_output(train_report);
            out << report;
        }
        std::cout << report;
    });

    // ---- classify ---------------------------------------------------------
    auto* cmd_cls = app.add_subcommand("classify", "predict per-frame movement labels");
    std::string cls_trace, cls_model, cls_out;
    double cls_frame_ms = 100.0;
    int cls_window = 1;
    cmd_cls->add_option("--trace", cls_trace, "input sensor CSV")->required();
    cmd_cls->add_option("--model", cls_model, "cascade file")->required();
    cmd_cls->add_option("--out", cls_out, "output label CSV")->required();
    cmd_cls->add_option("--frame-ms", cls_frame_ms, "frame length (default 100)");
    cmd_cls->add_option("--smooth-window", cls_window,
                        "odd majority-vote window over predictions; 1 = off");
    cmd_cls->callback([&] {
        auto tin = open_input(cls_trace);
        const auto trace = ingest::read_sensor_csv(tin);
        auto min = open_input(cls_model);
        const auto model = cascade::load_cascade(min);
        const auto rows = pipeline::extract_features(trace, cls_frame_ms, {}, 0.0);
        std::vector<gcode::MovementLabel> predicted;
        predicted.reserve(rows.size());
        for (const auto& row : rows) predicted.push_back(cascade::classify_frame(model, row));
        if (cls_window > 1) predicted = reconstruct::smooth_labels(predicted, cls_window);
        auto out = open_output(cls_out);
        pipeline::write_label_csv(out, predicted);
        std::cout << "classified " << predicted.size() << " frames\n";
    });

    // ---- reconstruct -----------------------------------------------------
    auto* cmd_rec = app.add_subcommand("reconstruct", "rebuild G-code from a trace");
    std::string rec_trace, rec_model, rec_gcode_out, rec_original, rec_report, rec_overlay_csv,
        rec_overlay_svg;
    double rec_frame_ms = 100.0;
    reconstruct::ReconstructParams rec_params;
    cmd_rec->add_option("--trace", rec_trace, "input sensor CSV")->required();
    cmd_rec->add_option("--model", rec_model, "cascade file")->required();
    cmd_rec->add_option("--gcode-out", rec_gcode_out, "output G-code file")->required();
    cmd_rec->add_option("--original", rec_original, "original G-code, enables MTE scoring");
    cmd_rec->add_option("--report", rec_report, "write the reconstruction report here");
    cmd_rec->add_option("--overlay-csv", rec_overlay_csv, "overlay polylines as CSV");
    cmd_rec->add_option("--overlay-svg", rec_overlay_svg, "overlay rendering as SVG");
    cmd_rec->add_option("--frame-ms", rec_frame_ms, "frame length (default 100)");
    cmd_rec->add_option("--smooth-window", rec_params.smooth_window,
                        "label smoothing window (odd, default 3)");
    cmd_rec->add_option("--slow-feed", rec_params.slow_feed, "feed for Slow segments (mm/min)");
    cmd_rec->add_option("--fast-feed", rec_params.fast_feed, "feed for Fast segments (mm/min)");
    cmd_rec->add_option("--layer-height", rec_params.layer_height, "mm per detected Z run");
    cmd_rec->callback([&] {
        auto tin = open_input(rec_trace);
        const auto trace = ingest::read_sensor_csv(tin);
        auto min = open_input(rec_model);
        const auto model = cascade::load_cascade(min);
        const auto rows = pipeline::extract_features(trace, rec_frame_ms, {}, 0.0);
        std::vector<gcode::MovementLabel> predicted;
        predicted.reserve(rows.size());
        for (const auto& row : rows) predicted.push_back(cascade::classify_frame(model, row));
        if (rec_params.smooth_window > 1) {
            predicted = reconstruct::smooth_labels(predicted, rec_params.smooth_window);
        }
        rec_params.frame_ms = rec_frame_ms;
        const auto segs = reconstruct::segment_labels(predicted, rec_params);
        gcode::Toolpath original;
        Vec3 start{};
        if (!rec_original.empty()) {
            original = load_toolpath(rec_original);
            start = original.origin;
        }
        const auto rebuilt = reconstruct::segments_to_toolpath(segs, start, rec_params);
        {
            auto out = open_output(rec_gcode_out);
            gcode::emit_gcode(rebuilt, out);
        }
        std::cout << "reconstructed " << rebuilt.segments.size() << " segments\n";
        if (!rec_original.empty()) {
            reconstruct::ReconstructionReport report;
            report.reconstructed = rebuilt;
            report.mte = reconstruct::mte_breakdown(rebuilt, original);
            const std::string text = report.to_text();
            if (!rec_report.empty()) {
                auto out = open_output(rec_report);
                out << text;
            }
            std::cout << text;
            if (!rec_overlay_csv.empty() || !rec_overlay_svg.empty()) {
                const auto overlay = reconstruct::compare_overlay(rebuilt, original);
                if (!rec_overlay_csv.empty()) {
                    auto out = open_output(rec_overlay_csv);
                    reconstruct::write_overlay_csv(overlay, out);
                }
                if (!rec_overlay_svg.empty()) {
                    auto out = open_output(rec_overlay_svg);
                    reconstruct::write_overlay_svg(overlay, out);
                }
            }
        }
    });

    // ---- evaluate -------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("evaluate", "score a cascade on labeled frames");
    std::string eval_trace, eval_labels, eval_model, eval_report, eval_csv;
    double eval_frame_ms = 100.0;
    cmd_eval->add_option("--trace", eval_trace, "input sensor CSV")->required();
    cmd_eval->add_option("--labels", eval_labels, "ground-truth label CSV")->required();
    cmd_eval->add_option("--model", eval_model, "cascade file")->required();
    cmd_eval->add_option("--report", eval_report, "write the text report here");
    cmd_eval->add_option("--csv", eval_csv, "write the per-node table as CSV");
    cmd_eval->add_option("--frame-ms", eval_frame_ms, "frame length (default 100)");
    cmd_eval->callback([&] {
        auto tin = open_input(eval_trace);
        const auto trace = ingest::read_sensor_csv(tin);
        auto lin = open_input(eval_labels);
        const auto labels = pipeline::read_label_csv(lin);
        auto min = open_input(eval_model);
        const auto model = cascade::load_cascade(min);
        const auto rows = pipeline::extract_features(trace, eval_frame_ms, {}, 0.0);
        if (rows.size() != labels.size()) {
            throw DataError("evaluate: " + std::to_string(rows.size()) + " frames vs " +
                            std::to_string(labels.size()) + " labels");
        }
        const auto report = cascade::evaluate_cascade(model, rows, labels);
        if (!eval_report.empty()) {
            auto out = open_output(eval_report);
            out << report.to_text();
        }
        if (!eval_csv.empty()) {
            auto out = open_output(eval_csv);
            report.to_csv(out);
        }
        std::cout << report.to_text();
    });

    // ---- repro-square -----------------------------------------------------
    auto* cmd_repro = app.add_subcommand(
        "repro-square", "end-to-end benchmark: train, attack the square, score MTE per distance");
    std::uint64_t repro_seed = 0;
    std::vector<double> repro_distances = {15.0, 20.0, 30.0};
    int repro_frames = 500;
    std::string repro_dir;
    bool repro_zero_noise = false;
    cmd_repro->add_option("--seed", repro_seed, "benchmark seed");
    cmd_repro->add_option("--distances", repro_distances, "distance presets in cm")
        ->delimiter(',');
    cmd_repro->add_option("--frames-per-class", repro_frames,
                          "training frames per movement class (default 500)");
    cmd_repro->add_option("--out-dir", repro_dir, "write models/G-code/overlays/report here");
    cmd_repro->add_flag("--zero-noise", repro_zero_noise, "disable noise (sanity mode)");
    cmd_repro->callback([&] {
        pipeline::PipelineConfig cfg;
        cfg.train_frames_per_class = repro_frames;
        if (repro_zero_noise) cfg.sim = cfg.sim.with_noise_disabled();
        const auto result = pipeline::repro_square(repro_seed, repro_distances, cfg);
        std::cout << result.table_text;
        if (!repro_dir.empty()) {
            namespace fs = std::filesystem;
            fs::create_directories(repro_dir);
            auto report = open_output(repro_dir + "/report.txt");
            report << result.table_text;
            for (const auto& run : result.runs) {
                const std::string tag = std::to_string(static_cast<int>(run.distance_cm)) + "cm";
                {
                    auto out = open_output(repro_dir + "/cascade_" + tag + ".model");
                    cascade::save_cascade(run.model, out);
                }
                {
                    auto out = open_output(repro_dir + "/reconstructed_" + tag + ".gcode");
                    gcode::emit_gcode(run.reconstructed, out);
                }
                const auto overlay = reconstruct::compare_overlay(run.reconstructed, run.original);
                {
                    auto out = open_output(repro_dir + "/overlay_" + tag + ".csv");
                    reconstruct::write_overlay_csv(overlay, out);
                }
                {
                    auto out = open_output(repro_dir + "/overlay_" + tag + ".svg");
                    reconstruct::write_overlay_svg(overlay, out);
                }
                reconstruct::ReconstructionReport rep;
                rep.reconstructed = run.reconstructed;
                rep.mte = run.mte;
                report << "\n--- " << tag << " ---\n" << rep.to_text();
            }
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const printleak::ModelError& e) {
        std::cerr << "model error: " << e.what() << '\n';
        return 3;
    } catch (const printleak::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
