// Command-line driver for the DVS filtering and classification pipeline.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "foveal/aer_io.hpp"
#include "foveal/dog_filters.hpp"
#include "foveal/errors.hpp"
#include "foveal/pipeline.hpp"

namespace fs = std::filesystem;
using namespace foveal;

namespace {

struct Options {
    int classes = kNumClasses;
    int reps = 1;
    std::size_t frames = 100;
    std::uint64_t frame_period_us = 10000;
    double threshold_log = 0.3;
    double noise = 0.0;
    std::string cell_type;
    std::string edge_mode = "circular";
    std::uint64_t seed = 42;
    int epochs = 3;
    int batch_size = 20;
    double lr = TrainConfig{}.learning_rate;
    std::string optimizer = "adam";
    std::string geometry = "full";
    std::optional<double> event_threshold;
    std::string out = "out";
    std::string in;
    std::string dataset;
    std::string model;
    std::string svg;
};

void add_synth_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--classes", o.classes, "Number of classes to synthesize (1..7)")->capture_default_str();
    cmd->add_option("--reps", o.reps, "Recordings per class")->capture_default_str();
    cmd->add_option("--frames", o.frames, "Stimulus frames per recording")->capture_default_str();
    cmd->add_option("--threshold-log", o.threshold_log, "DVS log-contrast threshold")->capture_default_str();
    cmd->add_option("--noise", o.noise, "Background noise probability per pixel and frame")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--epochs", o.epochs)->capture_default_str();
    cmd->add_option("--batch-size", o.batch_size)->capture_default_str();
    cmd->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
    cmd->add_option("--optimizer", o.optimizer, "adam or sgd")->capture_default_str();
}

pipeline::SynthConfig synth_config(const Options& o) {
    pipeline::SynthConfig c;
    c.classes = o.classes;
    c.reps = o.reps;
    c.frames = o.frames;
    c.frame_period_us = o.frame_period_us;
    c.emulator.threshold_log = o.threshold_log;
    c.emulator.noise_probability = o.noise;
    c.emulator.seed = o.seed;
    return c;
}

pipeline::FramesConfig frames_config(const Options& o) {
    pipeline::FramesConfig c;
    c.frame_period_us = o.frame_period_us;
    c.seed = o.seed;
    c.min_frames = o.frames;
    c.geometry = pipeline::parse_geometry(o.geometry);
    return c;
}

TrainConfig train_config(const Options& o) {
    TrainConfig c;
    c.epochs = o.epochs;
    c.batch_size = o.batch_size;
    c.learning_rate = o.lr;
    if (o.optimizer == "adam")
        c.optimizer = Optimizer::adam;
    else if (o.optimizer == "sgd")
        c.optimizer = Optimizer::sgd;
    else
        throw UsageError("unknown optimizer '" + o.optimizer + "' (expected adam or sgd)");
    c.seed = o.seed;
    return c;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + p.string() + " for writing", 0);
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Foveal-pit DoG filtering of emulated DVS recordings and spiking CNN classification"};
    app.require_subcommand(1);
    Options o;

    auto* synth = app.add_subcommand("synth", "Emulate DVS recordings of moving bars");
    add_synth_flags(synth, o);
    synth->add_option("--frame-period-us", o.frame_period_us)->capture_default_str();
    synth->add_option("--seed", o.seed)->capture_default_str();
    synth->add_option("--out", o.out, "Output directory")->capture_default_str();

    auto* filt = app.add_subcommand("filter", "Apply a ganglion-cell DoG filter to an AER file");
    filt->add_option("--in", o.in, "Input AER file")->required();
    filt->add_option("--cell-type", o.cell_type, "off-midget, on-midget, off-parasol or on-parasol")->required();
    filt->add_option("--edge-mode", o.edge_mode, "zero or circular")->capture_default_str();
    filt->add_option("--frame-period-us", o.frame_period_us)->capture_default_str();
    filt->add_option("--event-threshold", o.event_threshold, "Absolute response threshold");
    filt->add_option("--out", o.out, "Output AER file")->required();

    auto* frm = app.add_subcommand("frames", "Build the labeled frame dataset from class*_rep*.aer files");
    frm->add_option("--in", o.in, "Directory of AER recordings")->required();
    frm->add_option("--frames", o.frames, "Minimum frames per recording")->capture_default_str();
    frm->add_option("--frame-period-us", o.frame_period_us)->capture_default_str();
    frm->add_option("--seed", o.seed)->capture_default_str();
    frm->add_option("--geometry", o.geometry, "full (128x128) or reduced (32x32)")->capture_default_str();
    frm->add_option("--out", o.out, "Output prefix (writes .frm and .csv)")->required();

    auto* trn = app.add_subcommand("train", "Train the SCNN on a dataset");
    trn->add_option("--dataset", o.dataset, "Dataset prefix")->required();
    add_train_flags(trn, o);
    trn->add_option("--seed", o.seed)->capture_default_str();
    trn->add_option("--out", o.out, "Checkpoint path")->required();

    auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on the test split with spiking neurons");
    evl->add_option("--model", o.model, "Checkpoint path")->required();
    evl->add_option("--dataset", o.dataset, "Dataset prefix")->required();
    evl->add_option("--cell-type", o.cell_type, "Cell type of a filtered dataset (report metadata)");
    evl->add_option("--edge-mode", o.edge_mode, "Edge mode of a filtered dataset (report metadata)");
    evl->add_option("--out", o.out, "Output directory for report.csv and confusion.csv")->capture_default_str();

    auto* ras = app.add_subcommand("raster", "Export a raster plot of an AER file");
    ras->add_option("--in", o.in, "Input AER file")->required();
    ras->add_option("--out", o.out, "Output CSV")->required();
    ras->add_option("--svg", o.svg, "Optional SVG scatter plot");

    auto* ker = app.add_subcommand("kernel", "Export a DoG kernel as CSV");
    ker->add_option("--cell-type", o.cell_type)->required();
    ker->add_option("--out", o.out, "Output CSV")->required();

    auto* rep = app.add_subcommand("repro", "Run every stage for the nine table scenarios");
    add_synth_flags(rep, o);
    add_train_flags(rep, o);
    rep->add_option("--frame-period-us", o.frame_period_us)->capture_default_str();
    rep->add_option("--seed", o.seed)->capture_default_str();
    rep->add_option("--geometry", o.geometry)->capture_default_str();
    rep->add_option("--event-threshold", o.event_threshold, "Absolute response threshold for filtering");
    rep->add_option("--out", o.out, "Output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            for (const auto& f : pipeline::synth(synth_config(o), o.out))
                std::cout << f.path.string() << ": " << f.events << " events\n";
        } else if (filt->parsed()) {
            const auto s = pipeline::filter(o.in, parse_cell_type(o.cell_type), parse_edge_mode(o.edge_mode),
                                            o.frame_period_us, o.out, o.event_threshold);
            std::cout << o.in << " -> " << o.out << ": " << s.in_events << " events in, " << s.out_events
                      << " events out\n";
        } else if (frm->parsed()) {
            const Dataset ds = pipeline::frames(o.in, frames_config(o), o.out);
            std::cout << ds.frames.count << " frames of " << ds.frames.height << "x" << ds.frames.width << ", "
                      << ds.indices(Split::test).size() << " held out for test\n";
        } else if (trn->parsed()) {
            const auto r = pipeline::train(o.dataset, train_config(o), LifParams{}, o.out);
            for (std::size_t e = 0; e < r.epoch_loss.size(); ++e)
                std::cout << "epoch " << e << ": loss " << r.epoch_loss[e] << '\n';
        } else if (evl->parsed()) {
            const EvalResult r = pipeline::eval(o.model, o.dataset, LifParams{});
            pipeline::Scenario sc{"eval", !o.cell_type.empty(), CellType::off_midget, EdgeMode::zero_pad};
            if (sc.filtered) {
                sc.cell = parse_cell_type(o.cell_type);
                sc.mode = parse_edge_mode(o.edge_mode);
            }
            fs::create_directories(o.out);
            auto report = open_out(fs::path(o.out) / "report.csv");
            pipeline::write_report({sc.row(r.accuracy)}, report);
            auto conf = open_out(fs::path(o.out) / "confusion.csv");
            pipeline::write_confusion(r, conf);
            std::cout << "test accuracy " << r.accuracy << "%\n";
        } else if (ras->parsed()) {
            const auto rows = pipeline::raster(o.in, o.out, o.svg.empty() ? std::nullopt : std::optional<fs::path>(o.svg));
            std::cout << rows << " events\n";
        } else if (ker->parsed()) {
            const Kernel k = make_dog_kernel(DogKernelSpec::preset(parse_cell_type(o.cell_type)));
            auto os = open_out(o.out);
            export_kernel_csv(k, os);
        } else if (rep->parsed()) {
            pipeline::ReproConfig cfg;
            cfg.synth = synth_config(o);
            cfg.frames = frames_config(o);
            cfg.train = train_config(o);
            cfg.event_threshold = o.event_threshold;
            const auto r = pipeline::repro(cfg, o.out, &std::cout);
            pipeline::write_report(r.rows, std::cout);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
