#include "foveal/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <sstream>

#include "foveal/aer_io.hpp"
#include "foveal/errors.hpp"
#include "foveal/framing.hpp"

namespace foveal::pipeline {

namespace {

std::ofstream open_text(const fs::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing", 0);
    return os;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string(), 0);
}

fs::path with_suffix(const fs::path& prefix, const std::string& ext) {
    return fs::path(prefix.string() + ext);
}

std::string cell_label(CellType c) {
    switch (c) {
        case CellType::off_midget:
            return "off-center midget";
        case CellType::on_midget:
            return "on-center midget";
        case CellType::off_parasol:
            return "off-center parasol";
        case CellType::on_parasol:
            return "on-center parasol";
    }
    return "?";
}

}  // namespace

Geometry parse_geometry(std::string_view name) {
    if (name == "full") return Geometry::full;
    if (name == "reduced") return Geometry::reduced;
    throw UsageError("unknown geometry '" + std::string(name) + "' (expected full or reduced)");
}

std::uint32_t input_size(Geometry g) { return g == Geometry::full ? kFullGeometry : kReducedGeometry; }

std::vector<SynthFile> synth(const SynthConfig& cfg, const fs::path& out_dir) {
    if (cfg.classes < 1 || cfg.classes > kNumClasses) throw UsageError("--classes must lie in 1..7");
    if (cfg.reps < 1) throw UsageError("--reps must be positive");
    ensure_dir(out_dir);
    std::vector<SynthFile> out;
    for (int k = 0; k < cfg.classes; ++k) {
        for (int r = 0; r < cfg.reps; ++r) {
            BarStimulus base;
            base.frame_period_us = cfg.frame_period_us;
            base.white_level = cfg.white_level;
            base.black_level = cfg.black_level;
            base.phase_px = r;
            DvsEmulatorConfig emu = cfg.emulator;
            emu.seed = cfg.emulator.seed + static_cast<std::uint64_t>(k * 1000 + r);
            const Recording rec = generate_recording(k, emu, cfg.frames, base);
            const fs::path path = out_dir / ("class" + std::to_string(k) + "_rep" + std::to_string(r) + ".aer");
            save_events(rec.stream, path);
            out.push_back({path, k, r, rec.stream.events.size()});
        }
    }
    return out;
}

FilterSummary filter(const fs::path& in, CellType cell, EdgeMode mode, std::uint64_t frame_period_us,
                     const fs::path& out, std::optional<double> event_threshold) {
    const EventStream s = load_events(in);
    const EventStream f = filter_stream(s, DogKernelSpec::preset(cell), mode, frame_period_us, event_threshold);
    save_events(f, out);
    return {s.events.size(), f.events.size()};
}

std::optional<std::pair<int, int>> parse_recording_name(const std::string& filename) {
    static const std::regex pattern(R"(class(\d+)_rep(\d+)\.aer)");
    std::smatch m;
    if (!std::regex_match(filename, m, pattern)) return std::nullopt;
    return std::make_pair(std::stoi(m[1].str()), std::stoi(m[2].str()));
}

Dataset frames(const fs::path& in_dir, const FramesConfig& cfg, const fs::path& out_prefix) {
    if (!fs::is_directory(in_dir)) throw IoError("input directory " + in_dir.string() + " does not exist", 0);
    std::vector<std::tuple<int, int, fs::path>> found;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (auto id = parse_recording_name(entry.path().filename().string()))
            found.emplace_back(id->first, id->second, entry.path());
    }
    std::sort(found.begin(), found.end());

    std::vector<Recording> recordings;
    for (const auto& [label, rep, path] : found) recordings.push_back({load_events(path), label});
    Dataset ds = build_dataset(recordings, cfg.frame_period_us, cfg.seed, cfg.min_frames);

    const std::uint32_t target = input_size(cfg.geometry);
    if (ds.frames.height != ds.frames.width || ds.frames.height % target != 0)
        throw DimensionError("sensor size does not reduce to the requested geometry");
    ds.frames = downsample(ds.frames, ds.frames.height / target);

    if (out_prefix.has_parent_path()) ensure_dir(out_prefix.parent_path());
    save_frames(ds.frames, with_suffix(out_prefix, ".frm"));
    auto csv = open_text(with_suffix(out_prefix, ".csv"));
    write_split_csv(ds, csv);
    return ds;
}

Dataset load_dataset(const fs::path& prefix) {
    FrameTensor f = load_frames(with_suffix(prefix, ".frm"));
    std::ifstream csv(with_suffix(prefix, ".csv"), std::ios::binary);
    if (!csv) throw IoError("cannot open " + with_suffix(prefix, ".csv").string(), 0);
    return read_split_csv(csv, std::move(f));
}

void save_checkpoint(const ScnnParams& params, const fs::path& path) {
    auto os = open_text(path);
    const auto n = write_checkpoint(params, os);
    os.flush();
    if (!os) throw IoError("flush failed for " + path.string(), n);
}

ScnnParams load_checkpoint(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string(), 0);
    return read_checkpoint(is);
}

TrainResult train(const fs::path& dataset_prefix, const TrainConfig& cfg, const LifParams& lif,
                  const fs::path& checkpoint) {
    const Dataset ds = load_dataset(dataset_prefix);
    if (ds.frames.height != ds.frames.width ||
        (ds.frames.height != kFullGeometry && ds.frames.height != kReducedGeometry))
        throw ValidationError("dataset frames are neither 128x128 nor 32x32");
    TrainResult result = train(ds, cfg, lif);
    if (checkpoint.has_parent_path()) ensure_dir(checkpoint.parent_path());
    save_checkpoint(result.params, checkpoint);
    auto loss = open_text(with_suffix(checkpoint, ".loss.csv"));
    loss << "epoch,gamma,loss\n" << std::setprecision(17);
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        loss << e << ',' << annealed_gamma(cfg, lif, static_cast<int>(e)) << ',' << result.epoch_loss[e] << '\n';
    return result;
}

void write_report(const std::vector<ReportRow>& rows, std::ostream& sink) {
    sink << "scenario,cell_type,circ_shift,accuracy\n";
    for (const ReportRow& r : rows) {
        sink << r.scenario << ',' << r.cell_type << ',' << r.circ_shift << ',' << std::fixed << std::setprecision(2)
             << r.accuracy << '\n';
    }
    sink.unsetf(std::ios::floatfield);
    if (!sink) throw IoError("report write failed", 0);
}

void write_confusion(const EvalResult& r, std::ostream& sink) {
    sink << "true\\predicted";
    for (int c = 0; c < kNumClasses; ++c) sink << ',' << c;
    sink << '\n';
    for (int t = 0; t < kNumClasses; ++t) {
        sink << t;
        for (int c = 0; c < kNumClasses; ++c)
            sink << ',' << r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
        sink << '\n';
    }
    if (!sink) throw IoError("confusion write failed", 0);
}

EvalResult eval(const fs::path& checkpoint, const fs::path& dataset_prefix, const LifParams& lif) {
    const ScnnParams params = load_checkpoint(checkpoint);
    const Dataset ds = load_dataset(dataset_prefix);
    if (ds.frames.height != params.input_size || ds.frames.width != params.input_size)
        throw ValidationError("checkpoint expects " + std::to_string(params.input_size) + "x" +
                              std::to_string(params.input_size) + " frames but the dataset holds " +
                              std::to_string(ds.frames.height) + "x" + std::to_string(ds.frames.width));
    return evaluate(params, lif, ds, Split::test);
}

void write_raster_svg(const EventStream& stream, std::ostream& sink) {
    constexpr double kWidth = 800, kHeight = 600, kMargin = 50;
    const double plot_w = kWidth - 2 * kMargin;
    const double plot_h = kHeight - 2 * kMargin;
    const double neurons = static_cast<double>(stream.width) * stream.height;
    std::uint64_t t_max = 0;
    for (const DvsEvent& e : stream.events) t_max = std::max(t_max, e.t_us);
    const double t_span = t_max > 0 ? static_cast<double>(t_max) : 1.0;

    sink << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    sink << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << plot_w << "\" height=\"" << plot_h
         << "\" fill=\"none\" stroke=\"black\"/>\n";
    sink << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">time (us)</text>\n";
    sink << "<text x=\"15\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 15 " << kHeight / 2
         << ")\" text-anchor=\"middle\">neuron (0.." << static_cast<std::uint64_t>(neurons) - 1 << ")</text>\n";
    sink << "<g id=\"events\">\n" << std::fixed << std::setprecision(2);
    for (const DvsEvent& e : stream.events) {
        const double x = kMargin + plot_w * static_cast<double>(e.t_us) / t_span;
        const double y = kMargin + plot_h * (1.0 - static_cast<double>(neuron_index(stream, e)) / neurons);
        // ON (illumination increase) blue, OFF red.
        sink << "<circle class=\"" << (e.polarity > 0 ? "on" : "off") << "\" cx=\"" << x << "\" cy=\"" << y
             << "\" r=\"1\" fill=\"" << (e.polarity > 0 ? "blue" : "red") << "\"/>\n";
    }
    sink.unsetf(std::ios::floatfield);
    sink << "</g>\n</svg>\n";
    if (!sink) throw IoError("svg write failed", 0);
}

std::uint64_t raster(const fs::path& in, const fs::path& csv, const std::optional<fs::path>& svg) {
    const EventStream s = load_events(in);
    auto os = open_text(csv);
    const auto rows = export_csv(s, os);
    if (svg) {
        auto svg_os = open_text(*svg);
        write_raster_svg(s, svg_os);
    }
    return rows;
}

ReportRow Scenario::row(double accuracy) const {
    if (!filtered) return {"unfiltered", "-", "-", accuracy};
    return {"filtered", cell_label(cell), mode == EdgeMode::circular ? "1" : "0", accuracy};
}

std::vector<Scenario> table_scenarios() {
    std::vector<Scenario> out{{"unfiltered", false, CellType::off_midget, EdgeMode::zero_pad}};
    for (EdgeMode mode : {EdgeMode::zero_pad, EdgeMode::circular}) {
        for (CellType c : {CellType::off_midget, CellType::on_midget, CellType::off_parasol, CellType::on_parasol}) {
            out.push_back({std::string(to_string(c)) + "-" + std::string(to_string(mode)), true, c, mode});
        }
    }
    return out;
}

ReproResult repro(const ReproConfig& cfg, const fs::path& out_dir, std::ostream* log) {
    ensure_dir(out_dir);
    const fs::path recordings = out_dir / "recordings";
    const auto files = synth(cfg.synth, recordings);
    if (log) {
        for (const auto& f : files) *log << f.path.filename().string() << ": " << f.events << " events\n";
    }

    FramesConfig frames_cfg = cfg.frames;
    frames_cfg.frame_period_us = cfg.synth.frame_period_us;
    if (frames_cfg.min_frames == 0) frames_cfg.min_frames = cfg.synth.frames;

    ReproResult result;
    for (const Scenario& sc : table_scenarios()) {
        const fs::path dir = out_dir / sc.id;
        ensure_dir(dir);
        fs::path source = recordings;
        if (sc.filtered) {
            source = dir / "filtered";
            ensure_dir(source);
            for (const auto& f : files) {
                const auto summary = filter(f.path, sc.cell, sc.mode, cfg.synth.frame_period_us,
                                            source / f.path.filename(), cfg.event_threshold);
                if (log)
                    *log << sc.id << '/' << f.path.filename().string() << ": " << summary.in_events << " -> "
                         << summary.out_events << " events\n";
            }
        }
        frames(source, frames_cfg, dir / "dataset");
        const TrainResult tr = train(dir / "dataset", cfg.train, cfg.lif, dir / "model.scn");
        const EvalResult ev = eval(dir / "model.scn", dir / "dataset", cfg.lif);
        auto conf = open_text(dir / "confusion.csv");
        write_confusion(ev, conf);
        result.rows.push_back(sc.row(ev.accuracy));
        result.evals.push_back(ev);
        if (log) {
            *log << sc.id << ": loss";
            for (double l : tr.epoch_loss) *log << ' ' << l;
            *log << ", test accuracy " << ev.accuracy << "%\n";
            log->flush();
        }
    }
    auto report = open_text(out_dir / "report.csv");
    write_report(result.rows, report);
    return result;
}

}  // namespace foveal::pipeline
