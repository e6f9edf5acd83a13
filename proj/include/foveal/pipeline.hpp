#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "foveal/dog_filters.hpp"
#include "foveal/scnn.hpp"
#include "foveal/stimulus.hpp"

namespace foveal::pipeline {

namespace fs = std::filesystem;

enum class Geometry { full, reduced };

Geometry parse_geometry(std::string_view name);
std::uint32_t input_size(Geometry g);

struct SynthConfig {
    int classes = kNumClasses;
    int reps = 1;
    std::size_t frames = 100;
    std::uint64_t frame_period_us = 10000;
    DvsEmulatorConfig emulator;
    double white_level = 1.0;
    double black_level = 0.1;
};

struct SynthFile {
    fs::path path;
    int label = 0;
    int rep = 0;
    std::size_t events = 0;
};

// Writes class{k}_rep{r}.aer into out_dir. Repetition r starts the bars
// r pixels further along.
std::vector<SynthFile> synth(const SynthConfig& cfg, const fs::path& out_dir);

struct FilterSummary {
    std::size_t in_events = 0;
    std::size_t out_events = 0;
};

FilterSummary filter(const fs::path& in, CellType cell, EdgeMode mode, std::uint64_t frame_period_us,
                     const fs::path& out, std::optional<double> event_threshold = std::nullopt);

// Parses "class{k}_rep{r}.aer"; nullopt for anything else.
std::optional<std::pair<int, int>> parse_recording_name(const std::string& filename);

struct FramesConfig {
    std::uint64_t frame_period_us = 10000;
    std::uint64_t seed = 42;
    std::size_t min_frames = 0;
    Geometry geometry = Geometry::full;
};

// Builds the dataset from every class*_rep*.aer in in_dir (sorted by class
// then repetition); writes <prefix>.frm and <prefix>.csv.
Dataset frames(const fs::path& in_dir, const FramesConfig& cfg, const fs::path& out_prefix);

Dataset load_dataset(const fs::path& prefix);

void save_checkpoint(const ScnnParams& params, const fs::path& path);
ScnnParams load_checkpoint(const fs::path& path);

// Trains and writes the checkpoint plus "<checkpoint>.loss.csv".
TrainResult train(const fs::path& dataset_prefix, const TrainConfig& cfg, const LifParams& lif,
                  const fs::path& checkpoint);

struct ReportRow {
    std::string scenario;   // "unfiltered" or "filtered"
    std::string cell_type;  // "-" for unfiltered
    std::string circ_shift; // "-", "0" or "1"
    double accuracy = 0.0;
};

void write_report(const std::vector<ReportRow>& rows, std::ostream& sink);
void write_confusion(const EvalResult& r, std::ostream& sink);

// Evaluates on the test split; validates checkpoint/dataset geometry.
EvalResult eval(const fs::path& checkpoint, const fs::path& dataset_prefix, const LifParams& lif);

// Raster CSV plus, when svg is set, a scatter of time against neuron index.
std::uint64_t raster(const fs::path& in, const fs::path& csv, const std::optional<fs::path>& svg);
void write_raster_svg(const EventStream& stream, std::ostream& sink);

struct Scenario {
    std::string id;  // directory name
    bool filtered = false;
    CellType cell = CellType::off_midget;
    EdgeMode mode = EdgeMode::zero_pad;

    ReportRow row(double accuracy) const;
};

// The nine rows of the accuracy table: unfiltered, then the four cell
// types with zero padding, then the four with circular wrap.
std::vector<Scenario> table_scenarios();

struct ReproConfig {
    SynthConfig synth;
    FramesConfig frames;
    TrainConfig train;
    LifParams lif;
    std::optional<double> event_threshold;
};

struct ReproResult {
    std::vector<ReportRow> rows;
    std::vector<EvalResult> evals;
};

// Runs every stage for all nine scenarios under out_dir and writes
// out_dir/report.csv.
ReproResult repro(const ReproConfig& cfg, const fs::path& out_dir, std::ostream* log = nullptr);

}  // namespace foveal::pipeline
