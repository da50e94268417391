#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bttf/csv.hpp"
#include "bttf/ensemble.hpp"
#include "bttf/linear_model.hpp"
#include "bttf/metrics.hpp"
#include "bttf/timeseries.hpp"

namespace bttf {

/// Which split feeds the V/R ensemble-size statistics.
enum class SelectionSplit { test, val };

/// Whether metrics are computed on standardized values (benchmark
/// convention) or inverted back to raw observation units.
enum class MetricsSpace { standardized, raw };

/// Fully resolved experiment description. load_experiment_config fills
/// every field (defaults included) so reports can echo the exact values
/// used; unknown config keys are rejected.
struct ExperimentConfig {
    DatasetSpec dataset;
    Index lookback = 336;
    std::vector<Index> horizons;
    ModelKind base_kind = ModelKind::plain;
    Strategy stage1_strategy = Strategy::ES;
    Strategy stage2_strategy = Strategy::OneEpoch;
    std::optional<Index> segment_width;  // default: floor(H/3), min 1
    std::set<Index> strides = {1};
    Index step_increment = 5;  // M
    double epsilon = 1e-8;
    std::int64_t base_seed = 0;
    Index dlinear_kernel = 25;
    TrainConfig train;  // strategy/seed fields overridden per stage
    SplitSpec split;
    SelectionSplit selection_split = SelectionSplit::test;
    MetricsSpace metrics_space = MetricsSpace::standardized;
    std::string output = "report.json";
    std::string artifacts_dir;  // default: <output stem>_artifacts

    std::string strategy_label() const;  // e.g. "ES-1E"
    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct KGridStat {
    Index k = 0;
    double variance = 0.0;
    double mean_corr = 0.0;
    double score = 0.0;
    bool chosen = false;
};

struct HorizonTimings {
    double stage1_sec = 0.0;
    double stage2_sec = 0.0;
    double selection_sec = 0.0;
    std::optional<double> stage2_sequential_sec;  // with compare_sequential
};

struct HorizonRecord {
    Index horizon = 0;
    bool ok = false;
    std::string error_stage;  // pipeline stage name, on failure
    std::string error_message;

    Index n_segments = 0;
    Index segment_width = 0;
    EvalResult base;
    EvalResult bttf;
    Index k_star = 0;
    std::vector<KGridStat> grid;
    std::vector<double> mean_abs_delta_by_rank;  // stage2 vs stage1, test split
    std::string pool_manifest_path;
    std::uint64_t first_stage_hash = 0;
    std::optional<bool> parallel_equals_sequential;
    HorizonTimings timings;
};

struct ForecastReport {
    ExperimentConfig config;
    std::string strategy_label;
    std::vector<HorizonRecord> horizons;
};

struct RunOptions {
    int workers = 1;
    bool compare_sequential = false;
};

/// Runs the full two-stage pipeline for every horizon. Per-horizon
/// failures are recorded with their stage name; remaining horizons
/// continue.
ForecastReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

enum class ReportFormat { json, csv };

ReportFormat report_format_from_string(const std::string& s);

std::string render_report(const ForecastReport& report, ReportFormat format);

/// Renders and writes atomically.
void emit_report(const ForecastReport& report, ReportFormat format, const std::string& path);

} // namespace bttf
