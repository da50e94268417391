#include "bttf/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bttf/augmentation.hpp"
#include "bttf/refinement.hpp"
#include "bttf/serialize.hpp"

namespace bttf {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string ExperimentConfig::strategy_label() const {
    return to_string(stage1_strategy) + "-" + to_string(stage2_strategy);
}

void ExperimentConfig::validate() const {
    if (dataset.path.empty()) throw std::invalid_argument("config: dataset.path is required");
    if (lookback < 1) throw std::invalid_argument("config: lookback must be >= 1");
    if (horizons.empty()) throw std::invalid_argument("config: horizons must be non-empty");
    for (Index h : horizons) {
        if (h < 1) throw std::invalid_argument("config: horizons must be >= 1");
        if (!segment_width && h < 3)
            throw std::invalid_argument("config: horizon " + std::to_string(h) +
                                        " < 3 needs an explicit segment_width (default is H/3)");
    }
    if (segment_width && *segment_width < 1)
        throw std::invalid_argument("config: segment_width must be >= 1");
    if (strides.empty()) throw std::invalid_argument("config: strides must be non-empty");
    if (step_increment < 1) throw std::invalid_argument("config: step_increment must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be > 0");
    if (dlinear_kernel < 1 || dlinear_kernel % 2 == 0)
        throw std::invalid_argument("config: dlinear_kernel must be odd and >= 1");
    if (output.empty()) throw std::invalid_argument("config: output path is required");
    train.validate();
    split.validate();
}

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

std::string default_artifacts_dir(const std::string& output) {
    fs::path p(output);
    fs::path dir = p.parent_path();
    return (dir / (p.stem().string() + "_artifacts")).string();
}

} // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config: invalid JSON in '" + path + "': " + e.what());
    }

    reject_unknown(j, {"schema_version", "dataset", "lookback", "horizons", "base_kind",
                       "stage1_strategy", "stage2_strategy", "segment_width", "strides",
                       "step_increment", "epsilon", "base_seed", "dlinear_kernel", "train",
                       "split", "selection_split", "metrics_space", "output", "artifacts_dir"},
                   "top level");
    if (j.value("schema_version", 0) != 1)
        throw std::invalid_argument("config: schema_version must be 1");

    ExperimentConfig cfg;

    const auto& ds = j.at("dataset");
    reject_unknown(ds, {"path", "name", "target_column", "date_column"}, "dataset");
    cfg.dataset.path = ds.at("path").get<std::string>();
    cfg.dataset.name = ds.value("name", std::string{});
    cfg.dataset.target_column = ds.value("target_column", std::string{});
    cfg.dataset.date_column = ds.value("date_column", std::string{"date"});
    if (cfg.dataset.name.empty()) cfg.dataset.name = fs::path(cfg.dataset.path).stem().string();

    cfg.lookback = j.at("lookback").get<Index>();
    cfg.horizons = j.at("horizons").get<std::vector<Index>>();
    cfg.base_kind = model_kind_from_string(j.value("base_kind", std::string{"linear"}));
    cfg.stage1_strategy = strategy_from_string(j.value("stage1_strategy", std::string{"ES"}));
    cfg.stage2_strategy = strategy_from_string(j.value("stage2_strategy", std::string{"1E"}));
    if (j.contains("segment_width")) cfg.segment_width = j.at("segment_width").get<Index>();
    if (j.contains("strides")) {
        cfg.strides.clear();
        for (const auto& s : j.at("strides")) cfg.strides.insert(s.get<Index>());
    }
    cfg.step_increment = j.value("step_increment", Index{5});
    cfg.epsilon = j.value("epsilon", 1e-8);
    cfg.base_seed = j.value("base_seed", std::int64_t{0});
    cfg.dlinear_kernel = j.value("dlinear_kernel", Index{25});

    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown(t, {"optimizer", "learning_rate", "batch_size", "max_epochs", "patience",
                           "adam_beta1", "adam_beta2", "adam_eps"},
                       "train");
        cfg.train.optimizer = optimizer_from_string(t.value("optimizer", std::string{"adam"}));
        cfg.train.learning_rate = t.value("learning_rate", 5e-3);
        cfg.train.batch_size = t.value("batch_size", Index{32});
        cfg.train.max_epochs = t.value("max_epochs", Index{20});
        cfg.train.patience = t.value("patience", Index{3});
        cfg.train.adam.beta1 = t.value("adam_beta1", 0.9);
        cfg.train.adam.beta2 = t.value("adam_beta2", 0.999);
        cfg.train.adam.eps = t.value("adam_eps", 1e-8);
    }

    if (j.contains("split")) {
        const auto& s = j.at("split");
        reject_unknown(s, {"train_ratio", "val_ratio", "test_ratio", "overlap", "fixed_train_end",
                           "fixed_val_end"},
                       "split");
        cfg.split.train_ratio = s.value("train_ratio", 0.7);
        cfg.split.val_ratio = s.value("val_ratio", 0.1);
        cfg.split.test_ratio = s.value("test_ratio", 0.2);
        cfg.split.overlap = s.value("overlap", true);
        if (s.contains("fixed_train_end")) cfg.split.fixed_train_end = s.at("fixed_train_end").get<Index>();
        if (s.contains("fixed_val_end")) cfg.split.fixed_val_end = s.at("fixed_val_end").get<Index>();
    }

    const std::string sel = j.value("selection_split", std::string{"test"});
    if (sel == "test") cfg.selection_split = SelectionSplit::test;
    else if (sel == "val") cfg.selection_split = SelectionSplit::val;
    else throw std::invalid_argument("config: selection_split must be test|val");

    const std::string space = j.value("metrics_space", std::string{"standardized"});
    if (space == "standardized") cfg.metrics_space = MetricsSpace::standardized;
    else if (space == "raw") cfg.metrics_space = MetricsSpace::raw;
    else throw std::invalid_argument("config: metrics_space must be standardized|raw");

    cfg.output = j.value("output", std::string{"report.json"});
    cfg.artifacts_dir = j.value("artifacts_dir", std::string{});
    if (cfg.artifacts_dir.empty()) cfg.artifacts_dir = default_artifacts_dir(cfg.output);

    cfg.validate();
    return cfg;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string base_label(ModelKind kind) {
    return kind == ModelKind::plain ? "Linear" : "DLinear";
}

/// One horizon of the pipeline; throws with the current stage recorded
/// in `stage` so the caller can tag the failure.
HorizonRecord run_horizon(const ExperimentConfig& cfg, const TimeSeries& series, Index horizon,
                          const RunOptions& options, std::string& stage) {
    HorizonRecord rec;
    rec.horizon = horizon;

    stage = "split";
    const SeriesSplits splits = split_series(series, cfg.split, cfg.lookback);

    stage = "scale";
    const Scaler scaler = fit_scaler(splits.train);
    const TimeSeries train_s = scaler.apply(splits.train);
    const TimeSeries val_s = scaler.apply(splits.val);
    const TimeSeries test_s = scaler.apply(splits.test);

    stage = "window";
    const WindowDataset train_w = make_windows(train_s, cfg.lookback, horizon);
    const WindowDataset val_w = make_windows(val_s, cfg.lookback, horizon);
    const WindowDataset test_w = make_windows(test_s, cfg.lookback, horizon);

    stage = "stage1";
    const fs::path art_dir =
        fs::path(cfg.artifacts_dir) / (cfg.dataset.name + "_h" + std::to_string(horizon));
    fs::create_directories(art_dir);
    TrainConfig stage1_cfg = cfg.train;
    stage1_cfg.strategy = cfg.stage1_strategy;
    stage1_cfg.seed = cfg.base_seed;
    const Index kernel = cfg.base_kind == ModelKind::dlinear ? cfg.dlinear_kernel : 1;
    const auto t_stage1 = Clock::now();
    LinearForecaster stage1 =
        train(init_model(cfg.base_kind, cfg.lookback, horizon, kernel, cfg.base_seed), train_w,
              &val_w, stage1_cfg)
            .first;
    rec.timings.stage1_sec = seconds_since(t_stage1);
    save_model((art_dir / "stage1.model").string(), stage1);
    rec.first_stage_hash = model_hash(stage1);

    stage = "forecast";
    const Matd fc_train = first_stage_forecasts(stage1, train_w);
    const Matd fc_val = first_stage_forecasts(stage1, val_w);
    const Matd fc_test = first_stage_forecasts(stage1, test_w);
    save_forecasts((art_dir / "stage1_train.fc").string(), fc_train, rec.first_stage_hash, "train");
    save_forecasts((art_dir / "stage1_val.fc").string(), fc_val, rec.first_stage_hash, "val");
    save_forecasts((art_dir / "stage1_test.fc").string(), fc_test, rec.first_stage_hash, "test");

    stage = "segments";
    const Index width = cfg.segment_width ? *cfg.segment_width : default_segment_width(horizon);
    const auto segments = enumerate_segments(horizon, width, cfg.strides);
    rec.n_segments = static_cast<Index>(segments.size());
    rec.segment_width = width;

    stage = "stage2";
    TrainConfig stage2_cfg = cfg.train;
    stage2_cfg.strategy = cfg.stage2_strategy;
    const auto seg_data = build_segment_datasets(segments, train_w, fc_train, val_w, fc_val);
    RefinementPool pool;
    if (options.compare_sequential) {
        const auto t_seq = Clock::now();
        RefinementPool seq_pool =
            train_pool(seg_data, cfg.base_kind, kernel, stage2_cfg, cfg.base_seed, 1);
        rec.timings.stage2_sequential_sec = seconds_since(t_seq);
        const auto t_par = Clock::now();
        pool = train_pool(seg_data, cfg.base_kind, kernel, stage2_cfg, cfg.base_seed,
                          options.workers);
        rec.timings.stage2_sec = seconds_since(t_par);
        rec.parallel_equals_sequential = serialize_pool(seq_pool) == serialize_pool(pool);
        if (!*rec.parallel_equals_sequential)
            throw std::runtime_error("parallel pool differs from sequential pool");
    } else {
        const auto t_par = Clock::now();
        pool = train_pool(seg_data, cfg.base_kind, kernel, stage2_cfg, cfg.base_seed,
                          options.workers);
        rec.timings.stage2_sec = seconds_since(t_par);
    }
    rec.pool_manifest_path =
        save_pool_manifest((art_dir / "pool").string(), pool, rec.first_stage_hash);

    stage = "selection";
    const auto t_sel = Clock::now();
    const std::vector<Matd> test_preds = pool_predict(pool, test_w, fc_test);
    const auto grid = k_grid(cfg.step_increment, static_cast<Index>(pool.size()));
    SelectionResult sel;
    if (cfg.selection_split == SelectionSplit::val) {
        const std::vector<Matd> val_preds = pool_predict(pool, val_w, fc_val);
        sel = select_k(val_preds, grid, cfg.epsilon);
        sel.final = topk_average(test_preds, sel.k_star);
    } else {
        sel = select_k(test_preds, grid, cfg.epsilon);
    }
    rec.timings.selection_sec = seconds_since(t_sel);
    rec.k_star = sel.k_star;
    for (const EnsembleStats& s : sel.stats)
        rec.grid.push_back({s.k, s.variance, s.mean_corr, s.score, s.k == sel.k_star});

    stage = "metrics";
    Matd base_preds = fc_test;
    Matd final_preds = sel.final;
    Matd targets = test_w.targets;
    if (cfg.metrics_space == MetricsSpace::raw) {
        const auto invert = [&](Matd& m) {
            m = (m.array() * scaler.std + scaler.mean).matrix();
        };
        invert(base_preds);
        invert(final_preds);
        invert(targets);
    }
    rec.base = evaluate(base_preds, targets, base_label(cfg.base_kind));
    rec.bttf = with_gains(
        evaluate(final_preds, targets,
                 base_label(cfg.base_kind) + "+BTTF (" + cfg.strategy_label() + ")"),
        rec.base);
    for (const Matd& member : test_preds)
        rec.mean_abs_delta_by_rank.push_back(refinement_delta(member, fc_test).cwiseAbs().mean());

    rec.ok = true;
    return rec;
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["schema_version"] = 1;
    j["dataset"] = {{"path", cfg.dataset.path},
                    {"name", cfg.dataset.name},
                    {"target_column", cfg.dataset.target_column},
                    {"date_column", cfg.dataset.date_column}};
    j["lookback"] = cfg.lookback;
    j["horizons"] = cfg.horizons;
    j["base_kind"] = to_string(cfg.base_kind);
    j["stage1_strategy"] = to_string(cfg.stage1_strategy);
    j["stage2_strategy"] = to_string(cfg.stage2_strategy);
    if (cfg.segment_width) j["segment_width"] = *cfg.segment_width;
    else j["segment_width"] = nullptr;  // resolved per horizon as floor(H/3)
    j["strides"] = cfg.strides;
    j["step_increment"] = cfg.step_increment;
    j["epsilon"] = cfg.epsilon;
    j["base_seed"] = cfg.base_seed;
    j["dlinear_kernel"] = cfg.dlinear_kernel;
    j["train"] = {{"optimizer", to_string(cfg.train.optimizer)},
                  {"learning_rate", cfg.train.learning_rate},
                  {"batch_size", cfg.train.batch_size},
                  {"max_epochs", cfg.train.max_epochs},
                  {"patience", cfg.train.patience},
                  {"adam_beta1", cfg.train.adam.beta1},
                  {"adam_beta2", cfg.train.adam.beta2},
                  {"adam_eps", cfg.train.adam.eps}};
    j["split"] = {{"train_ratio", cfg.split.train_ratio},
                  {"val_ratio", cfg.split.val_ratio},
                  {"test_ratio", cfg.split.test_ratio},
                  {"overlap", cfg.split.overlap}};
    if (cfg.split.fixed_train_end) j["split"]["fixed_train_end"] = *cfg.split.fixed_train_end;
    if (cfg.split.fixed_val_end) j["split"]["fixed_val_end"] = *cfg.split.fixed_val_end;
    j["selection_split"] = cfg.selection_split == SelectionSplit::test ? "test" : "val";
    j["metrics_space"] =
        cfg.metrics_space == MetricsSpace::standardized ? "standardized" : "raw";
    j["output"] = cfg.output;
    j["artifacts_dir"] = cfg.artifacts_dir;
    return j;
}

ordered_json eval_to_json(const EvalResult& e) {
    ordered_json j;
    j["model_label"] = e.model_label;
    j["mse"] = e.mse;
    j["mae"] = e.mae;
    j["horizon"] = e.horizon;
    if (e.gain_mse_pct) j["gain_mse_pct"] = *e.gain_mse_pct;
    if (e.gain_mae_pct) j["gain_mae_pct"] = *e.gain_mae_pct;
    return j;
}

} // namespace

ForecastReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    if (options.workers < 1) throw std::invalid_argument("run_experiment: workers must be >= 1");

    ForecastReport report;
    report.config = config;
    report.strategy_label = config.strategy_label();

    TimeSeries series = load_csv(config.dataset);

    for (Index horizon : config.horizons) {
        std::string stage = "setup";
        try {
            report.horizons.push_back(run_horizon(config, series, horizon, options, stage));
        } catch (const std::exception& e) {
            HorizonRecord rec;
            rec.horizon = horizon;
            rec.ok = false;
            rec.error_stage = stage;
            rec.error_message = e.what();
            report.horizons.push_back(std::move(rec));
        }
    }
    return report;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw std::invalid_argument("unknown report format '" + s + "' (expected json|csv)");
}

namespace {

std::string report_to_json(const ForecastReport& report) {
    ordered_json j;
    j["schema_version"] = 1;
    j["strategy_label"] = report.strategy_label;
    j["config"] = config_to_json(report.config);
    auto& horizons = j["horizons"] = ordered_json::array();
    for (const HorizonRecord& r : report.horizons) {
        ordered_json h;
        h["horizon"] = r.horizon;
        h["status"] = r.ok ? "ok" : "error";
        if (!r.ok) {
            h["stage"] = r.error_stage;
            h["message"] = r.error_message;
            horizons.push_back(std::move(h));
            continue;
        }
        h["n_segments"] = r.n_segments;
        h["segment_width"] = r.segment_width;
        h["base"] = eval_to_json(r.base);
        h["bttf"] = eval_to_json(r.bttf);
        h["k_star"] = r.k_star;
        auto& grid = h["k_grid"] = ordered_json::array();
        for (const KGridStat& g : r.grid)
            grid.push_back({{"k", g.k},
                            {"variance", g.variance},
                            {"mean_corr", g.mean_corr},
                            {"score", g.score},
                            {"chosen", g.chosen}});
        h["mean_abs_delta_by_rank"] = r.mean_abs_delta_by_rank;
        h["pool_manifest"] = r.pool_manifest_path;
        h["first_stage_hash"] = r.first_stage_hash;
        if (r.parallel_equals_sequential)
            h["parallel_equals_sequential"] = *r.parallel_equals_sequential;
        ordered_json t;
        t["stage1_sec"] = r.timings.stage1_sec;
        t["stage2_sec"] = r.timings.stage2_sec;
        t["selection_sec"] = r.timings.selection_sec;
        if (r.timings.stage2_sequential_sec)
            t["stage2_sequential_sec"] = *r.timings.stage2_sequential_sec;
        h["timings"] = std::move(t);
        horizons.push_back(std::move(h));
    }
    return j.dump(2) + "\n";
}

std::string csv_cell(double v, int decimals) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string report_to_csv(const ForecastReport& report) {
    std::string out = "dataset,horizon,model,mse,mae,gain_mse_pct,gain_mae_pct\n";
    for (const HorizonRecord& r : report.horizons) {
        if (!r.ok) continue;
        for (const EvalResult* e : {&r.base, &r.bttf}) {
            out += report.config.dataset.name + "," + std::to_string(r.horizon) + "," +
                   e->model_label + "," + csv_cell(e->mse, 4) + "," + csv_cell(e->mae, 4) + ",";
            // gains rounded to 1 decimal here; full precision lives in the JSON report
            out += e->gain_mse_pct ? csv_cell(*e->gain_mse_pct, 1) : "";
            out += ",";
            out += e->gain_mae_pct ? csv_cell(*e->gain_mae_pct, 1) : "";
            out += "\n";
        }
    }
    return out;
}

} // namespace

std::string render_report(const ForecastReport& report, ReportFormat format) {
    return format == ReportFormat::json ? report_to_json(report) : report_to_csv(report);
}

void emit_report(const ForecastReport& report, ReportFormat format, const std::string& path) {
    const fs::path dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    atomic_write(path, render_report(report, format));
}

} // namespace bttf
