#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bttf/experiment.hpp"
#include "bttf/serialize.hpp"

namespace {

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("BTTF_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

int run_command(const std::string& config_path, const std::string& format_name,
                int parallel_flag, bool compare_sequential, const std::string& out_override) {
    bttf::ExperimentConfig config = bttf::load_experiment_config(config_path);
    if (!out_override.empty()) config.output = out_override;

    bttf::LoadInfo load_info;
    bttf::load_csv(config.dataset, &load_info);
    std::printf("loaded %s: %ld rows, target column '%s'", config.dataset.name.c_str(),
                load_info.rows, load_info.resolved_target.c_str());
    if (load_info.skipped_trailing_blank > 0)
        std::printf(" (%ld trailing blank lines skipped)", load_info.skipped_trailing_blank);
    std::printf("\n");

    bttf::RunOptions options;
    options.workers = resolve_workers(parallel_flag);
    options.compare_sequential = compare_sequential;

    const bttf::ForecastReport report = bttf::run_experiment(config, options);
    const auto format = bttf::report_format_from_string(format_name);
    bttf::emit_report(report, format, config.output);

    int failures = 0;
    for (const bttf::HorizonRecord& r : report.horizons) {
        if (r.ok) {
            std::printf("H=%-4lld N=%-3lld K*=%-3lld base %s mse=%.4f | %s mse=%.4f (%+.1f%%)\n",
                        static_cast<long long>(r.horizon), static_cast<long long>(r.n_segments),
                        static_cast<long long>(r.k_star), r.base.model_label.c_str(), r.base.mse,
                        r.bttf.model_label.c_str(), r.bttf.mse, r.bttf.gain_mse_pct.value_or(0.0));
        } else {
            ++failures;
            std::fprintf(stderr, "H=%lld failed at stage [%s]: %s\n",
                         static_cast<long long>(r.horizon), r.error_stage.c_str(),
                         r.error_message.c_str());
        }
    }
    std::printf("report written to %s\n", config.output.c_str());
    return failures == 0 ? 0 : 3;
}

int inspect_pool_command(const std::string& manifest_path) {
    const bttf::PoolManifest manifest = bttf::load_pool_manifest(manifest_path);
    std::printf("pool: %zu members, base_seed=%lld, first_stage_hash=%016llx\n",
                manifest.entries.size(), static_cast<long long>(manifest.base_seed),
                static_cast<unsigned long long>(manifest.first_stage_hash));
    std::printf("%-5s %-8s %-12s %-12s %s\n", "rank", "segment", "range", "val_mse", "model");
    // print in rank order
    for (std::size_t rank = 1; rank <= manifest.entries.size(); ++rank) {
        for (const auto& e : manifest.entries) {
            if (static_cast<std::size_t>(e.rank) != rank) continue;
            std::printf("%-5d %-8d [%lld, %lld)%*s %-12.6f %s\n", e.rank, e.segment.index,
                        static_cast<long long>(e.segment.start),
                        static_cast<long long>(e.segment.end),
                        static_cast<int>(8 - std::to_string(e.segment.start).size() -
                                         std::to_string(e.segment.end).size()),
                        "", e.val_mse, e.model_path.c_str());
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bttf: two-stage linear forecasting with look-ahead augmentation, "
                 "self-refinement, and top-K ensemble selection"};
    app.require_subcommand(1);

    std::string config_path, format_name = "json", out_override, manifest_path;
    int parallel_flag = 0;
    bool compare_sequential = false;

    CLI::App* run = app.add_subcommand("run", "run a full experiment from a config file");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--format", format_name, "report format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--parallel", parallel_flag, "stage-2 worker count (BTTF_WORKERS otherwise)");
    run->add_flag("--compare-sequential", compare_sequential,
                  "also train stage 2 sequentially and assert equal results");
    run->add_option("--out", out_override, "override the config's output path");

    CLI::App* inspect = app.add_subcommand("inspect-pool", "print a pool manifest");
    inspect->add_option("--manifest", manifest_path, "pool manifest path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config_path, format_name, parallel_flag, compare_sequential,
                               out_override);
        return inspect_pool_command(manifest_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
