#include <CLI11.hpp>

#include "stragglers/cli.hpp"
#include "stragglers/version.hpp"

namespace cli = stragglers::cli;

namespace {

struct CommonFlags {
    CLI::Option* seed = nullptr;
    CLI::Option* jobs = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* data_dir = nullptr;
};

CommonFlags add_common(CLI::App* cmd, cli::CommonOptions& common) {
    CommonFlags flags;
    flags.seed = cmd->add_option("--seed", common.seed, "Master seed");
    flags.jobs = cmd->add_option("--jobs", common.jobs, "Concurrent training runs")
                     ->check(CLI::PositiveNumber);
    flags.out = cmd->add_option("--out", common.out_dir, "Output directory");
    flags.data_dir = cmd->add_option("--data-dir", common.data_dir,
                                     "Dataset root (defaults to $STRAGGLERS_DATA_DIR)");
    return flags;
}

struct DatasetFlags {
    CLI::Option* tag = nullptr;
    CLI::Option* subset = nullptr;
    CLI::Option* per_class = nullptr;
    CLI::Option* hard_fraction = nullptr;
};

DatasetFlags add_dataset(CLI::App* cmd, cli::DatasetOptions& dataset) {
    DatasetFlags flags;
    flags.tag = cmd->add_option("--dataset", dataset.tag,
                                "synthetic | mnist | fashionmnist | kmnist");
    flags.subset = cmd->add_option("--subset", dataset.subset, "Subset size (0 = full)");
    flags.per_class = cmd->add_option("--synthetic-per-class", dataset.synthetic_per_class,
                                      "Synthetic samples per class");
    flags.hard_fraction =
        cmd->add_option("--synthetic-hard-fraction", dataset.synthetic_hard_fraction,
                        "Synthetic interleaved-region fraction");
    return flags;
}

struct TrainFlags {
    CLI::Option* epochs = nullptr;
    CLI::Option* batch_size = nullptr;
    CLI::Option* burn_in = nullptr;
};

TrainFlags add_train(CLI::App* cmd, stragglers::nn::TrainConfig& train) {
    TrainFlags flags;
    flags.epochs = cmd->add_option("--epochs", train.epochs, "Training epochs");
    flags.batch_size = cmd->add_option("--batch-size", train.batch_size, "Minibatch size");
    flags.burn_in = cmd->add_option("--burn-in", train.burn_in_epochs,
                                    "Epochs excluded from radii comparisons");
    return flags;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Straggler-based hard-sample identification and in-class imbalance benchmarks"};
    app.set_version_flag("--version", stragglers::kVersion);
    app.require_subcommand(1);

    // radii
    cli::RadiiOptions radii;
    auto* radii_cmd = app.add_subcommand("radii", "Record per-class gyration radii traces");
    add_common(radii_cmd, radii.common);
    add_dataset(radii_cmd, radii.dataset);
    add_train(radii_cmd, radii.train);
    radii_cmd->add_option("--ensemble", radii.ensemble, "Number of trace runs");
    radii_cmd->add_option("--radii-period", radii.train.radii_period,
                          "Epochs between radii measurements");
    bool no_radii = false;
    radii_cmd->add_flag("--no-radii", no_radii, "Train without computing radii (timing runs)");

    // identify
    cli::IdentifyOptions identify;
    auto* identify_cmd = app.add_subcommand("identify", "Emit a hard-sample set as JSON");
    add_common(identify_cmd, identify.common);
    add_dataset(identify_cmd, identify.dataset);
    add_train(identify_cmd, identify.train);
    identify_cmd->add_option("--method", identify.method, "straggler | confidence | energy");
    std::size_t identify_n = 0;
    auto* n_opt = identify_cmd->add_option(
        "--n", identify_n, "Threshold override for confidence/energy (default: straggler count)");
    identify_cmd->add_option("--radii-check-period", identify.stop.radii_period,
                             "Epochs between inversion checks");
    identify_cmd->add_option("--max-attempts", identify.stop.max_attempts,
                             "Stop-at-inversion restarts before giving up");

    // sweep
    cli::SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Hard/easy removal sweeps over the ratio grid");
    add_common(sweep_cmd, sweep.common);
    add_dataset(sweep_cmd, sweep.dataset);
    add_train(sweep_cmd, sweep.bench.train);
    sweep_cmd->add_option("--direction", sweep.direction, "remove_hard | remove_easy");
    sweep_cmd->add_option("--straggler-sets", sweep.bench.straggler_sets, "Straggler sets");
    sweep_cmd->add_option("--inits-per-set", sweep.bench.inits_per_set,
                          "Model initializations per straggler set");
    std::vector<std::string> sweep_ratios;
    sweep_cmd->add_option("--ratios", sweep_ratios, "Ratio labels, e.g. 80:20 70:30");
    std::vector<double> sweep_fractions;
    sweep_cmd->add_option("--fractions", sweep_fractions, "Removal fractions");

    // benchmark: config file first, explicitly passed flags win.
    cli::BenchmarkOptions benchmark;
    auto* benchmark_cmd =
        app.add_subcommand("benchmark", "Identifier comparison: curves, deltas, overlaps");
    std::string benchmark_config_file;
    benchmark_cmd->add_option("--config", benchmark_config_file, "key=value configuration file");
    const CommonFlags bench_common = add_common(benchmark_cmd, benchmark.common);
    const DatasetFlags bench_dataset = add_dataset(benchmark_cmd, benchmark.dataset);
    const TrainFlags bench_train = add_train(benchmark_cmd, benchmark.bench.train);
    auto* sets_opt = benchmark_cmd->add_option("--straggler-sets", benchmark.bench.straggler_sets,
                                               "Straggler sets");
    auto* inits_opt = benchmark_cmd->add_option("--inits-per-set", benchmark.bench.inits_per_set,
                                                "Model initializations per straggler set");
    std::vector<std::string> benchmark_ratios;
    benchmark_cmd->add_option("--ratios", benchmark_ratios, "Ratio labels");
    std::vector<double> benchmark_fractions;
    benchmark_cmd->add_option("--fractions", benchmark_fractions, "Removal fractions");
    std::vector<std::string> benchmark_identifiers;
    benchmark_cmd->add_option("--identifiers", benchmark_identifiers,
                              "Identifiers: straggler confidence energy random");
    auto* overlap_opt = benchmark_cmd->add_option("--overlap-runs", benchmark.bench.overlap_runs,
                                                  "Runs for the overlap matrix");
    auto* err_runs_opt = benchmark_cmd->add_option(
        "--error-rate-runs", benchmark.error_rate_runs, "Trainings for class error rates");

    // report
    cli::ReportOptions report;
    auto* report_cmd = app.add_subcommand("report", "Re-render SVG charts from CSVs");
    report_cmd->add_option("--in", report.in_dir, "Directory with CSV outputs")->required();
    report_cmd->add_option("--out", report.out_dir, "Render target (default: next to CSVs)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfigError;
    }

    try {
        if (radii_cmd->parsed()) {
            radii.compute_radii = !no_radii;
            return cli::cmd_radii(radii);
        }
        if (identify_cmd->parsed()) {
            if (n_opt->count() > 0) identify.n = identify_n;
            return cli::cmd_identify(identify);
        }
        if (sweep_cmd->parsed()) {
            if (!sweep_ratios.empty()) sweep.bench.ratio_grid = sweep_ratios;
            if (!sweep_fractions.empty()) sweep.bench.removal_grid = sweep_fractions;
            return cli::cmd_sweep(sweep);
        }
        if (benchmark_cmd->parsed()) {
            if (!benchmark_config_file.empty()) {
                cli::BenchmarkOptions file_options;
                cli::apply_config(cli::parse_kv_file(benchmark_config_file), file_options);
                auto fill = [](const CLI::Option* flag, auto& target, const auto& file_value) {
                    if (flag->count() == 0) target = file_value;
                };
                fill(bench_common.seed, benchmark.common.seed, file_options.common.seed);
                fill(bench_common.jobs, benchmark.common.jobs, file_options.common.jobs);
                fill(bench_common.out, benchmark.common.out_dir, file_options.common.out_dir);
                fill(bench_common.data_dir, benchmark.common.data_dir,
                     file_options.common.data_dir);
                fill(bench_dataset.tag, benchmark.dataset.tag, file_options.dataset.tag);
                fill(bench_dataset.subset, benchmark.dataset.subset, file_options.dataset.subset);
                fill(bench_dataset.per_class, benchmark.dataset.synthetic_per_class,
                     file_options.dataset.synthetic_per_class);
                fill(bench_dataset.hard_fraction, benchmark.dataset.synthetic_hard_fraction,
                     file_options.dataset.synthetic_hard_fraction);
                fill(bench_train.epochs, benchmark.bench.train.epochs,
                     file_options.bench.train.epochs);
                fill(bench_train.batch_size, benchmark.bench.train.batch_size,
                     file_options.bench.train.batch_size);
                fill(bench_train.burn_in, benchmark.bench.train.burn_in_epochs,
                     file_options.bench.train.burn_in_epochs);
                fill(sets_opt, benchmark.bench.straggler_sets, file_options.bench.straggler_sets);
                fill(inits_opt, benchmark.bench.inits_per_set, file_options.bench.inits_per_set);
                fill(overlap_opt, benchmark.bench.overlap_runs, file_options.bench.overlap_runs);
                fill(err_runs_opt, benchmark.error_rate_runs, file_options.error_rate_runs);
                if (benchmark_ratios.empty()) {
                    benchmark.bench.ratio_grid = file_options.bench.ratio_grid;
                }
                if (benchmark_fractions.empty()) {
                    benchmark.bench.removal_grid = file_options.bench.removal_grid;
                }
                if (benchmark_identifiers.empty()) {
                    benchmark.bench.identifiers = file_options.bench.identifiers;
                }
                benchmark.with_overlap = file_options.with_overlap;
                benchmark.with_error_rates = file_options.with_error_rates;
                benchmark.bench.score_at_inversion = file_options.bench.score_at_inversion;
                benchmark.bench.stop_options = file_options.bench.stop_options;
            }
            if (!benchmark_ratios.empty()) benchmark.bench.ratio_grid = benchmark_ratios;
            if (!benchmark_fractions.empty()) benchmark.bench.removal_grid = benchmark_fractions;
            if (!benchmark_identifiers.empty()) {
                benchmark.bench.identifiers.clear();
                for (const auto& m : benchmark_identifiers) {
                    benchmark.bench.identifiers.push_back(
                        stragglers::identifier_method_from_string(m));
                }
            }
            return cli::cmd_benchmark(benchmark);
        }
        if (report_cmd->parsed()) {
            return cli::cmd_report(report);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitConfigError;
    }
    return cli::kExitConfigError;
}
