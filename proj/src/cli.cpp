#include "stragglers/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stragglers/errors.hpp"
#include "stragglers/identifiers.hpp"
#include "stragglers/rng.hpp"
#include "stragglers/svg.hpp"
#include "stragglers/version.hpp"

namespace stragglers::cli {

namespace fs = std::filesystem;

namespace {

std::string manifest_path(const CommonOptions& common) {
    return (fs::path(common.out_dir) / "manifest.json").string();
}

std::string resolved_data_dir(const CommonOptions& common) {
    if (!common.data_dir.empty()) return common.data_dir;
    const char* env = std::getenv(kDataDirEnv);
    return env ? env : "";
}

void manifest_common(io::RunManifest& manifest, const std::string& command,
                     const CommonOptions& common) {
    manifest.command = command;
    manifest.tool_version = kVersion;
    manifest.master_seed = common.seed;
    manifest.started_at = io::iso8601_utc_now();
    manifest.config["seed"] = std::to_string(common.seed);
    manifest.config["jobs"] = std::to_string(common.jobs);
    manifest.config["out"] = common.out_dir;
}

void manifest_dataset(io::RunManifest& manifest, const DatasetOptions& dataset) {
    manifest.config["dataset"] = dataset.tag;
    manifest.config["subset"] = std::to_string(dataset.subset);
    if (dataset.tag == "synthetic") {
        manifest.config["synthetic_per_class"] = std::to_string(dataset.synthetic_per_class);
        manifest.config["synthetic_hard_fraction"] =
            io::format_double(dataset.synthetic_hard_fraction);
    }
}

// Writes the manifest (best effort) and maps the error to an exit code.
int fail(io::RunManifest& manifest, const CommonOptions& common, const std::exception& e,
         int code) {
    manifest.status = std::string("failed: ") + e.what();
    manifest.finished_at = io::iso8601_utc_now();
    try {
        io::save_manifest(manifest, manifest_path(common));
    } catch (const std::exception&) {
        // Out dir itself unwritable; the message below is all we can do.
    }
    std::cerr << "error: " << e.what() << "\n";
    return code;
}

void finish(io::RunManifest& manifest, const CommonOptions& common) {
    manifest.finished_at = io::iso8601_utc_now();
    io::save_manifest(manifest, manifest_path(common));
}

void write_text(const std::string& path, const std::string& content) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << content;
}

std::vector<double> column_as_doubles(const io::CsvTable& table, const std::string& name) {
    const std::size_t idx = table.column(name);
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (const auto& row : table.rows) values.push_back(std::stod(row.at(idx)));
    return values;
}

// Renders the per-metric curves of one records CSV: one series per
// (method, ratio) at a fixed metric, x = removal fraction.
std::string records_csv_chart(const io::CsvTable& table, const std::string& metric,
                              const std::string& title) {
    const std::size_t method_col = table.column("method");
    const std::size_t ratio_col = table.column("ratio");
    const std::size_t fraction_col = table.column("fraction");
    const std::size_t metric_col = table.column("metric");
    const std::size_t mean_col = table.column("mean");
    const std::size_t std_col = table.column("std");

    std::vector<svg::Series> series;
    std::map<std::string, std::size_t> index;
    for (const auto& row : table.rows) {
        if (row.at(metric_col) != metric) continue;
        const double mean = std::stod(row.at(mean_col));
        const double stddev = std::stod(row.at(std_col));
        if (!std::isfinite(mean)) continue;  // grid point with no successful runs
        const std::string key = row.at(method_col) + " " + row.at(ratio_col);
        auto [it, inserted] = index.try_emplace(key, series.size());
        if (inserted) {
            series.push_back(svg::Series{key, {}, {}, {}});
        }
        auto& s = series[it->second];
        s.x.push_back(std::stod(row.at(fraction_col)));
        s.y.push_back(mean);
        s.y_std.push_back(std::isfinite(stddev) ? stddev : 0.0);
    }
    if (series.empty()) {
        series.push_back(svg::Series{"no data", {0.0}, {0.0}, {}});
    }
    svg::ChartSpec spec;
    spec.title = title;
    spec.x_label = "removal fraction";
    spec.y_label = metric;
    return svg::line_chart(spec, series);
}

}  // namespace

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config file " + path);
    }
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace

void apply_config(const std::map<std::string, std::string>& kv, BenchmarkOptions& options) {
    for (const auto& [key, value] : kv) {
        if (key == "dataset") options.dataset.tag = value;
        else if (key == "subset") options.dataset.subset = std::stoul(value);
        else if (key == "synthetic_per_class") options.dataset.synthetic_per_class = std::stoi(value);
        else if (key == "synthetic_hard_fraction") options.dataset.synthetic_hard_fraction = std::stod(value);
        else if (key == "seed") options.common.seed = std::stoull(value);
        else if (key == "jobs") options.common.jobs = std::stoi(value);
        else if (key == "out") options.common.out_dir = value;
        else if (key == "data_dir") options.common.data_dir = value;
        else if (key == "straggler_sets") options.bench.straggler_sets = std::stoi(value);
        else if (key == "inits_per_set") options.bench.inits_per_set = std::stoi(value);
        else if (key == "ratios") options.bench.ratio_grid = split_list(value);
        else if (key == "fractions") {
            options.bench.removal_grid.clear();
            for (const auto& f : split_list(value)) options.bench.removal_grid.push_back(std::stod(f));
        } else if (key == "identifiers") {
            options.bench.identifiers.clear();
            for (const auto& m : split_list(value)) {
                options.bench.identifiers.push_back(identifier_method_from_string(m));
            }
        }
        else if (key == "epochs") options.bench.train.epochs = std::stoi(value);
        else if (key == "batch_size") options.bench.train.batch_size = std::stoi(value);
        else if (key == "burn_in") options.bench.train.burn_in_epochs = std::stoi(value);
        else if (key == "radii_check_period") options.bench.stop_options.radii_period = std::stoi(value);
        else if (key == "max_attempts") options.bench.stop_options.max_attempts = std::stoi(value);
        else if (key == "overlap_runs") options.bench.overlap_runs = std::stoi(value);
        else if (key == "error_rate_runs") options.error_rate_runs = std::stoi(value);
        else if (key == "with_overlap") options.with_overlap = value == "1" || value == "true";
        else if (key == "with_error_rates") options.with_error_rates = value == "1" || value == "true";
        else if (key == "score_at_inversion") options.bench.score_at_inversion = value == "1" || value == "true";
        else throw Error("unknown config key '" + key + "'");
    }
}

data::LabeledDataset resolve_dataset(const DatasetOptions& dataset, const CommonOptions& common,
                                     io::RunManifest& manifest) {
    if (dataset.tag == "synthetic") {
        auto set = data::make_synthetic(dataset.synthetic_per_class,
                                        dataset.synthetic_hard_fraction, common.seed);
        if (dataset.subset > 0 && dataset.subset < set.size()) {
            set = data::take_subset(set, dataset.subset, derive_seed(common.seed, {0x73756273}));
        }
        return set;
    }
    const std::string root = resolved_data_dir(common);
    if (root.empty()) {
        throw Error("no data directory: pass --data-dir or set " + std::string(kDataDirEnv));
    }
    const fs::path dir = fs::path(root) / dataset.tag;
    const std::string train_images = (dir / "train-images-idx3-ubyte").string();
    const std::string train_labels = (dir / "train-labels-idx1-ubyte").string();
    const std::string test_images = (dir / "t10k-images-idx3-ubyte").string();
    const std::string test_labels = (dir / "t10k-labels-idx1-ubyte").string();
    for (const auto& path : {train_images, train_labels, test_images, test_labels}) {
        if (!fs::exists(path)) {
            throw Error("dataset file missing: " + path);
        }
        manifest.input_digests[path] = io::fnv1a64_hex(path);
    }
    const auto train_raw = data::load_idx(train_images, train_labels);
    const auto test_raw = data::load_idx(test_images, test_labels);
    auto set = data::combine_shuffle_normalize(train_raw, test_raw, common.seed);
    set.provenance.source = dataset.tag;
    if (dataset.subset > 0 && dataset.subset < set.size()) {
        set = data::take_subset(set, dataset.subset, derive_seed(common.seed, {0x73756273}));
        set.provenance.source = dataset.tag + "-" + std::to_string(dataset.subset);
    }
    return set;
}

int cmd_radii(const RadiiOptions& options) {
    io::RunManifest manifest;
    manifest_common(manifest, "radii", options.common);
    manifest_dataset(manifest, options.dataset);
    manifest.config["ensemble"] = std::to_string(options.ensemble);
    manifest.config["epochs"] = std::to_string(options.train.epochs);
    manifest.config["radii_period"] = std::to_string(options.train.radii_period);
    manifest.config["burn_in"] = std::to_string(options.train.burn_in_epochs);

    data::LabeledDataset dataset;
    try {
        if (options.ensemble < 1 || options.train.epochs <= options.train.burn_in_epochs) {
            throw Error("radii needs ensemble >= 1 and epochs > burn_in");
        }
        dataset = resolve_dataset(options.dataset, options.common, manifest);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitConfigError);
    }

    try {
        std::vector<geometry::RadiiTrace> traces(static_cast<std::size_t>(options.ensemble));
        experiments::parallel_for(traces.size(), options.common.jobs, [&](std::size_t e) {
            nn::TrainConfig train = options.train;
            train.seed = derive_seed(options.common.seed, {0x72616469, e});
            traces[e] = inversion::record_radii_trace(dataset, train, options.compute_radii);
        });

        const fs::path out_dir(options.common.out_dir);
        for (std::size_t e = 0; e < traces.size(); ++e) {
            const std::string path =
                (out_dir / ("radii_run" + std::to_string(e) + ".csv")).string();
            io::write_radii_trace_csv(traces[e], path);
            manifest.outputs.push_back(path);
        }

        // Ensemble mean/std per class per epoch.
        io::CsvTable mean_table;
        const int k = dataset.num_classes;
        mean_table.header.push_back("epoch");
        for (int c = 0; c < k; ++c) {
            mean_table.header.push_back("mean_class" + std::to_string(c));
            mean_table.header.push_back("std_class" + std::to_string(c));
        }
        const std::size_t n_entries = traces.front().entries.size();
        std::vector<svg::Series> series(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            series[static_cast<std::size_t>(c)].label = "class" + std::to_string(c);
        }
        for (std::size_t t = 0; t < n_entries; ++t) {
            std::vector<std::string> row{std::to_string(traces.front().entries[t].epoch)};
            for (int c = 0; c < k; ++c) {
                std::vector<double> values;
                values.reserve(traces.size());
                for (const auto& trace : traces) {
                    values.push_back(trace.entries[t].radii[static_cast<std::size_t>(c)]);
                }
                const auto agg = experiments::mean_std(values);
                row.push_back(io::format_double(agg.mean));
                row.push_back(io::format_double(agg.stddev));
                auto& s = series[static_cast<std::size_t>(c)];
                s.x.push_back(traces.front().entries[t].epoch);
                s.y.push_back(agg.mean);
                s.y_std.push_back(agg.stddev);
            }
            mean_table.rows.push_back(std::move(row));
        }
        const std::string mean_path = (out_dir / "radii_mean.csv").string();
        io::write_csv(mean_table, mean_path);
        manifest.outputs.push_back(mean_path);

        if (n_entries > 0) {
            // Must match cmd_report's rendering: charts derive from CSV content only.
            svg::ChartSpec spec;
            spec.title = "Squared gyration radii";
            spec.x_label = "epoch";
            spec.y_label = "r^2";
            const std::string svg_path = (out_dir / "radii.svg").string();
            write_text(svg_path, svg::line_chart(spec, series));
            manifest.outputs.push_back(svg_path);
        }
        finish(manifest, options.common);
        return kExitOk;
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitComputeError);
    }
}

int cmd_identify(const IdentifyOptions& options) {
    io::RunManifest manifest;
    manifest_common(manifest, "identify", options.common);
    manifest_dataset(manifest, options.dataset);
    manifest.config["method"] = options.method;
    manifest.config["epochs"] = std::to_string(options.train.epochs);
    if (options.n.has_value()) manifest.config["n"] = std::to_string(*options.n);

    data::LabeledDataset dataset;
    IdentifierMethod method;
    try {
        method = identifier_method_from_string(options.method);
        if (method == IdentifierMethod::random_baseline) {
            throw Error("identify supports straggler, confidence and energy methods");
        }
        dataset = resolve_dataset(options.dataset, options.common, manifest);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitConfigError);
    }

    try {
        const fs::path out_dir(options.common.out_dir);
        HardSampleSet result;
        nn::TrainConfig train = options.train;
        train.seed = derive_seed(options.common.seed, {0x6964656e});

        const auto score_with_trained_model = [&](std::size_t n) {
            const auto scorer_seed = derive_seed(options.common.seed, {0x73636f72});
            nn::TrainConfig scorer_train = options.train;
            scorer_train.seed = scorer_seed;
            auto params = nn::init_params(dataset.dim, dataset.num_classes, scorer_seed);
            const auto log = nn::train(params, data::full_view(dataset), scorer_train);
            io::append_loss_log_csv(log.epoch_mean_loss, (out_dir / "loss_log.csv").string());
            return method == IdentifierMethod::confidence
                       ? identifiers::identify_by_confidence(params, dataset, n)
                       : identifiers::identify_by_energy(params, dataset, n);
        };

        if (method == IdentifierMethod::straggler || !options.n.has_value()) {
            const auto inv = inversion::train_stop_at_inversion(dataset, train, options.stop);
            const auto stragglers_set = inversion::extract_stragglers(inv, dataset);
            if (method == IdentifierMethod::straggler) {
                io::save_inversion_result(inv, (out_dir / "inversion").string(), "inversion");
                manifest.outputs.push_back((out_dir / "inversion" / "inversion.json").string());
                result = stragglers_set;
            } else {
                // threshold matched to the straggler count
                result = score_with_trained_model(stragglers_set.size());
            }
        } else {
            result = score_with_trained_model(*options.n);
        }

        const std::string set_path =
            (out_dir / ("hard_set_" + options.method + ".json")).string();
        io::save_hard_set_json(result, set_path);
        manifest.outputs.push_back(set_path);
        finish(manifest, options.common);
        return kExitOk;
    } catch (const InversionNotFound& e) {
        return fail(manifest, options.common, e, kExitInversionNotFound);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitComputeError);
    }
}

int cmd_sweep(const SweepOptions& options) {
    io::RunManifest manifest;
    manifest_common(manifest, "sweep", options.common);
    manifest_dataset(manifest, options.dataset);
    manifest.config["direction"] = options.direction;
    manifest.config["straggler_sets"] = std::to_string(options.bench.straggler_sets);
    manifest.config["inits_per_set"] = std::to_string(options.bench.inits_per_set);

    data::LabeledDataset dataset;
    data::RemovalGroup direction;
    try {
        if (options.direction == "remove_hard") direction = data::RemovalGroup::hard;
        else if (options.direction == "remove_easy") direction = data::RemovalGroup::easy;
        else throw Error("direction must be remove_hard or remove_easy");
        dataset = resolve_dataset(options.dataset, options.common, manifest);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitConfigError);
    }

    try {
        experiments::BenchmarkConfig bench = options.bench;
        bench.master_seed = options.common.seed;
        bench.jobs = options.common.jobs;

        const auto straggler_sets = experiments::build_straggler_sets(dataset, bench);
        const auto records = experiments::run_imbalance_sweep(dataset, bench, direction,
                                                              straggler_sets,
                                                              IdentifierMethod::straggler);

        const fs::path out_dir(options.common.out_dir);
        const std::string csv_path =
            (out_dir / ("sweep_" + options.direction + ".csv")).string();
        io::write_csv(io::records_table(records), csv_path);
        manifest.outputs.push_back(csv_path);

        const auto table = io::read_csv(csv_path);
        for (const std::string metric : {"overall_accuracy", "hard_accuracy", "easy_accuracy"}) {
            const std::string svg_path =
                (out_dir / ("sweep_" + options.direction + "_" + metric + ".svg")).string();
            write_text(svg_path,
                       records_csv_chart(table, metric, metric + " (" + options.direction + ")"));
            manifest.outputs.push_back(svg_path);
        }

        bool any_failed = false;
        for (const auto& record : records) {
            if (record.any_failed()) {
                any_failed = true;
                std::ostringstream context;
                for (const auto& run : record.runs) {
                    if (run.error.has_value()) {
                        context << "set " << run.straggler_set_index << " init " << run.init_index
                                << ": " << *run.error << "\n";
                    }
                }
                write_text(csv_path + "." + record.ratio_label + "." +
                               io::format_double(record.removal_fraction) + ".failed",
                           context.str());
            }
        }
        if (any_failed) {
            throw Error("one or more grid points failed; see .failed sidecars");
        }
        finish(manifest, options.common);
        return kExitOk;
    } catch (const InversionNotFound& e) {
        return fail(manifest, options.common, e, kExitInversionNotFound);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitComputeError);
    }
}

int cmd_benchmark(const BenchmarkOptions& options) {
    io::RunManifest manifest;
    manifest_common(manifest, "benchmark", options.common);
    manifest_dataset(manifest, options.dataset);
    manifest.config["straggler_sets"] = std::to_string(options.bench.straggler_sets);
    manifest.config["inits_per_set"] = std::to_string(options.bench.inits_per_set);
    manifest.config["overlap_runs"] = std::to_string(options.bench.overlap_runs);
    manifest.config["error_rate_runs"] = std::to_string(options.error_rate_runs);
    manifest.config["epochs"] = std::to_string(options.bench.train.epochs);
    {
        std::string methods;
        for (const auto m : options.bench.identifiers) {
            methods += (methods.empty() ? "" : ",") + to_string(m);
        }
        manifest.config["identifiers"] = methods;
    }

    data::LabeledDataset dataset;
    try {
        dataset = resolve_dataset(options.dataset, options.common, manifest);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitConfigError);
    }

    try {
        experiments::BenchmarkConfig bench = options.bench;
        bench.master_seed = options.common.seed;
        bench.jobs = options.common.jobs;
        bench.dataset_tag = dataset.provenance.source;

        const auto report = experiments::run_benchmark(dataset, bench);
        const fs::path out_dir(options.common.out_dir);

        // Curves per direction, all identifiers in one table.
        for (const auto direction : {data::RemovalGroup::hard, data::RemovalGroup::easy}) {
            std::vector<experiments::ExperimentRecord> all;
            for (const auto& outcome : report.outcomes) {
                const auto& records = direction == data::RemovalGroup::hard ? outcome.remove_hard
                                                                            : outcome.remove_easy;
                all.insert(all.end(), records.begin(), records.end());
            }
            const std::string name =
                direction == data::RemovalGroup::hard ? "curves_remove_hard" : "curves_remove_easy";
            const std::string csv_path = (out_dir / (name + ".csv")).string();
            io::write_csv(io::records_table(all), csv_path);
            manifest.outputs.push_back(csv_path);

            const auto table = io::read_csv(csv_path);
            for (const std::string metric : {"hard_accuracy", "easy_accuracy"}) {
                const std::string svg_path = (out_dir / (name + "_" + metric + ".svg")).string();
                write_text(svg_path, records_csv_chart(table, metric, metric + " (" + name + ")"));
                manifest.outputs.push_back(svg_path);
            }
        }

        // Imbalance gap ranking.
        io::CsvTable deltas;
        deltas.header = {"method", "delta", "delta_run_std", "rank"};
        for (const auto& outcome : report.outcomes) {
            int rank = 1;
            for (const auto m : report.ranking) {
                if (m == outcome.method) break;
                ++rank;
            }
            deltas.rows.push_back({to_string(outcome.method), io::format_double(outcome.delta),
                                   io::format_double(outcome.delta_run_std), std::to_string(rank)});
        }
        const std::string deltas_path = (out_dir / "deltas.csv").string();
        io::write_csv(deltas, deltas_path);
        manifest.outputs.push_back(deltas_path);

        // Per-method hard-sample sets and class distributions.
        io::CsvTable distribution;
        distribution.header = {"method", "class", "mean_count", "std_count", "sets"};
        for (const auto& outcome : report.outcomes) {
            for (std::size_t s = 0; s < outcome.hard_sets.size(); ++s) {
                const std::string set_path =
                    (out_dir / ("hard_set_" + to_string(outcome.method) + "_" +
                                std::to_string(s) + ".json"))
                        .string();
                io::save_hard_set_json(outcome.hard_sets[s], set_path);
                manifest.outputs.push_back(set_path);
            }
            const int k = dataset.num_classes;
            std::vector<double> means(static_cast<std::size_t>(k), 0.0);
            for (int c = 0; c < k; ++c) {
                std::vector<double> counts;
                for (const auto& set : outcome.hard_sets) {
                    counts.push_back(experiments::class_distribution(set)[static_cast<std::size_t>(c)]);
                }
                const auto agg = experiments::mean_std(counts);
                means[static_cast<std::size_t>(c)] = agg.mean;
                distribution.rows.push_back({to_string(outcome.method), std::to_string(c),
                                             io::format_double(agg.mean),
                                             io::format_double(agg.stddev),
                                             std::to_string(agg.n)});
            }
            svg::ChartSpec spec;
            spec.title = "Hard samples per class (" + to_string(outcome.method) + ")";
            spec.x_label = "class";
            spec.y_label = "count";
            std::vector<std::string> labels;
            for (int c = 0; c < k; ++c) labels.push_back(std::to_string(c));
            const std::string svg_path =
                (out_dir / ("distribution_" + to_string(outcome.method) + ".svg")).string();
            write_text(svg_path, svg::bar_chart(spec, labels, means));
            manifest.outputs.push_back(svg_path);
        }
        const std::string distribution_path = (out_dir / "distribution.csv").string();
        io::write_csv(distribution, distribution_path);
        manifest.outputs.push_back(distribution_path);

        if (options.with_overlap) {
            const auto overlaps =
                experiments::overlap_matrix(dataset, bench, bench.overlap_runs);
            const std::string overlap_path = (out_dir / "overlap.csv").string();
            io::write_csv(io::overlap_table(overlaps), overlap_path);
            manifest.outputs.push_back(overlap_path);
        }

        if (options.with_error_rates) {
            const auto error_rates =
                experiments::class_error_rates(dataset, bench, options.error_rate_runs);
            io::CsvTable pearson_table;
            pearson_table.header = {"method", "pearson_r", "error_runs"};
            for (const auto& outcome : report.outcomes) {
                const int k = dataset.num_classes;
                std::vector<double> mean_counts(static_cast<std::size_t>(k), 0.0);
                for (int c = 0; c < k; ++c) {
                    std::vector<double> counts;
                    for (const auto& set : outcome.hard_sets) {
                        counts.push_back(set.per_class_counts[static_cast<std::size_t>(c)]);
                    }
                    mean_counts[static_cast<std::size_t>(c)] = experiments::mean_std(counts).mean;
                }
                const double r = experiments::pearson(error_rates, mean_counts);
                pearson_table.rows.push_back({to_string(outcome.method), io::format_double(r),
                                              std::to_string(options.error_rate_runs)});
            }
            const std::string pearson_path = (out_dir / "pearson.csv").string();
            io::write_csv(pearson_table, pearson_path);
            manifest.outputs.push_back(pearson_path);
        }

        bool any_failed = false;
        for (const auto& outcome : report.outcomes) {
            for (const auto* records : {&outcome.remove_hard, &outcome.remove_easy}) {
                for (const auto& record : *records) {
                    if (!record.any_failed()) continue;
                    any_failed = true;
                    std::ostringstream context;
                    for (const auto& run : record.runs) {
                        if (run.error.has_value()) {
                            context << "set " << run.straggler_set_index << " init "
                                    << run.init_index << ": " << *run.error << "\n";
                        }
                    }
                    write_text((out_dir / (to_string(record.method) + "." + record.ratio_label +
                                           "." + io::format_double(record.removal_fraction) +
                                           ".failed"))
                                   .string(),
                               context.str());
                }
            }
        }
        if (any_failed) {
            throw Error("one or more grid points failed; see .failed sidecars");
        }
        finish(manifest, options.common);
        return kExitOk;
    } catch (const InversionNotFound& e) {
        return fail(manifest, options.common, e, kExitInversionNotFound);
    } catch (const std::exception& e) {
        return fail(manifest, options.common, e, kExitComputeError);
    }
}

int cmd_report(const ReportOptions& options) {
    io::RunManifest manifest;
    manifest.command = "report";
    manifest.tool_version = kVersion;
    manifest.started_at = io::iso8601_utc_now();
    manifest.config["in"] = options.in_dir;
    manifest.config["out"] = options.out_dir;
    try {
        const fs::path in_dir(options.in_dir);
        if (!fs::is_directory(in_dir)) {
            throw Error("report input is not a directory: " + options.in_dir);
        }
        const fs::path out_dir = options.out_dir.empty() ? in_dir : fs::path(options.out_dir);
        int rendered = 0;

        for (const auto& entry : fs::directory_iterator(in_dir)) {
            if (entry.path().extension() != ".csv") continue;
            const std::string stem = entry.path().stem().string();
            const auto table = io::read_csv(entry.path().string());

            if (stem == "radii_mean") {
                std::vector<svg::Series> series;
                const auto epochs = column_as_doubles(table, "epoch");
                for (std::size_t col = 1; col + 1 < table.header.size(); col += 2) {
                    svg::Series s;
                    s.label = table.header[col].substr(std::string("mean_").size());
                    s.x = epochs;
                    for (const auto& row : table.rows) {
                        s.y.push_back(std::stod(row.at(col)));
                        s.y_std.push_back(std::stod(row.at(col + 1)));
                    }
                    series.push_back(std::move(s));
                }
                svg::ChartSpec spec;
                spec.title = "Squared gyration radii";
                spec.x_label = "epoch";
                spec.y_label = "r^2";
                write_text((out_dir / "radii.svg").string(), svg::line_chart(spec, series));
                ++rendered;
            } else if (stem.rfind("sweep_", 0) == 0 || stem.rfind("curves_", 0) == 0) {
                for (const std::string metric :
                     {"overall_accuracy", "hard_accuracy", "easy_accuracy"}) {
                    write_text((out_dir / (stem + "_" + metric + ".svg")).string(),
                               records_csv_chart(table, metric, metric + " (" + stem + ")"));
                    ++rendered;
                }
            } else if (stem == "distribution") {
                const std::size_t method_col = table.column("method");
                const std::size_t class_col = table.column("class");
                const std::size_t mean_col = table.column("mean_count");
                std::map<std::string, std::vector<std::pair<int, double>>> by_method;
                for (const auto& row : table.rows) {
                    by_method[row.at(method_col)].emplace_back(std::stoi(row.at(class_col)),
                                                               std::stod(row.at(mean_col)));
                }
                for (auto& [method, counts] : by_method) {
                    std::sort(counts.begin(), counts.end());
                    std::vector<std::string> labels;
                    std::vector<double> values;
                    for (const auto& [cls, count] : counts) {
                        labels.push_back(std::to_string(cls));
                        values.push_back(count);
                    }
                    svg::ChartSpec spec;
                    spec.title = "Hard samples per class (" + method + ")";
                    spec.x_label = "class";
                    spec.y_label = "count";
                    write_text((out_dir / ("distribution_" + method + ".svg")).string(),
                               svg::bar_chart(spec, labels, values));
                    ++rendered;
                }
            }
        }
        if (rendered == 0) {
            throw Error("no renderable CSVs found in " + options.in_dir);
        }
        manifest.status = "ok";
        manifest.finished_at = io::iso8601_utc_now();
        io::save_manifest(manifest, (out_dir / "manifest_report.json").string());
        std::cout << "rendered " << rendered << " chart(s) into " << out_dir.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.status = std::string("failed: ") + e.what();
        manifest.finished_at = io::iso8601_utc_now();
        if (!options.in_dir.empty() && fs::is_directory(options.in_dir)) {
            try {
                const fs::path out_dir =
                    options.out_dir.empty() ? fs::path(options.in_dir) : fs::path(options.out_dir);
                io::save_manifest(manifest, (out_dir / "manifest_report.json").string());
            } catch (const std::exception&) {
            }
        }
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace stragglers::cli
