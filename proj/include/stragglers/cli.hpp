#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "stragglers/experiments.hpp"
#include "stragglers/serialize.hpp"

namespace stragglers::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitComputeError = 3;
inline constexpr int kExitInversionNotFound = 4;

inline constexpr const char* kDataDirEnv = "STRAGGLERS_DATA_DIR";

struct CommonOptions {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out_dir = "out";
    std::string data_dir;  // empty -> $STRAGGLERS_DATA_DIR
};

struct DatasetOptions {
    std::string tag = "synthetic";  // synthetic | mnist | fashionmnist | kmnist
    std::size_t subset = 0;         // 0 keeps the full working set
    int synthetic_per_class = 500;
    double synthetic_hard_fraction = 0.2;
};

struct RadiiOptions {
    CommonOptions common;
    DatasetOptions dataset;
    int ensemble = 10;
    nn::TrainConfig train;  // radii_period + burn_in drive the trace grid
    bool compute_radii = true;
};

struct IdentifyOptions {
    CommonOptions common;
    DatasetOptions dataset;
    std::string method = "straggler";
    std::optional<std::size_t> n;  // confidence/energy threshold override
    nn::TrainConfig train;
    inversion::StopAtInversionOptions stop;
};

struct SweepOptions {
    CommonOptions common;
    DatasetOptions dataset;
    std::string direction = "remove_hard";
    experiments::BenchmarkConfig bench;
};

struct BenchmarkOptions {
    CommonOptions common;
    DatasetOptions dataset;
    experiments::BenchmarkConfig bench;
    int error_rate_runs = 25;
    bool with_overlap = true;
    bool with_error_rates = true;
};

struct ReportOptions {
    std::string in_dir;
    std::string out_dir;  // empty -> render next to the CSVs
};

// Flat key=value configuration file; '#' starts a comment line.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

// Applies file keys onto benchmark options; CLI flags override afterwards.
void apply_config(const std::map<std::string, std::string>& kv, BenchmarkOptions& options);

// Loads/synthesizes the working dataset and records input digests.
data::LabeledDataset resolve_dataset(const DatasetOptions& dataset, const CommonOptions& common,
                                     io::RunManifest& manifest);

int cmd_radii(const RadiiOptions& options);
int cmd_identify(const IdentifyOptions& options);
int cmd_sweep(const SweepOptions& options);
int cmd_benchmark(const BenchmarkOptions& options);
int cmd_report(const ReportOptions& options);

}  // namespace stragglers::cli
