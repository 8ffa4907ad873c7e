#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stragglers/experiments.hpp"
#include "stragglers/geometry.hpp"
#include "stragglers/hard_sample_set.hpp"
#include "stragglers/inversion.hpp"

namespace stragglers::io {

// FNV-1a 64-bit digest of a file's bytes, as 16 hex chars.
std::string fnv1a64_hex(const std::string& path);

std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

void write_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

// epoch, r2_class0..r2_class{k-1}
void write_radii_trace_csv(const geometry::RadiiTrace& trace, const std::string& path);
geometry::RadiiTrace read_radii_trace_csv(const std::string& path);

// epoch, mean loss; appends so repeated runs accumulate.
void append_loss_log_csv(const std::vector<double>& epoch_mean_loss, const std::string& path);

// {method, threshold, ids:[...], per_class_counts:{...}, source}
void save_hard_set_json(const HardSampleSet& set, const std::string& path);
HardSampleSet load_hard_set_json(const std::string& path);

// Manifest JSON (per-class epoch, attempt count, snapshot file references)
// plus one parameter snapshot file per class next to it.
void save_inversion_result(const inversion::InversionResult& result, const std::string& directory,
                           const std::string& basename);

// method, ratio, fraction, group_samples_in_train, metric, mean, std, n_runs
CsvTable records_table(const std::vector<experiments::ExperimentRecord>& records);

// method_a, method_b, mean_pct, std_pct, runs
CsvTable overlap_table(const std::vector<experiments::OverlapStat>& stats);

// method, class, count
CsvTable distribution_table(const std::vector<std::pair<std::string, std::vector<int>>>& rows);

// Reproducibility envelope written for every CLI run, including failures.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;  // fully resolved key=value
    std::string tool_version;
    std::uint64_t master_seed = 0;
    std::string started_at;
    std::string finished_at;
    std::map<std::string, std::string> input_digests;  // path -> fnv1a64
    std::vector<std::string> outputs;
    std::string status = "ok";
};

void save_manifest(const RunManifest& manifest, const std::string& path);

std::string iso8601_utc_now();

}  // namespace stragglers::io
