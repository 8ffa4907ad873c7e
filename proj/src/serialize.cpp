#include "stragglers/serialize.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stragglers/errors.hpp"
#include "stragglers/network.hpp"

namespace stragglers::io {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::trunc) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path, mode);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

}  // namespace

std::string fnv1a64_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path + " for digest");
    }
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buffer))) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error("CSV has no column '" + name + "'");
}

void write_csv(const CsvTable& table, const std::string& path) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << table.header[i];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    CsvTable table;
    std::string line;
    if (std::getline(in, line)) {
        table.header = split_line(line);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_line(line));
    }
    return table;
}

void write_radii_trace_csv(const geometry::RadiiTrace& trace, const std::string& path) {
    CsvTable table;
    const std::size_t k = trace.entries.empty() ? 0 : trace.entries.front().radii.size();
    table.header.push_back("epoch");
    for (std::size_t c = 0; c < k; ++c) {
        table.header.push_back("r2_class" + std::to_string(c));
    }
    for (const auto& entry : trace.entries) {
        std::vector<std::string> row{std::to_string(entry.epoch)};
        for (double r : entry.radii) row.push_back(format_double(r));
        table.rows.push_back(std::move(row));
    }
    write_csv(table, path);
}

geometry::RadiiTrace read_radii_trace_csv(const std::string& path) {
    const auto table = read_csv(path);
    geometry::RadiiTrace trace;
    for (const auto& row : table.rows) {
        geometry::RadiiTrace::Entry entry;
        entry.epoch = std::stoi(row.at(0));
        for (std::size_t i = 1; i < row.size(); ++i) {
            entry.radii.push_back(std::stod(row[i]));
        }
        trace.entries.push_back(std::move(entry));
    }
    return trace;
}

void append_loss_log_csv(const std::vector<double>& epoch_mean_loss, const std::string& path) {
    const bool fresh = !std::filesystem::exists(path);
    auto out = open_out(path, std::ios::app);
    if (fresh) {
        out << "epoch,mean_loss\n";
    }
    for (std::size_t i = 0; i < epoch_mean_loss.size(); ++i) {
        out << (i + 1) << "," << format_double(epoch_mean_loss[i]) << "\n";
    }
}

void save_hard_set_json(const HardSampleSet& set, const std::string& path) {
    nlohmann::json j;
    j["method"] = to_string(set.method);
    j["threshold"] = set.threshold;
    j["source"] = set.source;
    j["ids"] = set.ids;
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t c = 0; c < set.per_class_counts.size(); ++c) {
        counts[std::to_string(c)] = set.per_class_counts[c];
    }
    j["per_class_counts"] = counts;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

HardSampleSet load_hard_set_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    nlohmann::json j;
    in >> j;
    HardSampleSet set;
    set.method = identifier_method_from_string(j.at("method").get<std::string>());
    set.threshold = j.value("threshold", "");
    set.source = j.value("source", "");
    set.ids = j.at("ids").get<std::vector<std::int64_t>>();
    const auto& counts = j.at("per_class_counts");
    std::size_t k = 0;
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        k = std::max(k, static_cast<std::size_t>(std::stoul(it.key())) + 1);
    }
    set.per_class_counts.assign(k, 0);
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        set.per_class_counts[std::stoul(it.key())] = it.value().get<int>();
    }
    return set;
}

void save_inversion_result(const inversion::InversionResult& result, const std::string& directory,
                           const std::string& basename) {
    std::filesystem::create_directories(directory);
    nlohmann::json j;
    j["attempts"] = result.attempts;
    nlohmann::json classes = nlohmann::json::object();
    for (std::size_t c = 0; c < result.snapshots.size(); ++c) {
        nlohmann::json entry;
        if (result.epochs[c].has_value()) {
            const std::string snapshot_file = basename + "_class" + std::to_string(c) + ".params";
            entry["epoch"] = *result.epochs[c];
            entry["snapshot"] = snapshot_file;
            nn::save_params(*result.snapshots[c],
                            (std::filesystem::path(directory) / snapshot_file).string(),
                            result.trace.run_seed);
        } else {
            entry["epoch"] = nullptr;
        }
        classes[std::to_string(c)] = entry;
    }
    j["classes"] = classes;
    j["radii_period"] = result.trace.radii_period;
    j["burn_in"] = result.trace.burn_in;
    j["seed"] = result.trace.run_seed;
    auto out = open_out((std::filesystem::path(directory) / (basename + ".json")).string());
    out << j.dump(2) << "\n";
}

CsvTable records_table(const std::vector<experiments::ExperimentRecord>& records) {
    CsvTable table;
    table.header = {"method", "direction", "ratio",  "fraction", "group_in_train",
                    "metric", "mean",      "std",    "n_runs"};
    for (const auto& record : records) {
        const std::size_t group_in_train = record.removal_group == data::RemovalGroup::hard
                                               ? record.hard_in_train
                                               : record.easy_in_train;
        for (const auto& name : experiments::MetricBundle::metric_names()) {
            const auto& agg = record.aggregates.at(name);
            table.rows.push_back({to_string(record.method),
                                  record.removal_group == data::RemovalGroup::hard ? "remove_hard"
                                                                                   : "remove_easy",
                                  record.ratio_label, format_double(record.removal_fraction),
                                  std::to_string(group_in_train), name, format_double(agg.mean),
                                  format_double(agg.stddev), std::to_string(agg.n)});
        }
    }
    return table;
}

CsvTable overlap_table(const std::vector<experiments::OverlapStat>& stats) {
    CsvTable table;
    table.header = {"method_a", "method_b", "mean_pct", "std_pct", "runs"};
    for (const auto& stat : stats) {
        table.rows.push_back({to_string(stat.method_a), to_string(stat.method_b),
                              format_double(stat.mean_pct), format_double(stat.std_pct),
                              std::to_string(stat.runs)});
    }
    return table;
}

CsvTable distribution_table(const std::vector<std::pair<std::string, std::vector<int>>>& rows) {
    CsvTable table;
    table.header = {"method", "class", "count"};
    for (const auto& [method, counts] : rows) {
        for (std::size_t c = 0; c < counts.size(); ++c) {
            table.rows.push_back({method, std::to_string(c), std::to_string(counts[c])});
        }
    }
    return table;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config;
    j["tool_version"] = manifest.tool_version;
    j["master_seed"] = manifest.master_seed;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["input_digests"] = manifest.input_digests;
    j["outputs"] = manifest.outputs;
    j["status"] = manifest.status;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace stragglers::io
