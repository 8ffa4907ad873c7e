// Acceptance suite. Two tiers:
//   properties    : self-contained checks on synthetic data and oracles
//   reproduction  : desk-scale MNIST/FashionMNIST/KMNIST reproduction; needs
//                   the IDX files under --data-dir (or $STRAGGLERS_DATA_DIR)
// Prints one [PASS]/[FAIL]/[SKIP] line per criterion. Exit codes: 0 all run
// criteria passed, 1 any failed, 77 nothing could run (data missing).
//
// --dryrun swaps the reproduction datasets for tiny synthetic stand-ins and
// never gates; it only proves the machinery end to end.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stragglers/dataset.hpp"
#include "stragglers/errors.hpp"
#include "stragglers/experiments.hpp"
#include "stragglers/geometry.hpp"
#include "stragglers/identifiers.hpp"
#include "stragglers/inversion.hpp"
#include "stragglers/network.hpp"
#include "stragglers/rng.hpp"

using namespace stragglers;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

enum class Outcome { pass, fail, skip };

struct CriterionResult {
    Outcome outcome;
    std::string detail;
};

struct Tally {
    int passed = 0;
    int failed = 0;
    int skipped = 0;
};

void report(Tally& tally, int number, const std::string& name, const CriterionResult& result) {
    const char* label = result.outcome == Outcome::pass   ? "[PASS]"
                        : result.outcome == Outcome::fail ? "[FAIL]"
                                                          : "[SKIP]";
    std::cout << label << " criterion " << number << ": " << name;
    if (!result.detail.empty()) std::cout << " — " << result.detail;
    std::cout << "\n" << std::flush;
    switch (result.outcome) {
        case Outcome::pass: ++tally.passed; break;
        case Outcome::fail: ++tally.failed; break;
        case Outcome::skip: ++tally.skipped; break;
    }
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << std::fixed << v;
    return out.str();
}

std::string fmt_sci(double v) {
    std::ostringstream out;
    out.precision(2);
    out << std::scientific << v;
    return out.str();
}

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    return v ? std::atoi(v) : fallback;
}

// ---------------------------------------------------------------------------
// tier 1: property criteria
// ---------------------------------------------------------------------------

// Literal Appendix-A double sum, kept independent of the library path.
double pairwise_double_sum(const std::vector<std::vector<double>>& points) {
    const double n = static_cast<double>(points.size());
    double total = 0.0;
    for (const auto& a : points) {
        for (const auto& b : points) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                const double d = a[j] - b[j];
                d2 += d * d;
            }
            total += d2;
        }
    }
    return total / (2.0 * n * n);
}

CriterionResult criterion1_gyration_equivalence() {
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.next_below(200);
        const std::size_t dim = 1 + rng.next_below(50);
        std::vector<std::vector<double>> points(n, std::vector<double>(dim));
        for (auto& p : points) {
            for (double& v : p) v = rng.normal(rng.uniform(-3.0, 3.0), 2.0);
        }
        const double centroid_form = geometry::gyration_radius_sq(points);
        const double reference = pairwise_double_sum(points);
        const double rel = std::abs(centroid_form - reference) / std::max(1.0, std::abs(reference));
        worst = std::max(worst, rel);
    }
    return {worst <= 1e-9 ? Outcome::pass : Outcome::fail,
            "max relative deviation " + fmt_sci(worst) + " over 100 clouds (tolerance 1e-9)"};
}

CriterionResult criterion2_gradient_oracle() {
    const auto ds = data::make_synthetic(40, 0.3, 202);
    const auto view = data::full_view(ds);
    Rng rng(203);
    double worst = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
        auto params = nn::init_params(ds.dim, ds.num_classes, 300 + pair);
        for (double& v : params.w1) v *= 3.0;
        for (double& v : params.b1) v = rng.uniform(-0.1, 0.1);
        for (double& v : params.b2) v = rng.uniform(-0.1, 0.1);
        std::vector<std::size_t> batch;
        for (int i = 0; i < 5; ++i) batch.push_back(rng.next_below(view.size()));

        nn::Gradients analytic;
        nn::loss_and_grads(params, view, batch, analytic);

        nn::Gradients scratch;
        const double h = 1e-5;
        auto probe_tensor = [&](std::vector<double>& theta, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double saved = theta[i];
                theta[i] = saved + h;
                const double up = nn::loss_and_grads(params, view, batch, scratch);
                theta[i] = saved - h;
                const double down = nn::loss_and_grads(params, view, batch, scratch);
                theta[i] = saved;
                const double fd = (up - down) / (2.0 * h);
                const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
                worst = std::max(worst, std::abs(fd - grad[i]) / scale);
            }
        };
        probe_tensor(params.w1, analytic.w1);
        probe_tensor(params.b1, analytic.b1);
        probe_tensor(params.w2, analytic.w2);
        probe_tensor(params.b2, analytic.b2);
        probe_tensor(params.w3, analytic.w3);
        probe_tensor(params.b3, analytic.b3);
    }
    return {worst <= 1e-4 ? Outcome::pass : Outcome::fail,
            "max relative error " + fmt_sci(worst) + " over 20 (params, batch) pairs (tolerance 1e-4)"};
}

CriterionResult criterion3_inversion_detector() {
    Rng rng(404);
    int agreements = 0;
    constexpr int kTrials = 1000;
    for (int trial = 0; trial < kTrials; ++trial) {
        const int period = 1 + static_cast<int>(rng.next_below(9));
        const int start = 21 + static_cast<int>(rng.next_below(50));
        const std::size_t length = 3 + rng.next_below(60);
        const std::size_t pivot = rng.next_below(length - 1);

        std::vector<std::pair<int, double>> series;
        double value = rng.uniform(10.0, 200.0);
        for (std::size_t i = 0; i < length; ++i) {
            series.emplace_back(start + period * static_cast<int>(i), value);
            value += (i < pivot ? -1.0 : 1.0) * rng.uniform(0.01, 5.0);
        }
        std::size_t argmin = 0;
        for (std::size_t i = 1; i < series.size(); ++i) {
            if (series[i].second < series[argmin].second) argmin = i;
        }
        const auto detected = inversion::detect_first_rise(series);
        if (detected.has_value() && *detected == series[argmin].first + period) ++agreements;
    }
    return {agreements == kTrials ? Outcome::pass : Outcome::fail,
            std::to_string(agreements) + "/" + std::to_string(kTrials) +
                " series agree with the argmin-plus-one-period oracle"};
}

CriterionResult criterion4_identifier_contracts() {
    const auto ds = data::make_synthetic(150, 0.3, 505);
    const auto params = nn::init_params(ds.dim, ds.num_classes, 506);
    Rng rng(507);

    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = rng.next_below(ds.size());
        const auto conf = identifiers::identify_by_confidence(params, ds, n);
        const auto ener = identifiers::identify_by_energy(params, ds, n);
        if (conf.ids.size() != n || ener.ids.size() != n) {
            return {Outcome::fail, "threshold-matched set size mismatch at n=" + std::to_string(n)};
        }
        const auto conf_next = identifiers::identify_by_confidence(params, ds, n + 1);
        const auto ener_next = identifiers::identify_by_energy(params, ds, n + 1);
        if (!std::includes(conf_next.ids.begin(), conf_next.ids.end(), conf.ids.begin(),
                           conf.ids.end()) ||
            !std::includes(ener_next.ids.begin(), ener_next.ids.end(), ener.ids.begin(),
                           ener.ids.end())) {
            return {Outcome::fail, "nested-threshold monotonicity broken at n=" + std::to_string(n)};
        }
    }

    const auto permuted = data::take_subset(ds, ds.size(), 508, /*renormalize=*/false);
    for (const std::size_t n : {std::size_t{1}, std::size_t{40}, std::size_t{299}}) {
        if (identifiers::identify_by_confidence(params, ds, n).ids !=
                identifiers::identify_by_confidence(params, permuted, n).ids ||
            identifiers::identify_by_energy(params, ds, n).ids !=
                identifiers::identify_by_energy(params, permuted, n).ids) {
            return {Outcome::fail, "storage-order permutation changed a selection at n=" +
                                       std::to_string(n)};
        }
    }
    return {Outcome::pass, "sizes exact, thresholds nest over 50 random n, order-invariant"};
}

CriterionResult criterion5_split_and_decomposition() {
    const auto ds = data::make_synthetic(120, 0.25, 606);
    const auto params_pool = nn::init_params(ds.dim, ds.num_classes, 607);
    Rng rng(608);
    const std::vector<std::string> ratios = {"80:20", "75:25", "70:30", "60:40", "50:50"};

    HardSampleSet truth;
    truth.ids = ds.provenance.ground_truth_hard;
    truth.per_class_counts.assign(2, 0);
    for (auto id : truth.ids) truth.per_class_counts[ds.labels[ds.row_of(id)]] += 1;

    int checked = 0;
    while (checked < 100) {
        data::SplitPlan plan;
        plan.ratio_label = ratios[rng.next_below(ratios.size())];
        plan.hard_train_fraction = rng.next_unit();
        plan.removal.group =
            rng.next_below(2) == 0 ? data::RemovalGroup::hard : data::RemovalGroup::easy;
        plan.removal.fraction = rng.next_unit();
        plan.seed = rng.next_u64();

        data::Split split;
        try {
            split = data::materialize_split(ds, plan, truth);
        } catch (const InfeasiblePlan&) {
            continue;  // quota not satisfiable for this draw
        }
        ++checked;
        if (split.train_ids.size() + split.test_ids.size() + split.removed_ids.size() !=
            ds.size()) {
            return {Outcome::fail, "conservation violated for a random plan"};
        }
        if (split.test.size() == 0) continue;
        const auto m = experiments::evaluate_split(params_pool, split.test, truth);
        double weighted = 0.0;
        if (m.hard_test_count > 0) weighted += m.hard_accuracy * m.hard_test_count;
        if (m.easy_test_count > 0) weighted += m.easy_accuracy * m.easy_test_count;
        weighted /= static_cast<double>(m.test_count);
        if (std::abs(weighted - m.overall_accuracy) > 1e-12) {
            return {Outcome::fail, "accuracy decomposition off by " +
                                       fmt_sci(std::abs(weighted - m.overall_accuracy))};
        }
    }
    return {Outcome::pass, "conservation and decomposition hold over 100 random plans (1e-12)"};
}

CriterionResult criterion6_synthetic_end_to_end() {
    const auto ds = data::make_synthetic(250, 0.2, 709);
    nn::TrainConfig config;
    config.epochs = 400;
    config.seed = 710;
    inversion::StopAtInversionOptions options;
    options.radii_period = 5;

    const auto result = inversion::train_stop_at_inversion(ds, config, options);
    const auto stragglers_set = inversion::extract_stragglers(result, ds);
    if (stragglers_set.ids.empty()) {
        return {Outcome::fail, "straggler set is empty"};
    }

    const auto& truth = ds.provenance.ground_truth_hard;
    std::vector<std::int64_t> common;
    std::set_intersection(stragglers_set.ids.begin(), stragglers_set.ids.end(), truth.begin(),
                          truth.end(), std::back_inserter(common));
    // Hypergeometric expectation of |S ∩ H| for a random same-size set.
    const double expected_random = static_cast<double>(stragglers_set.size()) *
                                   static_cast<double>(truth.size()) /
                                   static_cast<double>(ds.size());
    const double ratio = static_cast<double>(common.size()) / expected_random;
    return {ratio >= 3.0 ? Outcome::pass : Outcome::fail,
            "|S∩H|=" + std::to_string(common.size()) + ", random expectation " +
                fmt(expected_random, 2) + ", enrichment " + fmt(ratio, 2) + "x (needs >= 3x)"};
}

// ---------------------------------------------------------------------------
// tier 2: desk-scale reproduction
// ---------------------------------------------------------------------------

struct Budget {
    int epochs = 500;
    int benchmark_sets = 3;
    int benchmark_inits = 3;
    int overlap_runs = 15;
    int error_rate_runs = 25;
    std::size_t subset_size = 20000;
    int jobs = 2;
    bool dryrun = false;
};

class ReproContext {
public:
    ReproContext(std::string data_dir, Budget budget)
        : data_dir_(std::move(data_dir)), budget_(budget) {}

    const Budget& budget() const { return budget_; }

    // nullopt when the four IDX files for the tag are not on disk.
    std::optional<std::string> missing_file(const std::string& tag) const {
        if (budget_.dryrun) return std::nullopt;
        const fs::path dir = fs::path(data_dir_) / tag;
        for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                                 "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}) {
            if (!fs::exists(dir / name)) return (dir / name).string();
        }
        return std::nullopt;
    }

    const data::LabeledDataset& full(const std::string& tag) {
        auto it = datasets_.find(tag);
        if (it != datasets_.end()) return it->second;
        if (budget_.dryrun) {
            auto ds = data::make_synthetic(400, 0.15, 42);
            ds.provenance.source = tag + "-dryrun";
            return datasets_.emplace(tag, std::move(ds)).first->second;
        }
        const fs::path dir = fs::path(data_dir_) / tag;
        const auto train = data::load_idx((dir / "train-images-idx3-ubyte").string(),
                                          (dir / "train-labels-idx1-ubyte").string());
        const auto test = data::load_idx((dir / "t10k-images-idx3-ubyte").string(),
                                         (dir / "t10k-labels-idx1-ubyte").string());
        auto ds = data::combine_shuffle_normalize(train, test, 7001);
        ds.provenance.source = tag;
        return datasets_.emplace(tag, std::move(ds)).first->second;
    }

    const data::LabeledDataset& subset20k(const std::string& tag) {
        const std::string key = tag + "-20k";
        auto it = datasets_.find(key);
        if (it != datasets_.end()) return it->second;
        const auto& parent = full(tag);
        const std::size_t n = std::min(budget_.subset_size, parent.size());
        auto ds = data::take_subset(parent, n, 7002);
        ds.provenance.source = key;
        return datasets_.emplace(key, std::move(ds)).first->second;
    }

    const HardSampleSet& straggler_set(const std::string& tag) {
        auto it = straggler_sets_.find(tag);
        if (it != straggler_sets_.end()) return it->second;
        const auto& ds = full(tag);
        nn::TrainConfig config = train_config();
        config.seed = derive_seed(7003, {std::hash<std::string>{}(tag)});
        inversion::StopAtInversionOptions options;
        options.radii_period = 5;
        const auto result = inversion::train_stop_at_inversion(ds, config, options);
        return straggler_sets_.emplace(tag, inversion::extract_stragglers(result, ds))
            .first->second;
    }

    nn::TrainConfig train_config() const {
        nn::TrainConfig config;
        config.epochs = budget_.epochs;
        return config;
    }

    experiments::BenchmarkConfig benchmark_config() const {
        experiments::BenchmarkConfig config;
        config.train = train_config();
        config.straggler_sets = budget_.benchmark_sets;
        config.inits_per_set = budget_.benchmark_inits;
        config.stop_options.radii_period = 5;
        config.master_seed = 7010;
        config.jobs = budget_.jobs;
        return config;
    }

private:
    std::string data_dir_;
    Budget budget_;
    std::map<std::string, data::LabeledDataset> datasets_;
    std::map<std::string, HardSampleSet> straggler_sets_;
};

constexpr const char* kAllTags[] = {"mnist", "fashionmnist", "kmnist"};

CriterionResult criterion7_straggler_counts(ReproContext& ctx) {
    std::string detail;
    bool ok = true;
    for (const auto* tag : kAllTags) {
        const auto& set = ctx.straggler_set(tag);
        const double n = static_cast<double>(ctx.full(tag).size());
        const double count = static_cast<double>(set.size());
        if (!detail.empty()) detail += "; ";
        if (std::string(tag) == "mnist") {
            const bool in_band = count >= 4000.0 && count <= 6500.0;
            ok = ok && in_band;
            detail += std::string(tag) + " count=" + std::to_string(set.size()) +
                      " (band [4000, 6500])";
        } else {
            const double ratio = (n - count) / count;  // non-straggler : straggler
            const bool in_band = ratio >= 4.0 && ratio <= 9.0;
            ok = ok && in_band;
            detail += std::string(tag) + " 1:" + fmt(ratio, 1) + " (band 1:4..1:9)";
        }
    }
    return {ok ? Outcome::pass : Outcome::fail, detail};
}

// One split is shared by criteria 8 and 9: full MNIST at 80:20 with hard
// samples placed proportionally.
data::Split group_split(ReproContext& ctx, double removal_fraction, data::RemovalGroup group) {
    data::SplitPlan plan;
    plan.ratio_label = "80:20";
    plan.hard_train_fraction = 0.8;
    plan.removal = {group, removal_fraction};
    plan.seed = 7020;
    return data::materialize_split(ctx.full("mnist"), plan, ctx.straggler_set("mnist"));
}

experiments::MetricBundle train_and_eval(ReproContext& ctx, const data::Split& split,
                                         std::uint64_t seed) {
    nn::TrainConfig config = ctx.train_config();
    config.seed = seed;
    auto params = nn::init_params(split.train.base->dim, split.train.base->num_classes, seed);
    nn::train(params, split.train, config);
    return experiments::evaluate_split(params, split.test, ctx.straggler_set("mnist"));
}

CriterionResult criterion8_exclusive_group_training(ReproContext& ctx) {
    const auto hard_only = group_split(ctx, 1.0, data::RemovalGroup::easy);
    const auto on_hard = train_and_eval(ctx, hard_only, 7021);
    const auto easy_only = group_split(ctx, 1.0, data::RemovalGroup::hard);
    const auto on_easy = train_and_eval(ctx, easy_only, 7022);

    const bool easy_band = on_hard.easy_accuracy >= 0.40 && on_hard.easy_accuracy <= 0.70;
    const bool hard_band = on_easy.hard_accuracy >= 0.10 && on_easy.hard_accuracy <= 0.30;
    return {easy_band && hard_band ? Outcome::pass : Outcome::fail,
            "train-on-hard easy-acc " + fmt(on_hard.easy_accuracy) +
                " (band [0.40, 0.70]); train-on-easy hard-acc " + fmt(on_easy.hard_accuracy) +
                " (band [0.10, 0.30])"};
}

CriterionResult criterion9_asymptotic_gap(ReproContext& ctx) {
    const auto split = group_split(ctx, 0.0, data::RemovalGroup::hard);
    const auto metrics = train_and_eval(ctx, split, 7023);
    const bool ok = metrics.easy_accuracy >= 0.95 && metrics.hard_accuracy <= 0.35;
    return {ok ? Outcome::pass : Outcome::fail,
            "full-train easy-acc " + fmt(metrics.easy_accuracy) + " (needs >= 0.95), hard-acc " +
                fmt(metrics.hard_accuracy) + " (needs <= 0.35)"};
}

CriterionResult criterion10_overlap_matrix(ReproContext& ctx) {
    const auto& ds = ctx.subset20k("mnist");
    auto config = ctx.benchmark_config();
    const auto stats = experiments::overlap_matrix(ds, config, ctx.budget().overlap_runs);

    double ce = 0.0, sc = 0.0, se = 0.0;
    for (const auto& stat : stats) {
        if (stat.method_a == IdentifierMethod::confidence &&
            stat.method_b == IdentifierMethod::energy) {
            ce = stat.mean_pct;
        } else if (stat.method_b == IdentifierMethod::confidence) {
            sc = stat.mean_pct;
        } else {
            se = stat.mean_pct;
        }
    }
    const bool ok = ce >= 75.0 && (ce - sc) >= 20.0 && (ce - se) >= 20.0;
    return {ok ? Outcome::pass : Outcome::fail,
            "confidence-energy " + fmt(ce, 2) + "% (needs >= 75), straggler-confidence " +
                fmt(sc, 2) + "%, straggler-energy " + fmt(se, 2) +
                "% (each needs >= 20 points below confidence-energy)"};
}

CriterionResult criterion11_pearson(ReproContext& ctx) {
    std::string detail;
    bool ok = true;
    for (const auto* tag : kAllTags) {
        const auto& ds = ctx.full(tag);
        const auto& set = ctx.straggler_set(tag);
        auto config = ctx.benchmark_config();
        config.master_seed = 7030;
        const auto error_rates =
            experiments::class_error_rates(ds, config, ctx.budget().error_rate_runs, "6:1");
        std::vector<double> counts;
        for (int c : set.per_class_counts) counts.push_back(static_cast<double>(c));
        if (!detail.empty()) detail += "; ";
        try {
            const double r = experiments::pearson(error_rates, counts);
            ok = ok && r >= 0.85;
            detail += std::string(tag) + " r=" + fmt(r) + " (needs >= 0.85)";
        } catch (const DegenerateVariance&) {
            ok = false;
            detail += std::string(tag) + " r undefined (constant series)";
        }
    }
    return {ok ? Outcome::pass : Outcome::fail, detail};
}

struct BenchmarkArtifacts {
    experiments::BenchmarkReport report;
    std::map<IdentifierMethod, double> deltas;
    std::map<IdentifierMethod, double> delta_stds;
};

BenchmarkArtifacts run_acceptance_benchmark(ReproContext& ctx) {
    const auto& ds = ctx.subset20k("mnist");
    auto config = ctx.benchmark_config();
    config.ratio_grid = {"80:20"};
    config.removal_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    config.identifiers = {IdentifierMethod::straggler, IdentifierMethod::confidence,
                          IdentifierMethod::energy, IdentifierMethod::random_baseline};
    BenchmarkArtifacts artifacts;
    artifacts.report = experiments::run_benchmark(ds, config);
    for (const auto& outcome : artifacts.report.outcomes) {
        artifacts.deltas[outcome.method] = outcome.delta;
        artifacts.delta_stds[outcome.method] = outcome.delta_run_std;
    }
    return artifacts;
}

CriterionResult criterion12_benchmark_ranking(ReproContext& ctx, BenchmarkArtifacts& artifacts) {
    const double straggler = artifacts.deltas.at(IdentifierMethod::straggler);
    const double conf = artifacts.deltas.at(IdentifierMethod::confidence);
    const double energy = artifacts.deltas.at(IdentifierMethod::energy);
    const double random_delta = artifacts.deltas.at(IdentifierMethod::random_baseline);
    const double random_std = artifacts.delta_stds.at(IdentifierMethod::random_baseline);

    const bool sharper = straggler > conf && straggler > energy;
    const bool random_null = std::abs(random_delta) < 2.0 * random_std;
    (void)ctx;
    return {sharper && random_null ? Outcome::pass : Outcome::fail,
            "delta: straggler " + fmt(straggler) + ", confidence " + fmt(conf) + ", energy " +
                fmt(energy) + " (straggler must exceed both); random " + fmt(random_delta) +
                " vs 2*std " + fmt(2.0 * random_std)};
}

CriterionResult criterion13_trends(ReproContext& ctx, BenchmarkArtifacts& artifacts) {
    const auto& ds = ctx.subset20k("mnist");
    auto config = ctx.benchmark_config();
    config.ratio_grid = {"80:20", "70:30", "60:40"};
    config.removal_grid = {0.0, 0.25, 0.5, 0.75, 1.0};

    const HardSampleSet* straggler_sets = nullptr;
    for (const auto& outcome : artifacts.report.outcomes) {
        if (outcome.method == IdentifierMethod::straggler) {
            straggler_sets = outcome.hard_sets.data();
            break;
        }
    }
    std::vector<HardSampleSet> sets(straggler_sets,
                                    straggler_sets + ctx.budget().benchmark_sets);
    const auto records = experiments::run_imbalance_sweep(ds, config, data::RemovalGroup::hard,
                                                          sets, IdentifierMethod::straggler);

    // Spearman of hard-fraction-kept-in-train against mean hard accuracy
    // across the whole (ratio x fraction) grid.
    std::vector<double> kept_fraction, hard_acc;
    for (const auto& record : records) {
        const auto& agg = record.aggregates.at("hard_accuracy");
        if (agg.n == 0 || !std::isfinite(agg.mean)) continue;
        kept_fraction.push_back(1.0 - record.removal_fraction);
        hard_acc.push_back(agg.mean);
    }
    const double rho = experiments::spearman(kept_fraction, hard_acc);

    // Ratio insensitivity: at fixed fraction, group-accuracy means across
    // ratios stay within 2 pooled run stds.
    double worst_shift_in_stds = 0.0;
    for (double fraction : config.removal_grid) {
        for (const std::string metric : {"hard_accuracy", "easy_accuracy"}) {
            std::vector<double> means, stds;
            for (const auto& record : records) {
                if (record.removal_fraction != fraction) continue;
                const auto& agg = record.aggregates.at(metric);
                if (agg.n < 2 || !std::isfinite(agg.mean)) continue;
                means.push_back(agg.mean);
                stds.push_back(agg.stddev);
            }
            if (means.size() < 2) continue;
            const double spread =
                *std::max_element(means.begin(), means.end()) -
                *std::min_element(means.begin(), means.end());
            double pooled = 0.0;
            for (double s : stds) pooled += s * s;
            pooled = std::sqrt(pooled / static_cast<double>(stds.size()));
            if (pooled > 0.0) {
                worst_shift_in_stds = std::max(worst_shift_in_stds, spread / pooled);
            }
        }
    }

    const bool ok = rho >= 0.8 && worst_shift_in_stds < 2.0;
    return {ok ? Outcome::pass : Outcome::fail,
            "spearman(hard kept, hard acc) " + fmt(rho) +
                " (needs >= 0.8); worst ratio shift " + fmt(worst_shift_in_stds, 2) +
                " pooled stds (needs < 2)"};
}

// ---------------------------------------------------------------------------

int run_properties(Tally& tally) {
    report(tally, 1, "gyration radius centroid form vs double sum", criterion1_gyration_equivalence());
    report(tally, 2, "backprop vs central finite differences", criterion2_gradient_oracle());
    report(tally, 3, "first-rise detector vs argmin oracle", criterion3_inversion_detector());
    report(tally, 4, "identifier threshold contracts", criterion4_identifier_contracts());
    report(tally, 5, "split conservation and accuracy decomposition", criterion5_split_and_decomposition());
    report(tally, 6, "synthetic end-to-end straggler enrichment", criterion6_synthetic_end_to_end());
    return tally.failed == 0 ? 0 : 1;
}

int run_reproduction(Tally& tally, const std::string& data_dir, Budget budget) {
    ReproContext ctx(data_dir, budget);

    auto gated = [&](const std::vector<std::string>& tags,
                     const std::function<CriterionResult()>& fn) -> CriterionResult {
        for (const auto& tag : tags) {
            if (const auto missing = ctx.missing_file(tag)) {
                return {Outcome::skip, "dataset file missing: " + *missing +
                                           " (fetch with scripts/fetch_data.sh)"};
            }
        }
        try {
            auto result = fn();
            if (budget.dryrun && result.outcome != Outcome::skip) {
                result.detail = "[dryrun, not gated] " + result.detail;
                result.outcome = Outcome::pass;
            }
            return result;
        } catch (const std::exception& e) {
            return {Outcome::fail, std::string("exception: ") + e.what()};
        }
    };

    report(tally, 7, "straggler counts per dataset",
           gated({"mnist", "fashionmnist", "kmnist"}, [&] { return criterion7_straggler_counts(ctx); }));
    report(tally, 8, "exclusive-group training bands (MNIST)",
           gated({"mnist"}, [&] { return criterion8_exclusive_group_training(ctx); }));
    report(tally, 9, "asymptotic easy/hard gap (MNIST)",
           gated({"mnist"}, [&] { return criterion9_asymptotic_gap(ctx); }));
    report(tally, 10, "identifier overlap matrix (MNIST 20k)",
           gated({"mnist"}, [&] { return criterion10_overlap_matrix(ctx); }));
    report(tally, 11, "class error rate vs straggler count correlation",
           gated({"mnist", "fashionmnist", "kmnist"}, [&] { return criterion11_pearson(ctx); }));

    // criteria 12 and 13 share one benchmark run
    std::optional<BenchmarkArtifacts> artifacts;
    auto ensure_benchmark = [&]() -> BenchmarkArtifacts& {
        if (!artifacts.has_value()) artifacts = run_acceptance_benchmark(ctx);
        return *artifacts;
    };
    report(tally, 12, "benchmark delta ranking (MNIST 20k)",
           gated({"mnist"}, [&] { return criterion12_benchmark_ranking(ctx, ensure_benchmark()); }));
    report(tally, 13, "removal-grid trend and ratio insensitivity",
           gated({"mnist"}, [&] { return criterion13_trends(ctx, ensure_benchmark()); }));

    if (tally.failed > 0) return 1;
    if (tally.passed == 0 && tally.skipped > 0) return 77;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::string tier = "all";
    std::string data_dir;
    Budget budget;
    budget.jobs = std::max(1u, std::thread::hardware_concurrency());

    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--tier" && i + 1 < argc) {
            tier = argv[++i];
        } else if (arg == "--data-dir" && i + 1 < argc) {
            data_dir = argv[++i];
        } else if (arg == "--jobs" && i + 1 < argc) {
            budget.jobs = std::atoi(argv[++i]);
        } else if (arg == "--dryrun") {
            budget.dryrun = true;
        } else {
            std::cerr << "usage: acceptance [--tier properties|reproduction|all] [--data-dir DIR]"
                         " [--jobs N] [--dryrun]\n";
            return 1;
        }
    }
    if (data_dir.empty()) {
        const char* env = std::getenv("STRAGGLERS_DATA_DIR");
        if (env) data_dir = env;
    }
    if (budget.dryrun) {
        budget.epochs = env_int("STRAGGLERS_ACCEPT_EPOCHS", 400);
        budget.benchmark_sets = 1;
        budget.benchmark_inits = 1;
        budget.overlap_runs = 2;
        budget.error_rate_runs = 2;
        budget.subset_size = 300;
    } else {
        budget.epochs = env_int("STRAGGLERS_ACCEPT_EPOCHS", budget.epochs);
        budget.benchmark_sets = env_int("STRAGGLERS_ACCEPT_SETS", budget.benchmark_sets);
        budget.benchmark_inits = env_int("STRAGGLERS_ACCEPT_INITS", budget.benchmark_inits);
        budget.overlap_runs = env_int("STRAGGLERS_ACCEPT_OVERLAP_RUNS", budget.overlap_runs);
        budget.error_rate_runs = env_int("STRAGGLERS_ACCEPT_ERROR_RUNS", budget.error_rate_runs);
    }

    Tally tally;
    int code = 0;
    if (tier == "properties" || tier == "all") {
        code = std::max(code, run_properties(tally));
    }
    if (tier == "reproduction" || tier == "all") {
        Tally repro_tally;
        const int repro_code = run_reproduction(repro_tally, data_dir, budget);
        tally.passed += repro_tally.passed;
        tally.failed += repro_tally.failed;
        tally.skipped += repro_tally.skipped;
        if (tier == "reproduction") {
            code = repro_code;
        } else if (repro_code == 1) {
            code = 1;
        }
    }
    std::cout << tally.passed << " passed, " << tally.failed << " failed, " << tally.skipped
              << " skipped\n";
    return code;
}
