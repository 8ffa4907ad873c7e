#include "stragglers/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "stragglers/errors.hpp"
#include "stragglers/geometry.hpp"
#include "stragglers/identifiers.hpp"
#include "stragglers/rng.hpp"

namespace stragglers::experiments {

namespace {

constexpr std::uint64_t kPlanTag = 0x706c616e;    // "plan"
constexpr std::uint64_t kTrainTag = 0x7472616e;   // "tran"
constexpr std::uint64_t kSetTag = 0x73747267;     // "strg"
constexpr std::uint64_t kScorerTag = 0x73636f72;  // "scor"
constexpr std::uint64_t kOverlapTag = 0x6f766c70; // "ovlp"
constexpr std::uint64_t kErrTag = 0x63657272;     // "cerr"

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::uint64_t fraction_bits(double f) { return std::bit_cast<std::uint64_t>(f); }

// Trains a fresh model on the view with seeds derived from job_seed.
nn::NetworkParams train_fresh(const data::DatasetView& view, const nn::TrainConfig& base,
                              std::uint64_t job_seed) {
    nn::TrainConfig config = base;
    config.seed = derive_seed(job_seed, {kTrainTag});
    auto params = nn::init_params(view.base->dim, view.base->num_classes, config.seed);
    nn::train(params, view, config);
    return params;
}

}  // namespace

double MetricBundle::metric(const std::string& name) const {
    if (name == "overall_accuracy") return overall_accuracy;
    if (name == "hard_accuracy") return hard_accuracy;
    if (name == "easy_accuracy") return easy_accuracy;
    if (name == "macro_precision") return macro_precision;
    if (name == "macro_recall") return macro_recall;
    if (name == "macro_f1") return macro_f1;
    throw Error("unknown metric '" + name + "'");
}

const std::vector<std::string>& MetricBundle::metric_names() {
    static const std::vector<std::string> names = {"overall_accuracy", "hard_accuracy",
                                                   "easy_accuracy",    "macro_precision",
                                                   "macro_recall",     "macro_f1"};
    return names;
}

bool ExperimentRecord::any_failed() const {
    return std::any_of(runs.begin(), runs.end(),
                       [](const RunMetrics& r) { return r.error.has_value(); });
}

MetricBundle evaluate_split(const nn::NetworkParams& params, const data::DatasetView& test_view,
                            const HardSampleSet& hard) {
    if (test_view.size() == 0) {
        throw EmptySet("evaluate_split requires a non-empty test view");
    }
    const int k = test_view.base->num_classes;
    std::vector<long long> tp(k, 0), fp(k, 0), fn(k, 0), class_total(k, 0);
    std::size_t correct = 0, hard_correct = 0, hard_total = 0, easy_correct = 0, easy_total = 0;

    for (std::size_t i = 0; i < test_view.size(); ++i) {
        const int label = test_view.label(i);
        const int pred = nn::predict(params, test_view.feature(i));
        const bool is_hard = hard.contains(test_view.id(i));
        class_total[label] += 1;
        if (is_hard) {
            hard_total += 1;
        } else {
            easy_total += 1;
        }
        if (pred == label) {
            correct += 1;
            tp[label] += 1;
            if (is_hard) hard_correct += 1; else easy_correct += 1;
        } else {
            fp[pred] += 1;
            fn[label] += 1;
        }
    }

    MetricBundle m;
    m.test_count = test_view.size();
    m.hard_test_count = hard_total;
    m.easy_test_count = easy_total;
    m.overall_accuracy = static_cast<double>(correct) / static_cast<double>(test_view.size());
    m.hard_accuracy = hard_total == 0
                          ? nan_value()
                          : static_cast<double>(hard_correct) / static_cast<double>(hard_total);
    m.easy_accuracy = easy_total == 0
                          ? nan_value()
                          : static_cast<double>(easy_correct) / static_cast<double>(easy_total);

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    m.per_class_accuracy.resize(k, 0.0);
    for (int c = 0; c < k; ++c) {
        const long long predicted = tp[c] + fp[c];
        const long long actual = tp[c] + fn[c];
        double precision = 0.0, recall = 0.0, f1 = 0.0;
        if (predicted > 0) {
            precision = static_cast<double>(tp[c]) / static_cast<double>(predicted);
        } else {
            m.zero_division_flagged = true;
        }
        if (actual > 0) {
            recall = static_cast<double>(tp[c]) / static_cast<double>(actual);
        } else {
            m.zero_division_flagged = true;
        }
        if (precision + recall > 0.0) {
            f1 = 2.0 * precision * recall / (precision + recall);
        } else {
            m.zero_division_flagged = true;
        }
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
        m.per_class_accuracy[c] =
            actual > 0 ? static_cast<double>(tp[c]) / static_cast<double>(actual) : nan_value();
    }
    m.macro_precision = precision_sum / k;
    m.macro_recall = recall_sum / k;
    m.macro_f1 = f1_sum / k;
    return m;
}

Aggregate mean_std(const std::vector<double>& values) {
    Aggregate agg;
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
    }
    agg.n = static_cast<int>(finite.size());
    if (finite.empty()) {
        agg.mean = nan_value();
        agg.stddev = nan_value();
        return agg;
    }
    agg.mean = std::accumulate(finite.begin(), finite.end(), 0.0) / finite.size();
    if (finite.size() > 1) {
        double ss = 0.0;
        for (double v : finite) ss += (v - agg.mean) * (v - agg.mean);
        agg.stddev = std::sqrt(ss / (finite.size() - 1));
    }
    return agg;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw SizeMismatch("pearson requires equally sized series");
    }
    if (xs.size() < 2) {
        throw Error("pearson requires at least two points");
    }
    const double n = static_cast<double>(xs.size());
    const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateVariance("pearson undefined for a constant series");
    }
    return sxy / std::sqrt(sxx * syy);
}

namespace {

// Average ranks, ties share the mean rank.
std::vector<double> ranks_of(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    return pearson(ranks_of(xs), ranks_of(ys));
}

std::vector<int> class_distribution(const HardSampleSet& hard) {
    const long long total =
        std::accumulate(hard.per_class_counts.begin(), hard.per_class_counts.end(), 0LL);
    if (total != static_cast<long long>(hard.ids.size())) {
        throw Error("per-class counts do not sum to the hard set size");
    }
    return hard.per_class_counts;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<HardSampleSet> build_straggler_sets(const data::LabeledDataset& dataset,
                                                const BenchmarkConfig& config) {
    std::vector<HardSampleSet> sets(static_cast<std::size_t>(config.straggler_sets));
    parallel_for(sets.size(), config.jobs, [&](std::size_t s) {
        nn::TrainConfig train = config.train;
        train.seed = derive_seed(config.master_seed, {kSetTag, s});
        const auto result = inversion::train_stop_at_inversion(dataset, train, config.stop_options);
        sets[s] = inversion::extract_stragglers(result, dataset);
    });
    return sets;
}

std::vector<HardSampleSet> build_hard_sets(const data::LabeledDataset& dataset,
                                           const BenchmarkConfig& config, IdentifierMethod method,
                                           const std::vector<HardSampleSet>& straggler_sets) {
    if (method == IdentifierMethod::straggler) {
        return straggler_sets;
    }
    std::vector<HardSampleSet> sets(straggler_sets.size());
    parallel_for(sets.size(), config.jobs, [&](std::size_t s) {
        const std::size_t n = straggler_sets[s].size();  // threshold matching
        const std::uint64_t job_seed = derive_seed(config.master_seed, {kScorerTag, s});
        if (method == IdentifierMethod::random_baseline) {
            sets[s] = identifiers::identify_random(dataset, n, job_seed);
            return;
        }
        nn::NetworkParams scorer;
        if (config.score_at_inversion) {
            nn::TrainConfig train = config.train;
            train.seed = job_seed;
            const auto result =
                inversion::train_stop_at_inversion(dataset, train, config.stop_options);
            // Latest per-class snapshot: score with the last class's freeze.
            int last_epoch = -1;
            for (std::size_t c = 0; c < result.snapshots.size(); ++c) {
                if (result.epochs[c].has_value() && *result.epochs[c] > last_epoch) {
                    last_epoch = *result.epochs[c];
                    scorer = *result.snapshots[c];
                }
            }
        } else {
            scorer = train_fresh(data::full_view(dataset), config.train, job_seed);
        }
        sets[s] = method == IdentifierMethod::confidence
                      ? identifiers::identify_by_confidence(scorer, dataset, n)
                      : identifiers::identify_by_energy(scorer, dataset, n);
    });
    return sets;
}

std::vector<ExperimentRecord> run_imbalance_sweep(const data::LabeledDataset& dataset,
                                                  const BenchmarkConfig& config,
                                                  data::RemovalGroup direction,
                                                  const std::vector<HardSampleSet>& hard_sets,
                                                  IdentifierMethod method) {
    if (hard_sets.empty()) {
        throw Error("run_imbalance_sweep needs at least one hard set");
    }
    const std::size_t n_ratios = config.ratio_grid.size();
    const std::size_t n_fracs = config.removal_grid.size();
    const std::size_t n_sets = hard_sets.size();
    const std::size_t n_inits = static_cast<std::size_t>(config.inits_per_set);
    if (n_ratios == 0 || n_fracs == 0 || n_inits == 0) {
        throw Error("benchmark grids must be non-empty");
    }

    std::vector<ExperimentRecord> records(n_ratios * n_fracs);
    for (std::size_t r = 0; r < n_ratios; ++r) {
        for (std::size_t f = 0; f < n_fracs; ++f) {
            auto& record = records[r * n_fracs + f];
            record.method = method;
            record.removal_group = direction;
            record.ratio_label = config.ratio_grid[r];
            record.removal_fraction = config.removal_grid[f];
            record.hard_train_fraction = data::parse_ratio_label(config.ratio_grid[r]);
            record.runs.resize(n_sets * n_inits);
        }
    }

    const std::size_t total_jobs = n_ratios * n_fracs * n_sets * n_inits;
    const std::uint64_t method_tag = static_cast<std::uint64_t>(method);

    parallel_for(total_jobs, config.jobs, [&](std::size_t job) {
        const std::size_t i = job % n_inits;
        const std::size_t s = (job / n_inits) % n_sets;
        const std::size_t f = (job / (n_inits * n_sets)) % n_fracs;
        const std::size_t r = job / (n_inits * n_sets * n_fracs);
        auto& record = records[r * n_fracs + f];
        auto& run = record.runs[s * n_inits + i];
        run.straggler_set_index = static_cast<int>(s);
        run.init_index = static_cast<int>(i);
        try {
            data::SplitPlan plan;
            plan.ratio_label = record.ratio_label;
            plan.hard_train_fraction = record.hard_train_fraction;
            plan.removal = {direction, record.removal_fraction};
            plan.seed = derive_seed(config.master_seed, {kPlanTag, method_tag, s, r});
            const auto split = data::materialize_split(dataset, plan, hard_sets[s]);

            const std::uint64_t job_seed = derive_seed(
                config.master_seed,
                {method_tag, s, i, r, fraction_bits(record.removal_fraction)});
            const auto params = train_fresh(split.train, config.train, job_seed);
            run.metrics = evaluate_split(params, split.test, hard_sets[s]);

            if (s == 0 && i == 0) {
                std::size_t hard_in_train = 0;
                for (std::int64_t id : split.train_ids) {
                    if (hard_sets[s].contains(id)) ++hard_in_train;
                }
                record.hard_in_train = hard_in_train;
                record.easy_in_train = split.train_ids.size() - hard_in_train;
                record.train_size = split.train_ids.size();
            }
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    });

    for (auto& record : records) {
        for (const auto& name : MetricBundle::metric_names()) {
            std::vector<double> values;
            values.reserve(record.runs.size());
            for (const auto& run : record.runs) {
                if (!run.error.has_value()) values.push_back(run.metrics.metric(name));
            }
            record.aggregates[name] = mean_std(values);
        }
    }
    return records;
}

namespace {

// Pooled per-run delta: mean easy minus mean hard accuracy over all grid
// points this (set, init) run touched, both directions combined.
std::vector<double> per_run_deltas(const IdentifierOutcome& outcome, std::size_t n_sets,
                                   std::size_t n_inits) {
    std::vector<double> easy_sum(n_sets * n_inits, 0.0), hard_sum(n_sets * n_inits, 0.0);
    std::vector<int> easy_n(n_sets * n_inits, 0), hard_n(n_sets * n_inits, 0);
    for (const auto* records : {&outcome.remove_hard, &outcome.remove_easy}) {
        for (const auto& record : *records) {
            for (std::size_t run_idx = 0; run_idx < record.runs.size(); ++run_idx) {
                const auto& run = record.runs[run_idx];
                if (run.error.has_value()) continue;
                if (std::isfinite(run.metrics.easy_accuracy)) {
                    easy_sum[run_idx] += run.metrics.easy_accuracy;
                    easy_n[run_idx] += 1;
                }
                if (std::isfinite(run.metrics.hard_accuracy)) {
                    hard_sum[run_idx] += run.metrics.hard_accuracy;
                    hard_n[run_idx] += 1;
                }
            }
        }
    }
    std::vector<double> deltas;
    for (std::size_t i = 0; i < easy_sum.size(); ++i) {
        if (easy_n[i] > 0 && hard_n[i] > 0) {
            deltas.push_back(easy_sum[i] / easy_n[i] - hard_sum[i] / hard_n[i]);
        }
    }
    return deltas;
}

}  // namespace

BenchmarkReport run_benchmark(const data::LabeledDataset& dataset, const BenchmarkConfig& config) {
    if (config.identifiers.empty()) {
        throw Error("benchmark requires at least one identifier");
    }
    const auto straggler_sets = build_straggler_sets(dataset, config);

    BenchmarkReport report;
    report.outcomes.reserve(config.identifiers.size());
    for (IdentifierMethod method : config.identifiers) {
        IdentifierOutcome outcome;
        outcome.method = method;
        outcome.hard_sets = build_hard_sets(dataset, config, method, straggler_sets);
        outcome.remove_hard = run_imbalance_sweep(dataset, config, data::RemovalGroup::hard,
                                                  outcome.hard_sets, method);
        outcome.remove_easy = run_imbalance_sweep(dataset, config, data::RemovalGroup::easy,
                                                  outcome.hard_sets, method);

        const auto deltas = per_run_deltas(outcome, outcome.hard_sets.size(),
                                           static_cast<std::size_t>(config.inits_per_set));
        const auto agg = mean_std(deltas);
        outcome.delta = agg.mean;
        outcome.delta_run_std = agg.stddev;
        report.outcomes.push_back(std::move(outcome));
    }

    std::vector<std::size_t> order(report.outcomes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.outcomes[a].delta > report.outcomes[b].delta;
    });
    for (std::size_t idx : order) {
        report.ranking.push_back(report.outcomes[idx].method);
    }
    return report;
}

std::vector<OverlapStat> overlap_matrix(const data::LabeledDataset& dataset,
                                        const BenchmarkConfig& config, int runs) {
    if (runs < 1) {
        throw Error("overlap matrix requires at least one run");
    }
    struct Triple {
        HardSampleSet straggler, confidence, energy;
    };
    std::vector<Triple> triples(static_cast<std::size_t>(runs));
    parallel_for(triples.size(), config.jobs, [&](std::size_t r) {
        nn::TrainConfig train = config.train;
        train.seed = derive_seed(config.master_seed, {kOverlapTag, r});
        const auto inv = inversion::train_stop_at_inversion(dataset, train, config.stop_options);
        triples[r].straggler = inversion::extract_stragglers(inv, dataset);
        const std::size_t n = triples[r].straggler.size();
        const auto scorer = train_fresh(data::full_view(dataset), config.train,
                                        derive_seed(config.master_seed, {kOverlapTag, r, 1}));
        triples[r].confidence = identifiers::identify_by_confidence(scorer, dataset, n);
        triples[r].energy = identifiers::identify_by_energy(scorer, dataset, n);
    });

    std::vector<double> ce, sc, se;
    for (const auto& t : triples) {
        ce.push_back(identifiers::overlap_pct(t.confidence, t.energy));
        sc.push_back(identifiers::overlap_pct(t.straggler, t.confidence));
        se.push_back(identifiers::overlap_pct(t.straggler, t.energy));
    }
    std::vector<OverlapStat> stats;
    const auto push = [&](IdentifierMethod a, IdentifierMethod b, const std::vector<double>& v) {
        const auto agg = mean_std(v);
        stats.push_back({a, b, agg.mean, agg.stddev, static_cast<int>(v.size())});
    };
    push(IdentifierMethod::confidence, IdentifierMethod::energy, ce);
    push(IdentifierMethod::straggler, IdentifierMethod::confidence, sc);
    push(IdentifierMethod::straggler, IdentifierMethod::energy, se);
    return stats;
}

std::vector<double> class_error_rates(const data::LabeledDataset& dataset,
                                      const BenchmarkConfig& config, int runs,
                                      const std::string& ratio_label) {
    if (runs < 2) {
        throw Error("class_error_rates requires at least two runs");
    }
    const int k = dataset.num_classes;
    std::vector<std::vector<double>> per_run(static_cast<std::size_t>(runs));
    HardSampleSet empty_hard;
    empty_hard.per_class_counts.assign(static_cast<std::size_t>(k), 0);

    parallel_for(per_run.size(), config.jobs, [&](std::size_t r) {
        data::SplitPlan plan;
        plan.ratio_label = ratio_label;
        plan.hard_train_fraction = 0.0;
        plan.seed = derive_seed(config.master_seed, {kErrTag, r, 0});
        const auto split = data::materialize_split(dataset, plan, empty_hard);
        const auto params = train_fresh(split.train, config.train,
                                        derive_seed(config.master_seed, {kErrTag, r, 1}));
        const auto metrics = evaluate_split(params, split.test, empty_hard);
        per_run[r].resize(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            const double acc = metrics.per_class_accuracy[static_cast<std::size_t>(c)];
            per_run[r][static_cast<std::size_t>(c)] = std::isfinite(acc) ? 1.0 - acc : nan_value();
        }
    });

    std::vector<double> means(static_cast<std::size_t>(k), 0.0);
    for (int c = 0; c < k; ++c) {
        std::vector<double> values;
        values.reserve(per_run.size());
        for (const auto& run : per_run) values.push_back(run[static_cast<std::size_t>(c)]);
        means[static_cast<std::size_t>(c)] = mean_std(values).mean;
    }
    return means;
}

}  // namespace stragglers::experiments
