#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "stragglers/dataset.hpp"
#include "stragglers/errors.hpp"
#include "stragglers/inversion.hpp"
#include "stragglers/rng.hpp"

using namespace stragglers;

TEST_CASE("detect_first_rise finds the first strict increase") {
    const std::vector<std::pair<int, double>> series = {
        {25, 10.0}, {30, 9.0}, {35, 8.0}, {40, 7.0}, {45, 8.0}};
    const auto epoch = inversion::detect_first_rise(series);
    REQUIRE(epoch.has_value());
    CHECK(*epoch == 45);
}

TEST_CASE("detect_first_rise is absent for monotone nonincreasing series") {
    CHECK_FALSE(inversion::detect_first_rise({{5, 3.0}, {10, 2.0}, {15, 1.0}}).has_value());
    CHECK_FALSE(inversion::detect_first_rise({{5, 3.0}, {10, 3.0}, {15, 3.0}}).has_value());
    CHECK_FALSE(inversion::detect_first_rise({{5, 3.0}}).has_value());
    CHECK_FALSE(inversion::detect_first_rise({}).has_value());
}

TEST_CASE("detect_first_rise equals the argmin-plus-one-period oracle on V-shaped series") {
    Rng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int period = 1 + static_cast<int>(rng.next_below(7));
        const int start = 21 + static_cast<int>(rng.next_below(30));
        const std::size_t length = 3 + rng.next_below(40);
        const std::size_t pivot = rng.next_below(length - 1);  // rise must exist

        std::vector<std::pair<int, double>> series;
        double value = rng.uniform(50.0, 100.0);
        for (std::size_t i = 0; i < length; ++i) {
            series.emplace_back(start + period * static_cast<int>(i), value);
            value += (i < pivot ? -1.0 : 1.0) * rng.uniform(0.1, 3.0);
        }

        std::size_t argmin = 0;
        for (std::size_t i = 1; i < series.size(); ++i) {
            if (series[i].second < series[argmin].second) argmin = i;
        }
        const auto detected = inversion::detect_first_rise(series);
        REQUIRE(detected.has_value());
        CHECK(*detected == series[argmin + 1].first);
    }
}

TEST_CASE("record_radii_trace covers every epoch past the burn-in") {
    const auto ds = data::make_synthetic(30, 0.2, 3);
    nn::TrainConfig config;
    config.epochs = 25;
    config.burn_in_epochs = 20;
    config.radii_period = 1;
    config.seed = 1;
    const auto trace = inversion::record_radii_trace(ds, config);
    REQUIRE(trace.entries.size() == 5);
    CHECK(trace.entries.front().epoch == 21);
    CHECK(trace.entries.back().epoch == 25);
    for (const auto& entry : trace.entries) {
        REQUIRE(entry.radii.size() == 2);
        CHECK(entry.radii[0] >= 0.0);
        CHECK(entry.radii[1] >= 0.0);
    }
}

TEST_CASE("record_radii_trace with compute_radii off trains but records nothing") {
    const auto ds = data::make_synthetic(30, 0.2, 3);
    nn::TrainConfig config;
    config.epochs = 25;
    config.seed = 1;
    const auto trace = inversion::record_radii_trace(ds, config, /*compute_radii=*/false);
    CHECK(trace.entries.empty());
}

TEST_CASE("a class with forced monotone radii triggers restarts and then a hard error") {
    const auto ds = data::make_synthetic(20, 0.0, 9);
    nn::TrainConfig config;
    config.epochs = 40;
    config.seed = 12;

    int calls = 0;
    inversion::StopAtInversionOptions options;
    options.max_attempts = 2;
    options.radii_period = 5;
    options.radii_provider = [&calls](const nn::NetworkParams&, const data::DatasetView&) {
        ++calls;
        // class 0 rises immediately after burn-in, class 1 decreases forever
        return std::vector<double>{static_cast<double>(calls % 7), 1000.0 - calls};
    };

    try {
        inversion::train_stop_at_inversion(ds, config, options);
        FAIL("expected InversionNotFound");
    } catch (const InversionNotFound& e) {
        CHECK(e.attempts == 2);
        REQUIRE(e.missing_classes.size() == 1);
        CHECK(e.missing_classes[0] == 1);
    }
    // both attempts ran the full check schedule: 8 checks per 40-epoch run
    CHECK(calls == 16);
}

TEST_CASE("train_stop_at_inversion freezes per-class snapshots on synthetic data") {
    const auto ds = data::make_synthetic(100, 0.2, 31);
    nn::TrainConfig config;
    config.epochs = 300;
    config.seed = 7;
    inversion::StopAtInversionOptions options;
    options.radii_period = 5;

    const auto result = inversion::train_stop_at_inversion(ds, config, options);
    REQUIRE(result.complete());
    CHECK(result.attempts >= 1);
    for (int c = 0; c < ds.num_classes; ++c) {
        REQUIRE(result.epochs[c].has_value());
        CHECK(*result.epochs[c] > config.burn_in_epochs);
        CHECK(*result.epochs[c] % options.radii_period == 0);
    }

    // Snapshots are deep copies: training a copy further must not touch them.
    const auto frozen_w1 = result.snapshots[0]->w1;
    auto continued = *result.snapshots[0];
    nn::TrainConfig more;
    more.epochs = 5;
    more.seed = 8;
    nn::train(continued, data::full_view(ds), more);
    CHECK(result.snapshots[0]->w1 == frozen_w1);
    CHECK(continued.w1 != frozen_w1);
}

TEST_CASE("stop_at_inversion is deterministic per seed") {
    const auto ds = data::make_synthetic(80, 0.2, 13);
    nn::TrainConfig config;
    config.epochs = 300;
    config.seed = 21;
    const auto a = inversion::train_stop_at_inversion(ds, config);
    const auto b = inversion::train_stop_at_inversion(ds, config);
    REQUIRE(a.complete());
    for (int c = 0; c < ds.num_classes; ++c) {
        CHECK(a.epochs[c] == b.epochs[c]);
        CHECK(a.snapshots[c]->w1 == b.snapshots[c]->w1);
    }

    const auto hard_a = inversion::extract_stragglers(a, ds);
    const auto hard_b = inversion::extract_stragglers(b, ds);
    CHECK(hard_a.ids == hard_b.ids);
}

TEST_CASE("extract_stragglers matches brute-force re-prediction") {
    const auto ds = data::make_synthetic(100, 0.2, 31);
    nn::TrainConfig config;
    config.epochs = 300;
    config.seed = 7;
    const auto result = inversion::train_stop_at_inversion(ds, config);
    REQUIRE(result.complete());
    const auto hard = inversion::extract_stragglers(result, ds);

    CHECK(hard.method == IdentifierMethod::straggler);
    CHECK(hard.threshold == "intrinsic");
    long long count_sum = 0;
    for (int c : hard.per_class_counts) count_sum += c;
    CHECK(count_sum == static_cast<long long>(hard.ids.size()));

    // Independent pass: a sample is a straggler iff its own class snapshot
    // misclassifies it.
    std::size_t checked = 0;
    for (std::size_t row = 0; row < ds.size(); ++row) {
        const int label = ds.labels[row];
        const bool misclassified =
            nn::predict(*result.snapshots[label], ds.feature(row)) != label;
        CHECK(hard.contains(ds.ids[row]) == misclassified);
        ++checked;
    }
    CHECK(checked == ds.size());
}

TEST_CASE("a snapshot with full accuracy on its class contributes no stragglers") {
    const auto ds = data::make_synthetic(60, 0.0, 3);
    auto params = nn::init_params(ds.dim, ds.num_classes, 4);
    nn::TrainConfig config;
    config.epochs = 100;
    config.seed = 4;
    nn::train(params, data::full_view(ds), config);
    REQUIRE(nn::accuracy(params, data::full_view(ds)) == 1.0);

    inversion::InversionResult result;
    result.epochs = {25, 25};
    result.snapshots = {params, params};
    result.attempts = 1;
    const auto hard = inversion::extract_stragglers(result, ds);
    CHECK(hard.ids.empty());
}

TEST_CASE("extract_stragglers requires every snapshot") {
    const auto ds = data::make_synthetic(30, 0.1, 2);
    inversion::InversionResult result;
    result.epochs = {25, std::nullopt};
    result.snapshots = {nn::init_params(ds.dim, 2, 0), std::nullopt};
    try {
        inversion::extract_stragglers(result, ds);
        FAIL("expected MissingSnapshot");
    } catch (const MissingSnapshot& e) {
        CHECK(e.class_index == 1);
    }
}
