#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "stragglers/dataset.hpp"
#include "stragglers/errors.hpp"
#include "stragglers/rng.hpp"
#include "test_support.hpp"

using namespace stragglers;
using test_support::TempDir;

namespace {

std::vector<std::uint8_t> gradient_image(int start) {
    std::vector<std::uint8_t> image(784);
    for (int i = 0; i < 784; ++i) image[i] = static_cast<std::uint8_t>((start + i) % 256);
    return image;
}

data::RawDataset tiny_raw(int n, int label_offset = 0) {
    data::RawDataset raw;
    raw.rows = 28;
    raw.cols = 28;
    for (int i = 0; i < n; ++i) {
        const auto image = gradient_image(i * 37 + 3);
        raw.pixels.insert(raw.pixels.end(), image.begin(), image.end());
        raw.labels.push_back((i + label_offset) % 2);
    }
    return raw;
}

std::pair<double, double> global_mean_std(const data::LabeledDataset& ds) {
    double mean = 0.0;
    for (double v : ds.features) mean += v;
    mean /= ds.features.size();
    double var = 0.0;
    for (double v : ds.features) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / ds.features.size())};
}

}  // namespace

TEST_CASE("load_idx parses a hand-built two-image pair") {
    TempDir dir;
    test_support::write_idx_images(dir.file("imgs"), {gradient_image(0), gradient_image(5)});
    test_support::write_idx_labels(dir.file("lbls"), {7, 2});

    const auto raw = data::load_idx(dir.file("imgs"), dir.file("lbls"));
    CHECK(raw.size() == 2);
    CHECK(raw.dim() == 784);
    CHECK(raw.labels[0] == 7);
    CHECK(raw.labels[1] == 2);
    CHECK(raw.pixels[0] == gradient_image(0)[0]);
    CHECK(raw.pixels[784] == gradient_image(5)[0]);
}

TEST_CASE("load_idx rejects an image file carrying the label magic") {
    TempDir dir;
    test_support::write_idx_images(dir.file("imgs"), {gradient_image(0)}, 28, 28, 0x00000801);
    test_support::write_idx_labels(dir.file("lbls"), {1});
    CHECK_THROWS_AS(data::load_idx(dir.file("imgs"), dir.file("lbls")), BadMagic);
}

TEST_CASE("load_idx rejects mismatched image/label counts") {
    TempDir dir;
    test_support::write_idx_images(dir.file("imgs"),
                                   {gradient_image(0), gradient_image(1), gradient_image(2)});
    test_support::write_idx_labels(dir.file("lbls"), {0, 1});
    CHECK_THROWS_AS(data::load_idx(dir.file("imgs"), dir.file("lbls")), CountMismatch);
}

TEST_CASE("load_idx names the truncated file") {
    TempDir dir;
    test_support::write_idx_images(dir.file("imgs"), {gradient_image(0), gradient_image(1)});
    test_support::write_idx_labels(dir.file("lbls"), {0, 1});
    // chop the image payload
    const auto bytes = test_support::read_file(dir.file("imgs"));
    std::ofstream out(dir.file("imgs"), std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 100));
    out.close();
    try {
        data::load_idx(dir.file("imgs"), dir.file("lbls"));
        FAIL("expected TruncatedFile");
    } catch (const TruncatedFile& e) {
        CHECK(std::string(e.what()).find("imgs") != std::string::npos);
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
}

TEST_CASE("combine_shuffle_normalize concatenates, shuffles and standardizes") {
    const auto train = tiny_raw(6);
    const auto test = tiny_raw(4, 1);
    const auto ds = data::combine_shuffle_normalize(train, test, 11);

    CHECK(ds.size() == 10);
    CHECK(ds.num_classes == 2);
    CHECK(ds.dim == 784);

    // ids are the pre-shuffle concatenation order, so the permutation is recoverable
    std::set<std::int64_t> ids(ds.ids.begin(), ds.ids.end());
    CHECK(ids.size() == 10);
    CHECK(*ids.begin() == 0);
    CHECK(*ids.rbegin() == 9);
    for (std::size_t row = 0; row < ds.size(); ++row) {
        const auto id = ds.ids[row];
        const int expected_label =
            id < 6 ? train.labels[static_cast<std::size_t>(id)] : test.labels[static_cast<std::size_t>(id - 6)];
        CHECK(ds.labels[row] == expected_label);
    }

    const auto [mean, stddev] = global_mean_std(ds);
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(stddev - 1.0) < 1e-6);
}

TEST_CASE("combine_shuffle_normalize is deterministic per seed") {
    const auto train = tiny_raw(8);
    const auto test = tiny_raw(5, 1);
    const auto a = data::combine_shuffle_normalize(train, test, 3);
    const auto b = data::combine_shuffle_normalize(train, test, 3);
    CHECK(a.ids == b.ids);
    CHECK(a.features == b.features);
    const auto c = data::combine_shuffle_normalize(train, test, 4);
    CHECK(a.ids != c.ids);
}

TEST_CASE("combine_shuffle_normalize rejects dimension mismatch and zero variance") {
    auto train = tiny_raw(4);
    data::RawDataset small;
    small.rows = 14;
    small.cols = 14;
    small.pixels.assign(14 * 14, 0);
    small.labels = {0};
    CHECK_THROWS_AS(data::combine_shuffle_normalize(train, small, 0), DimensionMismatch);

    data::RawDataset constant_a, constant_b;
    constant_a.rows = constant_b.rows = 28;
    constant_a.cols = constant_b.cols = 28;
    constant_a.pixels.assign(784 * 2, 9);
    constant_a.labels = {0, 1};
    constant_b.pixels.assign(784, 9);
    constant_b.labels = {0};
    CHECK_THROWS_AS(data::combine_shuffle_normalize(constant_a, constant_b, 0),
                    DegenerateVariance);
}

TEST_CASE("take_subset keeps ids and renormalizes on the subset") {
    const auto ds = data::make_synthetic(200, 0.2, 5);
    const auto whole = data::take_subset(ds, ds.size(), 17);
    std::set<std::int64_t> before(ds.ids.begin(), ds.ids.end());
    std::set<std::int64_t> after(whole.ids.begin(), whole.ids.end());
    CHECK(before == after);  // n = size -> permutation of the whole set

    const auto sub = data::take_subset(ds, 150, 17);
    CHECK(sub.size() == 150);
    const auto [mean, stddev] = global_mean_std(sub);
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(stddev - 1.0) < 1e-6);

    CHECK_THROWS_AS(data::take_subset(ds, ds.size() + 1, 0), SubsetTooLarge);
}

TEST_CASE("take_subset with different seeds differs in at least one id") {
    const auto ds = data::make_synthetic(200, 0.0, 5);
    const auto a = data::take_subset(ds, 100, 1);
    const auto b = data::take_subset(ds, 100, 2);
    std::set<std::int64_t> sa(a.ids.begin(), a.ids.end());
    std::set<std::int64_t> sb(b.ids.begin(), b.ids.end());
    CHECK(sa != sb);
}

TEST_CASE("standardizing an already standardized set is a no-op within 1e-6") {
    auto ds = data::make_synthetic(120, 0.2, 9);
    const auto before = ds.features;
    data::standardize_features(ds);
    double max_shift = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        max_shift = std::max(max_shift, std::abs(before[i] - ds.features[i]));
    }
    CHECK(max_shift <= 1e-6);
}

TEST_CASE("id stability through shuffle-subset-split composition") {
    const auto parent = data::make_synthetic(150, 0.2, 21);
    const auto subset = data::take_subset(parent, 220, 33);

    // One affine rescale maps every subset feature back to its parent value.
    const auto r0 = subset.feature(0);
    const auto p0 = parent.feature(parent.row_of(subset.ids[0]));
    const auto r1 = subset.feature(1);
    const auto p1 = parent.feature(parent.row_of(subset.ids[1]));
    const double scale = (p1[0] - p0[0]) / (r1[0] - r0[0]);
    const double shift = p0[0] - scale * r0[0];
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const auto sub_f = subset.feature(i);
        const auto par_f = parent.feature(parent.row_of(subset.ids[i]));
        CHECK(subset.labels[i] == parent.labels[parent.row_of(subset.ids[i])]);
        for (int j = 0; j < subset.dim; ++j) {
            CHECK(std::abs(scale * sub_f[j] + shift - par_f[j]) < 1e-9);
        }
    }
}

TEST_CASE("materialize_split places hard ids proportionally") {
    const auto ds = data::make_synthetic(250, 0.2, 7);  // 500 samples, 100 hard
    const auto hard = test_support::ground_truth_hard(ds);
    REQUIRE(hard.size() == 100);

    data::SplitPlan plan;
    plan.ratio_label = "80:20";
    plan.hard_train_fraction = 0.8;
    plan.seed = 40;
    const auto split = data::materialize_split(ds, plan, hard);

    std::size_t hard_in_train = 0, hard_in_test = 0;
    for (auto id : split.train_ids) hard_in_train += hard.contains(id) ? 1 : 0;
    for (auto id : split.test_ids) hard_in_test += hard.contains(id) ? 1 : 0;
    CHECK(hard_in_train == 80);
    CHECK(hard_in_test == 20);
    CHECK(split.train_ids.size() == 400);
    CHECK(split.test_ids.size() == 100);
}

TEST_CASE("removal deletes only from train") {
    const auto ds = data::make_synthetic(250, 0.2, 7);
    const auto hard = test_support::ground_truth_hard(ds);

    data::SplitPlan plan;
    plan.ratio_label = "80:20";
    plan.hard_train_fraction = 0.8;
    plan.removal = {data::RemovalGroup::hard, 1.0};
    plan.seed = 40;
    const auto split = data::materialize_split(ds, plan, hard);

    for (auto id : split.train_ids) CHECK_FALSE(hard.contains(id));
    std::size_t hard_in_test = 0;
    for (auto id : split.test_ids) hard_in_test += hard.contains(id) ? 1 : 0;
    CHECK(hard_in_test == 20);  // test untouched by removal
    CHECK(split.removed_ids.size() == 80);
}

TEST_CASE("split conservation holds over random plans") {
    const auto ds = data::make_synthetic(120, 0.25, 3);
    const auto hard = test_support::ground_truth_hard(ds);
    Rng rng(99);
    const std::vector<std::string> ratios = {"90:10", "80:20", "70:30", "60:40", "50:50"};

    int feasible = 0;
    for (int trial = 0; trial < 200; ++trial) {
        data::SplitPlan plan;
        plan.ratio_label = ratios[rng.next_below(ratios.size())];
        plan.hard_train_fraction = rng.next_unit();
        plan.removal.group = rng.next_below(2) == 0 ? data::RemovalGroup::hard
                                                    : data::RemovalGroup::easy;
        plan.removal.fraction = rng.next_unit();
        plan.seed = rng.next_u64();

        // Quota arithmetic decides feasibility up front; infeasible plans
        // must throw, feasible ones must conserve the universe.
        const auto train_total =
            data::round_half_up(data::parse_ratio_label(plan.ratio_label) * ds.size());
        const auto hard_train =
            data::round_half_up(plan.hard_train_fraction * static_cast<double>(hard.size()));
        const auto easy_train = train_total - hard_train;
        const auto easy_available = static_cast<long long>(ds.size() - hard.size());
        if (easy_train < 0 || easy_train > easy_available) {
            CHECK_THROWS_AS(data::materialize_split(ds, plan, hard), InfeasiblePlan);
            continue;
        }

        ++feasible;
        const auto split = data::materialize_split(ds, plan, hard);
        CHECK(split.train_ids.size() + split.test_ids.size() + split.removed_ids.size() ==
              ds.size());

        std::vector<std::int64_t> overlap;
        std::set_intersection(split.train_ids.begin(), split.train_ids.end(),
                              split.test_ids.begin(), split.test_ids.end(),
                              std::back_inserter(overlap));
        CHECK(overlap.empty());
    }
    CHECK(feasible >= 100);
}

TEST_CASE("materialize_split rejects foreign hard ids") {
    const auto ds = data::make_synthetic(50, 0.2, 3);
    HardSampleSet hard = test_support::ground_truth_hard(ds);
    hard.ids.push_back(1'000'000);  // not in the dataset
    data::SplitPlan plan;
    CHECK_THROWS_AS(data::materialize_split(ds, plan, hard), InfeasiblePlan);
}

TEST_CASE("make_synthetic flags exactly the requested hard fraction per class") {
    const auto ds = data::make_synthetic(100, 0.2, 31);
    CHECK(ds.size() == 200);
    CHECK(ds.provenance.ground_truth_hard.size() == 40);
    std::vector<int> per_class(2, 0);
    for (auto id : ds.provenance.ground_truth_hard) {
        per_class[static_cast<std::size_t>(ds.labels[ds.row_of(id)])] += 1;
    }
    CHECK(per_class[0] == 20);
    CHECK(per_class[1] == 20);

    const auto none = data::make_synthetic(100, 0.0, 31);
    CHECK(none.provenance.ground_truth_hard.empty());
}

TEST_CASE("make_synthetic is deterministic per seed") {
    const auto a = data::make_synthetic(60, 0.3, 12);
    const auto b = data::make_synthetic(60, 0.3, 12);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.ids == b.ids);
    CHECK(a.provenance.ground_truth_hard == b.provenance.ground_truth_hard);
}
