#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stragglers/dataset.hpp"
#include "stragglers/errors.hpp"
#include "stragglers/experiments.hpp"
#include "stragglers/geometry.hpp"
#include "stragglers/identifiers.hpp"
#include "stragglers/inversion.hpp"
#include "stragglers/network.hpp"
#include "stragglers/version.hpp"

namespace py = pybind11;
using namespace stragglers;

namespace {

py::array_t<double> features_matrix(const data::LabeledDataset& ds) {
    py::array_t<double> out({static_cast<py::ssize_t>(ds.size()),
                             static_cast<py::ssize_t>(ds.dim)});
    std::copy(ds.features.begin(), ds.features.end(), out.mutable_data());
    return out;
}

double gyration_radius_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> points) {
    if (points.ndim() != 2) {
        throw py::value_error("expected a 2-D (n, dim) array");
    }
    const auto n = static_cast<std::size_t>(points.shape(0));
    const auto dim = static_cast<std::size_t>(points.shape(1));
    return geometry::gyration_radius_sq(
        std::span<const double>(points.data(), n * dim), n, dim);
}

nn::TrainConfig make_train_config(int epochs, int batch_size, int burn_in_epochs,
                                  int radii_period, std::uint64_t seed, double learning_rate,
                                  double weight_decay) {
    nn::TrainConfig config;
    config.epochs = epochs;
    config.batch_size = batch_size;
    config.burn_in_epochs = burn_in_epochs;
    config.radii_period = radii_period;
    config.seed = seed;
    config.adam.learning_rate = learning_rate;
    config.adam.weight_decay = weight_decay;
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Straggler-based hard-sample identification: C++ core operations";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "StragglerError");

    py::class_<data::RawDataset>(m, "RawDataset")
        .def_property_readonly("size", &data::RawDataset::size)
        .def_property_readonly("dim", &data::RawDataset::dim)
        .def_readonly("labels", &data::RawDataset::labels);

    py::class_<data::LabeledDataset>(m, "Dataset")
        .def_property_readonly("size", &data::LabeledDataset::size)
        .def_readonly("num_classes", &data::LabeledDataset::num_classes)
        .def_readonly("dim", &data::LabeledDataset::dim)
        .def_readonly("ids", &data::LabeledDataset::ids)
        .def_readonly("labels", &data::LabeledDataset::labels)
        .def_property_readonly("ground_truth_hard",
                               [](const data::LabeledDataset& ds) {
                                   return ds.provenance.ground_truth_hard;
                               })
        .def_property_readonly("source",
                               [](const data::LabeledDataset& ds) { return ds.provenance.source; })
        .def("features", &features_matrix, "Feature matrix as an (n, dim) array");

    py::class_<HardSampleSet>(m, "HardSampleSet")
        .def_property_readonly("method",
                               [](const HardSampleSet& set) { return to_string(set.method); })
        .def_readonly("ids", &HardSampleSet::ids)
        .def_readonly("per_class_counts", &HardSampleSet::per_class_counts)
        .def_readonly("threshold", &HardSampleSet::threshold)
        .def("__len__", &HardSampleSet::size)
        .def("__contains__", &HardSampleSet::contains);

    py::class_<nn::TrainConfig>(m, "TrainConfig")
        .def(py::init(&make_train_config), py::arg("epochs") = 500, py::arg("batch_size") = 64,
             py::arg("burn_in_epochs") = 20, py::arg("radii_period") = 1, py::arg("seed") = 0,
             py::arg("learning_rate") = 0.001, py::arg("weight_decay") = 0.01)
        .def_readwrite("epochs", &nn::TrainConfig::epochs)
        .def_readwrite("batch_size", &nn::TrainConfig::batch_size)
        .def_readwrite("burn_in_epochs", &nn::TrainConfig::burn_in_epochs)
        .def_readwrite("radii_period", &nn::TrainConfig::radii_period)
        .def_readwrite("seed", &nn::TrainConfig::seed);

    py::class_<nn::NetworkParams>(m, "NetworkParams")
        .def_readonly("input_dim", &nn::NetworkParams::input_dim)
        .def_readonly("num_classes", &nn::NetworkParams::num_classes)
        .def("save", [](const nn::NetworkParams& p, const std::string& path) {
            nn::save_params(p, path);
        });
    m.def("load_params", &nn::load_params, py::arg("path"));

    py::class_<geometry::RadiiTrace>(m, "RadiiTrace")
        .def_property_readonly("epochs",
                               [](const geometry::RadiiTrace& trace) {
                                   std::vector<int> epochs;
                                   for (const auto& e : trace.entries) epochs.push_back(e.epoch);
                                   return epochs;
                               })
        .def_property_readonly("radii", [](const geometry::RadiiTrace& trace) {
            std::vector<std::vector<double>> rows;
            for (const auto& e : trace.entries) rows.push_back(e.radii);
            return rows;
        });

    py::class_<inversion::InversionResult>(m, "InversionResult")
        .def_property_readonly("epochs",
                               [](const inversion::InversionResult& r) {
                                   std::vector<std::optional<int>> epochs(r.epochs.begin(),
                                                                          r.epochs.end());
                                   return epochs;
                               })
        .def_readonly("attempts", &inversion::InversionResult::attempts)
        .def("snapshot", [](const inversion::InversionResult& r, int cls) {
            if (cls < 0 || cls >= static_cast<int>(r.snapshots.size()) ||
                !r.snapshots[cls].has_value()) {
                throw py::value_error("no snapshot for class " + std::to_string(cls));
            }
            return *r.snapshots[cls];
        });

    // data
    m.def("load_idx", &data::load_idx, py::arg("images_path"), py::arg("labels_path"));
    m.def("combine_shuffle_normalize", &data::combine_shuffle_normalize, py::arg("train_raw"),
          py::arg("test_raw"), py::arg("seed"));
    m.def("take_subset", &data::take_subset, py::arg("dataset"), py::arg("n"), py::arg("seed"),
          py::arg("renormalize") = true);
    m.def("make_synthetic", &data::make_synthetic, py::arg("n_per_class"),
          py::arg("hard_region_fraction"), py::arg("seed"));
    m.def(
        "materialize_split",
        [](const data::LabeledDataset& dataset, const std::string& ratio_label,
           double hard_train_fraction, const std::string& removal_group, double removal_fraction,
           std::uint64_t seed, const HardSampleSet& hard) {
            data::SplitPlan plan;
            plan.ratio_label = ratio_label;
            plan.hard_train_fraction = hard_train_fraction;
            plan.removal.group = removal_group == "easy" ? data::RemovalGroup::easy
                                                         : data::RemovalGroup::hard;
            plan.removal.fraction = removal_fraction;
            plan.seed = seed;
            const auto split = data::materialize_split(dataset, plan, hard);
            return py::make_tuple(split.train_ids, split.test_ids, split.removed_ids);
        },
        py::arg("dataset"), py::arg("ratio_label"), py::arg("hard_train_fraction"),
        py::arg("removal_group"), py::arg("removal_fraction"), py::arg("seed"), py::arg("hard"));

    // network
    m.def("init_params", &nn::init_params, py::arg("input_dim"), py::arg("num_classes"),
          py::arg("seed"), py::arg("hidden1") = 20, py::arg("hidden2") = 20);
    m.def(
        "train_network",
        [](nn::NetworkParams params, const data::LabeledDataset& dataset,
           const nn::TrainConfig& config) {
            const auto log = nn::train(params, data::full_view(dataset), config);
            return py::make_tuple(params, log.epoch_mean_loss);
        },
        py::arg("params"), py::arg("dataset"), py::arg("config"),
        "Returns (trained_params, per_epoch_mean_loss)");
    m.def(
        "predict",
        [](const nn::NetworkParams& params, const std::vector<double>& x) {
            return nn::predict(params, x);
        },
        py::arg("params"), py::arg("x"));
    m.def(
        "confidence",
        [](const nn::NetworkParams& params, const std::vector<double>& x) {
            return nn::confidence(params, x);
        },
        py::arg("params"), py::arg("x"));
    m.def(
        "energy",
        [](const nn::NetworkParams& params, const std::vector<double>& x) {
            return nn::energy(params, x);
        },
        py::arg("params"), py::arg("x"));
    m.def(
        "accuracy",
        [](const nn::NetworkParams& params, const data::LabeledDataset& dataset) {
            return nn::accuracy(params, data::full_view(dataset));
        },
        py::arg("params"), py::arg("dataset"));

    // geometry
    m.def("gyration_radius_sq", &gyration_radius_from_array, py::arg("points"),
          "Squared gyration radius of an (n, dim) point cloud");
    m.def(
        "class_radii",
        [](const nn::NetworkParams& params, const data::LabeledDataset& dataset) {
            return geometry::class_radii(params, data::full_view(dataset));
        },
        py::arg("params"), py::arg("dataset"));

    // inversion
    m.def("record_radii_trace", &inversion::record_radii_trace, py::arg("dataset"),
          py::arg("config"), py::arg("compute_radii") = true,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "train_stop_at_inversion",
        [](const data::LabeledDataset& dataset, const nn::TrainConfig& config, int radii_period,
           int max_attempts) {
            inversion::StopAtInversionOptions options;
            options.radii_period = radii_period;
            options.max_attempts = max_attempts;
            py::gil_scoped_release release;
            return inversion::train_stop_at_inversion(dataset, config, options);
        },
        py::arg("dataset"), py::arg("config"), py::arg("radii_period") = 5,
        py::arg("max_attempts") = 5);
    m.def("extract_stragglers", &inversion::extract_stragglers, py::arg("result"),
          py::arg("dataset"));
    m.def(
        "detect_first_rise",
        [](const std::vector<std::pair<int, double>>& series) {
            return inversion::detect_first_rise(series);
        },
        py::arg("series"));

    // identifiers
    m.def("identify_by_confidence", &identifiers::identify_by_confidence, py::arg("params"),
          py::arg("dataset"), py::arg("n"));
    m.def("identify_by_energy", &identifiers::identify_by_energy, py::arg("params"),
          py::arg("dataset"), py::arg("n"));
    m.def("identify_random", &identifiers::identify_random, py::arg("dataset"), py::arg("n"),
          py::arg("seed"));
    m.def("overlap_pct", &identifiers::overlap_pct, py::arg("a"), py::arg("b"));

    // statistics
    m.def("pearson", &experiments::pearson, py::arg("xs"), py::arg("ys"));
    m.def("spearman", &experiments::spearman, py::arg("xs"), py::arg("ys"));
    m.def("class_distribution", &experiments::class_distribution, py::arg("hard"));
}
