// numpy-facing bindings for the core operators, generator, bounds and harness.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mlcsc/experiment.hpp"
#include "mlcsc/pursuit.hpp"

namespace py = pybind11;
using namespace mlcsc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) {
    auto b = a.request();
    if (b.ndim != 1) throw std::invalid_argument("expected a 1-d array");
    const double* p = static_cast<const double*>(b.ptr);
    return std::vector<double>(p, p + b.shape[0]);
}

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

LayeredVector as_layer(const Array& a, const LayerGeometry& g) {
    auto v = to_vec(a);
    if (v.size() != g.size())
        throw std::invalid_argument("array has " + std::to_string(v.size()) + " entries, expected " +
                                    std::to_string(g.size()));
    return LayeredVector(std::move(v), g);
}

py::list reps_to_list(const RepStack& reps) {
    py::list l;
    for (const auto& r : reps) l.append(to_array(r.data));
    return l;
}

py::array_t<double> elementwise(const Array& a, double beta, ThresholdKind kind) {
    auto v = to_vec(a);
    threshold_inplace(kind, v, beta);
    return to_array(v);
}

ConvDictionary make_dict(const std::vector<std::vector<double>>& filters, std::size_t in_len, std::size_t stride,
                         std::size_t channel_stride, bool normalize) {
    LocalFilterBank bank = normalize ? LocalFilterBank::normalized(filters) : LocalFilterBank{filters};
    return ConvDictionary(std::move(bank), in_len, stride, channel_stride);
}

}  // namespace

PYBIND11_MODULE(_mlcsc, m) {
    m.doc() = "Multi-layer convolutional sparse coding";

    py::enum_<ThresholdKind>(m, "ThresholdKind")
        .value("Hard", ThresholdKind::Hard)
        .value("Soft", ThresholdKind::Soft)
        .value("SoftNonnegative", ThresholdKind::SoftNonnegative);

    m.def("hard", [](const Array& a, double b) { return elementwise(a, b, ThresholdKind::Hard); });
    m.def("soft", [](const Array& a, double b) { return elementwise(a, b, ThresholdKind::Soft); });
    m.def("soft_nonneg", [](const Array& a, double b) { return elementwise(a, b, ThresholdKind::SoftNonnegative); });
    m.def("oracle_threshold", [](const Array& a, std::size_t k) {
        auto r = oracle_threshold(to_vec(a), k);
        return py::dict(py::arg("beta") = r.beta, py::arg("kept") = r.kept, py::arg("tie") = r.tie);
    });

    py::class_<LayerGeometry>(m, "LayerGeometry")
        .def_readonly("spatial_len", &LayerGeometry::spatial_len)
        .def_readonly("channels", &LayerGeometry::channels)
        .def_readonly("patch_len", &LayerGeometry::patch_len)
        .def_readonly("stripe_len", &LayerGeometry::stripe_len)
        .def_property_readonly("size", &LayerGeometry::size);

    py::class_<ConvDictionary>(m, "ConvDictionary")
        .def(py::init(&make_dict), py::arg("filters"), py::arg("in_len"), py::arg("stride") = 1,
             py::arg("channel_stride") = 1, py::arg("normalize") = true)
        .def_property_readonly("in_geom", &ConvDictionary::in_geom)
        .def_property_readonly("out_geom", &ConvDictionary::out_geom)
        .def_property_readonly("filters", [](const ConvDictionary& d) { return d.bank().filters; })
        .def("synthesize", [](const ConvDictionary& d, const Array& g) {
            return to_array(synthesize(d, as_layer(g, d.in_geom())).data);
        })
        .def("analyze", [](const ConvDictionary& d, const Array& x) {
            return to_array(analyze(d, as_layer(x, d.out_geom())).data);
        })
        .def("dense", [](const ConvDictionary& d) { return densify(d); })
        .def("mutual_coherence", [](const ConvDictionary& d) { return mutual_coherence(d); })
        .def("induced_l0", [](const ConvDictionary& d) { return induced_l0(d); })
        .def("gram_spectral_bound", [](const ConvDictionary& d) { return gram_spectral_bound(d); });

    py::class_<ModelStack, std::shared_ptr<ModelStack>>(m, "ModelStack")
        .def(py::init([](std::vector<ConvDictionary> layers) { return std::make_shared<ModelStack>(std::move(layers)); }))
        .def_property_readonly("depth", &ModelStack::depth)
        .def("layer", &ModelStack::layer, py::arg("i"), py::return_value_policy::copy)
        .def("geom", &ModelStack::geom)
        .def("propagate", [](const ModelStack& ms, const Array& deep) {
            return reps_to_list(propagate(ms, as_layer(deep, ms.geom(ms.depth()))));
        });

    py::class_<LayerStats>(m, "LayerStats")
        .def(py::init([](std::size_t s, std::size_t p, double gmin, double gmax, double mu) {
                 return LayerStats{s, p, gmin, gmax, mu};
             }),
             py::arg("l0inf_stripe"), py::arg("l0inf_patch"), py::arg("gamma_min_abs"), py::arg("gamma_max_abs"),
             py::arg("mu"))
        .def_readwrite("l0inf_stripe", &LayerStats::l0inf_stripe)
        .def_readwrite("l0inf_patch", &LayerStats::l0inf_patch)
        .def_readwrite("gamma_min_abs", &LayerStats::gamma_min_abs)
        .def_readwrite("gamma_max_abs", &LayerStats::gamma_max_abs)
        .def_readwrite("mu", &LayerStats::mu);

    py::class_<LayerBound>(m, "LayerBound")
        .def_readonly("condition", &LayerBound::condition)
        .def_readonly("param_admissible", &LayerBound::param_admissible)
        .def_readonly("beta_lo", &LayerBound::beta_lo)
        .def_readonly("beta_hi", &LayerBound::beta_hi)
        .def_readonly("param", &LayerBound::param)
        .def_readonly("eps", &LayerBound::eps)
        .def_readonly("recoverable", &LayerBound::recoverable)
        .def_readonly("exact_recovery", &LayerBound::exact_recovery);

    py::class_<TheoremReport>(m, "TheoremReport")
        .def_readonly("eps0", &TheoremReport::eps0)
        .def_readonly("layers", &TheoremReport::layers)
        .def("holds", [](const TheoremReport& r) { return r.holds_through(); })
        .def("csv", [](const TheoremReport& r) { return report_csv(r); });

    m.def("check_uniqueness", &check_uniqueness);
    m.def("global_stability_bounds", &global_stability_bounds);
    m.def("hard_stability", py::overload_cast<const std::vector<LayerStats>&, double>(&hard_stability));
    m.def("soft_stability",
          [](const std::vector<LayerStats>& s, double eps0, std::optional<std::vector<double>> betas) {
              return betas ? soft_stability(s, eps0, *betas) : soft_stability(s, eps0);
          },
          py::arg("stats"), py::arg("eps0"), py::arg("betas") = py::none());
    m.def("bp_check_and_bounds", &bp_check_and_bounds);

    m.def("layered_threshold",
          [](const ModelStack& ms, const Array& x, ThresholdKind kind, std::vector<double> betas) {
              return reps_to_list(layered_threshold(ms, as_layer(x, ms.geom(0)), {kind, std::move(betas)}).reps);
          },
          py::arg("model"), py::arg("x"), py::arg("kind"), py::arg("betas"));
    m.def("ist",
          [](const ConvDictionary& d, const Array& y, double xi, std::optional<double> c, std::size_t max_iters,
             double rel_tol) {
              auto cfg = IstConfig::for_dictionary(d, xi, c, max_iters, rel_tol);
              auto r = ist_solve(d, as_layer(y, d.out_geom()), cfg);
              return py::make_tuple(to_array(r.gamma.data), r.iterations, r.converged, r.objective);
          },
          py::arg("d"), py::arg("y"), py::arg("xi"), py::arg("c") = py::none(), py::arg("max_iters") = 5000,
          py::arg("rel_tol") = 1e-8);
    m.def("layered_ist",
          [](const ModelStack& ms, const Array& x, std::vector<double> xis) {
              std::vector<IstConfig> cfgs;
              for (std::size_t i = 0; i < xis.size(); ++i) cfgs.push_back(IstConfig::for_dictionary(ms.layer(i + 1), xis[i]));
              return reps_to_list(layered_ist(ms, as_layer(x, ms.geom(0)), cfgs).reps);
          },
          py::arg("model"), py::arg("x"), py::arg("xis"));

    py::class_<Realization>(m, "Realization")
        .def_property_readonly("reps", [](const Realization& r) { return reps_to_list(r.reps); })
        .def_property_readonly("x", [](const Realization& r) { return to_array(r.x().data); })
        .def_property_readonly("y", [](const Realization& r) { return to_array(r.y.data); })
        .def_readonly("eps0_local", &Realization::eps0_local)
        .def_readonly("snr_global_db", &Realization::snr_global_db)
        .def_property_readonly("model", [](const Realization& r) { return std::make_shared<ModelStack>(*r.model); })
        .def("stats", [](const Realization& r) { return measure_stats(r); });

    m.def("sample_realization",
          [](std::size_t K, std::uint64_t seed, std::uint64_t index, std::optional<double> snr_db) {
              auto cfg = GenConfig::defaults(K);
              cfg.seed = seed;
              cfg.noise_snr_db = snr_db;
              return sample_realization(cfg, index);
          },
          py::arg("K") = 3, py::arg("seed") = 2017, py::arg("index") = 0, py::arg("snr_db") = py::none());
    m.def("default_model", [](std::size_t K) { return std::make_shared<ModelStack>(build_model(GenConfig::defaults(K))); },
          py::arg("K") = 3);

    m.def("run_experiment",
          [](const std::string& preset, std::size_t realizations, std::optional<std::string> algorithms,
             std::optional<std::uint64_t> seed) {
              auto spec = ExperimentSpec::preset_named(preset);
              spec.realizations = realizations;
              if (algorithms) spec.algorithms = parse_algorithms(*algorithms);
              if (seed) spec.gen.seed = *seed;
              spec.validate();
              ExperimentResult res;
              {
                  py::gil_scoped_release nogil;
                  res = run_experiment(spec);
              }
              return py::make_tuple(records_csv(res.records), summary_text(res));
          },
          py::arg("preset"), py::arg("realizations") = 10, py::arg("algorithms") = py::none(),
          py::arg("seed") = py::none());
}
