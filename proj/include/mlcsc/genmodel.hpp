#pragma once
// Synthetic model family and realization sampling.
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlcsc/convdict.hpp"
#include "mlcsc/io.hpp"
#include "mlcsc/rng.hpp"
#include "mlcsc/theory.hpp"

namespace mlcsc {

// Shipped discrete Meyer filter (29 taps, unit norm), compiled in from data/filters/dmey29.txt.
const std::vector<double>& builtin_dmey29();

struct RandomFilterSpec {
    std::size_t len = 20;       // spatial positions
    std::size_t nnz = 7;
    int max_abs = 8;            // values drawn from {-max_abs..max_abs} \ {0}
    std::size_t candidates = 200;
    std::size_t count = 1;      // filters in the bank (m_i)
    bool skip_orthogonal = true;  // ignore candidates whose coherence is numerically zero
};

struct FilterSpec {
    enum class Kind { Dmey29, Files, Random, SameAsPrevious } kind = Kind::Random;
    std::vector<std::string> files;
    RandomFilterSpec random;
};

struct GenConfig {
    std::size_t K = 3;
    std::size_t deepest_len = 100;
    std::size_t l0_lo = 20, l0_hi = 66;
    std::vector<std::size_t> strides;  // strides[i-1] is the spatial stride of D_i
    std::vector<FilterSpec> filters;   // filters[i-1] builds D_i
    std::optional<double> noise_snr_db;
    std::uint64_t seed = 2017;
    std::optional<std::size_t> deepest_patch_len;

    // Meyer first layer, one shared random filter above it, stride 6 everywhere.
    static GenConfig defaults(std::size_t K);
    void validate() const;
};

// Reads gen.* keys plus optional layer.<i>.* keys; relative filter paths resolve against base_dir.
GenConfig gen_config_from_manifest(const Manifest& m, const std::string& base_dir, std::size_t default_K = 3);
Manifest gen_config_to_manifest(const GenConfig& cfg);

std::vector<double> gen_sparse_filter(std::size_t len, std::size_t nnz, const std::vector<int>& value_set,
                                      CounterRng& rng);
std::vector<int> nonzero_values(int max_abs);

struct SelectedFilter {
    LocalFilterBank bank;
    double mu = 0.0;
    std::size_t index = 0;  // which candidate won
    std::vector<double> all_mu;
};
// Draws spec.candidates banks and returns the one of least coherence under `factory`.
SelectedFilter select_filter_by_coherence(const RandomFilterSpec& spec, std::size_t channel_stride,
                                          const std::function<ConvDictionary(LocalFilterBank)>& factory,
                                          CounterRng& rng);

ModelStack build_model(const GenConfig& cfg);

struct Realization {
    std::shared_ptr<const ModelStack> model;
    RepStack reps;  // reps[0] = clean X
    LayeredVector y;
    double eps0_local = 0.0;  // |E|^P_{2,inf} with the layer-0 patch length
    double noise_l2 = 0.0;    // |E|_2
    double snr_global_db = 0.0;
    std::uint64_t index = 0;

    const LayeredVector& x() const { return reps.at(0); }
};

Realization sample_realization(std::shared_ptr<const ModelStack> model, const GenConfig& cfg, std::uint64_t index);
Realization sample_realization(const GenConfig& cfg, std::uint64_t index = 0);

std::vector<double> model_coherences(const ModelStack& model);
// Pass precomputed coherences to skip recomputing them per realization.
std::vector<LayerStats> measure_stats(const Realization& r, const std::vector<double>* mus = nullptr);
std::vector<LayerStats> measure_stats(const ModelStack& model, const RepStack& reps,
                                      const std::vector<double>* mus = nullptr);

std::string stats_csv(const std::vector<LayerStats>& stats);

// Directory layout: model/manifest.txt (+ filters), x.txt, y.txt, gamma_<i>.txt, meta.txt, stats.csv.
void save_realization(const std::string& dir, const Realization& r);
Realization load_realization(const std::string& dir);

}  // namespace mlcsc
