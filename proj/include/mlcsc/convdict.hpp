#pragma once
// Strided periodic convolutional dictionaries and model stacks.
#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mlcsc/error.hpp"
#include "mlcsc/signal.hpp"

namespace mlcsc {

struct LocalFilterBank {
    std::vector<std::vector<double>> filters;  // unit norm, equal lengths

    // Normalizes every filter; throws on empty/zero/ragged input.
    static LocalFilterBank normalized(std::vector<std::vector<double>> raw);
    std::size_t count() const { return filters.size(); }
    std::size_t length() const { return filters.empty() ? 0 : filters[0].size(); }
};

// D_i : layer i (in, spatial_len N) -> layer i-1 (out, spatial_len N*s).
// Atom (j,f) sits at column j*m_i + f and is filter f placed at spatial offset j*s.
class ConvDictionary {
public:
    ConvDictionary(LocalFilterBank bank, std::size_t in_spatial_len, std::size_t spatial_stride,
                   std::size_t channel_stride = 1);

    const LocalFilterBank& bank() const { return bank_; }
    const std::vector<double>& filter(std::size_t f) const { return bank_.filters.at(f); }
    const LayerGeometry& in_geom() const { return in_; }
    const LayerGeometry& out_geom() const { return out_; }
    std::size_t spatial_stride() const { return s_; }
    std::size_t channel_stride() const { return out_.channels; }
    std::size_t num_filters() const { return in_.channels; }
    std::size_t filter_spatial_len() const { return n_; }
    std::size_t num_atoms() const { return in_.size(); }
    // 2*ceil(n/s)-1 before clamping to the layer length.
    std::size_t natural_stripe_len() const;

    // Same operator, different patch/stripe bookkeeping (used when stacking).
    ConvDictionary relabeled(std::size_t in_patch_len, std::size_t out_stripe_len) const;

private:
    LocalFilterBank bank_;
    LayerGeometry in_, out_;
    std::size_t s_ = 1, n_ = 1;
};

LayeredVector synthesize(const ConvDictionary& d, const LayeredVector& gamma);
LayeredVector analyze(const ConvDictionary& d, const LayeredVector& x);

inline constexpr std::size_t kDensifyCap = 10'000'000;
Eigen::MatrixXd densify(const ConvDictionary& d, std::size_t cap = kDensifyCap);

// <atom a, atom b> computed from the cyclic overlap of the two filters.
double atom_inner(const ConvDictionary& d, std::size_t a, std::size_t b);
// Dense column of one atom (length out size).
std::vector<double> atom_column(const ConvDictionary& d, std::size_t a);

double mutual_coherence(const ConvDictionary& d);
std::size_t induced_l0(const ConvDictionary& d, double tol = kZeroTol);
double gram_spectral_bound(const ConvDictionary& d, double tol = 1e-6, std::size_t max_iters = 20000);
std::vector<double> extract_atom_patch(const ConvDictionary& d, std::size_t atom);

// Local dictionary Omega: patch of D*Gamma at spatial position j*s equals
// Omega * stripe of Gamma centred on j. Rows n*m_{i-1}, columns stripe_len*m_i.
Eigen::MatrixXd stripe_dictionary(const ConvDictionary& d);

ConvDictionary nonnegative_expand(const ConvDictionary& d);
// Gamma over D -> nonnegative Gamma+ over [D,-D] (2m channels, position-major).
LayeredVector split_nonnegative(const LayeredVector& gamma);

// reps[0] = X, reps[i] = Gamma_i.
using RepStack = std::vector<LayeredVector>;

class ModelStack {
public:
    // deepest_patch_len defaults to the layer-K stripe length.
    explicit ModelStack(std::vector<ConvDictionary> layers, std::optional<std::size_t> deepest_patch_len = {});

    std::size_t depth() const { return layers_.size(); }
    const ConvDictionary& layer(std::size_t i) const;  // 1-based
    const LayerGeometry& geom(std::size_t i) const;    // 0..K
    const std::vector<ConvDictionary>& layers() const { return layers_; }

private:
    std::vector<ConvDictionary> layers_;
};

// Gamma_K -> full stack via Gamma_{i-1} = D_i Gamma_i.
RepStack propagate(const ModelStack& model, const LayeredVector& deepest);

// Filter files (one value per line) and model manifests.
std::vector<double> load_filter(const std::string& path);
void save_filter(const std::string& path, const std::vector<double>& f);
void save_model(const std::string& dir, const ModelStack& model);
ModelStack load_model(const std::string& manifest_path);

}  // namespace mlcsc
