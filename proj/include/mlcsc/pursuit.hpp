#pragma once
// Layered thresholding (forward pass), IST and layered IST / basis pursuit.
#include <cstddef>
#include <optional>
#include <vector>

#include "mlcsc/convdict.hpp"
#include "mlcsc/threshold.hpp"

namespace mlcsc {

struct LayeredThreshConfig {
    ThresholdKind kind = ThresholdKind::Hard;
    std::vector<double> betas;  // one per layer
};

struct IstConfig {
    double xi = 0.0;
    double c = 1.0;
    std::size_t max_iters = 5000;
    double rel_tol = 1e-8;

    // Field sanity only (c > 0, xi >= 0, ...). Does not look at a dictionary.
    void validate() const;
    // c defaults to gram_spectral_bound(d, 1e-6); an explicit c must exceed half of that bound.
    static IstConfig for_dictionary(const ConvDictionary& d, double xi, std::optional<double> c = {},
                                    std::size_t max_iters = 5000, double rel_tol = 1e-8);
};

struct IstResult {
    LayeredVector gamma;
    std::size_t iterations = 0;
    bool converged = false;
    double objective = 0.0;               // xi*|G|_1 + 0.5*|DG - y|^2 at the returned iterate
    std::vector<double> objective_trace;  // filled only when requested; entry t is F(G^t), t = 0..iterations
};

// Soft or SoftNonnegative only. `init` defaults to zero.
IstResult ist_solve(const ConvDictionary& d, const LayeredVector& y, const IstConfig& cfg,
                    ThresholdKind kind = ThresholdKind::Soft, const LayeredVector* init = nullptr,
                    bool trace = false);
LayeredVector ist(const ConvDictionary& d, const LayeredVector& y, const IstConfig& cfg,
                  ThresholdKind kind = ThresholdKind::Soft);

double lasso_objective(const ConvDictionary& d, const LayeredVector& y, const LayeredVector& gamma, double xi);

// Noiseless BP through the Lagrangian with xi <- xi/factor, warm started,
// from |D^T y|_inf/factor down to floor_rel*|D^T y|_inf.
struct ContinuationConfig {
    double factor = 10.0;
    double floor_rel = 1e-10;
    std::size_t max_iters = 5000;  // per stage
    double rel_tol = 1e-8;
};
IstResult bp_continuation(const ConvDictionary& d, const LayeredVector& y, double c, const ContinuationConfig& cc,
                          ThresholdKind kind = ThresholdKind::Soft);

struct LayerOutcome {
    std::vector<std::size_t> support;
    std::size_t iterations = 0;
    double objective = 0.0;
    double residual_norm = 0.0;  // |G_{i-1} - D_i G_i|_2 with the estimates
    bool converged = true;
    double param = 0.0;  // beta or final xi
};

struct PursuitResult {
    RepStack reps;                     // reps[0] = input signal
    std::vector<LayerOutcome> layers;  // layers[i-1] describes layer i
};

PursuitResult layered_threshold(const ModelStack& model, const LayeredVector& x, const LayeredThreshConfig& cfg);
// relu(W_i^T a + b_i) layer by layer, scalar bias per layer.
RepStack forward_pass(const ModelStack& model, const LayeredVector& x, const std::vector<double>& biases);

PursuitResult layered_ist(const ModelStack& model, const LayeredVector& x, const std::vector<IstConfig>& cfgs,
                          ThresholdKind kind = ThresholdKind::Soft);
PursuitResult layered_bp_noiseless(const ModelStack& model, const LayeredVector& x, const std::vector<double>& cs,
                                   const ContinuationConfig& cc = {}, ThresholdKind kind = ThresholdKind::Soft);

// Support declared by IST outputs: |g| > 1e-6 * |G|_inf.
std::vector<std::size_t> ist_support(const LayeredVector& g);

struct DcpLayerCheck {
    bool residual_ok = false;
    bool sparsity_ok = false;
    bool ok() const { return residual_ok && sparsity_ok; }
};
// Layer i: |G_{i-1} - D_i G_i|_2 <= eps[i-1] and |G_i|^S_{0,inf} <= lambdas[i-1].
std::vector<DcpLayerCheck> check_dcp_feasible(const ModelStack& model, const RepStack& reps,
                                              const std::vector<std::size_t>& lambdas, const std::vector<double>& eps);

}  // namespace mlcsc
