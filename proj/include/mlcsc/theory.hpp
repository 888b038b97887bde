#pragma once
// Hypotheses and error bounds for the multi-layer pursuits.
#include <cstddef>
#include <string>
#include <vector>

#include "mlcsc/convdict.hpp"

namespace mlcsc {

struct LayerStats {
    std::size_t l0inf_stripe = 0;
    std::size_t l0inf_patch = 0;
    double gamma_min_abs = 0.0;  // over nonzeros; 0 when the layer is empty
    double gamma_max_abs = 0.0;
    double mu = 0.0;
    bool nonzero() const { return gamma_max_abs > 0.0; }
};

enum class Theorem { GlobalStability, HardThresholding, SoftThresholding, LayeredBP };
std::string to_string(Theorem t);

struct LayerBound {
    bool condition = false;         // the theorem's sparsity/coherence hypothesis at this layer
    bool param_admissible = true;   // chosen beta inside the admissible interval (thresholding only)
    double beta_lo = 0.0, beta_hi = 0.0;
    double param = 0.0;             // beta_i, xi_i; unused for global stability
    double eps = 0.0;               // eps_i (E_i for global stability)
    double recoverable = 0.0;       // BP: entries above this are guaranteed in the support
    bool exact_recovery = false;    // BP noiseless success condition, S < (1 + 1/mu)/2
    bool holds() const { return condition && param_admissible; }
};

struct TheoremReport {
    Theorem theorem = Theorem::HardThresholding;
    double eps0 = 0.0;
    std::vector<LayerBound> layers;  // layers[i-1] is layer i
    // true when every layer 1..upto satisfies its hypotheses (upto=0 means all)
    bool holds_through(std::size_t upto = 0) const;
};

std::vector<bool> check_uniqueness(const std::vector<LayerStats>& stats);
// Throws std::domain_error naming the first layer with a nonpositive denominator.
std::vector<double> global_stability_bounds(const std::vector<LayerStats>& stats, double E0);
TheoremReport global_stability_report(const std::vector<LayerStats>& stats, double E0);

// beta interval (S mu max + eps, min - (S-1) mu max - eps); midpoint chosen, clamped at 0.
TheoremReport hard_stability(const std::vector<LayerStats>& stats, double eps0);
// explicit thresholds; eps_i does not depend on them, admissibility does
TheoremReport hard_stability(const std::vector<LayerStats>& stats, double eps0, const std::vector<double>& betas);
TheoremReport soft_stability(const std::vector<LayerStats>& stats, double eps0, const std::vector<double>& betas);
TheoremReport soft_stability(const std::vector<LayerStats>& stats, double eps0);  // midpoint betas
TheoremReport bp_check_and_bounds(const std::vector<LayerStats>& stats, double eps0);

struct PropagationBound {
    std::vector<std::size_t> bounds;  // bounds[i-1] bounds |G_i|^P_{0,inf}
    std::vector<double> ratios;       // stripe_len / patch_len of G_i
};
PropagationBound l0inf_propagation(const ModelStack& model, std::size_t deepest_l0inf);

// One row per layer.
std::string report_csv(const TheoremReport& r, bool header = true);

}  // namespace mlcsc
