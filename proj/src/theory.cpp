#include "mlcsc/theory.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mlcsc {

std::string to_string(Theorem t) {
    switch (t) {
        case Theorem::GlobalStability: return "global_stability";
        case Theorem::HardThresholding: return "layered_hard";
        case Theorem::SoftThresholding: return "layered_soft";
        case Theorem::LayeredBP: return "layered_bp";
    }
    return "?";
}

bool TheoremReport::holds_through(std::size_t upto) const {
    std::size_t n = (upto == 0 || upto > layers.size()) ? layers.size() : upto;
    for (std::size_t i = 0; i < n; ++i)
        if (!layers[i].holds()) return false;
    return true;
}

std::vector<bool> check_uniqueness(const std::vector<LayerStats>& stats) {
    std::vector<bool> out;
    for (const auto& s : stats) out.push_back(static_cast<double>(s.l0inf_stripe) < 0.5 * (1.0 + 1.0 / s.mu));
    return out;
}

std::vector<double> global_stability_bounds(const std::vector<LayerStats>& stats, double E0) {
    if (!(E0 >= 0.0)) throw std::invalid_argument("E0 must be >= 0");
    std::vector<double> E;
    double prev = E0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        double denom = 1.0 - (2.0 * static_cast<double>(s.l0inf_stripe) - 1.0) * s.mu;
        if (!(denom > 0.0))
            throw std::domain_error("global stability: layer " + std::to_string(i + 1) +
                                    " violates the uniqueness condition (nonpositive denominator)");
        prev = std::sqrt(4.0 * prev * prev / denom);
        E.push_back(prev);
    }
    return E;
}

TheoremReport global_stability_report(const std::vector<LayerStats>& stats, double E0) {
    TheoremReport r;
    r.theorem = Theorem::GlobalStability;
    r.eps0 = E0;
    auto uniq = check_uniqueness(stats);
    double prev = E0;
    bool ok = true;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        LayerBound b;
        b.condition = uniq[i];
        ok = ok && uniq[i];
        if (ok) {
            double denom = 1.0 - (2.0 * static_cast<double>(stats[i].l0inf_stripe) - 1.0) * stats[i].mu;
            prev = std::sqrt(4.0 * prev * prev / denom);
            b.eps = prev;
        } else {
            b.eps = std::numeric_limits<double>::infinity();
        }
        r.layers.push_back(b);
    }
    return r;
}

namespace {

// shared by hard and soft: interval and condition from eps_{i-1}
LayerBound thresholding_layer(const LayerStats& s, double eps_prev) {
    LayerBound b;
    const double S = static_cast<double>(s.l0inf_stripe);
    b.beta_lo = S * s.mu * s.gamma_max_abs + eps_prev;
    b.beta_hi = s.gamma_min_abs - (S - 1.0) * s.mu * s.gamma_max_abs - eps_prev;
    // the interval is nonempty exactly when the sparsity condition holds
    b.condition = s.nonzero() && b.beta_lo < b.beta_hi;
    return b;
}

double midpoint(const LayerBound& b) { return std::max(0.0, 0.5 * (b.beta_lo + b.beta_hi)); }

double leak(const LayerStats& s) {
    double S1 = s.l0inf_stripe > 0 ? static_cast<double>(s.l0inf_stripe) - 1.0 : 0.0;
    return s.mu * S1 * s.gamma_max_abs;
}

void check_eps0(double eps0) {
    if (!(eps0 >= 0.0) || !std::isfinite(eps0)) throw std::invalid_argument("eps0 must be finite and >= 0");
}

TheoremReport soft_impl(const std::vector<LayerStats>& stats, double eps0, const std::vector<double>* betas) {
    check_eps0(eps0);
    if (betas && betas->size() != stats.size()) throw std::invalid_argument("soft_stability: one beta per layer");
    TheoremReport r;
    r.theorem = Theorem::SoftThresholding;
    r.eps0 = eps0;
    double prev = eps0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        LayerBound b = thresholding_layer(s, prev);
        b.param = betas ? (*betas)[i] : midpoint(b);
        b.param_admissible = b.param > b.beta_lo && b.param < b.beta_hi;
        b.eps = std::sqrt(static_cast<double>(s.l0inf_patch)) * (prev + leak(s) + b.param);
        prev = b.eps;
        r.layers.push_back(b);
    }
    return r;
}

}  // namespace

TheoremReport hard_stability(const std::vector<LayerStats>& stats, double eps0) {
    check_eps0(eps0);
    TheoremReport r;
    r.theorem = Theorem::HardThresholding;
    r.eps0 = eps0;
    double prev = eps0;
    for (const auto& s : stats) {
        LayerBound b = thresholding_layer(s, prev);
        b.param = midpoint(b);
        b.param_admissible = b.param > b.beta_lo && b.param < b.beta_hi;
        b.eps = std::sqrt(static_cast<double>(s.l0inf_patch)) * (prev + leak(s));
        prev = b.eps;
        r.layers.push_back(b);
    }
    return r;
}

TheoremReport hard_stability(const std::vector<LayerStats>& stats, double eps0, const std::vector<double>& betas) {
    if (betas.size() != stats.size()) throw std::invalid_argument("hard_stability: one beta per layer");
    TheoremReport r = hard_stability(stats, eps0);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        auto& b = r.layers[i];
        b.param = betas[i];
        b.param_admissible = b.param > b.beta_lo && b.param < b.beta_hi;
    }
    return r;
}

TheoremReport soft_stability(const std::vector<LayerStats>& stats, double eps0, const std::vector<double>& betas) {
    return soft_impl(stats, eps0, &betas);
}

TheoremReport soft_stability(const std::vector<LayerStats>& stats, double eps0) {
    return soft_impl(stats, eps0, nullptr);
}

TheoremReport bp_check_and_bounds(const std::vector<LayerStats>& stats, double eps0) {
    check_eps0(eps0);
    TheoremReport r;
    r.theorem = Theorem::LayeredBP;
    r.eps0 = eps0;
    double prev = eps0;
    for (const auto& s : stats) {
        LayerBound b;
        const double S = static_cast<double>(s.l0inf_stripe);
        b.condition = s.nonzero() && S < (1.0 + 1.0 / s.mu) / 3.0;
        b.exact_recovery = s.nonzero() && S < 0.5 * (1.0 + 1.0 / s.mu);
        b.param = 4.0 * prev;
        const double rootP = std::sqrt(static_cast<double>(s.l0inf_patch));
        b.eps = prev * 7.5 * rootP;
        b.recoverable = rootP > 0.0 ? b.eps / rootP : 0.0;
        b.beta_lo = b.beta_hi = 0.0;
        prev = b.eps;
        r.layers.push_back(b);
    }
    return r;
}

PropagationBound l0inf_propagation(const ModelStack& model, std::size_t deepest_l0inf) {
    const std::size_t K = model.depth();
    PropagationBound p;
    p.bounds.assign(K, 0);
    p.ratios.assign(K, 0.0);
    std::size_t acc = deepest_l0inf;
    for (std::size_t i = K; i >= 1; --i) {
        p.bounds[i - 1] = acc;
        const auto& g = model.geom(i);
        p.ratios[i - 1] = static_cast<double>(g.stripe_len) / static_cast<double>(g.patch_len);
        acc *= induced_l0(model.layer(i));
    }
    return p;
}

std::string report_csv(const TheoremReport& r, bool header) {
    std::ostringstream os;
    if (header) os << "layer,theorem,condition,param_admissible,beta_lo,beta_hi,param,eps,recoverable,exact_recovery\n";
    for (std::size_t i = 0; i < r.layers.size(); ++i) {
        const auto& b = r.layers[i];
        os << (i + 1) << ',' << to_string(r.theorem) << ',' << int(b.condition) << ',' << int(b.param_admissible)
           << ',' << format_double(b.beta_lo) << ',' << format_double(b.beta_hi) << ',' << format_double(b.param)
           << ',' << format_double(b.eps) << ',' << format_double(b.recoverable) << ',' << int(b.exact_recovery)
           << '\n';
    }
    return os.str();
}

}  // namespace mlcsc
