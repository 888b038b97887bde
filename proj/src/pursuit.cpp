#include "mlcsc/pursuit.hpp"

#include <cmath>
#include <stdexcept>

namespace mlcsc {

void IstConfig::validate() const {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw std::invalid_argument("IstConfig: xi must be finite and >= 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("IstConfig: c must be finite and > 0");
    if (max_iters == 0) throw std::invalid_argument("IstConfig: max_iters must be positive");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("IstConfig: rel_tol must be positive");
}

IstConfig IstConfig::for_dictionary(const ConvDictionary& d, double xi, std::optional<double> c,
                                    std::size_t max_iters, double rel_tol) {
    const double bound = gram_spectral_bound(d, 1e-6);
    IstConfig cfg{xi, c.value_or(bound), max_iters, rel_tol};
    if (!(cfg.c > 0.5 * bound))
        throw std::invalid_argument("IstConfig: c=" + format_double(cfg.c) + " does not exceed half the spectral bound " +
                                    format_double(bound));
    cfg.validate();
    return cfg;
}

namespace {

void check_ist_kind(ThresholdKind kind) {
    if (kind == ThresholdKind::Hard) throw std::invalid_argument("IST supports soft and soft_nonneg only");
}

double l1(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double residual_norm(const ConvDictionary& d, const LayeredVector& y, const LayeredVector& g) {
    LayeredVector r = synthesize(d, g);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        double e = y.data[k] - r.data[k];
        s += e * e;
    }
    return std::sqrt(s);
}

}  // namespace

double lasso_objective(const ConvDictionary& d, const LayeredVector& y, const LayeredVector& gamma, double xi) {
    double r = residual_norm(d, y, gamma);
    return xi * l1(gamma.data) + 0.5 * r * r;
}

IstResult ist_solve(const ConvDictionary& d, const LayeredVector& y, const IstConfig& cfg, ThresholdKind kind,
                    const LayeredVector* init, bool trace) {
    cfg.validate();
    check_ist_kind(kind);
    if (y.geom.spatial_len != d.out_geom().spatial_len || y.geom.channels != d.out_geom().channels)
        throw std::invalid_argument("ist: data geometry does not match the dictionary output");
    IstResult res;
    res.gamma = init ? *init : LayeredVector(d.in_geom());
    if (res.gamma.size() != d.num_atoms()) throw std::invalid_argument("ist: initial iterate has wrong size");
    const double inv_c = 1.0 / cfg.c;
    const double thr = cfg.xi / cfg.c;
    const std::size_t n = res.gamma.size();
    LayeredVector resid(d.out_geom());
    auto objective_from = [&](const LayeredVector& r, const LayeredVector& g) {
        double s = 0.0;
        for (double e : r.data) s += e * e;
        return cfg.xi * l1(g.data) + 0.5 * s;
    };
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        LayeredVector dg = synthesize(d, res.gamma);
        for (std::size_t k = 0; k < resid.size(); ++k) resid.data[k] = y.data[k] - dg.data[k];
        if (trace) res.objective_trace.push_back(objective_from(resid, res.gamma));
        LayeredVector grad = analyze(d, resid);
        double diff2 = 0.0, norm2_new = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double z = res.gamma.data[k] + inv_c * grad.data[k];
            if (std::isnan(z)) throw std::runtime_error("ist: NaN encountered at iteration " + std::to_string(t));
            double g = apply_threshold(kind, z, thr);
            double dlt = g - res.gamma.data[k];
            diff2 += dlt * dlt;
            norm2_new += g * g;
            res.gamma.data[k] = g;
        }
        res.iterations = t;
        double denom = norm2_new > 0.0 ? std::sqrt(norm2_new) : 1.0;
        if (std::sqrt(diff2) / denom < cfg.rel_tol) {
            res.converged = true;
            break;
        }
    }
    LayeredVector dg = synthesize(d, res.gamma);
    for (std::size_t k = 0; k < resid.size(); ++k) resid.data[k] = y.data[k] - dg.data[k];
    res.objective = objective_from(resid, res.gamma);
    if (trace) res.objective_trace.push_back(res.objective);
    return res;
}

LayeredVector ist(const ConvDictionary& d, const LayeredVector& y, const IstConfig& cfg, ThresholdKind kind) {
    return ist_solve(d, y, cfg, kind).gamma;
}

IstResult bp_continuation(const ConvDictionary& d, const LayeredVector& y, double c, const ContinuationConfig& cc,
                          ThresholdKind kind) {
    if (!(cc.factor > 1.0) || !(cc.floor_rel > 0.0)) throw std::invalid_argument("bad continuation schedule");
    LayeredVector corr = analyze(d, y);
    const double top = max_abs(corr.data);
    IstResult res;
    res.gamma = LayeredVector(d.in_geom());
    res.converged = true;
    if (top == 0.0) return res;
    const double floor = cc.floor_rel * top;
    double xi = top / cc.factor;
    std::size_t total = 0;
    bool all_converged = true;
    for (;;) {
        IstConfig cfg{xi, c, cc.max_iters, cc.rel_tol};
        IstResult stage = ist_solve(d, y, cfg, kind, &res.gamma);
        total += stage.iterations;
        all_converged = all_converged && stage.converged;
        res.gamma = std::move(stage.gamma);
        res.objective = stage.objective;
        if (xi <= floor) break;
        xi = std::max(xi / cc.factor, floor);
    }
    res.iterations = total;
    res.converged = all_converged;
    return res;
}

std::vector<std::size_t> ist_support(const LayeredVector& g) {
    double top = max_abs(g.data);
    if (top == 0.0) return {};
    return support_of(g.data, 1e-6 * top);
}

namespace {
void check_input(const ModelStack& model, const LayeredVector& x) {
    const auto& g0 = model.geom(0);
    if (x.geom.spatial_len != g0.spatial_len || x.geom.channels != g0.channels)
        throw std::invalid_argument("pursuit: input signal does not match layer-0 geometry");
}
LayeredVector relabel(const LayeredVector& v, const LayerGeometry& g) { return LayeredVector(v.data, g); }
}  // namespace

PursuitResult layered_threshold(const ModelStack& model, const LayeredVector& x, const LayeredThreshConfig& cfg) {
    check_input(model, x);
    const std::size_t K = model.depth();
    if (cfg.betas.size() != K)
        throw std::invalid_argument("layered_threshold: need " + std::to_string(K) + " thresholds");
    PursuitResult r;
    r.reps.push_back(relabel(x, model.geom(0)));
    for (std::size_t i = 1; i <= K; ++i) {
        const auto& d = model.layer(i);
        LayeredVector g = analyze(d, r.reps[i - 1]);
        threshold_inplace(cfg.kind, g.data, cfg.betas[i - 1]);
        LayerOutcome o;
        o.support = support_of(g.data);
        o.iterations = 1;
        o.param = cfg.betas[i - 1];
        o.residual_norm = residual_norm(d, r.reps[i - 1], g);
        o.objective = 0.5 * o.residual_norm * o.residual_norm;
        r.layers.push_back(std::move(o));
        r.reps.push_back(std::move(g));
    }
    return r;
}

RepStack forward_pass(const ModelStack& model, const LayeredVector& x, const std::vector<double>& biases) {
    check_input(model, x);
    if (biases.size() != model.depth()) throw std::invalid_argument("forward_pass: one bias per layer");
    RepStack out;
    out.push_back(relabel(x, model.geom(0)));
    for (std::size_t i = 1; i <= model.depth(); ++i) {
        LayeredVector a = analyze(model.layer(i), out.back());
        for (double& v : a.data) v = relu(v + biases[i - 1]);
        out.push_back(std::move(a));
    }
    return out;
}

PursuitResult layered_ist(const ModelStack& model, const LayeredVector& x, const std::vector<IstConfig>& cfgs,
                          ThresholdKind kind) {
    check_input(model, x);
    const std::size_t K = model.depth();
    if (cfgs.size() != K) throw std::invalid_argument("layered_ist: need one IstConfig per layer");
    PursuitResult r;
    r.reps.push_back(relabel(x, model.geom(0)));
    for (std::size_t i = 1; i <= K; ++i) {
        const auto& d = model.layer(i);
        IstResult s = ist_solve(d, r.reps[i - 1], cfgs[i - 1], kind);
        LayerOutcome o;
        o.support = ist_support(s.gamma);
        o.iterations = s.iterations;
        o.objective = s.objective;
        o.converged = s.converged;
        o.param = cfgs[i - 1].xi;
        o.residual_norm = residual_norm(d, r.reps[i - 1], s.gamma);
        r.layers.push_back(std::move(o));
        r.reps.push_back(std::move(s.gamma));
    }
    return r;
}

PursuitResult layered_bp_noiseless(const ModelStack& model, const LayeredVector& x, const std::vector<double>& cs,
                                   const ContinuationConfig& cc, ThresholdKind kind) {
    check_input(model, x);
    const std::size_t K = model.depth();
    if (cs.size() != K) throw std::invalid_argument("layered_bp_noiseless: need one step constant per layer");
    PursuitResult r;
    r.reps.push_back(relabel(x, model.geom(0)));
    for (std::size_t i = 1; i <= K; ++i) {
        const auto& d = model.layer(i);
        IstResult s = bp_continuation(d, r.reps[i - 1], cs[i - 1], cc, kind);
        LayerOutcome o;
        o.support = ist_support(s.gamma);
        o.iterations = s.iterations;
        o.objective = s.objective;
        o.converged = s.converged;
        o.param = cc.floor_rel * max_abs(analyze(d, r.reps[i - 1]).data);
        o.residual_norm = residual_norm(d, r.reps[i - 1], s.gamma);
        r.layers.push_back(std::move(o));
        r.reps.push_back(std::move(s.gamma));
    }
    return r;
}

std::vector<DcpLayerCheck> check_dcp_feasible(const ModelStack& model, const RepStack& reps,
                                              const std::vector<std::size_t>& lambdas,
                                              const std::vector<double>& eps) {
    const std::size_t K = model.depth();
    if (reps.size() != K + 1 || lambdas.size() != K || eps.size() != K)
        throw std::invalid_argument("check_dcp_feasible: expected K+1 representations and K lambdas/eps");
    std::vector<DcpLayerCheck> out(K);
    for (std::size_t i = 1; i <= K; ++i) {
        LayeredVector g(reps[i].data, model.geom(i));
        out[i - 1].residual_ok = residual_norm(model.layer(i), reps[i - 1], g) <= eps[i - 1];
        out[i - 1].sparsity_ok = norm_l0inf_stripe(g) <= lambdas[i - 1];
    }
    return out;
}

}  // namespace mlcsc
