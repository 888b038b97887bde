// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failing criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "mlcsc/experiment.hpp"
#include "mlcsc/pursuit.hpp"
#include "oracle.hpp"

using namespace mlcsc;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
    if (!cond && o.pass) {
        o.pass = false;
        o.detail = what;
    }
}

LayerStats st(std::size_t s, std::size_t p, double gmin, double gmax, double mu) {
    LayerStats L;
    L.l0inf_stripe = s;
    L.l0inf_patch = p;
    L.gamma_min_abs = gmin;
    L.gamma_max_abs = gmax;
    L.mu = mu;
    return L;
}

bool close12(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// realization,layer -> record for one algorithm
using Index = std::map<std::pair<std::uint64_t, std::size_t>, const RunRecord*>;
Index index_of(const std::vector<RunRecord>& recs, Algorithm a) {
    Index ix;
    for (auto& r : recs)
        if (r.algorithm == a) ix[{r.realization, r.layer}] = &r;
    return ix;
}

Outcome c1() {
    Outcome o;
    for (double beta : {0.0, 0.5, 2.0})
        for (int k = 0; k <= 10000; ++k) {
            double z = -10.0 + 20.0 * k / 10000.0;
            require(o, soft_nonneg(z, beta) == relu(z - beta), "soft_nonneg != relu(z-beta)");
            double hs = std::abs(z) > beta ? z : 0.0;
            double ss = std::abs(z) > beta ? (z > 0 ? 1.0 : -1.0) * (std::abs(z) - beta) : 0.0;
            require(o, hard(z, beta) == hs, "hard closed form");
            require(o, soft(z, beta) == ss, "soft closed form");
        }
    o.detail = o.pass ? "30003 grid points" : o.detail;
    return o;
}

Outcome c2() {
    Outcome o;
    std::mt19937_64 g(20);
    std::size_t count = 0;
    double worst = 0;
    for (int rep = 0; rep < 2; ++rep)
    for (std::size_t n : {1, 2, 3, 5, 7})
        for (std::size_t s : {1, 2, 3})
            for (std::size_t m : {1, 2}) {
                std::size_t mprev = 1 + g() % 2;
                std::size_t stripe = 2 * ((n + s - 1) / s) - 1;
                std::size_t in_len = stripe + g() % 6;
                if (in_len * s > 64 || in_len * m > 64 || in_len * m < 2) continue;
                auto filters = oracle::random_filters(g, m, n * mprev);
                ConvDictionary d(LocalFilterBank::normalized(filters), in_len, s, mprev);
                Eigen::MatrixXd D = oracle::dense_dictionary(d.bank().filters, in_len, s, mprev);
                auto gm = oracle::random_vector(g, d.in_geom().size(), 0.5);
                auto y = oracle::random_vector(g, d.out_geom().size());
                auto syn = synthesize(d, LayeredVector(gm, d.in_geom()));
                auto ana = analyze(d, LayeredVector(y, d.out_geom()));
                double e1 = oracle::rel_diff(oracle::to_eigen(syn.data), D * oracle::to_eigen(gm));
                double e2 = oracle::rel_diff(oracle::to_eigen(ana.data), D.transpose() * oracle::to_eigen(y));
                double mu = mutual_coherence(d), mud = oracle::dense_coherence(D);
                double e3 = std::abs(mu - mud) / std::max(mud, 1e-300);
                if (mud == 0.0) e3 = std::abs(mu);
                // stripe identity at every aligned position
                auto rel = d.relabeled(d.in_geom().patch_len, d.in_geom().stripe_len);
                Eigen::MatrixXd Om = stripe_dictionary(rel);
                LayeredVector gv(gm, rel.in_geom()), xv = synthesize(rel, gv);
                double e4 = 0;
                for (std::size_t j = 0; j < in_len; ++j) {
                    auto p = extract_patch(xv, j * s);
                    auto stp = extract_stripe(gv, j);
                    e4 = std::max(e4, oracle::rel_diff(oracle::to_eigen(p), Om * oracle::to_eigen(stp)));
                }
                worst = std::max({worst, e1, e2, e3, e4});
                ++count;
            }
    require(o, count >= 50, "fewer than 50 dictionaries: " + std::to_string(count));
    require(o, worst <= 1e-10, "max relative deviation " + fmt("%.3g", worst));
    if (o.pass) o.detail = std::to_string(count) + " dictionaries, max rel dev " + fmt("%.2g", worst);
    return o;
}

ExperimentResult noiseless_run() {
    auto spec = ExperimentSpec::preset_named("noiseless_k3");
    spec.algorithms = {Algorithm::LayeredHard, Algorithm::LayeredSoft, Algorithm::LayeredBP};
    spec.realizations = 100;
    return run_experiment(spec);
}

Outcome c3(const ExperimentResult& res) {
    Outcome o;
    std::size_t held_real = 0;
    std::vector<double> snr_sum(3, 0.0);
    std::vector<std::size_t> snr_n(3, 0);
    for (auto alg : {Algorithm::LayeredHard, Algorithm::LayeredSoft}) {
        auto ix = index_of(res.records, alg);
        for (std::uint64_t r = 0; r < 100; ++r) {
            bool held = true;
            for (std::size_t i = 1; i <= 3; ++i) held = held && ix.at({r, i})->conditions_held;
            if (!held) continue;
            if (alg == Algorithm::LayeredHard) ++held_real;
            for (std::size_t i = 1; i <= 3; ++i) {
                auto* rec = ix.at({r, i});
                require(o, rec->support_exact, to_string(alg) + " support miss r=" + std::to_string(r));
                require(o, rec->bound_ok, to_string(alg) + " bound violation r=" + std::to_string(r));
                if (alg == Algorithm::LayeredSoft && std::isfinite(rec->empirical_snr_db)) {
                    snr_sum[i - 1] += rec->empirical_snr_db;
                    ++snr_n[i - 1];
                }
            }
        }
    }
    require(o, held_real > 0, "no theorem-satisfying realizations");
    std::vector<double> mean(3);
    for (int i = 0; i < 3; ++i) mean[i] = snr_n[i] ? snr_sum[i] / snr_n[i] : NAN;
    require(o, mean[0] > mean[1] && mean[1] > mean[2], "soft SNR not decreasing with depth");
    if (o.pass)
        o.detail = std::to_string(held_real) + "/100 satisfy hypotheses; soft mean SNR " + fmt("%.1f", mean[0]) + " > " +
                   fmt("%.1f", mean[1]) + " > " + fmt("%.1f", mean[2]) + " dB";
    return o;
}

Outcome c4(const ExperimentResult& res) {
    Outcome o;
    std::size_t held = 0;
    double worst = 0;
    for (auto& rec : res.records) {
        if (rec.algorithm != Algorithm::LayeredBP || !rec.conditions_held) continue;
        ++held;
        require(o, rec.support_exact, "BP support miss r=" + std::to_string(rec.realization));
        require(o, rec.rel_err_l2 < 1e-6, "BP rel err " + fmt("%.3g", rec.rel_err_l2));
        worst = std::max(worst, rec.rel_err_l2);
    }
    require(o, held > 0, "no records satisfying the BP condition");
    if (o.pass) o.detail = std::to_string(held) + " layer records, max rel l2 err " + fmt("%.2g", worst);
    return o;
}

Outcome c5() {
    Outcome o;
    auto spec = ExperimentSpec::preset_named("noisy_k2");
    spec.algorithms = {Algorithm::LayeredHard, Algorithm::LayeredSoft, Algorithm::LayeredBP};
    auto res = run_experiment(spec);
    double worst_snr = 0;
    for (double s : res.snr_global_db) worst_snr = std::max(worst_snr, std::abs(s - 68.53));
    require(o, worst_snr <= 0.2, "input SNR off by " + fmt("%.3g", worst_snr));
    std::size_t held = 0;
    for (auto& rec : res.records) {
        if (!rec.conditions_held) continue;
        ++held;
        require(o, record_passes(rec), to_string(rec.algorithm) + " fails at r=" + std::to_string(rec.realization) +
                                           " layer " + std::to_string(rec.layer));
    }
    require(o, held > 0, "no theorem-satisfying records");
    if (o.pass)
        o.detail = std::to_string(held) + "/" + std::to_string(res.records.size()) +
                   " records satisfy hypotheses, 0 violations, SNR dev " + fmt("%.2g", worst_snr) + " dB";
    return o;
}

Outcome c6() {
    Outcome o;
    auto spec = ExperimentSpec::preset_named("bp_k5");
    spec.algorithms = {Algorithm::LayeredBP, Algorithm::LayeredHard, Algorithm::LayeredSoft};
    spec.realizations = 20;
    auto res = run_experiment(spec);
    require(o, res.records.empty() || res.stats.front().size() == 5, "depth");
    std::size_t bp_held = 0;
    for (auto& rec : res.records)
        if (rec.algorithm == Algorithm::LayeredBP) {
            require(o, rec.conditions_held, "BP condition fails r=" + std::to_string(rec.realization));
            require(o, rec.support_contained && rec.bound_ok,
                    "BP fails r=" + std::to_string(rec.realization) + " layer " + std::to_string(rec.layer));
            bp_held += rec.conditions_held;
        }
    for (auto alg : {Algorithm::LayeredHard, Algorithm::LayeredSoft}) {
        auto ix = index_of(res.records, alg);
        for (std::uint64_t r = 0; r < 20; ++r) {
            bool any_fail = false;
            for (std::size_t i = 1; i <= 5; ++i) any_fail = any_fail || !ix.at({r, i})->support_exact;
            require(o, any_fail, to_string(alg) + " unexpectedly recovered every support, r=" + std::to_string(r));
        }
    }
    if (o.pass) o.detail = "BP holds on " + std::to_string(bp_held) + "/100 layer records; thresholding fails on all 20";
    return o;
}

Outcome c7() {
    Outcome o;
    require(o, check_uniqueness({st(5, 5, 1, 1, 0.1), st(6, 6, 1, 1, 0.1), st(1, 1, 1, 1, 1.0)}) ==
                   std::vector<bool>{true, false, false},
            "uniqueness");
    require(o, global_stability_bounds({st(2, 2, 1, 1, 0.1)}, 0.0)[0] == 0.0, "E0=0");
    auto E = global_stability_bounds({st(2, 2, 1, 1, 0.1), st(2, 2, 1, 1, 0.1)}, 0.1);
    require(o, close12(E[0], std::sqrt(0.04 / 0.7)) && close12(E[1], E[0] * 2 / std::sqrt(0.7)), "E recursion");
    auto h = hard_stability({st(4, 4, 1, 1, 0.05)}, 0.0).layers[0];
    require(o, close12(h.beta_lo, 0.2) && close12(h.beta_hi, 0.85), "hard beta interval");
    require(o, close12(hard_stability({st(3, 2, 1, 1, 0.01)}, 0.0).layers[0].eps, std::sqrt(2.0) * 0.02), "hard eps");
    require(o, hard_stability({st(1, 1, 1, 1, 0.7)}, 0.0).layers[0].eps == 0.0, "single spike");
    require(o, close12(soft_stability({st(3, 2, 1, 1, 0.01)}, 0.0, {0.3}).layers[0].eps, std::sqrt(2.0) * 0.32),
            "soft eps");
    auto bp = bp_check_and_bounds({st(4, 4, 1, 1, 0.01)}, 0.1).layers[0];
    require(o, close12(bp.param, 0.4) && close12(bp.eps, 1.5), "bp eps/xi");
    require(o, !bp_check_and_bounds({st(2, 2, 1, 1, 0.2)}, 0.0).layers[0].condition &&
                   bp_check_and_bounds({st(1, 1, 1, 1, 0.2)}, 0.0).layers[0].condition,
            "bp strictness");

    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> u(0, 1);
    auto rs = [&] {
        std::size_t s = 1 + g() % 12;
        double gmax = 0.1 + 3 * u(g);
        return st(s, 1 + g() % s, gmax * (0.05 + 0.95 * u(g)), gmax, 1e-4 + 0.2 * u(g));
    };
    for (int k = 0; k < 10000 && o.pass; ++k) {
        std::vector<LayerStats> s{rs(), rs()};
        double e0 = 0.3 * u(g), e1 = e0 + 0.3 * u(g);
        std::vector<double> b{u(g), u(g)};
        auto ha = hard_stability(s, e0), hb = hard_stability(s, e1);
        auto sa = soft_stability(s, e0, b), sb = soft_stability(s, e1, b);
        auto pa = bp_check_and_bounds(s, e0), pb = bp_check_and_bounds(s, e1);
        auto s0 = soft_stability(s, e0, {0.0, 0.0});
        for (std::size_t i = 0; i < 2; ++i) {
            require(o, hb.layers[i].eps >= ha.layers[i].eps && sb.layers[i].eps >= sa.layers[i].eps &&
                           pb.layers[i].eps >= pa.layers[i].eps,
                    "eps not monotone in eps0");
            require(o, (hb.layers[i].beta_hi - hb.layers[i].beta_lo) <= (ha.layers[i].beta_hi - ha.layers[i].beta_lo) + 1e-12,
                    "interval grew with eps0");
            require(o, ha.layers[i].eps < sa.layers[i].eps || b[i] == 0.0, "hard not below soft");
            require(o, s0.layers[i].eps == ha.layers[i].eps, "soft(beta=0) != hard");
        }
    }
    if (o.pass) o.detail = "hand values to 1e-12, 10000 random draws";
    return o;
}

Outcome c8() {
    Outcome o;
    auto model = build_model(GenConfig::defaults(3));
    double mu1 = mutual_coherence(model.layer(1)), mu2 = mutual_coherence(model.layer(2));
    require(o, mu1 >= 1e-4 && mu1 <= 1e-3, "mu(D1) = " + fmt("%.3g", mu1));
    require(o, mu2 >= 1e-3 && mu2 <= 2e-2, "mu(D2) = " + fmt("%.3g", mu2));
    if (o.pass) o.detail = "mu(D1) = " + fmt("%.3e", mu1) + ", sparse filter mu = " + fmt("%.3e", mu2);
    return o;
}

ModelStack random_stack(std::mt19937_64& g) {
    std::size_t m1 = 1 + g() % 2, m2 = 1 + g() % 2, s1 = 1 + g() % 3, s2 = 1 + g() % 2;
    std::size_t n2 = 2 + g() % 3, L2 = 6 + g() % 6;
    std::size_t L1 = L2 * s2, n1 = std::max<std::size_t>(s1, 2 + g() % 4);
    ConvDictionary d1(LocalFilterBank::normalized(oracle::random_filters(g, m1, n1)), L1, s1);
    ConvDictionary d2(LocalFilterBank::normalized(oracle::random_filters(g, m2, n2 * m1)), L2, s2, m1);
    return ModelStack({d1, d2});
}

Outcome c9() {
    Outcome o;
    std::mt19937_64 g(9);
    for (int k = 0; k < 20; ++k) {
        auto ms = random_stack(g);
        LayeredVector x(oracle::random_vector(g, ms.geom(0).size()), ms.geom(0));
        std::uniform_real_distribution<double> u(0, 0.5);
        std::vector<double> xi{u(g), u(g)};
        auto a = layered_ist(ms, x, {IstConfig{xi[0], 1.0, 1, 1e-8}, IstConfig{xi[1], 1.0, 1, 1e-8}});
        auto b = layered_threshold(ms, x, {ThresholdKind::Soft, xi});
        for (std::size_t i = 0; i <= 2; ++i) require(o, a.reps[i].data == b.reps[i].data, "not bit-identical");
    }
    if (o.pass) o.detail = "20 instances bit-identical";
    return o;
}

Outcome c10() {
    Outcome o;
    std::mt19937_64 g(10);
    std::size_t total_iters = 0;
    for (int k = 0; k < 50; ++k) {
        auto ms = random_stack(g);
        const auto& d = ms.layer(1);
        LayeredVector y(oracle::random_vector(g, d.out_geom().size()), d.out_geom());
        double xi = 0.05 + 0.5 * std::uniform_real_distribution<double>(0, 1)(g) * max_abs(analyze(d, y).data);
        auto cfg = IstConfig::for_dictionary(d, xi, {}, 20000, 1e-12);
        auto res = ist_solve(d, y, cfg, ThresholdKind::Soft, nullptr, true);
        total_iters += res.iterations;
        for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
            require(o, res.objective_trace[t] <= res.objective_trace[t - 1] + 1e-12, "objective increased");
        auto dg = synthesize(d, res.gamma);
        LayeredVector r(d.out_geom());
        for (std::size_t t = 0; t < r.size(); ++t) r.data[t] = y.data[t] - dg.data[t];
        auto corr = analyze(d, r);
        for (std::size_t t = 0; t < corr.size(); ++t) {
            double gt = res.gamma.data[t];
            double tol = 1e-6 * xi;
            if (gt != 0.0)
                require(o, std::abs(corr.data[t] - xi * (gt > 0 ? 1 : -1)) <= tol, "stationarity on support");
            else
                require(o, std::abs(corr.data[t]) <= xi + tol, "stationarity off support");
        }
        // fixed point of one more IST step
        LayeredVector step(res.gamma);
        for (std::size_t t = 0; t < step.size(); ++t) step.data[t] = soft(res.gamma.data[t] + corr.data[t] / cfg.c, xi / cfg.c);
        double diff = 0;
        for (std::size_t t = 0; t < step.size(); ++t) diff = std::max(diff, std::abs(step.data[t] - res.gamma.data[t]));
        require(o, diff <= 1e-8 * std::max(1.0, max_abs(res.gamma.data)), "not a fixed point");
    }
    if (o.pass) o.detail = "50 problems, " + std::to_string(total_iters) + " iterations total";
    return o;
}

}  // namespace

int main() {
    int failures = 0;
    auto run = [&](int id, const std::function<Outcome()>& f) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), sec);
        std::fflush(stdout);
        failures += !o.pass;
    };
    run(1, c1);
    run(2, c2);
    ExperimentResult noiseless;
    run(3, [&] {
        noiseless = noiseless_run();
        return c3(noiseless);
    });
    run(4, [&] { return c4(noiseless); });
    run(5, c5);
    run(6, c6);
    run(7, c7);
    run(8, c8);
    run(9, c9);
    run(10, c10);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
