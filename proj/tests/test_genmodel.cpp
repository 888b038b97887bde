#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mlcsc/genmodel.hpp"
#include "mlcsc/pursuit.hpp"
#include "mlcsc/theory.hpp"

using namespace mlcsc;
namespace fs = std::filesystem;

TEST_CASE("sparse filter generation") {
    CounterRng rng(1, 0, Purpose::FilterSelection);
    auto one = gen_sparse_filter(1, 1, {1}, rng);
    CHECK(one == std::vector<double>{1.0});
    for (int k = 0; k < 50; ++k) {
        auto f = gen_sparse_filter(20, 7, nonzero_values(8), rng);
        CHECK(f.size() == 20);
        CHECK(count_nonzeros(f) == 7);
        CHECK(norm2(f) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CounterRng a(5, 3, Purpose::FilterSelection), b(5, 3, Purpose::FilterSelection);
    CHECK(gen_sparse_filter(20, 7, nonzero_values(8), a) == gen_sparse_filter(20, 7, nonzero_values(8), b));
    CHECK_THROWS(gen_sparse_filter(3, 4, {1}, rng));
    CHECK_THROWS(gen_sparse_filter(3, 2, {0, 1}, rng));
    CHECK(nonzero_values(2) == std::vector<int>{-2, -1, 1, 2});
}

TEST_CASE("coherence selection is an argmin") {
    RandomFilterSpec spec;
    spec.candidates = 30;
    auto factory = [](LocalFilterBank b) { return ConvDictionary(std::move(b), 100, 6); };
    CounterRng rng(2017, 0, Purpose::FilterSelection);
    auto sel = select_filter_by_coherence(spec, 1, factory, rng);
    CHECK(sel.all_mu.size() == 30);
    for (double m : sel.all_mu)
        if (m > 1e-12) CHECK(sel.mu <= m);
    CHECK(sel.mu == mutual_coherence(factory(sel.bank)));
    spec.candidates = 1;
    CounterRng r1(3, 0, Purpose::FilterSelection), r2(3, 0, Purpose::FilterSelection);
    auto s1 = select_filter_by_coherence(spec, 1, factory, r1);
    auto f = gen_sparse_filter(20, 7, nonzero_values(8), r2);
    CHECK(s1.bank.filters[0] == f);
}

TEST_CASE("default lengths") {
    auto m3 = build_model(GenConfig::defaults(3));
    CHECK(m3.geom(3).size() == 100);
    CHECK(m3.geom(2).size() == 600);
    CHECK(m3.geom(1).size() == 3600);
    CHECK(m3.geom(0).size() == 21600);
    CHECK(m3.layer(1).bank().filters[0] == builtin_dmey29());
    auto cfg5 = GenConfig::defaults(5);
    auto m5 = build_model(cfg5);
    CHECK(m5.geom(0).size() == 777600);
}

TEST_CASE("shipped Meyer filter") {
    const auto& f = builtin_dmey29();
    CHECK(f.size() == 29);
    CHECK(norm2(f) == doctest::Approx(1.0).epsilon(1e-14));
    // highpass: taps sum to roughly zero
    double sum = 0;
    for (double v : f) sum += v;
    CHECK(std::abs(sum) < 0.1);
}

TEST_CASE("realizations: invariants and reproducibility") {
    auto cfg = GenConfig::defaults(3);
    auto model = std::make_shared<const ModelStack>(build_model(cfg));
    auto r = sample_realization(model, cfg, 4);
    auto r2 = sample_realization(model, cfg, 4);
    for (std::size_t i = 0; i <= 3; ++i) CHECK(r.reps[i].data == r2.reps[i].data);
    CHECK(r.y.data == r.x().data);
    CHECK(r.eps0_local == 0.0);
    for (std::size_t i = 1; i <= 3; ++i) {
        auto back = synthesize(model->layer(i), r.reps[i]);
        double e = 0;
        for (std::size_t k = 0; k < back.size(); ++k) e = std::max(e, std::abs(back.data[k] - r.reps[i - 1].data[k]));
        CHECK(e <= 1e-12);
    }
    auto nnz = count_nonzeros(r.reps[3].data);
    CHECK(nnz >= 20);
    CHECK(nnz <= 66);
    for (double v : r.reps[3].data) CHECK((v == 0.0 || std::abs(v) == 1.0));
    auto s = measure_stats(r);
    CHECK(s[2].gamma_min_abs == 1.0);
    CHECK(s[2].gamma_max_abs == 1.0);
    std::vector<std::size_t> lam;
    for (auto& L : s) lam.push_back(L.l0inf_stripe);
    for (auto& c : check_dcp_feasible(*model, r.reps, lam, {0.0, 0.0, 0.0})) CHECK(c.ok());
    auto prop = l0inf_propagation(*model, s[2].l0inf_patch);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s[i].l0inf_patch <= prop.bounds[i]);
    auto other = sample_realization(model, cfg, 5);
    CHECK(other.reps[3].data != r.reps[3].data);
}

TEST_CASE("noise calibration") {
    auto cfg = GenConfig::defaults(2);
    cfg.noise_snr_db = 68.53;
    auto model = std::make_shared<const ModelStack>(build_model(cfg));
    for (std::uint64_t k = 0; k < 5; ++k) {
        auto r = sample_realization(model, cfg, k);
        CHECK(std::abs(r.snr_global_db - 68.53) < 0.1);
        double e2 = 0;
        LayeredVector e(r.y.geom);
        for (std::size_t t = 0; t < e.size(); ++t) {
            e.data[t] = r.y.data[t] - r.x().data[t];
            e2 += e.data[t] * e.data[t];
        }
        CHECK(std::sqrt(e2) == doctest::Approx(r.noise_l2).epsilon(1e-12));
        CHECK(norm_l2inf_patch(e) == doctest::Approx(r.eps0_local).epsilon(1e-12));
    }
}

TEST_CASE("zero deepest layer gives undefined stats") {
    auto cfg = GenConfig::defaults(2);
    auto model = build_model(cfg);
    RepStack reps = propagate(model, LayeredVector(model.geom(2)));
    auto s = measure_stats(model, reps);
    CHECK_FALSE(s[1].nonzero());
    CHECK_FALSE(hard_stability(s, 0.0).layers[1].condition);
}

TEST_CASE("config manifest round trip and validation") {
    auto cfg = GenConfig::defaults(2);
    cfg.noise_snr_db = 50.0;
    cfg.seed = 99;
    auto m = gen_config_to_manifest(cfg);
    CHECK(m.at("gen.K") == "2");
    auto back = gen_config_from_manifest(m, ".");
    CHECK(back.seed == 99);
    CHECK(*back.noise_snr_db == 50.0);
    CHECK(back.strides == cfg.strides);
    auto bad = cfg;
    bad.l0_lo = 70;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("realization directory round trip") {
    auto cfg = GenConfig::defaults(2);
    cfg.noise_snr_db = 60.0;
    auto r = sample_realization(cfg, 1);
    auto dir = (fs::temp_directory_path() / "mlcsc_test_real").string();
    fs::remove_all(dir);
    save_realization(dir, r);
    CHECK(fs::exists(dir + "/stats.csv"));
    auto back = load_realization(dir);
    CHECK(back.y.data == r.y.data);
    for (std::size_t i = 0; i < r.reps.size(); ++i) CHECK(back.reps[i].data == r.reps[i].data);
    CHECK(back.eps0_local == r.eps0_local);
    fs::remove_all(dir);
    CHECK_THROWS(load_realization(dir));
}
