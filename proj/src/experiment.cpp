#include "mlcsc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace mlcsc {

namespace {
namespace fs = std::filesystem;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_bp(Algorithm a) { return a == Algorithm::LayeredBP || a == Algorithm::LayeredBPHandpicked; }
}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::LayeredHard: return "layered_hard";
        case Algorithm::LayeredSoft: return "layered_soft";
        case Algorithm::LayeredSoftOracle: return "layered_soft_oracle";
        case Algorithm::LayeredBP: return "layered_bp";
        case Algorithm::LayeredBPHandpicked: return "layered_bp_handpicked";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& s) {
    for (auto a : {Algorithm::LayeredHard, Algorithm::LayeredSoft, Algorithm::LayeredSoftOracle, Algorithm::LayeredBP,
                   Algorithm::LayeredBPHandpicked})
        if (to_string(a) == s) return a;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::vector<Algorithm> parse_algorithms(const std::string& csv) {
    std::vector<Algorithm> out;
    for (const auto& s : split_csv(csv)) out.push_back(parse_algorithm(s));
    return out;
}

ExperimentSpec ExperimentSpec::preset_named(const std::string& name) {
    ExperimentSpec s;
    s.preset = name;
    using A = Algorithm;
    if (name == "noiseless_k3") {
        s.gen = GenConfig::defaults(3);
        s.algorithms = {A::LayeredHard, A::LayeredSoft, A::LayeredSoftOracle, A::LayeredBP};
    } else if (name == "noisy_k2") {
        s.gen = GenConfig::defaults(2);
        s.gen.noise_snr_db = 68.53;
        s.algorithms = {A::LayeredHard, A::LayeredSoft, A::LayeredSoftOracle, A::LayeredBP, A::LayeredBPHandpicked};
    } else if (name == "bp_k5") {
        s.gen = GenConfig::defaults(5);
        s.gen.noise_snr_db = 124.43;
        s.algorithms = {A::LayeredBP, A::LayeredBPHandpicked, A::LayeredHard, A::LayeredSoft};
    } else if (name == "custom") {
        throw std::invalid_argument("preset 'custom' needs --config <manifest>");
    } else {
        throw std::invalid_argument("unknown preset '" + name + "' (noiseless_k3, noisy_k2, bp_k5, custom)");
    }
    return s;
}

ExperimentSpec ExperimentSpec::custom_from_manifest(const std::string& manifest_path) {
    ExperimentSpec s;
    s.preset = "custom";
    Manifest m = read_manifest(manifest_path);
    s.gen = gen_config_from_manifest(m, parent_dir(manifest_path));
    s.algorithms = {Algorithm::LayeredHard, Algorithm::LayeredSoft, Algorithm::LayeredBP};
    if (auto it = m.find("run.algorithms"); it != m.end()) s.algorithms = parse_algorithms(it->second);
    if (auto it = m.find("run.realizations"); it != m.end()) s.realizations = std::stoul(it->second);
    return s;
}

void ExperimentSpec::validate() const {
    gen.validate();
    if (realizations == 0) throw std::invalid_argument("experiment: realizations must be >= 1");
    if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms selected");
    if (!beta_override.empty() && beta_override.size() != gen.K)
        throw std::invalid_argument("experiment: --beta needs one value per layer");
    if (!xi_override.empty() && xi_override.size() != gen.K)
        throw std::invalid_argument("experiment: --xi needs one value per layer");
}

ModelContext ModelContext::build(std::shared_ptr<const ModelStack> model) {
    ModelContext c;
    c.model = std::move(model);
    c.mus = model_coherences(*c.model);
    for (std::size_t i = 1; i <= c.model->depth(); ++i) c.step_constants.push_back(gram_spectral_bound(c.model->layer(i)));
    return c;
}

AlgorithmRun theory_for(const Realization& r, const std::vector<LayerStats>& stats, Algorithm alg, const Overrides& ov) {
    AlgorithmRun run;
    run.algorithm = alg;
    const double eps0 = r.eps0_local;
    switch (alg) {
        case Algorithm::LayeredHard:
            run.report = ov.betas.empty() ? hard_stability(stats, eps0) : hard_stability(stats, eps0, ov.betas);
            break;
        case Algorithm::LayeredSoft:
            run.report = ov.betas.empty() ? soft_stability(stats, eps0) : soft_stability(stats, eps0, ov.betas);
            break;
        case Algorithm::LayeredSoftOracle:
            run.report = soft_stability(stats, eps0);
            run.theory_params = false;
            break;
        case Algorithm::LayeredBP:
            run.report = bp_check_and_bounds(stats, eps0);
            if (!ov.xis.empty()) {
                if (ov.xis.size() != stats.size()) throw std::invalid_argument("one xi per layer required");
                for (std::size_t i = 0; i < stats.size(); ++i) {
                    auto& b = run.report.layers[i];
                    b.param_admissible = std::abs(ov.xis[i] - b.param) <= 1e-12 * std::max(1.0, b.param);
                    b.param = ov.xis[i];
                }
            }
            break;
        case Algorithm::LayeredBPHandpicked:
            run.report = bp_check_and_bounds(stats, eps0);
            run.theory_params = false;
            break;
    }
    for (const auto& b : run.report.layers) run.params.push_back(b.param);
    return run;
}

AlgorithmRun run_algorithm(const ModelContext& ctx, const Realization& r, const std::vector<LayerStats>& stats,
                           Algorithm alg, const Overrides& ov) {
    const ModelStack& model = *ctx.model;
    const std::size_t K = model.depth();
    AlgorithmRun run = theory_for(r, stats, alg, ov);
    const bool noiseless = r.eps0_local == 0.0;
    switch (alg) {
        case Algorithm::LayeredHard:
        case Algorithm::LayeredSoft: {
            auto kind = alg == Algorithm::LayeredHard ? ThresholdKind::Hard : ThresholdKind::Soft;
            run.estimate = layered_threshold(model, r.y, {kind, run.params}).reps;
            break;
        }
        case Algorithm::LayeredSoftOracle: {
            run.params.clear();
            run.estimate.push_back(LayeredVector(r.y.data, model.geom(0)));
            for (std::size_t i = 1; i <= K; ++i) {
                LayeredVector z = analyze(model.layer(i), run.estimate.back());
                std::size_t k = count_nonzeros(r.reps[i].data);
                double beta = k == 0 ? max_abs(z.data) : oracle_threshold(z.data, k).beta;
                threshold_inplace(ThresholdKind::Soft, z.data, beta);
                run.params.push_back(beta);
                run.estimate.push_back(std::move(z));
            }
            run.report = soft_stability(stats, r.eps0_local, run.params);
            break;
        }
        case Algorithm::LayeredBP:
            if (noiseless && ov.xis.empty()) {
                auto res = layered_bp_noiseless(model, r.y, ctx.step_constants);
                run.estimate = std::move(res.reps);
                for (std::size_t i = 0; i < K; ++i) run.params[i] = res.layers[i].param;
            } else {
                std::vector<IstConfig> cfgs;
                for (std::size_t i = 0; i < K; ++i) cfgs.push_back({run.params[i], ctx.step_constants[i]});
                run.estimate = layered_ist(model, r.y, cfgs).reps;
            }
            break;
        case Algorithm::LayeredBPHandpicked: {
            if (noiseless) {
                auto res = layered_bp_noiseless(model, r.y, ctx.step_constants);
                run.estimate = std::move(res.reps);
                for (std::size_t i = 0; i < K; ++i) run.params[i] = res.layers[i].param;
                break;
            }
            run.estimate.push_back(LayeredVector(r.y.data, model.geom(0)));
            for (std::size_t i = 1; i <= K; ++i) {
                const double xi_th = run.report.layers[i - 1].param;
                // least error among candidates that keep the support inside the truth,
                // falling back to least error overall
                LayeredVector best;
                double best_err = kInf, best_xi = xi_th;
                bool best_contained = false;
                const auto truth_support = support_of(r.reps[i].data);
                for (int k = 0; k < 10; ++k) {
                    double xi = xi_th * std::pow(10.0, -3.0 + k / 3.0);
                    IstConfig cfg{xi, ctx.step_constants[i - 1]};
                    LayeredVector g = ist(model.layer(i), run.estimate.back(), cfg);
                    LayeredVector diff(model.geom(i));
                    for (std::size_t t = 0; t < diff.size(); ++t) diff.data[t] = r.reps[i].data[t] - g.data[t];
                    double err = norm_l2inf_patch(diff);
                    auto sg = ist_support(g);
                    bool contained = std::includes(truth_support.begin(), truth_support.end(), sg.begin(), sg.end());
                    if ((contained && !best_contained) || (contained == best_contained && err < best_err)) {
                        best_contained = contained;
                        best_err = err;
                        best = std::move(g);
                        best_xi = xi;
                    }
                }
                run.params[i - 1] = best_xi;
                run.estimate.push_back(std::move(best));
            }
            break;
        }
    }
    return run;
}

std::vector<RunRecord> score_estimate(const Realization& r, const AlgorithmRun& run) {
    const ModelStack& model = *r.model;
    const std::size_t K = model.depth();
    if (run.estimate.size() != K + 1) throw std::invalid_argument("score_estimate: estimate has the wrong depth");
    std::vector<RunRecord> out;
    for (std::size_t i = 1; i <= K; ++i) {
        const LayeredVector truth(r.reps[i].data, model.geom(i));
        if (run.estimate[i].size() != truth.size())
            throw std::invalid_argument("score_estimate: layer " + std::to_string(i) + " has the wrong length");
        const LayeredVector est(run.estimate[i].data, model.geom(i));
        RunRecord rec;
        rec.realization = r.index;
        rec.layer = i;
        rec.algorithm = run.algorithm;
        auto st = support_of(truth.data);
        auto se = is_bp(run.algorithm) ? ist_support(est) : support_of(est.data);
        rec.support_exact = st == se;
        rec.support_contained = std::includes(st.begin(), st.end(), se.begin(), se.end());
        LayeredVector diff(truth.geom);
        for (std::size_t t = 0; t < diff.size(); ++t) diff.data[t] = truth.data[t] - est.data[t];
        const double tn = norm_l2inf_patch(truth);
        rec.err_l2inf = norm_l2inf_patch(diff);
        rec.bound_eps = run.report.layers[i - 1].eps;
        rec.empirical_snr_db = rec.err_l2inf == 0.0 ? kInf : 20.0 * std::log10(tn / rec.err_l2inf);
        rec.bound_snr_db = rec.bound_eps == 0.0 ? kInf : 20.0 * std::log10(tn / rec.bound_eps);
        rec.conditions_held = run.theory_params && run.report.holds_through(i);
        // bounds are exact-arithmetic statements; IST only approximates the minimizer
        const double slack = (is_bp(run.algorithm) ? 1e-6 : 1e-9) * tn;
        rec.bound_ok = rec.err_l2inf <= rec.bound_eps + slack;
        const double t2 = norm2(truth.data);
        rec.rel_err_l2 = t2 > 0.0 ? norm2(diff.data) / t2 : norm2(diff.data);
        rec.param = i - 1 < run.params.size() ? run.params[i - 1] : 0.0;
        out.push_back(rec);
    }
    return out;
}

bool record_passes(const RunRecord& rec) {
    if (!rec.conditions_held) return true;
    const bool support = is_bp(rec.algorithm) ? rec.support_contained : rec.support_exact;
    return rec.bound_ok && support;
}

std::size_t worker_count(std::size_t requested) {
    std::size_t n = requested;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("MLCSC_THREADS")) {
            try {
                long cap = std::stol(env);
                if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
            } catch (const std::exception&) {
                throw std::invalid_argument("MLCSC_THREADS must be a positive integer");
            }
        }
    }
    return std::max<std::size_t>(1, n);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    auto model = std::make_shared<const ModelStack>(build_model(spec.gen));
    const ModelContext ctx = ModelContext::build(model);
    const std::size_t R = spec.realizations;
    Overrides ov{spec.beta_override, spec.xi_override};

    struct Slot {
        std::vector<RunRecord> records;
        std::vector<LayerStats> stats;
        double snr = 0.0, eps0 = 0.0;
    };
    std::vector<Slot> slots(R);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex fail_mu;
    auto worker = [&] {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= R) return;
            try {
                Realization r = sample_realization(model, spec.gen, idx);
                auto stats = measure_stats(r, &ctx.mus);
                Slot& s = slots[idx];
                for (Algorithm a : spec.algorithms) {
                    auto recs = score_estimate(r, run_algorithm(ctx, r, stats, a, ov));
                    s.records.insert(s.records.end(), recs.begin(), recs.end());
                }
                s.stats = std::move(stats);
                s.snr = r.snr_global_db;
                s.eps0 = r.eps0_local;
            } catch (...) {
                std::lock_guard<std::mutex> lk(fail_mu);
                if (!failure) failure = std::current_exception();
                next = R;
                return;
            }
        }
    };
    const std::size_t nthreads = std::min(worker_count(spec.threads), R);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult res;
    res.mus = ctx.mus;
    for (auto& s : slots) {
        res.records.insert(res.records.end(), s.records.begin(), s.records.end());
        res.stats.push_back(std::move(s.stats));
        res.snr_global_db.push_back(s.snr);
        res.eps0_local.push_back(s.eps0);
    }
    res.summary = summarize(res.records);
    if (!spec.output_dir.empty()) write_experiment(spec.output_dir, res);
    return res;
}

std::vector<LayerSummary> summarize(const std::vector<RunRecord>& records) {
    std::map<std::pair<int, std::size_t>, LayerSummary> acc;
    std::map<std::pair<int, std::size_t>, std::pair<std::size_t, std::size_t>> finite;  // snr counts
    for (const auto& r : records) {
        auto key = std::make_pair(static_cast<int>(r.algorithm), r.layer);
        auto& s = acc[key];
        s.algorithm = r.algorithm;
        s.layer = r.layer;
        ++s.total;
        s.support_exact += r.support_exact;
        s.support_contained += r.support_contained;
        if (std::isfinite(r.empirical_snr_db)) {
            s.mean_snr_db += r.empirical_snr_db;
            ++finite[key].first;
        }
        if (r.conditions_held) {
            ++s.held;
            if (!record_passes(r)) ++s.violations;
            if (std::isfinite(r.bound_snr_db)) {
                s.mean_bound_snr_db += r.bound_snr_db;
                ++finite[key].second;
            }
        }
    }
    std::vector<LayerSummary> out;
    for (auto& [key, s] : acc) {
        auto [a, b] = finite[key];
        s.mean_snr_db = a ? s.mean_snr_db / a : kInf;
        s.mean_bound_snr_db = b ? s.mean_bound_snr_db / b : kInf;
        out.push_back(s);
    }
    return out;
}

std::string summary_text(const ExperimentResult& res) {
    std::ostringstream os;
    os << "realizations " << res.snr_global_db.size() << "\n";
    os << "coherence";
    for (double m : res.mus) os << ' ' << format_double(m);
    os << "\n";
    if (!res.snr_global_db.empty()) {
        double s = 0.0;
        for (double v : res.snr_global_db) s += v;
        os << "mean_global_snr_db " << format_double(s / res.snr_global_db.size()) << "\n";
    }
    os << "algorithm layer total held support_exact support_contained violations mean_snr_db mean_bound_snr_db\n";
    for (const auto& s : res.summary)
        os << to_string(s.algorithm) << ' ' << s.layer << ' ' << s.total << ' ' << s.held << ' ' << s.support_exact
           << ' ' << s.support_contained << ' ' << s.violations << ' ' << format_double(s.mean_snr_db) << ' '
           << format_double(s.mean_bound_snr_db) << "\n";
    return os.str();
}

namespace {
void sort_for_figures(std::vector<RunRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.layer != b.layer) return a.layer < b.layer;
        if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
        if (a.bound_snr_db != b.bound_snr_db) return a.bound_snr_db < b.bound_snr_db;
        return a.realization < b.realization;
    });
}

bool parse_bool(const std::string& s) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) f.push_back(cur);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    return f;
}
}  // namespace

std::string records_csv(std::vector<RunRecord> records) {
    sort_for_figures(records);
    std::ostringstream os;
    os << "realization,layer,algorithm,support_exact,support_contained,err_l2inf,bound_eps,empirical_snr_db,bound_snr_db\n";
    for (const auto& r : records)
        os << r.realization << ',' << r.layer << ',' << to_string(r.algorithm) << ',' << int(r.support_exact) << ','
           << int(r.support_contained) << ',' << format_double(r.err_l2inf) << ',' << format_double(r.bound_eps) << ','
           << format_double(r.empirical_snr_db) << ',' << format_double(r.bound_snr_db) << '\n';
    return os.str();
}

std::vector<RunRecord> parse_records_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<RunRecord> out;
    if (!std::getline(is, line)) return out;
    if (line.rfind("realization,layer,algorithm", 0) != 0) throw std::invalid_argument("records csv: bad header");
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 9) throw std::invalid_argument("records csv: expected 9 fields in '" + line + "'");
        RunRecord r;
        r.realization = std::stoull(f[0]);
        r.layer = std::stoul(f[1]);
        r.algorithm = parse_algorithm(f[2]);
        r.support_exact = parse_bool(f[3]);
        r.support_contained = parse_bool(f[4]);
        r.err_l2inf = parse_double(f[5]);
        r.bound_eps = parse_double(f[6]);
        r.empirical_snr_db = parse_double(f[7]);
        r.bound_snr_db = parse_double(f[8]);
        out.push_back(r);
    }
    return out;
}

std::string records_meta_csv(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << "realization,layer,algorithm,conditions_held,bound_ok,rel_err_l2,param\n";
    for (const auto& r : records)
        os << r.realization << ',' << r.layer << ',' << to_string(r.algorithm) << ',' << int(r.conditions_held) << ','
           << int(r.bound_ok) << ',' << format_double(r.rel_err_l2) << ',' << format_double(r.param) << '\n';
    return os.str();
}

void merge_records_meta(std::vector<RunRecord>& records, const std::string& meta_text) {
    std::map<std::tuple<std::uint64_t, std::size_t, int>, RunRecord*> index;
    for (auto& r : records) index[{r.realization, r.layer, static_cast<int>(r.algorithm)}] = &r;
    std::istringstream is(meta_text);
    std::string line;
    std::getline(is, line);
    if (line.rfind("realization,layer,algorithm,conditions_held", 0) != 0)
        throw std::invalid_argument("records meta csv: bad header");
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 7) throw std::invalid_argument("records meta csv: expected 7 fields in '" + line + "'");
        auto it = index.find({std::stoull(f[0]), std::stoul(f[1]), static_cast<int>(parse_algorithm(f[2]))});
        if (it == index.end()) continue;
        it->second->conditions_held = parse_bool(f[3]);
        it->second->bound_ok = parse_bool(f[4]);
        it->second->rel_err_l2 = parse_double(f[5]);
        it->second->param = parse_double(f[6]);
    }
}

void emit_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << records_csv(records);
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> emit_plotdata(const std::string& dir, const std::vector<RunRecord>& records) {
    fs::create_directories(dir);
    std::map<std::tuple<std::size_t, int, std::uint64_t>, const RunRecord*> index;
    std::set<std::pair<std::size_t, int>> groups;
    for (const auto& r : records) {
        index[{r.layer, static_cast<int>(r.algorithm), r.realization}] = &r;
        groups.insert({r.layer, static_cast<int>(r.algorithm)});
    }
    auto companion = [](Algorithm a) -> std::optional<Algorithm> {
        if (a == Algorithm::LayeredSoft) return Algorithm::LayeredSoftOracle;
        if (a == Algorithm::LayeredBP) return Algorithm::LayeredBPHandpicked;
        return std::nullopt;
    };
    std::vector<std::string> paths;
    for (auto [layer, ai] : groups) {
        Algorithm a = static_cast<Algorithm>(ai);
        if (a == Algorithm::LayeredSoftOracle || a == Algorithm::LayeredBPHandpicked) continue;
        std::vector<const RunRecord*> rows;
        for (const auto& r : records)
            if (r.layer == layer && r.algorithm == a && r.conditions_held) rows.push_back(&r);
        std::stable_sort(rows.begin(), rows.end(), [](const RunRecord* x, const RunRecord* y) {
            if (x->bound_snr_db != y->bound_snr_db) return x->bound_snr_db < y->bound_snr_db;
            return x->realization < y->realization;
        });
        auto comp = companion(a);
        bool have_comp = comp && groups.count({layer, static_cast<int>(*comp)});
        std::string path = join_path(dir, "layer" + std::to_string(layer) + "_" + to_string(a) + ".dat");
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path);
        os << "# rank realization empirical_snr_db bound_snr_db";
        if (have_comp) os << ' ' << to_string(*comp) << "_snr_db";
        os << '\n';
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const RunRecord& r = *rows[k];
            os << k << ' ' << r.realization << ' ' << format_double(r.empirical_snr_db) << ' '
               << format_double(r.bound_snr_db);
            if (have_comp) {
                auto it = index.find({layer, static_cast<int>(*comp), r.realization});
                os << ' ' << (it == index.end() ? "nan" : format_double(it->second->empirical_snr_db));
            }
            os << '\n';
        }
        paths.push_back(path);
    }
    return paths;
}

void write_experiment(const std::string& dir, const ExperimentResult& res) {
    fs::create_directories(dir);
    emit_csv(join_path(dir, "records.csv"), res.records);
    {
        std::ofstream os(join_path(dir, "records_meta.csv"));
        os << records_meta_csv(res.records);
    }
    {
        std::ofstream os(join_path(dir, "summary.txt"));
        os << summary_text(res);
    }
    {
        std::ofstream os(join_path(dir, "realizations.csv"));
        os << "realization,layer,l0inf_stripe,l0inf_patch,gamma_min_abs,gamma_max_abs,mu,eps0_local,snr_global_db\n";
        for (std::size_t r = 0; r < res.stats.size(); ++r)
            for (std::size_t i = 0; i < res.stats[r].size(); ++i) {
                const auto& s = res.stats[r][i];
                os << r << ',' << (i + 1) << ',' << s.l0inf_stripe << ',' << s.l0inf_patch << ','
                   << format_double(s.gamma_min_abs) << ',' << format_double(s.gamma_max_abs) << ','
                   << format_double(s.mu) << ',' << format_double(res.eps0_local[r]) << ','
                   << format_double(res.snr_global_db[r]) << '\n';
            }
    }
    emit_plotdata(join_path(dir, "plot"), res.records);
}

void save_estimate(const std::string& realization_dir, const AlgorithmRun& run) {
    const std::string dir = join_path(join_path(realization_dir, "estimates"), to_string(run.algorithm));
    fs::create_directories(dir);
    for (std::size_t i = 1; i < run.estimate.size(); ++i)
        save_vector(join_path(dir, "gamma_" + std::to_string(i) + ".txt"), run.estimate[i]);
    Manifest m;
    for (std::size_t i = 0; i < run.params.size(); ++i) m["layer." + std::to_string(i + 1) + ".param"] = format_double(run.params[i]);
    write_manifest(join_path(dir, "params.txt"), m);
}

VerifyResult verify_realization(const std::string& dir, const std::vector<Algorithm>& algs, const Overrides& ov) {
    if (!fs::is_directory(dir)) throw std::runtime_error("realization directory " + dir + " does not exist");
    Realization r = load_realization(dir);
    const ModelStack& model = *r.model;
    const std::size_t K = model.depth();
    VerifyResult out;
    for (std::size_t i = 1; i <= K; ++i) {
        LayeredVector back = synthesize(model.layer(i), r.reps[i]);
        double e = 0.0;
        for (std::size_t t = 0; t < back.size(); ++t) e = std::max(e, std::abs(back.data[t] - r.reps[i - 1].data[t]));
        if (e > 1e-12 * std::max(1.0, max_abs(r.reps[i - 1].data))) {
            out.pass = false;
            out.problems.push_back("layer " + std::to_string(i) + ": stored representations do not satisfy the model");
        }
    }
    bool need_steps = false;
    for (Algorithm a : algs) need_steps = need_steps || is_bp(a);
    ModelContext ctx;
    ctx.model = r.model;
    ctx.mus = model_coherences(model);
    auto stats = measure_stats(r, &ctx.mus);
    for (Algorithm a : algs) {
        const std::string edir = join_path(join_path(dir, "estimates"), to_string(a));
        AlgorithmRun run;
        if (fs::is_directory(edir)) {
            run = theory_for(r, stats, a, ov);
            run.estimate.push_back(r.y);
            for (std::size_t i = 1; i <= K; ++i)
                run.estimate.push_back(load_vector(join_path(edir, "gamma_" + std::to_string(i) + ".txt")));
            const std::string ppath = join_path(edir, "params.txt");
            if (fs::exists(ppath)) {
                Manifest m = read_manifest(ppath);
                for (std::size_t i = 0; i < K; ++i) {
                    auto it = m.find("layer." + std::to_string(i + 1) + ".param");
                    if (it != m.end()) run.params[i] = parse_double(it->second);
                }
            }
            if (a == Algorithm::LayeredSoftOracle) run.report = soft_stability(stats, r.eps0_local, run.params);
        } else {
            if (need_steps && ctx.step_constants.empty())
                for (std::size_t i = 1; i <= K; ++i) ctx.step_constants.push_back(gram_spectral_bound(model.layer(i)));
            run = run_algorithm(ctx, r, stats, a, ov);
        }
        auto recs = score_estimate(r, run);
        for (const auto& rec : recs)
            if (!record_passes(rec)) {
                out.pass = false;
                out.problems.push_back(to_string(a) + " layer " + std::to_string(rec.layer) +
                                       ": error " + format_double(rec.err_l2inf) + " vs bound " +
                                       format_double(rec.bound_eps) + (rec.bound_ok ? " (support property failed)" : ""));
            }
        out.records.insert(out.records.end(), recs.begin(), recs.end());
        out.reports.push_back(run.report);
    }
    return out;
}

}  // namespace mlcsc
