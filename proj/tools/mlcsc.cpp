// mlcsc: generate / run / verify / emit for the synthetic ML-CSC experiments.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlcsc/experiment.hpp"

namespace fs = std::filesystem;
using namespace mlcsc;

namespace {

struct Common {
    std::string preset = "noiseless_k3";
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string algorithms;
    std::size_t realizations = 0;
    std::string xi, beta;
};

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> v;
    for (const auto& s : split_csv(csv)) v.push_back(parse_double(s));
    return v;
}

ExperimentSpec make_spec(const Common& c, std::size_t default_realizations) {
    ExperimentSpec spec = (!c.config.empty()) ? ExperimentSpec::custom_from_manifest(c.config)
                                              : ExperimentSpec::preset_named(c.preset);
    if (!c.config.empty() && c.preset != "custom" && c.preset != "noiseless_k3")
        std::cerr << "note: --config given, preset '" << c.preset << "' ignored\n";
    if (c.seed_set) spec.gen.seed = c.seed;
    if (!c.algorithms.empty()) spec.algorithms = parse_algorithms(c.algorithms);
    if (c.realizations)
        spec.realizations = c.realizations;
    else if (c.config.empty() || !read_manifest(c.config).count("run.realizations"))
        spec.realizations = default_realizations;
    if (!c.xi.empty()) spec.xi_override = parse_list(c.xi);
    if (!c.beta.empty()) spec.beta_override = parse_list(c.beta);
    spec.output_dir = c.out;
    spec.validate();
    return spec;
}

void add_common(CLI::App* app, Common& c, bool with_config) {
    if (with_config) {
        app->add_option("--preset", c.preset, "noiseless_k3 | noisy_k2 | bp_k5 | custom");
        app->add_option("--config", c.config, "model/generator manifest (custom preset)");
        app->add_option("--seed", c.seed, "64-bit seed")->each([&c](const std::string&) { c.seed_set = true; });
        app->add_option("--realizations", c.realizations, "number of realizations");
    }
    app->add_option("--algorithms", c.algorithms,
                    "csv of layered_hard,layered_soft,layered_soft_oracle,layered_bp,layered_bp_handpicked");
    app->add_option("--xi", c.xi, "csv of per-layer xi overrides");
    app->add_option("--beta", c.beta, "csv of per-layer beta overrides");
}

std::string realization_dir(const std::string& out, std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%04zu", idx);
    return join_path(out, buf);
}

int cmd_generate(const Common& c) {
    ExperimentSpec spec = make_spec(c, 1);
    auto model = std::make_shared<const ModelStack>(build_model(spec.gen));
    fs::create_directories(c.out);
    write_manifest(join_path(c.out, "config.txt"), gen_config_to_manifest(spec.gen));
    std::vector<Algorithm> algs;
    if (!c.algorithms.empty()) algs = spec.algorithms;
    ModelContext ctx;
    if (!algs.empty()) ctx = ModelContext::build(model);
    Overrides ov{spec.beta_override, spec.xi_override};
    for (std::size_t idx = 0; idx < spec.realizations; ++idx) {
        Realization r = sample_realization(model, spec.gen, idx);
        std::string dir = realization_dir(c.out, idx);
        save_realization(dir, r);
        if (!algs.empty()) {
            auto stats = measure_stats(r, &ctx.mus);
            for (Algorithm a : algs) save_estimate(dir, run_algorithm(ctx, r, stats, a, ov));
        }
        std::cout << dir << '\n';
    }
    return 0;
}

int cmd_run(const Common& c) {
    if (c.out.empty()) throw std::invalid_argument("run needs --out <dir>");
    ExperimentSpec spec = make_spec(c, 100);
    ExperimentResult res = run_experiment(spec);
    std::cout << summary_text(res);
    std::size_t violations = 0;
    for (const auto& s : res.summary) violations += s.violations;
    std::cout << "records written to " << join_path(c.out, "records.csv") << '\n';
    if (violations) {
        std::cout << violations << " asserted bound(s) violated\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const std::string& dir, const Common& c) {
    std::vector<Algorithm> algs = !c.algorithms.empty()
                                      ? parse_algorithms(c.algorithms)
                                      : std::vector<Algorithm>{Algorithm::LayeredHard, Algorithm::LayeredSoft,
                                                               Algorithm::LayeredBP};
    Overrides ov;
    if (!c.xi.empty()) ov.xis = parse_list(c.xi);
    if (!c.beta.empty()) ov.betas = parse_list(c.beta);
    VerifyResult v = verify_realization(dir, algs, ov);
    bool first = true;
    for (const auto& rep : v.reports) {
        std::cout << report_csv(rep, first);
        first = false;
    }
    std::cout << records_csv(v.records);
    for (const auto& p : v.problems) std::cout << "FAIL " << p << '\n';
    std::cout << (v.pass ? "verify: pass" : "verify: FAIL") << '\n';
    return v.pass ? 0 : 1;
}

int cmd_emit(const std::string& dir, const std::string& records_path) {
    std::string rp = records_path.empty() ? join_path(dir, "records.csv") : records_path;
    std::ifstream is(rp);
    if (!is) throw std::runtime_error("cannot read " + rp);
    std::stringstream ss;
    ss << is.rdbuf();
    auto records = parse_records_csv(ss.str());
    std::string mp = join_path(parent_dir(rp), "records_meta.csv");
    if (std::ifstream ms(mp); ms) {
        std::stringstream m;
        m << ms.rdbuf();
        merge_records_meta(records, m.str());
    } else {
        std::cerr << "note: " << mp << " missing; treating every record as condition-satisfying\n";
        for (auto& r : records) r.conditions_held = true;
    }
    for (const auto& p : emit_plotdata(join_path(dir, "plot"), records)) std::cout << p << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-layer convolutional sparse coding experiments"};
    app.require_subcommand(1);
    Common c;

    auto* gen = app.add_subcommand("generate", "sample realizations and write them to disk");
    add_common(gen, c, true);
    gen->add_option("--out", c.out, "output directory")->required();

    auto* run = app.add_subcommand("run", "run an experiment and write records, summary and plot data");
    add_common(run, c, true);
    run->add_option("--out", c.out, "output directory")->required();

    std::string vdir;
    auto* ver = app.add_subcommand("verify", "re-check the theorem bounds on a stored realization");
    ver->add_option("dir", vdir, "realization directory")->required();
    add_common(ver, c, false);

    std::string records_path;
    auto* emit = app.add_subcommand("emit", "turn records.csv into gnuplot data files");
    emit->add_option("--out", c.out, "experiment directory (reads records.csv, writes plot/)")->required();
    emit->add_option("--records", records_path, "records file (default <out>/records.csv)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (gen->parsed()) return cmd_generate(c);
        if (run->parsed()) return cmd_run(c);
        if (ver->parsed()) return cmd_verify(vdir, c);
        if (emit->parsed()) return cmd_emit(c.out, records_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
