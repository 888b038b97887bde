#pragma once
// Experiment harness: presets, per-realization scoring, CSV and plot output.
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlcsc/genmodel.hpp"
#include "mlcsc/pursuit.hpp"
#include "mlcsc/theory.hpp"

namespace mlcsc {

enum class Algorithm { LayeredHard, LayeredSoft, LayeredSoftOracle, LayeredBP, LayeredBPHandpicked };
std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
std::vector<Algorithm> parse_algorithms(const std::string& csv);

struct ExperimentSpec {
    std::string preset = "noiseless_k3";
    GenConfig gen = GenConfig::defaults(3);
    std::size_t realizations = 100;
    std::vector<Algorithm> algorithms;
    std::vector<double> beta_override;  // empty: theory midpoints
    std::vector<double> xi_override;    // empty: xi_i = 4 eps_{i-1}
    std::string output_dir;
    std::size_t threads = 0;  // 0: MLCSC_THREADS, else hardware concurrency

    // noiseless_k3, noisy_k2, bp_k5; `custom` needs a manifest (see custom_from_manifest).
    static ExperimentSpec preset_named(const std::string& name);
    static ExperimentSpec custom_from_manifest(const std::string& manifest_path);
    void validate() const;
};

struct RunRecord {
    std::uint64_t realization = 0;
    std::size_t layer = 0;
    Algorithm algorithm = Algorithm::LayeredHard;
    bool support_exact = false;
    bool support_contained = false;
    double err_l2inf = 0.0;
    double bound_eps = 0.0;
    double empirical_snr_db = 0.0;
    double bound_snr_db = 0.0;
    // kept out of records.csv (written to records_meta.csv)
    bool conditions_held = false;  // theorem hypotheses hold for layers 1..layer with the parameters used
    bool bound_ok = false;         // err <= bound up to numerical slack
    double rel_err_l2 = 0.0;
    double param = 0.0;
};

// Things shared by every realization of one model.
struct ModelContext {
    std::shared_ptr<const ModelStack> model;
    std::vector<double> mus;
    std::vector<double> step_constants;  // c_i = gram_spectral_bound(D_i)
    static ModelContext build(std::shared_ptr<const ModelStack> model);
};

struct AlgorithmRun {
    Algorithm algorithm;
    RepStack estimate;
    TheoremReport report;  // the theorem the records are checked against
    std::vector<double> params;
    bool theory_params = true;  // false for oracle / hand-picked / overrides outside the theorem
};

struct Overrides {
    std::vector<double> betas, xis;
};

AlgorithmRun run_algorithm(const ModelContext& ctx, const Realization& r, const std::vector<LayerStats>& stats,
                           Algorithm alg, const Overrides& ov = {});
// Records for an estimate produced elsewhere (e.g. read back from disk).
std::vector<RunRecord> score_estimate(const Realization& r, const AlgorithmRun& run);
// Theorem report and parameters for `alg` without running it.
AlgorithmRun theory_for(const Realization& r, const std::vector<LayerStats>& stats, Algorithm alg,
                        const Overrides& ov = {});

// Asserted part of a record: bound and the support property the theorem promises.
bool record_passes(const RunRecord& rec);

struct LayerSummary {
    Algorithm algorithm;
    std::size_t layer = 0;
    std::size_t total = 0, held = 0, support_exact = 0, support_contained = 0, violations = 0;
    double mean_snr_db = 0.0;        // over all realizations with finite SNR
    double mean_bound_snr_db = 0.0;  // over condition-satisfying ones
};

struct ExperimentResult {
    std::vector<RunRecord> records;  // realization-major, deterministic
    std::vector<LayerSummary> summary;
    std::vector<double> snr_global_db, eps0_local;  // per realization
    std::vector<std::vector<LayerStats>> stats;
    std::vector<double> mus;
};

std::size_t worker_count(std::size_t requested);
ExperimentResult run_experiment(const ExperimentSpec& spec);
std::vector<LayerSummary> summarize(const std::vector<RunRecord>& records);
std::string summary_text(const ExperimentResult& res);

std::string records_csv(std::vector<RunRecord> records);
std::vector<RunRecord> parse_records_csv(const std::string& text);
std::string records_meta_csv(const std::vector<RunRecord>& records);
// Fills the non-CSV fields of `records` from a records_meta.csv text.
void merge_records_meta(std::vector<RunRecord>& records, const std::string& meta_text);
void emit_csv(const std::string& path, const std::vector<RunRecord>& records);
// Writes layer<i>_<algorithm>.dat files into dir and returns their paths.
std::vector<std::string> emit_plotdata(const std::string& dir, const std::vector<RunRecord>& records);
void write_experiment(const std::string& dir, const ExperimentResult& res);

struct VerifyResult {
    bool pass = true;
    std::vector<std::string> problems;
    std::vector<RunRecord> records;
    std::vector<TheoremReport> reports;
};
// Uses estimates/<alg>/gamma_<i>.txt inside dir when present, otherwise reruns the pursuit.
VerifyResult verify_realization(const std::string& dir, const std::vector<Algorithm>& algs, const Overrides& ov = {});
void save_estimate(const std::string& realization_dir, const AlgorithmRun& run);

}  // namespace mlcsc
