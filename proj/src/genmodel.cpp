#include "mlcsc/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mlcsc {

GenConfig GenConfig::defaults(std::size_t K) {
    if (K == 0) throw std::invalid_argument("K must be >= 1");
    GenConfig c;
    c.K = K;
    c.strides.assign(K, 6);
    c.filters.resize(K);
    c.filters[0].kind = FilterSpec::Kind::Dmey29;
    for (std::size_t i = 1; i < K; ++i)
        c.filters[i].kind = (i == 1) ? FilterSpec::Kind::Random : FilterSpec::Kind::SameAsPrevious;
    return c;
}

void GenConfig::validate() const {
    if (K == 0) throw std::invalid_argument("GenConfig: K must be >= 1");
    if (strides.size() != K || filters.size() != K)
        throw std::invalid_argument("GenConfig: strides and filters need one entry per layer");
    for (auto s : strides)
        if (s == 0) throw std::invalid_argument("GenConfig: strides must be >= 1");
    if (deepest_len == 0) throw std::invalid_argument("GenConfig: deepest_len must be positive");
    if (l0_lo > l0_hi || l0_hi > deepest_len)
        throw std::invalid_argument("GenConfig: need l0_lo <= l0_hi <= deepest_len");
    if (filters[0].kind == FilterSpec::Kind::SameAsPrevious)
        throw std::invalid_argument("GenConfig: layer 1 cannot reuse a previous filter");
    if (noise_snr_db && !std::isfinite(*noise_snr_db)) throw std::invalid_argument("GenConfig: SNR must be finite");
}

namespace {

std::size_t get_size(const Manifest& m, const std::string& k, std::size_t dflt) {
    auto it = m.find(k);
    return it == m.end() ? dflt : std::stoul(it->second);
}

const char* kind_name(FilterSpec::Kind k) {
    switch (k) {
        case FilterSpec::Kind::Dmey29: return "dmey29";
        case FilterSpec::Kind::Files: return "files";
        case FilterSpec::Kind::Random: return "random";
        case FilterSpec::Kind::SameAsPrevious: return "same";
    }
    return "?";
}

}  // namespace

GenConfig gen_config_from_manifest(const Manifest& m, const std::string& base_dir, std::size_t default_K) {
    GenConfig c = GenConfig::defaults(get_size(m, "gen.K", default_K));
    c.deepest_len = get_size(m, "gen.deepest_len", c.deepest_len);
    c.l0_lo = get_size(m, "gen.l0_lo", c.l0_lo);
    c.l0_hi = get_size(m, "gen.l0_hi", c.l0_hi);
    if (auto it = m.find("gen.seed"); it != m.end()) c.seed = std::stoull(it->second);
    if (auto it = m.find("gen.snr_db"); it != m.end() && it->second != "none" && !it->second.empty())
        c.noise_snr_db = parse_double(it->second);
    if (auto it = m.find("gen.deepest_patch_len"); it != m.end()) c.deepest_patch_len = std::stoul(it->second);
    for (std::size_t i = 1; i <= c.K; ++i) {
        const std::string k = "layer." + std::to_string(i) + ".";
        auto& f = c.filters[i - 1];
        c.strides[i - 1] = get_size(m, k + "s", c.strides[i - 1]);
        if (auto it = m.find(k + "filters"); it != m.end()) {
            f.kind = FilterSpec::Kind::Files;
            f.files.clear();
            for (const auto& p : split_csv(it->second))
                f.files.push_back(std::filesystem::path(p).is_absolute() ? p : join_path(base_dir, p));
        } else if (auto src = m.find(k + "source"); src != m.end()) {
            if (src->second == "dmey29") f.kind = FilterSpec::Kind::Dmey29;
            else if (src->second == "random") f.kind = FilterSpec::Kind::Random;
            else if (src->second == "same") f.kind = FilterSpec::Kind::SameAsPrevious;
            else throw std::invalid_argument("unknown filter source '" + src->second + "' for layer " + std::to_string(i));
        }
        f.random.len = get_size(m, k + "n", f.random.len);
        f.random.count = get_size(m, k + "m", f.random.count);
        f.random.nnz = get_size(m, k + "nnz", f.random.nnz);
        f.random.max_abs = static_cast<int>(get_size(m, k + "max_abs", f.random.max_abs));
        f.random.candidates = get_size(m, k + "candidates", f.random.candidates);
    }
    c.validate();
    return c;
}

Manifest gen_config_to_manifest(const GenConfig& cfg) {
    Manifest m;
    m["gen.K"] = std::to_string(cfg.K);
    m["gen.deepest_len"] = std::to_string(cfg.deepest_len);
    m["gen.l0_lo"] = std::to_string(cfg.l0_lo);
    m["gen.l0_hi"] = std::to_string(cfg.l0_hi);
    m["gen.seed"] = std::to_string(cfg.seed);
    m["gen.snr_db"] = cfg.noise_snr_db ? format_double(*cfg.noise_snr_db) : "none";
    if (cfg.deepest_patch_len) m["gen.deepest_patch_len"] = std::to_string(*cfg.deepest_patch_len);
    for (std::size_t i = 1; i <= cfg.K; ++i) {
        const std::string k = "layer." + std::to_string(i) + ".";
        const auto& f = cfg.filters[i - 1];
        m[k + "s"] = std::to_string(cfg.strides[i - 1]);
        if (f.kind == FilterSpec::Kind::Files) {
            std::string files;
            for (std::size_t j = 0; j < f.files.size(); ++j) files += (j ? "," : "") + f.files[j];
            m[k + "filters"] = files;
        } else {
            m[k + "source"] = kind_name(f.kind);
        }
        if (f.kind == FilterSpec::Kind::Random) {
            m[k + "n"] = std::to_string(f.random.len);
            m[k + "m"] = std::to_string(f.random.count);
            m[k + "nnz"] = std::to_string(f.random.nnz);
            m[k + "max_abs"] = std::to_string(f.random.max_abs);
            m[k + "candidates"] = std::to_string(f.random.candidates);
        }
    }
    return m;
}

std::vector<int> nonzero_values(int max_abs) {
    std::vector<int> v;
    for (int a = -max_abs; a <= max_abs; ++a)
        if (a != 0) v.push_back(a);
    return v;
}

std::vector<double> gen_sparse_filter(std::size_t len, std::size_t nnz, const std::vector<int>& value_set,
                                      CounterRng& rng) {
    if (len == 0 || nnz == 0 || nnz > len) throw std::invalid_argument("gen_sparse_filter: need 1 <= nnz <= len");
    if (value_set.empty()) throw std::invalid_argument("gen_sparse_filter: empty value set");
    for (int v : value_set)
        if (v == 0) throw std::invalid_argument("gen_sparse_filter: value set must exclude 0");
    std::vector<std::size_t> pos(len);
    for (std::size_t k = 0; k < len; ++k) pos[k] = k;
    for (std::size_t k = 0; k < nnz; ++k) std::swap(pos[k], pos[k + rng.below(len - k)]);  // partial shuffle
    std::vector<double> f(len, 0.0);
    for (std::size_t k = 0; k < nnz; ++k) f[pos[k]] = value_set[rng.below(value_set.size())];
    double nrm = norm2(f);
    for (double& x : f) x /= nrm;
    return f;
}

SelectedFilter select_filter_by_coherence(const RandomFilterSpec& spec, std::size_t channel_stride,
                                          const std::function<ConvDictionary(LocalFilterBank)>& factory,
                                          CounterRng& rng) {
    if (spec.candidates == 0) throw std::invalid_argument("select_filter_by_coherence: need >= 1 candidate");
    const auto values = nonzero_values(spec.max_abs);
    SelectedFilter best;
    bool have = false, have_nonzero = false;
    for (std::size_t c = 0; c < spec.candidates; ++c) {
        std::vector<std::vector<double>> fs;
        for (std::size_t f = 0; f < spec.count; ++f)
            fs.push_back(gen_sparse_filter(spec.len * channel_stride, spec.nnz, values, rng));
        LocalFilterBank bank = LocalFilterBank::normalized(std::move(fs));
        double mu = mutual_coherence(factory(bank));
        best.all_mu.push_back(mu);
        const bool nonzero = mu > 1e-12;
        // prefer nonzero coherence when asked; among the preferred class take the minimum
        bool better;
        if (!have) better = true;
        else if (spec.skip_orthogonal && nonzero != have_nonzero) better = nonzero;
        else better = mu < best.mu;
        if (better) {
            best.bank = std::move(bank);
            best.mu = mu;
            best.index = c;
            have = true;
            have_nonzero = nonzero;
        }
    }
    return best;
}

ModelStack build_model(const GenConfig& cfg) {
    cfg.validate();
    const std::size_t K = cfg.K;
    std::vector<std::size_t> in_len(K + 1);
    in_len[K] = cfg.deepest_len;
    for (std::size_t i = K; i > 1; --i) in_len[i - 1] = in_len[i] * cfg.strides[i - 1];
    std::vector<ConvDictionary> layers;
    std::vector<LocalFilterBank> banks;
    for (std::size_t i = 1; i <= K; ++i) {
        const auto& spec = cfg.filters[i - 1];
        const std::size_t cs = (i == 1) ? 1 : banks.back().count();
        const std::size_t stride = cfg.strides[i - 1];
        auto factory = [&](LocalFilterBank b) { return ConvDictionary(std::move(b), in_len[i], stride, cs); };
        LocalFilterBank bank;
        switch (spec.kind) {
            case FilterSpec::Kind::Dmey29: bank = LocalFilterBank::normalized({builtin_dmey29()}); break;
            case FilterSpec::Kind::Files: {
                std::vector<std::vector<double>> fs;
                for (const auto& p : spec.files) fs.push_back(load_filter(p));
                bank = LocalFilterBank::normalized(std::move(fs));
                break;
            }
            case FilterSpec::Kind::Random: {
                CounterRng rng(cfg.seed, i, Purpose::FilterSelection);
                bank = select_filter_by_coherence(spec.random, cs, factory, rng).bank;
                break;
            }
            case FilterSpec::Kind::SameAsPrevious: bank = banks.back(); break;
        }
        layers.push_back(factory(bank));
        banks.push_back(std::move(bank));
    }
    return ModelStack(std::move(layers), cfg.deepest_patch_len);
}

Realization sample_realization(std::shared_ptr<const ModelStack> model, const GenConfig& cfg, std::uint64_t index) {
    cfg.validate();
    const std::size_t K = model->depth();
    const auto& gk = model->geom(K);
    if (gk.spatial_len != cfg.deepest_len) throw std::invalid_argument("sample_realization: model/config mismatch");
    const std::size_t total = gk.size();
    const std::size_t hi = std::min(cfg.l0_hi, total);

    CounterRng card(cfg.seed, index, Purpose::Cardinality);
    const std::size_t l0 = static_cast<std::size_t>(card.uniform_int(static_cast<long>(cfg.l0_lo), static_cast<long>(hi)));
    CounterRng sup(cfg.seed, index, Purpose::Support);
    std::vector<std::size_t> pos(total);
    for (std::size_t k = 0; k < total; ++k) pos[k] = k;
    for (std::size_t k = 0; k < l0; ++k) std::swap(pos[k], pos[k + sup.below(total - k)]);
    CounterRng val(cfg.seed, index, Purpose::Values);
    LayeredVector deepest(gk);
    for (std::size_t k = 0; k < l0; ++k) deepest.data[pos[k]] = (val.next_u64() >> 63) ? 1.0 : -1.0;

    Realization r;
    r.model = model;
    r.index = index;
    r.reps = propagate(*model, deepest);
    r.y = r.reps[0];
    r.snr_global_db = std::numeric_limits<double>::infinity();
    if (cfg.noise_snr_db) {
        CounterRng nz(cfg.seed, index, Purpose::Noise);
        LayeredVector e(r.y.geom);
        for (double& v : e.data) v = nz.normal();
        // scale the draw so its norm hits the target exactly
        const double target = norm2(r.reps[0].data) / std::pow(10.0, *cfg.noise_snr_db / 20.0);
        const double scale = target / norm2(e.data);
        for (double& v : e.data) v *= scale;
        for (std::size_t k = 0; k < e.size(); ++k) r.y.data[k] += e.data[k];
        r.eps0_local = norm_l2inf_patch(e);
        r.noise_l2 = norm2(e.data);
        r.snr_global_db = 20.0 * std::log10(norm2(r.reps[0].data) / r.noise_l2);
    }
    return r;
}

Realization sample_realization(const GenConfig& cfg, std::uint64_t index) {
    auto model = std::make_shared<const ModelStack>(build_model(cfg));
    return sample_realization(model, cfg, index);
}

std::vector<double> model_coherences(const ModelStack& model) {
    std::vector<double> mus;
    for (std::size_t i = 1; i <= model.depth(); ++i) mus.push_back(mutual_coherence(model.layer(i)));
    return mus;
}

std::vector<LayerStats> measure_stats(const ModelStack& model, const RepStack& reps, const std::vector<double>* mus) {
    const std::size_t K = model.depth();
    if (reps.size() != K + 1) throw std::invalid_argument("measure_stats: representation stack has wrong depth");
    std::vector<LayerStats> out(K);
    for (std::size_t i = 1; i <= K; ++i) {
        LayeredVector g(reps[i].data, model.geom(i));
        auto& s = out[i - 1];
        s.l0inf_stripe = norm_l0inf_stripe(g);
        s.l0inf_patch = norm_l0inf_patch(g);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double v : g.data)
            if (std::abs(v) > kZeroTol) {
                lo = std::min(lo, std::abs(v));
                hi = std::max(hi, std::abs(v));
            }
        s.gamma_min_abs = hi > 0.0 ? lo : 0.0;
        s.gamma_max_abs = hi;
        s.mu = mus ? mus->at(i - 1) : mutual_coherence(model.layer(i));
    }
    return out;
}

std::vector<LayerStats> measure_stats(const Realization& r, const std::vector<double>* mus) {
    return measure_stats(*r.model, r.reps, mus);
}

std::string stats_csv(const std::vector<LayerStats>& stats) {
    std::ostringstream os;
    os << "layer,l0inf_stripe,l0inf_patch,gamma_min_abs,gamma_max_abs,mu\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        os << (i + 1) << ',' << s.l0inf_stripe << ',' << s.l0inf_patch << ',' << format_double(s.gamma_min_abs)
           << ',' << format_double(s.gamma_max_abs) << ',' << format_double(s.mu) << '\n';
    }
    return os.str();
}

void save_realization(const std::string& dir, const Realization& r) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "model");
    save_model(join_path(dir, "model"), *r.model);
    save_vector(join_path(dir, "x.txt"), r.reps[0]);
    save_vector(join_path(dir, "y.txt"), r.y);
    for (std::size_t i = 1; i < r.reps.size(); ++i)
        save_vector(join_path(dir, "gamma_" + std::to_string(i) + ".txt"), r.reps[i]);
    Manifest meta;
    meta["realization.index"] = std::to_string(r.index);
    meta["realization.eps0_local"] = format_double(r.eps0_local);
    meta["realization.noise_l2"] = format_double(r.noise_l2);
    meta["realization.snr_global_db"] = format_double(r.snr_global_db);
    write_manifest(join_path(dir, "meta.txt"), meta);
    std::ofstream os(join_path(dir, "stats.csv"));
    os << stats_csv(measure_stats(r));
    if (!os) throw std::runtime_error("cannot write stats.csv in " + dir);
}

Realization load_realization(const std::string& dir) {
    Realization r;
    auto model = std::make_shared<const ModelStack>(load_model(join_path(join_path(dir, "model"), "manifest.txt")));
    r.model = model;
    const std::size_t K = model->depth();
    auto relabel = [&](const LayeredVector& v, std::size_t i) {
        if (v.size() != model->geom(i).size())
            throw std::runtime_error("realization " + dir + ": layer " + std::to_string(i) + " has the wrong length");
        return LayeredVector(v.data, model->geom(i));
    };
    r.reps.push_back(relabel(load_vector(join_path(dir, "x.txt")), 0));
    for (std::size_t i = 1; i <= K; ++i)
        r.reps.push_back(relabel(load_vector(join_path(dir, "gamma_" + std::to_string(i) + ".txt")), i));
    r.y = relabel(load_vector(join_path(dir, "y.txt")), 0);
    Manifest meta = read_manifest(join_path(dir, "meta.txt"));
    r.index = std::stoull(meta.at("realization.index"));
    r.eps0_local = parse_double(meta.at("realization.eps0_local"));
    r.noise_l2 = parse_double(meta.at("realization.noise_l2"));
    r.snr_global_db = parse_double(meta.at("realization.snr_global_db"));
    return r;
}

}  // namespace mlcsc
