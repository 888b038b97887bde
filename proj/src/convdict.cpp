#include "mlcsc/convdict.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "mlcsc/io.hpp"

namespace mlcsc {

LocalFilterBank LocalFilterBank::normalized(std::vector<std::vector<double>> raw) {
    if (raw.empty()) throw std::invalid_argument("filter bank needs at least one filter");
    const std::size_t len = raw[0].size();
    for (auto& f : raw) {
        if (f.empty() || f.size() != len) throw std::invalid_argument("filters must be non-empty and equally long");
        double nrm = norm2(f);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::invalid_argument("filter has zero or non-finite norm");
        if (std::abs(nrm - 1.0) < 1e-15) continue;  // already unit; keep bits for round trips
        for (double& x : f) x /= nrm;
    }
    return LocalFilterBank{std::move(raw)};
}

ConvDictionary::ConvDictionary(LocalFilterBank bank, std::size_t in_spatial_len, std::size_t spatial_stride,
                               std::size_t channel_stride)
    : bank_(std::move(bank)), s_(spatial_stride) {
    if (bank_.count() == 0) throw std::invalid_argument("empty filter bank");
    if (in_spatial_len == 0 || spatial_stride == 0 || channel_stride == 0)
        throw std::invalid_argument("dictionary sizes and strides must be positive");
    if (bank_.length() % channel_stride != 0)
        throw std::invalid_argument("filter length must be a multiple of the channel stride");
    for (const auto& f : bank_.filters)
        if (std::abs(norm2(f) - 1.0) > 1e-12 || f.size() != bank_.length())
            throw std::invalid_argument("filter bank is not unit-normalized; use LocalFilterBank::normalized");
    n_ = bank_.length() / channel_stride;
    out_.spatial_len = in_spatial_len * spatial_stride;
    out_.channels = channel_stride;
    if (n_ > out_.spatial_len)
        throw std::invalid_argument("filter spans more positions than the output layer has");
    out_.patch_len = n_;
    out_.stripe_len = n_;
    in_.spatial_len = in_spatial_len;
    in_.channels = bank_.count();
    in_.stripe_len = std::min(natural_stripe_len(), in_spatial_len);
    in_.patch_len = in_.stripe_len;
}

std::size_t ConvDictionary::natural_stripe_len() const { return 2 * ((n_ + s_ - 1) / s_) - 1; }

ConvDictionary ConvDictionary::relabeled(std::size_t in_patch_len, std::size_t out_stripe_len) const {
    ConvDictionary c = *this;
    c.in_.patch_len = in_patch_len;
    c.out_.stripe_len = out_stripe_len;
    c.in_.validate();
    c.out_.validate();
    return c;
}

namespace {

void require_shape(const LayerGeometry& want, const LayeredVector& v, const char* what) {
    if (v.geom.spatial_len != want.spatial_len || v.geom.channels != want.channels || v.size() != want.size())
        throw std::invalid_argument(std::string(what) + ": geometry mismatch (expected " +
                                    std::to_string(want.spatial_len) + "x" + std::to_string(want.channels) +
                                    ", got " + std::to_string(v.geom.spatial_len) + "x" +
                                    std::to_string(v.geom.channels) + ")");
}

}  // namespace

LayeredVector synthesize(const ConvDictionary& d, const LayeredVector& gamma) {
    require_shape(d.in_geom(), gamma, "synthesize");
    LayeredVector out(d.out_geom());
    const std::size_t m = d.num_filters(), total = out.size(), len = d.bank().length();
    const std::size_t step = d.spatial_stride() * d.channel_stride();
    for (std::size_t j = 0; j < d.in_geom().spatial_len; ++j) {
        const std::size_t base = j * step;
        for (std::size_t f = 0; f < m; ++f) {
            const double g = gamma.data[j * m + f];
            if (g == 0.0) continue;
            const auto& h = d.filter(f);
            if (base + len <= total) {
                double* o = out.data.data() + base;
                for (std::size_t t = 0; t < len; ++t) o[t] += g * h[t];
            } else {
                for (std::size_t t = 0; t < len; ++t) out.data[(base + t) % total] += g * h[t];
            }
        }
    }
    return out;
}

LayeredVector analyze(const ConvDictionary& d, const LayeredVector& x) {
    require_shape(d.out_geom(), x, "analyze");
    LayeredVector out(d.in_geom());
    const std::size_t m = d.num_filters(), total = x.size(), len = d.bank().length();
    const std::size_t step = d.spatial_stride() * d.channel_stride();
    for (std::size_t j = 0; j < d.in_geom().spatial_len; ++j) {
        const std::size_t base = j * step;
        for (std::size_t f = 0; f < m; ++f) {
            const auto& h = d.filter(f);
            double acc = 0.0;
            if (base + len <= total) {
                const double* xi = x.data.data() + base;
                for (std::size_t t = 0; t < len; ++t) acc += h[t] * xi[t];
            } else {
                for (std::size_t t = 0; t < len; ++t) acc += h[t] * x.data[(base + t) % total];
            }
            out.data[j * m + f] = acc;
        }
    }
    return out;
}

std::vector<double> atom_column(const ConvDictionary& d, std::size_t a) {
    if (a >= d.num_atoms()) throw std::out_of_range("atom index out of range");
    LayeredVector e(d.in_geom());
    e.data[a] = 1.0;
    return synthesize(d, e).data;
}

Eigen::MatrixXd densify(const ConvDictionary& d, std::size_t cap) {
    const std::size_t rows = d.out_geom().size(), cols = d.num_atoms();
    if (rows * cols > cap)
        throw std::invalid_argument("densify: " + std::to_string(rows) + "x" + std::to_string(cols) +
                                    " exceeds the entry cap");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t a = 0; a < cols; ++a) {
        auto col = atom_column(d, a);
        for (std::size_t r = 0; r < rows; ++r) D(r, a) = col[r];
    }
    return D;
}

namespace {

// entry offset of atom a within the output vector
std::size_t atom_offset(const ConvDictionary& d, std::size_t a) {
    return (a / d.num_filters()) * d.spatial_stride() * d.channel_stride();
}

double shifted_inner(const std::vector<double>& fa, const std::vector<double>& fb, std::size_t delta,
                     std::size_t total) {
    // fa at offset 0, fb at offset delta (cyclic, period total)
    const std::size_t len = fa.size();
    double acc = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        std::size_t u = (t + total - delta) % total;
        if (u < len) acc += fa[t] * fb[u];
    }
    return acc;
}

}  // namespace

double atom_inner(const ConvDictionary& d, std::size_t a, std::size_t b) {
    if (a >= d.num_atoms() || b >= d.num_atoms()) throw std::out_of_range("atom index out of range");
    const std::size_t total = d.out_geom().size();
    const std::size_t oa = atom_offset(d, a), ob = atom_offset(d, b);
    const std::size_t delta = (ob + total - oa) % total;
    return shifted_inner(d.filter(a % d.num_filters()), d.filter(b % d.num_filters()), delta, total);
}

double mutual_coherence(const ConvDictionary& d) {
    if (d.num_atoms() < 2) throw std::invalid_argument("mutual coherence needs at least two atoms");
    const std::size_t m = d.num_filters(), total = d.out_geom().size(), len = d.bank().length();
    const std::size_t step = d.spatial_stride() * d.channel_stride();
    double mu = 0.0;
    for (std::size_t lag = 0; lag < d.in_geom().spatial_len; ++lag) {
        const std::size_t delta = lag * step;
        if (delta >= len && delta + len <= total) continue;  // atoms do not overlap
        for (std::size_t fa = 0; fa < m; ++fa)
            for (std::size_t fb = 0; fb < m; ++fb) {
                if (lag == 0 && fa == fb) continue;
                mu = std::max(mu, std::abs(shifted_inner(d.filter(fa), d.filter(fb), delta, total)));
            }
    }
    return std::min(mu, 1.0);
}

std::size_t induced_l0(const ConvDictionary& d, double tol) {
    std::size_t best = 0;
    for (const auto& f : d.bank().filters) best = std::max(best, count_nonzeros(f, tol));
    return best;
}

double gram_spectral_bound(const ConvDictionary& d, double tol, std::size_t max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("gram_spectral_bound: tol must be positive");
    LayeredVector v(d.in_geom());
    // fixed pseudo-random start; a constant vector is an eigenvector of circulant Grams
    std::uint64_t z = 0x9E3779B97F4A7C15ull;
    for (double& x : v.data) {
        z += 0x9E3779B97F4A7C15ull;
        std::uint64_t r = z;
        r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ull;
        r = (r ^ (r >> 27)) * 0x94D049BB133111EBull;
        r ^= r >> 31;
        x = static_cast<double>(r >> 11) * 0x1.0p-53 - 0.5;
    }
    double nrm = norm2(v.data);
    for (double& x : v.data) x /= nrm;
    double rho = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        LayeredVector w = analyze(d, synthesize(d, v));
        double next = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) next += v.data[k] * w.data[k];
        double wn = norm2(w.data);
        if (wn == 0.0) return 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) v.data[k] = w.data[k] / wn;
        if (it > 0 && std::abs(next - rho) <= tol * std::abs(next)) return next * (1.0 + 10.0 * tol);
        rho = next;
    }
    throw ConvergenceError("gram_spectral_bound: power iteration did not converge", v.data);
}

std::vector<double> extract_atom_patch(const ConvDictionary& d, std::size_t atom) {
    if (atom >= d.num_atoms()) throw std::out_of_range("atom index out of range");
    return d.filter(atom % d.num_filters());
}

Eigen::MatrixXd stripe_dictionary(const ConvDictionary& d) {
    const std::size_t stripe = d.natural_stripe_len();
    if (stripe > d.in_geom().spatial_len)
        throw std::invalid_argument("stripe_dictionary: layer shorter than one stripe");
    const std::size_t m = d.num_filters(), mo = d.channel_stride(), len = d.bank().length();
    const std::size_t q = (stripe - 1) / 2;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(len, stripe * m);
    for (std::size_t k = 0; k < stripe; ++k) {
        // atom k-q relative to the patch owner, offset in entries may be negative
        const long off = (static_cast<long>(k) - static_cast<long>(q)) * static_cast<long>(d.spatial_stride() * mo);
        for (std::size_t f = 0; f < m; ++f) {
            const auto& h = d.filter(f);
            for (std::size_t r = 0; r < len; ++r) {
                long t = static_cast<long>(r) - off;
                if (t >= 0 && t < static_cast<long>(len)) omega(r, k * m + f) = h[t];
            }
        }
    }
    return omega;
}

ConvDictionary nonnegative_expand(const ConvDictionary& d) {
    std::vector<std::vector<double>> f = d.bank().filters;
    for (const auto& h : d.bank().filters) {
        std::vector<double> neg(h.size());
        for (std::size_t t = 0; t < h.size(); ++t) neg[t] = -h[t];
        f.push_back(std::move(neg));
    }
    return ConvDictionary(LocalFilterBank{std::move(f)}, d.in_geom().spatial_len, d.spatial_stride(),
                          d.channel_stride());
}

LayeredVector split_nonnegative(const LayeredVector& gamma) {
    LayerGeometry g = gamma.geom;
    const std::size_t m = g.channels;
    g.channels = 2 * m;
    LayeredVector out(g);
    for (std::size_t j = 0; j < g.spatial_len; ++j)
        for (std::size_t f = 0; f < m; ++f) {
            double x = gamma.data[j * m + f];
            if (x > 0) out.data[j * 2 * m + f] = x;
            else if (x < 0) out.data[j * 2 * m + m + f] = -x;
        }
    return out;
}

ModelStack::ModelStack(std::vector<ConvDictionary> layers, std::optional<std::size_t> deepest_patch_len) {
    if (layers.empty()) throw std::invalid_argument("model needs at least one layer");
    const std::size_t K = layers.size();
    for (std::size_t i = 1; i < K; ++i) {
        const auto& lower = layers[i - 1];  // D_i
        const auto& upper = layers[i];      // D_{i+1}
        if (upper.out_geom().spatial_len != lower.in_geom().spatial_len ||
            upper.channel_stride() != lower.num_filters())
            throw std::invalid_argument("layer " + std::to_string(i + 1) + " does not chain onto layer " +
                                        std::to_string(i));
    }
    std::size_t deepest = deepest_patch_len.value_or(layers[K - 1].in_geom().stripe_len);
    if (deepest == 0 || deepest > layers[K - 1].in_geom().spatial_len)
        throw std::invalid_argument("deepest patch length out of range");
    for (std::size_t i = 0; i < K; ++i) {
        std::size_t in_patch = (i + 1 < K) ? layers[i + 1].filter_spatial_len() : deepest;
        std::size_t out_stripe = (i > 0) ? layers[i - 1].in_geom().stripe_len : layers[0].filter_spatial_len();
        layers_.push_back(layers[i].relabeled(in_patch, out_stripe));
    }
}

const ConvDictionary& ModelStack::layer(std::size_t i) const {
    if (i == 0 || i > layers_.size()) throw std::out_of_range("layer index out of range");
    return layers_[i - 1];
}

const LayerGeometry& ModelStack::geom(std::size_t i) const {
    if (i > layers_.size()) throw std::out_of_range("layer index out of range");
    return i == 0 ? layers_[0].out_geom() : layers_[i - 1].in_geom();
}

RepStack propagate(const ModelStack& model, const LayeredVector& deepest) {
    const std::size_t K = model.depth();
    RepStack reps(K + 1);
    reps[K] = LayeredVector(deepest.data, model.geom(K));
    for (std::size_t i = K; i >= 1; --i) reps[i - 1] = synthesize(model.layer(i), reps[i]);
    return reps;
}

std::vector<double> load_filter(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read filter file " + path);
    std::vector<double> f;
    std::string line;
    while (std::getline(is, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        f.push_back(parse_double(line));
    }
    if (f.empty()) throw std::runtime_error("filter file " + path + " holds no values");
    return f;
}

void save_filter(const std::string& path, const std::vector<double>& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (double x : f) os << format_double(x) << '\n';
}

void save_model(const std::string& dir, const ModelStack& model) {
    Manifest m;
    for (std::size_t i = 1; i <= model.depth(); ++i) {
        const auto& d = model.layer(i);
        std::string files;
        for (std::size_t f = 0; f < d.num_filters(); ++f) {
            std::string name = "layer" + std::to_string(i) + "_filter" + std::to_string(f) + ".txt";
            save_filter(join_path(dir, name), d.filter(f));
            files += (f ? "," : "") + name;
        }
        std::string key = "layer." + std::to_string(i) + ".";
        m[key + "filters"] = files;
        m[key + "n"] = std::to_string(d.filter_spatial_len());
        m[key + "m"] = std::to_string(d.num_filters());
        m[key + "s"] = std::to_string(d.spatial_stride());
    }
    m["model.K"] = std::to_string(model.depth());
    m["model.deepest_len"] = std::to_string(model.geom(model.depth()).spatial_len);
    m["model.deepest_patch_len"] = std::to_string(model.geom(model.depth()).patch_len);
    write_manifest(join_path(dir, "manifest.txt"), m);
}

ModelStack load_model(const std::string& manifest_path) {
    Manifest m = read_manifest(manifest_path);
    const std::string dir = parent_dir(manifest_path);
    auto get = [&](const std::string& k) -> const std::string& {
        auto it = m.find(k);
        if (it == m.end()) throw std::invalid_argument("manifest " + manifest_path + " lacks key " + k);
        return it->second;
    };
    std::size_t K = 0;
    while (m.count("layer." + std::to_string(K + 1) + ".filters")) ++K;
    if (K == 0) throw std::invalid_argument("manifest " + manifest_path + " lists no layers");
    std::size_t deepest_len = std::stoul(m.count("model.deepest_len") ? get("model.deepest_len") : get("gen.deepest_len"));
    std::vector<std::vector<std::vector<double>>> banks(K + 1);
    std::vector<std::size_t> strides(K + 1), ns(K + 1);
    for (std::size_t i = 1; i <= K; ++i) {
        std::string key = "layer." + std::to_string(i) + ".";
        for (const auto& f : split_csv(get(key + "filters"))) banks[i].push_back(load_filter(join_path(dir, f)));
        ns[i] = std::stoul(get(key + "n"));
        strides[i] = std::stoul(get(key + "s"));
        if (m.count(key + "m") && std::stoul(get(key + "m")) != banks[i].size())
            throw std::invalid_argument("layer " + std::to_string(i) + ": m disagrees with the filter list");
    }
    std::vector<ConvDictionary> layers;
    std::vector<std::size_t> in_len(K + 1);
    in_len[K] = deepest_len;
    for (std::size_t i = K; i > 1; --i) in_len[i - 1] = in_len[i] * strides[i];
    for (std::size_t i = 1; i <= K; ++i) {
        std::size_t flen = banks[i][0].size();
        if (ns[i] == 0 || flen % ns[i] != 0)
            throw std::invalid_argument("layer " + std::to_string(i) + ": filter length not a multiple of n");
        layers.emplace_back(LocalFilterBank::normalized(banks[i]), in_len[i], strides[i], flen / ns[i]);
    }
    std::optional<std::size_t> dp;
    if (m.count("model.deepest_patch_len")) dp = std::stoul(get("model.deepest_patch_len"));
    return ModelStack(std::move(layers), dp);
}

}  // namespace mlcsc
