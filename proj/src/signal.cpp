#include "mlcsc/signal.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mlcsc {

void LayerGeometry::validate() const {
    if (spatial_len == 0 || channels == 0 || patch_len == 0 || stripe_len == 0)
        throw std::invalid_argument("layer geometry: all sizes must be positive");
    if (patch_len > spatial_len || stripe_len > spatial_len)
        throw std::invalid_argument("layer geometry: patch/stripe longer than the layer");
}

LayeredVector::LayeredVector(std::vector<double> d, const LayerGeometry& g) : data(std::move(d)), geom(g) {
    g.validate();
    if (data.size() != g.size())
        throw std::invalid_argument("layered vector: data length " + std::to_string(data.size()) +
                                    " does not match geometry " + std::to_string(g.size()));
}

namespace {

std::vector<double> cyclic_window(const LayeredVector& v, std::size_t start, std::size_t len) {
    const auto& g = v.geom;
    std::vector<double> out;
    out.reserve(len * g.channels);
    for (std::size_t t = 0; t < len; ++t) {
        std::size_t p = (start + t) % g.spatial_len;
        for (std::size_t c = 0; c < g.channels; ++c) out.push_back(v.data[p * g.channels + c]);
    }
    return out;
}

void check_index(const LayeredVector& v, std::size_t j) {
    if (j >= v.geom.spatial_len)
        throw std::out_of_range("spatial index " + std::to_string(j) + " outside layer of length " +
                                std::to_string(v.geom.spatial_len));
}

void check_window(const LayeredVector& v, std::size_t window) {
    if (window == 0 || window > v.geom.spatial_len)
        throw std::invalid_argument("window length must lie in [1, spatial_len]");
}

}  // namespace

std::vector<double> extract_patch(const LayeredVector& v, std::size_t j) {
    check_index(v, j);
    return cyclic_window(v, j, v.geom.patch_len);
}

std::vector<double> extract_stripe(const LayeredVector& v, std::size_t j) {
    check_index(v, j);
    const std::size_t n = v.geom.spatial_len;
    const std::size_t back = ((v.geom.stripe_len - 1) / 2) % n;
    return cyclic_window(v, (j + n - back) % n, v.geom.stripe_len);
}

std::size_t window_l0_max(const LayeredVector& v, std::size_t window, double tol) {
    check_window(v, window);
    const auto& g = v.geom;
    std::vector<std::size_t> per_pos(g.spatial_len, 0);
    for (std::size_t p = 0; p < g.spatial_len; ++p)
        for (std::size_t c = 0; c < g.channels; ++c)
            if (std::abs(v.data[p * g.channels + c]) > tol) ++per_pos[p];
    // sliding count, integers so no drift
    std::size_t cur = 0;
    for (std::size_t t = 0; t < window; ++t) cur += per_pos[t];
    std::size_t best = cur;
    for (std::size_t j = 1; j < g.spatial_len; ++j) {
        cur -= per_pos[j - 1];
        cur += per_pos[(j + window - 1) % g.spatial_len];
        if (cur > best) best = cur;
    }
    return best;
}

double window_l2_max(const LayeredVector& v, std::size_t window) {
    check_window(v, window);
    const auto& g = v.geom;
    std::vector<double> per_pos(g.spatial_len, 0.0);
    for (std::size_t p = 0; p < g.spatial_len; ++p)
        for (std::size_t c = 0; c < g.channels; ++c) {
            double x = v.data[p * g.channels + c];
            per_pos[p] += x * x;
        }
    // direct sums per window: cheap at our sizes and free of running-sum drift
    double best = 0.0;
    for (std::size_t j = 0; j < g.spatial_len; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < window; ++t) s += per_pos[(j + t) % g.spatial_len];
        if (s > best) best = s;
    }
    return std::sqrt(best);
}

std::size_t norm_l0inf_stripe(const LayeredVector& v, double tol) {
    return window_l0_max(v, v.geom.stripe_len, tol);
}
std::size_t norm_l0inf_patch(const LayeredVector& v, double tol) {
    return window_l0_max(v, v.geom.patch_len, tol);
}
double norm_l2inf_patch(const LayeredVector& v) { return window_l2_max(v, v.geom.patch_len); }

double local_snr(const LayeredVector& truth, const LayeredVector& est) {
    if (!(truth.geom == est.geom)) throw std::invalid_argument("local_snr: geometry mismatch");
    LayeredVector diff(truth.geom);
    for (std::size_t k = 0; k < truth.size(); ++k) diff.data[k] = truth.data[k] - est.data[k];
    double e = norm_l2inf_patch(diff);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(norm_l2inf_patch(truth) / e);
}

std::size_t count_nonzeros(const std::vector<double>& v, double tol) {
    std::size_t k = 0;
    for (double x : v)
        if (std::abs(x) > tol) ++k;
    return k;
}

std::vector<std::size_t> support_of(const std::vector<double>& v, double tol) {
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (std::abs(v[k]) > tol) s.push_back(k);
    return s;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw std::invalid_argument("empty number");
    std::string t = s.substr(b, e - b + 1);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw std::invalid_argument("not a number: '" + t + "'");
    return x;
}

void write_vector(std::ostream& os, const LayeredVector& v) {
    os << "#spatial_len=" << v.geom.spatial_len << "\n#channels=" << v.geom.channels
       << "\n#patch_len=" << v.geom.patch_len << "\n#stripe_len=" << v.geom.stripe_len << '\n';
    for (double x : v.data) os << format_double(x) << '\n';
}

LayeredVector read_vector(std::istream& is) {
    LayerGeometry g;
    bool seen[4] = {false, false, false, false};
    std::vector<double> data;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;  // free comment
            std::string key = line.substr(1, eq - 1);
            std::size_t val = std::stoul(line.substr(eq + 1));
            if (key == "spatial_len") { g.spatial_len = val; seen[0] = true; }
            else if (key == "channels") { g.channels = val; seen[1] = true; }
            else if (key == "patch_len") { g.patch_len = val; seen[2] = true; }
            else if (key == "stripe_len") { g.stripe_len = val; seen[3] = true; }
            continue;
        }
        data.push_back(parse_double(line));
    }
    if (!seen[0]) g.spatial_len = data.size() / (seen[1] ? g.channels : 1);
    if (!seen[2]) g.patch_len = 1;
    if (!seen[3]) g.stripe_len = 1;
    return LayeredVector(std::move(data), g);
}

void save_vector(const std::string& path, const LayeredVector& v) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_vector(os, v);
    if (!os) throw std::runtime_error("write failed: " + path);
}

LayeredVector load_vector(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read_vector(is);
}

}  // namespace mlcsc
