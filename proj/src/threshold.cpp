#include "mlcsc/threshold.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlcsc {

std::string to_string(ThresholdKind k) {
    switch (k) {
        case ThresholdKind::Hard: return "hard";
        case ThresholdKind::Soft: return "soft";
        case ThresholdKind::SoftNonnegative: return "soft_nonneg";
    }
    return "?";
}

ThresholdKind parse_threshold_kind(const std::string& s) {
    if (s == "hard") return ThresholdKind::Hard;
    if (s == "soft") return ThresholdKind::Soft;
    if (s == "soft_nonneg" || s == "relu") return ThresholdKind::SoftNonnegative;
    throw std::invalid_argument("unknown threshold kind '" + s + "'");
}

double apply_threshold(ThresholdKind kind, double z, double beta) {
    switch (kind) {
        case ThresholdKind::Hard: return hard(z, beta);
        case ThresholdKind::Soft: return soft(z, beta);
        case ThresholdKind::SoftNonnegative: return soft_nonneg(z, beta);
    }
    return 0.0;
}

void threshold_inplace(ThresholdKind kind, std::vector<double>& v, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("threshold must be finite and >= 0");
    switch (kind) {
        case ThresholdKind::Hard:
            for (double& x : v) x = hard(x, beta);
            break;
        case ThresholdKind::Soft:
            for (double& x : v) x = soft(x, beta);
            break;
        case ThresholdKind::SoftNonnegative:
            for (double& x : v) x = soft_nonneg(x, beta);
            break;
    }
}

LayeredVector threshold(ThresholdKind kind, const LayeredVector& v, double beta) {
    LayeredVector out = v;
    threshold_inplace(kind, out.data, beta);
    return out;
}

OracleThreshold oracle_threshold(const std::vector<double>& v, std::size_t k) {
    if (k < 1 || k > v.size())
        throw std::invalid_argument("oracle_threshold: k=" + std::to_string(k) + " outside [1, " +
                                    std::to_string(v.size()) + "]");
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);
    std::sort(mag.begin(), mag.end(), std::greater<>());
    OracleThreshold r;
    r.beta = (k == v.size()) ? 0.0 : mag[k];
    for (double m : mag)
        if (m > r.beta) ++r.kept;
    r.tie = r.kept != k;
    return r;
}

LayeredVector debias(const ConvDictionary& d, const LayeredVector& y, const std::vector<std::size_t>& support) {
    LayeredVector out(d.in_geom());
    if (support.empty()) return out;
    const std::size_t s = support.size();
    LayeredVector corr = analyze(d, y);
    Eigen::MatrixXd G(s, s);
    Eigen::VectorXd b(s);
    for (std::size_t a = 0; a < s; ++a) {
        if (support[a] >= d.num_atoms()) throw std::out_of_range("debias: support index out of range");
        b(a) = corr.data[support[a]];
        for (std::size_t c = a; c < s; ++c) G(a, c) = G(c, a) = atom_inner(d, support[a], support[c]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12)
        throw std::runtime_error("debias: support atoms are numerically dependent");
    Eigen::VectorXd c = llt.solve(b);
    for (std::size_t a = 0; a < s; ++a) out.data[support[a]] = c(a);
    return out;
}

}  // namespace mlcsc
