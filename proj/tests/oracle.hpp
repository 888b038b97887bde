#pragma once
// Independent reference computations used by the tests. Nothing here calls the
// library's operators; dense matrices are built from the atom definition directly.
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// Column j*m+f holds filter f starting at entry j*s*mo, wrapping cyclically.
inline Eigen::MatrixXd dense_dictionary(const std::vector<std::vector<double>>& filters, std::size_t n_in,
                                        std::size_t s, std::size_t mo) {
    const std::size_t m = filters.size(), rows = n_in * s * mo;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, n_in * m);
    for (std::size_t j = 0; j < n_in; ++j)
        for (std::size_t f = 0; f < m; ++f)
            for (std::size_t t = 0; t < filters[f].size(); ++t) D((j * s * mo + t) % rows, j * m + f) += filters[f][t];
    return D;
}

inline double dense_coherence(const Eigen::MatrixXd& D) {
    Eigen::MatrixXd G = D.transpose() * D;
    double mu = 0.0;
    for (Eigen::Index a = 0; a < G.rows(); ++a)
        for (Eigen::Index b = 0; b < G.cols(); ++b)
            if (a != b) mu = std::max(mu, std::abs(G(a, b)));
    return mu;
}

inline double dense_lambda_max(const Eigen::MatrixXd& D) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * D);
    return es.eigenvalues().maxCoeff();
}

// Enumerate every cyclic window of `w` positions (m channels each).
inline std::size_t brute_l0(const std::vector<double>& v, std::size_t m, std::size_t w, double tol = 1e-12) {
    const std::size_t n = v.size() / m;
    std::size_t best = 0;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t c = 0;
        for (std::size_t t = 0; t < w; ++t)
            for (std::size_t k = 0; k < m; ++k)
                if (std::abs(v[((j + t) % n) * m + k]) > tol) ++c;
        best = std::max(best, c);
    }
    return best;
}

inline double brute_l2(const std::vector<double>& v, std::size_t m, std::size_t w) {
    const std::size_t n = v.size() / m;
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < w; ++t)
            for (std::size_t k = 0; k < m; ++k) s += v[((j + t) % n) * m + k] * v[((j + t) % n) * m + k];
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

inline std::vector<double> random_vector(std::mt19937_64& g, std::size_t n, double sparsity = 0.0) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u;
    std::vector<double> v(n);
    for (auto& x : v) x = (u(g) < sparsity) ? 0.0 : nd(g);
    return v;
}

inline std::vector<std::vector<double>> random_filters(std::mt19937_64& g, std::size_t count, std::size_t len) {
    std::vector<std::vector<double>> f(count);
    for (auto& h : f) {
        h = random_vector(g, len);
        double n = 0.0;
        for (double x : h) n += x * x;
        n = std::sqrt(n);
        for (double& x : h) x /= n;
    }
    return f;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = std::max(a.norm(), b.norm());
    return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

}  // namespace oracle
