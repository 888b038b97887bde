#pragma once
// Elementwise thresholding operators, oracle thresholds and debiasing.
#include <cstddef>
#include <string>
#include <vector>

#include "mlcsc/convdict.hpp"
#include "mlcsc/signal.hpp"

namespace mlcsc {

enum class ThresholdKind { Hard, Soft, SoftNonnegative };

std::string to_string(ThresholdKind k);
ThresholdKind parse_threshold_kind(const std::string& s);

// |z| == beta maps to zero in every operator.
inline double hard(double z, double beta) { return (z > beta || z < -beta) ? z : 0.0; }
inline double soft(double z, double beta) {
    if (z > beta) return z - beta;
    if (z < -beta) return z + beta;
    return 0.0;
}
inline double soft_nonneg(double z, double beta) { return z > beta ? z - beta : 0.0; }
inline double relu(double z) { return z > 0.0 ? z : 0.0; }

double apply_threshold(ThresholdKind kind, double z, double beta);
// Throws if beta is negative or not finite.
void threshold_inplace(ThresholdKind kind, std::vector<double>& v, double beta);
LayeredVector threshold(ThresholdKind kind, const LayeredVector& v, double beta);

struct OracleThreshold {
    double beta = 0.0;
    std::size_t kept = 0;  // entries with |v| > beta
    bool tie = false;      // k-th and (k+1)-th magnitudes coincide, so kept != k
};
OracleThreshold oracle_threshold(const std::vector<double>& v, std::size_t k);

// Least squares on the given atoms; zeros elsewhere.
LayeredVector debias(const ConvDictionary& d, const LayeredVector& y, const std::vector<std::size_t>& support);

}  // namespace mlcsc
