#pragma once
// Layered vectors, patch/stripe extraction and local norms.
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlcsc {

// |x| > kZeroTol counts as a nonzero.
inline constexpr double kZeroTol = 1e-12;

struct LayerGeometry {
    std::size_t spatial_len = 1;
    std::size_t channels = 1;
    std::size_t patch_len = 1;
    std::size_t stripe_len = 1;

    std::size_t size() const { return spatial_len * channels; }
    void validate() const;  // throws std::invalid_argument
    bool operator==(const LayerGeometry&) const = default;
};

struct LayeredVector {
    std::vector<double> data;
    LayerGeometry geom;

    LayeredVector() = default;
    explicit LayeredVector(const LayerGeometry& g) : data(g.size(), 0.0), geom(g) { g.validate(); }
    LayeredVector(std::vector<double> d, const LayerGeometry& g);

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
};

std::vector<double> extract_patch(const LayeredVector& v, std::size_t j);
// Window of stripe_len positions starting (stripe_len-1)/2 before j.
std::vector<double> extract_stripe(const LayeredVector& v, std::size_t j);

// Max nonzero count over all cyclic windows of `window` spatial positions.
std::size_t window_l0_max(const LayeredVector& v, std::size_t window, double tol = kZeroTol);
double window_l2_max(const LayeredVector& v, std::size_t window);

std::size_t norm_l0inf_stripe(const LayeredVector& v, double tol = kZeroTol);
std::size_t norm_l0inf_patch(const LayeredVector& v, double tol = kZeroTol);
double norm_l2inf_patch(const LayeredVector& v);

// 20 log10(|truth|_{2,inf} / |truth-est|_{2,inf}); +inf when the error vanishes.
double local_snr(const LayeredVector& truth, const LayeredVector& est);

std::size_t count_nonzeros(const std::vector<double>& v, double tol = kZeroTol);
std::vector<std::size_t> support_of(const std::vector<double>& v, double tol = kZeroTol);
double norm2(const std::vector<double>& v);
double max_abs(const std::vector<double>& v);

// Text format: "#key=value" header lines then one value per line.
void write_vector(std::ostream& os, const LayeredVector& v);
LayeredVector read_vector(std::istream& is);
void save_vector(const std::string& path, const LayeredVector& v);
LayeredVector load_vector(const std::string& path);

// Formats doubles so they parse back bit-identically; "inf"/"-inf"/"nan" for specials.
std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace mlcsc
