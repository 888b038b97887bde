#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mlcsc/signal.hpp"
#include "oracle.hpp"

using namespace mlcsc;

namespace {
LayeredVector vec(std::vector<double> d, std::size_t m = 1, std::size_t patch = 1, std::size_t stripe = 1) {
    LayerGeometry g{d.size() / m, m, patch, stripe};
    return LayeredVector(std::move(d), g);
}
}  // namespace

TEST_CASE("patches are cyclic slices") {
    auto v = vec({1, 2, 3, 4}, 1, 2, 1);
    CHECK(extract_patch(v, 0) == std::vector<double>{1, 2});
    CHECK(extract_patch(v, 3) == std::vector<double>{4, 1});
    CHECK_THROWS_AS(extract_patch(v, 4), std::out_of_range);
    auto z = vec(std::vector<double>(8, 0.0), 1, 3, 3);
    for (std::size_t j = 0; j < 8; ++j) CHECK(extract_patch(z, j) == std::vector<double>(3, 0.0));
}

TEST_CASE("multi-channel patch keeps channel order") {
    auto v = vec({1, 2, 3, 4, 5, 6}, 2, 2, 1);
    CHECK(extract_patch(v, 2) == std::vector<double>{5, 6, 1, 2});
}

TEST_CASE("stripes are centred on j") {
    auto v = vec({1, 0, 1, 0}, 1, 1, 3);
    CHECK(extract_stripe(v, 1) == std::vector<double>{1, 0, 1});  // positions 0,1,2
    CHECK(extract_stripe(v, 0) == std::vector<double>{0, 1, 0});  // positions 3,0,1
    auto z = vec(std::vector<double>(6, 0.0), 1, 1, 3);
    CHECK(extract_stripe(z, 4) == std::vector<double>(3, 0.0));
    std::vector<double> d(6, 0.0);
    d[2] = 7.0;
    auto one = vec(d, 1, 1, 3);
    for (std::size_t j : {1u, 2u, 3u}) {
        auto s = extract_stripe(one, j);
        CHECK(std::count(s.begin(), s.end(), 7.0) == 1);
    }
}

TEST_CASE("local l0 norms") {
    CHECK(norm_l0inf_stripe(vec({0, 0, 0, 0}, 1, 1, 3)) == 0);
    CHECK(norm_l0inf_stripe(vec({0, 2, 0, 0}, 1, 1, 3)) == 1);
    CHECK(norm_l0inf_stripe(vec({1, 0, 1, 0}, 1, 1, 3)) == 2);
    CHECK(norm_l0inf_patch(vec({3, 0, 0, 5}, 1, 2, 1)) == 2);
    CHECK(norm_l0inf_patch(vec(std::vector<double>(12, 1.0), 2, 4, 1)) == 8);
    // below the zero tolerance
    CHECK(norm_l0inf_patch(vec({1e-13, 0, 0, 0}, 1, 2, 1)) == 0);
}

TEST_CASE("local l2 norm") {
    CHECK(norm_l2inf_patch(vec({0, 0, 0}, 1, 2, 1)) == 0.0);
    CHECK(norm_l2inf_patch(vec({0, 5, 0}, 1, 2, 1)) == 5.0);
    CHECK(norm_l2inf_patch(vec({3, 4, 0, 0}, 1, 2, 1)) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("local SNR") {
    auto t = vec({10, 0, 0, 0}, 1, 1, 1);
    CHECK(local_snr(t, t) == std::numeric_limits<double>::infinity());
    auto e = vec({9, 0, 0, 0}, 1, 1, 1);
    CHECK(local_snr(t, e) == doctest::Approx(20.0).epsilon(1e-14));
    auto t2 = vec({1, 0}, 1, 1, 1), e2 = vec({0.5, 0}, 1, 1, 1);
    CHECK(local_snr(t2, e2) == doctest::Approx(6.0206).epsilon(1e-5));
    CHECK_THROWS(local_snr(t, t2));
}

TEST_CASE("norms agree with brute-force enumeration") {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + g() % 32, m = 1 + g() % 3;
        std::size_t p = 1 + g() % n, s = 1 + g() % n;
        auto d = oracle::random_vector(g, n * m, 0.7);
        LayeredVector v(d, LayerGeometry{n, m, p, s});
        CHECK(norm_l0inf_patch(v) == oracle::brute_l0(d, m, p));
        CHECK(norm_l0inf_stripe(v) == oracle::brute_l0(d, m, s));
        CHECK(norm_l2inf_patch(v) == doctest::Approx(oracle::brute_l2(d, m, p)).epsilon(1e-12));
        CHECK(norm_l0inf_stripe(v) <= std::min(count_nonzeros(d), s * m));
        CHECK(norm_l2inf_patch(v) <= norm2(d) * (1 + 1e-12));
    }
}

TEST_CASE("l2 patch norm equals l2 norm when the patch is the whole layer") {
    std::mt19937_64 g(3);
    auto d = oracle::random_vector(g, 10);
    LayeredVector v(d, LayerGeometry{5, 2, 5, 1});
    CHECK(norm_l2inf_patch(v) == doctest::Approx(norm2(d)).epsilon(1e-14));
}

TEST_CASE("extraction is linear") {
    std::mt19937_64 g(5);
    LayerGeometry geo{9, 2, 3, 5};
    LayeredVector a(oracle::random_vector(g, 18), geo), b(oracle::random_vector(g, 18), geo), c(geo);
    for (std::size_t k = 0; k < 18; ++k) c.data[k] = 2.0 * a.data[k] - b.data[k];
    for (std::size_t j = 0; j < 9; ++j) {
        auto pa = extract_stripe(a, j), pb = extract_stripe(b, j), pc = extract_stripe(c, j);
        for (std::size_t k = 0; k < pc.size(); ++k) CHECK(pc[k] == doctest::Approx(2.0 * pa[k] - pb[k]));
    }
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(LayeredVector(std::vector<double>(5), LayerGeometry{2, 2, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(LayeredVector(LayerGeometry{4, 1, 5, 1}), std::invalid_argument);
    CHECK_THROWS_AS(LayeredVector(LayerGeometry{0, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("vector text format round-trips bit-exactly") {
    std::mt19937_64 g(9);
    LayeredVector v(oracle::random_vector(g, 12, 0.3), LayerGeometry{6, 2, 2, 3});
    v.data[0] = 1e-300;
    v.data[1] = -0.1;
    std::stringstream ss;
    write_vector(ss, v);
    CHECK(ss.str().rfind("#spatial_len=6\n#channels=2\n#patch_len=2\n#stripe_len=3\n", 0) == 0);
    LayeredVector w = read_vector(ss);
    CHECK(w.geom == v.geom);
    CHECK(w.data == v.data);
    CHECK(parse_double(format_double(std::numeric_limits<double>::infinity())) ==
          std::numeric_limits<double>::infinity());
    CHECK_THROWS(parse_double("1.0x"));
}
