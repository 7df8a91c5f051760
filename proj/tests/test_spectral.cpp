#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fdnet/datagen.hpp"
#include "fdnet/errors.hpp"
#include "fdnet/numeric.hpp"
#include "fdnet/spectral.hpp"
#include "test_util.hpp"

using namespace fdnet;
using fdnet::testutil::midpoint_integral;

TEST_CASE("relu_cheb_coeff closed form") {
    CHECK(relu_cheb_coeff(0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
    CHECK(relu_cheb_coeff(1) == 0.5);
    CHECK(relu_cheb_coeff(3) == 0.0);
    CHECK(relu_cheb_coeff(5) == 0.0);
    CHECK(relu_cheb_coeff(2) == doctest::Approx(2.0 / (3.0 * kPi)).epsilon(1e-15));
    // cross-check p_2 by an independent quadrature of relu(cos) against cos(2.)
    const double quad = midpoint_integral(
        [](double t) {
            const double c = std::cos(kPi * t);
            return (c > 0 ? c : 0.0) * std::cos(2.0 * kPi * t);
        },
        200000);
    CHECK(quad == doctest::Approx(relu_cheb_coeff(2)).epsilon(1e-7));
}

TEST_CASE("chebyshev_T identities") {
    for (double w : {-1.0, 0.0, 0.3, 1.0}) CHECK(chebyshev_T(1, w) == w);
    CHECK(chebyshev_T(4, std::cos(0.7)) == doctest::Approx(std::cos(2.8)).epsilon(1e-12));
    // T_{2n+1}(sin t) = (-1)^n sin((2n+1) t); n = 1
    CHECK(chebyshev_T(3, std::sin(0.4)) == doctest::Approx(-std::sin(1.2)).epsilon(1e-12));
    CHECK_THROWS_AS(chebyshev_T(2, 1.5), std::domain_error);

    // T_n(cos t) = cos(n t) across orders
    for (int n = 0; n <= 12; ++n) {
        for (double t : {0.1, 0.9, 2.2}) {
            CHECK(chebyshev_T(n, std::cos(t)) == doctest::Approx(std::cos(n * t)).epsilon(1e-10));
        }
    }
}

TEST_CASE("fourier_coeffs recovers a single mode amplitude") {
    const int m = 32;
    const std::vector<double> grid = gen_grid(2e-4);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = 0.8 * std::cos(29.0 * kPi * grid[i]);
    const SpectrumReport rep = fourier_coeffs(f, grid, m);
    CHECK(rep.alpha_tilde[57] == doctest::Approx(0.8).epsilon(1e-9));
    for (int l = 0; l <= 2 * m; ++l) {
        if (l != 57) CHECK(std::fabs(rep.alpha_tilde[static_cast<std::size_t>(l)]) <= 1e-6);
    }
    CHECK(rep.support == std::vector<int>{57});
}

TEST_CASE("fourier_coeffs of zero input") {
    const std::vector<double> grid = gen_grid(1e-3);
    const std::vector<double> f(grid.size(), 0.0);
    const SpectrumReport rep = fourier_coeffs(f, grid, 8);
    for (double a : rep.alpha_tilde) CHECK(a == 0.0);
    CHECK(rep.support.empty());
    CHECK(rep.residual_l2 == 0.0);
}

TEST_CASE("fourier_coeffs of a rectified sine picks up p_1 = 1/2") {
    const int m = 64;
    const std::vector<double> grid = gen_grid(2e-4);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = std::sin(61.0 * kPi * grid[i]);
        f[i] = s > 0.0 ? s : 0.0;
    }
    const SpectrumReport rep = fourier_coeffs(f, grid, m);
    CHECK(rep.alpha_tilde[122] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(rep.alpha_tilde[0] == doctest::Approx(1.0 / kPi).epsilon(1e-6));
}

TEST_CASE("fourier_coeffs rejects a grid below the band resolution") {
    const std::vector<double> grid = gen_grid(0.05);  // 41 points
    const std::vector<double> f(grid.size(), 1.0);
    CHECK_THROWS_AS(fourier_coeffs(f, grid, 16), resolution_error);
    CHECK_NOTHROW(fourier_coeffs(f, grid, 9));
}

TEST_CASE("signed_alpha mirroring") {
    SpectrumReport rep;
    rep.m = 2;
    rep.alpha_tilde = {0.0, 1.0, 0.0, 0.0, 0.0};
    const SignedAlpha a = signed_alpha(rep);
    CHECK(a.at(1) == 1.0);
    CHECK(a.at(-1) == -1.0);
    CHECK(a.at(0) == 0.0);
    CHECK(a.at(2) == 0.0);

    SpectrumReport zero;
    zero.m = 2;
    zero.alpha_tilde.assign(5, 0.0);
    const SignedAlpha z = signed_alpha(zero);
    for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("signed_alpha of the ex1 spectrum carries the mode amplitudes") {
    const int m = 64;
    const std::vector<double> grid = gen_grid(2e-4);
    const TargetSpec spec = builtin_target("ex1");
    const SpectrumReport rep = fourier_coeffs(eval_target_grid(spec, grid), grid, m);
    const SignedAlpha a = signed_alpha(rep);
    CHECK(a.at(9) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(a.at(-9) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(a.at(57) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(a.at(-57) == doctest::Approx(-0.8).epsilon(1e-9));
    CHECK(a.at(122) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(a.at(-122) == doctest::Approx(-0.3).epsilon(1e-9));
}

TEST_CASE("lemma_expectation on the ex1 spectrum") {
    const int m = 64;
    const EmbeddingConfig cfg{m};
    const std::vector<double> grid = gen_grid(2e-4);
    const TargetSpec spec = builtin_target("ex1");
    const SpectrumReport rep = fourier_coeffs(eval_target_grid(spec, grid), grid, m);
    const SignedAlpha a = signed_alpha(rep);

    CHECK(lemma_expectation(a, 9, 1, grid, cfg) == doctest::Approx(0.25).epsilon(1e-5));
    CHECK(lemma_expectation(a, 9, -1, grid, cfg) == doctest::Approx(-0.25).epsilon(1e-5));
    // off-support mode (frequency 6, cosine)
    CHECK(std::fabs(lemma_expectation(a, 11, 1, grid, cfg)) <= 1e-5);
    CHECK_THROWS_AS(lemma_expectation(a, 0, 1, grid, cfg), std::invalid_argument);
}

TEST_CASE("lemma identity holds across the whole band") {
    // Support restricted to 4k+1 / 4k+2 indices, i.e. odd frequencies.
    const int m = 16;
    const EmbeddingConfig cfg{m};
    const std::vector<double> grid = gen_grid(2e-4);
    SpectrumReport rep;
    rep.m = m;
    rep.alpha_tilde.assign(static_cast<std::size_t>(2 * m + 1), 0.0);
    rep.alpha_tilde[5] = 0.7;    // cos, frequency 3
    rep.alpha_tilde[9] = -0.4;   // cos, frequency 5
    rep.alpha_tilde[14] = 0.25;  // sin, frequency 7
    rep.alpha_tilde[22] = 0.5;   // sin, frequency 11
    const SignedAlpha a = signed_alpha(rep);
    for (const LemmaCheck& c : lemma_scan(a, grid, cfg)) {
        CHECK(std::fabs(c.value - c.expected) <= 5e-5);
    }
}

TEST_CASE("fourier_coeffs is linear and Parseval-consistent") {
    const std::vector<double> grid = gen_grid(1e-3);
    const TargetSpec s1 = builtin_target("ex1");
    std::vector<double> f1 = eval_target_grid(s1, grid);
    std::vector<double> f2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        f2[i] = std::sin(kPi * grid[i]) - 0.2 * std::cos(3.0 * kPi * grid[i]);
    }
    std::vector<double> mix(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) mix[i] = 2.0 * f1[i] - 0.5 * f2[i];

    const int m = 64;
    const SpectrumReport r1 = fourier_coeffs(f1, grid, m);
    const SpectrumReport r2 = fourier_coeffs(f2, grid, m);
    const SpectrumReport rm = fourier_coeffs(mix, grid, m);
    for (std::size_t l = 0; l < rm.alpha_tilde.size(); ++l) {
        CHECK(std::fabs(rm.alpha_tilde[l] - (2.0 * r1.alpha_tilde[l] - 0.5 * r2.alpha_tilde[l])) <=
              1e-10);
    }

    double sum = 0.0;
    for (double v : r1.alpha_tilde) sum += v * v;
    std::vector<double> sq(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sq[i] = f1[i] * f1[i];
    CHECK(sum <= trapezoid(sq, 1e-3) + 1e-6);
}
