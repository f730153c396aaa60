#include <catch2/catch_amalgamated.hpp>

#include "dtnoise/special.hpp"

#include <cmath>
#include <numbers>

using namespace dtnoise;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("sinc") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(kPi) == Catch::Approx(0.0).margin(1e-15));
    CHECK(sinc(1e-6) == Catch::Approx(1.0 - 1e-12 / 6.0).epsilon(1e-14));
    CHECK(sinc(2.0) == Catch::Approx(std::sin(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("sine integral reference values") {
    // reference values from standard tables
    CHECK(sine_integral(0.0) == 0.0);
    CHECK(sine_integral(1.0) == Catch::Approx(0.9460830703671830).epsilon(1e-14));
    CHECK(sine_integral(5.0) == Catch::Approx(1.5499312449446742).epsilon(1e-14));
    CHECK(sine_integral(8.0) == Catch::Approx(1.5741868217069421).epsilon(1e-14));
    CHECK(sine_integral(8.5) == Catch::Approx(1.6295970995903856).epsilon(1e-13));
    CHECK(sine_integral(50.0) == Catch::Approx(1.5516170724859359).epsilon(1e-13));
    CHECK(sine_integral(200.0) == Catch::Approx(1.5683823393394698).epsilon(1e-13));
    CHECK(sine_integral(-5.0) == Catch::Approx(-1.5499312449446742).epsilon(1e-14));
}

TEST_CASE("cosine integral reference values") {
    CHECK(cosine_integral(1.0) == Catch::Approx(0.3374039229009681).epsilon(1e-13));
    CHECK(cosine_integral(8.0) == Catch::Approx(0.1224338825320096).epsilon(1e-12));
    CHECK(cosine_integral(10.0) == Catch::Approx(-0.0454564330044554).epsilon(1e-12));
    CHECK(cosine_integral(120.0) == Catch::Approx(0.0047812382709346).epsilon(1e-10));
    CHECK_THROWS_AS(cosine_integral(-1.0), InvalidParam);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    auto f = [](double x) { return 5.0 * x * x * x - x + 2.0; };
    CHECK(gauss_legendre(f, -1.0, 3.0, 8) ==
          Catch::Approx(5.0 / 4.0 * (81.0 - 1.0) - (9.0 - 1.0) / 2.0 + 2.0 * 4.0)
              .epsilon(1e-14));
}

TEST_CASE("gauss-legendre oscillatory handles many periods") {
    // int_0^1 sin(200 x) dx = (1 - cos(200))/200
    const double v = gauss_legendre_oscillatory(
        [](double x) { return std::sin(200.0 * x); }, 0.0, 1.0, 200.0);
    CHECK(v == Catch::Approx((1.0 - std::cos(200.0)) / 200.0).margin(1e-14));
}

TEST_CASE("adaptive integrator") {
    QuadOptions q;
    q.abs_tol = 1e-12;
    const QuadResult r =
        integrate([](double x) { return std::exp(-x) * std::cos(10.0 * x); }, 0.0,
                  30.0, q);
    CHECK(r.value == Catch::Approx(1.0 / 101.0).margin(1e-11));
    CHECK(r.abs_err < 1e-10);
}

TEST_CASE("adaptive integrator reports failure") {
    QuadOptions q;
    q.abs_tol = 1e-15;
    q.max_intervals = 4;
    CHECK_THROWS_AS(
        integrate([](double x) { return std::sin(500.0 * x * x); }, 0.0, 20.0, q),
        QuadratureNonConvergent);
}

TEST_CASE("trig tails against 1/w^2") {
    // oracle: adaptive quadrature of the tail on a long finite range plus
    // analytic remainder smallness
    const double W = 7.0;
    const double c = 1.7;
    QuadOptions q;
    q.abs_tol = 1e-12;
    q.osc_freq = c;
    q.max_intervals = 200000;
    double brute = 0.0;
    brute += integrate([c](double w) { return std::sin(c * w) / (w * w); }, W,
                       40000.0, q)
                 .value;
    CHECK(tail_sin_over_w2(c, W) == Catch::Approx(brute).margin(1e-7));
    brute = integrate([c](double w) { return std::cos(c * w) / (w * w); }, W,
                      40000.0, q)
                .value;
    CHECK(tail_cos_over_w2(c, W) == Catch::Approx(brute).margin(1e-7));
    CHECK(tail_sin_over_w2(0.0, W) == 0.0);
    CHECK(tail_cos_over_w2(0.0, W) == Catch::Approx(1.0 / W).epsilon(1e-14));
    // odd/even symmetry in c
    CHECK(tail_sin_over_w2(-c, W) == Catch::Approx(-tail_sin_over_w2(c, W)));
    CHECK(tail_cos_over_w2(-c, W) == Catch::Approx(tail_cos_over_w2(c, W)));
}

TEST_CASE("finite band trig integrals") {
    const double a = 2.0, b = 9.0, c = 0.8;
    QuadOptions q;
    q.abs_tol = 1e-13;
    const double ref_s =
        integrate([c](double w) { return std::sin(c * w) / (w * w); }, a, b, q).value;
    const double ref_c =
        integrate([c](double w) { return std::cos(c * w) / (w * w); }, a, b, q).value;
    CHECK(int_sin_over_w2(c, a, b) == Catch::Approx(ref_s).margin(1e-12));
    CHECK(int_cos_over_w2(c, a, b) == Catch::Approx(ref_c).margin(1e-12));
}
