#pragma once

// Scalar special functions and one-dimensional quadrature used throughout
// the library: sinc, sine/cosine integrals, fixed-order Gauss-Legendre
// panels and an adaptive Gauss-Kronrod integrator tuned for oscillatory
// spectral integrands.

#include "dtnoise/errors.hpp"

#include <cstddef>
#include <functional>

namespace dtnoise {

// sin(x)/x, 1 at x = 0.
double sinc(double x);

// Sine integral Si(x) = int_0^x sin(u)/u du. Odd in x.
double sine_integral(double x);

// Cosine integral Ci(x) = -int_x^inf cos(u)/u du, x > 0.
double cosine_integral(double x);

struct QuadResult {
    double value = 0.0;
    double abs_err = 0.0;
};

// Fixed-order Gauss-Legendre rule on [a,b]. `order` points, order >= 2.
double gauss_legendre(const std::function<double(double)>& f, double a,
                      double b, int order = 64);

// Composite Gauss-Legendre: splits [a,b] so each panel sees at most
// ~24 radians of phase of the dominant oscillation `freq` (rad per unit x).
double gauss_legendre_oscillatory(const std::function<double(double)>& f,
                                  double a, double b, double freq,
                                  int order = 64);

struct QuadOptions {
    double abs_tol = 1e-10;
    // Dominant oscillation frequency (radians per unit of x); controls the
    // initial panelization so the adaptive pass starts resolved.
    double osc_freq = 0.0;
    std::size_t max_intervals = 4000;
    // When false, a tolerance miss is reported in abs_err instead of throwing.
    bool throw_on_failure = true;
};

// Adaptive Gauss(7)/Kronrod(15) integration of f on the finite interval
// [a,b]. Throws QuadratureNonConvergent if the tolerance cannot be met
// within max_intervals (unless throw_on_failure is false).
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const QuadOptions& opt = {});

// Exact tails of trigonometric integrands against 1/w^2, needed to finish
// slowly decaying spectral integrals:
//   tail_sin_over_w2(c, W) = int_W^inf sin(c w)/w^2 dw
//   tail_cos_over_w2(c, W) = int_W^inf cos(c w)/w^2 dw
double tail_sin_over_w2(double c, double W);
double tail_cos_over_w2(double c, double W);

// Finite versions on [a,b], exact via Si/Ci:
//   int_a^b sin(c w)/w^2 dw   and   int_a^b cos(c w)/w^2 dw,  0 < a < b.
double int_sin_over_w2(double c, double a, double b);
double int_cos_over_w2(double c, double a, double b);

} // namespace dtnoise
