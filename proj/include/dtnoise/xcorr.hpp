#pragma once

// Deterministic cross-correlations gamma_{f,g}(tau) = int f(x) g(x-tau) dx
// between primal and dual basis functions: a generic spectral quadrature
// route, per-family closed forms, the packet recursion, and decay-rate
// fitting.

#include "dtnoise/spectra.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dtnoise {

enum class Method { quadrature, closed_form, packet_recursion };

struct CorrelationSequence {
    WaveletFamily family;
    int m = 0;
    int mprime = 0;
    int d = 0;
    Method method = Method::closed_form;
    std::vector<double> lags;
    std::vector<double> values;
    std::vector<double> est_abs_error;
};

struct GammaValue {
    double value = 0.0;
    double abs_err = 0.0;
};

struct GammaQuadOptions {
    // target absolute error; defaults follow the band-limited / general split
    double target = 0.0; // 0 => 1e-9 band-limited, 1e-7 otherwise
    std::size_t max_intervals = 20000;
};

// gamma_{f,g}(tau) = (1/pi) Re int_0^inf f_hat(w) conj(g_hat(w)) e^{iw tau} dw
// for arbitrary primal/dual spectra of the same family (both real-valued
// functions). Dual-scaling factors switch to the band-alternating route.
GammaValue gamma_quad(const WaveletSpectrum& f, const WaveletSpectrum& g,
                      double tau, const GammaQuadOptions& opt = {});

// gamma_{psi_m, psi_{m'}^H}: spectra passed as primal, the Hilbert factor
// applied internally. m' != 0 required.
GammaValue gamma_mother_quad(const WaveletSpectrum& m_spec,
                             const WaveletSpectrum& mp_spec, double tau,
                             const GammaQuadOptions& opt = {});

// gamma_{psi_m, psi_0^H}: the alternating band-sum route.
GammaValue gamma_scaling_quad(const WaveletSpectrum& m_spec,
                              const WaveletSpectrum& zero_spec, double tau,
                              int d, const GammaQuadOptions& opt = {});

// Inter-band gamma_{psi_m, psi_{m'}^H}, m != m'. Shannon returns exactly 0;
// Meyer requires configured phase slopes.
GammaValue interband_gamma(const WaveletSpectrum& m_spec,
                           const WaveletSpectrum& mp_spec, double tau, int d,
                           const GammaQuadOptions& opt = {});

// --------------------------------------------------------------------------
// Closed forms
// --------------------------------------------------------------------------

// Shannon: gamma_{psi_0,psi_0^H} / gamma_{psi_m,psi_m^H} at integer lags.
double gamma_shannon_closed(int m, long lag, int d);
// ... and at arbitrary real lags.
double gamma_shannon_real(int m, double tau, int d);

// I_eps(x) = 2 eps int_0^1 W^2((1+theta)/2) sin(pi eps x theta) dtheta.
double meyer_I_eps(double x, double eps);

// Meyer closed forms (integer lags, any band).
double gamma_meyer_closed(int m, long lag, int M, double eps, int d);
// real-lag variants used by colored-noise integrals
double gamma_meyer_real(int m, double tau, int M, double eps, int d);

// Haar, m in {0,1}; real lags. m = 0 is the alternating S_k series, m = 1 the
// exact log-polynomial (asymptotic series branch for large |tau|).
double gamma_haar_closed(int m, double tau, int d);

// Hadamard packet bands via the two-scale recursion on the Haar base.
double gamma_hadamard(int m, double tau);

// Franklin pieces.
double franklin_gamma_chi(double tau);
double franklin_a1_autocorr(long k);
double franklin_gamma_mother(double tau, double tol = 1e-10);
double franklin_gamma_scaling(double tau, int d);

// Closed-form dispatch: gamma_{psi_m,psi_{m'}^H}(tau) when a closed form
// exists for (family, m, m'); returns false otherwise.
bool has_closed_form(const WaveletFamily& family, int m, int mprime);
double gamma_closed(const WaveletFamily& family, int m, int mprime, double tau,
                    int d);

// Provider facade: real-lag evaluator for gamma_{psi_m,psi_{m'}^H}, closed
// form when available, quadrature otherwise.
struct GammaProvider {
    std::function<double(double)> fn;
    Method method = Method::closed_form;
    double abs_err = 0.0;
};
GammaProvider make_gamma_provider(const WaveletFamily& family, int m,
                                  int mprime, int d);
// Primal-primal (no Hilbert factor) companion, needed by colored-noise
// covariances: gamma_{psi_m,psi_{m'}}.
GammaProvider make_gamma_primal_provider(const WaveletFamily& family, int m,
                                         int mprime);

// --------------------------------------------------------------------------
// Packet recursion and asymptotics
// --------------------------------------------------------------------------

// Child gamma at the parent's half-lag grid:
// gamma_child(tau) = ga[0] gp(2 tau) + sum_k ga[k] (gp(2 tau+k) + gp(2 tau-k)).
CorrelationSequence packet_recursion(const CorrelationSequence& parent,
                                     std::span<const double> filter_autocorr,
                                     bool odd_child);

// Autocorrelation of an FIR impulse response (index k = 0..len-1).
std::vector<double> fir_autocorrelation(std::span<const double> taps);

struct AsymptoticBound {
    double exponent = 0.0;
    double leading_coeff = 0.0; // value * tau^exponent at the largest lag
    double valid_from = 0.0;
    double fit_residual = 0.0;
};

// Least-squares slope of log|gamma| against log tau.
AsymptoticBound decay_exponent_fit(std::span<const double> lags,
                                   std::span<const double> values);

} // namespace dtnoise
