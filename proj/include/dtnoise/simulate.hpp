#pragma once

// Monte Carlo oracle: stationary noise synthesis on a fine grid, projection
// onto sampled primal/dual wavelets, and sample cross-covariances of the
// subband coefficients for comparison with the closed-form theory.

#include "dtnoise/covariance.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dtnoise {

struct SimConfig {
    WaveletFamily family;
    int d = 0;
    int levels = 3;          // J
    long length = 1L << 14;  // grid samples (1D) or side length (2D)
    int oversample = 16;     // R: grid points per unit of the j=1 wavelet argument
    int runs = 100;
    std::uint64_t base_seed = 20240915;
    // wavelet truncation half-width in wavelet-argument units; 0 picks a
    // per-family default
    double support_halfwidth = 0.0;
    int threads = 0; // 0 = hardware concurrency
    bool post_transform = false; // 2D: also estimate the +-1/sqrt(2) fields

    double dx() const { return static_cast<double>(family.bands) / oversample; }
    double halfwidth() const;
    void validate(bool two_dim = false) const;
};

struct GridSignal {
    double dx = 1.0;
    std::vector<double> samples;
};

// Stationary noise on a uniform grid; deterministic in the seed. White noise
// uses the i.i.d. N(0, sigma^2/dx) surrogate of continuous intensity-sigma^2
// noise, colored models use circulant spectral synthesis.
GridSignal synth_noise(const NoiseModel& model, long n, double dx,
                       std::uint64_t seed);

struct SampledWavelet {
    double du = 1.0;  // grid spacing in wavelet-argument units
    long first = 0;   // samples[i] is the value at u = (first + i) du
    std::vector<double> samples;
    double retained_energy = 1.0;
    bool truncated = false;
};

// Samples of the (possibly dual) basis function on a uniform argument grid,
// truncated at +-halfwidth. Band-limited and generic families are sampled
// through a >= 2^16-point inverse discrete Fourier evaluation; Haar-packet
// functions use exact cell-averaged time formulas.
SampledWavelet sample_wavelet(const WaveletSpectrum& spec, double du,
                              double halfwidth);

// Samples of M^{-j/2} psi(x / M^j - k) on the grid x = x0 + i dx, i < n.
std::vector<double> sample_wavelet_on_grid(const WaveletSpectrum& spec, int j,
                                           long k, double x0, double dx, long n);

struct MCEstimate {
    int j = 1;
    int m = 0, mprime = 0;
    CovKind kind = CovKind::primal_dual;
    int post = 0; // 0 plain, 1 Gamma_ww, 2 Gamma_wHwH, 3 Gamma_wwH
    long lag1 = 0, lag2 = 0; // lag2 used by the 2D estimates
    double mean = 0.0;
    double std_error = 0.0;
    double theory = 0.0;
    // expectation of the biased estimator relative to theory:
    // (N-|l|)/N per axis; the z-score tests against this expectation
    double expectation_scale = 1.0;
    int runs = 0;

    double z() const {
        return (std_error > 0.0) ? (mean - theory * expectation_scale) / std_error
                                 : 0.0;
    }
};

// 1D study: all levels j <= J, bands m (and band pairs for the
// orthonormality checks), biased sample cross-covariances aggregated over
// `runs` independent realizations. Parallel over runs, deterministic in
// base_seed regardless of thread count.
std::vector<MCEstimate> mc_run_1d(const SimConfig& cfg, const NoiseModel& model,
                                  std::span<const long> lags);

// 2D study at the coarsest level j = J over all subbands (m1, m2) with
// mprime = m; optionally also the post-transformed fields.
std::vector<MCEstimate> mc_run_2d(const SimConfig& cfg, const NoiseModel& model,
                                  std::span<const long> lags);

// Fraction of estimates with |mean - theory| <= z_max standard errors.
double fraction_within(std::span<const MCEstimate> cells, double z_max = 3.0);

} // namespace dtnoise
