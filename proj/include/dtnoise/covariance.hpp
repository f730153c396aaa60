#pragma once

// Propagation of a stationary noise model through the dual-tree
// decomposition: 1D covariance sequences, separable 2D covariance fields,
// the +-1/sqrt(2) post-transform, decay verification, and the
// coarse-resolution white-noise limit.

#include "dtnoise/xcorr.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace dtnoise {

enum class NoiseKind { White, ExponentialDecay, Tabulated };

struct NoiseModel {
    NoiseKind kind = NoiseKind::White;
    double sigma2 = 1.0;    // White
    double amplitude = 1.0; // ExponentialDecay: Gamma_n = A e^{-alpha |tau|}
    double alpha = 1.0;
    std::vector<double> table; // Tabulated: Gamma_n at tau = 0, dt, 2dt, ...
    double table_dt = 0.0;

    static NoiseModel white(double sigma2 = 1.0);
    static NoiseModel exponential(double A, double alpha);
    static NoiseModel tabulated(std::vector<double> values, double dt);
    static NoiseModel tabulated_from_csv(const std::string& path);

    void validate() const;
    // Gamma_n(tau); cubic interpolation on the grid for Tabulated, zero
    // beyond its range.
    double autocovariance(double tau) const;
    // Gamma_hat(0) = int Gamma_n; closed form 2A/alpha for ExponentialDecay,
    // composite trapezoid for Tabulated. White noise is excluded.
    double spectral_density_zero() const;
};

enum class CovKind { primal_primal, dual_dual, primal_dual };

struct CovSequence1D {
    int j = 1;
    int m = 0, mprime = 0;
    CovKind kind = CovKind::primal_dual;
    std::vector<long> lags;
    std::vector<double> values;
};

struct CovField2D {
    int j = 1;
    std::array<int, 2> m{0, 0}, mprime{0, 0};
    CovKind kind = CovKind::primal_dual;
    std::vector<long> lags1, lags2;
    std::vector<double> values; // row-major over (lags1, lags2)
    bool post_transformed = false;

    double at(std::size_t i1, std::size_t i2) const {
        return values[i1 * lags2.size() + i2];
    }
};

// Gamma_{n_{j,m}, n_{j,m'}(^H)}[l]: exact Kronecker/cross formulas for white
// noise, adaptive quadrature of the covariance integral otherwise.
CovSequence1D cov_1d(const NoiseModel& noise, const WaveletFamily& family, int j,
                     int m, int mprime, std::span<const long> lags, CovKind kind,
                     int d = 0);

// Separable 2D field: product of the 1D factors.
CovField2D cov_2d(const NoiseModel& noise, const WaveletFamily& family, int j,
                  std::array<int, 2> m, std::array<int, 2> mprime,
                  std::span<const long> lags1, std::span<const long> lags2,
                  CovKind kind, int d = 0);

struct PostTransformPair {
    CovField2D ww;     // Gamma_{w,w}
    CovField2D whwh;   // Gamma_{w^H,w^H}
    CovField2D cross;  // Gamma_{w,w^H}, identically zero
};

// Prop-3 algebra on a subband with both components nonzero.
PostTransformPair post_transform_cov(const CovField2D& nn, const CovField2D& nnh);

// Coarse-resolution limit Gamma_hat(0) gamma_{psi_m,psi_{m'}^H}(-l).
double coarse_limit(const NoiseModel& noise, const WaveletFamily& family, int m,
                    int mprime, long lag, int d = 0);

struct DecayReport {
    double sup_weighted = 0.0;  // sup |Gamma[l]| (1 + |l|^(2N+1))
    double trend_slope = 0.0;   // log-log slope of the weighted values beyond l=8
    bool pass = false;
};

// Checks |Gamma[l]| (1 + |l|^{2N_m+1}) for boundedness and a non-increasing
// trend beyond l = 8.
DecayReport verify_cov_decay(std::span<const long> lags,
                             std::span<const double> values, int moments);

} // namespace dtnoise
