#pragma once

// Fourier-domain representations of the supported wavelet families and the
// Hilbert-dual construction: one scaling function psi_0 and M-1 mother
// wavelets psi_m per family, evaluated as psi_hat_m(w), plus the dual
// spectra psi_hat_m^H obtained from the signum rule (m != 0) or the
// piecewise band-sign rule (m = 0).

#include "dtnoise/errors.hpp"

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dtnoise {

enum class FamilyKind {
    Shannon,
    Meyer,
    HaarPacket,   // Walsh-Hadamard packets, M = 2^P (Haar when P = 1)
    Franklin,
    BattleLemarie,
    CustomFIR,
};

struct WaveletFamily {
    FamilyKind kind = FamilyKind::Shannon;
    int bands = 2;          // M >= 2
    double epsilon = 0.0;   // Meyer taper width, 0 < eps <= 1/(M+1)
    int spline_order = 1;   // BattleLemarie: odd positive spline degree
    int packet_depth = 1;   // P with M = 2^P (HaarPacket, CustomFIR packets)
    // CustomFIR: either the dyadic pair {a0, a1} used as a packet tree of
    // depth P, or M filter rows h_0..h_{M-1} of a direct M-band bank.
    std::vector<std::vector<double>> filters;
    // Optional linear-phase slopes for the Meyer bands 1..M-1; required by
    // inter-band evaluation, ignored by squared-modulus work.
    std::optional<std::vector<double>> meyer_phase_slopes;

    static WaveletFamily shannon(int M = 2);
    static WaveletFamily meyer(int M, double eps);
    static WaveletFamily haar();                 // M = 2
    static WaveletFamily haar_packet(int depth); // M = 2^depth
    static WaveletFamily franklin();
    static WaveletFamily battle_lemarie(int order);
    static WaveletFamily custom_fir(std::vector<std::vector<double>> filters,
                                    int packet_depth = 1);

    void validate() const; // throws InvalidParam / NotParaUnitary
    std::string name() const;
    bool operator==(const WaveletFamily&) const = default;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Sentinel for band-limited wavelets whose spectrum vanishes identically
// near w = 0 (every moment vanishes).
inline constexpr int kUnboundedMoments = std::numeric_limits<int>::max();

// Asymptotic description of a spectrum for w -> +inf, used to finish
// slowly converging integrals: w^p * psi_hat(w) ~ sum_q coeff_q e^{i freq_q w}.
// When `terms` is empty the model is bound-only: |psi_hat| <= bound / w^p.
struct TrigTerm {
    std::complex<double> coeff;
    double freq = 0.0;
};

struct SpectrumTail {
    int inverse_power = 0; // 0 => band-limited, no tail
    std::vector<TrigTerm> terms;
    double bound = 0.0;
};

struct HilbertDualRule {
    int delay = 0; // the integer delay d of the dual scaling function
};

class WaveletSpectrum {
public:
    WaveletSpectrum() = default;
    WaveletSpectrum(WaveletFamily family, int m);

    // psi_hat_m(w) (or the dual spectrum when is_dual()).
    std::complex<double> eval(double w) const;
    // |psi_hat_m(w)|^2 through direct real formulas; identical for the dual.
    double eval_sq(double w) const;

    // Positive-axis support intervals. Exact for band-limited families;
    // for the others the upper end is the 1e-12 envelope cutoff.
    const std::vector<Interval>& band_support() const { return support_; }
    bool band_limited() const { return band_limited_; }
    const SpectrumTail& tail() const { return tail_; }

    int vanishing_moments() const { return moments_; }
    const WaveletFamily& family() const { return family_; }
    int band() const { return m_; }
    bool is_dual() const { return dual_; }
    int dual_delay() const { return delay_; }

    friend WaveletSpectrum dual_spectrum(const WaveletSpectrum&, HilbertDualRule);

private:
    WaveletFamily family_;
    int m_ = 0;
    bool dual_ = false;
    int delay_ = 0;
    bool band_limited_ = true;
    std::vector<Interval> support_;
    SpectrumTail tail_;
    int moments_ = 0;

    std::complex<double> eval_primal(double w) const;
};

WaveletSpectrum make_spectrum(const WaveletFamily& family, int m);
WaveletSpectrum dual_spectrum(const WaveletSpectrum& spec,
                              HilbertDualRule rule = {});

// Convenience entry points mirroring the library operations.
std::complex<double> eval_spectrum(const WaveletFamily& family, int m, double w);
double eval_sq_modulus(const WaveletFamily& family, int m, double w);

// Number of vanishing moments N_m; m = 0 returns min over m != 0.
int vanishing_moments(const WaveletFamily& family, int m);

// Truncated infinite-product evaluation of a filter-bank spectrum.
struct ProductValue {
    std::complex<double> value;
    double rel_error_bound = 0.0; // bound on the truncation error
};
ProductValue spectrum_from_filters(const std::vector<std::vector<double>>& filters,
                                   int packet_depth, int m, double w,
                                   int trunc_depth = 24);

// Max residual of the para-unitarity identity over a 1024-point grid.
double paraunitarity_residual(const std::vector<std::vector<double>>& filters,
                              int channels, int grid = 1024);

// Plain-text ingestion: one filter per line, '#' comments allowed.
std::vector<std::vector<double>> load_filter_file(const std::string& path);

// (1/2pi) int |psi_hat|^2 dw; equals 1 for a unit-norm basis function.
double spectrum_norm(const WaveletSpectrum& spec);

// Meyer taper window W(theta) = cos(pi/2 nu(theta)) with the degree-7
// polynomial nu; exposed for tests and the I_eps integrals.
double meyer_window(double theta);
double meyer_window_sq(double theta);

// Sign pattern (+1/-1 per cell of width 1/M on [0,1)) of Hadamard packet
// wavelet m in an M-band system, M = 2^P.
std::vector<int> walsh_pattern(int m, int M);

} // namespace dtnoise
