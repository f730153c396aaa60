#include "dtnoise/simulate.hpp"
#include "dtnoise/special.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <thread>

namespace dtnoise {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

double xlogx(double x) {
    if (x == 0.0)
        return 0.0;
    return x * std::log(std::abs(x));
}

bool is_haar_pair(const WaveletFamily& fam) {
    if (fam.kind == FamilyKind::HaarPacket)
        return true;
    if (fam.kind != FamilyKind::CustomFIR || fam.filters.size() != 2)
        return false;
    const auto& a0 = fam.filters[0];
    const auto& a1 = fam.filters[1];
    const double c = 1.0 / std::sqrt(2.0);
    return a0.size() == 2 && a1.size() == 2 && std::abs(a0[0] - c) < 1e-12 &&
           std::abs(a0[1] - c) < 1e-12 && std::abs(a1[0] - c) < 1e-12 &&
           std::abs(a1[1] + c) < 1e-12;
}

double default_halfwidth(const WaveletFamily& fam) {
    switch (fam.kind) {
    case FamilyKind::Shannon:
        return 96.0;
    case FamilyKind::Meyer:
        return 24.0;
    case FamilyKind::HaarPacket:
        return 64.0;
    default:
        return 48.0;
    }
}

long next_pow2(long n) {
    long p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

// ---------------------------------------------------------------------------
// spectral sampling by inverse discrete Fourier evaluation
// ---------------------------------------------------------------------------

SampledWavelet sample_spectral(const WaveletSpectrum& spec, double du,
                               double halfwidth) {
    const std::size_t N = 1u << 18;
    const double dw = 2.0 * kPi / (static_cast<double>(N) * du);
    std::vector<cd> in(N), out(N);
    for (std::size_t q = 0; q < N; ++q) {
        const double w = (static_cast<double>(q) - static_cast<double>(N) / 2.0) * dw;
        cd v = spec.eval(w);
        if (q % 2 == 1)
            v = -v;
        in[q] = v;
    }
    fftw_plan plan = fftw_plan_dft_1d(
        static_cast<int>(N), reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    const double scale = dw / (2.0 * kPi);
    double full_energy = 0.0;
    std::vector<double> time(N);
    for (std::size_t n = 0; n < N; ++n) {
        double v = out[n].real() * scale;
        if (n % 2 == 1)
            v = -v;
        time[n] = v;
        full_energy += v * v;
    }
    full_energy *= du;

    const long half = static_cast<long>(N) / 2;
    long span = static_cast<long>(std::floor(halfwidth / du));
    span = std::min(span, half - 1);
    SampledWavelet sw;
    sw.du = du;
    sw.first = -span;
    sw.samples.assign(time.begin() + (half - span), time.begin() + (half + span + 1));
    double kept = 0.0;
    for (double v : sw.samples)
        kept += v * v;
    kept *= du;
    sw.retained_energy = (full_energy > 0.0) ? kept / full_energy : 1.0;
    sw.truncated = (1.0 - sw.retained_energy) > 1e-9;
    return sw;
}

// ---------------------------------------------------------------------------
// exact cell-averaged time formulas for the Haar packet family
// ---------------------------------------------------------------------------

// average of ln|x - c| over the left-aligned cell [t, t + 2h), up to an
// additive constant that cancels in the differences used below
double avg_log(double t, double c, double h) {
    return (xlogx(t - c + 2.0 * h) - xlogx(t - c)) / (2.0 * h);
}

// Cell-averaged exact time formulas. Cells are left-aligned, [i du, (i+1) du),
// so the +-1 pattern jumps at multiples of 1/M land on cell boundaries and
// the box projection leaves the primal functions untouched; the discrete
// inner products against white noise are then exact.
SampledWavelet sample_haar(const WaveletSpectrum& spec, double du,
                           double halfwidth) {
    const int M = spec.family().bands;
    const std::vector<int> pattern = walsh_pattern(spec.band(), M);
    const long span = static_cast<long>(std::floor(halfwidth / du));
    // a twice-wider internal window supplies the total-energy reference
    const long span2 = 2 * span;
    const double h = du / 2.0;
    const double cell = 1.0 / static_cast<double>(M);

    std::function<double(long)> value;
    if (!spec.is_dual()) {
        // overlap-weighted average of the +-1 pattern over each grid cell
        value = [&](long i) {
            const double lo = static_cast<double>(i) * du;
            const double hi = lo + du;
            double acc = 0.0;
            for (int jcell = 0; jcell < M; ++jcell) {
                const double a = std::max(lo, jcell * cell);
                const double b = std::min(hi, (jcell + 1) * cell);
                if (b > a)
                    acc += pattern[static_cast<std::size_t>(jcell)] * (b - a);
            }
            return acc / du;
        };
    } else if (spec.band() != 0) {
        // Hilbert transform of the pattern: sums of cell-averaged logs
        value = [&](long i) {
            const double t = static_cast<double>(i) * du;
            double acc = 0.0;
            for (int jcell = 0; jcell < M; ++jcell)
                acc += pattern[static_cast<std::size_t>(jcell)] *
                       (avg_log(t, jcell * cell, h) - avg_log(t, (jcell + 1) * cell, h));
            return acc / kPi;
        };
    } else {
        // dual scaling function psi_0^H(t) = g(t - d - 1) with
        // g = (2/pi) sum_{q odd} (1/q) [Hbox(t + q/2) - Hbox(t - q/2)],
        // Hbox(u) = (1/pi) ln|(u+1/2)/(u-1/2)|; Richardson-extrapolated tail.
        const long Q1 = 751;
        const long Q2 = 2 * Q1 - 1;
        value = [&, Q1, Q2](long i) {
            auto avg_hbox = [h](double u) {
                return (avg_log(u, -0.5, h) - avg_log(u, 0.5, h)) / kPi;
            };
            const double t =
                static_cast<double>(i) * du - (spec.dual_delay() + 1.0);
            double s1 = 0.0, s = 0.0;
            for (long q = 1; q <= Q2; q += 2) {
                s += (avg_hbox(t + q / 2.0) - avg_hbox(t - q / 2.0)) /
                     static_cast<double>(q);
                if (q == Q1)
                    s1 = s;
            }
            return (2.0 / kPi) * (2.0 * s - s1);
        };
    }

    double full = 0.0, kept = 0.0;
    SampledWavelet sw;
    sw.du = du;
    sw.first = -span;
    sw.samples.resize(static_cast<std::size_t>(2 * span + 1));
    for (long i = -span2; i <= span2; ++i) {
        const double v = value(i);
        full += v * v;
        if (i >= -span && i <= span) {
            kept += v * v;
            sw.samples[static_cast<std::size_t>(i + span)] = v;
        }
    }
    sw.retained_energy = (full > 0.0) ? kept / full : 1.0;
    sw.truncated = (1.0 - sw.retained_energy) > 1e-9;
    return sw;
}

} // namespace

SampledWavelet sample_wavelet(const WaveletSpectrum& spec, double du,
                              double halfwidth) {
    if (!(du > 0.0) || !(halfwidth > 0.0))
        throw InvalidParam("sampling needs positive spacing and halfwidth");
    if (is_haar_pair(spec.family()))
        return sample_haar(spec, du, halfwidth);
    return sample_spectral(spec, du, halfwidth);
}

std::vector<double> sample_wavelet_on_grid(const WaveletSpectrum& spec, int j,
                                           long k, double x0, double dx, long n) {
    const double M = spec.family().bands;
    const double scale = std::pow(M, j);
    const double du = dx / scale;
    const double norm = std::pow(M, -0.5 * j);
    const SampledWavelet sw = sample_wavelet(spec, du, default_halfwidth(spec.family()));
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (long i = 0; i < n; ++i) {
        const double u = (x0 + static_cast<double>(i) * dx) / scale -
                         static_cast<double>(k);
        const double idx = u / du - static_cast<double>(sw.first);
        const long ii = std::lround(idx);
        if (std::abs(idx - static_cast<double>(ii)) > 1e-6)
            throw InvalidParam("grid is not aligned with the sampling lattice");
        if (ii >= 0 && ii < static_cast<long>(sw.samples.size()))
            out[static_cast<std::size_t>(i)] =
                norm * sw.samples[static_cast<std::size_t>(ii)];
    }
    return out;
}

// ---------------------------------------------------------------------------
// noise synthesis
// ---------------------------------------------------------------------------

namespace {

std::vector<double> circulant_amplitudes(const NoiseModel& model, long nc,
                                         double dx) {
    std::vector<cd> c(static_cast<std::size_t>(nc));
    for (long i = 0; i < nc; ++i) {
        const long wrapped = std::min(i, nc - i);
        c[static_cast<std::size_t>(i)] = model.autocovariance(wrapped * dx);
    }
    std::vector<cd> lambda(static_cast<std::size_t>(nc));
    fftw_plan plan = fftw_plan_dft_1d(
        static_cast<int>(nc), reinterpret_cast<fftw_complex*>(c.data()),
        reinterpret_cast<fftw_complex*>(lambda.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    double lmax = 0.0;
    for (const cd& l : lambda)
        lmax = std::max(lmax, l.real());
    std::vector<double> amp(static_cast<std::size_t>(nc));
    for (std::size_t q = 0; q < lambda.size(); ++q) {
        const double l = lambda[q].real();
        if (l < -1e-9 * lmax)
            throw NonPositiveDefinite("circulant embedding has negative eigenvalues");
        amp[q] = std::sqrt(std::max(l, 0.0));
    }
    return amp;
}

} // namespace

GridSignal synth_noise(const NoiseModel& model, long n, double dx,
                       std::uint64_t seed) {
    model.validate();
    GridSignal sig;
    sig.dx = dx;
    sig.samples.resize(static_cast<std::size_t>(n));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    if (model.kind == NoiseKind::White) {
        const double sd = std::sqrt(model.sigma2 / dx);
        for (auto& v : sig.samples)
            v = sd * gauss(rng);
        return sig;
    }

    const long nc = 2 * next_pow2(n);
    const std::vector<double> amp = circulant_amplitudes(model, nc, dx);
    std::vector<cd> w(static_cast<std::size_t>(nc)), out(static_cast<std::size_t>(nc));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (long q = 0; q < nc; ++q) {
        const double re = gauss(rng), im = gauss(rng);
        w[static_cast<std::size_t>(q)] =
            amp[static_cast<std::size_t>(q)] * cd(re, im) * inv_sqrt2;
    }
    fftw_plan plan = fftw_plan_dft_1d(
        static_cast<int>(nc), reinterpret_cast<fftw_complex*>(w.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    const double scale = std::sqrt(2.0 / static_cast<double>(nc));
    for (long i = 0; i < n; ++i)
        sig.samples[static_cast<std::size_t>(i)] =
            out[static_cast<std::size_t>(i)].real() * scale;
    return sig;
}

// ---------------------------------------------------------------------------
// SimConfig
// ---------------------------------------------------------------------------

double SimConfig::halfwidth() const {
    return (support_halfwidth > 0.0) ? support_halfwidth
                                     : default_halfwidth(family);
}

void SimConfig::validate(bool two_dim) const {
    family.validate();
    if (levels < 1)
        throw InvalidParam("need at least one resolution level");
    if (oversample < 8)
        throw InvalidParam("oversampling factor must be >= 8");
    if (runs < 2)
        throw InvalidParam("need runs >= 2 to form a standard error");
    const double extent = static_cast<double>(length) * dx();
    const double stride = std::pow(family.bands, levels);
    const double n_coef =
        std::floor(extent / stride) - 2.0 * std::ceil(halfwidth()) + 1.0;
    const double per_subband = two_dim ? n_coef * n_coef : n_coef;
    if (per_subband < 64.0)
        throw InvalidParam("signal too short: fewer than 64 coefficients per "
                           "subband at the coarsest level");
}

// ---------------------------------------------------------------------------
// Monte Carlo drivers
// ---------------------------------------------------------------------------

namespace {

struct BandFilter {
    std::vector<double> weights; // includes dx M^{-j/2}
    long first = 0;              // grid offset of weights[0] relative to k M^j
    long stride = 1;             // grid samples per unit shift of k
};

BandFilter make_band_filter(const WaveletSpectrum& spec, int j, double dx,
                            double halfwidth) {
    const double M = spec.family().bands;
    const double du = dx / std::pow(M, j);
    const SampledWavelet sw = sample_wavelet(spec, du, halfwidth);
    BandFilter bf;
    bf.weights.resize(sw.samples.size());
    const double norm = std::pow(M, -0.5 * j) * dx;
    for (std::size_t i = 0; i < sw.samples.size(); ++i)
        bf.weights[i] = sw.samples[i] * norm;
    bf.first = sw.first;
    bf.stride = std::lround(std::pow(M, j) / dx);
    return bf;
}

// separable 2D synthesis: i.i.d. N(0, sigma^2/dx^2) cells for white noise,
// outer-product circulant embedding for separable colored models
std::vector<double> synth_noise_2d(const NoiseModel& model, long side, double dx,
                                   std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(side) *
                            static_cast<std::size_t>(side));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (model.kind == NoiseKind::White) {
        const double sd = std::sqrt(model.sigma2) / dx;
        for (auto& v : out)
            v = sd * gauss(rng);
        return out;
    }
    // axis kernel f with Gamma_2d(t1,t2) = f(t1) f(t2)
    NoiseModel axis = model;
    if (model.kind == NoiseKind::ExponentialDecay) {
        axis.amplitude = std::sqrt(model.amplitude);
    } else {
        if (model.table[0] <= 0.0)
            throw NotSeparable("tabulated 2D noise needs a positive peak");
        const double s = std::sqrt(model.table[0]);
        for (auto& v : axis.table)
            v /= s;
    }
    const long nc = 2 * next_pow2(side);
    const std::vector<double> amp = circulant_amplitudes(axis, nc, dx);
    const std::size_t n2 = static_cast<std::size_t>(nc) * static_cast<std::size_t>(nc);
    std::vector<cd> w(n2), spec(n2);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (long q1 = 0; q1 < nc; ++q1)
        for (long q2 = 0; q2 < nc; ++q2) {
            const double re = gauss(rng), im = gauss(rng);
            w[static_cast<std::size_t>(q1 * nc + q2)] =
                amp[static_cast<std::size_t>(q1)] * amp[static_cast<std::size_t>(q2)] *
                cd(re, im) * inv_sqrt2;
        }
    fftw_plan plan = fftw_plan_dft_2d(
        static_cast<int>(nc), static_cast<int>(nc),
        reinterpret_cast<fftw_complex*>(w.data()),
        reinterpret_cast<fftw_complex*>(spec.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    const double scale = std::sqrt(2.0) / static_cast<double>(nc);
    for (long i1 = 0; i1 < side; ++i1)
        for (long i2 = 0; i2 < side; ++i2)
            out[static_cast<std::size_t>(i1 * side + i2)] =
                spec[static_cast<std::size_t>(i1 * nc + i2)].real() * scale;
    return out;
}

// valid coefficient index range [k_lo, k_hi] of a filter on n grid samples
void coef_range(const BandFilter& bf, long n, long& k_lo, long& k_hi) {
    const long len = static_cast<long>(bf.weights.size());
    k_lo = static_cast<long>(
        std::ceil(static_cast<double>(-bf.first) / static_cast<double>(bf.stride)));
    k_hi = static_cast<long>(std::floor(
        static_cast<double>(n - len - bf.first) / static_cast<double>(bf.stride)));
}

std::vector<double> project(const std::vector<double>& noise, const BandFilter& bf,
                            long k_lo, long k_hi) {
    std::vector<double> coef(static_cast<std::size_t>(k_hi - k_lo + 1));
    const long len = static_cast<long>(bf.weights.size());
    for (long k = k_lo; k <= k_hi; ++k) {
        const double* np = noise.data() + k * bf.stride + bf.first;
        double acc = 0.0;
        for (long i = 0; i < len; ++i)
            acc += np[i] * bf.weights[static_cast<std::size_t>(i)];
        coef[static_cast<std::size_t>(k - k_lo)] = acc;
    }
    return coef;
}

// biased sample cross-covariance (1/N) sum a[k+lag] b[k]
double biased_xcov(const std::vector<double>& a, const std::vector<double>& b,
                   long lag) {
    const long n = static_cast<long>(a.size());
    double acc = 0.0;
    for (long k = 0; k < n; ++k) {
        const long ka = k + lag;
        if (ka < 0 || ka >= n)
            continue;
        acc += a[static_cast<std::size_t>(ka)] * b[static_cast<std::size_t>(k)];
    }
    return acc / static_cast<double>(n);
}

void run_parallel(int runs, int threads, const std::function<void(int)>& work) {
    int n_threads = threads > 0
                        ? threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, runs));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t)
        pool.emplace_back([&, t] {
            for (int r = t; r < runs; r += n_threads)
                work(r);
        });
    for (auto& th : pool)
        th.join();
}

} // namespace

std::vector<MCEstimate> mc_run_1d(const SimConfig& cfg, const NoiseModel& model,
                                  std::span<const long> lags) {
    cfg.validate(false);
    model.validate();
    const int M = cfg.family.bands;
    const double dx = cfg.dx();

    // Cross-band statistics (orthonormality zeros and inter-band theory) are
    // phase-sensitive for Meyer: without configured slopes the tapers alone
    // do not form an orthonormal basis across bands, so those cells are
    // dropped; same-band quantities depend only on |psi_hat|^2.
    const bool interband_cells =
        cfg.family.kind != FamilyKind::Meyer ||
        cfg.family.meyer_phase_slopes.has_value();

    // cell schedule: (j, m, mprime, kind, lag)
    struct Cell {
        int j, m, mprime;
        CovKind kind;
        long lag;
    };
    std::vector<Cell> cells;
    for (int j = 1; j <= cfg.levels; ++j) {
        for (int m = 0; m < M; ++m)
            for (int mp = 0; mp < M; ++mp) {
                if (m != mp && !interband_cells)
                    continue;
                for (long lag : lags)
                    cells.push_back({j, m, mp, CovKind::primal_dual, lag});
            }
        for (int m = 0; m < M; ++m)
            for (int mp = m; mp < M; ++mp) {
                if (m != mp && !interband_cells)
                    continue;
                for (long lag : lags)
                    cells.push_back({j, m, mp, CovKind::primal_primal, lag});
            }
        for (int m = 0; m < M; ++m)
            cells.push_back({j, m, m, CovKind::dual_dual, 0});
    }

    // shared read-only filters and their common coefficient ranges
    std::vector<std::vector<BandFilter>> primal(static_cast<std::size_t>(cfg.levels + 1)),
        dual(static_cast<std::size_t>(cfg.levels + 1));
    std::vector<std::vector<std::pair<long, long>>> ranges(
        static_cast<std::size_t>(cfg.levels + 1));
    for (int j = 1; j <= cfg.levels; ++j) {
        primal[static_cast<std::size_t>(j)].reserve(static_cast<std::size_t>(M));
        dual[static_cast<std::size_t>(j)].reserve(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m) {
            const auto spec = make_spectrum(cfg.family, m);
            primal[static_cast<std::size_t>(j)].push_back(
                make_band_filter(spec, j, dx, cfg.halfwidth()));
            dual[static_cast<std::size_t>(j)].push_back(make_band_filter(
                dual_spectrum(spec, {cfg.d}), j, dx, cfg.halfwidth()));
            long lo1, hi1, lo2, hi2;
            coef_range(primal[static_cast<std::size_t>(j)].back(), cfg.length, lo1, hi1);
            coef_range(dual[static_cast<std::size_t>(j)].back(), cfg.length, lo2, hi2);
            const long lo = std::max(lo1, lo2), hi = std::min(hi1, hi2);
            if (hi < lo)
                throw InvalidParam("no valid coefficients at level " +
                                   std::to_string(j));
            ranges[static_cast<std::size_t>(j)].emplace_back(lo, hi);
        }
    }

    std::vector<std::vector<double>> per_run(
        static_cast<std::size_t>(cfg.runs),
        std::vector<double>(cells.size(), 0.0));

    run_parallel(cfg.runs, cfg.threads, [&](int r) {
        const GridSignal sig = synth_noise(
            model, cfg.length, dx, cfg.base_seed + static_cast<std::uint64_t>(r));
        // coefficients per (j, m, kind) on the common k range of both kinds
        std::vector<std::vector<std::vector<double>>> cp(
            static_cast<std::size_t>(cfg.levels + 1)),
            cd_(static_cast<std::size_t>(cfg.levels + 1));
        for (int j = 1; j <= cfg.levels; ++j) {
            cp[static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(M));
            cd_[static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(M));
            for (int m = 0; m < M; ++m) {
                const auto& bp = primal[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
                const auto& bd = dual[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
                const auto [lo, hi] = ranges[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
                cp[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] =
                    project(sig.samples, bp, lo, hi);
                cd_[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] =
                    project(sig.samples, bd, lo, hi);
            }
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const Cell& cell = cells[c];
            const auto& a =
                (cell.kind == CovKind::dual_dual)
                    ? cd_[static_cast<std::size_t>(cell.j)][static_cast<std::size_t>(cell.m)]
                    : cp[static_cast<std::size_t>(cell.j)][static_cast<std::size_t>(cell.m)];
            const auto& b =
                (cell.kind == CovKind::primal_primal)
                    ? cp[static_cast<std::size_t>(cell.j)][static_cast<std::size_t>(cell.mprime)]
                    : cd_[static_cast<std::size_t>(cell.j)][static_cast<std::size_t>(cell.mprime)];
            per_run[static_cast<std::size_t>(r)][c] = biased_xcov(a, b, cell.lag);
        }
    });

    // deterministic aggregation in run order + theory attachment
    std::vector<MCEstimate> out(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double mean = 0.0;
        for (int r = 0; r < cfg.runs; ++r)
            mean += per_run[static_cast<std::size_t>(r)][c];
        mean /= cfg.runs;
        double var = 0.0;
        for (int r = 0; r < cfg.runs; ++r) {
            const double dv = per_run[static_cast<std::size_t>(r)][c] - mean;
            var += dv * dv;
        }
        var /= (cfg.runs - 1);
        MCEstimate& e = out[c];
        e.j = cells[c].j;
        e.m = cells[c].m;
        e.mprime = cells[c].mprime;
        e.kind = cells[c].kind;
        e.lag1 = cells[c].lag;
        e.mean = mean;
        e.std_error = std::sqrt(var / cfg.runs);
        e.runs = cfg.runs;
        const auto [lo_a, hi_a] =
            ranges[static_cast<std::size_t>(e.j)][static_cast<std::size_t>(e.m)];
        const auto [lo_b, hi_b] =
            ranges[static_cast<std::size_t>(e.j)][static_cast<std::size_t>(e.mprime)];
        const long nka = hi_a - lo_a + 1, nkb = hi_b - lo_b + 1;
        const long nk_cell = std::min(nka, nkb);
        e.expectation_scale = std::max(
            0.0, static_cast<double>(nk_cell - std::labs(e.lag1)) /
                     static_cast<double>(nk_cell));
    }
    // theory via the covariance module, one sequence per (j, m, m', kind)
    for (int j = 1; j <= cfg.levels; ++j)
        for (int m = 0; m < M; ++m)
            for (int mp = 0; mp < M; ++mp)
                for (CovKind kind : {CovKind::primal_dual, CovKind::primal_primal,
                                     CovKind::dual_dual}) {
                    std::vector<long> want;
                    std::vector<std::size_t> idx;
                    for (std::size_t c = 0; c < cells.size(); ++c)
                        if (cells[c].j == j && cells[c].m == m &&
                            cells[c].mprime == mp && cells[c].kind == kind) {
                            want.push_back(cells[c].lag);
                            idx.push_back(c);
                        }
                    if (want.empty())
                        continue;
                    const CovSequence1D th =
                        cov_1d(model, cfg.family, j, m, mp, want, kind, cfg.d);
                    for (std::size_t i = 0; i < idx.size(); ++i)
                        out[idx[i]].theory = th.values[i];
                }
    return out;
}

std::vector<MCEstimate> mc_run_2d(const SimConfig& cfg, const NoiseModel& model,
                                  std::span<const long> lags) {
    cfg.validate(true);
    model.validate();
    if (model.kind == NoiseKind::Tabulated)
        throw NotSeparable("2D simulation supports white and separable "
                           "exponential noise");
    const int M = cfg.family.bands;
    const double dx = cfg.dx();
    const long side = cfg.length;
    const int j = cfg.levels;

    std::vector<BandFilter> primal, dual;
    for (int m = 0; m < M; ++m) {
        const auto spec = make_spectrum(cfg.family, m);
        primal.push_back(make_band_filter(spec, j, dx, cfg.halfwidth()));
        dual.push_back(
            make_band_filter(dual_spectrum(spec, {cfg.d}), j, dx, cfg.halfwidth()));
    }
    long k_lo = std::numeric_limits<long>::min(), k_hi = std::numeric_limits<long>::max();
    for (int m = 0; m < M; ++m) {
        long lo1, hi1, lo2, hi2;
        coef_range(primal[static_cast<std::size_t>(m)], side, lo1, hi1);
        coef_range(dual[static_cast<std::size_t>(m)], side, lo2, hi2);
        k_lo = std::max({k_lo, lo1, lo2});
        k_hi = std::min({k_hi, hi1, hi2});
    }
    if (k_hi < k_lo)
        throw InvalidParam("grid too small for the requested support");
    const long nk = k_hi - k_lo + 1;

    struct Cell {
        int m1, m2;
        CovKind kind; // primal_dual = Gamma_{n,n^H}; primal_primal = Gamma_{n,n}
        bool post = false;
        int post_kind = 0; // 0: ww, 1: whwh, 2: wwh
        long l1, l2;
    };
    std::vector<Cell> cells;
    for (int m1 = 0; m1 < M; ++m1)
        for (int m2 = 0; m2 < M; ++m2)
            for (long l1 : lags)
                for (long l2 : lags) {
                    cells.push_back({m1, m2, CovKind::primal_dual, false, 0, l1, l2});
                    cells.push_back({m1, m2, CovKind::primal_primal, false, 0, l1, l2});
                }
    if (cfg.post_transform)
        for (int m1 = 1; m1 < M; ++m1)
            for (int m2 = 1; m2 < M; ++m2)
                for (long l1 : lags)
                    for (long l2 : lags)
                        for (int pk = 0; pk < 3; ++pk)
                            cells.push_back(
                                {m1, m2, CovKind::primal_dual, true, pk, l1, l2});

    std::vector<std::vector<double>> per_run(
        static_cast<std::size_t>(cfg.runs),
        std::vector<double>(cells.size(), 0.0));

    run_parallel(cfg.runs, cfg.threads, [&](int r) {
        const std::vector<double> noise = synth_noise_2d(
            model, side, dx, cfg.base_seed + static_cast<std::uint64_t>(r));
        // pass 1 along axis 1: A[m][kind][k1 * side + i2]
        auto pass1 = [&](const BandFilter& bf) {
            std::vector<double> A(static_cast<std::size_t>(nk) *
                                      static_cast<std::size_t>(side),
                                  0.0);
            const long len = static_cast<long>(bf.weights.size());
            for (long k1 = k_lo; k1 <= k_hi; ++k1) {
                double* arow = A.data() + (k1 - k_lo) * side;
                const long base = k1 * bf.stride + bf.first;
                for (long i1 = 0; i1 < len; ++i1) {
                    const double w = bf.weights[static_cast<std::size_t>(i1)];
                    const double* nrow = noise.data() + (base + i1) * side;
                    for (long i2 = 0; i2 < side; ++i2)
                        arow[i2] += w * nrow[i2];
                }
            }
            return A;
        };
        std::vector<std::vector<double>> Ap(static_cast<std::size_t>(M)),
            Ad(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m) {
            Ap[static_cast<std::size_t>(m)] = pass1(primal[static_cast<std::size_t>(m)]);
            Ad[static_cast<std::size_t>(m)] = pass1(dual[static_cast<std::size_t>(m)]);
        }
        // pass 2 along axis 2 for a given (m1-pass, m2 filter)
        auto pass2 = [&](const std::vector<double>& A, const BandFilter& bf) {
            std::vector<double> B(static_cast<std::size_t>(nk) *
                                      static_cast<std::size_t>(nk),
                                  0.0);
            const long len = static_cast<long>(bf.weights.size());
            for (long k1 = 0; k1 < nk; ++k1) {
                const double* arow = A.data() + k1 * side;
                for (long k2 = k_lo; k2 <= k_hi; ++k2) {
                    const long base = k2 * bf.stride + bf.first;
                    double acc = 0.0;
                    for (long i2 = 0; i2 < len; ++i2)
                        acc += arow[base + i2] * bf.weights[static_cast<std::size_t>(i2)];
                    B[static_cast<std::size_t>(k1 * nk + (k2 - k_lo))] = acc;
                }
            }
            return B;
        };
        // coefficient fields per (m1, m2)
        std::vector<std::vector<double>> n_field(static_cast<std::size_t>(M * M)),
            h_field(static_cast<std::size_t>(M * M));
        for (int m1 = 0; m1 < M; ++m1)
            for (int m2 = 0; m2 < M; ++m2) {
                n_field[static_cast<std::size_t>(m1 * M + m2)] = pass2(
                    Ap[static_cast<std::size_t>(m1)], primal[static_cast<std::size_t>(m2)]);
                h_field[static_cast<std::size_t>(m1 * M + m2)] = pass2(
                    Ad[static_cast<std::size_t>(m1)], dual[static_cast<std::size_t>(m2)]);
            }
        auto xcov2 = [&](const std::vector<double>& a, const std::vector<double>& b,
                         long l1, long l2) {
            double acc = 0.0;
            for (long k1 = 0; k1 < nk; ++k1) {
                const long ka = k1 + l1;
                if (ka < 0 || ka >= nk)
                    continue;
                for (long k2 = 0; k2 < nk; ++k2) {
                    const long kb = k2 + l2;
                    if (kb < 0 || kb >= nk)
                        continue;
                    acc += a[static_cast<std::size_t>(ka * nk + kb)] *
                           b[static_cast<std::size_t>(k1 * nk + k2)];
                }
            }
            return acc / static_cast<double>(nk * nk);
        };
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const Cell& cell = cells[c];
            const auto& nf = n_field[static_cast<std::size_t>(cell.m1 * M + cell.m2)];
            const auto& hf = h_field[static_cast<std::size_t>(cell.m1 * M + cell.m2)];
            if (!cell.post) {
                per_run[static_cast<std::size_t>(r)][c] =
                    (cell.kind == CovKind::primal_dual) ? xcov2(nf, hf, cell.l1, cell.l2)
                                                        : xcov2(nf, nf, cell.l1, cell.l2);
            } else {
                std::vector<double> w(nf.size()), wh(nf.size());
                for (std::size_t i = 0; i < nf.size(); ++i) {
                    w[i] = inv_sqrt2 * (nf[i] + hf[i]);
                    wh[i] = inv_sqrt2 * (nf[i] - hf[i]);
                }
                double v = 0.0;
                if (cell.post_kind == 0)
                    v = xcov2(w, w, cell.l1, cell.l2);
                else if (cell.post_kind == 1)
                    v = xcov2(wh, wh, cell.l1, cell.l2);
                else
                    v = xcov2(w, wh, cell.l1, cell.l2);
                per_run[static_cast<std::size_t>(r)][c] = v;
            }
        }
    });

    // aggregate + theory
    std::vector<MCEstimate> out(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double mean = 0.0;
        for (int r = 0; r < cfg.runs; ++r)
            mean += per_run[static_cast<std::size_t>(r)][c];
        mean /= cfg.runs;
        double var = 0.0;
        for (int r = 0; r < cfg.runs; ++r) {
            const double dv = per_run[static_cast<std::size_t>(r)][c] - mean;
            var += dv * dv;
        }
        var /= (cfg.runs - 1);
        MCEstimate& e = out[c];
        e.j = j;
        e.m = cells[c].m1;
        e.mprime = cells[c].m2; // (m1, m2) subband; mprime repurposed as m2
        e.kind = cells[c].kind;
        e.post = cells[c].post ? cells[c].post_kind + 1 : 0;
        e.lag1 = cells[c].l1;
        e.lag2 = cells[c].l2;
        e.mean = mean;
        e.std_error = std::sqrt(var / cfg.runs);
        e.runs = cfg.runs;
        e.expectation_scale =
            std::max(0.0, static_cast<double>(nk - std::labs(e.lag1))) *
            std::max(0.0, static_cast<double>(nk - std::labs(e.lag2))) /
            static_cast<double>(nk * nk);
    }
    // theory: separable products of the per-axis 1D sequences; colored
    // models factor through the axis kernel f with Gamma_2d = f(t1) f(t2)
    NoiseModel axis = model;
    if (model.kind == NoiseKind::ExponentialDecay)
        axis.amplitude = std::sqrt(model.amplitude);
    else if (model.kind == NoiseKind::Tabulated) {
        const double s = std::sqrt(model.table[0]);
        for (auto& v : axis.table)
            v /= s;
    }
    std::vector<long> lag_list(lags.begin(), lags.end());
    auto theory_1d = [&](int m, CovKind kind) {
        return cov_1d(axis, cfg.family, j, m, m, lag_list, kind, cfg.d);
    };
    std::vector<CovSequence1D> th_pd, th_pp;
    for (int m = 0; m < M; ++m) {
        th_pd.push_back(theory_1d(m, CovKind::primal_dual));
        th_pp.push_back(theory_1d(m, CovKind::primal_primal));
    }
    auto lag_index = [&](long l) {
        for (std::size_t i = 0; i < lag_list.size(); ++i)
            if (lag_list[i] == l)
                return i;
        throw InvalidParam("lag not in schedule");
    };
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        const std::size_t i1 = lag_index(cell.l1), i2 = lag_index(cell.l2);
        const double pd = th_pd[static_cast<std::size_t>(cell.m1)].values[i1] *
                          th_pd[static_cast<std::size_t>(cell.m2)].values[i2];
        const double pp = th_pp[static_cast<std::size_t>(cell.m1)].values[i1] *
                          th_pp[static_cast<std::size_t>(cell.m2)].values[i2];
        if (!cell.post) {
            out[c].theory = (cell.kind == CovKind::primal_dual) ? pd : pp;
        } else {
            if (cell.post_kind == 0)
                out[c].theory = pp + pd;
            else if (cell.post_kind == 1)
                out[c].theory = pp - pd;
            else
                out[c].theory = 0.0;
        }
    }
    return out;
}

double fraction_within(std::span<const MCEstimate> cells, double z_max) {
    if (cells.empty())
        return 1.0;
    std::size_t ok = 0;
    for (const MCEstimate& e : cells)
        if (std::abs(e.z()) <= z_max)
            ++ok;
    return static_cast<double>(ok) / static_cast<double>(cells.size());
}

} // namespace dtnoise
