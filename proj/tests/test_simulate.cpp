#include <catch2/catch_amalgamated.hpp>

#include "dtnoise/simulate.hpp"

#include <cmath>
#include <numbers>

using namespace dtnoise;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("white noise synthesis is a deterministic isometry") {
    const auto white = NoiseModel::white(1.0);
    const double dx = 1.0 / 16.0;
    const auto a = synth_noise(white, 4096, dx, 99);
    const auto b = synth_noise(white, 4096, dx, 99);
    CHECK(a.samples == b.samples); // bit identical
    const auto c = synth_noise(white, 4096, dx, 100);
    CHECK(a.samples != c.samples);

    // variance of the integral surrogate against a unit-norm test function:
    // f = indicator of [0,1) scaled to unit norm; Var(sum n f dx) ~ sigma^2
    double acc = 0.0, acc2 = 0.0;
    const int runs = 100;
    for (int r = 0; r < runs; ++r) {
        const auto sig = synth_noise(white, 4096, dx, 1000 + r);
        double v = 0.0;
        for (int i = 0; i < 16; ++i) // first 1.0 of support
            v += sig.samples[i] * dx;
        v /= std::sqrt(dx * 16); // normalize the test function
        acc += v * v;
        acc2 += v * v * v * v;
    }
    const double mean = acc / runs;
    const double se = std::sqrt((acc2 / runs - mean * mean) / runs);
    CHECK(std::abs(mean - 1.0) < 3.0 * se + 1e-9);
}

TEST_CASE("exponential noise synthesis matches its covariance") {
    const auto noise = NoiseModel::exponential(1.0, 1.0);
    const double dx = 0.25;
    const long n = 8192;
    double c0 = 0.0, c1 = 0.0; // lags 0 and 1 (in grid units of 4 samples = 1.0)
    const int runs = 24;
    for (int r = 0; r < runs; ++r) {
        const auto sig = synth_noise(noise, n, dx, 5000 + r);
        double a0 = 0.0, a1 = 0.0;
        const long lag = std::lround(1.0 / dx);
        for (long i = 0; i + lag < n; ++i) {
            a0 += sig.samples[i] * sig.samples[i];
            a1 += sig.samples[i] * sig.samples[i + lag];
        }
        c0 += a0 / (n - lag);
        c1 += a1 / (n - lag);
    }
    c0 /= runs;
    c1 /= runs;
    CHECK(c0 == Approx(1.0).margin(0.05));
    CHECK(c1 == Approx(std::exp(-1.0)).margin(0.05));
}

TEST_CASE("non positive definite tables are rejected") {
    // an oscillating "covariance" with a large negative spectral component
    std::vector<double> bad(64);
    for (int i = 0; i < 64; ++i)
        bad[i] = (i == 0) ? 1.0 : ((i % 2) ? -0.9 : 0.9);
    bad[0] = 0.95;
    bool threw = false;
    try {
        const auto m = NoiseModel::tabulated(bad, 0.5);
        synth_noise(m, 256, 0.5, 7);
    } catch (const NonPositiveDefinite&) {
        threw = true;
    } catch (const InvalidParam&) {
        threw = true; // rejected already by the peak-at-zero invariant
    }
    CHECK(threw);
}

TEST_CASE("sampled wavelets: norms and supports") {
    // Shannon scaling function: slowly decaying sinc, truncation reported
    const auto shan = make_spectrum(WaveletFamily::shannon(2), 0);
    const auto sw = sample_wavelet(shan, 1.0 / 16.0, 4096.0);
    double norm = 0.0;
    for (double v : sw.samples)
        norm += v * v;
    norm *= sw.du;
    CHECK(norm == Approx(1.0).margin(1e-4)); // discrete norm of the inverse transform
    CHECK(sw.retained_energy >= norm);
    CHECK(sw.truncated);
    // peak at t=0 equals 1 (sinc)
    const std::size_t mid = static_cast<std::size_t>(-sw.first);
    CHECK(sw.samples[mid] == Approx(1.0).margin(1e-6));
    CHECK(sw.samples[mid + 16] == Approx(0.0).margin(1e-6)); // sinc zero at t=1

    // Meyer is essentially compact on +-24
    const auto mey = make_spectrum(WaveletFamily::meyer(2, 1.0 / 3.0), 1);
    const auto swm = sample_wavelet(mey, 1.0 / 16.0, 24.0);
    CHECK(swm.retained_energy == Approx(1.0).margin(1e-8));

    // Haar primal: exact indicator pattern
    const auto haar0 = make_spectrum(WaveletFamily::haar(), 0);
    const auto swh = sample_wavelet(haar0, 1.0 / 16.0, 4.0);
    CHECK(swh.retained_energy == Approx(1.0).margin(1e-12));
    const std::size_t hmid = static_cast<std::size_t>(-swh.first);
    CHECK(swh.samples[hmid + 8] == 1.0);   // cell [0.5, 0.5625)
    CHECK(swh.samples[hmid + 20] == 0.0);  // cell [1.25, ...)
    CHECK(swh.samples[hmid - 4] == 0.0);   // t < 0

    // Haar dual mother: non-compact, >= 0.999 of the energy within +-64
    const auto haar1 = dual_spectrum(make_spectrum(WaveletFamily::haar(), 1));
    const auto swd = sample_wavelet(haar1, 1.0 / 16.0, 64.0);
    CHECK(swd.retained_energy >= 0.999);
    CHECK(swd.retained_energy <= 1.0 + 1e-9);
}

TEST_CASE("sampled pairs reproduce the correlation theory") {
    // discrete inner products of the sampled primal/dual pairs match the
    // closed forms; this is the core of the Monte Carlo design
    struct Case {
        WaveletFamily fam;
        int m;
        double hw;
        double tol;
    };
    const std::vector<Case> cases = {
        {WaveletFamily::meyer(2, 1.0 / 3.0), 0, 24.0, 1e-6},
        {WaveletFamily::meyer(2, 1.0 / 3.0), 1, 24.0, 1e-6},
        {WaveletFamily::shannon(2), 1, 512.0, 3e-4},
        {WaveletFamily::haar(), 0, 64.0, 1e-5},
        {WaveletFamily::haar(), 1, 64.0, 1e-5},
    };
    const double du = 1.0 / 16.0;
    for (const auto& c : cases) {
        const auto p = sample_wavelet(make_spectrum(c.fam, c.m), du, c.hw);
        const auto d =
            sample_wavelet(dual_spectrum(make_spectrum(c.fam, c.m), {0}), du, c.hw);
        for (long lag : {0L, 1L, 3L}) {
            const long shift = std::lround(lag / du);
            double acc = 0.0;
            for (std::size_t i = 0; i < p.samples.size(); ++i) {
                const long idd = static_cast<long>(i) - shift;
                if (idd >= 0 && idd < static_cast<long>(d.samples.size()))
                    acc += p.samples[i] * d.samples[static_cast<std::size_t>(idd)];
            }
            acc *= du;
            const double ref = gamma_closed(c.fam, c.m, c.m, lag, 0);
            INFO(c.fam.name() << " m=" << c.m << " lag=" << lag);
            CHECK(acc == Approx(ref).margin(c.tol));
        }
    }
}

TEST_CASE("mixed dual pairs: quadrature matches sampled inner products") {
    // gamma_{psi_1^H, psi_0^H} has no closed form; check the banded spectral
    // quadrature against discrete inner products of the sampled functions
    auto sampled_ip = [](const WaveletFamily& fam, double du, double hw, long lag) {
        const auto d1 = sample_wavelet(dual_spectrum(make_spectrum(fam, 1)), du, hw);
        const auto d0 =
            sample_wavelet(dual_spectrum(make_spectrum(fam, 0), {0}), du, hw);
        const long shift = std::lround(lag / du);
        double acc = 0.0;
        for (std::size_t i = 0; i < d1.samples.size(); ++i) {
            const long idd = static_cast<long>(i) - shift - (d1.first - d0.first);
            if (idd >= 0 && idd < static_cast<long>(d0.samples.size()))
                acc += d1.samples[i] * d0.samples[static_cast<std::size_t>(idd)];
        }
        return acc * du;
    };

    // smooth band-limited pair: sampling is essentially exact
    const auto mey = WaveletFamily::meyer(2, 1.0 / 3.0);
    const auto m1 = dual_spectrum(make_spectrum(mey, 1));
    const auto m0 = dual_spectrum(make_spectrum(mey, 0), {0});
    for (long lag : {0L, 1L, 2L}) {
        const GammaValue q = gamma_quad(m1, m0, static_cast<double>(lag));
        INFO("meyer lag=" << lag);
        CHECK(sampled_ip(mey, 1.0 / 16.0, 24.0, lag) ==
              Approx(q.value).margin(1e-5));
    }

    // Haar pair: the cell projection smooths the shared log singularities,
    // so the discrete product converges to the quadrature value as du -> 0
    const auto haar = WaveletFamily::haar();
    const auto h1 = dual_spectrum(make_spectrum(haar, 1));
    const auto h0 = dual_spectrum(make_spectrum(haar, 0), {0});
    const double q0 = gamma_quad(h1, h0, 0.0).value;
    double prev = 1e9;
    for (double du : {1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0}) {
        const double err = std::abs(sampled_ip(haar, du, 48.0, 0) - q0);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1.5e-3);
}

TEST_CASE("sample_wavelet_on_grid places the dilated wavelet") {
    const auto spec = make_spectrum(WaveletFamily::haar(), 0);
    // j=1, k=2, M=2: indicator of x/2 - 2 in [0,1) => x in [4, 6), height 2^-1/2
    const auto v = sample_wavelet_on_grid(spec, 1, 2, 0.0, 0.25, 40);
    CHECK(v[8] == 0.0);                                   // x = 2
    CHECK(v[18] == Approx(1.0 / std::sqrt(2.0)));         // x = 4.5
    CHECK(v[25] == Approx(0.0).margin(1e-12));            // x = 6.25
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.family = WaveletFamily::shannon(2);
    cfg.levels = 3;
    cfg.length = 1L << 14;
    cfg.oversample = 16;
    cfg.runs = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidParam); // runs >= 2
    cfg.runs = 10;
    cfg.oversample = 4;
    CHECK_THROWS_AS(cfg.validate(), InvalidParam); // R >= 8
    cfg.oversample = 16;
    cfg.length = 1024;
    CHECK_THROWS_AS(cfg.validate(), InvalidParam); // too few coefficients
    cfg.length = 1L << 14;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("small monte carlo study agrees with theory") {
    SimConfig cfg;
    cfg.family = WaveletFamily::meyer(2, 1.0 / 3.0);
    cfg.family.meyer_phase_slopes = std::vector<double>{-0.5};
    cfg.levels = 2;
    cfg.length = 1L << 12;
    cfg.oversample = 16;
    cfg.runs = 24;
    cfg.base_seed = 31337;
    cfg.support_halfwidth = 16.0;
    const std::vector<long> lags{0, 1, 2};
    const auto est = mc_run_1d(cfg, NoiseModel::white(1.0), lags);
    REQUIRE(!est.empty());
    // every cell within 5 standard errors at this small scale
    std::size_t checked = 0;
    for (const auto& e : est) {
        INFO("j=" << e.j << " m=" << e.m << " m'=" << e.mprime
                  << " kind=" << static_cast<int>(e.kind) << " lag=" << e.lag1);
        CHECK(std::abs(e.mean - e.theory * e.expectation_scale) <=
              5.0 * e.std_error + 1e-9);
        ++checked;
    }
    CHECK(checked >= 30);
    CHECK(fraction_within(est, 3.0) > 0.8);

    // primal/dual variance equality within 3 standard errors
    for (const auto& e : est)
        if (e.kind == CovKind::dual_dual && e.lag1 == 0) {
            for (const auto& f : est)
                if (f.kind == CovKind::primal_primal && f.j == e.j && f.m == e.m &&
                    f.mprime == e.m && f.lag1 == 0) {
                    CHECK(std::abs(e.mean - f.mean) <=
                          3.0 * (e.std_error + f.std_error));
                }
        }
}

TEST_CASE("monte carlo determinism across thread counts") {
    SimConfig cfg;
    cfg.family = WaveletFamily::meyer(2, 1.0 / 3.0);
    cfg.levels = 1;
    cfg.length = 1L << 11;
    cfg.oversample = 16;
    cfg.runs = 6;
    cfg.base_seed = 777;
    cfg.support_halfwidth = 12.0;
    const std::vector<long> lags{0, 1};
    cfg.threads = 1;
    const auto a = mc_run_1d(cfg, NoiseModel::white(1.0), lags);
    cfg.threads = 4;
    const auto b = mc_run_1d(cfg, NoiseModel::white(1.0), lags);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean == b[i].mean); // bit identical
        CHECK(a[i].std_error == b[i].std_error);
    }
}

TEST_CASE("2d monte carlo smoke study") {
    SimConfig cfg;
    cfg.family = WaveletFamily::meyer(3, 0.25);
    cfg.levels = 1;
    cfg.length = 192; // side
    cfg.oversample = 8;
    cfg.runs = 12;
    cfg.base_seed = 2024;
    cfg.support_halfwidth = 6.0;
    cfg.post_transform = true;
    const std::vector<long> lags{0, 1};
    const auto est = mc_run_2d(cfg, NoiseModel::white(1.0), lags);
    REQUIRE(!est.empty());
    for (const auto& e : est) {
        INFO("m=(" << e.m << "," << e.mprime << ") lag=(" << e.lag1 << ","
                   << e.lag2 << ") kind=" << static_cast<int>(e.kind));
        CHECK(std::abs(e.mean - e.theory * e.expectation_scale) <=
              6.0 * e.std_error + 1e-9);
    }
    // a (m1 != 0, l1 = 0) cell has zero theory by the vanishing factor
    bool found = false;
    for (const auto& e : est)
        if (e.kind == CovKind::primal_dual && e.m == 1 && e.mprime == 1 &&
            e.lag1 == 0 && e.lag2 == 1) {
            CHECK(e.theory == Approx(0.0).margin(1e-12));
            found = true;
        }
    CHECK(found);
}
