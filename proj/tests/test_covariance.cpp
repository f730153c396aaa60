#include <catch2/catch_amalgamated.hpp>

#include "dtnoise/covariance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

using namespace dtnoise;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
const std::vector<long> kLags{-3, -2, -1, 0, 1, 2, 3};
}

TEST_CASE("noise model validation and evaluation") {
    CHECK_THROWS_AS(NoiseModel::white(0.0), InvalidParam);
    CHECK_THROWS_AS(NoiseModel::exponential(1.0, 0.0), InvalidParam);
    const auto e = NoiseModel::exponential(2.0, 0.5);
    CHECK(e.autocovariance(0.0) == 2.0);
    CHECK(e.autocovariance(-3.0) == Approx(2.0 * std::exp(-1.5)).epsilon(1e-14));
    CHECK(e.spectral_density_zero() == Approx(8.0).epsilon(1e-14));
    // spec example: A=1, alpha=2 -> density 1
    CHECK(NoiseModel::exponential(1.0, 2.0).spectral_density_zero() == 1.0);

    // tabulated model: interpolation reproduces a smooth profile
    std::vector<double> tab;
    const double dt = 0.125;
    for (int i = 0; i < 320; ++i)
        tab.push_back(std::exp(-0.5 * i * dt));
    const auto t = NoiseModel::tabulated(tab, dt);
    CHECK(t.autocovariance(0.3) == Approx(std::exp(-0.15)).margin(1e-5));
    CHECK(t.autocovariance(-0.3) == t.autocovariance(0.3));
    CHECK(t.autocovariance(1000.0) == 0.0);
    CHECK(t.spectral_density_zero() == Approx(4.0).margin(2e-3));

    // a non-decaying table is rejected for the coarse limit
    std::vector<double> flat(32, 1.0);
    CHECK_THROWS_AS(NoiseModel::tabulated(flat, 1.0).spectral_density_zero(),
                    NotIntegrable);
}

TEST_CASE("tabulated noise csv ingestion") {
    const std::string path = "noise_tab.csv";
    {
        std::ofstream out(path);
        out << "# tau, gamma\n";
        for (int i = 0; i < 64; ++i)
            out << 0.25 * i << "," << std::exp(-0.25 * i) << "\n";
    }
    const auto n = NoiseModel::tabulated_from_csv(path);
    CHECK(n.table_dt == Approx(0.25));
    CHECK(n.autocovariance(0.5) == Approx(std::exp(-0.5)).margin(1e-6));
    std::remove(path.c_str());
    CHECK_THROWS_AS(NoiseModel::tabulated_from_csv("missing.csv"), IoError);
}

TEST_CASE("white noise covariances") {
    const auto fam = WaveletFamily::shannon(2);
    const auto white = NoiseModel::white(1.0);
    const auto pd = cov_1d(white, fam, 1, 1, 1, kLags, CovKind::primal_dual);
    for (std::size_t i = 0; i < kLags.size(); ++i)
        CHECK(pd.values[i] ==
              Approx(gamma_shannon_closed(1, -kLags[i], 0)).margin(1e-12));
    // sigma^2 gamma(-1) at lag 1 equals -2/pi by oddness
    CHECK(pd.values[4] == Approx(-2.0 / kPi).epsilon(1e-12));

    const auto pp = cov_1d(white, fam, 2, 1, 1, kLags, CovKind::primal_primal);
    for (std::size_t i = 0; i < kLags.size(); ++i)
        CHECK(pp.values[i] == ((kLags[i] == 0) ? 1.0 : 0.0));
    const auto cross = cov_1d(white, fam, 1, 0, 1, kLags, CovKind::primal_primal);
    for (double v : cross.values)
        CHECK(v == 0.0);
    // primal-dual at lag 0 vanishes for m = m' != 0
    CHECK(pd.values[3] == 0.0);
}

TEST_CASE("prop 2 corollary: primal-primal equals dual-dual") {
    const auto fam = WaveletFamily::meyer(2, 1.0 / 3.0);
    const auto noise = NoiseModel::exponential(1.0, 1.0);
    const std::vector<long> lags{0, 1, 2};
    for (const auto& mm : std::vector<std::array<int, 2>>{{0, 0}, {1, 1}}) {
        const auto pp =
            cov_1d(noise, fam, 2, mm[0], mm[1], lags, CovKind::primal_primal);
        const auto dd = cov_1d(noise, fam, 2, mm[0], mm[1], lags, CovKind::dual_dual);
        for (std::size_t i = 0; i < lags.size(); ++i) {
            INFO("m=" << mm[0] << " l=" << lags[i]);
            CHECK(pp.values[i] == Approx(dd.values[i]).margin(2e-6));
        }
    }
}

TEST_CASE("cross-swap antisymmetry for colored noise") {
    const auto fam = WaveletFamily::meyer(3, 0.25);
    const auto noise = NoiseModel::exponential(1.0, 2.0);
    // Gamma_{n_m, n_m'^H}[l] = -Gamma_{n_m', n_m^H}[-l] for m m' != 0
    auto f = fam;
    f.meyer_phase_slopes = std::vector<double>{-0.5, -0.5};
    const std::vector<long> lags{-2, -1, 0, 1, 2};
    const auto a = cov_1d(noise, f, 1, 1, 2, lags, CovKind::primal_dual);
    const auto b = cov_1d(noise, f, 1, 2, 1, lags, CovKind::primal_dual);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const std::size_t ri = lags.size() - 1 - i; // -l index
        CHECK(a.values[i] == Approx(-b.values[ri]).margin(2e-6));
    }
}

TEST_CASE("scaling-band symmetry of the covariance sequence") {
    // Gamma_{n_0,n_0^H}[l] = Gamma_{n_0,n_0^H}[-l + 2d + 1]
    const auto fam = WaveletFamily::meyer(2, 1.0 / 3.0);
    const auto noise = NoiseModel::exponential(1.0, 1.0);
    const int d = 0;
    const std::vector<long> lags{-2, -1, 0, 1, 2, 3};
    const auto c = cov_1d(noise, fam, 1, 0, 0, lags, CovKind::primal_dual, d);
    auto value_at = [&](long l) {
        for (std::size_t i = 0; i < c.lags.size(); ++i)
            if (c.lags[i] == l)
                return c.values[i];
        throw std::runtime_error("lag missing");
    };
    for (long l : {-2L, -1L, 0L, 1L}) {
        CHECK(value_at(l) == Approx(value_at(-l + 2 * d + 1)).margin(2e-6));
    }
}

TEST_CASE("colored covariance approaches the coarse limit") {
    // spec example: exp(1,1), Shannon m=1, j=6, l=1 within 5 percent of
    // Gamma_hat(0) gamma(-1) = 2 * 0.63662... sign per oddness
    const auto fam = WaveletFamily::shannon(2);
    const auto noise = NoiseModel::exponential(1.0, 1.0);
    const std::vector<long> one{1};
    const auto c = cov_1d(noise, fam, 6, 1, 1, one, CovKind::primal_dual);
    const double limit = coarse_limit(noise, fam, 1, 1, 1);
    CHECK(limit == Approx(2.0 * gamma_shannon_closed(1, -1, 0)).epsilon(1e-10));
    CHECK(std::abs(limit) == Approx(2.0 * 0.63662).margin(1e-4));
    CHECK(c.values[0] == Approx(limit).epsilon(0.05));
}

TEST_CASE("coarse limit convergence is monotone over j (criterion 9 shape)") {
    const auto fam = WaveletFamily::meyer(2, 1.0 / 3.0);
    const auto noise = NoiseModel::exponential(1.0, 1.0);
    double prev = 1e9;
    double scale = 0.0;
    for (long l = -3; l <= 3; ++l)
        scale = std::max(scale, std::abs(coarse_limit(noise, fam, 1, 1, l)));
    for (int j : {2, 4, 6}) {
        const auto c = cov_1d(noise, fam, j, 1, 1, kLags, CovKind::primal_dual);
        double worst = 0.0;
        for (std::size_t i = 0; i < kLags.size(); ++i)
            worst = std::max(worst, std::abs(c.values[i] -
                                             coarse_limit(noise, fam, 1, 1, kLags[i])));
        CHECK(worst < prev);
        prev = worst;
    }
    CHECK(prev / scale < 0.05);
}

TEST_CASE("coarse limit rejects white noise and zero lag of mothers") {
    const auto fam = WaveletFamily::haar();
    CHECK_THROWS_AS(coarse_limit(NoiseModel::white(1.0), fam, 0, 0, 0), InvalidParam);
    CHECK(coarse_limit(NoiseModel::exponential(1.0, 1.0), fam, 1, 1, 0) == 0.0);
}

TEST_CASE("2d separability and white formulas") {
    const auto fam = WaveletFamily::shannon(2);
    const auto white = NoiseModel::white(1.0);
    const std::vector<long> lags{0, 1, 2, 3};
    const auto f = cov_2d(white, fam, 1, {1, 1}, {1, 1}, lags, lags,
                          CovKind::primal_dual);
    // product structure is exact
    const auto g1 = cov_1d(white, fam, 1, 1, 1, lags, CovKind::primal_dual);
    for (std::size_t i1 = 0; i1 < lags.size(); ++i1)
        for (std::size_t i2 = 0; i2 < lags.size(); ++i2)
            CHECK(f.at(i1, i2) == Approx(g1.values[i1] * g1.values[i2]).margin(1e-14));
    // (1,3) cell: gamma(-1) gamma(-3)
    CHECK(f.at(1, 3) ==
          Approx(gamma_shannon_closed(1, -1, 0) * gamma_shannon_closed(1, -3, 0))
              .margin(1e-12));
    // zero when a factor hits gamma(0) = 0 for a detail band
    CHECK(f.at(0, 2) == 0.0);
    // primal-primal: sigma^2 delta
    const auto nn = cov_2d(white, fam, 1, {1, 1}, {1, 1}, lags, lags,
                           CovKind::primal_primal);
    CHECK(nn.at(0, 0) == 1.0);
    CHECK(nn.at(0, 1) == 0.0);
    CHECK(nn.at(1, 0) == 0.0);
}

TEST_CASE("post-transform algebra") {
    const auto fam = WaveletFamily::shannon(2);
    const auto white = NoiseModel::white(1.0);
    const std::vector<long> lags{0, 1, 2, 3};
    const auto nn = cov_2d(white, fam, 1, {1, 1}, {1, 1}, lags, lags,
                           CovKind::primal_primal);
    const auto nnh = cov_2d(white, fam, 1, {1, 1}, {1, 1}, lags, lags,
                            CovKind::primal_dual);
    const auto pt = post_transform_cov(nn, nnh);
    for (std::size_t i = 0; i < pt.cross.values.size(); ++i)
        CHECK(pt.cross.values[i] == 0.0);
    for (std::size_t i = 0; i < nn.values.size(); ++i) {
        CHECK(pt.ww.values[i] == nn.values[i] + nnh.values[i]);
        CHECK(pt.whwh.values[i] == nn.values[i] - nnh.values[i]);
    }
    // spec example: Gamma_ww[1,1] = 0 + gamma(-1)^2
    const double g1 = gamma_shannon_closed(1, -1, 0);
    CHECK(pt.ww.at(1, 1) == Approx(g1 * g1).margin(1e-12));
    CHECK(pt.ww.at(1, 1) == Approx(0.40529).margin(2e-5));
    // rho = 0 gives both outputs equal to the input autocovariance
    auto zero = nnh;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    const auto pt0 = post_transform_cov(nn, zero);
    for (std::size_t i = 0; i < nn.values.size(); ++i) {
        CHECK(pt0.ww.values[i] == nn.values[i]);
        CHECK(pt0.whwh.values[i] == nn.values[i]);
    }
    // scaling-band subbands are rejected
    const auto bad = cov_2d(white, fam, 1, {0, 1}, {0, 1}, lags, lags,
                            CovKind::primal_primal);
    CHECK_THROWS_AS(post_transform_cov(bad, bad), InvalidSubband);
}

TEST_CASE("covariance decay verification") {
    // white noise + Haar band 1: weighted values stay bounded
    const auto fam = WaveletFamily::haar();
    std::vector<long> lags;
    std::vector<double> vals;
    for (long l = 1; l <= 64; ++l) {
        lags.push_back(l);
        vals.push_back(gamma_haar_closed(1, static_cast<double>(-l), 0));
    }
    const auto rep = verify_cov_decay(lags, vals, 1);
    CHECK(rep.pass);
    CHECK(rep.sup_weighted < 1.0);

    // all-zero sequence
    std::vector<double> zeros(lags.size(), 0.0);
    const auto rep0 = verify_cov_decay(lags, zeros, 1);
    CHECK(rep0.sup_weighted == 0.0);
    CHECK(rep0.pass);

    // Shannon band 1 with N forced to 1 violates the decay hypothesis
    std::vector<long> odd;
    std::vector<double> sv;
    for (long l = 1; l <= 63; l += 2) {
        odd.push_back(l);
        sv.push_back(gamma_shannon_closed(1, -l, 0));
    }
    const auto bad = verify_cov_decay(odd, sv, 1);
    CHECK_FALSE(bad.pass);
    CHECK(bad.trend_slope > 1.0); // grows like l^2
}
