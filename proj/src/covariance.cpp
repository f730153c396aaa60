#include "dtnoise/covariance.hpp"
#include "dtnoise/special.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace dtnoise {

namespace {
constexpr double kPi = std::numbers::pi;

double pow_int(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i)
        r *= x;
    return r;
}
} // namespace

// ---------------------------------------------------------------------------
// NoiseModel
// ---------------------------------------------------------------------------

NoiseModel NoiseModel::white(double sigma2) {
    NoiseModel n;
    n.kind = NoiseKind::White;
    n.sigma2 = sigma2;
    n.validate();
    return n;
}

NoiseModel NoiseModel::exponential(double A, double alpha) {
    NoiseModel n;
    n.kind = NoiseKind::ExponentialDecay;
    n.amplitude = A;
    n.alpha = alpha;
    n.validate();
    return n;
}

NoiseModel NoiseModel::tabulated(std::vector<double> values, double dt) {
    NoiseModel n;
    n.kind = NoiseKind::Tabulated;
    n.table = std::move(values);
    n.table_dt = dt;
    n.validate();
    return n;
}

NoiseModel NoiseModel::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open noise table: " + path);
    std::vector<double> taus, vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double t, v;
        if (!(ls >> t >> v))
            throw IoError("malformed noise table row: " + line);
        taus.push_back(t);
        vals.push_back(v);
    }
    if (taus.size() < 3)
        throw IoError("noise table needs at least three rows");
    const double dt = taus[1] - taus[0];
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (std::abs(taus[i] - taus[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
            throw IoError("noise table requires uniform tau spacing");
    if (std::abs(taus[0]) > 1e-12)
        throw IoError("noise table must start at tau = 0");
    return tabulated(std::move(vals), dt);
}

void NoiseModel::validate() const {
    switch (kind) {
    case NoiseKind::White:
        if (!(sigma2 > 0.0))
            throw InvalidParam("white noise variance must be positive");
        break;
    case NoiseKind::ExponentialDecay:
        if (!(amplitude > 0.0) || !(alpha > 0.0))
            throw InvalidParam("exponential noise needs A > 0 and alpha > 0");
        break;
    case NoiseKind::Tabulated: {
        if (table.size() < 3 || !(table_dt > 0.0))
            throw InvalidParam("tabulated noise needs >= 3 samples and dt > 0");
        for (double v : table)
            if (std::abs(v) > table[0] + 1e-12)
                throw InvalidParam("autocovariance must peak at lag zero");
        break;
    }
    }
}

double NoiseModel::autocovariance(double tau) const {
    const double t = std::abs(tau);
    switch (kind) {
    case NoiseKind::White:
        throw InvalidParam("white noise has no pointwise autocovariance");
    case NoiseKind::ExponentialDecay:
        return amplitude * std::exp(-alpha * t);
    case NoiseKind::Tabulated: {
        const double x = t / table_dt;
        const auto n = static_cast<long>(table.size());
        const long i = static_cast<long>(std::floor(x));
        if (i >= n - 1)
            return 0.0; // zero extension beyond the grid
        const double u = x - static_cast<double>(i);
        // Catmull-Rom with even reflection at tau = 0
        auto at = [&](long idx) {
            idx = std::labs(idx);
            return (idx < n) ? table[static_cast<std::size_t>(idx)] : 0.0;
        };
        const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
        return p1 + 0.5 * u * (p2 - p0 +
                               u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                    u * (3.0 * (p1 - p2) + p3 - p0)));
    }
    }
    return 0.0;
}

double NoiseModel::spectral_density_zero() const {
    switch (kind) {
    case NoiseKind::White:
        throw InvalidParam("white noise is already its own coarse limit");
    case NoiseKind::ExponentialDecay:
        return 2.0 * amplitude / alpha;
    case NoiseKind::Tabulated: {
        // tail must have decayed at the grid edge
        const double edge = std::max(std::abs(table[table.size() - 1]),
                                     std::abs(table[table.size() - 2]));
        if (edge > 1e-6 * std::abs(table[0]))
            throw NotIntegrable("tabulated autocovariance does not decay at the edge");
        double acc = 0.5 * table[0];
        for (std::size_t i = 1; i < table.size(); ++i)
            acc += table[i];
        return 2.0 * acc * table_dt; // even extension
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// 1D covariances
// ---------------------------------------------------------------------------

namespace {

// gamma provider for (m, m', kind); primal_dual carries the Hilbert factor
GammaProvider cov_gamma_provider(const WaveletFamily& family, int m, int mprime,
                                 CovKind kind, int d) {
    if (kind == CovKind::primal_dual)
        return make_gamma_provider(family, m, mprime, d);
    // Prop. 2: dual_dual equals primal_primal when m = m' = 0 or m m' != 0;
    // the remaining dual_dual pairs mix a mother dual with the scaling dual
    if (kind == CovKind::dual_dual && (m != mprime) && (m == 0 || mprime == 0)) {
        GammaProvider p;
        p.method = Method::quadrature;
        auto ms = std::make_shared<WaveletSpectrum>(
            dual_spectrum(make_spectrum(family, m), {d}));
        auto ps = std::make_shared<WaveletSpectrum>(
            dual_spectrum(make_spectrum(family, mprime), {d}));
        p.abs_err = 1e-6;
        p.fn = [ms, ps](double tau) { return gamma_quad(*ms, *ps, tau).value; };
        return p;
    }
    return make_gamma_primal_provider(family, m, mprime);
}

double colored_integral(const NoiseModel& noise, const GammaProvider& gamma,
                        int j, double M, long lag) {
    // int Gamma_n(x) gamma(x / M^j - l) dx over the effective noise support
    double X;
    if (noise.kind == NoiseKind::ExponentialDecay)
        X = 27.7 / noise.alpha; // e^{-alpha X} = 1e-12
    else
        X = noise.table_dt * static_cast<double>(noise.table.size());
    const double scale = std::pow(M, j);
    QuadOptions q;
    q.abs_tol = 1e-7 * std::abs(noise.autocovariance(0.0));
    q.osc_freq = (noise.kind == NoiseKind::ExponentialDecay ? noise.alpha : 1.0) +
                 kPi * 2.0 / scale;
    q.max_intervals = 20000;
    const QuadResult r = integrate(
        [&](double x) {
            return noise.autocovariance(x) *
                   gamma.fn(x / scale - static_cast<double>(lag));
        },
        -X, X, q);
    return r.value;
}

} // namespace

CovSequence1D cov_1d(const NoiseModel& noise, const WaveletFamily& family, int j,
                     int m, int mprime, std::span<const long> lags, CovKind kind,
                     int d) {
    noise.validate();
    family.validate();
    CovSequence1D out;
    out.j = j;
    out.m = m;
    out.mprime = mprime;
    out.kind = kind;
    out.lags.assign(lags.begin(), lags.end());
    out.values.resize(lags.size());

    if (noise.kind == NoiseKind::White) {
        if (kind == CovKind::primal_dual) {
            const auto g = make_gamma_provider(family, m, mprime, d);
            for (std::size_t i = 0; i < lags.size(); ++i)
                out.values[i] =
                    noise.sigma2 * g.fn(-static_cast<double>(lags[i]));
        } else {
            for (std::size_t i = 0; i < lags.size(); ++i)
                out.values[i] =
                    (m == mprime && lags[i] == 0) ? noise.sigma2 : 0.0;
        }
        return out;
    }

    const auto g = cov_gamma_provider(family, m, mprime, kind, d);
    for (std::size_t i = 0; i < lags.size(); ++i)
        out.values[i] =
            colored_integral(noise, g, j, static_cast<double>(family.bands),
                             lags[i]);
    return out;
}

// ---------------------------------------------------------------------------
// 2D covariances
// ---------------------------------------------------------------------------

CovField2D cov_2d(const NoiseModel& noise, const WaveletFamily& family, int j,
                  std::array<int, 2> m, std::array<int, 2> mprime,
                  std::span<const long> lags1, std::span<const long> lags2,
                  CovKind kind, int d) {
    if (noise.kind == NoiseKind::ExponentialDecay) {
        // a 1D exponential profile is accepted as the separable product
        // A e^{-a|t1|} A e^{-a|t2|}
    } else if (noise.kind != NoiseKind::White && noise.kind != NoiseKind::Tabulated) {
        throw NotSeparable("2D covariance needs a separable noise model");
    }
    CovField2D out;
    out.j = j;
    out.m = m;
    out.mprime = mprime;
    out.kind = kind;
    out.lags1.assign(lags1.begin(), lags1.end());
    out.lags2.assign(lags2.begin(), lags2.end());

    const CovSequence1D f1 =
        cov_1d(noise, family, j, m[0], mprime[0], lags1, kind, d);
    const CovSequence1D f2 =
        cov_1d(noise, family, j, m[1], mprime[1], lags2, kind, d);
    out.values.resize(lags1.size() * lags2.size());
    for (std::size_t i1 = 0; i1 < lags1.size(); ++i1)
        for (std::size_t i2 = 0; i2 < lags2.size(); ++i2)
            out.values[i1 * lags2.size() + i2] = f1.values[i1] * f2.values[i2];
    return out;
}

PostTransformPair post_transform_cov(const CovField2D& nn, const CovField2D& nnh) {
    if (nn.m[0] == 0 || nn.m[1] == 0)
        throw InvalidSubband("post-transform applies to detail subbands only");
    if (nn.m != nnh.m || nn.lags1 != nnh.lags1 || nn.lags2 != nnh.lags2)
        throw InvalidParam("mismatched covariance fields");
    PostTransformPair out{nn, nn, nn};
    out.ww.post_transformed = out.whwh.post_transformed =
        out.cross.post_transformed = true;
    for (std::size_t i = 0; i < nn.values.size(); ++i) {
        out.ww.values[i] = nn.values[i] + nnh.values[i];
        out.whwh.values[i] = nn.values[i] - nnh.values[i];
        out.cross.values[i] = 0.0;
    }
    out.cross.kind = CovKind::primal_dual;
    return out;
}

double coarse_limit(const NoiseModel& noise, const WaveletFamily& family, int m,
                    int mprime, long lag, int d) {
    const double density = noise.spectral_density_zero();
    const auto g = make_gamma_provider(family, m, mprime, d);
    return density * g.fn(-static_cast<double>(lag));
}

DecayReport verify_cov_decay(std::span<const long> lags,
                             std::span<const double> values, int moments) {
    if (lags.size() != values.size() || lags.empty())
        throw InvalidParam("mismatched lag/value arrays");
    DecayReport rep;
    const int p = 2 * moments + 1;
    std::vector<double> wl, wv;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double l = std::abs(static_cast<double>(lags[i]));
        if (l < 1.0)
            continue;
        const double w = std::abs(values[i]) * (1.0 + pow_int(l, p));
        rep.sup_weighted = std::max(rep.sup_weighted, w);
        if (l >= 8.0 && w > 0.0) {
            wl.push_back(std::log(l));
            wv.push_back(std::log(w));
        }
    }
    if (wl.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < wl.size(); ++i) {
            sx += wl[i];
            sy += wv[i];
            sxx += wl[i] * wl[i];
            sxy += wl[i] * wv[i];
        }
        const double n = static_cast<double>(wl.size());
        rep.trend_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    rep.pass = std::isfinite(rep.sup_weighted) && rep.trend_slope <= 0.25;
    return rep;
}

} // namespace dtnoise
