#include "dtnoise/special.hpp"
#include "dtnoise/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace dtnoise {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.577215664901532860606512090082;
} // namespace

double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

// ---------------------------------------------------------------------------
// Sine and cosine integrals.
//
// Three regimes: Maclaurin series for small arguments, a complex continued
// fraction for E1(ix) in the mid range, and the asymptotic auxiliary
// expansion for large arguments. Accuracy ~1e-15 relative across regimes.
// ---------------------------------------------------------------------------

namespace {

void sici_series(double x, double& si, double& ci) {
    // Si series: sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
    // Cin series: sum (-1)^(k+1) x^(2k) / ((2k)(2k)!), Ci = gamma + ln x - Cin.
    double term_s = x;
    double sum_s = x;
    double sum_cin = 0.0;
    double term = x; // running x^(2k+1)/(2k+1)! style factor
    for (int k = 1; k <= 40; ++k) {
        term *= -x * x / ((2 * k) * (2 * k + 1));
        term_s = term / (2 * k + 1);
        sum_s += term_s;
        // matching Cin term at order 2k: (-1)^(k+1) x^(2k)/((2k)(2k)!)
        // derive from `term`: term = (-1)^k x^(2k+1)/(2k+1)!  =>
        // x^(2k)/(2k)! = |term| * (2k+1)/x
        const double t_cin = -term * (2 * k + 1) / (x * 2 * k);
        sum_cin += t_cin;
        if (std::abs(term_s) < 1e-18 * std::abs(sum_s))
            break;
    }
    si = sum_s;
    ci = kEulerGamma + std::log(x) - sum_cin;
}

void sici_contfrac(double x, double& si, double& ci) {
    // E1(ix) by modified Lentz continued fraction;
    // Ci(x) = -Re E1(ix), Si(x) = pi/2 + Im E1(ix).
    using cd = std::complex<double>;
    const cd z(0.0, x);
    const double tiny = 1e-290;
    cd b = z + 1.0;
    cd c = 1.0 / tiny;
    cd d = 1.0 / b;
    cd h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            break;
    }
    const cd e1 = h * std::exp(-z);
    ci = -e1.real();
    si = kPi / 2.0 + e1.imag();
}

void sici_asymptotic(double x, double& si, double& ci) {
    // f(x) ~ (1/x) sum (-1)^k (2k)!/x^(2k), g(x) ~ (1/x^2) sum (-1)^k (2k+1)!/x^(2k)
    double f = 0.0, g = 0.0, fac = 1.0;
    const double x2 = x * x;
    double powx = 1.0;
    for (int k = 0; k <= 14; ++k) {
        const double tf = fac / powx;            // (2k)!/x^(2k)
        const double tg = fac * (2 * k + 1) / powx; // (2k+1)!/x^(2k)
        if (k % 2 == 0) {
            f += tf;
            g += tg;
        } else {
            f -= tf;
            g -= tg;
        }
        fac *= (2 * k + 1) * (2 * k + 2);
        powx *= x2;
        if (tf < 1e-18)
            break;
    }
    f /= x;
    g /= x2;
    const double s = std::sin(x), c = std::cos(x);
    si = kPi / 2.0 - f * c - g * s;
    ci = f * s - g * c;
}

void sici(double x, double& si, double& ci) {
    const double ax = std::abs(x);
    if (ax == 0.0) {
        si = 0.0;
        ci = -std::numeric_limits<double>::infinity();
        return;
    }
    double s, c;
    if (ax <= 8.0)
        sici_series(ax, s, c);
    else if (ax < 100.0)
        sici_contfrac(ax, s, c);
    else
        sici_asymptotic(ax, s, c);
    si = (x < 0) ? -s : s;
    ci = c; // caller guarantees x > 0 when Ci is consumed
}

} // namespace

double sine_integral(double x) {
    double s, c;
    sici(x, s, c);
    return s;
}

double cosine_integral(double x) {
    if (x <= 0.0)
        throw InvalidParam("cosine_integral requires x > 0");
    double s, c;
    sici(x, s, c);
    return c;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre
// ---------------------------------------------------------------------------

namespace {

struct GLRule {
    std::vector<double> nodes;   // on (0,1), positive half
    std::vector<double> weights; // matching weights
    bool has_center = false;
    double center_weight = 0.0;
};

// Nodes by Newton iteration on Legendre polynomials; cached per order.
const GLRule& gl_rule(int order) {
    static std::vector<GLRule> cache(129);
    if (order < 2 || order > 128)
        throw InvalidParam("gauss_legendre order out of range");
    GLRule& r = cache[static_cast<std::size_t>(order)];
    if (!r.nodes.empty() || r.has_center)
        return r;
    const int n = order;
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        // initial guess (Abramowitz-Stegun)
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        r.nodes.push_back(x);
        r.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    }
    if (n % 2 == 1) {
        r.has_center = true;
        // weight at x=0
        double p0 = 1.0, p1 = 0.0;
        for (int k = 2; k <= n; ++k) {
            const double p2 = (-(k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (-p0) / (-1.0);
        r.center_weight = 2.0 / (dp * dp);
    }
    return r;
}

} // namespace

double gauss_legendre(const std::function<double(double)>& f, double a,
                      double b, int order) {
    const GLRule& r = gl_rule(order);
    const double mid = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * (f(mid + hl * r.nodes[i]) + f(mid - hl * r.nodes[i]));
    if (r.has_center)
        acc += r.center_weight * f(mid);
    return acc * hl;
}

double gauss_legendre_oscillatory(const std::function<double(double)>& f,
                                  double a, double b, double freq, int order) {
    const double phase = std::abs(freq) * (b - a);
    const int panels = std::max(1, static_cast<int>(std::ceil(phase / 24.0)));
    double acc = 0.0;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i)
        acc += gauss_legendre(f, a + i * h, a + (i + 1) * h, order);
    return acc;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7,15)
// ---------------------------------------------------------------------------

namespace {

// QUADPACK dqk15 constants.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b,
          double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);
    const double fc = f(mid);
    double res_g = fc * kWg[3];
    double res_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = hl * kXgk[j];
        const double f1 = f(mid - x);
        const double f2 = f(mid + x);
        res_k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1)
            res_g += kWg[j / 2] * (f1 + f2);
    }
    value = res_k * hl;
    err = std::abs((res_k - res_g) * hl);
}

struct Segment {
    double a, b, value, err;
};

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const QuadOptions& opt) {
    if (!(b > a))
        return {0.0, 0.0};

    // initial panels: keep oscillation phase per panel moderate
    std::size_t n0 = 1;
    if (opt.osc_freq > 0.0) {
        const double phase = opt.osc_freq * (b - a);
        n0 = std::max<std::size_t>(1, static_cast<std::size_t>(phase / 12.0));
        n0 = std::min<std::size_t>(n0, opt.max_intervals / 2);
    }

    std::vector<Segment> segs;
    segs.reserve(n0 + 16);
    const double h0 = (b - a) / static_cast<double>(n0);
    double total = 0.0, toterr = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
        Segment s;
        s.a = a + static_cast<double>(i) * h0;
        s.b = (i + 1 == n0) ? b : s.a + h0;
        gk15(f, s.a, s.b, s.value, s.err);
        total += s.value;
        toterr += s.err;
        segs.push_back(s);
    }

    while (toterr > opt.abs_tol && segs.size() < opt.max_intervals) {
        // split the worst segment
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err)
                worst = i;
        Segment s = segs[worst];
        if (s.b - s.a < 1e-14 * (std::abs(s.a) + 1.0))
            break; // interval exhausted at machine resolution
        const double m = 0.5 * (s.a + s.b);
        Segment s1{s.a, m, 0, 0}, s2{m, s.b, 0, 0};
        gk15(f, s1.a, s1.b, s1.value, s1.err);
        gk15(f, s2.a, s2.b, s2.value, s2.err);
        total += s1.value + s2.value - s.value;
        toterr += s1.err + s2.err - s.err;
        segs[worst] = s1;
        segs.push_back(s2);
    }

    if (toterr > opt.abs_tol * 10.0 && opt.throw_on_failure)
        throw QuadratureNonConvergent("adaptive quadrature stalled: err=" +
                                      std::to_string(toterr));
    return {total, toterr};
}

// ---------------------------------------------------------------------------
// Exact trigonometric tails against 1/w^2
// ---------------------------------------------------------------------------

double tail_sin_over_w2(double c, double W) {
    if (c == 0.0)
        return 0.0;
    const double ac = std::abs(c);
    const double X = ac * W;
    const double v = ac * (std::sin(X) / X - cosine_integral(X));
    return (c > 0) ? v : -v;
}

double tail_cos_over_w2(double c, double W) {
    if (c == 0.0)
        return 1.0 / W;
    const double ac = std::abs(c);
    const double X = ac * W;
    return ac * (std::cos(X) / X - kPi / 2.0 + sine_integral(X));
}

double int_sin_over_w2(double c, double a, double b) {
    return tail_sin_over_w2(c, a) - tail_sin_over_w2(c, b);
}

double int_cos_over_w2(double c, double a, double b) {
    return tail_cos_over_w2(c, a) - tail_cos_over_w2(c, b);
}

} // namespace dtnoise
