#include "dtnoise/spectra.hpp"
#include "dtnoise/special.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dtnoise {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

// ---------------------------------------------------------------------------
// Meyer taper
// ---------------------------------------------------------------------------

double nu_poly(double t) {
    // nu(t) = t^4 (35 - 84 t + 70 t^2 - 20 t^3)
    return t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}

ProductValue product_from_filters(const std::vector<std::vector<double>>& filters,
                                  int packet_depth, int m, double w,
                                  int trunc_depth);

// ---------------------------------------------------------------------------
// Spline orthonormalization denominators
// P_p(w) = sum_k sinc^{2(p+1)}((w + 2 k pi)/2)
// ---------------------------------------------------------------------------

double euler_frobenius(double w, int order) {
    const double s2 = std::sin(w / 2) * std::sin(w / 2);
    const double c2 = std::cos(w / 2) * std::cos(w / 2);
    if (order == 1)
        return (1.0 + 2.0 * c2) / 3.0;
    if (order == 3) {
        // sin^8(x) * d^6/dx^6 csc^2(x) / 7!  reduced to a polynomial
        return (2177.0 * s2 * s2 * s2 - 5733.0 * s2 * s2 + 3675.0 * s2 +
                2205.0 * c2 * c2 * c2) /
               2205.0;
    }
    // general odd order: direct lattice sum, terms decay like k^{-2(p+1)}
    double acc = 0.0;
    for (int k = -64; k <= 64; ++k) {
        const double s = sinc((w + 2.0 * kPi * k) / 2.0);
        acc += std::pow(s * s, order + 1);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Walsh sign patterns of the Hadamard packet wavelets on [0,1)
// ---------------------------------------------------------------------------

std::vector<int> walsh_pattern_impl(int m) {
    std::vector<int> s{1};
    if (m == 0)
        return s;
    int top = 31;
    while (!((m >> top) & 1))
        --top;
    for (int b = top; b >= 0; --b) {
        std::vector<int> next(2 * s.size());
        const bool odd = (m >> b) & 1;
        for (std::size_t j = 0; j < s.size(); ++j) {
            next[j] = s[j];
            next[s.size() + j] = odd ? -s[j] : s[j];
        }
        s.swap(next);
    }
    return s;
}

// ---------------------------------------------------------------------------
// FIR helpers
// ---------------------------------------------------------------------------

cd fir_response(const std::vector<double>& h, double w) {
    cd acc = 0.0;
    for (std::size_t n = 0; n < h.size(); ++n)
        acc += h[n] * std::exp(cd(0.0, -static_cast<double>(n) * w));
    return acc;
}

// order of the zero of the response at w = 0 (vanishing-moment count)
int fir_zero_order(const std::vector<double>& h) {
    double scale = 0.0;
    for (double v : h)
        scale += std::abs(v);
    for (int q = 0; q < 16; ++q) {
        double mom = 0.0, mag = 0.0;
        for (std::size_t n = 0; n < h.size(); ++n) {
            const double nq = (q == 0) ? 1.0 : std::pow(static_cast<double>(n), q);
            mom += h[n] * nq;
            mag += std::abs(h[n]) * nq;
        }
        if (std::abs(mom) > 1e-8 * std::max(mag, scale))
            return q;
    }
    return 16;
}

int digit_sum(int m) {
    int s = 0;
    while (m) {
        s += m & 1;
        m >>= 1;
    }
    return s;
}

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

} // namespace

std::vector<int> walsh_pattern(int m, int M) {
    std::vector<int> base = walsh_pattern_impl(m);
    std::vector<int> out(static_cast<std::size_t>(M));
    const std::size_t rep = static_cast<std::size_t>(M) / base.size();
    for (std::size_t j = 0; j < base.size(); ++j)
        for (std::size_t r = 0; r < rep; ++r)
            out[j * rep + r] = base[j];
    return out;
}

double meyer_window(double theta) {
    if (theta <= 0.0)
        return 1.0;
    if (theta >= 1.0)
        return 0.0;
    return std::cos(0.5 * kPi * nu_poly(theta));
}

double meyer_window_sq(double theta) {
    const double w = meyer_window(theta);
    return w * w;
}

// ---------------------------------------------------------------------------
// WaveletFamily
// ---------------------------------------------------------------------------

WaveletFamily WaveletFamily::shannon(int M) {
    WaveletFamily f;
    f.kind = FamilyKind::Shannon;
    f.bands = M;
    f.validate();
    return f;
}

WaveletFamily WaveletFamily::meyer(int M, double eps) {
    WaveletFamily f;
    f.kind = FamilyKind::Meyer;
    f.bands = M;
    f.epsilon = eps;
    f.validate();
    return f;
}

WaveletFamily WaveletFamily::haar() { return haar_packet(1); }

WaveletFamily WaveletFamily::haar_packet(int depth) {
    WaveletFamily f;
    f.kind = FamilyKind::HaarPacket;
    f.packet_depth = depth;
    f.bands = 1 << depth;
    f.validate();
    return f;
}

WaveletFamily WaveletFamily::franklin() {
    WaveletFamily f;
    f.kind = FamilyKind::Franklin;
    f.bands = 2;
    f.spline_order = 1;
    return f;
}

WaveletFamily WaveletFamily::battle_lemarie(int order) {
    WaveletFamily f;
    f.kind = FamilyKind::BattleLemarie;
    f.bands = 2;
    f.spline_order = order;
    f.validate();
    return f;
}

WaveletFamily WaveletFamily::custom_fir(std::vector<std::vector<double>> filters,
                                        int packet_depth) {
    WaveletFamily f;
    f.kind = FamilyKind::CustomFIR;
    f.filters = std::move(filters);
    if (f.filters.size() == 2) {
        f.packet_depth = packet_depth;
        f.bands = 1 << packet_depth;
    } else {
        f.packet_depth = 0;
        f.bands = static_cast<int>(f.filters.size());
    }
    f.validate();
    return f;
}

void WaveletFamily::validate() const {
    if (bands < 2)
        throw InvalidParam("band count M must be >= 2");
    switch (kind) {
    case FamilyKind::Shannon:
        break;
    case FamilyKind::Meyer:
        if (!(epsilon > 0.0 && epsilon <= 1.0 / (bands + 1)))
            throw InvalidParam("Meyer taper width must satisfy 0 < eps <= 1/(M+1)");
        if (meyer_phase_slopes &&
            meyer_phase_slopes->size() != static_cast<std::size_t>(bands - 1))
            throw InvalidParam("need one Meyer phase slope per band 1..M-1");
        break;
    case FamilyKind::HaarPacket:
        if (!is_power_of_two(bands) || bands != (1 << packet_depth))
            throw InvalidParam("Haar packets require M = 2^P");
        break;
    case FamilyKind::Franklin:
        break;
    case FamilyKind::BattleLemarie:
        if (spline_order < 1 || spline_order % 2 == 0)
            throw InvalidParam("spline order must be odd and positive");
        break;
    case FamilyKind::CustomFIR: {
        if (filters.size() < 2)
            throw InvalidParam("CustomFIR needs at least two filters");
        const bool packet = filters.size() == 2;
        if (packet && (packet_depth < 1 || bands != (1 << packet_depth)))
            throw InvalidParam("CustomFIR packet mode requires M = 2^P");
        const int channels = packet ? 2 : bands;
        const double res = paraunitarity_residual(filters, channels);
        if (res > 1e-8)
            throw NotParaUnitary("filter bank violates para-unitarity, residual " +
                                 std::to_string(res));
        break;
    }
    }
}

std::string WaveletFamily::name() const {
    std::ostringstream os;
    switch (kind) {
    case FamilyKind::Shannon:
        os << "shannon";
        break;
    case FamilyKind::Meyer:
        os << "meyer";
        break;
    case FamilyKind::HaarPacket:
        os << (bands == 2 ? "haar" : "hadamard");
        break;
    case FamilyKind::Franklin:
        os << "franklin";
        break;
    case FamilyKind::BattleLemarie:
        os << "spline" << spline_order;
        break;
    case FamilyKind::CustomFIR:
        os << "custom_fir";
        break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Spectrum construction
// ---------------------------------------------------------------------------

WaveletSpectrum::WaveletSpectrum(WaveletFamily family, int m)
    : family_(std::move(family)), m_(m) {
    const int M = family_.bands;
    if (m_ < 0 || m_ >= M)
        throw UnknownBand("band index " + std::to_string(m_) +
                          " outside 0.." + std::to_string(M - 1));
    family_.validate();

    const double eps = family_.epsilon;
    switch (family_.kind) {
    case FamilyKind::Shannon:
        band_limited_ = true;
        support_ = {{m_ * kPi, (m_ + 1) * kPi}};
        moments_ = kUnboundedMoments;
        break;
    case FamilyKind::Meyer:
        band_limited_ = true;
        if (m_ == 0)
            support_ = {{0.0, (1.0 + eps) * kPi}};
        else if (m_ == M - 1)
            support_ = {{(M - 1 - eps) * kPi, M * (1.0 + eps) * kPi}};
        else
            support_ = {{(m_ - eps) * kPi, (m_ + 1 + eps) * kPi}};
        moments_ = kUnboundedMoments;
        break;
    case FamilyKind::HaarPacket: {
        band_limited_ = false;
        moments_ = (m_ == 0) ? 1 : digit_sum(m_);
        // w * psi_hat(w) = -i (1 - e^{-iw/M}) sum_j s_j e^{-i w j / M}
        const std::vector<int> s = walsh_pattern(m_, M);
        std::vector<cd> poly(static_cast<std::size_t>(M) + 1, cd(0.0));
        for (int j = 0; j < M; ++j) {
            poly[static_cast<std::size_t>(j)] += cd(0.0, -1.0) * static_cast<double>(s[static_cast<std::size_t>(j)]);
            poly[static_cast<std::size_t>(j) + 1] -= cd(0.0, -1.0) * static_cast<double>(s[static_cast<std::size_t>(j)]);
        }
        tail_.inverse_power = 1;
        tail_.bound = 0.0;
        for (std::size_t j = 0; j < poly.size(); ++j) {
            if (std::abs(poly[j]) > 1e-14)
                tail_.terms.push_back({poly[j], -static_cast<double>(j) / M});
            tail_.bound += std::abs(poly[j]);
        }
        support_ = {{0.0, tail_.bound * 1e12}};
        break;
    }
    case FamilyKind::Franklin:
        band_limited_ = false;
        moments_ = 2;
        tail_.inverse_power = 2;
        tail_.bound = (m_ == 0) ? 4.0 * std::sqrt(3.0) : 48.0;
        support_ = {{0.0, std::sqrt(tail_.bound * 1e12)}};
        break;
    case FamilyKind::BattleLemarie: {
        band_limited_ = false;
        const int p = family_.spline_order;
        moments_ = p + 1;
        tail_.inverse_power = p + 1;
        // coarse sup of w^{p+1} |psi_hat|
        double pmin = 1.0;
        for (int i = 1; i < 64; ++i)
            pmin = std::min(pmin, euler_frobenius(i * kPi / 32.0, p));
        const double amp = std::pow(2.0, p + 1);
        tail_.bound = (m_ == 0) ? amp / std::sqrt(pmin) : amp * amp / pmin;
        support_ = {{0.0, std::pow(tail_.bound * 1e12, 1.0 / (p + 1))}};
        break;
    }
    case FamilyKind::CustomFIR: {
        band_limited_ = false;
        const bool packet = family_.filters.size() == 2;
        if (packet) {
            const int base = fir_zero_order(family_.filters[1]);
            moments_ = (m_ == 0) ? base : base * digit_sum(m_);
            // detect a Haar-type pair to enable the exact trig tail
            const auto& a0 = family_.filters[0];
            const auto& a1 = family_.filters[1];
            const double c = 1.0 / std::sqrt(2.0);
            if (a0.size() == 2 && a1.size() == 2 && std::abs(a0[0] - c) < 1e-12 &&
                std::abs(a0[1] - c) < 1e-12 && std::abs(a1[0] - c) < 1e-12 &&
                std::abs(a1[1] + c) < 1e-12) {
                WaveletSpectrum ref(WaveletFamily::haar_packet(family_.packet_depth), m_);
                tail_ = ref.tail_;
            } else {
                tail_.inverse_power = 1;
                tail_.bound = 2.0 * M;
            }
        } else {
            if (m_ == 0) {
                int mn = 16;
                for (std::size_t c = 1; c < family_.filters.size(); ++c)
                    mn = std::min(mn, fir_zero_order(family_.filters[c]));
                moments_ = mn;
            } else {
                moments_ = fir_zero_order(family_.filters[static_cast<std::size_t>(m_)]);
            }
            tail_.inverse_power = 1;
            tail_.bound = 2.0 * M;
        }
        support_ = {{0.0, tail_.bound * 1e12}};
        break;
    }
    }
}

namespace {

double meyer_amplitude(const WaveletFamily& fam, int m, double w) {
    const double a = std::abs(w);
    const double eps = fam.epsilon;
    const int M = fam.bands;
    if (m == 0) {
        if (a <= kPi * (1.0 - eps))
            return 1.0;
        if (a <= kPi * (1.0 + eps))
            return meyer_window(a / (2.0 * kPi * eps) - (1.0 - eps) / (2.0 * eps));
        return 0.0;
    }
    if (m == M - 1) {
        const double lo = kPi * (M - 1 - eps), l2 = kPi * (M - 1 + eps);
        const double l3 = kPi * M * (1.0 - eps), hi = kPi * M * (1.0 + eps);
        if (a < lo || a > hi)
            return 0.0;
        if (a <= l2)
            return meyer_window((M - 1 + eps) / (2.0 * eps) - a / (2.0 * kPi * eps));
        if (a <= l3)
            return 1.0;
        return meyer_window(a / (2.0 * kPi * eps * M) - (1.0 - eps) / (2.0 * eps));
    }
    const double lo = kPi * (m - eps), l2 = kPi * (m + eps);
    const double l3 = kPi * (m + 1 - eps), hi = kPi * (m + 1 + eps);
    if (a < lo || a > hi)
        return 0.0;
    if (a <= l2)
        return meyer_window((m + eps) / (2.0 * eps) - a / (2.0 * kPi * eps));
    if (a <= l3)
        return 1.0;
    return meyer_window(a / (2.0 * kPi * eps) - (m + 1 - eps) / (2.0 * eps));
}

} // namespace

std::complex<double> WaveletSpectrum::eval_primal(double w) const {
    const int M = family_.bands;
    switch (family_.kind) {
    case FamilyKind::Shannon: {
        const double a = std::abs(w);
        // 1 on ]-(m+1)pi,-m pi] u [m pi,(m+1)pi[
        const bool in = (w >= 0) ? (a >= m_ * kPi && a < (m_ + 1) * kPi)
                                 : (a > m_ * kPi && a <= (m_ + 1) * kPi);
        return in ? cd(1.0, 0.0) : cd(0.0, 0.0);
    }
    case FamilyKind::Meyer: {
        const double amp = meyer_amplitude(family_, m_, w);
        if (m_ == 0 || !family_.meyer_phase_slopes)
            return cd(amp, 0.0);
        const double slope = (*family_.meyer_phase_slopes)[static_cast<std::size_t>(m_ - 1)];
        return std::polar(amp, slope * w);
    }
    case FamilyKind::HaarPacket: {
        const std::vector<int> s = walsh_pattern(m_, M);
        cd acc = 0.0;
        for (int j = 0; j < M; ++j)
            acc += static_cast<double>(s[static_cast<std::size_t>(j)]) *
                   std::exp(cd(0.0, -(2.0 * j + 1.0) * w / (2.0 * M)));
        return sinc(w / (2.0 * M)) / static_cast<double>(M) * acc;
    }
    case FamilyKind::Franklin:
    case FamilyKind::BattleLemarie: {
        const int p = (family_.kind == FamilyKind::Franklin) ? 1 : family_.spline_order;
        const int n = p + 1;
        if (m_ == 0)
            return cd(std::pow(sinc(w / 2.0), n) / std::sqrt(euler_frobenius(w, p)), 0.0);
        const double mag = std::pow(std::sin(w / 4.0) * sinc(w / 4.0), n) *
                           std::sqrt(euler_frobenius(w / 2.0 + kPi, p) /
                                     (euler_frobenius(w, p) * euler_frobenius(w / 2.0, p)));
        return -mag * std::exp(cd(0.0, -w / 2.0));
    }
    case FamilyKind::CustomFIR:
        // the family was validated at construction
        return product_from_filters(family_.filters, family_.packet_depth, m_, w, 24)
            .value;
    }
    return 0.0;
}

std::complex<double> WaveletSpectrum::eval(double w) const {
    if (!dual_)
        return eval_primal(w);
    if (m_ != 0) {
        const double sg = (w > 0) ? 1.0 : (w < 0 ? -1.0 : 0.0);
        return cd(0.0, -sg) * eval_primal(w);
    }
    // dual scaling function: (-1)^k e^{-i(d+1/2)w} psi_hat_0(w) on [2k pi, 2(k+1) pi)
    const double kf = std::floor(w / (2.0 * kPi));
    const long k = static_cast<long>(kf);
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    if (w < 0.0)
        sgn = -sgn;
    return sgn * std::exp(cd(0.0, -(delay_ + 0.5) * w)) * eval_primal(w);
}

double WaveletSpectrum::eval_sq(double w) const {
    const int M = family_.bands;
    switch (family_.kind) {
    case FamilyKind::Shannon:
    case FamilyKind::Meyer: {
        const double amp = (family_.kind == FamilyKind::Shannon)
                               ? std::abs(eval_primal(w))
                               : meyer_amplitude(family_, m_, w);
        return amp * amp;
    }
    case FamilyKind::HaarPacket: {
        // (1/M^2) sinc^2(w/2M) |sum_j s_j e^{-i theta j}|^2, theta = w/M
        const std::vector<int> s = walsh_pattern(m_, M);
        const double theta = w / M;
        double acc = static_cast<double>(M); // rho_0 = M
        for (int r = 1; r < M; ++r) {
            int rho = 0;
            for (int j = 0; j + r < M; ++j)
                rho += s[static_cast<std::size_t>(j)] * s[static_cast<std::size_t>(j + r)];
            acc += 2.0 * rho * std::cos(theta * r);
        }
        const double sc = sinc(w / (2.0 * M));
        return sc * sc / (M * M) * std::max(acc, 0.0);
    }
    case FamilyKind::Franklin:
    case FamilyKind::BattleLemarie: {
        const int p = (family_.kind == FamilyKind::Franklin) ? 1 : family_.spline_order;
        const int n = p + 1;
        if (m_ == 0)
            return std::pow(sinc(w / 2.0) * sinc(w / 2.0), n) / euler_frobenius(w, p);
        const double s4 = std::sin(w / 4.0) * sinc(w / 4.0);
        return std::pow(s4 * s4, n) * euler_frobenius(w / 2.0 + kPi, p) /
               (euler_frobenius(w, p) * euler_frobenius(w / 2.0, p));
    }
    case FamilyKind::CustomFIR: {
        const double a = std::abs(eval_primal(w));
        return a * a;
    }
    }
    return 0.0;
}

WaveletSpectrum make_spectrum(const WaveletFamily& family, int m) {
    return WaveletSpectrum(family, m);
}

WaveletSpectrum dual_spectrum(const WaveletSpectrum& spec, HilbertDualRule rule) {
    if (spec.dual_)
        throw InvalidParam("spectrum is already a dual");
    WaveletSpectrum d = spec;
    d.dual_ = true;
    d.delay_ = rule.delay;
    return d;
}

std::complex<double> eval_spectrum(const WaveletFamily& family, int m, double w) {
    return make_spectrum(family, m).eval(w);
}

double eval_sq_modulus(const WaveletFamily& family, int m, double w) {
    return make_spectrum(family, m).eval_sq(w);
}

int vanishing_moments(const WaveletFamily& family, int m) {
    return make_spectrum(family, m).vanishing_moments();
}

// ---------------------------------------------------------------------------
// Filter-bank spectra
// ---------------------------------------------------------------------------

double paraunitarity_residual(const std::vector<std::vector<double>>& filters,
                              int channels, int grid) {
    if (static_cast<int>(filters.size()) < channels)
        throw InvalidParam("fewer filters than channels");
    double worst = 0.0;
    const int Mc = channels;
    for (int g = 0; g < grid; ++g) {
        const double w = 2.0 * kPi * g / grid;
        for (int m = 0; m < Mc; ++m) {
            for (int mp = m; mp < Mc; ++mp) {
                cd acc = 0.0;
                for (int p = 0; p < Mc; ++p) {
                    const double wp = w + 2.0 * kPi * p / Mc;
                    acc += fir_response(filters[static_cast<std::size_t>(m)], wp) *
                           std::conj(fir_response(filters[static_cast<std::size_t>(mp)], wp));
                }
                const double target = (m == mp) ? static_cast<double>(Mc) : 0.0;
                worst = std::max(worst, std::abs(acc - target));
            }
        }
    }
    return worst;
}

namespace {

// product evaluation without the para-unitarity check; the public entry
// point validates, spectra of validated families skip straight here
ProductValue product_from_filters(const std::vector<std::vector<double>>& filters,
                                  int packet_depth, int m, double w,
                                  int trunc_depth) {
    if (trunc_depth < 8)
        throw InvalidParam("product truncation depth must be >= 8");
    const bool packet = filters.size() == 2;
    const int M = packet ? (1 << packet_depth) : static_cast<int>(filters.size());
    if (m < 0 || m >= M)
        throw UnknownBand("band index out of range");

    const std::vector<double>& low = filters[0];
    double lsum = 0.0, mu = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < low.size(); ++n) {
        lsum += low[n];
        mu += low[n] * static_cast<double>(n);
    }
    mu /= lsum;
    for (std::size_t n = 0; n < low.size(); ++n)
        m2 += std::abs(low[n]) * (n - mu) * (n - mu);
    m2 /= std::abs(lsum);

    cd prod = 1.0;
    double x = w;
    if (packet) {
        // digit-indexed cascade: A_{eps_i}(w/2^i), low-pass beyond the top bit
        int digits = m;
        const double r2 = std::sqrt(2.0);
        for (int i = 1; i <= trunc_depth; ++i) {
            x = w / std::pow(2.0, i);
            const int d = digits & 1;
            digits >>= 1;
            prod *= fir_response(filters[static_cast<std::size_t>(d)], x) / r2;
        }
    } else {
        const double rM = std::sqrt(static_cast<double>(M));
        x = w / M;
        prod = fir_response(filters[static_cast<std::size_t>(m)], x) / rM;
        for (int i = 2; i <= trunc_depth; ++i) {
            x = w / std::pow(static_cast<double>(M), i);
            prod *= fir_response(low, x) / rM;
        }
    }
    // first-order phase of the un-expanded remainder phi_hat(x): e^{-i mu x}
    prod *= std::exp(cd(0.0, -mu * x));
    const double bound = x * x * m2; // remainder is 1 + O(x^2)
    return {prod, bound};
}

} // namespace

ProductValue spectrum_from_filters(const std::vector<std::vector<double>>& filters,
                                   int packet_depth, int m, double w,
                                   int trunc_depth) {
    const bool packet = filters.size() == 2;
    const int channels = packet ? 2 : static_cast<int>(filters.size());
    const double res = paraunitarity_residual(filters, channels);
    if (res > 1e-8)
        throw NotParaUnitary("filter bank violates para-unitarity, residual " +
                             std::to_string(res));
    return product_from_filters(filters, packet_depth, m, w, trunc_depth);
}

std::vector<std::vector<double>> load_filter_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open filter file: " + path);
    std::vector<std::vector<double>> filters;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> taps;
        double v;
        while (ls >> v)
            taps.push_back(v);
        if (!ls.eof())
            throw IoError("malformed coefficient in filter file: " + path);
        if (!taps.empty())
            filters.push_back(std::move(taps));
    }
    if (filters.empty())
        throw IoError("filter file holds no coefficients: " + path);
    return filters;
}

// ---------------------------------------------------------------------------
// Norm diagnostic
// ---------------------------------------------------------------------------

double spectrum_norm(const WaveletSpectrum& spec) {
    double acc = 0.0;
    if (spec.band_limited()) {
        for (const Interval& iv : spec.band_support()) {
            QuadOptions opt;
            opt.abs_tol = 1e-10;
            acc += integrate([&](double w) { return spec.eval_sq(w); }, iv.lo, iv.hi,
                             opt)
                       .value;
        }
        return acc / kPi;
    }
    const SpectrumTail& t = spec.tail();
    const int P = 2 * t.inverse_power;
    double W = 64.0 * kPi;
    if (t.terms.empty()) {
        // choose the numeric range so the bound-only tail is negligible
        const double C2 = t.bound * t.bound;
        W = std::max(W, std::pow(C2 / ((P - 1) * 1e-9 * kPi), 1.0 / (P - 1)));
        W = std::min(W, 16384.0 * kPi);
    }
    QuadOptions opt;
    opt.abs_tol = 1e-10;
    opt.osc_freq = spec.family().bands * 0.5;
    opt.max_intervals = 60000;
    acc = integrate([&](double w) { return spec.eval_sq(w); }, 1e-12, W, opt).value;
    if (!t.terms.empty()) {
        for (const TrigTerm& a : t.terms) {
            for (const TrigTerm& b : t.terms) {
                const cd z = a.coeff * std::conj(b.coeff);
                const double dfreq = a.freq - b.freq;
                acc += z.real() * tail_cos_over_w2(dfreq, W) -
                       z.imag() * tail_sin_over_w2(dfreq, W);
            }
        }
    }
    return acc / kPi;
}

} // namespace dtnoise
