#include "dtnoise/report.hpp"
#include "dtnoise/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dtnoise {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v, const char* f = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

const char* method_name(Method m) {
    switch (m) {
    case Method::quadrature:
        return "quadrature";
    case Method::closed_form:
        return "closed_form";
    case Method::packet_recursion:
        return "packet_recursion";
    }
    return "?";
}

const char* kind_name(CovKind k) {
    switch (k) {
    case CovKind::primal_primal:
        return "primal_primal";
    case CovKind::dual_dual:
        return "dual_dual";
    case CovKind::primal_dual:
        return "primal_dual";
    }
    return "?";
}

// per-band linear-phase slopes satisfying the orthonormality recursion
// (s_m = s_{m-1} - 1/(2m), s_0 = 0); exact for the dyadic case
WaveletFamily meyer_with_phases(int M, double eps) {
    WaveletFamily f = WaveletFamily::meyer(M, eps);
    std::vector<double> slopes(static_cast<std::size_t>(M - 1));
    double s = 0.0;
    for (int m = 1; m < M; ++m) {
        s -= 1.0 / (2.0 * m);
        slopes[static_cast<std::size_t>(m - 1)] = s;
    }
    f.meyer_phase_slopes = std::move(slopes);
    return f;
}

WaveletFamily family_for(const PaperValue& row) {
    if (row.family == "shannon")
        return WaveletFamily::shannon(row.bands > 0 ? row.bands : 2);
    if (row.family == "meyer") {
        // transcribed decimals of 1/(M+1) can exceed the exact bound by one ulp
        double eps = row.eps;
        const double cap = 1.0 / (row.bands + 1);
        if (std::abs(eps - cap) < 1e-9)
            eps = cap;
        return WaveletFamily::meyer(row.bands, eps);
    }
    if (row.family == "haar")
        return WaveletFamily::haar();
    if (row.family == "hadamard")
        return WaveletFamily::haar_packet(3);
    if (row.family == "spline1")
        return WaveletFamily::franklin();
    if (row.family == "spline3")
        return WaveletFamily::battle_lemarie(3);
    throw UnknownTable("unknown family in transcription: " + row.family);
}

} // namespace

// ---------------------------------------------------------------------------
// transcription loading
// ---------------------------------------------------------------------------

TableId table_id_from_string(const std::string& name) {
    if (name == "asymptotic_haar")
        return TableId::asymptotic_haar;
    if (name == "dyadic_theory")
        return TableId::dyadic_theory;
    if (name == "meyer_first")
        return TableId::meyer_first;
    if (name == "meyer_last")
        return TableId::meyer_last;
    if (name == "hadamard")
        return TableId::hadamard;
    if (name == "interband")
        return TableId::interband;
    throw UnknownTable("unknown table id: " + name);
}

std::string to_string(TableId id) {
    switch (id) {
    case TableId::asymptotic_haar:
        return "asymptotic_haar";
    case TableId::dyadic_theory:
        return "dyadic_theory";
    case TableId::meyer_first:
        return "meyer_first";
    case TableId::meyer_last:
        return "meyer_last";
    case TableId::hadamard:
        return "hadamard";
    case TableId::interband:
        return "interband";
    }
    return "?";
}

std::string default_table_path() {
    if (const char* env = std::getenv("DTNOISE_TABLES"))
        return env;
#ifdef DTNOISE_TABLE_FILE
    return DTNOISE_TABLE_FILE;
#else
    return "data/paper_tables.csv";
#endif
}

std::vector<PaperValue> load_paper_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open reference tables: " + path);
    std::vector<PaperValue> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("table,", 0) == 0)
            continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cols.push_back(cell);
        if (cols.size() < 10)
            throw IoError("malformed transcription row: " + line);
        PaperValue v;
        v.table = cols[0];
        v.family = cols[1];
        v.bands = cols[2].empty() ? 0 : std::stoi(cols[2]);
        v.eps = cols[3].empty() ? 0.0 : std::stod(cols[3]);
        v.d = cols[4].empty() ? 0 : std::stoi(cols[4]);
        v.m = std::stoi(cols[5]);
        v.mprime = std::stoi(cols[6]);
        if (!cols[7].empty())
            v.lag = std::stod(cols[7]);
        v.kind = cols[8];
        v.value = std::stod(cols[9]);
        rows.push_back(std::move(v));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

void cmd_xcorr(std::ostream& out, const XcorrRequest& req) {
    req.family.validate();
    out << "family,M,eps,d,m,mprime,lag,gamma,method,abs_err\n";
    const bool closed =
        !req.method_forced ? has_closed_form(req.family, req.m, req.mprime)
                           : (req.method == Method::closed_form ||
                              req.method == Method::packet_recursion);
    WaveletSpectrum sm, sp;
    if (!closed) {
        sm = make_spectrum(req.family, req.m);
        sp = make_spectrum(req.family, req.mprime);
    }
    for (long lag = req.lag_lo; lag <= req.lag_hi; ++lag) {
        double value = 0.0, err = 0.0;
        Method used = Method::quadrature;
        if (closed) {
            value = gamma_closed(req.family, req.m, req.mprime,
                                 static_cast<double>(lag), req.d);
            err = 1e-10;
            used = (req.family.kind == FamilyKind::HaarPacket && req.m > 1)
                       ? Method::packet_recursion
                       : Method::closed_form;
        } else {
            GammaValue gv;
            if (req.m != req.mprime)
                gv = interband_gamma(sm, sp, static_cast<double>(lag), req.d);
            else if (req.mprime == 0)
                gv = gamma_scaling_quad(sm, sp, static_cast<double>(lag), req.d);
            else
                gv = gamma_mother_quad(sm, sp, static_cast<double>(lag));
            value = gv.value;
            err = gv.abs_err;
        }
        out << req.family.name() << ',' << req.family.bands << ','
            << fmt(req.family.epsilon, "%.12g") << ',' << req.d << ',' << req.m
            << ',' << req.mprime << ',' << lag << ',' << fmt(value) << ','
            << method_name(used) << ',' << fmt(err, "%.3e") << '\n';
    }
}

namespace {

// computed counterpart of one transcription row
double compute_paper_row(const PaperValue& row) {
    const WaveletFamily fam = family_for(row);
    if (row.kind == "exponent" || row.kind == "pi_coeff") {
        std::vector<double> lags, vals;
        for (double t = 8.0; t <= 64.0; t += 4.0) {
            lags.push_back(t);
            vals.push_back(gamma_hadamard(row.m, t));
        }
        const AsymptoticBound fit = decay_exponent_fit(lags, vals);
        if (row.kind == "exponent")
            return fit.exponent;
        // leading coefficient of pi gamma tau^p read off at tau = 32
        return gamma_hadamard(row.m, 32.0) * kPi *
               std::pow(32.0, std::round(fit.exponent));
    }
    const double lag = *row.lag;
    if (row.m == row.mprime) {
        if (row.family == "spline3") {
            static WaveletSpectrum s0 = make_spectrum(WaveletFamily::battle_lemarie(3), 0);
            static WaveletSpectrum s1 = make_spectrum(WaveletFamily::battle_lemarie(3), 1);
            return (row.m == 0) ? gamma_scaling_quad(s0, s0, lag, row.d).value
                                : gamma_mother_quad(s1, s1, lag).value;
        }
        return gamma_closed(fam, row.m, row.mprime, lag, row.d);
    }
    // inter-band rows
    WaveletFamily f = fam;
    if (f.kind == FamilyKind::Meyer)
        f = meyer_with_phases(f.bands, f.epsilon);
    const auto a = make_spectrum(f, row.m);
    const auto b = make_spectrum(f, row.mprime);
    return interband_gamma(a, b, lag, row.d).value;
}

} // namespace

void cmd_table(std::ostream& out, TableId id, const std::string& table_file) {
    const auto rows = load_paper_tables(table_file);
    const std::string want = to_string(id);
    out << "table,family,M,eps,d,m,mprime,lag,kind,computed,paper_value,delta\n";
    bool any = false;
    for (const PaperValue& row : rows) {
        if (row.table != want)
            continue;
        any = true;
        const double computed = compute_paper_row(row);
        out << row.table << ',' << row.family << ','
            << (row.bands ? std::to_string(row.bands) : std::string()) << ','
            << (row.eps != 0.0 ? fmt(row.eps, "%.12g") : std::string()) << ','
            << row.d << ',' << row.m << ',' << row.mprime << ','
            << (row.lag ? fmt(*row.lag, "%g") : std::string()) << ',' << row.kind
            << ',' << fmt(computed) << ',' << fmt(row.value) << ','
            << fmt(computed - row.value, "%.3e") << '\n';
    }
    if (!any)
        throw UnknownTable("no transcription rows for table " + want);
}

void cmd_cov(std::ostream& out, const CovRequest& req) {
    std::vector<long> lags;
    for (long l = req.lag_lo; l <= req.lag_hi; ++l)
        lags.push_back(l);
    const CovSequence1D seq = cov_1d(req.noise, req.family, req.j, req.m,
                                     req.mprime, lags, req.kind, req.d);
    const char* noise_name = req.noise.kind == NoiseKind::White ? "white"
                             : req.noise.kind == NoiseKind::ExponentialDecay
                                 ? "exponential"
                                 : "tabulated";
    out << "family,M,eps,d,noise,j,m,mprime,kind,lag,value\n";
    for (std::size_t i = 0; i < seq.lags.size(); ++i)
        out << req.family.name() << ',' << req.family.bands << ','
            << fmt(req.family.epsilon, "%.12g") << ',' << req.d << ','
            << noise_name << ',' << req.j << ',' << req.m << ',' << req.mprime
            << ',' << kind_name(req.kind) << ',' << seq.lags[i] << ','
            << fmt(seq.values[i]) << '\n';
}

void cmd_mc(std::ostream& out, const SimConfig& cfg, const NoiseModel& noise,
            long lag_lo, long lag_hi) {
    std::vector<long> lags;
    for (long l = lag_lo; l <= lag_hi; ++l)
        lags.push_back(l);
    const auto est = mc_run_1d(cfg, noise, lags);
    out << "# runs = " << cfg.runs << ", base_seed = " << cfg.base_seed
        << ", estimator = biased (divide by coefficient count)\n";
    out << "j,m,mprime,kind,lag,mean,stderr,theory,z\n";
    for (const MCEstimate& e : est)
        out << e.j << ',' << e.m << ',' << e.mprime << ',' << kind_name(e.kind)
            << ',' << e.lag1 << ',' << fmt(e.mean, "%.8e") << ','
            << fmt(e.std_error, "%.8e") << ',' << fmt(e.theory, "%.8e") << ','
            << fmt(e.z(), "%.4f") << '\n';
    out << "# fraction_abs_z_le_3 = " << fmt(fraction_within(est, 3.0), "%.6f")
        << '\n';
}

void write_pgm(const std::string& path, const std::vector<double>& values,
               std::size_t rows, std::size_t cols) {
    if (values.size() != rows * cols)
        throw InvalidParam("graymap dimensions do not match the value count");
    double vmax = 0.0;
    for (double v : values)
        vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0)
        vmax = 1.0;
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write graymap: " + path);
    out << "P2\n" << cols << ' ' << rows << "\n255\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = values[r * cols + c] / vmax; // in [-1, 1]
            const int g = static_cast<int>(std::lround(127.5 * (1.0 + v)));
            out << std::clamp(g, 0, 255) << (c + 1 == cols ? '\n' : ' ');
        }
    }
}

void cmd_field2d(std::ostream& out, const SimConfig& cfg, const NoiseModel& noise,
                 long lag_hi, const std::string& out_dir) {
    std::vector<long> lags;
    for (long l = 0; l <= lag_hi; ++l)
        lags.push_back(l);
    const auto est = mc_run_2d(cfg, noise, lags);
    const int M = cfg.family.bands;
    const std::size_t nl = lags.size();

    out << "m1,m2,l1,l2,gamma_theory,gamma_mc,stderr\n";
    std::vector<double> mosaic_theory(static_cast<std::size_t>(M) * nl *
                                          static_cast<std::size_t>(M) * nl,
                                      0.0);
    std::vector<double> mosaic_mc = mosaic_theory;
    for (const MCEstimate& e : est) {
        if (e.kind != CovKind::primal_dual || e.post != 0)
            continue;
        out << e.m << ',' << e.mprime << ',' << e.lag1 << ',' << e.lag2 << ','
            << fmt(e.theory, "%.8e") << ',' << fmt(e.mean, "%.8e") << ','
            << fmt(e.std_error, "%.8e") << '\n';
        const std::size_t r =
            static_cast<std::size_t>(e.m) * nl + static_cast<std::size_t>(e.lag1);
        const std::size_t c = static_cast<std::size_t>(e.mprime) * nl +
                              static_cast<std::size_t>(e.lag2);
        mosaic_theory[r * (M * nl) + c] = e.theory;
        mosaic_mc[r * (M * nl) + c] = e.mean;
    }
    if (!out_dir.empty()) {
        write_pgm(out_dir + "/field2d_theory.pgm", mosaic_theory, M * nl, M * nl);
        write_pgm(out_dir + "/field2d_mc.pgm", mosaic_mc, M * nl, M * nl);
    }
}

// ---------------------------------------------------------------------------
// acceptance suite
// ---------------------------------------------------------------------------

namespace {

struct CriterionResult {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void note_worst(CriterionResult& r, double delta, double tol,
                const std::string& label) {
    if (std::abs(delta) > tol) {
        r.pass = false;
        if (!r.detail.empty())
            r.detail += "; ";
        r.detail += label + " |delta|=" + fmt(std::abs(delta), "%.2e") + " > " +
                    fmt(tol, "%.0e");
    }
}

CriterionResult criterion_tables_dyadic(const std::vector<PaperValue>& rows) {
    CriterionResult r;
    double worst_closed = 0.0, worst_quad = 0.0;
    int n = 0;
    for (const PaperValue& row : rows) {
        if (row.table != "dyadic_theory")
            continue;
        ++n;
        const double computed = compute_paper_row(row);
        const double delta = computed - row.value;
        const double tol = (row.family == "spline3") ? 2e-4 : 5e-5;
        if (row.family == "spline3")
            worst_quad = std::max(worst_quad, std::abs(delta));
        else
            worst_closed = std::max(worst_closed, std::abs(delta));
        note_worst(r, delta, tol,
                   row.family + " g" + std::to_string(row.m) +
                       std::to_string(row.mprime) + "(" + fmt(*row.lag, "%g") + ")");
    }
    if (n != 35) {
        r.pass = false;
        r.detail += " expected 35 printed values, saw " + std::to_string(n);
    }
    if (r.detail.empty())
        r.detail = "35 values, worst closed-form |delta| " +
                   fmt(worst_closed, "%.2e") + ", spline3 " + fmt(worst_quad, "%.2e");
    return r;
}

CriterionResult criterion_tables_meyer(const std::vector<PaperValue>& rows) {
    CriterionResult r;
    double worst = 0.0;
    int n = 0;
    for (const PaperValue& row : rows) {
        if (row.table != "meyer_first" && row.table != "meyer_last")
            continue;
        ++n;
        const double delta = compute_paper_row(row) - row.value;
        worst = std::max(worst, std::abs(delta));
        note_worst(r, delta, 5e-5,
                   "M=" + std::to_string(row.bands) + " m=" + std::to_string(row.m) +
                       " l=" + fmt(*row.lag, "%g"));
    }
    if (r.detail.empty())
        r.detail = std::to_string(n) + " values, worst |delta| " + fmt(worst, "%.2e");
    return r;
}

CriterionResult criterion_hadamard(const std::vector<PaperValue>& rows) {
    CriterionResult r;
    const double c = 1.0 / std::sqrt(2.0);
    const auto fir = WaveletFamily::custom_fir({{c, c}, {c, -c}}, 3);
    double worst_paper = 0.0, worst_quad = 0.0;
    for (const PaperValue& row : rows) {
        if (row.table != "hadamard")
            continue;
        const double lag = *row.lag;
        const double rec = gamma_hadamard(row.m, lag);
        note_worst(r, rec - row.value, 5e-5,
                   "vs printed value m=" + std::to_string(row.m) + " l=" + fmt(lag, "%g"));
        worst_paper = std::max(worst_paper, std::abs(rec - row.value));
        const auto spec = make_spectrum(fir, row.m);
        const GammaValue q = gamma_mother_quad(spec, spec, lag);
        note_worst(r, rec - q.value, 1e-6,
                   "vs quadrature m=" + std::to_string(row.m) + " l=" + fmt(lag, "%g"));
        worst_quad = std::max(worst_quad, std::abs(rec - q.value));
    }
    if (r.detail.empty())
        r.detail = "worst |delta| vs printed values " + fmt(worst_paper, "%.2e") +
                   ", vs filter-product quadrature " + fmt(worst_quad, "%.2e");
    return r;
}

CriterionResult criterion_asymptotics(const std::vector<PaperValue>& rows) {
    CriterionResult r;
    const int bands[3] = {1, 3, 7};
    const double exps[3] = {3.0, 5.0, 7.0};
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const int m = bands[i];
        std::vector<double> lags, vals;
        for (double t = 8.0; t <= 64.0; t += 4.0) {
            lags.push_back(t);
            vals.push_back(gamma_hadamard(m, t));
        }
        const AsymptoticBound fit = decay_exponent_fit(lags, vals);
        if (std::abs(fit.exponent - exps[i]) > 0.3) {
            r.pass = false;
            r.detail += " m=" + std::to_string(m) +
                        " exponent=" + fmt(fit.exponent, "%.3f");
        }
        // coefficient of pi gamma ~ c / tau^p at tau = 32 from the table
        double c_paper = 0.0;
        for (const PaperValue& row : rows)
            if (row.table == "asymptotic_haar" && row.m == m &&
                row.kind == "pi_coeff")
                c_paper = row.value;
        const double c_fit =
            gamma_hadamard(m, 32.0) * kPi * std::pow(32.0, exps[i]);
        if (std::abs(c_fit / c_paper - 1.0) > 0.15) {
            r.pass = false;
            r.detail += " m=" + std::to_string(m) + " coeff ratio " +
                        fmt(c_fit / c_paper, "%.3f");
        }
        detail += (i ? "; " : "") + std::string("m=") + std::to_string(m) +
                  " exp " + fmt(fit.exponent, "%.2f") + " coeff ratio " +
                  fmt(c_fit / c_paper, "%.3f");
    }
    if (r.pass)
        r.detail = detail;
    return r;
}

CriterionResult criterion_franklin_limit() {
    CriterionResult r;
    const double target = -1.0 / (32.0 * kPi);
    const double got = std::pow(64.0, 5) * franklin_gamma_mother(64.0);
    r.pass = std::abs(got / target - 1.0) <= 0.10;
    r.detail = "tau^5 gamma(64) = " + fmt(got, "%.5e") + " vs " +
               fmt(target, "%.5e") + " (ratio " + fmt(got / target, "%.4f") + ")";
    return r;
}

CriterionResult criterion_interband(const std::vector<PaperValue>& rows) {
    CriterionResult r;
    double worst = 0.0;
    int n = 0;
    for (const PaperValue& row : rows) {
        if (row.table != "interband")
            continue;
        if (row.family != "haar" && row.family != "spline3")
            continue; // Meyer rows are not gated (phase ambiguity)
        ++n;
        const double delta = compute_paper_row(row) - row.value;
        worst = std::max(worst, std::abs(delta));
        note_worst(r, delta, 2e-4,
                   row.family + " (" + std::to_string(row.m) + "," +
                       std::to_string(row.mprime) + ") l=" + fmt(*row.lag, "%g"));
    }
    // Shannon inter-band correlations vanish identically
    const auto s2 = WaveletFamily::shannon(2);
    const auto s3 = WaveletFamily::shannon(3);
    for (long l = -3; l <= 3; ++l) {
        const double a = interband_gamma(make_spectrum(s2, 0), make_spectrum(s2, 1),
                                         static_cast<double>(l), 0)
                             .value;
        const double b = interband_gamma(make_spectrum(s3, 1), make_spectrum(s3, 2),
                                         static_cast<double>(l), 0)
                             .value;
        if (a != 0.0 || b != 0.0) {
            r.pass = false;
            r.detail += " shannon inter-band not exactly zero at l=" +
                        std::to_string(l);
        }
    }
    if (r.detail.empty())
        r.detail = std::to_string(n) + " printed haar/spline3 values, worst |delta| " +
                   fmt(worst, "%.2e") + "; shannon zeros exact" +
                   " (no spline1 values are printed)";
    return r;
}

CriterionResult criterion_properties() {
    CriterionResult r;
    auto fail = [&r](const std::string& what) {
        r.pass = false;
        if (!r.detail.empty())
            r.detail += "; ";
        r.detail += what;
    };

    // oddness (closed forms, 1e-9)
    struct OddCase {
        WaveletFamily fam;
        int m;
    };
    const std::vector<OddCase> odd_cases = {
        {WaveletFamily::shannon(2), 1},
        {WaveletFamily::meyer(2, 1.0 / 3.0), 1},
        {WaveletFamily::haar(), 1},
        {WaveletFamily::franklin(), 1},
    };
    for (const auto& c : odd_cases)
        for (double tau : {0.5, 1.0, 2.0, 3.5}) {
            const double s = gamma_closed(c.fam, c.m, c.m, tau, 0) +
                             gamma_closed(c.fam, c.m, c.m, -tau, 0);
            if (std::abs(s) > 1e-9)
                fail("oddness " + c.fam.name() + " tau=" + fmt(tau, "%g") + " " +
                     fmt(s, "%.1e"));
        }

    // scaling-band symmetry about -d-1/2 (closed forms, 1e-9)
    for (const auto& c : odd_cases)
        for (int d : {0, 1, -2})
            for (double tau : {0.3, 1.0, 2.0}) {
                const double a = gamma_closed(c.fam, 0, 0, tau, d);
                const double b = gamma_closed(c.fam, 0, 0, -tau - 2.0 * d - 1.0, d);
                const double tol = (c.fam.kind == FamilyKind::Franklin) ? 1e-6 : 1e-9;
                if (std::abs(a - b) > tol)
                    fail("scaling symmetry " + c.fam.name() + " d=" +
                         std::to_string(d) + " " + fmt(a - b, "%.1e"));
            }

    // cross-swap antisymmetry through quadrature (1e-6)
    {
        const auto had = WaveletFamily::haar_packet(2);
        const auto h1 = make_spectrum(had, 1);
        const auto h2 = make_spectrum(had, 2);
        for (double tau : {0.0, 1.0, 2.0}) {
            const double a = interband_gamma(h1, h2, tau, 0).value;
            const double b = interband_gamma(h2, h1, -tau, 0).value;
            if (std::abs(a + b) > 1e-6)
                fail("swap antisymmetry hadamard tau=" + fmt(tau, "%g") + " " +
                     fmt(a + b, "%.1e"));
        }
        const auto mey = meyer_with_phases(3, 0.25);
        const auto m1 = make_spectrum(mey, 1);
        const auto m2 = make_spectrum(mey, 2);
        for (double tau : {0.0, 1.0}) {
            const double a = interband_gamma(m1, m2, tau, 0).value;
            const double b = interband_gamma(m2, m1, -tau, 0).value;
            if (std::abs(a + b) > 1e-6)
                fail("swap antisymmetry meyer tau=" + fmt(tau, "%g") + " " +
                     fmt(a + b, "%.1e"));
        }
    }

    // |gamma| <= 1 everywhere sampled
    for (const auto& c : odd_cases)
        for (int m : {0, 1})
            for (double tau = -10.0; tau <= 10.0; tau += 0.37)
                if (std::abs(gamma_closed(c.fam, m, m, tau, 0)) > 1.0 + 1e-12)
                    fail("|gamma|>1 " + c.fam.name() + " m=" + std::to_string(m) +
                         " tau=" + fmt(tau, "%g"));

    // closed form vs quadrature on integer lags [-8, 8]
    for (const auto& c : odd_cases) {
        for (int m : {0, 1}) {
            const auto spec = make_spectrum(c.fam, m);
            const auto zero = make_spectrum(c.fam, 0);
            for (long l = -8; l <= 8; ++l) {
                const double closed =
                    gamma_closed(c.fam, m, m, static_cast<double>(l), 0);
                const GammaValue q =
                    (m == 0)
                        ? gamma_scaling_quad(spec, zero, static_cast<double>(l), 0)
                        : gamma_mother_quad(spec, spec, static_cast<double>(l));
                if (std::abs(q.value - closed) > std::max(1e-6, q.abs_err))
                    fail("oracle equality " + c.fam.name() + " m=" +
                         std::to_string(m) + " l=" + std::to_string(l) + " " +
                         fmt(q.value - closed, "%.1e"));
            }
        }
    }

    // post-transform cross-covariance identically zero; 2D separability exact
    {
        const auto fam = WaveletFamily::shannon(2);
        const auto white = NoiseModel::white(1.0);
        const std::vector<long> lags{0, 1, 2, 3};
        const auto nn =
            cov_2d(white, fam, 1, {1, 1}, {1, 1}, lags, lags, CovKind::primal_primal);
        const auto nnh =
            cov_2d(white, fam, 1, {1, 1}, {1, 1}, lags, lags, CovKind::primal_dual);
        const auto pt = post_transform_cov(nn, nnh);
        for (double v : pt.cross.values)
            if (v != 0.0)
                fail("post-transform cross covariance not identically zero");
        const auto mey = WaveletFamily::meyer(3, 0.25);
        const auto f = cov_2d(white, mey, 1, {1, 2}, {1, 2}, lags, lags,
                              CovKind::primal_dual);
        const auto g1 = cov_1d(white, mey, 1, 1, 1, lags, CovKind::primal_dual);
        const auto g2 = cov_1d(white, mey, 1, 2, 2, lags, CovKind::primal_dual);
        for (std::size_t i1 = 0; i1 < lags.size(); ++i1)
            for (std::size_t i2 = 0; i2 < lags.size(); ++i2)
                if (f.at(i1, i2) != g1.values[i1] * g2.values[i2])
                    fail("2D separability not exact");
    }

    if (r.pass)
        r.detail = "Prop-2 symmetries, bounds, oracle equality, post-transform, "
                   "separability";
    return r;
}

CriterionResult criterion_monte_carlo(int threads, std::ostream& out) {
    CriterionResult r;
    const std::vector<long> lags{0, 1, 2, 3};

    auto run_family = [&](const WaveletFamily& fam, const char* label) {
        SimConfig cfg;
        cfg.family = fam;
        cfg.levels = 3;
        cfg.length = 1L << 14;
        cfg.oversample = 16;
        cfg.runs = 100;
        cfg.base_seed = 424242;
        cfg.threads = threads;
        const auto est = mc_run_1d(cfg, NoiseModel::white(1.0), lags);
        std::vector<MCEstimate> cells;
        for (const auto& e : est)
            if (e.kind == CovKind::primal_dual && e.m == e.mprime)
                cells.push_back(e);
        const double frac = fraction_within(cells, 3.0);
        out << "    [mc] " << label << ": " << cells.size()
            << " (j,m,l) cells, fraction |z|<=3 = " << fmt(frac, "%.4f") << "\n";
        if (frac < 0.95) {
            r.pass = false;
            r.detail += std::string(" 1D ") + label + " fraction " +
                        fmt(frac, "%.3f") + " < 0.95;";
        }
        return frac;
    };
    run_family(WaveletFamily::shannon(2), "shannon");
    {
        auto mey = WaveletFamily::meyer(2, 1.0 / 3.0);
        mey.meyer_phase_slopes = std::vector<double>{-0.5};
        run_family(mey, "meyer eps=1/3");
    }

    // 2D surrogate of the full-scale experiment
    {
        SimConfig cfg;
        cfg.family = WaveletFamily::meyer(3, 0.25);
        cfg.levels = 1;
        cfg.length = 256;
        cfg.oversample = 8;
        cfg.runs = 100;
        cfg.base_seed = 515151;
        cfg.support_halfwidth = 10.0;
        cfg.threads = threads;
        cfg.post_transform = true;
        const auto est = mc_run_2d(cfg, NoiseModel::white(1.0), lags);
        std::vector<MCEstimate> cells;
        for (const auto& e : est)
            if (e.kind == CovKind::primal_dual && e.post == 0)
                cells.push_back(e);
        const double frac = fraction_within(cells, 3.0);
        out << "    [mc] meyer 3-band 2D 256^2: " << cells.size()
            << " cells, fraction |z|<=3 = " << fmt(frac, "%.4f") << "\n";
        if (frac < 0.90) {
            r.pass = false;
            r.detail += " 2D fraction " + fmt(frac, "%.3f") + " < 0.90;";
        }
    }
    if (r.pass)
        r.detail = "all fractions above the gates";
    return r;
}

CriterionResult criterion_coarse_limit() {
    CriterionResult r;
    const auto fam = WaveletFamily::meyer(2, 1.0 / 3.0);
    const auto noise = NoiseModel::exponential(1.0, 1.0);
    std::vector<long> lags;
    for (long l = -3; l <= 3; ++l)
        lags.push_back(l);
    double scale = 0.0;
    std::vector<double> limits;
    for (long l : lags) {
        limits.push_back(coarse_limit(noise, fam, 1, 1, l));
        scale = std::max(scale, std::abs(limits.back()));
    }
    double prev = std::numeric_limits<double>::infinity();
    double final_err = 0.0;
    std::string detail = "max errors:";
    for (int j : {2, 4, 6}) {
        const auto c = cov_1d(noise, fam, j, 1, 1, lags, CovKind::primal_dual);
        double worst = 0.0;
        for (std::size_t i = 0; i < lags.size(); ++i)
            worst = std::max(worst, std::abs(c.values[i] - limits[i]));
        detail += " j=" + std::to_string(j) + ": " + fmt(worst, "%.2e");
        if (worst >= prev) {
            r.pass = false;
            r.detail += " not monotone at j=" + std::to_string(j) + ";";
        }
        prev = worst;
        final_err = worst;
    }
    if (final_err / scale > 0.05) {
        r.pass = false;
        r.detail += " final relative error " + fmt(final_err / scale, "%.3f") +
                    " > 0.05";
    }
    if (r.pass)
        r.detail = detail + " (relative " + fmt(final_err / scale, "%.2e") + ")";
    return r;
}

} // namespace

int run_acceptance(std::ostream& out, const std::string& table_file, int threads) {
    const auto rows = load_paper_tables(table_file);
    int failures = 0;
    const Clock::time_point suite_start = Clock::now();

    auto report = [&](int idx, const char* name, const CriterionResult& res,
                      double secs, double budget) {
        const bool time_ok = budget <= 0.0 || secs <= budget;
        const bool pass = res.pass && time_ok;
        out << (pass ? "PASS" : "FAIL") << "  " << idx << "  " << name << "  ["
            << fmt(secs, "%.1f") << " s]";
        if (!time_ok)
            out << "  over the " << fmt(budget, "%.0f") << " s budget";
        if (!res.detail.empty())
            out << "  -- " << res.detail;
        out << "\n";
        if (!pass)
            ++failures;
    };

    auto timed = [&](int idx, const char* name, auto&& make, double budget) {
        const Clock::time_point t0 = Clock::now();
        const CriterionResult res = make();
        report(idx, name, res, seconds_since(t0), budget);
    };
    timed(1, "Table II dyadic theory (35 values)",
          [&] { return criterion_tables_dyadic(rows); }, 30.0);
    timed(2, "Tables III-IV Meyer M=3..8",
          [&] { return criterion_tables_meyer(rows); }, 60.0);
    timed(3, "Table V Walsh-Hadamard recursion vs quadrature",
          [&] { return criterion_hadamard(rows); }, 0.0);
    timed(4, "Table I asymptotic exponents and coefficients",
          [&] { return criterion_asymptotics(rows); }, 0.0);
    timed(5, "Franklin tau^5 limit at tau=64",
          [] { return criterion_franklin_limit(); }, 0.0);
    timed(6, "Table IX inter-band (haar, spline3, shannon zeros)",
          [&] { return criterion_interband(rows); }, 0.0);
    timed(7, "Property suites", [] { return criterion_properties(); }, 0.0);
    timed(8, "Monte Carlo white-noise validation",
          [&] { return criterion_monte_carlo(threads, out); }, 600.0);
    timed(9, "Coarse-resolution limit convergence",
          [] { return criterion_coarse_limit(); }, 0.0);

    out << (failures == 0 ? "PASS" : "FAIL") << "  all criteria ("
        << fmt(seconds_since(suite_start), "%.1f") << " s total, " << failures
        << " failures)\n";
    return failures;
}

} // namespace dtnoise
