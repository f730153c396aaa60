// Command-line front end: cross-correlation sequences, reproduction of the
// reference tables, covariance propagation, Monte Carlo studies, 2D
// covariance fields, and the acceptance suite.
//
// Exit codes: 0 success, 1 acceptance-suite failure, 2 usage error,
// 3 numerical failure.

#include "dtnoise/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace {

using namespace dtnoise;

struct FamilyArgs {
    std::string name = "shannon";
    int bands = 2;
    double eps = 0.0;
    int depth = 0;
    std::string filter_file;
    std::vector<double> meyer_phases;
    bool meyer_default_phases = false;
};

void add_family_options(CLI::App* cmd, FamilyArgs& fa) {
    cmd->add_option("--family", fa.name,
                    "shannon | meyer | haar | hadamard | spline1 | spline3 | custom")
        ->capture_default_str();
    cmd->add_option("--M", fa.bands, "band count M")->capture_default_str();
    cmd->add_option("--eps", fa.eps, "Meyer taper width (default 1/(M+1))");
    cmd->add_option("--depth", fa.depth, "packet depth P (hadamard/custom)");
    cmd->add_option("--filters", fa.filter_file,
                    "FIR coefficient file for the custom family");
    cmd->add_option("--meyer-phases", fa.meyer_phases,
                    "linear phase slopes for Meyer bands 1..M-1");
    cmd->add_flag("--meyer-default-phases", fa.meyer_default_phases,
                  "use the built-in linear-phase convention (slope -1/2, ...)");
}

WaveletFamily build_family(const FamilyArgs& fa) {
    WaveletFamily fam;
    if (fa.name == "shannon") {
        fam = WaveletFamily::shannon(fa.bands);
    } else if (fa.name == "meyer") {
        const double eps = fa.eps > 0.0 ? fa.eps : 1.0 / (fa.bands + 1);
        fam = WaveletFamily::meyer(fa.bands, eps);
        if (!fa.meyer_phases.empty())
            fam.meyer_phase_slopes = fa.meyer_phases;
        else if (fa.meyer_default_phases) {
            std::vector<double> slopes;
            double s = 0.0;
            for (int m = 1; m < fa.bands; ++m) {
                s -= 1.0 / (2.0 * m);
                slopes.push_back(s);
            }
            fam.meyer_phase_slopes = std::move(slopes);
        }
        if (fam.meyer_phase_slopes)
            fam.validate();
    } else if (fa.name == "haar") {
        fam = WaveletFamily::haar();
    } else if (fa.name == "hadamard") {
        int depth = fa.depth;
        if (depth == 0) {
            depth = 0;
            int b = fa.bands;
            while (b > 1) {
                b >>= 1;
                ++depth;
            }
        }
        fam = WaveletFamily::haar_packet(depth);
    } else if (fa.name == "spline1" || fa.name == "franklin") {
        fam = WaveletFamily::franklin();
    } else if (fa.name == "spline3") {
        fam = WaveletFamily::battle_lemarie(3);
    } else if (fa.name == "custom") {
        if (fa.filter_file.empty())
            throw UsageError("custom family needs --filters FILE");
        fam = WaveletFamily::custom_fir(load_filter_file(fa.filter_file),
                                        fa.depth > 0 ? fa.depth : 1);
    } else {
        throw UsageError("unknown family: " + fa.name);
    }
    return fam;
}

// "lo..hi" or a single integer
void parse_lags(const std::string& text, long& lo, long& hi) {
    const auto pos = text.find("..");
    try {
        if (pos == std::string::npos) {
            lo = hi = std::stol(text);
        } else {
            lo = std::stol(text.substr(0, pos));
            hi = std::stol(text.substr(pos + 2));
        }
    } catch (const std::exception&) {
        throw UsageError("cannot parse lag range: " + text);
    }
    if (hi < lo)
        throw UsageError("empty lag range: " + text);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("DTNOISE_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 20240915ULL;
}

std::unique_ptr<std::ofstream> open_out(const std::string& dir,
                                        const std::string& file,
                                        std::ostream*& out) {
    if (dir.empty()) {
        out = &std::cout;
        return nullptr;
    }
    std::filesystem::create_directories(dir);
    auto f = std::make_unique<std::ofstream>(dir + "/" + file);
    if (!*f)
        throw IoError("cannot write " + dir + "/" + file);
    out = f.get();
    return f;
}

NoiseModel build_noise(const std::string& kind, double sigma2, double A,
                       double alpha, const std::string& table_file) {
    if (kind == "white")
        return NoiseModel::white(sigma2);
    if (kind == "exp" || kind == "exponential")
        return NoiseModel::exponential(A, alpha);
    if (kind == "table" || kind == "tabulated") {
        if (table_file.empty())
            throw UsageError("tabulated noise needs --noise-table FILE");
        return NoiseModel::tabulated_from_csv(table_file);
    }
    throw UsageError("unknown noise kind: " + kind);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-tree wavelet noise covariance toolkit"};
    app.fallthrough();
    app.require_subcommand(1);
    // key = value configuration, one [subcommand] section per command
    app.set_config("--config", "", "configuration file (key = value, [subcommand] sections)");

    std::string out_dir;
    app.add_option("--out", out_dir, "directory for file outputs")
        ->envname("DTNOISE_OUT");
    std::string tables = default_table_path();
    app.add_option("--tables", tables, "reference table transcription file");

    // ---- xcorr ----
    auto* xc = app.add_subcommand("xcorr", "cross-correlation sequence as CSV");
    FamilyArgs xf;
    add_family_options(xc, xf);
    int x_m = 1, x_mp = 1, x_d = 0;
    std::string x_lags = "-3..3", x_method = "auto";
    xc->add_option("--m", x_m, "band index m")->capture_default_str();
    xc->add_option("--mprime", x_mp, "band index m'")->capture_default_str();
    xc->add_option("--d", x_d, "dual scaling delay d")->capture_default_str();
    xc->add_option("--lags", x_lags, "integer lag range lo..hi")
        ->capture_default_str();
    xc->add_option("--method", x_method, "auto | closed | quad | recursion")
        ->capture_default_str();

    // ---- table ----
    auto* tb = app.add_subcommand("table", "reproduce a reference table");
    std::string table_name = "dyadic_theory";
    tb->add_option("table_id", table_name,
                   "asymptotic_haar | dyadic_theory | meyer_first | meyer_last "
                   "| hadamard | interband")
        ->required();

    // ---- cov ----
    auto* cv = app.add_subcommand("cov", "noise covariance sequence as CSV");
    FamilyArgs cf;
    add_family_options(cv, cf);
    int c_m = 1, c_mp = 1, c_d = 0, c_j = 1;
    std::string c_lags = "-3..3", c_kind = "primal_dual", c_noise = "white";
    double c_sigma2 = 1.0, c_A = 1.0, c_alpha = 1.0;
    std::string c_table;
    cv->add_option("--m", c_m)->capture_default_str();
    cv->add_option("--mprime", c_mp)->capture_default_str();
    cv->add_option("--d", c_d)->capture_default_str();
    cv->add_option("--j", c_j, "resolution level")->capture_default_str();
    cv->add_option("--lags", c_lags)->capture_default_str();
    cv->add_option("--kind", c_kind, "primal_dual | primal_primal | dual_dual")
        ->capture_default_str();
    cv->add_option("--noise", c_noise, "white | exp | table")
        ->capture_default_str();
    cv->add_option("--sigma2", c_sigma2, "white noise variance")
        ->capture_default_str();
    cv->add_option("--A", c_A, "exponential amplitude")->capture_default_str();
    cv->add_option("--alpha", c_alpha, "exponential decay rate")
        ->capture_default_str();
    cv->add_option("--noise-table", c_table, "two-column tau,gamma CSV");

    // ---- mc ----
    auto* mc = app.add_subcommand("mc", "Monte Carlo study as CSV");
    FamilyArgs mf;
    add_family_options(mc, mf);
    SimConfig m_cfg;
    std::string m_lags = "0..3", m_noise = "white";
    double m_sigma2 = 1.0, m_A = 1.0, m_alpha = 1.0;
    std::string m_table;
    std::uint64_t m_seed = default_seed();
    mc->add_option("--levels", m_cfg.levels, "decomposition depth J")
        ->capture_default_str();
    mc->add_option("--length", m_cfg.length, "grid samples")->capture_default_str();
    mc->add_option("--oversample", m_cfg.oversample,
                   "grid points per unit of the j=1 argument")
        ->capture_default_str();
    mc->add_option("--runs", m_cfg.runs, "independent runs")->capture_default_str();
    mc->add_option("--seed", m_seed, "base RNG seed");
    mc->add_option("--halfwidth", m_cfg.support_halfwidth,
                   "wavelet truncation halfwidth (0 = per-family default)");
    mc->add_option("--threads", m_cfg.threads, "worker threads (0 = hardware)");
    mc->add_option("--d", m_cfg.d)->capture_default_str();
    mc->add_option("--lags", m_lags)->capture_default_str();
    mc->add_option("--noise", m_noise)->capture_default_str();
    mc->add_option("--sigma2", m_sigma2)->capture_default_str();
    mc->add_option("--A", m_A)->capture_default_str();
    mc->add_option("--alpha", m_alpha)->capture_default_str();
    mc->add_option("--noise-table", m_table);

    // ---- field2d ----
    auto* f2 = app.add_subcommand("field2d", "2D covariance field mosaics");
    FamilyArgs ff;
    add_family_options(f2, ff);
    SimConfig f_cfg;
    f_cfg.length = 256;
    f_cfg.oversample = 8;
    f_cfg.levels = 1;
    f_cfg.support_halfwidth = 10.0;
    long f_lag_hi = 3;
    std::uint64_t f_seed = default_seed();
    f2->add_option("--side", f_cfg.length, "grid side length")->capture_default_str();
    f2->add_option("--levels", f_cfg.levels)->capture_default_str();
    f2->add_option("--oversample", f_cfg.oversample)->capture_default_str();
    f2->add_option("--runs", f_cfg.runs)->capture_default_str();
    f2->add_option("--seed", f_seed);
    f2->add_option("--halfwidth", f_cfg.support_halfwidth)->capture_default_str();
    f2->add_option("--threads", f_cfg.threads);
    f2->add_option("--lag-max", f_lag_hi, "lag grid {0..lag_max}^2")
        ->capture_default_str();
    bool f_post = false;
    f2->add_flag("--post-transform", f_post, "also estimate the +-1/sqrt(2) fields");

    // ---- verify ----
    auto* vf = app.add_subcommand("verify", "run the acceptance suite");
    int v_threads = 0;
    vf->add_option("--threads", v_threads, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (xc->parsed()) {
            XcorrRequest req;
            req.family = build_family(xf);
            req.m = x_m;
            req.mprime = x_mp;
            req.d = x_d;
            parse_lags(x_lags, req.lag_lo, req.lag_hi);
            if (x_method == "closed" || x_method == "recursion") {
                req.method = Method::closed_form;
                req.method_forced = true;
            } else if (x_method == "quad") {
                req.method = Method::quadrature;
                req.method_forced = true;
            } else if (x_method != "auto") {
                throw UsageError("unknown method: " + x_method);
            }
            std::ostream* out = nullptr;
            auto hold = open_out(out_dir, "xcorr.csv", out);
            cmd_xcorr(*out, req);
        } else if (tb->parsed()) {
            std::ostream* out = nullptr;
            auto hold = open_out(out_dir, "table_" + table_name + ".csv", out);
            cmd_table(*out, table_id_from_string(table_name), tables);
        } else if (cv->parsed()) {
            CovRequest req;
            req.family = build_family(cf);
            req.noise = build_noise(c_noise, c_sigma2, c_A, c_alpha, c_table);
            req.j = c_j;
            req.d = c_d;
            req.m = c_m;
            req.mprime = c_mp;
            parse_lags(c_lags, req.lag_lo, req.lag_hi);
            if (c_kind == "primal_dual")
                req.kind = CovKind::primal_dual;
            else if (c_kind == "primal_primal")
                req.kind = CovKind::primal_primal;
            else if (c_kind == "dual_dual")
                req.kind = CovKind::dual_dual;
            else
                throw UsageError("unknown covariance kind: " + c_kind);
            std::ostream* out = nullptr;
            auto hold = open_out(out_dir, "cov.csv", out);
            cmd_cov(*out, req);
        } else if (mc->parsed()) {
            m_cfg.family = build_family(mf);
            m_cfg.base_seed = m_seed;
            long lo, hi;
            parse_lags(m_lags, lo, hi);
            const NoiseModel noise =
                build_noise(m_noise, m_sigma2, m_A, m_alpha, m_table);
            std::ostream* out = nullptr;
            auto hold = open_out(out_dir, "mc.csv", out);
            cmd_mc(*out, m_cfg, noise, lo, hi);
        } else if (f2->parsed()) {
            f_cfg.family = build_family(ff);
            f_cfg.base_seed = f_seed;
            f_cfg.post_transform = f_post;
            std::ostream* out = nullptr;
            auto hold = open_out(out_dir, "field2d.csv", out);
            cmd_field2d(*out, f_cfg, NoiseModel::white(1.0), f_lag_hi, out_dir);
        } else if (vf->parsed()) {
            const int failures = run_acceptance(std::cout, tables, v_threads);
            return failures == 0 ? 0 : 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
