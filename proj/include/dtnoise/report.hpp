#pragma once

// Table reproduction, CSV/graymap emission, and the acceptance harness.
// Reference values are loaded from a bundled transcription file and are
// never recomputed.

#include "dtnoise/simulate.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dtnoise {

enum class TableId {
    asymptotic_haar,
    dyadic_theory,
    meyer_first,
    meyer_last,
    hadamard,
    interband,
};

TableId table_id_from_string(const std::string& name); // throws UnknownTable
std::string to_string(TableId id);

struct PaperValue {
    std::string table;
    std::string family;
    int bands = 0;           // 0 when not printed
    double eps = 0.0;
    int d = 0;
    int m = 0, mprime = 0;
    std::optional<double> lag;
    std::string kind; // gamma | exponent | pi_coeff
    double value = 0.0;
};

// Path of the bundled transcription; overridable through DTNOISE_TABLES.
std::string default_table_path();
std::vector<PaperValue> load_paper_tables(const std::string& path);

// ---------------------------------------------------------------------------
// command implementations shared by the CLI
// ---------------------------------------------------------------------------

struct XcorrRequest {
    WaveletFamily family;
    int d = 0;
    int m = 0, mprime = 0;
    long lag_lo = -3, lag_hi = 3;
    Method method = Method::closed_form;
    bool method_forced = false; // false: closed form when available
};

// header: family,M,eps,d,m,mprime,lag,gamma,method,abs_err
void cmd_xcorr(std::ostream& out, const XcorrRequest& req);

// header: table,family,M,eps,d,m,mprime,lag,kind,computed,paper_value,delta
void cmd_table(std::ostream& out, TableId id, const std::string& table_file);

struct CovRequest {
    WaveletFamily family;
    NoiseModel noise;
    int j = 1;
    int d = 0;
    int m = 0, mprime = 0;
    CovKind kind = CovKind::primal_dual;
    long lag_lo = -3, lag_hi = 3;
};

// header: family,M,eps,d,noise,j,m,mprime,kind,lag,value
void cmd_cov(std::ostream& out, const CovRequest& req);

// header: j,m,mprime,kind,lag,mean,stderr,theory,z  (+ summary comment)
void cmd_mc(std::ostream& out, const SimConfig& cfg, const NoiseModel& noise,
            long lag_lo, long lag_hi);

// CSV: m1,m2,l1,l2,gamma_theory,gamma_mc,stderr; plus two P2 graymap
// mosaics (theory / estimate) written under out_dir.
void cmd_field2d(std::ostream& out, const SimConfig& cfg, const NoiseModel& noise,
                 long lag_hi, const std::string& out_dir);

// P2 text graymap with a symmetric diverging scale around zero.
void write_pgm(const std::string& path, const std::vector<double>& values,
               std::size_t rows, std::size_t cols);

// Full acceptance suite. Prints one PASS/FAIL line per criterion and
// returns the number of failures.
int run_acceptance(std::ostream& out, const std::string& table_file,
                   int threads = 0);

} // namespace dtnoise
