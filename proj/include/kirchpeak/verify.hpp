#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchpeak/groundstate.hpp"
#include "kirchpeak/potential.hpp"
#include "kirchpeak/reduction.hpp"

namespace kirchpeak {

// Outcome of one checker. `passed` is empty for diagnostics that are reported
// but not gated.
struct CheckReport {
    struct Row {
        double eps = 0.0;
        double measured = 0.0;
        double expected = 0.0;
        std::optional<bool> passed;
    };

    std::string name;
    std::string digest;  // hash of the inputs
    nlohmann::json measured = nlohmann::json::object();
    nlohmann::json expected = nlohmann::json::object();
    std::string basis;  // how the expected values were obtained
    double tolerance = 0.0;
    std::optional<bool> passed;
    std::vector<std::string> notes;
    std::vector<Row> rows;  // per-eps series for the aggregate CSV

    nlohmann::json to_json() const;
};

// Appends reports as JSON lines; safe to share between threads.
class ReportLog {
public:
    explicit ReportLog(std::string path);
    void append(const CheckReport& r);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::mutex mutex_;
};

// Columns: check, eps, measured, expected, pass.
void write_check_csv(const std::vector<CheckReport>& reports, const std::string& path);

// FNV-1a hash of the compact JSON dump, as 16 hex digits.
std::string input_digest(const nlohmann::json& inputs);

// Local Pohozaev identity on the ball B(center, radius) along `axis`:
//   int_B d_j V u^2 = c int_dB (G nu_j - 2 d_nu u d_j u) + int_dB V u^2 nu_j
//                     - 2/(p+1) int_dB u^{p+1} nu_j,
// with c = eps^{2s} a + b eps^{4s-N} |D u|^2. G is |grad u|^2 when s = 1 and
// |(-Delta)^{s/2} u|^2 otherwise. Gated on |residual| / eps^N < tol only
// for s = 1; fractional orders are reported as diagnostics.
CheckReport pohozaev_residual(const Field& u, double eps, const ProblemParams& params, const Potential& V,
                              const Point& center, double radius, int axis, double tol = 1e-3);

// The user radius plus eight radii spread over [radius/2, radius]; reports the
// best one.
CheckReport pohozaev_scan(const Field& u, double eps, const ProblemParams& params, const Potential& V,
                          const Point& center, double radius, int axis, double tol = 1e-3);

// |phi|_{L^q} / (eps^{N/q - N/2} |phi|_eps).
double sobolev_ratio(const Field& phi, double eps, double q, const ProblemParams& params, const Field& V);

// Seeded bumps phi(x) = psi((x - center)/eps) with a fixed random profile
// psi per sample. Passes when all ratios lie within a factor 10 and no
// sample varies by more than 2x over the eps list.
CheckReport sobolev_scaling_check(const GridSpec& grid, const std::vector<double>& eps_list, double q, int samples,
                                  unsigned long seed, const ProblemParams& params, const Potential& V);
Field sobolev_sample(const GridSpec& grid, double eps, unsigned long seed);

// (1+|y-xi|)^-alpha (1+|y-xj|)^-beta
//   <= C |xi-xj|^-sigma ((1+|y-xi|)^-(alpha+beta-sigma) + (1+|y-xj|)^-(alpha+beta-sigma)).
// C is estimated on one sample (then refined by local ascent) for the given
// pair and for the same pair with the separation doubled up to 20 times; the
// largest value is validated on an independent sample.
CheckReport interaction_inequality_check(const Point& xi, const Point& xj, int dim, double alpha, double beta,
                                         double sigma, int samples, unsigned long seed);
double interaction_ratio(const Point& y, const Point& xi, const Point& xj, int dim, double alpha, double beta,
                         double sigma);
int interaction_violations(const Point& xi, const Point& xj, int dim, double alpha, double beta, double sigma,
                           double C, int samples, unsigned long seed);

// <equation residual of sum_i pieces_i, pieces_j> / eps^N.
double projected_residual(const std::vector<Field>& pieces, std::size_t j, const ProblemParams& params,
                          const Field& V, double eps);

// Compares the ansatz built from per-peak single-equation profiles with the
// one built from the coupled system, peaks placed at the well centers. The
// naive projection must extrapolate to b K_1 |D u_1|^2 within `tol`
// (K_1 = sum_{i != 1} |D u_i|^2) and the system projection to under 5% of it.
CheckReport wrong_ansatz_gap(const SchrodingerGroundState& base, const ProblemParams& params, const Potential& V,
                             const std::vector<double>& eps_list, const GridSpec& grid, double tol = 0.2);

struct SweepPoint {
    double eps = 0.0;
    double correction_norm = 0.0;
    double displacement = 0.0;  // max_i |y_i - a_i|
};

// Log-log fit of the correction norm against eps and the displacement ratio
// |y - a|/eps. Passes when the exponent is at least N/2 + 0.8 m and the ratio
// strictly decreases as eps decreases.
CheckReport asymptotics_fit(const std::vector<SweepPoint>& series, const ProblemParams& params, double flatness);

struct ProbeStart {
    PeakConfig config;
    std::optional<Field> correction;  // initial guess for the final correction solve
};

struct ProbeResult {
    CheckReport report;
    std::vector<Field> solutions;
};

// Minimizes locally from every start (simplex and multiplier polish, no
// interval sweeps) and compares the full solutions pairwise in sup norm.
// Starts outside the admissible set are rejected before solving.
ProbeResult uniqueness_probe(const ReductionSetup& setup, const std::vector<ProbeStart>& starts,
                             const SearchOptions& opts = {}, double tol = 1e-6);

}  // namespace kirchpeak
