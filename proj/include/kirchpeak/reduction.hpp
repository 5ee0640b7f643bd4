#pragma once

#include <string>
#include <vector>

#include "kirchpeak/groundstate.hpp"
#include "kirchpeak/potential.hpp"

namespace kirchpeak {

// Admissible peak configuration: |y_i - a_i| < delta and
// |y_i - y_j| >= eps^theta for i != j.
struct PeakConfig {
    double eps = 0.1;
    std::vector<Point> y;
    double delta = 0.5;
    double theta = 0.9;

    // Throws ParameterError (bad eps/delta/theta) or GeometryError (outside
    // the admissible set).
    void validate(const Potential& V) const;
    bool admissible(const Potential& V) const;
    // Smallest remaining margin to the box and separation constraints.
    double slack(const Potential& V) const;
};

// Everything that depends on eps but not on the peak positions: the working
// grid in x, the limiting-system profiles re-solved on the matching stretched
// grid z = (x - center)/eps, and the sampled potential.
struct ReductionSetup {
    ProblemParams params;
    Potential potential;
    double eps = 0.0;
    GridSpec grid;          // x grid
    SystemSolution system;  // profiles on the z grid (same lattice as `grid`)
    Field V;                // potential sampled on `grid`
    double mass_floor = 0.0;  // min of V over the grid
    double tail = 0.0;        // largest profile value on the z-box boundary, relative to the peak
    std::vector<std::string> warnings;
};

// `sys` is the continuum system for the potential's peak values. The working
// grid must contain every well support. A profile tail above 1e-8 is recorded
// as a warning, or raised as TruncationError when `strict` is set.
ReductionSetup make_setup(const SystemSolution& sys, const Potential& V, double eps, const GridSpec& grid,
                          bool strict = false);

// <u, v>_eps = eps^{2s} a int D u D v + int V u v.
double eps_inner(const Field& u, const Field& v, double eps, const ProblemParams& params, const Field& V);
double eps_inner(const Field& u, const Field& v, const ReductionSetup& setup);
double eps_norm(const Field& u, const ReductionSetup& setup);

struct Ansatz {
    Field sum;                     // sum_i U_i((x - y_i)/eps)
    std::vector<Field> pieces;     // the individual translated profiles
    std::vector<Field> modes;      // d/dy_ij of the sum, ordered (i, j) row-major
};

// Superposition of the system profiles placed at cfg.y by spectral phase shift.
Ansatz build_ansatz(const ReductionSetup& setup, const PeakConfig& cfg);

// Energy I_eps(u) = 1/2 |u|_eps^2 + b eps^{4s-N}/4 (int |D u|^2)^2 - 1/(p+1) int u_+^{p+1}.
double energy(const Field& u, const ReductionSetup& setup);
// L2 gradient of I_eps: the equation residual.
Field energy_gradient(const Field& u, const ReductionSetup& setup);

// First variation of I_eps at the ansatz in direction phi.
double ell(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi);
// L2 representative of the second variation at the ansatz:
// <apply_Leps(phi), psi> = I_eps''(U)[phi, psi].
Field apply_Leps(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi);
// I(U + phi) - I(U) - ell(phi) - 1/2 <L phi, phi>.
double remainder(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi);

struct CorrectionOptions {
    double step_tol = 1e-10;   // stop when |phi_{n+1} - phi_n|_eps < step_tol eps^{N/2}
    double linear_rtol = 1e-10;
    int max_iter = 60;
    int linear_max_iter = 3000;
};

struct ReducedSolution {
    PeakConfig config;
    Field correction;
    Field solution;                 // ansatz + correction
    double correction_norm = 0.0;   // |phi|_eps
    int iterations = 0;
    std::vector<double> step_norms;
    std::vector<double> contraction_ratios;  // step_n / step_{n-1}, n >= 2
    std::vector<double> orthogonality;       // |<Z_ij, phi>_eps| / (|Z_ij|_eps |phi|_eps)
    std::vector<double> multipliers;         // gradient = sum lambda_ij T Z_ij
    double reduced_energy = 0.0;
    double full_residual = 0.0;       // sup of the equation residual at the solution
    double projected_residual = 0.0;  // sup after removing the multiplier part
    int linear_iterations = 0;
};

// Chord iteration for the correction in the constraint space, started from
// `initial` (projected onto the constraint space) or from zero.
ReducedSolution solve_correction(const ReductionSetup& setup, const PeakConfig& cfg,
                                 const CorrectionOptions& opts = {}, const Field* initial = nullptr);

double reduced_energy(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi);

// Lanczos estimate of the spectrum of the second variation restricted to the
// constraint space, measured against <(c(-Delta)^s + m) ., .>. The form is
// indefinite (the ansatz direction itself lies in the constraint space), so
// the bound |L phi| >= rho |phi| is the smallest eigenvalue magnitude.
struct CoercivityEstimate {
    double smallest_magnitude = 0.0;
    double lowest = 0.0;
    int negative = 0;
    int steps = 0;
};
CoercivityEstimate coercivity_estimate(const ReductionSetup& setup, const PeakConfig& cfg, int steps = 80);

// sup over phi in the constraint space of |ell(phi)| / |phi|, in the metric
// used by the correction solver.
double ell_dual_norm(const ReductionSetup& setup, const PeakConfig& cfg);

struct SearchOptions {
    CorrectionOptions correction;
    double golden_tol = 1e-3;  // relative to delta
    int golden_sweeps = 1;
    int simplex_evals = 40;
    int polish_iter = 12;
    double polish_tol = 1e-11;  // relative multiplier size
};

struct PeakSearch {
    PeakConfig config;
    ReducedSolution solution;
    int evaluations = 0;
    double slack = 0.0;
    bool on_boundary = false;
    bool polished = false;
    std::vector<std::string> warnings;
};

// Minimizes y -> reduced_energy over the admissible set: golden-section
// sweeps per coordinate, a Nelder-Mead simplex, then a root polish of the
// multipliers (which vanish exactly at critical points of the reduced energy).
PeakSearch minimize_peaks(const ReductionSetup& setup, const PeakConfig& start, const SearchOptions& opts = {});

struct EnergyConstants {
    double A = 0.0;          // (1/2 - 1/(p+1)) sum int U_i^{p+1} - b/4 (sum S_i)^2
    double A_plus = 0.0;     // same with +b/4; kept for comparison only
    std::vector<double> B;   // 1/2 int U_i^2
};

EnergyConstants energy_constants(const SystemSolution& sys);

}  // namespace kirchpeak
