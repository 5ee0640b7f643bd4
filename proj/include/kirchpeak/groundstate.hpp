#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "kirchpeak/field.hpp"
#include "kirchpeak/params.hpp"

namespace kirchpeak {

// Per-iteration callback: (iteration, normalization factor, sup residual).
using IterationLog = std::function<void(int, double, double)>;

struct SolveOptions {
    double tol = 1e-9;
    int max_iter = 10000;
    // Width of the unit-height Gaussian initial guess.
    double initial_width = 1.0;
    IterationLog log;
};

// Positive even solution Q of (-Delta)^s Q + Q = Q^p on a periodic grid.
struct SchrodingerGroundState {
    Field profile;
    double s = 0.0;
    double p = 0.0;
    double seminorm_sq = 0.0;  // |(-Delta)^{s/2} Q|^2
    double residual = 0.0;     // sup norm of the equation residual
    int iterations = 0;
    double final_normalization = 0.0;
};

SchrodingerGroundState solve_Q(const GridSpec& grid, double s, double p, double tol = 1e-9,
                               const SolveOptions& opts = {});

// Petviashvili iteration for coef (-Delta)^s u + mass u = u_+^p starting
// from `guess`. Exposed for profile re-solves on other grids.
Field solve_scaled_profile(const Field& guess, double coef, double mass, double s, double p,
                           const SolveOptions& opts, int* iterations = nullptr, double* residual = nullptr);

struct DecayFit {
    double slope = 0.0;
    double expected = 0.0;  // NaN when no reference slope applies
    double near_slope = 0.0;
    double far_slope = 0.0;
    bool faster_than_polynomial = false;
    bool within_tolerance = false;  // |slope - expected| <= 10% |expected|
    int samples = 0;
};

// Least-squares slope of log u against log r along the positive first axis
// for r in [r1, r2], measured from the grid center.
DecayFit decay_fit(const Field& u, double r1, double r2, double expected_slope);
DecayFit decay_fit(const SchrodingerGroundState& g, double r1, double r2);

struct KirchhoffGroundState {
    double alpha = 0.0;
    double beta = 0.0;
    std::shared_ptr<const SchrodingerGroundState> base;
    ProblemParams params;
    double potential_value = 0.0;
    Field profile;               // alpha Q(beta x) on the grid scaled by 1/beta
    double seminorm_sq = 0.0;    // measured on the profile
    double residual = 0.0;       // sup residual of the c-potential equation
};

KirchhoffGroundState kirchhoff_scale(const SchrodingerGroundState& base, const ProblemParams& params, double c);

// Solution of the coupled limiting system
//   A (-Delta)^s U_i + V_i U_i = U_i^p,  A = a + b sum_i |(-Delta)^{s/2} U_i|^2.
struct SystemSolution {
    ProblemParams params;
    double coefficient = 0.0;  // A
    std::vector<double> peak_values;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<Field> profiles;
    std::vector<double> seminorms;  // measured |(-Delta)^{s/2} U_i|^2
    double residual = 0.0;          // max sup residual over the per-peak equations
    std::size_t peaks() const { return profiles.size(); }
    // |A - a - b sum seminorms| / A.
    double consistency_error() const;
};

SystemSolution solve_system(const SchrodingerGroundState& base, const ProblemParams& params,
                            const std::vector<double>& peak_values);

// Recomputes the system on one shared grid centered at the origin: every
// profile is re-solved there and A is iterated until it is self-consistent
// with the discrete seminorms.
SystemSolution discretize_system(const SystemSolution& sys, const GridSpec& grid, double tol = 1e-11);

struct Residual {
    double sup = 0.0;
    double l2 = 0.0;
    Field field;
};

// Residual of (eps^{2s} a + eps^{4s-N} b |D u|^2)(-Delta)^s u + V u - u_+^p.
Residual pde_residual(const Field& u, const ProblemParams& params, double V, double eps);
Residual pde_residual(const Field& u, const ProblemParams& params, const Field& V, double eps);

// Radial sample of `profile` (centered at its grid center) evaluated on
// `target` around `target.center`, with a power-law tail beyond the source box.
Field radial_resample(const Field& profile, const GridSpec& target, double tail_exponent);

}  // namespace kirchpeak
