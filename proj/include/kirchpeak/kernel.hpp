#pragma once

#include <vector>

#include <json.hpp>

#include "kirchpeak/groundstate.hpp"

namespace kirchpeak {

// Linearization of (a + b|D u|^2)(-Delta)^s u + c u - u^p at a positive
// profile U:
//   L phi = (a + b|D U|^2)(-Delta)^s phi + c phi - p U^{p-1} phi
//           + 2b <(-Delta)^s U, phi> (-Delta)^s U.
struct LinearizedOperator {
    Field profile;
    double a = 0.0;
    double b = 0.0;
    double s = 0.0;
    double p = 0.0;
    double potential = 0.0;
    double seminorm_sq = 0.0;
    // Leading coefficient a + b |D U|^2, or the shared system coefficient.
    double coefficient = 0.0;
    Field frac_profile;   // (-Delta)^s U
    Field reaction;       // p U_+^{p-1}

    LinearizedOperator() = default;
    LinearizedOperator(const Field& U, const ProblemParams& params, double c);
    static LinearizedOperator from_ground_state(const KirchhoffGroundState& g);
    // Operator of one component of the limiting system, with the shared
    // coefficient A and perturbations confined to that component.
    static LinearizedOperator from_system(const SystemSolution& sys, std::size_t peak);
};

Field apply_Lplus(const LinearizedOperator& op, const Field& phi);

struct EigenPair {
    double value = 0.0;
    Field field;          // L2-normalized
    double residual = 0.0;  // |L v - value v|_2
};

struct KernelSpectrum {
    std::vector<EigenPair> pairs;   // sorted by |value|
    double threshold = 1e-4;
    int kernel_dim = 0;             // pairs with |value| < threshold
    std::vector<double> alignment;  // cosine with span{d_j U} for each kernel pair
    double next_value = 0.0;        // smallest |value| outside the kernel
    double gap_ratio = 0.0;         // next_value / largest kernel |value|
    int negative_count = 0;         // pairs below -threshold among those computed
    int outer_iterations = 0;
    std::vector<double> translation_residuals;  // |L d_j U|_2 / |d_j U|_2
};

struct SpectrumOptions {
    double threshold = 1e-4;
    double tol = 1e-6;       // Ritz residual target, absolute
    int max_outer = 200;
    int inner_iter = 400;
    unsigned long seed = 7;
};

// The n eigenpairs of smallest magnitude by block inverse subspace iteration
// (shift zero) with Rayleigh-Ritz extraction. n <= 2N + 4.
KernelSpectrum kernel_spectrum(const LinearizedOperator& op, int n, const SpectrumOptions& opts = {});

nlohmann::json kernel_report(const KernelSpectrum& k);

}  // namespace kirchpeak
