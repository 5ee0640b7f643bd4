#pragma once

#include <string>

namespace kirchpeak {

// Coefficients of the Kirchhoff problem
//   (eps^{2s} a + eps^{4s-N} b |D u|^2) (-Delta)^s u + V u = u^p
// together with the admissibility rules on (N, s, p, a, b).
struct ProblemParams {
    int dim = 1;
    double s = 0.4;
    double p = 2.0;
    double a = 1.0;
    double b = 1.0;
    // Admits s = 1, the classical Laplacian, for checks against closed forms.
    bool validation_mode = false;

    void validate() const;
    // Upper end of the subcritical window, 2N/(N-2s) - 1, or +inf when 2s >= N.
    double critical_power() const;
    double kirchhoff_scale_exponent() const { return 4.0 * s - dim; }
    std::string describe() const;
};

}  // namespace kirchpeak
