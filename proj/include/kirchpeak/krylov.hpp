#pragma once

#include <functional>
#include <vector>

#include "kirchpeak/field.hpp"

namespace kirchpeak {

using FieldMap = std::function<Field(const Field&)>;
using InnerProduct = std::function<double(const Field&, const Field&)>;

struct MinresOptions {
    double rtol = 1e-10;
    int max_iter = 2000;
    // Throw LinearSolverError instead of returning an unconverged result.
    bool throw_on_failure = true;
};

struct MinresResult {
    Field x;
    int iterations = 0;
    // Preconditioned residual norm relative to that of the right-hand side.
    double relative_residual = 0.0;
    bool converged = false;
};

// Preconditioned MINRES (Paige-Saunders) for A x = b where A is self-adjoint
// with respect to `inner` and `precond` (optional) is self-adjoint positive
// definite in the same inner product. Starts from x = 0.
MinresResult minres(const FieldMap& A, const Field& b, const InnerProduct& inner, const FieldMap& precond = {},
                    const MinresOptions& opts = {});

}  // namespace kirchpeak
