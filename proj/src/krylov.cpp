#include "kirchpeak/krylov.hpp"

#include <cmath>
#include <limits>

#include "kirchpeak/errors.hpp"

namespace kirchpeak {

MinresResult minres(const FieldMap& A, const Field& b, const InnerProduct& inner, const FieldMap& precond,
                    const MinresOptions& opts) {
    auto psolve = [&](const Field& r) { return precond ? precond(r) : r; };
    MinresResult out;
    out.x = Field(b.grid());

    Field r1 = b;
    Field y = psolve(r1);
    double beta1 = inner(r1, y);
    if (beta1 < 0.0) throw LinearSolverError("preconditioner is not positive definite", beta1);
    beta1 = std::sqrt(beta1);
    if (beta1 == 0.0) {
        out.converged = true;
        return out;
    }

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    Field w(b.grid()), w2(b.grid()), w1(b.grid());
    Field r2 = r1;

    for (int itn = 1; itn <= opts.max_iter; ++itn) {
        const double scale = 1.0 / beta;
        Field v = scale * y;
        y = A(v);
        if (itn >= 2) y.axpy(-beta / oldb, r1);
        const double alfa = inner(v, y);
        y.axpy(-alfa / beta, r2);
        r1 = std::move(r2);
        r2 = y;
        y = psolve(r2);
        oldb = beta;
        beta = inner(r2, y);
        if (beta < 0.0) throw LinearSolverError("preconditioner is not positive definite", beta);
        beta = std::sqrt(beta);

        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::hypot(gbar, beta);
        gamma = std::max(gamma, std::numeric_limits<double>::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        w1 = std::move(w2);
        w2 = std::move(w);
        w = v;
        w.axpy(-oldeps, w1);
        w.axpy(-delta, w2);
        w *= 1.0 / gamma;
        out.x.axpy(phi, w);

        out.iterations = itn;
        out.relative_residual = std::abs(phibar) / beta1;
        if (out.relative_residual < opts.rtol || beta == 0.0) {
            out.converged = true;
            return out;
        }
    }
    if (opts.throw_on_failure)
        throw LinearSolverError("MINRES did not reach the requested tolerance", out.relative_residual);
    return out;
}

}  // namespace kirchpeak
