#include "kirchpeak/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kirchpeak/errors.hpp"
#include "kirchpeak/krylov.hpp"
#include "kirchpeak/spectral.hpp"

namespace kirchpeak {

namespace sp = spectral;

LinearizedOperator::LinearizedOperator(const Field& U, const ProblemParams& params, double c)
    : profile(U), a(params.a), b(params.b), s(params.s), p(params.p), potential(c) {
    params.validate();
    require(c > 0.0, "potential value must be positive");
    U.check_finite("linearized operator profile");
    seminorm_sq = sp::seminorm_sq(U, s);
    coefficient = a + b * seminorm_sq;
    frac_profile = sp::fractional_laplacian(U, s);
    reaction = map(U, [pp = p](double u) { return u > 0.0 ? pp * std::pow(u, pp - 1.0) : 0.0; });
}

LinearizedOperator LinearizedOperator::from_ground_state(const KirchhoffGroundState& g) {
    return LinearizedOperator(g.profile, g.params, g.potential_value);
}

LinearizedOperator LinearizedOperator::from_system(const SystemSolution& sys, std::size_t peak) {
    if (peak >= sys.peaks()) throw InputError("peak index out of range");
    LinearizedOperator op(sys.profiles[peak], sys.params, sys.peak_values[peak]);
    op.coefficient = sys.coefficient;
    return op;
}

Field apply_Lplus(const LinearizedOperator& op, const Field& phi) {
    require_same_grid(phi, op.profile, "apply_Lplus");
    Field out = op.coefficient * sp::fractional_laplacian(phi, op.s);
    out.axpy(op.potential, phi);
    out -= hadamard(op.reaction, phi);
    if (op.b != 0.0) out.axpy(2.0 * op.b * sp::inner(op.frac_profile, phi), op.frac_profile);
    return out;
}

namespace {

// Modified Gram-Schmidt, applied twice. Columns that collapse are replaced
// by fresh random fields so the block keeps its size.
void orthonormalize(std::vector<Field>& X, unsigned long& seed) {
    const GridSpec& g = X.front().grid();
    const int kmax = std::max(2, std::min(g.points / 4, 32));
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            const double before = sp::norm_l2(X[i]);
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t j = 0; j < i; ++j) X[i].axpy(-sp::inner(X[j], X[i]), X[j]);
            const double after = sp::norm_l2(X[i]);
            if (after > 1e-10 * before && after > 0.0) {
                X[i] *= 1.0 / after;
                break;
            }
            X[i] = sp::random_band_limited(g, kmax, seed++);
        }
    }
}

}  // namespace

KernelSpectrum kernel_spectrum(const LinearizedOperator& op, int n, const SpectrumOptions& opts) {
    const GridSpec& g = op.profile.grid();
    require(n >= 1 && n <= 2 * g.dim + 4, "number of eigenpairs must lie in [1, 2N+4]");
    const int block = 2 * n + 2;
    require(static_cast<std::size_t>(block) < g.size(), "grid too small for the requested block");

    auto A = [&](const Field& x) { return apply_Lplus(op, x); };
    auto precond = [&](const Field& x) { return sp::invert_shifted(x, op.coefficient, op.s, op.potential); };
    InnerProduct l2 = [](const Field& x, const Field& y) { return sp::inner(x, y); };
    MinresOptions mo;
    mo.rtol = 1e-10;
    mo.max_iter = opts.inner_iter;
    mo.throw_on_failure = false;

    unsigned long seed = opts.seed;
    const int kmax = std::max(2, std::min(g.points / 4, 32));
    std::vector<Field> X;
    for (int j = 0; j < block; ++j) X.push_back(sp::random_band_limited(g, kmax, seed++));
    orthonormalize(X, seed);

    KernelSpectrum out;
    out.threshold = opts.threshold;
    std::vector<double> theta(block), resid(block);
    std::vector<int> order(block);
    std::vector<Field> AX(block);
    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        std::vector<Field> Y(block);
        for (int j = 0; j < block; ++j) Y[j] = minres(A, X[j], l2, precond, mo).x;
        orthonormalize(Y, seed);
        std::vector<Field> AY(block);
        for (int j = 0; j < block; ++j) AY[j] = A(Y[j]);
        Eigen::MatrixXd H(block, block);
        for (int i = 0; i < block; ++i)
            for (int j = 0; j <= i; ++j) H(i, j) = H(j, i) = 0.5 * (sp::inner(Y[i], AY[j]) + sp::inner(Y[j], AY[i]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        for (int k = 0; k < block; ++k) {
            Field xk(g), axk(g);
            for (int j = 0; j < block; ++j) {
                xk.axpy(es.eigenvectors()(j, k), Y[j]);
                axk.axpy(es.eigenvectors()(j, k), AY[j]);
            }
            theta[k] = es.eigenvalues()(k);
            Field r = axk;
            r.axpy(-theta[k], xk);
            resid[k] = sp::norm_l2(r) / sp::norm_l2(xk);
            X[k] = std::move(xk);
            AX[k] = std::move(axk);
        }
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int i, int j) { return std::abs(theta[i]) < std::abs(theta[j]); });
        out.outer_iterations = outer;
        bool done = true;
        for (int k = 0; k < n; ++k) done = done && resid[order[k]] < opts.tol;
        if (done) break;
        if (outer == opts.max_outer) {
            std::vector<double> r;
            for (int k = 0; k < n; ++k) r.push_back(resid[order[k]]);
            throw NumericError("eigensolver stagnated; Ritz residuals attached", r);
        }
    }

    for (int k = 0; k < n; ++k) {
        const int i = order[k];
        const double nrm = sp::norm_l2(X[i]);
        out.pairs.push_back({theta[i], (1.0 / nrm) * X[i], resid[i]});
    }

    std::vector<Field> D;
    for (int j = 0; j < g.dim; ++j) D.push_back(sp::derivative(op.profile, j));
    Eigen::MatrixXd Gd(g.dim, g.dim);
    for (int i = 0; i < g.dim; ++i)
        for (int j = 0; j < g.dim; ++j) Gd(i, j) = sp::inner(D[i], D[j]);
    for (int j = 0; j < g.dim; ++j)
        out.translation_residuals.push_back(sp::norm_l2(apply_Lplus(op, D[j])) / sp::norm_l2(D[j]));

    double kernel_max = 0.0;
    out.next_value = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pr : out.pairs) {
        if (pr.value < -opts.threshold) ++out.negative_count;
        if (std::abs(pr.value) < opts.threshold) {
            ++out.kernel_dim;
            kernel_max = std::max(kernel_max, std::abs(pr.value));
            Eigen::VectorXd bvec(g.dim);
            for (int j = 0; j < g.dim; ++j) bvec(j) = sp::inner(D[j], pr.field);
            const double proj = bvec.dot(Gd.ldlt().solve(bvec));
            out.alignment.push_back(std::sqrt(std::max(proj, 0.0)) / sp::norm_l2(pr.field));
        } else if (std::isnan(out.next_value)) {
            out.next_value = std::abs(pr.value);
        }
    }
    out.gap_ratio = out.kernel_dim > 0 && kernel_max > 0.0 ? out.next_value / kernel_max
                                                           : std::numeric_limits<double>::infinity();
    return out;
}

nlohmann::json kernel_report(const KernelSpectrum& k) {
    nlohmann::json ev = nlohmann::json::array(), res = nlohmann::json::array();
    for (const auto& p : k.pairs) {
        ev.push_back(p.value);
        res.push_back(p.residual);
    }
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"eigenvalues", ev},
            {"ritz_residuals", res},
            {"threshold", k.threshold},
            {"kernel_dimension", k.kernel_dim},
            {"subspace_cosines", k.alignment},
            {"next_eigenvalue", num(k.next_value)},
            {"gap_ratio", num(k.gap_ratio)},
            {"negative_eigenvalues", k.negative_count},
            {"translation_residuals", k.translation_residuals},
            {"outer_iterations", k.outer_iterations}};
}

}  // namespace kirchpeak
