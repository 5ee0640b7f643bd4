#include "kirchpeak/reduction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "kirchpeak/errors.hpp"
#include "kirchpeak/krylov.hpp"
#include "kirchpeak/spectral.hpp"

namespace kirchpeak {

namespace sp = spectral;

namespace {

double distance(const Point& x, const Point& y, int dim) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
    return std::sqrt(s);
}

double positive_power(double u, double q) { return u > 0.0 ? std::pow(u, q) : 0.0; }

// Quantities of the second variation at a fixed ansatz.
struct Linearization {
    const ReductionSetup* setup = nullptr;
    Field U;
    Field frac_U;    // (-Delta)^s U
    Field reaction;  // p U_+^{p-1}
    double kirchhoff = 0.0;  // b eps^{4s-N}
    double coefficient = 0.0;  // eps^{2s} a + b eps^{4s-N} |D U|^2

    Linearization(const ReductionSetup& st, const Field& u) : setup(&st), U(u) {
        const ProblemParams& pr = st.params;
        frac_U = sp::fractional_laplacian(U, pr.s);
        reaction = map(U, [p = pr.p](double v) { return p * positive_power(v, p - 1.0); });
        kirchhoff = pr.b * std::pow(st.eps, 4.0 * pr.s - pr.dim);
        coefficient = std::pow(st.eps, 2.0 * pr.s) * pr.a + kirchhoff * sp::inner(frac_U, U);
    }

    Field apply(const Field& phi) const {
        Field out = coefficient * sp::fractional_laplacian(phi, setup->params.s);
        out += hadamard(setup->V, phi);
        out -= hadamard(reaction, phi);
        if (kirchhoff != 0.0) out.axpy(2.0 * kirchhoff * sp::inner(frac_U, phi), frac_U);
        return out;
    }
};

// The constraint space E = {phi : <T Z_ij, phi> = 0} with T the operator of
// the eps inner product, and the projector onto E that is orthogonal in the
// inner product of T0 = c (-Delta)^s + m.
struct Constraints {
    const ReductionSetup* setup = nullptr;
    double c = 0.0, m = 0.0;
    std::vector<Field> Z, TZ, W;
    Eigen::LDLT<Eigen::MatrixXd> gram;

    Constraints(const ReductionSetup& st, const std::vector<Field>& modes, double coefficient)
        : setup(&st), c(coefficient), m(st.mass_floor), Z(modes) {
        const double lead = std::pow(st.eps, 2.0 * st.params.s) * st.params.a;
        for (const Field& z : Z) {
            Field t = lead * sp::fractional_laplacian(z, st.params.s);
            t += hadamard(st.V, z);
            W.push_back(T0_inverse(t));
            TZ.push_back(std::move(t));
        }
        const int n = static_cast<int>(Z.size());
        Eigen::MatrixXd G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) G(i, j) = G(j, i) = 0.5 * (sp::inner(TZ[i], W[j]) + sp::inner(TZ[j], W[i]));
        gram.compute(G);
        if (gram.info() != Eigen::Success || gram.vectorD().minCoeff() <= 0.0)
            throw LinearSolverError("constraint Gram matrix is singular", 0.0);
    }

    Field T0_inverse(const Field& x) const { return sp::invert_shifted(x, c, setup->params.s, m); }
    double T0_inner(const Field& x, const Field& y) const {
        return c * sp::dot_half(x, y, setup->params.s) + m * sp::inner(x, y);
    }
    Field project(const Field& x) const {
        const int n = static_cast<int>(Z.size());
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r(i) = sp::inner(TZ[i], x);
        Eigen::VectorXd k = gram.solve(r);
        Field out = x;
        for (int i = 0; i < n; ++i) out.axpy(-k(i), W[i]);
        return out;
    }
};

void check_setup_grid(const ReductionSetup& st, const Field& phi, const char* where) {
    if (!(phi.grid() == st.grid)) throw ShapeError(std::string(where) + ": field is not on the working grid");
}

}  // namespace

void PeakConfig::validate(const Potential& V) const {
    require(eps > 0.0, "eps must be positive");
    require(delta > 0.0, "delta must be positive");
    require(theta > 0.0 && theta < 1.0, "separation exponent theta must lie in (0, 1)");
    if (y.size() != V.peaks()) throw InputError("peak configuration and potential have different peak counts");
    const int N = V.dim();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(distance(y[i], V.center(i), N) < delta)) {
            std::ostringstream msg;
            msg << "peak " << i << " lies outside the admissible ball of radius " << delta;
            throw GeometryError(msg.str());
        }
        for (std::size_t j = i + 1; j < y.size(); ++j)
            if (distance(y[i], y[j], N) < std::pow(eps, theta))
                throw GeometryError("peaks are closer than eps^theta");
    }
}

bool PeakConfig::admissible(const Potential& V) const {
    try {
        validate(V);
        return true;
    } catch (const Error&) {
        return false;
    }
}

double PeakConfig::slack(const Potential& V) const {
    double s = std::numeric_limits<double>::infinity();
    const int N = V.dim();
    for (std::size_t i = 0; i < y.size() && i < V.peaks(); ++i) {
        s = std::min(s, delta - distance(y[i], V.center(i), N));
        for (std::size_t j = i + 1; j < y.size(); ++j) s = std::min(s, distance(y[i], y[j], N) - std::pow(eps, theta));
    }
    return s;
}

ReductionSetup make_setup(const SystemSolution& sys, const Potential& V, double eps, const GridSpec& grid,
                          bool strict) {
    require(eps > 0.0, "eps must be positive");
    grid.validate();
    sys.params.validate();
    if (V.dim() != sys.params.dim || grid.dim != V.dim()) throw ShapeError("dimension mismatch in reduction setup");
    if (V.peaks() != sys.peaks()) throw InputError("system and potential have different peak counts");
    for (std::size_t i = 0; i < V.peaks(); ++i)
        if (std::abs(V.peak_value(i) - sys.peak_values[i]) > 1e-12 * V.peak_value(i))
            throw InputError("system peak values do not match the potential");
    for (std::size_t i = 0; i < V.peaks(); ++i) {
        const double R = V.support_radius(i);
        for (int j = 0; j < grid.dim; ++j) {
            const double lo = grid.center[j] - grid.half_width, hi = grid.center[j] + grid.half_width;
            if (V.center(i)[j] - R <= lo || V.center(i)[j] + R >= hi)
                throw GeometryError("a well support leaves the working box");
        }
    }

    ReductionSetup st;
    st.params = sys.params;
    st.potential = V;
    st.eps = eps;
    st.grid = grid;
    st.system = discretize_system(sys, GridSpec(grid.dim, grid.half_width / eps, grid.points), 1e-11);
    st.V = V.sample(grid);
    st.mass_floor = st.V.min();

    // Boundary nodes are those with some index equal to 0.
    for (const Field& U : st.system.profiles) {
        double edge = 0.0;
        const std::size_t M = grid.points;
        for (std::size_t flat = 0; flat < U.size(); ++flat) {
            std::size_t rest = flat;
            bool boundary = false;
            for (int d = 0; d < grid.dim; ++d) {
                boundary = boundary || rest % M == 0;
                rest /= M;
            }
            if (boundary) edge = std::max(edge, std::abs(U[flat]));
        }
        st.tail = std::max(st.tail, edge / U.max());
    }
    if (st.tail > 1e-8) {
        std::ostringstream msg;
        msg << "profile tail at the box edge is " << st.tail << " of the peak (threshold 1e-8)";
        if (strict) throw TruncationError(msg.str());
        st.warnings.push_back(msg.str());
    }
    return st;
}

double eps_inner(const Field& u, const Field& v, double eps, const ProblemParams& params, const Field& V) {
    require_same_grid(u, v, "eps_inner");
    require_same_grid(u, V, "eps_inner");
    require(eps > 0.0, "eps must be positive");
    const double lead = std::pow(eps, 2.0 * params.s) * params.a;
    return lead * sp::dot_half(u, v, params.s) + sp::integrate(hadamard(hadamard(u, v), V));
}

double eps_inner(const Field& u, const Field& v, const ReductionSetup& setup) {
    return eps_inner(u, v, setup.eps, setup.params, setup.V);
}

double eps_norm(const Field& u, const ReductionSetup& setup) {
    return std::sqrt(std::max(eps_inner(u, u, setup), 0.0));
}

Ansatz build_ansatz(const ReductionSetup& setup, const PeakConfig& cfg) {
    const int N = setup.grid.dim;
    if (cfg.y.size() != setup.system.peaks()) throw InputError("peak configuration has the wrong peak count");
    Ansatz out;
    out.sum = Field(setup.grid);
    for (std::size_t i = 0; i < cfg.y.size(); ++i) {
        Field base = setup.system.profiles[i].relabel(setup.grid);
        Point shift{0.0, 0.0, 0.0};
        for (int j = 0; j < N; ++j) shift[j] = cfg.y[i][j] - setup.grid.center[j];
        Field piece = sp::translate(base, shift);
        out.sum += piece;
        for (int j = 0; j < N; ++j) out.modes.push_back(-1.0 * sp::derivative(piece, j));
        out.pieces.push_back(std::move(piece));
    }
    return out;
}

double energy(const Field& u, const ReductionSetup& setup) {
    check_setup_grid(setup, u, "energy");
    const ProblemParams& pr = setup.params;
    const double S = sp::seminorm_sq(u, pr.s);
    const double lead = std::pow(setup.eps, 2.0 * pr.s) * pr.a;
    const double kirch = pr.b * std::pow(setup.eps, 4.0 * pr.s - pr.dim);
    const double mass = sp::integrate(hadamard(setup.V, hadamard(u, u)));
    const double pot = sp::integrate(map(u, [p = pr.p](double v) { return positive_power(v, p + 1.0); }));
    return 0.5 * (lead * S + mass) + 0.25 * kirch * S * S - pot / (pr.p + 1.0);
}

Field energy_gradient(const Field& u, const ReductionSetup& setup) {
    check_setup_grid(setup, u, "energy_gradient");
    return pde_residual(u, setup.params, setup.V, setup.eps).field;
}

double ell(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi) {
    check_setup_grid(setup, phi, "ell");
    const ProblemParams& pr = setup.params;
    const Field U = build_ansatz(setup, cfg).sum;
    const double kirch = pr.b * std::pow(setup.eps, 4.0 * pr.s - pr.dim);
    const Field Up = map(U, [p = pr.p](double v) { return positive_power(v, p); });
    return eps_inner(U, phi, setup) + kirch * sp::seminorm_sq(U, pr.s) * sp::dot_half(U, phi, pr.s) -
           sp::inner(Up, phi);
}

Field apply_Leps(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi) {
    check_setup_grid(setup, phi, "apply_Leps");
    return Linearization(setup, build_ansatz(setup, cfg).sum).apply(phi);
}

double remainder(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi) {
    check_setup_grid(setup, phi, "remainder");
    const Field U = build_ansatz(setup, cfg).sum;
    const Linearization lin(setup, U);
    return energy(U + phi, setup) - energy(U, setup) - ell(setup, cfg, phi) - 0.5 * sp::inner(lin.apply(phi), phi);
}

double reduced_energy(const ReductionSetup& setup, const PeakConfig& cfg, const Field& phi) {
    check_setup_grid(setup, phi, "reduced_energy");
    return energy(build_ansatz(setup, cfg).sum + phi, setup);
}

ReducedSolution solve_correction(const ReductionSetup& setup, const PeakConfig& cfg, const CorrectionOptions& opts,
                                 const Field* initial) {
    cfg.validate(setup.potential);
    require(std::abs(cfg.eps - setup.eps) <= 1e-14 * setup.eps, "configuration eps differs from the setup eps");
    const ProblemParams& pr = setup.params;
    const int N = pr.dim;
    const Ansatz an = build_ansatz(setup, cfg);
    const Linearization lin(setup, an.sum);
    const Constraints con(setup, an.modes, lin.coefficient);

    FieldMap op = [&](const Field& x) { return con.project(con.T0_inverse(lin.apply(con.project(x)))); };
    InnerProduct t0 = [&](const Field& x, const Field& y) { return con.T0_inner(x, y); };
    MinresOptions mo;
    mo.rtol = opts.linear_rtol;
    mo.max_iter = opts.linear_max_iter;

    ReducedSolution out;
    out.config = cfg;
    Field phi = initial ? con.project(*initial) : Field(setup.grid);
    if (initial) check_setup_grid(setup, *initial, "solve_correction");
    const double scale = std::pow(cfg.eps, 0.5 * N);
    int rising = 0;
    bool converged = false;
    for (int n = 1; n <= opts.max_iter; ++n) {
        const Field g = energy_gradient(an.sum + phi, setup);
        // The gradient carries a large multiplier part along T Z; a second
        // projection removes what roundoff leaves of it in the kernel of op.
        const Field rhs = -1.0 * con.project(con.project(con.T0_inverse(g)));
        auto lin_res = minres(op, rhs, t0, {}, mo);
        out.linear_iterations += lin_res.iterations;
        const Field step = con.project(lin_res.x);
        phi += step;
        const double sn = eps_norm(step, setup);
        out.step_norms.push_back(sn);
        out.iterations = n;
        if (n >= 2) {
            const double prev = out.step_norms[n - 2];
            const double ratio = prev > 0.0 ? sn / prev : 0.0;
            out.contraction_ratios.push_back(ratio);
            rising = ratio >= 1.0 ? rising + 1 : 0;
            if (rising >= 3)
                throw NoContraction("correction map does not contract (eps may be too large)", out.contraction_ratios);
        }
        if (!std::isfinite(sn)) throw IterationFailure("correction iteration produced non-finite values", sn, n);
        if (sn < opts.step_tol * scale) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw IterationFailure("correction iteration did not converge", out.step_norms.back(), opts.max_iter);

    out.correction = phi;
    out.solution = an.sum + phi;
    out.correction_norm = eps_norm(phi, setup);
    for (const Field& z : an.modes) {
        const double denom = eps_norm(z, setup) * out.correction_norm;
        out.orthogonality.push_back(denom > 0.0 ? std::abs(eps_inner(z, phi, setup)) / denom : 0.0);
    }

    const Field g = energy_gradient(out.solution, setup);
    out.full_residual = g.sup_norm();
    const int n = static_cast<int>(con.TZ.size());
    Eigen::MatrixXd G(n, n);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
        r(i) = sp::inner(con.TZ[i], g);
        for (int j = 0; j <= i; ++j) G(i, j) = G(j, i) = sp::inner(con.TZ[i], con.TZ[j]);
    }
    Eigen::VectorXd lambda = G.ldlt().solve(r);
    Field left = g;
    for (int i = 0; i < n; ++i) {
        out.multipliers.push_back(lambda(i));
        left.axpy(-lambda(i), con.TZ[i]);
    }
    out.projected_residual = left.sup_norm();
    out.reduced_energy = energy(out.solution, setup);
    return out;
}

CoercivityEstimate coercivity_estimate(const ReductionSetup& setup, const PeakConfig& cfg, int steps) {
    cfg.validate(setup.potential);
    const Ansatz an = build_ansatz(setup, cfg);
    const Linearization lin(setup, an.sum);
    const Constraints con(setup, an.modes, lin.coefficient);
    auto op = [&](const Field& x) { return con.project(con.T0_inverse(lin.apply(con.project(x)))); };

    const GridSpec& g = setup.grid;
    std::vector<Field> Q;
    Field q = con.project(sp::random_band_limited(g, std::max(2, g.points / 4), 17));
    q *= 1.0 / std::sqrt(con.T0_inner(q, q));
    std::vector<double> alpha, beta;
    for (int k = 0; k < steps; ++k) {
        Q.push_back(q);
        Field w = op(q);
        const double a = con.T0_inner(q, w);
        alpha.push_back(a);
        // Full reorthogonalization keeps the Ritz values clean at this size.
        for (int pass = 0; pass < 2; ++pass)
            for (const Field& v : Q) w.axpy(-con.T0_inner(v, w), v);
        w = con.project(w);
        const double b = std::sqrt(std::max(con.T0_inner(w, w), 0.0));
        if (b < 1e-12) break;
        beta.push_back(b);
        q = (1.0 / b) * w;
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    CoercivityEstimate out;
    out.steps = m;
    out.lowest = es.eigenvalues().minCoeff();
    out.smallest_magnitude = es.eigenvalues().cwiseAbs().minCoeff();
    for (int i = 0; i < m; ++i)
        if (es.eigenvalues()(i) < 0.0) ++out.negative;
    return out;
}

double ell_dual_norm(const ReductionSetup& setup, const PeakConfig& cfg) {
    cfg.validate(setup.potential);
    const Ansatz an = build_ansatz(setup, cfg);
    const Linearization lin(setup, an.sum);
    const Constraints con(setup, an.modes, lin.coefficient);
    const Field r = con.project(con.T0_inverse(energy_gradient(an.sum, setup)));
    return std::sqrt(std::max(con.T0_inner(r, r), 0.0));
}

namespace {

class SearchState {
public:
    SearchState(const ReductionSetup& st, const PeakConfig& start, const SearchOptions& o)
        : setup_(st), base_(start), opts_(o), dim_(st.grid.dim) {}

    std::vector<double> pack(const PeakConfig& c) const {
        std::vector<double> v;
        for (const Point& y : c.y)
            for (int j = 0; j < dim_; ++j) v.push_back(y[j]);
        return v;
    }
    PeakConfig unpack(const std::vector<double>& v) const {
        PeakConfig c = base_;
        for (std::size_t i = 0; i < c.y.size(); ++i)
            for (int j = 0; j < dim_; ++j) c.y[i][j] = v[i * dim_ + j];
        return c;
    }

    // Reduced energy at v, +inf outside the admissible set or where the
    // correction cannot be computed.
    double value(const std::vector<double>& v) {
        const ReducedSolution* r = solve(v);
        return r ? r->reduced_energy : std::numeric_limits<double>::infinity();
    }

    const ReducedSolution* solve(const std::vector<double>& v) {
        auto it = cache_.find(v);
        if (it != cache_.end()) return it->second ? &*it->second : nullptr;
        PeakConfig c = unpack(v);
        std::optional<ReducedSolution> r;
        if (c.admissible(setup_.potential)) {
            ++evaluations;
            try {
                r = solve_correction(setup_, c, opts_.correction);
            } catch (const NumericError& e) {
                failures.push_back(e.what());
            }
        }
        auto res = cache_.emplace(v, std::move(r)).first;
        return res->second ? &*res->second : nullptr;
    }

    int evaluations = 0;
    std::vector<std::string> failures;

private:
    const ReductionSetup& setup_;
    PeakConfig base_;
    SearchOptions opts_;
    int dim_;
    std::map<std::vector<double>, std::optional<ReducedSolution>> cache_;
};

// Admissible interval of coordinate `idx` with the others fixed.
std::pair<double, double> coordinate_range(const PeakConfig& c, const Potential& V, std::size_t peak, int axis) {
    double others = 0.0;
    for (int j = 0; j < V.dim(); ++j)
        if (j != axis) others += std::pow(c.y[peak][j] - V.center(peak)[j], 2);
    const double half = std::sqrt(std::max(c.delta * c.delta - others, 0.0)) * (1.0 - 1e-9);
    return {V.center(peak)[axis] - half, V.center(peak)[axis] + half};
}

}  // namespace

PeakSearch minimize_peaks(const ReductionSetup& setup, const PeakConfig& start, const SearchOptions& opts) {
    start.validate(setup.potential);
    const Potential& V = setup.potential;
    const int N = setup.grid.dim;
    SearchState state(setup, start, opts);
    std::vector<double> x = state.pack(start);
    const std::size_t n = x.size();
    PeakSearch out;

    // Golden-section sweeps, one coordinate at a time.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < opts.golden_sweeps; ++sweep) {
        for (std::size_t idx = 0; idx < n; ++idx) {
            auto [lo, hi] = coordinate_range(state.unpack(x), V, idx / N, static_cast<int>(idx % N));
            auto at = [&](double t) {
                std::vector<double> v = x;
                v[idx] = t;
                return state.value(v);
            };
            double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
            double fc = at(c), fd = at(d);
            while (hi - lo > opts.golden_tol * start.delta) {
                if (fc < fd) {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - phi * (hi - lo);
                    fc = at(c);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + phi * (hi - lo);
                    fd = at(d);
                }
            }
            std::vector<double> cand = x;
            cand[idx] = fc < fd ? c : d;
            if (state.value(cand) <= state.value(x)) x = cand;
        }
    }

    // Nelder-Mead polish on a small simplex around the golden-section point.
    {
        const double size = 10.0 * opts.golden_tol * start.delta;
        std::vector<std::vector<double>> S{x};
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v = x;
            v[i] += size;
            S.push_back(v);
        }
        std::vector<double> F;
        for (const auto& v : S) F.push_back(state.value(v));
        const int budget = state.evaluations + opts.simplex_evals;
        while (state.evaluations < budget) {
            std::vector<std::size_t> ord(S.size());
            for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
            std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return F[a] < F[b]; });
            std::vector<std::vector<double>> S2;
            std::vector<double> F2;
            for (std::size_t i : ord) {
                S2.push_back(S[i]);
                F2.push_back(F[i]);
            }
            S = std::move(S2);
            F = std::move(F2);
            double spread = 0.0;
            for (std::size_t i = 1; i < S.size(); ++i)
                for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(S[i][k] - S[0][k]));
            if (spread < 1e-9 * start.delta) break;
            std::vector<double> cen(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k) cen[k] += S[i][k] / n;
            auto along = [&](double t) {
                std::vector<double> v(n);
                for (std::size_t k = 0; k < n; ++k) v[k] = cen[k] + t * (S.back()[k] - cen[k]);
                return v;
            };
            auto xr = along(-1.0);
            const double fr = state.value(xr);
            if (fr < F[0]) {
                auto xe = along(-2.0);
                const double fe = state.value(xe);
                if (fe < fr) {
                    S.back() = xe;
                    F.back() = fe;
                } else {
                    S.back() = xr;
                    F.back() = fr;
                }
            } else if (fr < F[n - 1]) {
                S.back() = xr;
                F.back() = fr;
            } else {
                auto xc = along(fr < F.back() ? -0.5 : 0.5);
                const double fcn = state.value(xc);
                if (fcn < std::min(fr, F.back())) {
                    S.back() = xc;
                    F.back() = fcn;
                } else {
                    for (std::size_t i = 1; i < S.size(); ++i) {
                        for (std::size_t k = 0; k < n; ++k) S[i][k] = S[0][k] + 0.5 * (S[i][k] - S[0][k]);
                        F[i] = state.value(S[i]);
                    }
                }
            }
        }
        std::size_t best = std::min_element(F.begin(), F.end()) - F.begin();
        if (F[best] <= state.value(x)) x = S[best];
    }

    // Newton polish on the multipliers with a forward-difference Jacobian.
    {
        const double h = 1e-6 * start.delta;
        std::vector<double> cur = x;
        for (int it = 0; it < opts.polish_iter; ++it) {
            const ReducedSolution* r0 = state.solve(cur);
            if (!r0) break;
            Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(r0->multipliers.data(), n);
            Eigen::MatrixXd J(n, n);
            bool ok = true;
            for (std::size_t k = 0; k < n && ok; ++k) {
                std::vector<double> v = cur;
                v[k] += h;
                const ReducedSolution* rk = state.solve(v);
                if (!rk) {
                    ok = false;
                    break;
                }
                for (std::size_t i = 0; i < n; ++i) J(i, k) = (rk->multipliers[i] - lam(i)) / h;
            }
            if (!ok) break;
            Eigen::VectorXd dx = -J.fullPivLu().solve(lam);
            const double len = dx.cwiseAbs().maxCoeff();
            if (!std::isfinite(len)) break;
            const double cap = 10.0 * opts.golden_tol * start.delta;
            if (len > cap) dx *= cap / len;
            std::vector<double> next = cur;
            for (std::size_t k = 0; k < n; ++k) next[k] += dx(k);
            if (!state.solve(next)) break;
            cur = next;
            if (len < opts.polish_tol * std::max(1.0, start.delta)) {
                out.polished = true;
                break;
            }
        }
        // Accept the polished point when its energy is no worse than the
        // simplex result beyond the level of energy roundoff.
        const double f0 = state.value(x), f1 = state.value(cur);
        if (std::isfinite(f1) && f1 <= f0 + 1e-12 * std::abs(f0)) {
            x = cur;
        } else {
            out.polished = false;
            out.warnings.push_back("multiplier polish rejected; returning the simplex minimizer");
        }
        if (!out.polished) out.warnings.push_back("multiplier polish did not reach its tolerance");
    }

    const ReducedSolution* best = state.solve(x);
    if (!best) throw IterationFailure("no admissible configuration produced a correction", 0.0, state.evaluations);
    out.config = state.unpack(x);
    out.solution = *best;
    out.evaluations = state.evaluations;
    out.slack = out.config.slack(V);
    out.on_boundary = out.slack < 1e-3 * start.delta;
    if (out.on_boundary) out.warnings.push_back("minimizer lies on the boundary of the admissible set");
    for (const auto& f : state.failures) out.warnings.push_back("correction failed at a trial point: " + f);
    return out;
}

EnergyConstants energy_constants(const SystemSolution& sys) {
    if (sys.peaks() == 0) throw InputError("empty system");
    const ProblemParams& pr = sys.params;
    EnergyConstants out;
    double pot = 0.0, S = 0.0;
    for (std::size_t i = 0; i < sys.peaks(); ++i) {
        const Field& U = sys.profiles[i];
        pot += sp::integrate(map(U, [p = pr.p](double v) { return positive_power(v, p + 1.0); }));
        S += sp::seminorm_sq(U, pr.s);
        out.B.push_back(0.5 * sp::integrate(hadamard(U, U)));
    }
    const double lead = (0.5 - 1.0 / (pr.p + 1.0)) * pot;
    out.A = lead - 0.25 * pr.b * S * S;
    out.A_plus = lead + 0.25 * pr.b * S * S;
    return out;
}

}  // namespace kirchpeak
