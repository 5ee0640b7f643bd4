#include "kirchpeak/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kirchpeak/errors.hpp"
#include "kirchpeak/spectral.hpp"

namespace kirchpeak {

namespace sp = spectral;

namespace {

double positive_power(double v, double p) { return v > 0.0 ? std::pow(v, p) : 0.0; }

Field nonlinearity(const Field& u, double p) {
    return map(u, [p](double v) { return positive_power(v, p); });
}

// Values along the positive first axis starting at the grid center.
std::vector<double> axis_samples(const Field& u) {
    const GridSpec& g = u.grid();
    const std::size_t M = static_cast<std::size_t>(g.points);
    std::size_t stride = 1;
    for (int d = 1; d < g.dim; ++d) stride *= M;
    const std::size_t c = g.center_index();
    std::vector<double> out;
    for (std::size_t i = 0; i < M / 2; ++i) out.push_back(u[c + i * stride]);
    return out;
}

double slope_fit(const std::vector<double>& lx, const std::vector<double>& ly) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void check_base(const SchrodingerGroundState& base, const ProblemParams& params) {
    params.validate();
    if (base.profile.empty()) throw InputError("ground state has no profile");
    if (base.s != params.s || base.p != params.p || base.profile.grid().dim != params.dim)
        throw ParameterError("ground state (s, p, N) does not match the problem parameters");
}

}  // namespace

Field solve_scaled_profile(const Field& guess, double coef, double mass, double s, double p,
                           const SolveOptions& opts, int* iterations, double* residual) {
    sp::check_order(s);
    require(p > 1.0, "exponent p must exceed 1");
    require(coef > 0.0 && mass > 0.0, "profile equation needs positive coefficients");
    guess.check_finite("initial guess");
    if (guess.max() <= 0.0) throw InputError("initial guess must be positive somewhere");

    const double gamma = p / (p - 1.0);
    Field u = guess;
    double res = std::numeric_limits<double>::infinity();
    double factor = 0.0;
    for (int it = 0; it <= opts.max_iter; ++it) {
        const Field up = nonlinearity(u, p);
        const Field lap = sp::fractional_laplacian(u, s);
        Field r = coef * lap;
        r.axpy(mass, u);
        r -= up;
        res = r.sup_norm();
        const double lin = coef * sp::seminorm_sq(u, s) + mass * sp::inner(u, u);
        const double nl = sp::inner(up, u);
        factor = nl > 0.0 ? lin / nl : 0.0;
        if (opts.log) opts.log(it, factor, res);
        if (!std::isfinite(res) || !std::isfinite(factor))
            throw IterationFailure("profile iteration diverged", res, it);
        if (u.sup_norm() < 1e-12 || nl <= 0.0)
            throw DegenerateFixedPoint("profile iteration collapsed to the zero field");
        if (res < opts.tol) {
            if (iterations) *iterations = it;
            if (residual) *residual = res;
            return u;
        }
        if (it == opts.max_iter) break;
        u = sp::invert_shifted(up, coef, s, mass);
        u *= std::pow(factor, gamma);
        u = sp::symmetrize(u);
    }
    throw IterationFailure("profile iteration did not reach tolerance", res, opts.max_iter);
}

SchrodingerGroundState solve_Q(const GridSpec& grid, double s, double p, double tol, const SolveOptions& opts) {
    grid.validate();
    sp::check_order(s);
    ProblemParams pp;
    pp.dim = grid.dim;
    pp.s = s;
    pp.p = p;
    pp.b = 0.0;
    pp.validation_mode = true;
    pp.validate();
    require(tol >= 1e-12 && tol <= 1e-6, "ground state tolerance must lie in [1e-12, 1e-6]");

    const double w = opts.initial_width;
    require(w > 0.0, "initial Gaussian width must be positive");
    Field guess = Field::from_function(grid, [&](const Point& x) {
        double r2 = 0.0;
        for (int d = 0; d < grid.dim; ++d) r2 += (x[d] - grid.center[d]) * (x[d] - grid.center[d]);
        return std::exp(-r2 / (w * w));
    });
    SolveOptions o = opts;
    o.tol = tol;
    SchrodingerGroundState out;
    out.s = s;
    out.p = p;
    out.profile = solve_scaled_profile(guess, 1.0, 1.0, s, p, o, &out.iterations, &out.residual);
    if (out.profile.min() <= 0.0)
        throw NumericError("ground state is not positive on the grid; enlarge the box", {out.profile.min()});
    out.seminorm_sq = sp::seminorm_sq(out.profile, s);
    const double lin = sp::seminorm_sq(out.profile, s) + sp::inner(out.profile, out.profile);
    out.final_normalization = lin / sp::inner(nonlinearity(out.profile, p), out.profile);
    return out;
}

DecayFit decay_fit(const Field& u, double r1, double r2, double expected_slope) {
    const GridSpec& g = u.grid();
    require(r1 > 0.0 && r2 > r1, "decay window must satisfy 0 < r1 < r2");
    require(r2 < 0.5 * g.half_width, "decay window must end before L/2 to stay clear of the periodic wrap");
    const auto vals = axis_samples(u);
    const double h = g.spacing();
    std::vector<double> lx, ly;
    for (std::size_t i = 1; i < vals.size(); ++i) {
        const double r = i * h;
        if (r < r1 || r > r2) continue;
        if (!(vals[i] > 0.0))
            throw DomainError("decay window contains a nonpositive value at r = " + std::to_string(r));
        lx.push_back(std::log(r));
        ly.push_back(std::log(vals[i]));
    }
    if (lx.size() < 4) throw InputError("decay window holds fewer than 4 grid samples");
    DecayFit f;
    f.samples = static_cast<int>(lx.size());
    f.slope = slope_fit(lx, ly);
    const std::size_t half = lx.size() / 2;
    f.near_slope = slope_fit({lx.begin(), lx.begin() + half}, {ly.begin(), ly.begin() + half});
    f.far_slope = slope_fit({lx.begin() + half, lx.end()}, {ly.begin() + half, ly.end()});
    // A power law keeps its local slope; super-polynomial decay steepens.
    f.faster_than_polynomial = f.far_slope < 1.5 * f.near_slope;
    f.expected = expected_slope;
    f.within_tolerance = std::isfinite(expected_slope) &&
                         std::abs(f.slope - expected_slope) <= 0.1 * std::abs(expected_slope);
    return f;
}

DecayFit decay_fit(const SchrodingerGroundState& g, double r1, double r2) {
    return decay_fit(g.profile, r1, r2, -(g.profile.grid().dim + 2.0 * g.s));
}

KirchhoffGroundState kirchhoff_scale(const SchrodingerGroundState& base, const ProblemParams& params, double c) {
    check_base(base, params);
    require(std::isfinite(c) && c > 0.0, "potential value c must be positive");
    const int N = params.dim;
    const double s = params.s, p = params.p, a = params.a, b = params.b;
    if (b > 0.0 && !(4.0 * s > N))
        throw ParameterError("b > 0 requires 4s > N for the scaling map to be monotone");

    KirchhoffGroundState out;
    out.base = std::make_shared<SchrodingerGroundState>(base);
    out.params = params;
    out.potential_value = c;
    out.alpha = std::pow(c, 1.0 / (p - 1.0));
    const double K = base.seminorm_sq;
    const double coupling = b * std::pow(c, 2.0 / (p - 1.0)) * K;
    auto f = [&](double beta) { return a * std::pow(beta, 2.0 * s) + coupling * std::pow(beta, 4.0 * s - N) - c; };

    double lo = 0.0, hi = std::pow(c / a, 1.0 / (2.0 * s));
    if (b == 0.0) {
        out.beta = hi;
    } else {
        if (!(f(hi) >= 0.0))
            throw NumericError("scaling root not bracketed", {lo, hi, f(hi)});
        for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        out.beta = 0.5 * (lo + hi);
    }

    const GridSpec& g = base.profile.grid();
    out.profile = (out.alpha * base.profile).relabel(g.rescaled(1.0 / out.beta, g.center));
    out.seminorm_sq = sp::seminorm_sq(out.profile, s);
    ProblemParams unit = params;
    out.residual = pde_residual(out.profile, unit, c, 1.0).sup;
    return out;
}

double SystemSolution::consistency_error() const {
    double S = 0.0;
    for (double v : seminorms) S += v;
    return std::abs(coefficient - params.a - params.b * S) / coefficient;
}

namespace {

double per_peak_residual(const Field& U, double A, double V, double s, double p) {
    Field r = A * sp::fractional_laplacian(U, s);
    r.axpy(V, U);
    r -= nonlinearity(U, p);
    return r.sup_norm();
}

}  // namespace

SystemSolution solve_system(const SchrodingerGroundState& base, const ProblemParams& params,
                            const std::vector<double>& peak_values) {
    if (peak_values.empty()) throw InputError("system needs at least one peak value");
    check_base(base, params);
    for (double v : peak_values) require(std::isfinite(v) && v > 0.0, "peak values must be positive");
    const int N = params.dim;
    const double s = params.s, p = params.p, a = params.a, b = params.b;
    const double K = base.seminorm_sq;

    SystemSolution out;
    out.params = params;
    out.peak_values = peak_values;

    if (b == 0.0) {
        out.coefficient = a;
    } else {
        const double gexp = (N - 2.0 * s) / (2.0 * s);
        double C = 0.0;
        for (double v : peak_values)
            C += b * K * std::pow(v, 2.0 / (p - 1.0)) * std::pow(v, (2.0 * s - N) / (2.0 * s));
        auto g = [&](double A) { return a + C * std::pow(A, gexp) - A; };
        double lo = a, hi = 2.0 * a;
        int doublings = 0;
        while (g(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > 200) throw NumericError("no root for the system coefficient in [a, a + bound]", {a, hi});
        }
        for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) > 0.0 ? lo : hi) = mid;
        }
        out.coefficient = 0.5 * (lo + hi);
    }

    const GridSpec& g = base.profile.grid();
    for (double v : peak_values) {
        const double al = std::pow(v, 1.0 / (p - 1.0));
        const double be = std::pow(v / out.coefficient, 1.0 / (2.0 * s));
        out.alpha.push_back(al);
        out.beta.push_back(be);
        Field U = (al * base.profile).relabel(g.rescaled(1.0 / be, g.center));
        out.seminorms.push_back(sp::seminorm_sq(U, s));
        out.residual = std::max(out.residual, per_peak_residual(U, out.coefficient, v, s, p));
        out.profiles.push_back(std::move(U));
    }
    return out;
}

Field radial_resample(const Field& profile, const GridSpec& target, double tail_exponent) {
    const auto vals = axis_samples(profile);
    const double h = profile.grid().spacing();
    const double rmax = (vals.size() - 1) * h;
    return Field::from_function(target, [&](const Point& x) {
        double r2 = 0.0;
        for (int d = 0; d < target.dim; ++d) r2 += (x[d] - target.center[d]) * (x[d] - target.center[d]);
        const double r = std::sqrt(r2);
        if (r >= rmax) return vals.back() * std::pow(rmax / r, tail_exponent);
        const double t = r / h;
        const std::size_t i = static_cast<std::size_t>(t);
        const double w = t - i;
        return (1.0 - w) * vals[i] + w * vals[i + 1];
    });
}

SystemSolution discretize_system(const SystemSolution& sys, const GridSpec& grid, double tol) {
    if (sys.peaks() == 0) throw InputError("empty system");
    const ProblemParams& pr = sys.params;
    if (grid.dim != pr.dim) throw ShapeError("grid dimension does not match the system");
    const double s = pr.s, p = pr.p;
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iter = 20000;

    SystemSolution out = sys;
    out.profiles.clear();
    out.seminorms.assign(sys.peaks(), 0.0);
    std::vector<Field> guess;
    for (const Field& U : sys.profiles) guess.push_back(radial_resample(U, grid, pr.dim + 2.0 * s));

    // Fixed-point map A -> a + b sum |D U_i(A)|^2 with secant acceleration.
    auto evaluate = [&](double A, std::vector<Field>& profs) {
        double S = 0.0;
        for (std::size_t i = 0; i < profs.size(); ++i) {
            profs[i] = solve_scaled_profile(profs[i], A, sys.peak_values[i], s, p, opts);
            S += sp::seminorm_sq(profs[i], s);
        }
        return pr.a + pr.b * S;
    };

    double A0 = sys.coefficient;
    double F0 = evaluate(A0, guess) - A0;
    if (pr.b > 0.0) {
        double A1 = A0 + F0;
        double F1 = evaluate(A1, guess) - A1;
        for (int it = 0; it < 100 && std::abs(F1) > 1e-14 * A1; ++it) {
            const double denom = F1 - F0;
            const double A2 = denom != 0.0 ? A1 - F1 * (A1 - A0) / denom : A1 + F1;
            A0 = A1;
            F0 = F1;
            A1 = A2;
            F1 = evaluate(A1, guess) - A1;
        }
        if (std::abs(F1) > 1e-11 * A1)
            throw IterationFailure("system coefficient did not become self-consistent on the grid", F1, 100);
        A0 = A1;
    }
    out.coefficient = A0;
    out.residual = 0.0;
    for (std::size_t i = 0; i < guess.size(); ++i) {
        const double v = sys.peak_values[i];
        out.beta[i] = std::pow(v / A0, 1.0 / (2.0 * s));
        // The periodic problem also admits the constant state; it shows up
        // when the profile is wider than the box.
        if (guess[i].min() > 0.5 * guess[i].max())
            throw DegenerateFixedPoint("profile " + std::to_string(i) +
                                       " is nearly constant on the grid; enlarge the box");
        out.seminorms[i] = sp::seminorm_sq(guess[i], s);
        out.residual = std::max(out.residual, per_peak_residual(guess[i], A0, v, s, p));
    }
    out.profiles = std::move(guess);
    return out;
}

Residual pde_residual(const Field& u, const ProblemParams& params, double V, double eps) {
    return pde_residual(u, params, Field(u.grid(), std::vector<double>(u.size(), V)), eps);
}

Residual pde_residual(const Field& u, const ProblemParams& params, const Field& V, double eps) {
    require(eps > 0.0, "epsilon must be positive");
    u.check_finite("pde_residual");
    require_same_grid(u, V, "pde_residual");
    const int N = params.dim;
    const double s = params.s;
    const double coef = std::pow(eps, 2.0 * s) * params.a +
                        std::pow(eps, 4.0 * s - N) * params.b * sp::seminorm_sq(u, s);
    Field r = coef * sp::fractional_laplacian(u, s);
    r += hadamard(V, u);
    r -= nonlinearity(u, params.p);
    Residual out;
    out.sup = r.sup_norm();
    out.l2 = sp::norm_l2(r);
    out.field = std::move(r);
    return out;
}

}  // namespace kirchpeak
