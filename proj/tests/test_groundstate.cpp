#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kirchpeak/errors.hpp"
#include "kirchpeak/groundstate.hpp"
#include "kirchpeak/spectral.hpp"

using namespace kirchpeak;
namespace sp = kirchpeak::spectral;

namespace {

double sup_error(const Field& u, double (*exact)(double)) {
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) e = std::max(e, std::abs(u[i] - exact(u.grid().point(i)[0])));
    return e;
}

double sech_p3(double x) { return std::sqrt(2.0) / std::cosh(x); }
double sech_p2(double x) { return 1.5 / std::pow(std::cosh(0.5 * x), 2); }

ProblemParams params_1d() {
    ProblemParams p;
    p.dim = 1;
    p.s = 0.4;
    p.p = 2.0;
    p.a = 1.0;
    p.b = 1.0;
    return p;
}

const SchrodingerGroundState& base_1d() {
    static const SchrodingerGroundState g = solve_Q(GridSpec(1, 256.0, 8192), 0.4, 2.0, 1e-11);
    return g;
}

const SchrodingerGroundState& base_2d() {
    static const SchrodingerGroundState g = solve_Q(GridSpec(2, 32.0, 256), 0.75, 2.0, 1e-11);
    return g;
}

}  // namespace

TEST_CASE("classical solitons") {
    GridSpec g(1, 20.0, 1024);
    auto q3 = solve_Q(g, 1.0, 3.0, 1e-11);
    CHECK(sup_error(q3.profile, sech_p3) < 1e-6);
    auto q2 = solve_Q(g, 1.0, 2.0, 1e-11);
    CHECK(sup_error(q2.profile, sech_p2) < 1e-6);
    // K for sqrt(2) sech is the integral of 2 sech^2 tanh^2 = 4/3.
    CHECK(q3.seminorm_sq == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(q3.final_normalization == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fractional ground state shape and decay") {
    const auto& q = base_1d();
    CHECK(q.residual < 1e-9);
    CHECK(q.profile.min() > 0.0);
    CHECK(sp::reflect(q.profile).values() == q.profile.values());
    const std::size_t c = q.profile.grid().center_index();
    CHECK(q.profile.max() == q.profile[c]);
    for (std::size_t i = c; i + 1 < q.profile.size(); ++i) CHECK(q.profile[i + 1] <= q.profile[i]);

    auto big = solve_Q(GridSpec(1, 2048.0, 65536), 0.4, 2.0, 1e-10);
    auto fit = decay_fit(big, 20.0, 200.0);
    CHECK(fit.expected == doctest::Approx(-1.8));
    CHECK(fit.within_tolerance);
    CHECK_FALSE(fit.faster_than_polynomial);
}

TEST_CASE("ground state does not depend on the initial width") {
    GridSpec g(1, 64.0, 2048);
    SolveOptions w1, w3;
    w1.initial_width = 1.0;
    w3.initial_width = 3.0;
    auto a = solve_Q(g, 0.4, 2.0, 1e-11, w1);
    auto b = solve_Q(g, 0.4, 2.0, 1e-11, w3);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.profile.size(); ++i) diff = std::max(diff, std::abs(a.profile[i] - b.profile[i]));
    CHECK(diff < 1e-8);
}

TEST_CASE("decay fit on synthetic profiles") {
    GridSpec g(1, 64.0, 2048);
    Field power = Field::from_function(g, [](const Point& x) { return std::pow(1.0 + std::abs(x[0]), -3.0); });
    auto f = decay_fit(power, 5.0, 15.0, -3.0);
    // Least-squares slope of log (1+x)^-3 against log x on the grid nodes of
    // [5, 15], computed independently with numpy.polyfit.
    CHECK(f.slope == doctest::Approx(-2.69352165).epsilon(1e-6));
    CHECK_FALSE(f.faster_than_polynomial);
    Field gauss = Field::from_function(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    auto fg = decay_fit(gauss, 5.0, 15.0, -1.8);
    CHECK(fg.faster_than_polynomial);
    CHECK(fg.slope < -1.8 * 1.1);
    Field neg = Field::from_function(g, [](const Point& x) { return std::cos(x[0]); });
    CHECK_THROWS_AS(decay_fit(neg, 5.0, 15.0, -1.0), DomainError);
    CHECK_THROWS_AS(decay_fit(power, 5.0, 40.0, -3.0), ParameterError);
}

TEST_CASE("Kirchhoff scaling map") {
    const auto& q = base_1d();
    ProblemParams pr = params_1d();

    SUBCASE("uncoupled case is closed form") {
        pr.b = 0.0;
        auto k = kirchhoff_scale(q, pr, 1.7);
        CHECK(std::abs(k.beta - std::pow(1.7, 1.0 / 0.8)) < 1e-12);
        CHECK(std::abs(k.alpha - 1.7) < 1e-12);
        auto same = kirchhoff_scale(q, pr, 1.0);
        CHECK(same.beta == 1.0);
        CHECK(same.alpha == 1.0);
    }

    SUBCASE("coupled case matches an independent bisection") {
        auto k = kirchhoff_scale(q, pr, 1.0);
        const double K = q.seminorm_sq;
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (std::pow(mid, 0.8) + K * std::pow(mid, 0.6) < 1.0 ? lo : hi) = mid;
        }
        CHECK(std::abs(k.beta - lo) < 1e-12);
        CHECK(k.alpha == 1.0);
        CHECK(q.residual < 1e-10);
        CHECK(k.residual < 1e-8);
        const double predicted = k.alpha * k.alpha * std::pow(k.beta, 0.8 - 1.0) * K;
        CHECK(std::abs(k.seminorm_sq - predicted) / predicted < 1e-10);
    }

    SUBCASE("inadmissible parameters are rejected") {
        pr.s = 0.2;
        CHECK_THROWS_AS(kirchhoff_scale(q, pr, 1.0), ParameterError);
    }
}

TEST_CASE("limiting system") {
    const auto& q = base_1d();
    ProblemParams pr = params_1d();

    SUBCASE("single peak agrees with the scaling map") {
        auto sys = solve_system(q, pr, {1.3});
        auto k = kirchhoff_scale(q, pr, 1.3);
        CHECK(std::abs(sys.alpha[0] - k.alpha) < 1e-10);
        CHECK(std::abs(sys.beta[0] - k.beta) < 1e-10);
        CHECK(sys.consistency_error() < 1e-10);
    }
    SUBCASE("uncoupled system") {
        pr.b = 0.0;
        auto sys = solve_system(q, pr, {1.0, 2.0});
        CHECK(sys.coefficient == pr.a);
    }
    SUBCASE("three peaks") {
        auto sys = solve_system(q, pr, {1.0, 1.5, 2.0});
        CHECK(sys.coefficient > pr.a);
        CHECK(sys.consistency_error() < 1e-8);
        CHECK(sys.residual < 1e-8);
    }
    SUBCASE("two peaks in the plane") {
        ProblemParams p2 = pr;
        p2.dim = 2;
        p2.s = 0.75;
        auto sys = solve_system(base_2d(), p2, {1.0, 2.0});
        CHECK(sys.consistency_error() < 1e-8);
        CHECK(sys.residual < 1e-8);
    }
    SUBCASE("empty input") { CHECK_THROWS_AS(solve_system(q, pr, {}), InputError); }
}

TEST_CASE("system re-solved on a shared grid stays self-consistent") {
    const auto& q = base_1d();
    ProblemParams pr = params_1d();
    auto sys = solve_system(q, pr, {1.0, 1.4});
    // beta is about 0.02 here, so the scaled profiles are roughly 60 wide and
    // their polynomial tails need a box far larger than that.
    auto disc = discretize_system(sys, GridSpec(1, 3200.0, 4096), 1e-11);
    CHECK(disc.consistency_error() < 1e-10);
    CHECK(disc.residual < 1e-9);
    // The remaining gap is tail mass outside the box.
    CHECK(std::abs(disc.coefficient - sys.coefficient) / sys.coefficient < 1e-2);

    // A box narrower than the profiles only supports the constant state.
    CHECK_THROWS_AS(discretize_system(sys, GridSpec(1, 25.0, 1024), 1e-11), DegenerateFixedPoint);
}

TEST_CASE("equation residual") {
    ProblemParams pr = params_1d();
    GridSpec g(1, 5.0, 64);
    CHECK(pde_residual(Field(g), pr, 1.3, 0.1).sup == 0.0);
    // u = A cos(xi x): |D u|^2 = A^2 xi^{2s} L, so the residual is known.
    const double A = 0.7, xi = 3.0 * std::numbers::pi / 5.0, eps = 0.5, V = 1.2;
    Field u = Field::from_function(g, [&](const Point& x) { return A * std::cos(xi * x[0]); });
    const double semi = A * A * std::pow(xi, 2 * pr.s) * 5.0;
    const double coef = std::pow(eps, 2 * pr.s) * pr.a + std::pow(eps, 4 * pr.s - 1) * pr.b * semi;
    auto r = pde_residual(u, pr, V, eps);
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double c = A * std::cos(xi * g.point(i)[0]);
        const double expect = coef * std::pow(xi, 2 * pr.s) * c + V * c - (c > 0 ? c * c : 0.0);
        e = std::max(e, std::abs(r.field[i] - expect));
    }
    CHECK(e < 1e-12);
}

TEST_CASE("parameter validation") {
    ProblemParams pr = params_1d();
    CHECK_NOTHROW(pr.validate());
    pr.p = 1.0;
    CHECK_THROWS_WITH_AS(pr.validate(), doctest::Contains("subcritical window"), ParameterError);
    pr = params_1d();
    pr.p = 9.5;  // 2N/(N-2s) - 1 = 9
    CHECK_THROWS_AS(pr.validate(), ParameterError);
    pr = params_1d();
    pr.s = 1.0;
    CHECK_THROWS_AS(pr.validate(), ParameterError);
    pr.validation_mode = true;
    CHECK_NOTHROW(pr.validate());
    pr = params_1d();
    pr.s = 0.6;  // 2s > N
    CHECK_THROWS_AS(pr.validate(), ParameterError);
    pr.b = 0.0;
    CHECK_NOTHROW(pr.validate());
    CHECK_THROWS_AS(solve_Q(GridSpec(1, 10.0, 64), 0.4, 2.0, 1e-3), ParameterError);
}
