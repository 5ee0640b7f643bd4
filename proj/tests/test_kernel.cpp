#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "doctest.h"
#include "kirchpeak/errors.hpp"
#include "kirchpeak/kernel.hpp"
#include "kirchpeak/krylov.hpp"
#include "kirchpeak/spectral.hpp"

using namespace kirchpeak;
namespace sp = kirchpeak::spectral;

namespace {

ProblemParams params(int dim, double s, double b) {
    ProblemParams p;
    p.dim = dim;
    p.s = s;
    p.p = 2.0;
    p.a = 1.0;
    p.b = b;
    return p;
}

LinearizedOperator ground_operator(int dim, double s, double b, double L, int M) {
    static std::map<std::tuple<int, double, double, int>, SchrodingerGroundState> cache;
    auto key = std::make_tuple(dim, s, L, M);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, solve_Q(GridSpec(dim, L, M), s, 2.0, 1e-11)).first;
    return LinearizedOperator::from_ground_state(kirchhoff_scale(it->second, params(dim, s, b), 1.0));
}

Eigen::MatrixXd dense(const LinearizedOperator& op) {
    const std::size_t n = op.profile.size();
    Eigen::MatrixXd A(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Field e(op.profile.grid());
        e.set(j, 1.0);
        Field col = apply_Lplus(op, e);
        for (std::size_t i = 0; i < n; ++i) A(i, j) = col[i];
    }
    return A;
}

}  // namespace

TEST_CASE("MINRES matches a dense solve on an indefinite system") {
    GridSpec g(1, 1.0, 64);
    const int n = 64;
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(n, n);
    Eigen::MatrixXd A = B + B.transpose();
    A.diagonal().array() += 0.5;
    Eigen::VectorXd rhs = Eigen::VectorXd::Random(n);
    auto apply = [&](const Field& x) {
        Eigen::VectorXd v = A * Eigen::Map<const Eigen::VectorXd>(x.values().data(), n);
        return Field(g, std::vector<double>(v.data(), v.data() + n));
    };
    InnerProduct dot = [](const Field& x, const Field& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    };
    Field b(g, std::vector<double>(rhs.data(), rhs.data() + n));
    MinresOptions opts;
    opts.rtol = 1e-12;
    opts.max_iter = 500;
    auto res = minres(apply, b, dot, {}, opts);
    Eigen::VectorXd exact = A.fullPivLu().solve(rhs);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(res.x[i] - exact(i)));
    CHECK(res.converged);
    CHECK(err < 1e-8 * exact.cwiseAbs().maxCoeff());

    // A diagonal SPD preconditioner must not change the answer.
    Eigen::VectorXd d = A.diagonal().cwiseAbs().array() + 1.0;
    auto pre = [&](const Field& x) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = x[i] / d(i);
        return Field(g, v);
    };
    auto pres = minres(apply, b, dot, pre, opts);
    for (int i = 0; i < n; ++i) CHECK(std::abs(pres.x[i] - exact(i)) < 1e-7 * exact.cwiseAbs().maxCoeff());

    MinresOptions tiny;
    tiny.max_iter = 3;
    CHECK_THROWS_AS(minres(apply, b, dot, {}, tiny), LinearSolverError);
    tiny.throw_on_failure = false;
    CHECK_FALSE(minres(apply, b, dot, {}, tiny).converged);
    CHECK(minres(apply, Field(g), dot).x.sup_norm() == 0.0);
}

TEST_CASE("linearized operator action") {
    auto op = ground_operator(1, 0.4, 1.0, 20.0, 512);
    const GridSpec& g = op.profile.grid();

    SUBCASE("symmetric on band-limited pairs") {
        Field f = sp::random_band_limited(g, 40, 3), h = sp::random_band_limited(g, 40, 4);
        const double l = sp::inner(apply_Lplus(op, f), h), r = sp::inner(f, apply_Lplus(op, h));
        CHECK(std::abs(l - r) < 1e-9 * std::abs(l));
    }
    SUBCASE("translation mode is annihilated") {
        Field d = sp::derivative(op.profile, 0);
        CHECK(apply_Lplus(op, d).sup_norm() < 1e-6 * d.sup_norm());
        CHECK(sp::norm_l2(apply_Lplus(op, d)) < 1e-5 * sp::norm_l2(d));
    }
    SUBCASE("the profile is not in the kernel") {
        CHECK(sp::norm_l2(apply_Lplus(op, op.profile)) > 0.1 * sp::norm_l2(op.profile));
    }
    SUBCASE("grid mismatch") {
        CHECK_THROWS_AS(apply_Lplus(op, Field(GridSpec(1, 3.0, 512))), ShapeError);
    }
}

TEST_CASE("degenerate profile reduces to the shifted multiplier") {
    GridSpec g(1, 4.0, 64);
    LinearizedOperator op(Field(g), params(1, 0.4, 0.0), 1.0);
    const double xi = 5.0 * std::numbers::pi / 4.0;
    Field f = Field::from_function(g, [&](const Point& x) { return std::cos(xi * x[0]); });
    Field expect = (std::pow(xi, 0.8) + 1.0) * f;
    Field got = apply_Lplus(op, f);
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(got[i] - expect[i]));
    CHECK(e < 1e-12 * expect.sup_norm());
}

TEST_CASE("iterative spectrum agrees with a dense eigensolve") {
    auto op = ground_operator(1, 0.4, 1.0, 8.0, 128);
    Eigen::MatrixXd A = dense(op);
    // The operator is symmetric in the rectangle-rule inner product, which is
    // a multiple of the Euclidean one on a uniform grid.
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-9 * A.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
    std::sort(ev.begin(), ev.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    auto k = kernel_spectrum(op, 4);
    REQUIRE(k.pairs.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(k.pairs[i].value - ev[i]) < 1e-8);
}

TEST_CASE("nondegeneracy of the Kirchhoff ground state") {
    SUBCASE("line") {
        auto op = ground_operator(1, 0.4, 1.0, 20.0, 512);
        auto k = kernel_spectrum(op, 6);
        CHECK(k.kernel_dim == 1);
        REQUIRE(k.alignment.size() == 1);
        CHECK(k.alignment[0] > 0.99);
        CHECK(k.next_value >= 10.0 * k.threshold);
        CHECK(k.translation_residuals[0] < 1e-5);
        CHECK(k.negative_count >= 1);
        auto j = kernel_report(k);
        CHECK(j["kernel_dimension"] == 1);
        CHECK(j["eigenvalues"].size() == 6);
    }
    SUBCASE("plane") {
        auto op = ground_operator(2, 0.75, 1.0, 10.0, 64);
        auto k = kernel_spectrum(op, 4);
        CHECK(k.kernel_dim == 2);
        for (double c : k.alignment) CHECK(c > 0.99);
        CHECK(k.next_value >= 10.0 * k.threshold);
    }
    SUBCASE("request size is bounded") {
        auto op = ground_operator(1, 0.4, 1.0, 8.0, 128);
        CHECK_THROWS_AS(kernel_spectrum(op, 7), ParameterError);
    }
}

TEST_CASE("system component operator") {
    auto q = solve_Q(GridSpec(1, 20.0, 512), 0.4, 2.0, 1e-11);
    auto pr = params(1, 0.4, 1.0);
    auto sys = solve_system(q, pr, {1.3});
    auto ks = kirchhoff_scale(q, pr, 1.3);
    auto a = LinearizedOperator::from_system(sys, 0);
    auto b = LinearizedOperator::from_ground_state(ks);
    CHECK(std::abs(a.coefficient - b.coefficient) < 1e-9 * b.coefficient);
    CHECK_THROWS_AS(LinearizedOperator::from_system(sys, 1), InputError);
}
