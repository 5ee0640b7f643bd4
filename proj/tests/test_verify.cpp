#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "doctest.h"
#include "kirchpeak/errors.hpp"
#include "kirchpeak/verify.hpp"

using namespace kirchpeak;
using nlohmann::json;

namespace {

ProblemParams params(double s, double b, bool validation = false) {
    ProblemParams p;
    p.dim = 1;
    p.s = s;
    p.p = 2.0;
    p.a = 1.0;
    p.b = b;
    p.validation_mode = validation;
    return p;
}

// Solves -u'' + u = u^2 exactly.
Field soliton(const GridSpec& g, double center, double scale = 1.0) {
    return Field::from_function(g, [&](const Point& x) {
        const double c = std::cosh(0.5 * (x[0] - center));
        return scale * 1.5 / (c * c);
    });
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "kirchpeak_test_verify";
    std::filesystem::create_directories(dir);
    auto p = dir / name;
    std::filesystem::remove(p);
    return p;
}

}  // namespace

TEST_CASE("input digests and report sinks") {
    const json a = {{"eps", 0.1}, {"M", 256}};
    CHECK(input_digest(a) == input_digest(json{{"M", 256}, {"eps", 0.1}}));
    CHECK(input_digest(a) != input_digest(json{{"eps", 0.1}, {"M", 512}}));
    CHECK(input_digest(a).size() == 16);

    CheckReport r;
    r.name = "demo";
    r.passed = true;
    r.measured = {{"value", 1.5}};
    r.expected = {{"value", 2.0}};
    r.rows.push_back({0.1, 1.0, 2.0, false});
    r.rows.push_back({0.05, 1.9, 2.0, std::nullopt});

    const auto log_path = scratch("log.jsonl");
    ReportLog log(log_path.string());
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&] {
            for (int k = 0; k < 25; ++k) log.append(r);
        });
    for (auto& th : pool) th.join();
    std::ifstream in(log_path);
    int lines = 0;
    for (std::string line; std::getline(in, line); ++lines) {
        const json j = json::parse(line);
        CHECK(j["check"] == "demo");
        CHECK(j["rows"].size() == 2);
        CHECK(j["rows"][1]["pass"].is_null());
    }
    CHECK(lines == 100);

    CheckReport bare;
    bare.name = "bare";
    bare.measured = {{"value", 3.0}};
    const auto csv_path = scratch("checks.csv");
    write_check_csv({r, bare}, csv_path.string());
    std::ifstream csv(csv_path);
    std::vector<std::string> rows;
    for (std::string line; std::getline(csv, line);) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "check,eps,measured,expected,pass");
    CHECK(rows[1].rfind("demo,0.1", 0) == 0);
    CHECK(rows[1].substr(rows[1].size() - 5) == "false");
    CHECK(rows[3].rfind("bare,,3,", 0) == 0);
}

TEST_CASE("Pohozaev identity on the exact classical soliton") {
    // With V constant the volume term vanishes and every surface term is a
    // multiple of the first integral -u'^2 + u^2 - 2u^3/3, which is zero.
    const GridSpec g(1, 20.0, 512);
    const auto pr = params(1.0, 0.0, true);
    const auto V = Potential::constant(1, 1.0, {{0.3, 0.0, 0.0}});
    const Field u = soliton(g, 0.0);
    const auto r = pohozaev_residual(u, 1.0, pr, V, {0.3, 0.0, 0.0}, 1.7, 0);
    CHECK(r.passed == std::optional<bool>(true));
    CHECK(std::abs(r.measured["residual"].get<double>()) < 1e-10);
    CHECK(std::abs(r.measured["kirchhoff_surface"].get<double>()) > 1e-2);
    CHECK(std::abs(r.measured["potential_surface"].get<double>()) > 1e-2);
    CHECK(r.measured["coefficient"].get<double>() == doctest::Approx(1.0));

    const auto off = pohozaev_residual(soliton(g, 0.0, 1.05), 1.0, pr, V, {0.3, 0.0, 0.0}, 1.7, 0);
    CHECK(off.passed == std::optional<bool>(false));

    CHECK_THROWS_AS(pohozaev_residual(u, 1.0, pr, V, {0.3, 0.0, 0.0}, 19.8, 0), GeometryError);
    CHECK_THROWS_AS(pohozaev_residual(u, 1.0, pr, V, {0.3, 0.0, 0.0}, 1.0, 1), ParameterError);

    const auto scan = pohozaev_scan(u, 1.0, pr, V, {0.3, 0.0, 0.0}, 1.7, 0);
    CHECK(scan.measured["scan"].size() == 9);
    CHECK(scan.passed == std::optional<bool>(true));
}

TEST_CASE("Pohozaev residual of a computed classical solution converges") {
    const auto pr = params(1.0, 0.1, true);
    const auto q = solve_Q(GridSpec(1, 16.0, 1024), 1.0, 2.0, 1e-11);
    Well w;
    w.skew = {0.1, 0.0, 0.0};
    const auto V = Potential::wells(1, 2.0, 2.0, {w}, 1.25);
    const auto sys = solve_system(q, pr, V.peak_values());
    const double eps = 0.1;
    std::vector<double> scaled;
    for (int M : {64, 128, 256}) {
        const auto st = make_setup(sys, V, eps, GridSpec(1, 4.0, M));
        PeakConfig c;
        c.eps = eps;
        c.y = {{0.0, 0.0, 0.0}};
        const auto found = minimize_peaks(st, c);
        const auto r = pohozaev_residual(found.solution.solution, eps, pr, V, found.config.y[0], 1.0, 0);
        scaled.push_back(r.measured["value"].get<double>());
    }
    CHECK(scaled[0] > 1e-3);
    CHECK(scaled[1] < 1e-3);
    CHECK(scaled[2] <= 0.5 * scaled[1]);
}

TEST_CASE("fractional Pohozaev residual is a diagnostic") {
    const GridSpec g(1, 20.0, 512);
    const auto pr = params(0.4, 0.1);
    const auto V = Potential::constant(1, 1.0, {{0.0, 0.0, 0.0}});
    const auto r = pohozaev_residual(soliton(g, 0.0), 1.0, pr, V, {0.0, 0.0, 0.0}, 2.0, 0);
    CHECK_FALSE(r.passed.has_value());
    CHECK_FALSE(r.notes.empty());
    CHECK(std::isfinite(r.measured["residual"].get<double>()));

    const auto zero = pohozaev_residual(Field(g), 1.0, pr, V, {0.0, 0.0, 0.0}, 2.0, 0);
    for (const char* key : {"volume", "kirchhoff_surface", "potential_surface", "nonlinear_surface", "residual"})
        CHECK(zero.measured[key].get<double>() == 0.0);
}

TEST_CASE("Sobolev scaling ratios stay bounded") {
    const auto pr = params(0.4, 0.1);
    Well w;
    const auto V = Potential::wells(1, 2.0, 2.0, {w}, 1.25);
    const GridSpec g(1, 4.0, 2048);
    const std::vector<double> eps{0.16, 0.08, 0.04, 0.02};

    const auto r4 = sobolev_scaling_check(g, eps, 4.0, 3, 11, pr, V);
    CHECK(r4.passed == std::optional<bool>(true));
    CHECK(r4.rows.size() == 12);

    // With V >= 1 the eps norm dominates the L^2 norm.
    const auto r2 = sobolev_scaling_check(g, eps, 2.0, 3, 5, pr, V);
    CHECK(r2.measured["max_ratio"].get<double>() <= 1.0);
    CHECK(r2.passed == std::optional<bool>(true));

    // Same seed, same bump.
    const Field a = sobolev_sample(g, 0.05, 3), b = sobolev_sample(g, 0.05, 3);
    CHECK((a - b).sup_norm() == 0.0);
    CHECK((a - sobolev_sample(g, 0.05, 4)).sup_norm() > 0.0);

    CHECK_THROWS_AS(sobolev_scaling_check(g, eps, 1.5, 1, 1, pr, V), ParameterError);
    CHECK_THROWS_AS(sobolev_scaling_check(g, eps, 10.5, 1, 1, pr, V), ParameterError);
    CHECK_NOTHROW(sobolev_scaling_check(g, {0.1}, 10.0, 1, 1, pr, V));

    // A constant has no seminorm, so the eps norm is (int V)^(1/2).
    const Field one(g, std::vector<double>(g.size(), 1.0));
    const Field Vf = V.sample(g);
    double mass = 0.0;
    for (double v : Vf.values()) mass += v * g.spacing();
    const double e = 0.1;
    const double direct = std::pow(8.0, 0.25) / (std::pow(e, 0.25 - 0.5) * std::sqrt(mass));
    CHECK(sobolev_ratio(one, e, 4.0, pr, Vf) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("interaction inequality constant") {
    const Point xi{0.0, 0.0, 0.0}, xj{4.0, 0.0, 0.0};
    // At y = xi: 5^-2 / (4^-1 (1 + 5^-2)) with alpha = 1, beta = 2, sigma = 1.
    CHECK(interaction_ratio(xi, xi, xj, 1, 1.0, 2.0, 1.0) ==
          doctest::Approx((1.0 / 25.0) / (0.25 * (1.0 + 1.0 / 25.0))).epsilon(1e-14));

    const auto r = interaction_inequality_check(xi, xj, 1, 1.0, 2.0, 1.0, 3000, 17);
    CHECK(r.passed == std::optional<bool>(true));
    const double C = r.measured["uniform_constant"].get<double>();
    CHECK(C >= r.measured["pair_constant"].get<double>());
    CHECK(r.measured["pair_constant"].get<double>() >= r.measured["sampled_constant"].get<double>());
    CHECK(C >= interaction_ratio(xi, xi, xj, 1, 1.0, 2.0, 1.0));
    CHECK(std::isfinite(C));
    CHECK(interaction_violations(xi, xj, 1, 1.0, 2.0, 1.0, 0.5 * C, 3000, 99) > 0);

    // alpha = beta = sigma = 1: the pair constant is d / (d + 2), so it grows
    // with d toward the uniform value 1.
    const auto near = interaction_inequality_check(xi, {2.0, 0.0, 0.0}, 1, 1.0, 1.0, 1.0, 3000, 5);
    const auto twice = interaction_inequality_check(xi, {4.0, 0.0, 0.0}, 1, 1.0, 1.0, 1.0, 3000, 5);
    CHECK(near.measured["pair_constant"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(twice.measured["pair_constant"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    const double Cu = near.measured["uniform_constant"].get<double>();
    CHECK(twice.measured["uniform_constant"].get<double>() / Cu < 2.0);
    CHECK(Cu <= 1.0 + 1e-9);
    for (double d : {8.0, 64.0, 256.0})
        CHECK(interaction_violations(xi, {d, 0.0, 0.0}, 1, 1.0, 1.0, 1.0, Cu, 100000, 23) == 0);

    const auto r2 = interaction_inequality_check(xi, {3.0, 4.0, 0.0}, 2, 1.5, 1.5, 0.7, 3000, 3);
    CHECK(r2.passed == std::optional<bool>(true));
    CHECK(r2.measured["distance"].get<double>() == doctest::Approx(5.0));

    CHECK_THROWS_AS(interaction_inequality_check(xi, xj, 1, 1.0, 2.0, 1.5, 10, 1), ParameterError);
    CHECK_THROWS_AS(interaction_inequality_check(xi, xj, 1, 1.0, 2.0, 0.0, 10, 1), ParameterError);
    CHECK_THROWS_AS(interaction_inequality_check(xi, xi, 1, 1.0, 2.0, 1.0, 10, 1), ParameterError);
}

TEST_CASE("projected residual of an exact solution vanishes") {
    const GridSpec g(1, 20.0, 512);
    const auto pr = params(1.0, 0.0, true);
    const Field V(g, std::vector<double>(g.size(), 1.0));
    const std::vector<Field> pieces{soliton(g, 0.0)};
    CHECK(std::abs(projected_residual(pieces, 0, pr, V, 1.0)) < 1e-9);
    const std::vector<Field> scaled{soliton(g, 0.0, 1.1)};
    CHECK(std::abs(projected_residual(scaled, 0, pr, V, 1.0)) > 1e-2);
    CHECK_THROWS_AS(projected_residual(pieces, 1, pr, V, 1.0), InputError);
}

TEST_CASE("wrong ansatz gap separates naive and system profiles") {
    const auto q = solve_Q(GridSpec(1, 256.0, 8192), 0.45, 2.0, 1e-11);
    Well l;
    l.center = {-1.5, 0.0, 0.0};
    l.bottom = 0.2;
    Well r = l;
    r.center = {1.5, 0.0, 0.0};
    r.bottom = 0.24;
    const auto V = Potential::wells(1, 0.6, 2.0, {l, r}, 1.25);
    const GridSpec g(1, 6.0, 2048);
    const std::vector<double> eps{0.04, 0.02, 0.01, 0.005};

    const auto rep = wrong_ansatz_gap(q, params(0.45, 1.0), V, eps, g);
    CHECK(rep.passed == std::optional<bool>(true));
    const double expected = rep.expected["value"].get<double>();
    CHECK(expected > 0.0);
    CHECK(rep.measured["naive_limit"].get<double>() == doctest::Approx(expected).epsilon(0.2));
    CHECK(std::abs(rep.measured["system_limit"].get<double>()) < 0.05 * expected);
    CHECK(rep.rows.size() == 4);

    const auto lone = Potential::wells(1, 0.6, 2.0, {l}, 1.25);
    const auto single = wrong_ansatz_gap(q, params(0.45, 1.0), lone, {0.04, 0.02}, g);
    CHECK(single.expected["value"].get<double>() == 0.0);
    CHECK(single.passed == std::optional<bool>(true));

    // Without the nonlocal coupling the two ansatzes are the same.
    const auto plain = wrong_ansatz_gap(q, params(0.45, 0.0), V, {0.04, 0.02}, g);
    CHECK(plain.expected["value"].get<double>() == 0.0);
    CHECK(plain.passed == std::optional<bool>(true));
}

TEST_CASE("asymptotics fit on synthetic series") {
    const auto pr = params(0.4, 0.1);
    std::vector<SweepPoint> series;
    for (double e : {0.16, 0.08, 0.04, 0.02, 0.01})
        series.push_back({e, 0.7 * std::pow(e, 2.3), 0.3 * std::pow(e, 1.5)});
    const auto r = asymptotics_fit(series, pr, 1.0);
    CHECK(r.measured["correction_exponent"].get<double>() == doctest::Approx(2.3).epsilon(1e-10));
    CHECK(r.expected["value"].get<double>() == doctest::Approx(1.3));
    CHECK(r.expected["tail_limited_prediction"].get<double>() == doctest::Approx(1.5));
    CHECK(r.passed == std::optional<bool>(true));

    // Threshold 0.5 + 0.8 * 3 = 2.9 is not met by 2.3.
    CHECK(asymptotics_fit(series, pr, 3.0).passed == std::optional<bool>(false));

    auto flat = series;
    for (auto& p : flat) p.displacement = 0.2 * p.eps;
    CHECK(asymptotics_fit(flat, pr, 1.0).passed == std::optional<bool>(false));

    auto frozen = series;
    for (auto& p : frozen) p.correction_norm = 0.0;
    const auto fr = asymptotics_fit(frozen, pr, 1.0);
    CHECK_FALSE(fr.passed.has_value());

    const std::vector<SweepPoint> narrow{series[0], series[1], series[2], series[3]};
    const auto nr = asymptotics_fit(narrow, pr, 1.0);
    bool noted = false;
    for (const auto& n : nr.notes) noted = noted || n.find("decade") != std::string::npos;
    CHECK(noted);

    CHECK_THROWS_AS(asymptotics_fit({series[0], series[1], series[2]}, pr, 1.0), ParameterError);
    CHECK_THROWS_AS(asymptotics_fit({series[0], series[0], series[1], series[2]}, pr, 1.0), ParameterError);
}

TEST_CASE("uniqueness probe agrees across starts") {
    const auto pr = params(0.4, 0.1);
    const auto q = solve_Q(GridSpec(1, 256.0, 8192), 0.4, 2.0, 1e-11);
    Well w;
    w.skew = {0.1, 0.0, 0.0};
    const auto V = Potential::wells(1, 2.0, 2.0, {w}, 1.25);
    const auto st = make_setup(solve_system(q, pr, V.peak_values()), V, 0.16, GridSpec(1, 4.0, 512));
    auto start = [](double y) {
        ProbeStart s;
        s.config.eps = 0.16;
        s.config.y = {{y, 0.0, 0.0}};
        return s;
    };
    // The admissible ball has radius delta = 0.5; the second start is delta/2 off.
    const auto res = uniqueness_probe(st, {start(0.0), start(0.25)});
    CHECK(res.report.passed == std::optional<bool>(true));
    CHECK(res.solutions.size() == 2);
    CHECK(res.report.measured["value"].get<double>() <= 1e-6);

    const auto same = uniqueness_probe(st, {start(0.0), start(0.0)});
    CHECK(same.report.measured["max_pair_difference"].get<double>() == 0.0);
    CHECK(same.report.digest == uniqueness_probe(st, {start(0.0), start(0.0)}).report.digest);

    CHECK_THROWS_AS(uniqueness_probe(st, {start(0.0), start(0.6)}), GeometryError);
    CHECK_THROWS_AS(uniqueness_probe(st, {}), InputError);
}
