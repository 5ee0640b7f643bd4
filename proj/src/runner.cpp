#include "kirchpeak/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

#include "kirchpeak/errors.hpp"
#include "kirchpeak/groundstate.hpp"
#include "kirchpeak/reduction.hpp"
#include "kirchpeak/snapshot.hpp"

namespace kirchpeak {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kRunReadme = R"(# Run directory

Files written by one `kirchpeak` invocation.

- `manifest.json`: the manifest as parsed, re-serialized. Running it again reproduces every number.
- `version.json`: library version and compiler.
- `reports.jsonl`: one JSON object per check with fields `check`, `digest` (hash of the check inputs),
  `measured`, `expected`, `basis`, `tolerance`, `pass` (true, false, or null for diagnostics),
  `notes` and `rows`.
- `checks.csv`: the same reports flattened. Columns:
  - `check`: check name
  - `eps`: scale parameter of the row, empty for single-value checks
  - `measured`: measured value
  - `expected`: reference value, empty or `nan` when there is none
  - `pass`: `true`, `false`, or empty for diagnostics
- `summary.json`: exit code and the pass state of every report.
- `error.json`: only on failure; error kind, message and the stage that failed.
- `log.jsonl`: only with `--verbose`; one line per solver iteration.
- Stage records (`groundstate.json`, `system.json`, `reduced.json`, `sweep.json`) and field snapshots.
  A snapshot is `<name>.bin`, raw little-endian float64 values in row-major order with the last axis
  fastest, plus `<name>.json` with the grid, shape and metadata. Snapshot names: `profile` (groundstate,
  with `profile.csv` in 1D), `profile_<i>` (system), `solution` and `correction` (reduce, and per sweep
  point), `solution_<k>` (uniqueness).
- `sweep.csv` (sweep and asymptotics runs): `eps,correction_norm,displacement,reduced_energy,iterations`,
  with one subdirectory `eps_<k>` per sweep point.
)";

struct Context {
    const RunManifest& m;
    RunOptions opts;
    fs::path dir;
    ReportLog log;
    std::vector<CheckReport> reports;
    std::mutex mutex;
    std::ofstream verbose;
    std::string stage;

    Context(const RunManifest& manifest, RunOptions o, fs::path d)
        : m(manifest), opts(std::move(o)), dir(std::move(d)), log((dir / "reports.jsonl").string()) {}

    void report(CheckReport r) {
        log.append(r);
        std::lock_guard<std::mutex> lock(mutex);
        reports.push_back(std::move(r));
    }

    void trace(const json& line) {
        if (!opts.verbose) return;
        std::lock_guard<std::mutex> lock(mutex);
        verbose << line.dump() << '\n';
    }

    IterationLog iteration_log(const std::string& solver) {
        if (!opts.verbose) return {};
        return [this, solver](int it, double factor, double res) {
            trace({{"solver", solver}, {"iteration", it}, {"factor", factor}, {"residual", res}});
        };
    }
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << std::setw(2) << j << '\n';
    if (!out) throw InputError("cannot write " + path.string());
}

json point_list(const std::vector<Point>& ys, int dim) {
    json out = json::array();
    for (const Point& y : ys) out.push_back(std::vector<double>(y.begin(), y.begin() + dim));
    return out;
}

std::vector<Point> parse_points(const json& list, int dim) {
    std::vector<Point> out;
    for (const auto& y : list) {
        Point p{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) p[d] = y.at(d).get<double>();
        out.push_back(p);
    }
    return out;
}

double displacement(const PeakConfig& cfg, const Potential& V) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.y.size(); ++i) {
        double d2 = 0.0;
        for (int d = 0; d < V.dim(); ++d) d2 += std::pow(cfg.y[i][d] - V.center(i)[d], 2);
        worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
}

json reduced_to_json(const ReducedSolution& r, int dim) {
    return {{"eps", r.config.eps},
            {"y", point_list(r.config.y, dim)},
            {"correction_norm", r.correction_norm},
            {"iterations", r.iterations},
            {"step_norms", r.step_norms},
            {"contraction_ratios", r.contraction_ratios},
            {"orthogonality", r.orthogonality},
            {"multipliers", r.multipliers},
            {"reduced_energy", r.reduced_energy},
            {"full_residual", r.full_residual},
            {"projected_residual", r.projected_residual},
            {"linear_iterations", r.linear_iterations}};
}

CheckReport contraction_report(const ReducedSolution& r) {
    CheckReport c;
    c.name = "contraction";
    double worst_ratio = 0.0, worst_orth = 0.0;
    for (double x : r.contraction_ratios) worst_ratio = std::max(worst_ratio, x);
    for (double x : r.orthogonality) worst_orth = std::max(worst_orth, x);
    c.digest = input_digest({{"eps", r.config.eps}, {"y", point_list(r.config.y, 3)}});
    c.measured = {{"value", worst_ratio}, {"max_ratio", worst_ratio}, {"max_orthogonality", worst_orth},
                  {"iterations", r.iterations}};
    c.expected = {{"value", 1.0}, {"max_orthogonality", 1e-8}};
    c.basis = "fixed-point map is a contraction on the constraint space";
    c.tolerance = 1e-8;
    c.passed = worst_ratio < 1.0 && worst_orth < 1e-8;
    c.rows.push_back({r.config.eps, worst_ratio, 1.0, *c.passed});
    return c;
}

struct Pipeline {
    SchrodingerGroundState base;
    SystemSolution system;
};

Pipeline build_system(Context& ctx) {
    const RunManifest& m = ctx.m;
    Pipeline p;
    ctx.stage = "groundstate";
    SolveOptions so;
    so.log = ctx.iteration_log("groundstate");
    p.base = solve_Q(m.ground_state_grid(), m.params.s, m.params.p, m.tolerances.ground_state, so);
    ctx.stage = "system";
    p.system = solve_system(p.base, m.params, m.potential->peak_values());
    return p;
}

PeakConfig start_config(const RunManifest& m, double eps) {
    PeakConfig c;
    c.eps = eps;
    c.delta = m.options.value("delta", c.delta);
    c.theta = m.options.value("theta", c.theta);
    if (m.options.contains("start")) {
        const json& s = m.options.at("start");
        c.y = parse_points(s.is_object() ? s.at("y") : s, m.params.dim);
    } else {
        for (std::size_t i = 0; i < m.potential->peaks(); ++i) c.y.push_back(m.potential->center(i));
    }
    return c;
}

SearchOptions search_options(const RunManifest& m) {
    SearchOptions so;
    so.correction.step_tol = m.tolerances.correction;
    so.correction.linear_rtol = m.tolerances.correction;
    return so;
}

struct ReducedRun {
    ReductionSetup setup;
    ReducedSolution solution;
    std::vector<std::string> warnings;
};

ReducedRun reduce_at(Context& ctx, const Pipeline& p, double eps, const GridSpec& grid, const std::string& stage) {
    const RunManifest& m = ctx.m;
    {
        std::lock_guard<std::mutex> lock(ctx.mutex);
        ctx.stage = stage;
    }
    ReducedRun out;
    out.setup = make_setup(p.system, *m.potential, eps, grid, ctx.opts.strict);
    out.warnings = out.setup.warnings;
    const PeakConfig start = start_config(m, eps);
    const SearchOptions so = search_options(m);
    if (m.options.value("search", true)) {
        PeakSearch s = minimize_peaks(out.setup, start, so);
        out.solution = std::move(s.solution);
        out.warnings.insert(out.warnings.end(), s.warnings.begin(), s.warnings.end());
    } else {
        start.validate(*m.potential);
        out.solution = solve_correction(out.setup, start, so.correction);
    }
    const auto& r = out.solution;
    for (std::size_t k = 0; k < r.step_norms.size(); ++k)
        ctx.trace({{"solver", "correction"}, {"eps", eps}, {"iteration", k + 1}, {"step_norm", r.step_norms[k]}});
    return out;
}

void write_reduced(const fs::path& dir, const ReducedRun& run, int dim) {
    fs::create_directories(dir);
    json rec = reduced_to_json(run.solution, dim);
    rec["warnings"] = run.warnings;
    rec["tail"] = run.setup.tail;
    write_json(dir / "reduced.json", rec);
    const json meta = {{"eps", run.solution.config.eps}, {"y", point_list(run.solution.config.y, dim)}};
    write_snapshot(dir / "solution", run.solution.solution, meta);
    write_snapshot(dir / "correction", run.solution.correction, meta);
}

// Closed form of the s = 1, N = 1 ground state of -Q'' + Q = Q^p.
double classical_soliton(double x, double p) {
    return std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0)) * std::pow(1.0 / std::cosh(0.5 * (p - 1.0) * x), 2.0 / (p - 1.0));
}

void run_groundstate(Context& ctx) {
    const RunManifest& m = ctx.m;
    ctx.stage = "groundstate";
    SolveOptions so;
    so.log = ctx.iteration_log("groundstate");
    const auto q = solve_Q(m.grid, m.params.s, m.params.p, m.tolerances.ground_state, so);
    const json meta = {{"s", q.s}, {"p", q.p}, {"residual", q.residual}, {"seminorm_sq", q.seminorm_sq}};
    write_snapshot(ctx.dir / "profile", q.profile, meta);
    if (m.grid.dim == 1) write_profile_csv(ctx.dir / "profile.csv", q.profile);
    json rec = meta;
    rec["iterations"] = q.iterations;
    rec["final_normalization"] = q.final_normalization;
    rec["max"] = q.profile.max();

    CheckReport res;
    res.name = "groundstate_residual";
    res.digest = input_digest(m.to_json());
    res.measured = {{"value", q.residual}, {"iterations", q.iterations}};
    res.expected = {{"value", m.tolerances.ground_state}};
    res.basis = "sup norm of (-Delta)^s Q + Q - Q^p";
    res.tolerance = m.tolerances.ground_state;
    res.passed = q.residual < m.tolerances.ground_state;
    ctx.report(res);

    if (m.params.s == 1.0 && m.grid.dim == 1) {
        double err = 0.0;
        for (std::size_t i = 0; i < q.profile.size(); ++i) {
            const double x = m.grid.point(i)[0] - m.grid.center[0];
            err = std::max(err, std::abs(q.profile[i] - classical_soliton(x, m.params.p)));
        }
        const double tol = m.tolerances.check.value_or(1e-6);
        CheckReport cf;
        cf.name = "closed_form";
        cf.digest = res.digest;
        cf.measured = {{"value", err}};
        cf.expected = {{"value", 0.0}};
        cf.basis = "((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1)x/2)";
        cf.tolerance = tol;
        cf.passed = err < tol;
        ctx.report(cf);
        rec["closed_form_error"] = err;
    } else if (m.params.s < 1.0) {
        const bool gated = m.options.contains("decay_window");
        const auto window = m.options.value("decay_window", std::vector<double>{m.grid.half_width / 16.0,
                                                                                 m.grid.half_width / 4.0});
        if (window.size() != 2) throw InputError("options.decay_window needs two radii");
        const auto fit = decay_fit(q, window[0], window[1]);
        CheckReport df;
        df.name = "decay_exponent";
        df.digest = input_digest({{"manifest", m.to_json()}, {"window", window}});
        df.measured = {{"value", fit.slope}, {"near_slope", fit.near_slope}, {"far_slope", fit.far_slope},
                       {"samples", fit.samples}};
        df.expected = {{"value", fit.expected}};
        df.basis = "algebraic tail |x|^{-(N+2s)}";
        df.tolerance = 0.1;
        if (gated)
            df.passed = fit.within_tolerance;
        else
            df.notes.push_back("default window; reported without pass/fail");
        ctx.report(df);
        rec["decay_slope"] = fit.slope;
    }
    write_json(ctx.dir / "groundstate.json", rec);
}

void run_system(Context& ctx) {
    const RunManifest& m = ctx.m;
    const Pipeline p = build_system(ctx);
    const SystemSolution& sys = p.system;
    ctx.stage = "system";
    for (std::size_t i = 0; i < sys.peaks(); ++i)
        write_snapshot(ctx.dir / ("profile_" + std::to_string(i)), sys.profiles[i],
                       {{"peak", i}, {"potential_value", sys.peak_values[i]}, {"beta", sys.beta[i]}});
    const auto ec = energy_constants(sys);
    write_json(ctx.dir / "system.json", {{"coefficient", sys.coefficient},
                                         {"peak_values", sys.peak_values},
                                         {"alpha", sys.alpha},
                                         {"beta", sys.beta},
                                         {"seminorms", sys.seminorms},
                                         {"residual", sys.residual},
                                         {"consistency_error", sys.consistency_error()},
                                         {"energy_A", ec.A},
                                         {"energy_B", ec.B}});
    CheckReport c;
    c.name = "system_consistency";
    c.digest = input_digest(m.to_json());
    c.measured = {{"value", sys.consistency_error()}, {"coefficient", sys.coefficient}};
    c.expected = {{"value", 0.0}};
    c.basis = "A = a + b sum |(-Delta)^{s/2} U_i|^2";
    c.tolerance = m.tolerances.check.value_or(1e-8);
    c.passed = sys.consistency_error() < c.tolerance;
    ctx.report(c);
}

void run_reduce(Context& ctx) {
    const RunManifest& m = ctx.m;
    const Pipeline p = build_system(ctx);
    const ReducedRun r = reduce_at(ctx, p, m.eps.front(), m.grid, "reduce");
    write_reduced(ctx.dir, r, m.params.dim);
    ctx.report(contraction_report(r.solution));
}

std::vector<SweepPoint> run_sweep_points(Context& ctx, const Pipeline& p) {
    const RunManifest& m = ctx.m;
    std::vector<ReducedRun> runs(m.eps.size());
    parallel_for(m.eps.size(), ctx.opts.threads, [&](std::size_t k) {
        runs[k] = reduce_at(ctx, p, m.eps[k], m.grid, "sweep eps=" + std::to_string(m.eps[k]));
        write_reduced(ctx.dir / ("eps_" + std::to_string(k)), runs[k], m.params.dim);
    });
    ctx.stage = "sweep";
    std::vector<SweepPoint> pts;
    std::ofstream csv(ctx.dir / "sweep.csv");
    csv << std::setprecision(17) << "eps,correction_norm,displacement,reduced_energy,iterations\n";
    json recs = json::array();
    for (const ReducedRun& r : runs) {
        const auto& s = r.solution;
        const double disp = displacement(s.config, *m.potential);
        pts.push_back({s.config.eps, s.correction_norm, disp});
        csv << s.config.eps << ',' << s.correction_norm << ',' << disp << ',' << s.reduced_energy << ','
            << s.iterations << '\n';
        recs.push_back(reduced_to_json(s, m.params.dim));
        ctx.report(contraction_report(s));
    }
    const auto ec = energy_constants(p.system);
    write_json(ctx.dir / "sweep.json", {{"points", recs}, {"energy_A", ec.A}, {"energy_B", ec.B}});
    return pts;
}

void run_sweep(Context& ctx) {
    const Pipeline p = build_system(ctx);
    const auto pts = run_sweep_points(ctx, p);
    ctx.stage = "asymptotics";
    ctx.report(asymptotics_fit(pts, ctx.m.params, ctx.m.potential->flatness()));
}

void run_verify(Context& ctx) {
    const RunManifest& m = ctx.m;
    const std::string& check = m.check;
    const unsigned long seed = m.seeds.empty() ? 1ul : m.seeds.front();
    const json& o = m.options;
    ctx.stage = "verify " + check;

    if (check == "interaction") {
        const auto xs = parse_points(json::array({o.at("xi"), o.at("xj")}), m.params.dim);
        auto r = interaction_inequality_check(xs[0], xs[1], m.params.dim, o.at("alpha").get<double>(),
                                              o.at("beta").get<double>(), o.at("sigma").get<double>(),
                                              o.value("samples", 10000), seed);
        ctx.report(std::move(r));
        return;
    }
    if (check == "sobolev") {
        ctx.report(sobolev_scaling_check(m.grid, m.eps, o.at("q").get<double>(), o.value("samples", 3), seed,
                                         m.params, *m.potential));
        return;
    }
    if (check == "wrong_ansatz") {
        ctx.stage = "groundstate";
        SolveOptions so;
        so.log = ctx.iteration_log("groundstate");
        const auto base = solve_Q(m.ground_state_grid(), m.params.s, m.params.p, m.tolerances.ground_state, so);
        ctx.stage = "verify wrong_ansatz";
        ctx.report(wrong_ansatz_gap(base, m.params, *m.potential, m.eps, m.grid, m.tolerances.check.value_or(0.2)));
        return;
    }

    const Pipeline p = build_system(ctx);
    if (check == "asymptotics") {
        const auto pts = run_sweep_points(ctx, p);
        ctx.stage = "asymptotics";
        ctx.report(asymptotics_fit(pts, m.params, m.potential->flatness()));
        return;
    }
    if (check == "pohozaev") {
        const double eps = m.eps.front();
        const double radius = o.at("radius").get<double>();
        const int axis = o.value("axis", 0);
        const double tol = m.tolerances.check.value_or(1e-3);
        std::vector<GridSpec> grids{m.grid};
        if (o.value("refine", true)) grids.emplace_back(m.grid.dim, m.grid.half_width, 2 * m.grid.points, m.grid.center);
        std::vector<double> scaled;
        for (std::size_t k = 0; k < grids.size(); ++k) {
            const ReducedRun r = reduce_at(ctx, p, eps, grids[k], "pohozaev M=" + std::to_string(grids[k].points));
            write_reduced(ctx.dir / ("M_" + std::to_string(grids[k].points)), r, m.params.dim);
            ctx.stage = "verify pohozaev";
            const Point& center = r.solution.config.y.front();
            CheckReport rep = o.value("scan", false)
                                  ? pohozaev_scan(r.solution.solution, eps, m.params, *m.potential, center, radius, axis, tol)
                                  : pohozaev_residual(r.solution.solution, eps, m.params, *m.potential, center, radius,
                                                      axis, tol);
            rep.measured["points"] = grids[k].points;
            rep.rows.push_back({eps, rep.measured["value"].get<double>(), 0.0, rep.passed});
            scaled.push_back(rep.measured["value"].get<double>());
            ctx.report(std::move(rep));
        }
        if (scaled.size() == 2) {
            CheckReport ref;
            ref.name = "pohozaev_refinement";
            ref.digest = input_digest(m.to_json());
            const double ratio = scaled[0] > 0.0 ? scaled[1] / scaled[0] : 0.0;
            ref.measured = {{"value", ratio}, {"coarse", scaled[0]}, {"fine", scaled[1]}};
            ref.expected = {{"value", 0.5}};
            ref.basis = "discretization error of an exact identity shrinks under grid doubling";
            ref.tolerance = 0.5;
            if (m.params.s == 1.0)
                ref.passed = ratio <= 0.5;
            else
                ref.notes.push_back("fractional order: refinement trend reported as a diagnostic");
            ctx.report(std::move(ref));
        }
        return;
    }
    if (check == "uniqueness") {
        const double eps = *std::min_element(m.eps.begin(), m.eps.end());
        ctx.stage = "uniqueness setup";
        const ReductionSetup setup = make_setup(p.system, *m.potential, eps, m.grid, ctx.opts.strict);
        std::vector<ProbeStart> starts;
        for (const auto& s : o.at("starts")) {
            ProbeStart ps;
            ps.config = start_config(m, eps);
            ps.config.y = parse_points(s.is_object() ? s.at("y") : s, m.params.dim);
            if (s.is_object() && s.contains("correction"))
                ps.correction = read_snapshot(s.at("correction").get<std::string>()).field;
            starts.push_back(std::move(ps));
        }
        ctx.stage = "verify uniqueness";
        ProbeResult res = uniqueness_probe(setup, starts, search_options(m), m.tolerances.check.value_or(1e-6));
        for (std::size_t k = 0; k < res.solutions.size(); ++k)
            write_snapshot(ctx.dir / ("solution_" + std::to_string(k)), res.solutions[k], {{"eps", eps}});
        ctx.report(std::move(res.report));
        return;
    }
    throw InputError("unknown check '" + check + "'");
}

void write_error(const fs::path& dir, const RunResult& r) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return;
    std::ofstream out(dir / "error.json");
    out << std::setw(2)
        << json{{"exit_code", r.exit_code}, {"error", r.error_kind}, {"message", r.message}, {"stage", r.stage}}
        << '\n';
}

}  // namespace

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

fs::path resolve_run_directory(const RunManifest& m, const RunOptions& opts) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    if (!m.output.empty()) return m.output;
    const std::string leaf = m.check.empty() ? m.command : m.command + "-" + m.check;
    if (const char* root = std::getenv("KIRCHPEAK_OUT"); root && *root) return fs::path(root) / leaf;
    return fs::path("runs") / leaf;
}

RunResult run(const RunManifest& m, const RunOptions& opts) {
    RunResult result;
    result.directory = resolve_run_directory(m, opts);
    try {
        if (opts.threads < 1) throw ParameterError("thread count must be at least 1");
        m.validate();
    } catch (const Error& e) {
        result.exit_code = kExitInvalid;
        result.stage = "validation";
        result.error_kind = e.kind();
        result.message = e.what();
        write_error(result.directory, result);
        return result;
    }

    std::error_code ec;
    fs::create_directories(result.directory, ec);
    if (ec) {
        result.exit_code = kExitInvalid;
        result.stage = "validation";
        result.error_kind = "input";
        result.message = "cannot create run directory " + result.directory.string() + ": " + ec.message();
        return result;
    }
    for (const char* stale : {"reports.jsonl", "error.json", "log.jsonl", "summary.json"})
        fs::remove(result.directory / stale, ec);

    Context ctx(m, opts, result.directory);
    try {
        write_json(ctx.dir / "manifest.json", m.to_json());
        write_json(ctx.dir / "version.json", {{"kirchpeak", KIRCHPEAK_VERSION}, {"compiler", __VERSION__}});
        std::ofstream(ctx.dir / "README.md") << kRunReadme;
        if (opts.verbose) ctx.verbose.open(ctx.dir / "log.jsonl");

        if (m.command == "groundstate")
            run_groundstate(ctx);
        else if (m.command == "system")
            run_system(ctx);
        else if (m.command == "reduce")
            run_reduce(ctx);
        else if (m.command == "sweep")
            run_sweep(ctx);
        else
            run_verify(ctx);
    } catch (const Error& e) {
        result.exit_code = kExitCompute;
        result.stage = ctx.stage;
        result.error_kind = e.kind();
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = kExitCompute;
        result.stage = ctx.stage;
        result.error_kind = "internal";
        result.message = e.what();
    }

    result.reports = ctx.reports;
    if (result.exit_code == kExitOk)
        for (const auto& r : result.reports)
            if (r.passed == std::optional<bool>(false)) result.exit_code = kExitCheckFailed;

    try {
        write_check_csv(result.reports, (ctx.dir / "checks.csv").string());
        json summary = {{"exit_code", result.exit_code}, {"reports", json::array()}};
        for (const auto& r : result.reports)
            summary["reports"].push_back({{"check", r.name}, {"pass", r.passed ? json(*r.passed) : json(nullptr)}});
        write_json(ctx.dir / "summary.json", summary);
    } catch (const Error& e) {
        if (result.exit_code != kExitCompute) {
            result.exit_code = kExitCompute;
            result.stage = "output";
            result.error_kind = e.kind();
            result.message = e.what();
        }
    }
    if (result.exit_code == kExitCompute) write_error(ctx.dir, result);
    return result;
}

RunResult run_file(const std::string& manifest_path, const RunOptions& opts) {
    RunManifest m;
    try {
        m = RunManifest::load(manifest_path);
    } catch (const Error& e) {
        RunResult r;
        r.exit_code = kExitInvalid;
        r.stage = "validation";
        r.error_kind = e.kind();
        r.message = e.what();
        if (!opts.out_dir.empty()) {
            r.directory = opts.out_dir;
            write_error(r.directory, r);
        }
        return r;
    }
    return run(m, opts);
}

}  // namespace kirchpeak
