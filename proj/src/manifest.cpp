#include "kirchpeak/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "kirchpeak/errors.hpp"
#include "kirchpeak/snapshot.hpp"

namespace kirchpeak {

using nlohmann::json;

namespace {

json params_to_json(const ProblemParams& p) {
    return {{"dim", p.dim}, {"s", p.s}, {"p", p.p}, {"a", p.a}, {"b", p.b}, {"validation_mode", p.validation_mode}};
}

ProblemParams params_from_json(const json& j) {
    ProblemParams p;
    p.dim = j.at("dim").get<int>();
    p.s = j.at("s").get<double>();
    p.p = j.at("p").get<double>();
    p.a = j.value("a", p.a);
    p.b = j.value("b", p.b);
    p.validation_mode = j.value("validation_mode", false);
    return p;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void require_point(const json& opts, const char* key, int dim) {
    if (!opts.contains(key)) throw InputError(std::string("options.") + key + " is required");
    const auto& v = opts.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        throw InputError(std::string("options.") + key + " must be a list of " + std::to_string(dim) + " numbers");
    for (const auto& x : v)
        if (!x.is_number()) throw InputError(std::string("options.") + key + " must hold numbers");
}

double option_number(const json& opts, const char* key) {
    if (!opts.contains(key) || !opts.at(key).is_number())
        throw InputError(std::string("options.") + key + " must be a number");
    return opts.at(key).get<double>();
}

void validate_configs(const json& list, const char* what, int dim, std::size_t peaks) {
    if (!list.is_array() || list.empty()) throw InputError(std::string(what) + " must be a nonempty list");
    for (const auto& cfg : list) {
        const json& ys = cfg.is_object() ? cfg.at("y") : cfg;
        if (!ys.is_array() || ys.size() != peaks)
            throw InputError(std::string(what) + " entries need one position per peak");
        for (const auto& y : ys)
            if (!y.is_array() || static_cast<int>(y.size()) != dim)
                throw InputError(std::string(what) + " positions must have " + std::to_string(dim) + " coordinates");
    }
}

}  // namespace

const std::vector<std::string>& RunManifest::commands() {
    static const std::vector<std::string> c{"groundstate", "system", "reduce", "sweep", "verify"};
    return c;
}

const std::vector<std::string>& RunManifest::checks() {
    static const std::vector<std::string> c{"pohozaev",     "sobolev",     "interaction",
                                            "wrong_ansatz", "asymptotics", "uniqueness"};
    return c;
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    if (!check.empty()) j["check"] = check;
    j["params"] = params_to_json(params);
    if (potential) j["potential"] = potential->to_json();
    j["grid"] = grid_to_json(grid);
    if (base_grid) j["base_grid"] = grid_to_json(*base_grid);
    j["eps"] = eps;
    j["seeds"] = seeds;
    json tol = {{"ground_state", tolerances.ground_state},
                {"profile", tolerances.profile},
                {"correction", tolerances.correction}};
    if (tolerances.check) tol["check"] = *tolerances.check;
    j["tolerances"] = tol;
    j["options"] = options;
    if (!output.empty()) j["output"] = output;
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    if (!j.is_object()) throw InputError("manifest must be a JSON object");
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.check = j.value("check", std::string());
        m.params = params_from_json(j.at("params"));
        if (j.contains("potential") && !j.at("potential").is_null())
            m.potential = Potential::from_json(j.at("potential"));
        m.grid = grid_from_json(j.at("grid"));
        if (j.contains("base_grid") && !j.at("base_grid").is_null()) m.base_grid = grid_from_json(j.at("base_grid"));
        m.eps = j.value("eps", std::vector<double>{});
        m.seeds = j.value("seeds", std::vector<unsigned long>{});
        if (j.contains("tolerances")) {
            const json& t = j.at("tolerances");
            m.tolerances.ground_state = t.value("ground_state", m.tolerances.ground_state);
            m.tolerances.profile = t.value("profile", m.tolerances.profile);
            m.tolerances.correction = t.value("correction", m.tolerances.correction);
            if (t.contains("check") && !t.at("check").is_null()) m.tolerances.check = t.at("check").get<double>();
        }
        if (j.contains("options")) m.options = j.at("options");
        if (!m.options.is_object()) throw InputError("manifest options must be an object");
        m.output = j.value("output", std::string());
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read manifest " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("manifest " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void RunManifest::validate() const {
    if (!contains(commands(), command)) throw InputError("unknown command '" + command + "'");
    if (command == "verify") {
        if (!contains(checks(), check)) throw InputError("unknown check '" + check + "'");
    } else if (!check.empty()) {
        throw InputError("a check name is only accepted with the verify command");
    }

    params.validate();
    grid.validate();
    if (grid.dim != params.dim) throw ShapeError("grid dimension does not match params.dim");
    if (base_grid) {
        base_grid->validate();
        if (base_grid->dim != params.dim) throw ShapeError("base grid dimension does not match params.dim");
    }
    require(tolerances.ground_state >= 1e-12 && tolerances.ground_state <= 1e-6,
            "ground-state tolerance must lie in [1e-12, 1e-6]");
    require(tolerances.profile > 0.0 && tolerances.correction > 0.0, "tolerances must be positive");
    if (tolerances.check) require(*tolerances.check > 0.0, "check tolerance must be positive");
    for (double e : eps) require(std::isfinite(e) && e > 0.0, "every eps must be positive");

    const bool needs_potential =
        command == "system" || command == "reduce" || command == "sweep" ||
        (command == "verify" && check != "interaction");
    if (needs_potential) {
        if (!potential) throw InputError("command '" + command + "' needs a potential");
        potential->validate();
        if (potential->dim() != params.dim) throw ShapeError("potential dimension does not match params.dim");
    }
    const bool reduction = command == "reduce" || command == "sweep" ||
                           (command == "verify" && (check == "pohozaev" || check == "asymptotics" ||
                                                    check == "uniqueness"));
    if (reduction && eps.empty()) throw InputError("command '" + command + "' needs at least one eps");
    if ((command == "sweep" || check == "asymptotics") && eps.size() < 4)
        throw ParameterError("a sweep needs at least 4 eps values");
    if ((check == "sobolev" || check == "wrong_ansatz") && eps.empty())
        throw InputError("check '" + check + "' needs an eps list");
    if (potential && options.contains("start"))
        validate_configs(json::array({options.at("start")}), "options.start", params.dim, potential->peaks());

    if (check == "pohozaev") {
        require(option_number(options, "radius") > 0.0, "options.radius must be positive");
        const int axis = options.value("axis", 0);
        require(axis >= 0 && axis < params.dim, "options.axis out of range");
    } else if (check == "sobolev") {
        option_number(options, "q");
    } else if (check == "interaction") {
        require_point(options, "xi", params.dim);
        require_point(options, "xj", params.dim);
        const double alpha = option_number(options, "alpha"), beta = option_number(options, "beta");
        const double sigma = option_number(options, "sigma");
        require(sigma > 0.0 && sigma <= std::min(alpha, beta), "sigma must lie in (0, min(alpha, beta)]");
        require(options.at("xi") != options.at("xj"), "options.xi and options.xj must differ");
    } else if (check == "uniqueness") {
        if (!options.contains("starts")) throw InputError("options.starts is required");
        validate_configs(options.at("starts"), "options.starts", params.dim, potential->peaks());
    }
    if (options.contains("samples")) require(options.at("samples").get<int>() > 0, "options.samples must be positive");
}

}  // namespace kirchpeak
