#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchpeak/grid.hpp"
#include "kirchpeak/params.hpp"
#include "kirchpeak/potential.hpp"

namespace kirchpeak {

struct Tolerances {
    double ground_state = 1e-11;  // sup residual of the base profile
    double profile = 1e-11;       // per-peak residual of the system re-solved on the z-grid
    double correction = 1e-10;    // chord step and MINRES relative tolerance
    std::optional<double> check;  // overrides the checker's own default
};

// One batch job. `grid` is the working grid: the profile grid for
// `groundstate`, the x-grid for the reduction commands. `base_grid` is where
// the Schrodinger ground state is computed for the other commands.
struct RunManifest {
    std::string command;  // groundstate, system, reduce, sweep or verify
    std::string check;    // verify only
    ProblemParams params;
    std::optional<Potential> potential;
    GridSpec grid;
    std::optional<GridSpec> base_grid;
    std::vector<double> eps;
    std::vector<unsigned long> seeds;
    Tolerances tolerances;
    nlohmann::json options = nlohmann::json::object();  // command and check specific
    std::string output;

    static const std::vector<std::string>& commands();
    static const std::vector<std::string>& checks();

    nlohmann::json to_json() const;
    // Structural problems raise InputError; nothing is validated numerically.
    static RunManifest from_json(const nlohmann::json& j);
    static RunManifest load(const std::string& path);

    // Admissibility of every numeric field before any compute starts.
    void validate() const;
    GridSpec ground_state_grid() const { return base_grid ? *base_grid : grid; }
};

}  // namespace kirchpeak
