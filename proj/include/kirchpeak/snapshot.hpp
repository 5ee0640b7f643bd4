#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "kirchpeak/field.hpp"

namespace kirchpeak {

using json = nlohmann::json;

json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

// Writes `<stem>.bin` (raw little-endian float64 values in storage order)
// and `<stem>.json` (shape, grid, byte order and the caller's metadata).
void write_snapshot(const std::filesystem::path& stem, const Field& f, const json& meta = json::object());

struct Snapshot {
    Field field;
    json meta;
};
Snapshot read_snapshot(const std::filesystem::path& stem);

// CSV with one row per grid point: coordinates x0..x{N-1} then the value.
void write_profile_csv(const std::filesystem::path& path, const Field& f);

}  // namespace kirchpeak
