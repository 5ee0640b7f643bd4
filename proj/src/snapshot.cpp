#include "kirchpeak/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "kirchpeak/errors.hpp"

namespace kirchpeak {
namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
    return std::filesystem::path(stem.string() + ext);
}

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

}  // namespace

json grid_to_json(const GridSpec& g) {
    return json{{"dim", g.dim},
                {"half_width", g.half_width},
                {"points", g.points},
                {"center", std::vector<double>(g.center.begin(), g.center.begin() + g.dim)}};
}

GridSpec grid_from_json(const json& j) {
    try {
        Point c{0.0, 0.0, 0.0};
        const int dim = j.at("dim").get<int>();
        if (j.contains("center")) {
            auto v = j.at("center").get<std::vector<double>>();
            if (static_cast<int>(v.size()) != dim) throw InputError("grid center has the wrong length");
            std::copy(v.begin(), v.end(), c.begin());
        }
        return GridSpec(dim, j.at("half_width").get<double>(), j.at("points").get<int>(), c);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed grid: ") + e.what());
    }
}

void write_snapshot(const std::filesystem::path& stem, const Field& f, const json& meta) {
    std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) throw InputError("cannot open " + with_suffix(stem, ".bin").string() + " for writing");
    for (double v : f.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        bits = to_little(bits);
        bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    json side = meta;
    side["grid"] = grid_to_json(f.grid());
    side["shape"] = std::vector<int>(f.grid().dim, f.grid().points);
    side["dtype"] = "float64";
    side["byte_order"] = "little";
    side["order"] = "row-major, last axis fastest";
    std::ofstream js(with_suffix(stem, ".json"));
    js << std::setw(2) << side << '\n';
    if (!bin || !js) throw InputError("failed writing snapshot " + stem.string());
}

Snapshot read_snapshot(const std::filesystem::path& stem) {
    std::ifstream js(with_suffix(stem, ".json"));
    if (!js) throw InputError("missing snapshot sidecar " + with_suffix(stem, ".json").string());
    json side;
    try {
        js >> side;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed snapshot sidecar: ") + e.what());
    }
    if (side.value("byte_order", "") != "little" || side.value("dtype", "") != "float64")
        throw InputError("unsupported snapshot encoding");
    GridSpec g = grid_from_json(side.at("grid"));
    std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) throw InputError("missing snapshot data " + with_suffix(stem, ".bin").string());
    std::vector<double> v(g.size());
    for (double& x : v) {
        std::uint64_t bits;
        if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw ShapeError("snapshot data is truncated");
        bits = to_little(bits);
        std::memcpy(&x, &bits, sizeof bits);
    }
    if (bin.peek() != std::char_traits<char>::eof()) throw ShapeError("snapshot data is longer than its grid");
    return {Field(g, std::move(v)), side};
}

void write_profile_csv(const std::filesystem::path& path, const Field& f) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    const GridSpec& g = f.grid();
    for (int d = 0; d < g.dim; ++d) out << 'x' << d << ',';
    out << "value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point x = g.point(i);
        for (int d = 0; d < g.dim; ++d) out << x[d] << ',';
        out << f[i] << '\n';
    }
}

}  // namespace kirchpeak
