#include "kirchpeak/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "kirchpeak/errors.hpp"

namespace kirchpeak {

GridSpec::GridSpec(int dim_, double half_width_, int points_, Point center_)
    : dim(dim_), half_width(half_width_), points(points_), center(center_) {
    validate();
}

void GridSpec::validate() const {
    require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
    require(std::isfinite(half_width) && half_width > 0.0, "grid half_width must be positive");
    require(points >= 16 && points % 2 == 0, "grid points_per_dim must be even and at least 16");
    for (int d = 0; d < 3; ++d) require(std::isfinite(center[d]), "grid center must be finite");
}

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points);
    return n;
}

std::size_t GridSpec::spectral_size() const {
    return size() / static_cast<std::size_t>(points) * static_cast<std::size_t>(points / 2 + 1);
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }
double GridSpec::box_volume() const { return std::pow(2.0 * half_width, dim); }

Point GridSpec::point(std::size_t flat) const {
    Point x{0.0, 0.0, 0.0};
    for (int d = dim - 1; d >= 0; --d) {
        const int i = static_cast<int>(flat % static_cast<std::size_t>(points));
        flat /= static_cast<std::size_t>(points);
        x[d] = coordinate(d, i);
    }
    return x;
}

std::size_t GridSpec::center_index() const {
    std::size_t idx = 0;
    for (int d = 0; d < dim; ++d) idx = idx * static_cast<std::size_t>(points) + static_cast<std::size_t>(points / 2);
    return idx;
}

double GridSpec::wavenumber(int i, bool last) const {
    const int k = (last || i < points / 2) ? i : i - points;
    return std::numbers::pi / half_width * k;
}

bool GridSpec::is_nyquist(int i, bool /*last*/) const { return i == points / 2; }

GridSpec GridSpec::rescaled(double factor, Point new_center) const {
    return GridSpec(dim, half_width * factor, points, new_center);
}

bool GridSpec::same_lattice(const GridSpec& o) const {
    return dim == o.dim && points == o.points;
}

bool GridSpec::operator==(const GridSpec& o) const {
    if (dim != o.dim || points != o.points || half_width != o.half_width) return false;
    for (int d = 0; d < dim; ++d)
        if (center[d] != o.center[d]) return false;
    return true;
}

std::string GridSpec::describe() const {
    std::ostringstream os;
    os << "grid(N=" << dim << ", L=" << half_width << ", M=" << points << ")";
    return os.str();
}

}  // namespace kirchpeak
