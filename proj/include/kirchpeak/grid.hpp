#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace kirchpeak {

using Point = std::array<double, 3>;

// Periodic tensor grid on the box center + [-L, L)^N with M points per axis.
// Storage is row-major with the last axis fastest, matching the FFT layout.
struct GridSpec {
    int dim = 1;
    double half_width = 1.0;
    int points = 16;
    Point center{0.0, 0.0, 0.0};

    GridSpec() = default;
    GridSpec(int dim_, double half_width_, int points_, Point center_ = {0.0, 0.0, 0.0});

    void validate() const;

    double spacing() const { return 2.0 * half_width / points; }
    std::size_t size() const;
    // Number of complex coefficients in the half-spectrum layout.
    std::size_t spectral_size() const;
    double cell_volume() const;
    double box_volume() const;

    // Coordinate of index i along axis `axis`.
    double coordinate(int axis, int i) const {
        return center[axis] - half_width + i * spacing();
    }
    // Physical point of a flat index.
    Point point(std::size_t flat) const;
    // Flat index of the grid point closest to the center (the "origin" node).
    std::size_t center_index() const;
    // Wavenumber (pi/L)*k of index i along an axis; `last` selects the
    // half-spectrum axis where indices run 0..M/2.
    double wavenumber(int i, bool last) const;
    bool is_nyquist(int i, bool last) const;

    // Same lattice with a new center and a half-width scaled by `factor`.
    GridSpec rescaled(double factor, Point new_center) const;

    bool same_lattice(const GridSpec& o) const;
    bool operator==(const GridSpec& o) const;
    std::string describe() const;
};

}  // namespace kirchpeak
