#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "kirchpeak/grid.hpp"

namespace kirchpeak {

using cplx = std::complex<double>;

// Real field sampled on a periodic grid. The half-spectrum is computed on
// first request and shared between copies; any mutation drops it.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& grid);
    Field(const GridSpec& grid, std::vector<double> values);

    static Field from_function(const GridSpec& grid, const std::function<double(const Point&)>& f);
    // Builds a field from half-spectrum coefficients (unnormalized convention).
    static Field from_spectrum(const GridSpec& grid, const std::vector<cplx>& coeffs);

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    // Mutable access; drops the cached spectrum.
    std::vector<double>& mutable_values();
    void set(std::size_t i, double v);

    const std::vector<cplx>& spectrum() const;
    bool has_spectrum() const;

    // Same samples relabelled on another grid with the same lattice shape.
    Field relabel(const GridSpec& grid) const;

    // Throws DomainError when any value is NaN or infinite.
    void check_finite(const char* what) const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double c);
    // y += c * x
    Field& axpy(double c, const Field& x);

    double max() const;
    double min() const;
    double sup_norm() const;

private:
    struct Cache {
        std::once_flag once;
        std::vector<cplx> coeffs;
    };
    GridSpec grid_;
    std::vector<double> values_;
    std::shared_ptr<Cache> cache_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double c, Field a);
Field operator*(Field a, double c);
// Pointwise product.
Field hadamard(const Field& a, const Field& b);
// Pointwise map.
Field map(const Field& a, const std::function<double(double)>& f);

void require_same_grid(const Field& a, const Field& b, const char* where);

}  // namespace kirchpeak
