#include "kirchpeak/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "kirchpeak/errors.hpp"

namespace kirchpeak {

Field::Field(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) { grid_.validate(); }

Field::Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.size())
        throw ShapeError("field value count " + std::to_string(values_.size()) + " does not match " +
                         grid_.describe());
}

Field Field::from_function(const GridSpec& grid, const std::function<double(const Point&)>& f) {
    Field out(grid);
    for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] = f(grid.point(i));
    return out;
}

Field Field::from_spectrum(const GridSpec& grid, const std::vector<cplx>& coeffs) {
    if (coeffs.size() != grid.spectral_size()) throw ShapeError("spectrum size does not match grid");
    Field out(grid);
    // The spectrum is not cached here: the supplied coefficients need not be
    // Hermitian-consistent, so it is recomputed from the samples on demand.
    detail::backward(grid, coeffs.data(), out.values_.data());
    return out;
}

std::vector<double>& Field::mutable_values() {
    cache_.reset();
    return values_;
}

void Field::set(std::size_t i, double v) {
    cache_.reset();
    values_[i] = v;
}

const std::vector<cplx>& Field::spectrum() const {
    // The shared_ptr is replaced only by mutating members, which must not run
    // concurrently with const access; call_once guards concurrent readers.
    auto cache = std::atomic_load(&cache_);
    if (!cache) {
        auto fresh = std::make_shared<Cache>();
        std::shared_ptr<Cache> expected;
        auto* self = const_cast<Field*>(this);
        if (!std::atomic_compare_exchange_strong(&self->cache_, &expected, fresh)) fresh = expected;
        cache = fresh;
    }
    std::call_once(cache->once, [&] {
        cache->coeffs.resize(grid_.spectral_size());
        detail::forward(grid_, values_.data(), cache->coeffs.data());
    });
    return cache->coeffs;
}

bool Field::has_spectrum() const { return static_cast<bool>(std::atomic_load(&cache_)); }

Field Field::relabel(const GridSpec& grid) const {
    if (!grid.same_lattice(grid_)) throw ShapeError("relabel requires the same lattice shape");
    Field out = *this;
    out.grid_ = grid;
    return out;
}

void Field::check_finite(const char* what) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw DomainError(std::string(what) + ": non-finite value at index " + std::to_string(i));
}

Field& Field::operator+=(const Field& o) {
    require_same_grid(*this, o, "field addition");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    cache_.reset();
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(*this, o, "field subtraction");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    cache_.reset();
    return *this;
}

Field& Field::operator*=(double c) {
    for (double& v : values_) v *= c;
    cache_.reset();
    return *this;
}

Field& Field::axpy(double c, const Field& x) {
    require_same_grid(*this, x, "axpy");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * x.values_[i];
    cache_.reset();
    return *this;
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }
Field operator*(Field a, double c) { return a *= c; }

Field hadamard(const Field& a, const Field& b) {
    require_same_grid(a, b, "pointwise product");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
    return Field(a.grid(), std::move(v));
}

Field map(const Field& a, const std::function<double(double)>& f) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a[i]);
    return Field(a.grid(), std::move(v));
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
    if (!(a.grid() == b.grid()))
        throw ShapeError(std::string(where) + ": grid mismatch " + a.grid().describe() + " vs " +
                         b.grid().describe());
}

}  // namespace kirchpeak
