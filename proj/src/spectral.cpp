#include "kirchpeak/spectral.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <tuple>

#include "kirchpeak/errors.hpp"

namespace kirchpeak::spectral {
namespace {

// Calls fn(flat_index, idx) for every entry of the half spectrum, where
// idx[d] is the storage index along axis d (last axis runs 0..M/2).
template <class Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
    const int M = g.points;
    const int H = M / 2 + 1;
    int idx[3] = {0, 0, 0};
    std::size_t flat = 0;
    if (g.dim == 1) {
        for (idx[0] = 0; idx[0] < H; ++idx[0]) fn(flat++, idx);
    } else if (g.dim == 2) {
        for (idx[0] = 0; idx[0] < M; ++idx[0])
            for (idx[1] = 0; idx[1] < H; ++idx[1]) fn(flat++, idx);
    } else {
        for (idx[0] = 0; idx[0] < M; ++idx[0])
            for (idx[1] = 0; idx[1] < M; ++idx[1])
                for (idx[2] = 0; idx[2] < H; ++idx[2]) fn(flat++, idx);
    }
}

double xi_sq(const GridSpec& g, const int* idx) {
    double r = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        const double k = g.wavenumber(idx[d], d == g.dim - 1);
        r += k * k;
    }
    return r;
}

// Multiplier tables |xi|^e are reused across calls on the same lattice.
const std::vector<double>& power_table(const GridSpec& g, double e) {
    using Key = std::tuple<int, int, double, double>;
    thread_local std::map<Key, std::vector<double>> cache;
    Key key{g.dim, g.points, g.half_width, e};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() > 32) cache.clear();
    std::vector<double> t(g.spectral_size());
    for_each_mode(g, [&](std::size_t i, const int* idx) {
        const double r2 = xi_sq(g, idx);
        t[i] = r2 == 0.0 ? 0.0 : std::pow(r2, 0.5 * e);
    });
    return cache.emplace(key, std::move(t)).first->second;
}

Field apply_table(const Field& f, const std::vector<double>& t) {
    const auto& c = f.spectrum();
    std::vector<cplx> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] * t[i];
    return Field::from_spectrum(f.grid(), out);
}

// Weight of a half-spectrum entry in Parseval sums.
double parseval_weight(const GridSpec& g, const int* idx) {
    const int last = idx[g.dim - 1];
    return (last == 0 || last == g.points / 2) ? 1.0 : 2.0;
}

}  // namespace

void check_order(double s) {
    if (!(s > 0.0 && s <= 1.0)) throw ParameterError("fractional order s must lie in (0, 1], got " + std::to_string(s));
}

Field fractional_laplacian(const Field& f, double s) {
    check_order(s);
    f.check_finite("fractional_laplacian");
    return apply_table(f, power_table(f.grid(), 2.0 * s));
}

Field half_laplacian(const Field& f, double s) {
    check_order(s);
    f.check_finite("half_laplacian");
    return apply_table(f, power_table(f.grid(), s));
}

Field invert_shifted(const Field& g, double c, double s) { return invert_shifted(g, c, s, 1.0); }

Field invert_shifted(const Field& g, double c, double s, double m) {
    check_order(s);
    if (!(c > 0.0)) throw ParameterError("invert_shifted requires c > 0");
    if (!(m > 0.0)) throw ParameterError("invert_shifted requires a positive mass");
    g.check_finite("invert_shifted");
    const auto& t = power_table(g.grid(), 2.0 * s);
    const auto& coeffs = g.spectrum();
    std::vector<cplx> out(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = coeffs[i] / (c * t[i] + m);
    return Field::from_spectrum(g.grid(), out);
}

double integrate(const Field& f) {
    f.check_finite("integrate");
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    return sum * f.grid().cell_volume();
}

double inner(const Field& f, const Field& g) {
    require_same_grid(f, g, "inner");
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
    return sum * f.grid().cell_volume();
}

double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

double norm_lq(const Field& f, double q) {
    if (!(q >= 1.0)) throw ParameterError("L^q norm requires q >= 1");
    double sum = 0.0;
    for (double v : f.values()) sum += std::pow(std::abs(v), q);
    return std::pow(sum * f.grid().cell_volume(), 1.0 / q);
}

double dot_half(const Field& f, const Field& g, double s) {
    check_order(s);
    require_same_grid(f, g, "dot_half");
    const GridSpec& gr = f.grid();
    const auto& t = power_table(gr, 2.0 * s);
    const auto& a = f.spectrum();
    const auto& b = g.spectrum();
    double sum = 0.0;
    for_each_mode(gr, [&](std::size_t i, const int* idx) {
        sum += parseval_weight(gr, idx) * t[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
    });
    return sum * gr.cell_volume() / static_cast<double>(gr.size());
}

double seminorm_sq(const Field& f, double s) { return dot_half(f, f, s); }

Field derivative(const Field& f, int axis) {
    const GridSpec& g = f.grid();
    if (axis < 0 || axis >= g.dim) throw ParameterError("derivative axis out of range");
    const auto& c = f.spectrum();
    std::vector<cplx> out(c.size());
    for_each_mode(g, [&](std::size_t i, const int* idx) {
        const bool last = axis == g.dim - 1;
        if (g.is_nyquist(idx[axis], last)) {
            out[i] = 0.0;
        } else {
            out[i] = c[i] * cplx(0.0, g.wavenumber(idx[axis], last));
        }
    });
    return Field::from_spectrum(g, out);
}

Field translate(const Field& f, const Point& shift) {
    const GridSpec& g = f.grid();
    const auto& c = f.spectrum();
    // Per-axis phase factors; the Nyquist mode uses the cosine so that the
    // shifted field stays real.
    std::vector<std::vector<cplx>> phase(g.dim);
    for (int d = 0; d < g.dim; ++d) {
        const bool last = d == g.dim - 1;
        const int n = last ? g.points / 2 + 1 : g.points;
        phase[d].resize(n);
        for (int i = 0; i < n; ++i) {
            const double arg = g.wavenumber(i, last) * shift[d];
            phase[d][i] = g.is_nyquist(i, last) ? cplx(std::cos(arg), 0.0) : std::polar(1.0, -arg);
        }
    }
    std::vector<cplx> out(c.size());
    for_each_mode(g, [&](std::size_t i, const int* idx) {
        cplx ph = phase[0][idx[0]];
        for (int d = 1; d < g.dim; ++d) ph *= phase[d][idx[d]];
        out[i] = c[i] * ph;
    });
    return Field::from_spectrum(g, out);
}

Field reflect(const Field& f) {
    const GridSpec& g = f.grid();
    const std::size_t M = static_cast<std::size_t>(g.points);
    std::vector<double> out(f.size());
    auto mirror = [M](std::size_t i) { return (M - i) % M; };
    if (g.dim == 1) {
        for (std::size_t i = 0; i < M; ++i) out[mirror(i)] = f[i];
    } else if (g.dim == 2) {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j) out[mirror(i) * M + mirror(j)] = f[i * M + j];
    } else {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j)
                for (std::size_t k = 0; k < M; ++k)
                    out[(mirror(i) * M + mirror(j)) * M + mirror(k)] = f[(i * M + j) * M + k];
    }
    return Field(g, std::move(out));
}

Field symmetrize(const Field& f) {
    Field r = reflect(f);
    r += f;
    r *= 0.5;
    return r;
}

std::vector<double> interpolate(const Field& f, const std::vector<Point>& points) {
    const GridSpec& g = f.grid();
    const auto& c = f.spectrum();
    const double norm = 1.0 / static_cast<double>(g.size());
    std::vector<double> out(points.size());
    std::vector<std::vector<cplx>> ph(g.dim);
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (int d = 0; d < g.dim; ++d) {
            const bool last = d == g.dim - 1;
            const int n = last ? g.points / 2 + 1 : g.points;
            ph[d].resize(n);
            const double rel = points[p][d] - (g.center[d] - g.half_width);
            for (int i = 0; i < n; ++i) ph[d][i] = std::polar(1.0, g.wavenumber(i, last) * rel);
        }
        double sum = 0.0;
        for_each_mode(g, [&](std::size_t i, const int* idx) {
            cplx e = ph[0][idx[0]];
            for (int d = 1; d < g.dim; ++d) e *= ph[d][idx[d]];
            sum += parseval_weight(g, idx) * (c[i] * e).real();
        });
        out[p] = sum * norm;
    }
    return out;
}

Field apply_radial_multiplier(const Field& f, const std::function<double(double)>& m) {
    const GridSpec& g = f.grid();
    const auto& c = f.spectrum();
    std::vector<cplx> out(c.size());
    for_each_mode(g, [&](std::size_t i, const int* idx) { out[i] = c[i] * m(std::sqrt(xi_sq(g, idx))); });
    return Field::from_spectrum(g, out);
}

Field random_band_limited(const GridSpec& g, int kmax, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<cplx> coeffs(g.spectral_size(), 0.0);
    for_each_mode(g, [&](std::size_t i, const int* idx) {
        bool inside = true;
        for (int d = 0; d < g.dim; ++d) {
            const bool last = d == g.dim - 1;
            const int k = (last || idx[d] < g.points / 2) ? idx[d] : idx[d] - g.points;
            if (std::abs(k) > kmax) inside = false;
        }
        const double re = uni(rng);
        const double im = uni(rng);
        if (inside) coeffs[i] = cplx(re, im);
    });
    Field f = Field::from_spectrum(g, coeffs);
    const double m = f.sup_norm();
    if (m > 0.0) f *= 1.0 / m;
    return f;
}

}  // namespace kirchpeak::spectral
