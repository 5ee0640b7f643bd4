#include "kirchpeak/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "kirchpeak/errors.hpp"

namespace kirchpeak {

namespace {
std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}
}  // namespace

double ProblemParams::critical_power() const {
    if (2.0 * s >= dim) return std::numeric_limits<double>::infinity();
    return 2.0 * dim / (dim - 2.0 * s) - 1.0;
}

void ProblemParams::validate() const {
    require(dim >= 1 && dim <= 3, "dimension N must be 1, 2 or 3");
    require(std::isfinite(s) && s > 0.0 && s <= 1.0, "fractional order s must lie in (0, 1], got " + num(s));
    require(s < 1.0 || validation_mode,
            "s = 1 (classical limit) is accepted only in validation mode");
    require(std::isfinite(a) && a > 0.0, "Kirchhoff coefficient a must be positive, got " + num(a));
    require(std::isfinite(b) && b >= 0.0, "Kirchhoff coefficient b must be nonnegative, got " + num(b));
    const double pc = critical_power();
    require(std::isfinite(p) && p > 1.0 && p < pc,
            "exponent p must lie in the subcritical window 1 < p < 2N/(N-2s) - 1 = " + num(pc) + ", got " + num(p));
    if (b > 0.0 && s < 1.0) {
        require(4.0 * s > dim, "with b > 0 the order must satisfy N/4 < s (4s > N); got N=" + std::to_string(dim) +
                                   ", s=" + num(s));
        require(2.0 * s < dim, "with b > 0 the order must satisfy 2s < N; got N=" + std::to_string(dim) + ", s=" + num(s));
    }
}

std::string ProblemParams::describe() const {
    std::ostringstream os;
    os << "N=" << dim << " s=" << s << " p=" << p << " a=" << a << " b=" << b;
    return os.str();
}

}  // namespace kirchpeak
