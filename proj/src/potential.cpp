#include "kirchpeak/potential.hpp"

#include <cmath>
#include <limits>

#include "kirchpeak/errors.hpp"

namespace kirchpeak {

namespace {

constexpr double kCut = 3.0;

double bump(double r) { return r < kCut ? std::pow(1.0 - r / kCut, 3) : 0.0; }
double bump_derivative(double r) { return r < kCut ? -std::pow(1.0 - r / kCut, 2) : 0.0; }

}  // namespace

Potential Potential::wells(int dim, double top, double flatness, std::vector<Well> wells, double holder) {
    Potential v;
    v.kind_ = Kind::Wells;
    v.dim_ = dim;
    v.top_ = top;
    v.m_ = flatness;
    v.holder_ = holder;
    v.wells_ = std::move(wells);
    v.validate();
    return v;
}

Potential Potential::constant(int dim, double value, std::vector<Point> centers, double holder) {
    Potential v;
    v.kind_ = Kind::Constant;
    v.dim_ = dim;
    v.top_ = value;
    v.holder_ = holder;
    for (const Point& c : centers) {
        Well w;
        w.center = c;
        w.bottom = value;
        v.wells_.push_back(w);
    }
    v.validate();
    return v;
}

std::vector<double> Potential::peak_values() const {
    std::vector<double> out;
    for (const Well& w : wells_) out.push_back(w.bottom);
    return out;
}

double Potential::profile(std::size_t i, double t, int axis) const {
    const Well& w = wells_[i];
    const double at = std::pow(std::abs(t), m_);
    return w.curvature[axis] * at + w.skew[axis] * std::tanh(t) * at;
}

double Potential::profile_derivative(std::size_t i, double t, int axis) const {
    const Well& w = wells_[i];
    const double at = std::pow(std::abs(t), m_);
    const double dat = t == 0.0 ? 0.0 : m_ * std::pow(std::abs(t), m_ - 1.0) * (t > 0 ? 1.0 : -1.0);
    const double th = std::tanh(t);
    return w.curvature[axis] * dat + w.skew[axis] * ((1.0 - th * th) * at + th * dat);
}

double Potential::radius(std::size_t i, const Point& x) const {
    const double depth = top_ - wells_[i].bottom;
    double r = 0.0;
    for (int j = 0; j < dim_; ++j) r += profile(i, x[j] - wells_[i].center[j], j);
    return r / depth;
}

double Potential::operator()(const Point& x) const {
    if (kind_ == Kind::Constant) return top_;
    double v = top_;
    for (std::size_t i = 0; i < wells_.size(); ++i) v -= (top_ - wells_[i].bottom) * bump(radius(i, x));
    return v;
}

double Potential::gradient(const Point& x, int axis) const {
    if (kind_ == Kind::Constant) return 0.0;
    double g = 0.0;
    for (std::size_t i = 0; i < wells_.size(); ++i)
        g -= bump_derivative(radius(i, x)) * profile_derivative(i, x[axis] - wells_[i].center[axis], axis);
    return g;
}

Field Potential::sample(const GridSpec& g) const {
    require(g.dim == dim_, "potential and grid dimensions differ");
    return Field::from_function(g, [this](const Point& x) { return (*this)(x); });
}

Field Potential::sample_gradient(const GridSpec& g, int axis) const {
    require(g.dim == dim_, "potential and grid dimensions differ");
    return Field::from_function(g, [this, axis](const Point& x) { return gradient(x, axis); });
}

double Potential::inf() const {
    double v = top_;
    for (const Well& w : wells_) v = std::min(v, w.bottom);
    return v;
}

double Potential::separation() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < wells_.size(); ++i)
        for (std::size_t j = i + 1; j < wells_.size(); ++j) {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) s += std::pow(wells_[i].center[k] - wells_[j].center[k], 2);
            d = std::min(d, std::sqrt(s));
        }
    return 0.5 * d;
}

double Potential::support_radius(std::size_t i) const {
    if (kind_ == Kind::Constant) return 0.0;
    const Well& w = wells_.at(i);
    double R = 0.0;
    for (int j = 0; j < dim_; ++j)
        R = std::max(R, std::pow(kCut * (top_ - w.bottom) / (w.curvature[j] - std::abs(w.skew[j])), 1.0 / m_));
    return R;
}

void Potential::validate() const {
    require(dim_ >= 1 && dim_ <= 3, "potential dimension must be 1, 2 or 3");
    require(!wells_.empty(), "potential needs at least one peak center");
    require(holder_ > 0.0, "Hoelder exponent must be positive");
    for (const Well& w : wells_) require(w.bottom > 0.0, "potential must stay positive");
    if (kind_ == Kind::Constant) return;
    require(m_ > 1.0, "flatness exponent m must exceed 1");
    for (const Well& w : wells_) {
        require(w.bottom < top_, "well bottom must lie below the plateau value");
        for (int j = 0; j < dim_; ++j) {
            require(w.curvature[j] > 0.0, "expansion coefficients must be positive");
            require(std::abs(w.skew[j]) < w.curvature[j], "skew must be smaller than the curvature");
        }
    }
    for (std::size_t i = 0; i < wells_.size(); ++i)
        for (std::size_t k = i + 1; k < wells_.size(); ++k) {
            // Supports are contained in coordinate boxes; require the boxes
            // to be separated along some axis.
            bool apart = false;
            for (int j = 0; j < dim_; ++j)
                apart = apart || std::abs(wells_[i].center[j] - wells_[k].center[j]) >
                                     support_radius(i) + support_radius(k);
            if (!apart) throw GeometryError("well supports overlap");
        }
}

std::vector<double> Potential::remainder_ratios(std::size_t i, const Point& direction,
                                                const std::vector<double>& steps) const {
    const Well& w = wells_.at(i);
    double len = 0.0;
    for (int j = 0; j < dim_; ++j) len += direction[j] * direction[j];
    len = std::sqrt(len);
    require(len > 0.0, "direction must be nonzero");
    std::vector<double> out;
    for (double h : steps) {
        Point x = w.center;
        double model = w.bottom;
        for (int j = 0; j < dim_; ++j) {
            const double t = h * direction[j] / len;
            x[j] += t;
            if (kind_ == Kind::Wells) model += w.curvature[j] * std::pow(std::abs(t), m_);
        }
        out.push_back(std::abs((*this)(x) - model) / std::pow(std::abs(h), m_ + 1.0));
    }
    return out;
}

nlohmann::json Potential::to_json() const {
    nlohmann::json ws = nlohmann::json::array();
    for (const Well& w : wells_) {
        ws.push_back({{"center", std::vector<double>(w.center.begin(), w.center.begin() + dim_)},
                      {"bottom", w.bottom},
                      {"curvature", std::vector<double>(w.curvature.begin(), w.curvature.begin() + dim_)},
                      {"skew", std::vector<double>(w.skew.begin(), w.skew.begin() + dim_)}});
    }
    return {{"kind", kind_ == Kind::Wells ? "wells" : "constant"},
            {"dim", dim_},
            {"top", top_},
            {"flatness", m_},
            {"holder", holder_},
            {"wells", ws}};
}

Potential Potential::from_json(const nlohmann::json& j) {
    try {
        const int dim = j.at("dim").get<int>();
        const std::string kind = j.at("kind").get<std::string>();
        auto vec = [dim](const nlohmann::json& a, const char* what) {
            auto v = a.get<std::vector<double>>();
            if (static_cast<int>(v.size()) != dim) throw InputError(std::string(what) + " has the wrong length");
            std::array<double, 3> out{0.0, 0.0, 0.0};
            std::copy(v.begin(), v.end(), out.begin());
            return out;
        };
        std::vector<Well> wells;
        for (const auto& wj : j.at("wells")) {
            Well w;
            w.center = vec(wj.at("center"), "well center");
            w.bottom = wj.value("bottom", j.value("top", 1.0));
            if (wj.contains("curvature")) w.curvature = vec(wj.at("curvature"), "curvature");
            if (wj.contains("skew")) w.skew = vec(wj.at("skew"), "skew");
            wells.push_back(w);
        }
        const double holder = j.value("holder", 1.0);
        if (kind == "constant") {
            std::vector<Point> centers;
            for (const Well& w : wells) centers.push_back(w.center);
            return constant(dim, j.at("top").get<double>(), centers, holder);
        }
        if (kind == "wells")
            return Potential::wells(dim, j.at("top").get<double>(), j.value("flatness", 2.0), wells, holder);
        throw InputError("unknown potential kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed potential: ") + e.what());
    }
}

}  // namespace kirchpeak
