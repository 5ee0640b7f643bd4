#pragma once

#include <vector>

#include <json.hpp>

#include "kirchpeak/field.hpp"

namespace kirchpeak {

// One compactly supported well. Near its center the potential is
//   V(center) + sum_j c_j |t_j|^m + d_j tanh(t_j) |t_j|^m,   t = x - center,
// so the skew d_j only enters at order m + 1.
struct Well {
    Point center{0.0, 0.0, 0.0};
    double bottom = 1.0;                       // V(center)
    std::array<double, 3> curvature{1.0, 1.0, 1.0};  // c_j > 0
    std::array<double, 3> skew{0.0, 0.0, 0.0};       // |d_j| < c_j
};

// V = top - sum_i (top - bottom_i) B(r_i), B(r) = (1 - r/3)^3 on [0, 3),
// with r_i = sum_j g_ij(x_j - center_ij) / (top - bottom_i). A `constant`
// potential equals its value everywhere but still records peak centers.
class Potential {
public:
    enum class Kind { Wells, Constant };

    static Potential wells(int dim, double top, double flatness, std::vector<Well> wells, double holder);
    static Potential constant(int dim, double value, std::vector<Point> centers, double holder = 1.0);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    std::size_t peaks() const { return wells_.size(); }
    const Well& well(std::size_t i) const { return wells_.at(i); }
    const Point& center(std::size_t i) const { return wells_.at(i).center; }
    double peak_value(std::size_t i) const { return wells_.at(i).bottom; }
    std::vector<double> peak_values() const;
    double flatness() const { return m_; }
    double holder() const { return holder_; }
    double top() const { return top_; }

    double operator()(const Point& x) const;
    double gradient(const Point& x, int axis) const;
    Field sample(const GridSpec& g) const;
    Field sample_gradient(const GridSpec& g, int axis) const;

    double inf() const;
    double sup() const { return top_; }
    // Half of the smallest distance between well centers (infinite for one well).
    double separation() const;
    // Half-width of the coordinate box outside which well i vanishes.
    double support_radius(std::size_t i) const;

    // Throws GeometryError or ParameterError when an admissibility condition
    // fails: positivity, strict local minimum at each center, disjoint
    // supports, and the order of the local expansion remainder.
    void validate() const;
    // |V(a + h e) - V(a) - sum_j c_j |h e_j|^m| / |h|^{m+1} along `direction`
    // for each step in `steps`.
    std::vector<double> remainder_ratios(std::size_t i, const Point& direction, const std::vector<double>& steps) const;

    nlohmann::json to_json() const;
    static Potential from_json(const nlohmann::json& j);

private:
    Kind kind_ = Kind::Constant;
    int dim_ = 1;
    double top_ = 1.0;
    double m_ = 2.0;
    double holder_ = 1.0;
    std::vector<Well> wells_;

    double profile(std::size_t i, double t, int axis) const;
    double profile_derivative(std::size_t i, double t, int axis) const;
    double radius(std::size_t i, const Point& x) const;
};

}  // namespace kirchpeak
