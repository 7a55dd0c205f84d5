#pragma once

#include <optional>
#include <string>

#include "qconf/geometry.hpp"

namespace qconf {

enum class DomainKind {
    UnitSquare,    // [0,1]^2
    Diamond,       // |x| + |y| <= 1
    Disk,          // |p - center| <= radius
    CuspDomain,    // |u| + |v|^{1/alpha} <= 1
    PaperTriangle, // 0 <= y <= x <= 1
    Rect,          // [0,w] x [0,h]
    Box,           // [x0,x1] x [y0,y1], used for measure boxes
};

struct BBox {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

// A planar integration / discretization region. All kinds are vertically
// simple: for fixed x the section {y : (x,y) in D} is a single interval,
// which is what the quadrature engine slices along.
class Domain {
public:
    static Domain unit_square();
    static Domain diamond();
    static Domain disk(Vec2 center, double radius);
    static Domain cusp_domain(double alpha);
    static Domain paper_triangle();
    static Domain rect(double w, double h);
    static Domain box(double x0, double y0, double x1, double y1);

    DomainKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    Vec2 center() const { return center_; }
    double radius() const { return radius_; }

    BBox bounding_box() const;
    double area() const;

    bool contains(const Vec2& p, double tol = 0.0) const;

    /// The y-interval of the section at abscissa x, empty if the vertical
    /// line misses the domain.
    std::optional<std::array<double, 2>> y_section(double x) const;

    /// x-range over which sections are non-empty.
    std::array<double, 2> x_range() const;

    std::string to_spec_string() const;

private:
    DomainKind kind_ = DomainKind::UnitSquare;
    double alpha_ = 0.0;
    Vec2 center_;
    double radius_ = 0.0;
    BBox box_;
};

/// Parses `unitsquare`, `diamond`, `disk:r=<R>[,cx=<x>,cy=<y>]`,
/// `cusp-domain:alpha=<real>`, `paper-triangle`, `rect:WxH`.
Domain parse_domain(const std::string& spec);

} // namespace qconf
