#include "qconf/domain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qconf/errors.hpp"

namespace qconf {

Domain Domain::unit_square() {
    Domain d;
    d.kind_ = DomainKind::UnitSquare;
    d.box_ = {0.0, 0.0, 1.0, 1.0};
    return d;
}

Domain Domain::diamond() {
    Domain d;
    d.kind_ = DomainKind::Diamond;
    d.box_ = {-1.0, -1.0, 1.0, 1.0};
    return d;
}

Domain Domain::disk(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw ParameterError("disk radius must be positive");
    Domain d;
    d.kind_ = DomainKind::Disk;
    d.center_ = center;
    d.radius_ = radius;
    d.box_ = {center.x - radius, center.y - radius, center.x + radius, center.y + radius};
    return d;
}

Domain Domain::cusp_domain(double alpha) {
    if (!(alpha > 1.0)) throw ParameterError("cusp domain requires alpha > 1");
    Domain d;
    d.kind_ = DomainKind::CuspDomain;
    d.alpha_ = alpha;
    d.box_ = {-1.0, -1.0, 1.0, 1.0};
    return d;
}

Domain Domain::paper_triangle() {
    Domain d;
    d.kind_ = DomainKind::PaperTriangle;
    d.box_ = {0.0, 0.0, 1.0, 1.0};
    return d;
}

Domain Domain::rect(double w, double h) {
    if (!(w > 0.0 && h > 0.0)) throw ParameterError("rect sides must be positive");
    Domain d;
    d.kind_ = DomainKind::Rect;
    d.box_ = {0.0, 0.0, w, h};
    return d;
}

Domain Domain::box(double x0, double y0, double x1, double y1) {
    if (!(x1 > x0 && y1 > y0)) throw ParameterError("box must have positive measure");
    Domain d;
    d.kind_ = DomainKind::Box;
    d.box_ = {x0, y0, x1, y1};
    return d;
}

BBox Domain::bounding_box() const { return box_; }

double Domain::area() const {
    switch (kind_) {
    case DomainKind::UnitSquare:
        return 1.0;
    case DomainKind::Diamond:
        return 2.0;
    case DomainKind::Disk:
        return std::numbers::pi * radius_ * radius_;
    case DomainKind::CuspDomain:
        // 4 * int_0^1 (1-u)^alpha du
        return 4.0 / (alpha_ + 1.0);
    case DomainKind::PaperTriangle:
        return 0.5;
    case DomainKind::Rect:
    case DomainKind::Box:
        return box_.width() * box_.height();
    }
    throw Error("unreachable domain kind");
}

bool Domain::contains(const Vec2& p, double tol) const {
    switch (kind_) {
    case DomainKind::UnitSquare:
    case DomainKind::Rect:
    case DomainKind::Box:
        return p.x >= box_.x0 - tol && p.x <= box_.x1 + tol && p.y >= box_.y0 - tol &&
               p.y <= box_.y1 + tol;
    case DomainKind::Diamond:
        return p.norm1() <= 1.0 + tol;
    case DomainKind::Disk:
        return (p - center_).norm() <= radius_ + tol;
    case DomainKind::CuspDomain:
        return std::abs(p.x) + std::pow(std::abs(p.y), 1.0 / alpha_) <= 1.0 + tol;
    case DomainKind::PaperTriangle:
        return p.y >= -tol && p.y <= p.x + tol && p.x <= 1.0 + tol;
    }
    throw Error("unreachable domain kind");
}

std::optional<std::array<double, 2>> Domain::y_section(double x) const {
    switch (kind_) {
    case DomainKind::UnitSquare:
    case DomainKind::Rect:
    case DomainKind::Box:
        if (x < box_.x0 || x > box_.x1) return std::nullopt;
        return std::array<double, 2>{box_.y0, box_.y1};
    case DomainKind::Diamond: {
        const double w = 1.0 - std::abs(x);
        if (w < 0.0) return std::nullopt;
        return std::array<double, 2>{-w, w};
    }
    case DomainKind::Disk: {
        const double dx = x - center_.x;
        const double s2 = radius_ * radius_ - dx * dx;
        if (s2 < 0.0) return std::nullopt;
        const double s = std::sqrt(s2);
        return std::array<double, 2>{center_.y - s, center_.y + s};
    }
    case DomainKind::CuspDomain: {
        const double w = 1.0 - std::abs(x);
        if (w < 0.0) return std::nullopt;
        const double v = std::pow(w, alpha_);
        return std::array<double, 2>{-v, v};
    }
    case DomainKind::PaperTriangle:
        if (x < 0.0 || x > 1.0) return std::nullopt;
        return std::array<double, 2>{0.0, x};
    }
    throw Error("unreachable domain kind");
}

std::array<double, 2> Domain::x_range() const { return {box_.x0, box_.x1}; }

std::string Domain::to_spec_string() const {
    std::ostringstream os;
    switch (kind_) {
    case DomainKind::UnitSquare:
        return "unitsquare";
    case DomainKind::Diamond:
        return "diamond";
    case DomainKind::Disk:
        os << "disk:r=" << radius_;
        if (center_.x != 0.0 || center_.y != 0.0)
            os << ",cx=" << center_.x << ",cy=" << center_.y;
        return os.str();
    case DomainKind::CuspDomain:
        os << "cusp-domain:alpha=" << alpha_;
        return os.str();
    case DomainKind::PaperTriangle:
        return "paper-triangle";
    case DomainKind::Rect:
        os << "rect:" << box_.x1 << "x" << box_.y1;
        return os.str();
    case DomainKind::Box:
        os << "box:" << box_.x0 << "," << box_.y0 << "," << box_.x1 << "," << box_.y1;
        return os.str();
    }
    throw Error("unreachable domain kind");
}

namespace {

double parse_real(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParameterError("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParameterError("cannot parse " + what + " from '" + s + "'");
    }
}

} // namespace

Domain parse_domain(const std::string& spec) {
    if (spec == "unitsquare") return Domain::unit_square();
    if (spec == "diamond") return Domain::diamond();
    if (spec == "paper-triangle") return Domain::paper_triangle();
    if (spec.rfind("cusp-domain:alpha=", 0) == 0)
        return Domain::cusp_domain(parse_real(spec.substr(18), "alpha"));
    if (spec.rfind("disk:", 0) == 0) {
        double r = 0.0, cx = 0.0, cy = 0.0;
        bool have_r = false;
        std::stringstream ss(spec.substr(5));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.rfind("r=", 0) == 0) {
                r = parse_real(item.substr(2), "radius");
                have_r = true;
            } else if (item.rfind("cx=", 0) == 0) {
                cx = parse_real(item.substr(3), "cx");
            } else if (item.rfind("cy=", 0) == 0) {
                cy = parse_real(item.substr(3), "cy");
            } else {
                throw ParameterError("unknown disk parameter '" + item + "'");
            }
        }
        if (!have_r) throw ParameterError("disk spec requires r=<radius>");
        return Domain::disk({cx, cy}, r);
    }
    if (spec.rfind("rect:", 0) == 0) {
        const std::string rest = spec.substr(5);
        const auto xpos = rest.find('x');
        if (xpos == std::string::npos)
            throw ParameterError("rect spec must be rect:WxH");
        return Domain::rect(parse_real(rest.substr(0, xpos), "width"),
                            parse_real(rest.substr(xpos + 1), "height"));
    }
    throw ParameterError("unknown domain spec '" + spec + "'");
}

} // namespace qconf
