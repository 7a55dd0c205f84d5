#include "qconf/mapping.hpp"

#include <cmath>
#include <sstream>

#include "qconf/errors.hpp"

namespace qconf {

namespace {

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

// l(x,y) = sqrt(x^2+y^2) / (|x|+|y|), the radial stretch of the
// disk-to-diamond map. Defined away from the origin.
double radial_l(const Vec2& p) {
    return p.norm() / p.norm1();
}

Vec2 radial_forward(const Vec2& p) {
    const double l = radial_l(p);
    return {l * p.x, l * p.y};
}

Vec2 radial_inverse(const Vec2& p) {
    // Same angle, radius scaled back: (u,v) * (|u|+|v|) / sqrt(u^2+v^2).
    const double s = p.norm1() / p.norm();
    return {s * p.x, s * p.y};
}

Mat2 radial_derivative(const Vec2& p) {
    const double r = p.norm();
    const double m = p.norm1();
    const double l = r / m;
    const double rm = r * m;
    const double m2 = m * m;
    const double sx = sgn(p.x), sy = sgn(p.y);
    return {l + p.x * p.x / rm - r * std::abs(p.x) / m2,
            p.x * p.y / rm - r * p.x * sy / m2,
            p.x * p.y / rm - r * p.y * sx / m2,
            l + p.y * p.y / rm - r * std::abs(p.y) / m2};
}

} // namespace

PlanarMap PlanarMap::identity() { return PlanarMap{}; }

PlanarMap PlanarMap::affine(const Mat2& m, const Vec2& t) {
    if (!(std::abs(m.det()) > 0.0) || !std::isfinite(m.det()))
        throw ParameterError("affine map must be invertible (|det| > 0)");
    PlanarMap map;
    map.kind_ = MapKind::Affine;
    map.matrix_ = m;
    map.translation_ = t;
    return map;
}

PlanarMap PlanarMap::holder_cusp(double alpha) {
    if (!(alpha > 1.0) || !std::isfinite(alpha))
        throw ParameterError("cusp map requires alpha > 1");
    PlanarMap map;
    map.kind_ = MapKind::HolderCusp;
    map.alpha_ = alpha;
    return map;
}

PlanarMap PlanarMap::radial_square_disk() {
    PlanarMap map;
    map.kind_ = MapKind::RadialSquareDisk;
    return map;
}

PlanarMap PlanarMap::composition(std::vector<PlanarMap> parts) {
    if (parts.empty())
        throw ParameterError("composition requires at least one map");
    if (parts.size() == 1) return parts.front();
    PlanarMap map;
    map.kind_ = MapKind::Composition;
    map.parts_ = std::move(parts);
    return map;
}

bool PlanarMap::in_natural_domain(const Vec2& p, double tol) const {
    if (!p.finite()) return false;
    switch (kind_) {
    case MapKind::Identity:
    case MapKind::Affine:
        return true;
    case MapKind::HolderCusp:
        if (!inverted_) return p.norm1() <= 1.0 + tol;
        return std::abs(p.x) + std::pow(std::abs(p.y), 1.0 / alpha_) <= 1.0 + tol;
    case MapKind::RadialSquareDisk:
        if (!inverted_) return p.norm() <= 1.0 + tol;
        return p.norm1() <= 1.0 + tol;
    case MapKind::Composition: {
        Vec2 q = p;
        for (const auto& part : parts_) {
            if (!part.in_natural_domain(q, tol)) return false;
            q = part.evaluate(q);
        }
        return true;
    }
    }
    return false;
}

Vec2 PlanarMap::evaluate(const Vec2& p) const {
    if (!in_natural_domain(p))
        throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside the natural domain of " + to_spec_string());
    switch (kind_) {
    case MapKind::Identity:
        return p;
    case MapKind::Affine:
        return inverted_ ? matrix_.inverse().apply(p - translation_)
                         : matrix_.apply(p) + translation_;
    case MapKind::HolderCusp:
        if (!inverted_) return {p.x, sgn(p.y) * std::pow(std::abs(p.y), alpha_)};
        return {p.x, sgn(p.y) * std::pow(std::abs(p.y), 1.0 / alpha_)};
    case MapKind::RadialSquareDisk: {
        if (p.x == 0.0 && p.y == 0.0) return {0.0, 0.0};
        return inverted_ ? radial_inverse(p) : radial_forward(p);
    }
    case MapKind::Composition: {
        Vec2 q = p;
        for (const auto& part : parts_) q = part.evaluate(q);
        return q;
    }
    }
    throw Error("unreachable map kind");
}

bool PlanarMap::is_singular_at(const Vec2& p) const {
    switch (kind_) {
    case MapKind::Identity:
    case MapKind::Affine:
        return false;
    case MapKind::HolderCusp:
        return p.y == 0.0;
    case MapKind::RadialSquareDisk:
        return p.x == 0.0 || p.y == 0.0;
    case MapKind::Composition: {
        Vec2 q = p;
        for (const auto& part : parts_) {
            if (part.is_singular_at(q)) return true;
            q = part.evaluate(q);
        }
        return false;
    }
    }
    return false;
}

Mat2 PlanarMap::derivative(const Vec2& p) const {
    if (!in_natural_domain(p))
        throw DomainError("derivative requested outside the natural domain");
    switch (kind_) {
    case MapKind::Identity:
        return Mat2::identity();
    case MapKind::Affine:
        return inverted_ ? matrix_.inverse() : matrix_;
    case MapKind::HolderCusp: {
        if (!inverted_) {
            if (p.y == 0.0)
                throw SingularityError("cusp map derivative degenerates on the axis y = 0");
            return Mat2::diag(1.0, alpha_ * std::pow(std::abs(p.y), alpha_ - 1.0));
        }
        if (p.y == 0.0)
            throw SingularityError("inverse cusp map derivative is singular on the axis");
        const Vec2 src = evaluate(p);
        return Mat2::diag(1.0, alpha_ * std::pow(std::abs(src.y), alpha_ - 1.0)).inverse();
    }
    case MapKind::RadialSquareDisk: {
        if (p.x == 0.0 || p.y == 0.0)
            throw SingularityError("radial map derivative does not exist on the coordinate axes");
        if (!inverted_) return radial_derivative(p);
        return radial_derivative(evaluate(p)).inverse();
    }
    case MapKind::Composition: {
        Vec2 q = p;
        Mat2 chain = Mat2::identity();
        for (const auto& part : parts_) {
            chain = part.derivative(q) * chain;
            q = part.evaluate(q);
        }
        return chain;
    }
    }
    throw Error("unreachable map kind");
}

bool PlanarMap::has_analytic_inverse() const {
    if (kind_ != MapKind::Composition) return true;
    for (const auto& part : parts_)
        if (!part.has_analytic_inverse()) return false;
    return true;
}

PlanarMap PlanarMap::inverse() const {
    switch (kind_) {
    case MapKind::Identity:
        return identity();
    case MapKind::Affine: {
        const Mat2 inv = matrix_.inverse();
        return affine(inv, {-inv.apply(translation_).x, -inv.apply(translation_).y});
    }
    case MapKind::HolderCusp:
    case MapKind::RadialSquareDisk: {
        PlanarMap map = *this;
        map.inverted_ = !inverted_;
        return map;
    }
    case MapKind::Composition: {
        std::vector<PlanarMap> rev;
        rev.reserve(parts_.size());
        for (auto it = parts_.rbegin(); it != parts_.rend(); ++it)
            rev.push_back(it->inverse());
        return composition(std::move(rev));
    }
    }
    throw Error("unreachable map kind");
}

std::string PlanarMap::to_spec_string() const {
    std::ostringstream os;
    if (inverted_) os << "inverse-of:";
    switch (kind_) {
    case MapKind::Identity:
        os << "identity";
        break;
    case MapKind::Affine:
        os << "affine:" << matrix_.a << "," << matrix_.b << "," << matrix_.c << ","
           << matrix_.d;
        if (translation_.x != 0.0 || translation_.y != 0.0)
            os << "," << translation_.x << "," << translation_.y;
        break;
    case MapKind::HolderCusp:
        os << "cusp:alpha=" << alpha_;
        break;
    case MapKind::RadialSquareDisk:
        os << "radial";
        break;
    case MapKind::Composition: {
        os << "compose(";
        for (size_t i = 0; i < parts_.size(); ++i) {
            if (i) os << ";";
            os << parts_[i].to_spec_string();
        }
        os << ")";
        break;
    }
    }
    return os.str();
}

JacobianData jacobian(const PlanarMap& map, const Vec2& p) {
    const Mat2 m = map.derivative(p);
    const auto sv = m.singular_values();
    JacobianData data;
    data.matrix = m;
    data.det = m.det();
    data.norm_spectral = sv[0];
    data.norm_frobenius = m.frobenius();
    data.min_stretch = sv[1];
    return data;
}

namespace {

// A stage where J -> 0 smoothly (the cusp axis) gets the finite-distortion
// value 0; a stage where the derivative simply does not exist (radial axes)
// is a hard error.
bool hits_degenerate_axis(const PlanarMap& map, const Vec2& p) {
    switch (map.kind()) {
    case MapKind::HolderCusp:
        return p.y == 0.0;
    case MapKind::Composition: {
        Vec2 q = p;
        for (const auto& part : map.parts()) {
            if (part.kind() == MapKind::RadialSquareDisk && part.is_singular_at(q))
                return false;
            if (hits_degenerate_axis(part, q)) return true;
            if (part.is_singular_at(q)) return false;
            q = part.evaluate(q);
        }
        return false;
    }
    default:
        return false;
    }
}

} // namespace

double dilatation(const PlanarMap& map, const Vec2& p, const DilatationKind& kind,
                  NormConvention convention) {
    if ((kind.tag == DilatationTag::PDil || kind.tag == DilatationTag::Hq) &&
        !(kind.exponent >= 1.0 && std::isfinite(kind.exponent)))
        throw ParameterError("dilatation exponent must lie in [1, inf)");

    if (map.is_singular_at(p)) {
        if (hits_degenerate_axis(map, p)) return 0.0;
        throw SingularityError("dilatation requested at a singular point");
    }

    const JacobianData jd = jacobian(map, p);
    const double absj = std::abs(jd.det);
    if (absj == 0.0) return 0.0;
    const double norm =
        convention == NormConvention::Spectral ? jd.norm_spectral : jd.norm_frobenius;

    switch (kind.tag) {
    case DilatationTag::Outer:
        return norm * norm / absj;
    case DilatationTag::Inner:
        return absj / (jd.min_stretch * jd.min_stretch);
    case DilatationTag::PDil:
        return norm / std::pow(absj, 1.0 / kind.exponent);
    case DilatationTag::Hq:
        return std::pow(std::pow(norm, kind.exponent) / absj, 1.0 / kind.exponent);
    case DilatationTag::QField: {
        const double c = kind.q_constant;
        return (norm * norm / absj) / (c * c);
    }
    }
    throw Error("unreachable dilatation kind");
}

namespace {

std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

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

PlanarMap parse_map(const std::string& spec) {
    if (spec == "identity") return PlanarMap::identity();
    if (spec == "radial") return PlanarMap::radial_square_disk();
    if (spec.rfind("cusp:", 0) == 0) {
        const std::string rest = spec.substr(5);
        if (rest.rfind("alpha=", 0) != 0)
            throw ParameterError("cusp map spec must be cusp:alpha=<real>");
        return PlanarMap::holder_cusp(parse_real(rest.substr(6), "alpha"));
    }
    if (spec.rfind("affine:", 0) == 0) {
        const auto parts = split_top_level(spec.substr(7), ',');
        if (parts.size() != 4 && parts.size() != 6)
            throw ParameterError("affine spec needs 4 or 6 comma-separated reals");
        Mat2 m{parse_real(parts[0], "a"), parse_real(parts[1], "b"),
               parse_real(parts[2], "c"), parse_real(parts[3], "d")};
        Vec2 t;
        if (parts.size() == 6) t = {parse_real(parts[4], "tx"), parse_real(parts[5], "ty")};
        return PlanarMap::affine(m, t);
    }
    if (spec.rfind("compose(", 0) == 0 && spec.back() == ')') {
        const std::string inner = spec.substr(8, spec.size() - 9);
        std::vector<PlanarMap> maps;
        for (const auto& part : split_top_level(inner, ';')) maps.push_back(parse_map(part));
        return PlanarMap::composition(std::move(maps));
    }
    throw ParameterError("unknown map spec '" + spec + "'");
}

NormConvention parse_norm_convention(const std::string& name) {
    if (name == "spectral") return NormConvention::Spectral;
    if (name == "frobenius") return NormConvention::Frobenius;
    throw ParameterError("norm convention must be 'spectral' or 'frobenius'");
}

std::string norm_convention_name(NormConvention c) {
    return c == NormConvention::Spectral ? "spectral" : "frobenius";
}

} // namespace qconf
