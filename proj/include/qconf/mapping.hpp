#pragma once

#include <string>
#include <vector>

#include "qconf/geometry.hpp"

namespace qconf {

// Which matrix norm |D| means. Pointwise distortion quantities accept either;
// the worked reproductions of the source computations use Frobenius while the
// general theory statements use the operator (spectral) norm, so both stay
// caller-visible everywhere.
enum class NormConvention { Spectral, Frobenius };

enum class MapKind { Identity, Affine, HolderCusp, RadialSquareDisk, Composition };

// A planar homeomorphism with exact derivative data.
//
//   identity            (x,y) -> (x,y)
//   affine              (x,y) -> A(x,y) + t, det A != 0
//   cusp(alpha)         (x,y) -> (x, sign(y)|y|^alpha), alpha > 1,
//                       on the diamond square |x|+|y| <= 1
//   radial              (x,y) -> (l x, l y), l = sqrt(x^2+y^2)/(|x|+|y|),
//                       unit disk onto the diamond square
//   compose(f;g)        g after f (pipeline order)
//
// `inverted` flips a map to its analytic inverse where one exists.
class PlanarMap {
public:
    static PlanarMap identity();
    static PlanarMap affine(const Mat2& m, const Vec2& t = {});
    static PlanarMap holder_cusp(double alpha);
    static PlanarMap radial_square_disk();
    static PlanarMap composition(std::vector<PlanarMap> parts);

    MapKind kind() const { return kind_; }
    bool inverted() const { return inverted_; }
    double alpha() const { return alpha_; }
    const Mat2& matrix() const { return matrix_; }
    const Vec2& translation() const { return translation_; }
    const std::vector<PlanarMap>& parts() const { return parts_; }

    bool in_natural_domain(const Vec2& p, double tol = 1e-12) const;

    Vec2 evaluate(const Vec2& p) const;

    /// Derivative matrix at an interior non-singular point.
    /// Throws SingularityError on the cusp axis y=0 and on the radial
    /// map's coordinate axes and origin.
    Mat2 derivative(const Vec2& p) const;

    bool has_analytic_inverse() const;
    PlanarMap inverse() const;

    /// True when the derivative does not exist or degenerates at p.
    bool is_singular_at(const Vec2& p) const;

    std::string to_spec_string() const;

private:
    MapKind kind_ = MapKind::Identity;
    bool inverted_ = false;
    double alpha_ = 0.0;
    Mat2 matrix_;
    Vec2 translation_;
    std::vector<PlanarMap> parts_;
};

struct JacobianData {
    Mat2 matrix;
    double det = 0.0;            // J(x, phi)
    double norm_spectral = 0.0;  // largest singular value
    double norm_frobenius = 0.0;
    double min_stretch = 0.0;    // l(D phi), smallest singular value
};

JacobianData jacobian(const PlanarMap& map, const Vec2& p);

enum class DilatationTag { Outer, Inner, PDil, Hq, QField };

struct DilatationKind {
    DilatationTag tag = DilatationTag::Outer;
    double exponent = 2.0;     // p for PDil, q for Hq
    double q_constant = 1.0;   // the C(n) multiplier in the Q-field, n=2

    static DilatationKind outer() { return {DilatationTag::Outer}; }
    static DilatationKind inner() { return {DilatationTag::Inner}; }
    static DilatationKind p_dilatation(double p) { return {DilatationTag::PDil, p}; }
    static DilatationKind h_distortion(double q) { return {DilatationTag::Hq, q}; }
    static DilatationKind q_field(double c = 1.0) { return {DilatationTag::QField, 2.0, c}; }
};

/// Pointwise distortion at p (n = 2):
///   Outer   |D|^2 / |J|
///   Inner   |J| / l(D)^2        (norm convention irrelevant)
///   PDil    |D| / |J|^{1/p}
///   Hq      (|D|^q / |J|)^{1/q}
///   QField  (K^O / C^2)^{1/(n-1)}
/// Returns 0 where J = 0 (finite-distortion convention); on the cusp axis
/// the derivative degenerates and the value is 0 by the same convention.
double dilatation(const PlanarMap& map, const Vec2& p, const DilatationKind& kind,
                  NormConvention convention);

/// Parses the compact mapping grammar:
///   identity | affine:a,b,c,d[,tx,ty] | cusp:alpha=<real> | radial
///   | compose(<spec>;<spec>[;...])
PlanarMap parse_map(const std::string& spec);

NormConvention parse_norm_convention(const std::string& name);
std::string norm_convention_name(NormConvention c);

} // namespace qconf
