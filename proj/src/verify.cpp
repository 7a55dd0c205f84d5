#include "qconf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qconf/errors.hpp"
#include "qconf/quadrature.hpp"

namespace qconf {

namespace {

// K^I at an edge midpoint. The radial map's inner dilatation extends
// continuously across the coordinate axes even though the derivative
// matrix jumps there, so axis midpoints are nudged off the axis.
double inner_dilatation_at(const PlanarMap& map, Vec2 p, double h) {
    for (int attempt = 0; attempt < 3; ++attempt) {
        try {
            return dilatation(map, p, DilatationKind::inner(), NormConvention::Spectral);
        } catch (const SingularityError&) {
            p = {p.x + 1e-7 * h, p.y + 1e-7 * h};
        }
    }
    return dilatation(map, p, DilatationKind::inner(), NormConvention::Spectral);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

InequalityReport q_inequality_check(const PlanarMap& map, const Domain& domain,
                                    const CurveFamily& family, double h, double slack,
                                    const ModulusOptions& opts) {
    InequalityReport rep;
    rep.check = "q-inequality";
    rep.slack = slack;

    const GridGraph graph = make_grid_graph(domain, h);
    const ModulusSolution source = discrete_modulus(graph, family, 2.0, opts);
    const ModulusSolution image = pushforward_modulus(map, graph, family, opts);

    double rhs = 0.0;
    for (int e = 0; e < graph.edge_count(); ++e) {
        if (source.rho[e] == 0.0) continue;
        const double ki = inner_dilatation_at(map, graph.edge_midpoint(e), h);
        rhs += ki * source.rho[e] * source.rho[e];
    }

    rep.lhs = image.value;
    rep.rhs = rhs;
    if (!std::isfinite(rhs)) {
        rep.inconclusive = true;
        rep.details = "divergent: right side is not finite";
        return rep;
    }
    rep.satisfied = rep.lhs <= rep.rhs * (1.0 + slack);
    rep.details = "source modulus " + fmt(source.value) + ", image modulus " + fmt(image.value) +
                  ", source gap " + fmt(source.duality_gap);
    return rep;
}

namespace {

// Axis-aligned bounding box of the preimage of `box`, from a dense boundary
// sample through the analytic inverse.
BBox preimage_bbox(const PlanarMap& inv, const BBox& box) {
    BBox out{kInf, kInf, -kInf, -kInf};
    const int samples = 256;
    auto absorb = [&](const Vec2& p) {
        const Vec2 q = inv.evaluate(p);
        out.x0 = std::min(out.x0, q.x);
        out.y0 = std::min(out.y0, q.y);
        out.x1 = std::max(out.x1, q.x);
        out.y1 = std::max(out.y1, q.y);
    };
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        absorb({box.x0 + t * (box.x1 - box.x0), box.y0});
        absorb({box.x0 + t * (box.x1 - box.x0), box.y1});
        absorb({box.x0, box.y0 + t * (box.y1 - box.y0)});
        absorb({box.x1, box.y0 + t * (box.y1 - box.y0)});
    }
    return out;
}

std::optional<Domain> target_region(const PlanarMap& map) {
    switch (map.kind()) {
    case MapKind::HolderCusp:
        return map.inverted() ? Domain::diamond() : Domain::cusp_domain(map.alpha());
    case MapKind::RadialSquareDisk:
        return map.inverted() ? Domain::disk({0.0, 0.0}, 1.0) : Domain::diamond();
    default:
        return std::nullopt; // identity / affine act on the whole plane
    }
}

} // namespace

MeasureCheckReport measure_distortion_check(const PlanarMap& map, const std::vector<BBox>& boxes,
                                            double q, double h, double slack,
                                            NormConvention convention) {
    if (!(q >= 1.0 && q < 2.0))
        throw ParameterError("measure distortion check requires 1 <= q < n = 2");
    if (!map.has_analytic_inverse())
        throw UnsupportedMapError("measure distortion check needs an analytic inverse");
    if (boxes.empty()) throw ParameterError("measure distortion check needs at least one box");

    const PlanarMap inv = map.inverse();
    const double exponent = 2.0 * q / (2.0 - q);

    MeasureCheckReport out;
    out.report.check = "measure-distortion";
    out.report.slack = slack;

    const auto region = target_region(map);
    double worst_ratio = -kInf;
    std::ostringstream details;

    for (const BBox& box : boxes) {
        if (region) {
            const Vec2 corners[4] = {{box.x0, box.y0}, {box.x1, box.y0},
                                     {box.x0, box.y1}, {box.x1, box.y1}};
            for (const Vec2& c : corners)
                if (!region->contains(c, 1e-12))
                    throw DomainError("measure box leaves the image domain");
        }

        // Left side: count cells whose mapped center lands in the box. The
        // grid is anchored at the preimage bounding box so the identity map
        // counts exactly.
        const BBox pre = preimage_bbox(inv, box);
        const int nx = static_cast<int>(std::ceil((pre.x1 - pre.x0) / h + 1e-9)) + 2;
        const int ny = static_cast<int>(std::ceil((pre.y1 - pre.y0) / h + 1e-9)) + 2;
        long count = 0;
        for (int j = -1; j < ny; ++j) {
            for (int i = -1; i < nx; ++i) {
                const Vec2 c{pre.x0 + (i + 0.5) * h, pre.y0 + (j + 0.5) * h};
                if (!map.in_natural_domain(c)) continue;
                const Vec2 y = map.evaluate(c);
                if (y.x >= box.x0 && y.x <= box.x1 && y.y >= box.y0 && y.y <= box.y1) ++count;
            }
        }
        const double lhs = static_cast<double>(count) * h * h;

        // Right side: int_box H_q^{2q/(2-q)} dy.
        auto h_q_pow = [&](double x, double yy) {
            const Vec2 src = inv.evaluate({x, yy});
            const double hq = dilatation(map, src, DilatationKind::h_distortion(q), convention);
            return std::pow(hq, exponent);
        };
        ScalarField field{h_q_pow, {}};
        if (map.kind() == MapKind::HolderCusp && box.y0 < 0.0 && box.y1 > 0.0)
            field.singular_lines.push_back({1, 0.0});
        const QuadratureResult qr =
            integrate(field, Domain::box(box.x0, box.y0, box.x1, box.y1), 1e-7);
        if (qr.divergent) {
            out.report.inconclusive = true;
            out.report.details = "divergent distortion integral over a box";
            return out;
        }
        const double ratio = lhs / qr.value;
        out.ratios.push_back(ratio);
        details << "box [" << box.x0 << "," << box.x1 << "]x[" << box.y0 << "," << box.y1
                << "]: lhs " << fmt(lhs) << " rhs " << fmt(qr.value) << " ratio " << fmt(ratio)
                << "; ";
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            out.report.lhs = lhs;
            out.report.rhs = qr.value;
        }
    }
    out.c_empirical = worst_ratio;
    out.report.satisfied = out.report.lhs <= out.report.rhs * (1.0 + slack);
    out.report.details = details.str();
    return out;
}

std::vector<TestFunction> default_test_functions() {
    using std::numbers::pi;
    return {
        {"x", [](Vec2 p) { return p.x; }, [](Vec2) { return Vec2{1.0, 0.0}; }},
        {"y", [](Vec2 p) { return p.y; }, [](Vec2) { return Vec2{0.0, 1.0}; }},
        {"xy", [](Vec2 p) { return p.x * p.y; }, [](Vec2 p) { return Vec2{p.y, p.x}; }},
        {"sin(pi x)cos(pi y)",
         [](Vec2 p) { return std::sin(pi * p.x) * std::cos(pi * p.y); },
         [](Vec2 p) {
             return Vec2{pi * std::cos(pi * p.x) * std::cos(pi * p.y),
                         -pi * std::sin(pi * p.x) * std::sin(pi * p.y)};
         }},
    };
}

namespace {

double source_poincare_constant(const Domain& source) {
    const double pi32 = std::pow(std::numbers::pi, 1.5);
    switch (source.kind()) {
    case DomainKind::Disk:
        return 3.0 * pi32 / 4.0;
    case DomainKind::Diamond:
        return 3.0 * pi32 / 2.0;
    case DomainKind::UnitSquare:
        // B_{2,1} is invariant under plane scaling and rotation, so the
        // diamond-square constant covers every square.
        return 3.0 * pi32 / 2.0;
    default:
        throw ParameterError("no (2,1)-Poincare constant for this source domain");
    }
}

} // namespace

InequalityReport weighted_poincare_check(const PlanarMap& map, const Domain& source_domain,
                                         double s, double p,
                                         const std::vector<TestFunction>& fs, double h,
                                         double slack) {
    if (!(s > 1.0) || !(p >= 1.0))
        throw ParameterError("weighted Poincare check requires s > 1 and p >= 1");
    if (fs.empty()) throw ParameterError("no test functions given");

    const double q = 1.0; // pipeline exponent; q < s holds for all s > 1
    const Domain image = image_domain(map, source_domain);
    const PlanarMap inv = map.inverse();

    const double B = source_poincare_constant(source_domain);
    const double K =
        composition_norm_bound(map, source_domain, p, q, NormConvention::Frobenius).norm_bound;

    // Weighted samples over the image grid.
    const GridMask grid = build_grid_unchecked(image, h);
    const int n = grid.node_count();
    std::vector<double> weight(n);
    for (int v = 0; v < n; ++v) {
        const Vec2 y = grid.node_position(v);
        const Vec2 x = inv.evaluate(y);
        const double jac = std::abs(jacobian(map, x).det);
        if (!(jac > 1e-12)) {
            InequalityReport rep;
            rep.check = "weighted-poincare";
            rep.inconclusive = true;
            rep.details = "weight singular at a grid node";
            return rep;
        }
        weight[v] = 1.0 / jac;
    }
    // Spot check: the analytic-inverse Jacobian must agree with 1/|J|.
    for (int v = 0; v < std::min(n, 64); ++v) {
        const Vec2 y = grid.node_position(v * (n / std::min(n, 64)));
        const double w1 = 1.0 / std::abs(jacobian(map, inv.evaluate(y)).det);
        const double w2 = std::abs(jacobian(inv, y).det);
        if (std::abs(w1 - w2) > 1e-8 * std::max(1.0, w1))
            throw SolverError("inverse-jacobian weight paths disagree");
    }

    const double cell = h * h;
    InequalityReport rep;
    rep.check = "weighted-poincare";
    rep.slack = slack;
    rep.satisfied = true;
    double worst = -kInf;
    std::ostringstream details;

    for (const auto& tf : fs) {
        std::vector<double> values(n);
        double wsum = 0.0, fwsum = 0.0;
        double fmin = kInf, fmax = -kInf;
        for (int v = 0; v < n; ++v) {
            values[v] = tf.f(grid.node_position(v));
            wsum += weight[v];
            fwsum += values[v] * weight[v];
            fmin = std::min(fmin, values[v]);
            fmax = std::max(fmax, values[v]);
        }
        auto deviation = [&](double c) {
            double acc = 0.0;
            for (int v = 0; v < n; ++v)
                acc += std::pow(std::abs(values[v] - c), s) * weight[v];
            return std::pow(acc * cell, 1.0 / s);
        };
        double lhs;
        if (s == 2.0) {
            lhs = deviation(fwsum / wsum); // the weighted mean is exact for s = 2
        } else {
            double a = fmin, b = fmax;
            for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
                const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
                if (deviation(m1) <= deviation(m2)) b = m2;
                else a = m1;
            }
            lhs = deviation(0.5 * (a + b));
        }

        ScalarField grad_field{[&](double x, double y) {
                                   const Vec2 g = tf.grad({x, y});
                                   return std::pow(std::hypot(g.x, g.y), p);
                               },
                               {}};
        const QuadratureResult gq = integrate(grad_field, image, 1e-8);
        const double rhs = B * K * std::pow(gq.value, 1.0 / p);

        const bool ok = lhs <= rhs * (1.0 + slack);
        rep.satisfied = rep.satisfied && ok;
        details << tf.name << ": lhs " << fmt(lhs) << " rhs " << fmt(rhs) << "; ";
        const double ratio = rhs > 0.0 ? lhs / rhs : kInf;
        if (ratio > worst) {
            worst = ratio;
            rep.lhs = lhs;
            rep.rhs = rhs;
        }
    }
    rep.details = details.str();
    return rep;
}

DualExponents dual_exponents(double p, double q, int n, DualMode mode) {
    DualExponents out;
    out.mode = mode;
    if (mode == DualMode::SobolevDual) {
        if (!(n >= 2)) throw ParameterError("dimension must be >= 2");
        if (!(q > n - 1.0 && q <= p && std::isfinite(p)))
            throw ParameterError("Sobolev duality requires n-1 < q <= p < inf");
        out.p_dual = p / (p - n + 1.0);
        out.q_dual = q / (q - n + 1.0);
        return out;
    }
    if (!(q >= 1.0 && q <= p && std::isfinite(p)))
        throw ParameterError("planar Holder duality requires 1 <= q <= p < inf");
    out.p_dual = p > 1.0 ? p / (p - 1.0) : kInf;
    out.q_dual = q > 1.0 ? q / (q - 1.0) : kInf;
    return out;
}

double sobolev_target_exponent(double s, int n) {
    if (!(s >= 1.0) || n < 2) throw ParameterError("target exponent requires s >= 1, n >= 2");
    return s * n / (s + n - 1.0);
}

} // namespace qconf
