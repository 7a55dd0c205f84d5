#include "qconf/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

#include "qconf/errors.hpp"
#include "qconf/parallel.hpp"

namespace qconf {

namespace {

// ---------------------------------------------------------------------------
// Gauss-Legendre rule on [-1, 1], computed once per point count by Newton
// iteration on the Legendre polynomial.
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule make_gauss(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

const GaussRule& gauss_rule(int n) {
    static const GaussRule g8 = make_gauss(8);
    if (n == 8) return g8;
    static thread_local GaussRule custom;
    if (custom.nodes.size() != static_cast<size_t>(n)) custom = make_gauss(n);
    return custom;
}

// ---------------------------------------------------------------------------
// Region = domain intersected with an axis-aligned clip box.
// ---------------------------------------------------------------------------

struct ClipRegion {
    const Domain* dom = nullptr;
    double xlo = -kInf, xhi = kInf;
    double ylo = -kInf, yhi = kInf;

    BBox effective_box() const {
        const BBox bb = dom->bounding_box();
        return {std::max(bb.x0, xlo), std::max(bb.y0, ylo), std::min(bb.x1, xhi),
                std::min(bb.y1, yhi)};
    }
    bool empty() const {
        const BBox b = effective_box();
        return !(b.x1 > b.x0 && b.y1 > b.y0);
    }
};

struct Box2 {
    double x0, y0, x1, y1;
};

// Iterated Gauss over cell ∩ region, slicing the exact domain section in y
// at every x node. Boundary cells therefore carry no area-approximation
// error beyond the rule itself.
double eval_cell(const ScalarField& field, const ClipRegion& r, const Box2& cell,
                 const GaussRule& rule) {
    const double xa = std::max(cell.x0, r.xlo);
    const double xb = std::min(cell.x1, r.xhi);
    if (!(xb > xa)) return 0.0;
    const double xm = 0.5 * (xa + xb), xh = 0.5 * (xb - xa);
    double outer = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = xm + xh * rule.nodes[i];
        const auto sec = r.dom->y_section(x);
        if (!sec) continue;
        const double ya = std::max({(*sec)[0], cell.y0, r.ylo});
        const double yb = std::min({(*sec)[1], cell.y1, r.yhi});
        if (!(yb > ya)) continue;
        const double ym = 0.5 * (ya + yb), yh = 0.5 * (yb - ya);
        double inner = 0.0;
        for (size_t j = 0; j < rule.nodes.size(); ++j)
            inner += rule.weights[j] * field.f(x, ym + yh * rule.nodes[j]);
        outer += rule.weights[i] * inner * yh;
    }
    return outer * xh;
}

struct CellNode {
    Box2 cell;
    double refined = 0.0; // sum over the four children
    double err = 0.0;     // |coarse - refined|
    std::array<double, 4> child_vals{};
    int depth = 0;
};

struct PartResult {
    double value = 0.0;
    double err = 0.0;
    long cells = 0;
};

// Adaptive refinement over one clip region, splitting the cell with the
// largest parent-vs-children discrepancy. Stops when the summed
// discrepancies fall below max(abs_tol, rel_tol * scale) where scale is
// |value| guarded by a small fraction of the absolute mass, so integrals
// that cancel to zero still terminate.
PartResult adaptive_clip(const ScalarField& field, const ClipRegion& region, double rel_tol,
                         double abs_tol, const QuadratureOptions& opts, long& cell_budget) {
    PartResult out;
    if (region.empty()) return out;
    const GaussRule& rule = gauss_rule(opts.gauss_points);
    const BBox box = region.effective_box();

    auto make_node = [&](const Box2& c, double coarse, int depth) {
        CellNode node;
        node.cell = c;
        node.depth = depth;
        const double mx = 0.5 * (c.x0 + c.x1), my = 0.5 * (c.y0 + c.y1);
        const Box2 kids[4] = {{c.x0, c.y0, mx, my},
                              {mx, c.y0, c.x1, my},
                              {c.x0, my, mx, c.y1},
                              {mx, my, c.x1, c.y1}};
        for (int k = 0; k < 4; ++k) {
            node.child_vals[k] = eval_cell(field, region, kids[k], rule);
            node.refined += node.child_vals[k];
        }
        cell_budget -= 4;
        node.err = std::abs(coarse - node.refined);
        // Cells at floating-point resolution stop contributing error.
        if (c.x1 - c.x0 < 1e-13 * (box.x1 - box.x0) + 1e-300 || depth > 60) node.err = 0.0;
        return node;
    };

    auto cmp = [](const CellNode& a, const CellNode& b) { return a.err < b.err; };
    std::priority_queue<CellNode, std::vector<CellNode>, decltype(cmp)> heap(cmp);

    const double w = box.x1 - box.x0, h = box.y1 - box.y0;
    int nx = 4, ny = 4;
    if (w >= h)
        nx = std::clamp(static_cast<int>(std::lround(4.0 * w / h)), 4, 32);
    else
        ny = std::clamp(static_cast<int>(std::lround(4.0 * h / w)), 4, 32);

    double value = 0.0, err_sum = 0.0, mass = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const Box2 c{box.x0 + w * i / nx, box.y0 + h * j / ny, box.x0 + w * (i + 1) / nx,
                         box.y0 + h * (j + 1) / ny};
            const double coarse = eval_cell(field, region, c, rule);
            --cell_budget;
            CellNode node = make_node(c, coarse, 0);
            value += node.refined;
            mass += std::abs(node.refined);
            err_sum += node.err;
            out.cells += 5;
            heap.push(std::move(node));
        }
    }

    auto threshold = [&] {
        return std::max(abs_tol, rel_tol * std::max(std::abs(value), 0.05 * mass));
    };

    while (err_sum > threshold()) {
        if (cell_budget <= 0)
            throw InconclusiveError("quadrature refinement budget exhausted without convergence");
        if (heap.empty() || heap.top().err <= 0.0) break;
        CellNode top = heap.top();
        heap.pop();
        value -= top.refined;
        mass -= std::abs(top.refined);
        err_sum -= top.err;
        const double mx = 0.5 * (top.cell.x0 + top.cell.x1);
        const double my = 0.5 * (top.cell.y0 + top.cell.y1);
        const Box2 kids[4] = {{top.cell.x0, top.cell.y0, mx, my},
                              {mx, top.cell.y0, top.cell.x1, my},
                              {top.cell.x0, my, mx, top.cell.y1},
                              {mx, my, top.cell.x1, top.cell.y1}};
        for (int k = 0; k < 4; ++k) {
            CellNode child = make_node(kids[k], top.child_vals[k], top.depth + 1);
            value += child.refined;
            mass += std::abs(child.refined);
            err_sum += child.err;
            out.cells += 4;
            heap.push(std::move(child));
        }
    }

    out.value = value;
    out.err = err_sum;
    return out;
}

// One side of a geometric band ladder toward a singular line.
struct LadderSide {
    int axis;        // 0: bands in x, 1: bands in y
    double offset;   // line coordinate
    int direction;   // +1: bands above/right of the line, -1: below/left
    double t0;       // outermost band distance
    ClipRegion base; // region the bands are intersected with
};

struct LadderOutcome {
    double value = 0.0;
    double err = 0.0;
    long cells = 0;
    bool divergent = false;
};

LadderOutcome run_ladder(const ScalarField& field, const LadderSide& side, double rel_tol,
                         double tail_budget, const QuadratureOptions& opts, long& cell_budget) {
    LadderOutcome out;
    double t_hi = side.t0;
    double prev_abs = -1.0, prev_ratio = -1.0;
    double sum_abs = 0.0;
    std::vector<double> partials;
    int growth_hits = 0;

    for (int gen = 0; gen < opts.max_ladder_generations; ++gen) {
        const double t_lo = t_hi * 0.25;
        ClipRegion strip = side.base;
        const double lo = side.offset + (side.direction > 0 ? t_lo : -t_hi);
        const double hi = side.offset + (side.direction > 0 ? t_hi : -t_lo);
        if (side.axis == 1) {
            strip.ylo = std::max(strip.ylo, lo);
            strip.yhi = std::min(strip.yhi, hi);
        } else {
            strip.xlo = std::max(strip.xlo, lo);
            strip.xhi = std::min(strip.xhi, hi);
        }
        const PartResult pr = adaptive_clip(field, strip, 0.25 * rel_tol, 0.0, opts, cell_budget);
        out.value += pr.value;
        out.err += pr.err;
        out.cells += pr.cells;

        const double s = std::abs(pr.value);
        sum_abs += s;
        partials.push_back(sum_abs);

        // Unbounded growth: partial band sums more than doubling over a
        // window of three generations while the bands themselves increase.
        const size_t k = partials.size();
        if (k >= 4 && prev_abs > 0.0 && s > prev_abs &&
            partials[k - 1] > 2.0 * partials[k - 4]) {
            if (++growth_hits >= 2 || sum_abs > 1e100) {
                out.divergent = true;
                return out;
            }
        } else if (s <= prev_abs) {
            growth_hits = 0;
        }
        if (sum_abs > 1e100 || !std::isfinite(sum_abs)) {
            out.divergent = true;
            return out;
        }

        // Geometric tail completion once the band ratio settles below 1.
        if (prev_abs > 0.0) {
            const double ratio = s / prev_abs;
            if (prev_ratio > 0.0) {
                const double rho = std::max(ratio, prev_ratio);
                if (rho < 0.97) {
                    const double tail = s * rho / (1.0 - rho);
                    if (tail <= tail_budget) {
                        const double sign = pr.value >= 0.0 ? 1.0 : -1.0;
                        out.value += sign * tail;
                        out.err += 0.5 * tail;
                        return out;
                    }
                }
            }
            prev_ratio = ratio;
        } else if (s == 0.0 && gen >= 2) {
            return out; // field vanishes toward the line
        }
        prev_abs = s;
        t_hi = t_lo;
    }
    throw InconclusiveError(
        "singular-band ladder exhausted its generation budget without a verdict");
}

std::optional<SingularLine> relevant_line(const ScalarField& field, const Domain& domain) {
    std::optional<SingularLine> hit;
    const BBox bb = domain.bounding_box();
    for (const auto& line : field.singular_lines) {
        const bool inside = line.axis == 1 ? (line.offset >= bb.y0 && line.offset <= bb.y1)
                                           : (line.offset >= bb.x0 && line.offset <= bb.x1);
        if (!inside) continue;
        if (hit)
            throw ParameterError("only one singular line per integral is supported");
        hit = line;
    }
    return hit;
}

} // namespace

QuadratureResult integrate(const ScalarField& field, const Domain& domain, double rel_tol,
                           const QuadratureOptions& opts) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw ParameterError("integration rel_tol must lie in (0, 1)");

    QuadratureResult result;
    long cell_budget = opts.max_cells;
    const BBox bb = domain.bounding_box();
    const auto line = relevant_line(field, domain);

    // Partition into smooth clip regions away from the singular line plus a
    // geometric band ladder on each side of it.
    std::vector<ClipRegion> smooth;
    std::vector<LadderSide> ladders;
    if (!line) {
        smooth.push_back(ClipRegion{&domain});
    } else {
        const double lo_extent =
            line->axis == 1 ? line->offset - bb.y0 : line->offset - bb.x0;
        const double hi_extent =
            line->axis == 1 ? bb.y1 - line->offset : bb.x1 - line->offset;
        const double t0 = 0.25 * std::max(lo_extent, hi_extent);
        ClipRegion whole{&domain};
        ClipRegion above = whole, below = whole;
        if (line->axis == 1) {
            above.ylo = line->offset + t0;
            below.yhi = line->offset - t0;
        } else {
            above.xlo = line->offset + t0;
            below.xhi = line->offset - t0;
        }
        if (!above.empty()) smooth.push_back(above);
        if (!below.empty()) smooth.push_back(below);
        if (hi_extent > 0.0) ladders.push_back({line->axis, line->offset, +1, t0, whole});
        if (lo_extent > 0.0) ladders.push_back({line->axis, line->offset, -1, t0, whole});
    }

    // Rough magnitude pass over the smooth parts to size tolerances.
    double scale = 0.0;
    for (const auto& reg : smooth) {
        const PartResult pr = adaptive_clip(field, reg, 2e-3, 0.0, opts, cell_budget);
        result.cells_used += pr.cells;
        scale += std::abs(pr.value);
    }
    if (scale == 0.0) scale = 1e-30;

    // Ladders next: they can prove divergence before any fine work happens.
    double value = 0.0, err = 0.0;
    for (const auto& side : ladders) {
        const LadderOutcome lo =
            run_ladder(field, side, rel_tol, 0.2 * rel_tol * scale, opts, cell_budget);
        result.cells_used += lo.cells;
        if (lo.divergent) {
            result.divergent = true;
            result.value = lo.value >= 0.0 ? kInf : -kInf;
            result.error_estimate = kInf;
            return result;
        }
        value += lo.value;
        err += lo.err;
        scale = std::max(scale, std::abs(value));
    }

    // Fine pass over the smooth parts with an absolute budget tied to the
    // overall magnitude.
    const double abs_part =
        smooth.empty() ? 0.0 : 0.3 * rel_tol * scale / static_cast<double>(smooth.size());
    for (const auto& reg : smooth) {
        const PartResult pr = adaptive_clip(field, reg, 0.25 * rel_tol, abs_part, opts, cell_budget);
        value += pr.value;
        err += pr.err;
        result.cells_used += pr.cells;
    }

    result.value = value;
    result.error_estimate = err;
    result.converged = err <= std::max(rel_tol * std::abs(value), 1e-300);
    return result;
}

double cusp_k2_squared_closed_form(double alpha, const Domain& domain) {
    if (!(alpha > 1.0)) throw ParameterError("closed form requires alpha > 1");
    if (alpha == 2.0 || alpha == 3.0)
        throw ParameterError("cusp K-integral closed form has poles at alpha = 2, 3");
    const double base = 1.0 / (alpha * (2.0 - alpha) * (3.0 - alpha)) + 1.0 / (alpha + 1.0);
    switch (domain.kind()) {
    case DomainKind::PaperTriangle:
        return base;
    case DomainKind::Diamond:
        return 4.0 * base;
    default:
        throw ParameterError("antiderivative mode covers only paper-triangle and diamond");
    }
}

double grid_supremum(const std::function<double(double, double)>& f, const Domain& domain,
                     double rel_tol, int min_level, int max_level) {
    const BBox bb = domain.bounding_box();
    double best = -kInf;
    double prev = -kInf;
    for (int n = min_level; n <= max_level; n *= 2) {
        const double hx = bb.width() / n;
        const double hy = bb.height() / n;
        const int workers = worker_threads();
        std::vector<double> block_max(workers, -kInf);
        parallel_blocks(n, [&](int w, long rb, long re) {
            double local = -kInf;
            for (long j = rb; j < re; ++j) {
                const double y = bb.y0 + (j + 0.5) * hy;
                for (int i = 0; i < n; ++i) {
                    const double x = bb.x0 + (i + 0.5) * hx;
                    if (!domain.contains({x, y})) continue;
                    const double v = f(x, y);
                    if (v > local) local = v;
                }
            }
            block_max[w] = local;
        });
        double level = -kInf;
        for (double v : block_max) level = std::max(level, v);
        best = std::max(best, level);
        if (std::isfinite(prev) && std::isfinite(best) &&
            std::abs(best - prev) <= rel_tol * std::max(1.0, std::abs(best)))
            return best;
        prev = best;
    }
    throw InconclusiveError("grid supremum did not settle within the level budget");
}

namespace {

double kappa_of(double p, double q) {
    if (p == q) return kInf;
    if (std::isinf(p)) return q;
    return 1.0 / (1.0 / q - 1.0 / p);
}

// Pointwise K_p, extended to p = inf where it is just |D|.
double k_p_value(const PlanarMap& map, double x, double y, double p, NormConvention conv) {
    if (std::isinf(p)) {
        const JacobianData jd = jacobian(map, {x, y});
        return conv == NormConvention::Spectral ? jd.norm_spectral : jd.norm_frobenius;
    }
    return dilatation(map, {x, y}, DilatationKind::p_dilatation(p), conv);
}

std::vector<SingularLine> cusp_axis_lines(const PlanarMap& map) {
    switch (map.kind()) {
    case MapKind::HolderCusp:
        return {{1, 0.0}}; // y = 0 in the source, v = 0 in the target
    case MapKind::Composition:
        if (!map.parts().empty()) return cusp_axis_lines(map.parts().front());
        return {};
    default:
        return {};
    }
}

} // namespace

OperatorNormReport composition_norm_bound(const PlanarMap& map, const Domain& domain, double p,
                                          double q, NormConvention convention,
                                          const NormBoundOptions& opts) {
    if (!(q >= 1.0) || !std::isfinite(q) || !(p >= q))
        throw ParameterError("composition norm bound requires 1 <= q <= p <= inf");

    OperatorNormReport report;
    report.p = p;
    report.q = q;
    report.kappa = kappa_of(p, q);
    report.integrand_kind = IntegrandKind::KpSource;
    report.multiplicity = opts.multiplicity;

    if (opts.mode == EvalMode::Antiderivative) {
        if (map.kind() != MapKind::HolderCusp || map.inverted() || p != 2.0 || q != 1.0)
            throw ParameterError(
                "antiderivative mode is defined for the forward cusp map with (p, q) = (2, 1)");
        report.mode = "antiderivative";
        const double i2 = cusp_k2_squared_closed_form(map.alpha(), domain);
        report.norm_bound = std::sqrt(opts.multiplicity * i2);
        report.quadrature.value = opts.multiplicity * i2;
        report.quadrature.converged = true;
        return report;
    }

    if (p == q) {
        report.mode = "esssup";
        report.norm_bound = grid_supremum(
            [&](double x, double y) { return k_p_value(map, x, y, p, convention); }, domain,
            std::max(opts.rel_tol, 1e-6));
        report.quadrature.converged = true;
        return report;
    }

    report.mode = "quadrature";
    const double kappa = report.kappa;
    ScalarField field{[&](double x, double y) {
                          return std::pow(k_p_value(map, x, y, p, convention), kappa);
                      },
                      cusp_axis_lines(map)};
    report.quadrature = integrate(field, domain, opts.rel_tol, opts.quadrature);
    if (report.quadrature.divergent) {
        report.norm_bound = kInf;
        return report;
    }
    report.norm_bound = std::pow(opts.multiplicity * report.quadrature.value, 1.0 / kappa);
    return report;
}

OperatorNormReport h_norm_bound(const PlanarMap& map, const Domain& target_domain, double p,
                                double q, NormConvention convention,
                                const NormBoundOptions& opts) {
    if (!(q >= 1.0) || !(p >= q) || !std::isfinite(p))
        throw ParameterError("h-norm bound requires 1 <= q <= p < inf");
    if (!map.has_analytic_inverse())
        throw UnsupportedMapError("h-norm bound needs a map with an analytic inverse");

    const PlanarMap inv = map.inverse();
    OperatorNormReport report;
    report.p = p;
    report.q = q;
    report.kappa = kappa_of(p, q);
    report.integrand_kind = IntegrandKind::HqTarget;
    report.multiplicity = opts.multiplicity;

    auto h_q = [&](double x, double y) {
        const Vec2 src = inv.evaluate({x, y});
        return dilatation(map, src, DilatationKind::h_distortion(q), convention);
    };

    if (p == q) {
        report.mode = "esssup";
        report.norm_bound = grid_supremum(h_q, target_domain, std::max(opts.rel_tol, 1e-6));
        report.quadrature.converged = true;
        return report;
    }

    report.mode = "quadrature";
    const double kappa = report.kappa;
    ScalarField field{[&](double x, double y) { return std::pow(h_q(x, y), kappa); },
                      cusp_axis_lines(map)};
    report.quadrature = integrate(field, target_domain, opts.rel_tol, opts.quadrature);
    if (report.quadrature.divergent) {
        report.norm_bound = kInf;
        return report;
    }
    report.norm_bound = std::pow(opts.multiplicity * report.quadrature.value, 1.0 / kappa);
    return report;
}

double sup_functional(const PlanarMap& map, const Domain& domain, SupFunctional functional,
                      NormConvention convention, const SupOptions& opts) {
    if (opts.allow_shortcut) {
        const bool origin_disk = domain.kind() == DomainKind::Disk &&
                                 domain.center().x == 0.0 && domain.center().y == 0.0 &&
                                 domain.radius() <= 1.0;
        if (map.kind() == MapKind::RadialSquareDisk && !map.inverted() && origin_disk &&
            convention == NormConvention::Frobenius) {
            // sup l = 1 on the axes, sup sqrt(2 + 1/l^2) = 2 on the diagonals.
            return functional == SupFunctional::JacSqrtSup ? 1.0 : 2.0;
        }
        if (map.kind() == MapKind::HolderCusp && !map.inverted() &&
            domain.kind() == DomainKind::Diamond && functional == SupFunctional::JacSqrtSup) {
            return std::sqrt(map.alpha()); // sup of (alpha |y|^{alpha-1})^{1/2} at |y| = 1
        }
        if (map.kind() == MapKind::Identity || map.kind() == MapKind::Affine) {
            const JacobianData jd = jacobian(map, {0.0, 0.0});
            const double norm = convention == NormConvention::Spectral ? jd.norm_spectral
                                                                       : jd.norm_frobenius;
            return functional == SupFunctional::JacSqrtSup ? std::sqrt(std::abs(jd.det))
                                                           : norm / std::abs(jd.det);
        }
    }

    auto f = [&](double x, double y) -> double {
        if (map.is_singular_at({x, y})) return -kInf;
        const JacobianData jd = jacobian(map, {x, y});
        if (functional == SupFunctional::JacSqrtSup) return std::sqrt(std::abs(jd.det));
        const double norm =
            convention == NormConvention::Spectral ? jd.norm_spectral : jd.norm_frobenius;
        return norm / std::abs(jd.det);
    };
    return grid_supremum(f, domain, opts.rel_tol, opts.min_level, opts.max_level);
}

} // namespace qconf
