#include "qconf/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "qconf/errors.hpp"

namespace qconf {

GridGraph make_grid_graph(const Domain& domain, double h) {
    GridGraph g;
    g.mask = build_grid(domain, h);
    const int n = g.mask.node_count();
    g.adj.resize(n);
    for (int node = 0; node < n; ++node) {
        const auto [i, j] = g.mask.node_ij(node);
        const int right = g.mask.node_at(i + 1, j);
        const int up = g.mask.node_at(i, j + 1);
        for (int other : {right, up}) {
            if (other < 0) continue;
            const int32_t e = static_cast<int32_t>(g.edges.size());
            g.edges.push_back({static_cast<int32_t>(node), static_cast<int32_t>(other)});
            g.adj[node].push_back({e, static_cast<int32_t>(other)});
            g.adj[other].push_back({e, static_cast<int32_t>(node)});
        }
    }
    return g;
}

CurveFamily CurveFamily::opposite_sides(char axis) {
    if (axis != 'x' && axis != 'y') throw ParameterError("opposite-sides axis must be x or y");
    CurveFamily f;
    f.kind = FamilyKind::OppositeSides;
    f.axis = axis;
    return f;
}

CurveFamily CurveFamily::annulus_connect(double r_in, double r_out) {
    if (!(0.0 < r_in && r_in < r_out))
        throw ParameterError("annulus family requires 0 < rin < rout");
    CurveFamily f;
    f.kind = FamilyKind::AnnulusConnect;
    f.r_in = r_in;
    f.r_out = r_out;
    return f;
}

CurveFamily CurveFamily::boundary_arcs(double a0, double a1, double b0, double b1) {
    CurveFamily f;
    f.kind = FamilyKind::BoundaryArcs;
    f.arc_a0 = a0;
    f.arc_a1 = a1;
    f.arc_b0 = b0;
    f.arc_b1 = b1;
    return f;
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

CurveFamily parse_family(const std::string& spec) {
    if (spec == "opposite-sides:x") return CurveFamily::opposite_sides('x');
    if (spec == "opposite-sides:y") return CurveFamily::opposite_sides('y');
    if (spec.rfind("annulus:", 0) == 0) {
        double rin = 0.0, rout = 0.0;
        std::stringstream ss(spec.substr(8));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.rfind("rin=", 0) == 0)
                rin = parse_real(item.substr(4), "rin");
            else if (item.rfind("rout=", 0) == 0)
                rout = parse_real(item.substr(5), "rout");
            else
                throw ParameterError("unknown annulus parameter '" + item + "'");
        }
        return CurveFamily::annulus_connect(rin, rout);
    }
    if (spec.rfind("arcs:", 0) == 0) {
        const std::string rest = spec.substr(5);
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw ParameterError("arcs spec must be arcs:<a0>:<a1>,<b0>:<b1>");
        auto parse_pair = [&](const std::string& s) {
            const auto colon = s.rfind(':');
            if (colon == std::string::npos || colon == 0)
                throw ParameterError("arc must be <from>:<to> in degrees");
            return std::pair<double, double>{parse_real(s.substr(0, colon), "arc angle"),
                                             parse_real(s.substr(colon + 1), "arc angle")};
        };
        const auto a = parse_pair(rest.substr(0, comma));
        const auto b = parse_pair(rest.substr(comma + 1));
        return CurveFamily::boundary_arcs(a.first, a.second, b.first, b.second);
    }
    throw ParameterError("unknown curve family spec '" + spec + "'");
}

namespace {

bool angle_in_arc(double deg, double a0, double a1) {
    auto wrap = [](double d) {
        d = std::fmod(d, 360.0);
        return d < 0.0 ? d + 360.0 : d;
    };
    const double d = wrap(deg - a0);
    const double span = wrap(a1 - a0) == 0.0 ? 360.0 : wrap(a1 - a0);
    return d <= span;
}

} // namespace

MarkedSets marked_sets(const GridGraph& graph, const CurveFamily& family) {
    const GridMask& m = graph.mask;
    MarkedSets sets;
    switch (family.kind) {
    case FamilyKind::OppositeSides: {
        const DomainKind k = m.domain.kind();
        if (k != DomainKind::UnitSquare && k != DomainKind::Rect && k != DomainKind::Box)
            throw ParameterError("opposite-sides families need a rectangular domain");
        for (int node = 0; node < m.node_count(); ++node) {
            const auto [i, j] = m.node_ij(node);
            if (family.axis == 'x') {
                if (i == 0) sets.f0.push_back(node);
                if (i == m.nx - 1) sets.f1.push_back(node);
            } else {
                if (j == 0) sets.f0.push_back(node);
                if (j == m.ny - 1) sets.f1.push_back(node);
            }
        }
        break;
    }
    case FamilyKind::AnnulusConnect: {
        const Vec2 c = m.domain.kind() == DomainKind::Disk ? m.domain.center() : Vec2{0.0, 0.0};
        for (int node = 0; node < m.node_count(); ++node) {
            const double r = (m.node_position(node) - c).norm();
            if (r <= family.r_in) sets.f0.push_back(node);
            if (r >= family.r_out - m.h) sets.f1.push_back(node);
        }
        break;
    }
    case FamilyKind::BoundaryArcs: {
        const Vec2 c = m.domain.kind() == DomainKind::Disk ? m.domain.center() : Vec2{0.0, 0.0};
        for (int node = 0; node < m.node_count(); ++node) {
            if (!m.is_boundary_node(node)) continue;
            const Vec2 p = m.node_position(node) - c;
            const double deg = std::atan2(p.y, p.x) * 180.0 / std::numbers::pi;
            if (angle_in_arc(deg, family.arc_a0, family.arc_a1)) sets.f0.push_back(node);
            else if (angle_in_arc(deg, family.arc_b0, family.arc_b1)) sets.f1.push_back(node);
        }
        break;
    }
    }
    if (sets.f0.empty() || sets.f1.empty())
        throw ResolutionError("curve family marked sets are empty on this grid");
    std::vector<char> in0(m.node_count(), 0);
    for (int v : sets.f0) in0[v] = 1;
    for (int v : sets.f1)
        if (in0[v]) throw ParameterError("curve family marked sets must be disjoint");
    return sets;
}

namespace {

struct DijkstraOut {
    std::vector<double> dist;
    std::vector<int32_t> pred_node;
    std::vector<int32_t> pred_edge;
};

// Multi-source Dijkstra over edge densities. Ties are broken by node index:
// the heap pops (dist, node) lexicographically and equal-distance
// relaxations keep the smaller predecessor, so paths are deterministic.
DijkstraOut dijkstra(const GridGraph& g, const std::vector<double>& rho,
                     const std::vector<int32_t>& sources) {
    const int n = g.node_count();
    DijkstraOut out;
    out.dist.assign(n, kInf);
    out.pred_node.assign(n, -1);
    out.pred_edge.assign(n, -1);
    using Item = std::pair<double, int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (int32_t s : sources) {
        out.dist[s] = 0.0;
        heap.push({0.0, s});
    }
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > out.dist[u]) continue;
        for (const auto& [e, v] : g.adj[u]) {
            const double nd = d + rho[e];
            if (nd < out.dist[v] ||
                (nd == out.dist[v] && out.pred_node[v] >= 0 && u < out.pred_node[v])) {
                out.dist[v] = nd;
                out.pred_node[v] = u;
                out.pred_edge[v] = e;
                if (nd < kInf) heap.push({nd, v});
            }
        }
    }
    return out;
}

struct Constraint {
    std::vector<int32_t> edges;
    std::vector<int32_t> nodes;
    double lambda = 0.0;
};

} // namespace

ModulusSolution discrete_modulus_marked(const GridGraph& graph, const MarkedSets& sets,
                                        const ModulusOptions& opts) {
    const int ne = graph.edge_count();
    std::vector<double> rho(ne, 0.0);
    std::vector<Constraint> constraints;
    std::vector<char> in_f0(graph.node_count(), 0);
    for (int32_t v : sets.f0) in_f0[v] = 1;

    ModulusSolution sol;
    double min_len = 0.0;
    bool converged = false;

    std::vector<char> used(graph.node_count(), 0);
    std::vector<int32_t> touched;

    for (long round = 0; round < opts.max_rounds; ++round) {
        const DijkstraOut dj = dijkstra(graph, rho, sets.f0);

        // Violated disjoint paths, cheapest targets first.
        std::vector<int32_t> targets;
        for (int32_t t : sets.f1)
            if (dj.dist[t] < 1.0 - opts.tol) targets.push_back(t);
        std::sort(targets.begin(), targets.end(), [&](int32_t a, int32_t b) {
            return dj.dist[a] != dj.dist[b] ? dj.dist[a] < dj.dist[b] : a < b;
        });

        min_len = kInf;
        for (int32_t t : sets.f1) min_len = std::min(min_len, dj.dist[t]);
        sol.iterations = round + 1;
        if (targets.empty()) {
            converged = true;
            break;
        }

        for (int32_t v : touched) used[v] = 0;
        touched.clear();
        long added = 0;
        for (int32_t t : targets) {
            if (added >= opts.max_batch) break;
            Constraint c;
            bool disjoint = true;
            for (int32_t v = t; v >= 0; v = dj.pred_node[v]) {
                if (used[v]) {
                    disjoint = false;
                    break;
                }
                c.nodes.push_back(v);
                if (dj.pred_edge[v] >= 0) c.edges.push_back(dj.pred_edge[v]);
                if (in_f0[v]) break;
            }
            if (!disjoint || c.edges.empty()) continue;
            for (int32_t v : c.nodes) {
                used[v] = 1;
                touched.push_back(v);
            }
            std::reverse(c.nodes.begin(), c.nodes.end());
            std::reverse(c.edges.begin(), c.edges.end());
            constraints.push_back(std::move(c));
            ++added;
        }
        if (added == 0) {
            // All shortest paths hit already-used nodes; take just the best one.
            Constraint c;
            for (int32_t v = targets.front(); v >= 0; v = dj.pred_node[v]) {
                c.nodes.push_back(v);
                if (dj.pred_edge[v] >= 0) c.edges.push_back(dj.pred_edge[v]);
                if (in_f0[v]) break;
            }
            std::reverse(c.nodes.begin(), c.nodes.end());
            std::reverse(c.edges.begin(), c.edges.end());
            constraints.push_back(std::move(c));
        }

        // Projection step: dual coordinate ascent (cyclic over the active
        // constraints) for  min sum rho^2  s.t.  sum_{e in P} rho_e >= 1.
        // rho = (1/2) A^T lambda stays consistent with the multipliers.
        const double inner_tol = 0.02 * opts.tol;
        for (long sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            double worst = 0.0;
            for (auto& c : constraints) {
                double len = 0.0;
                for (int32_t e : c.edges) len += rho[e];
                const double viol = 1.0 - len;
                double step = 2.0 * viol / static_cast<double>(c.edges.size());
                if (step < -c.lambda) step = -c.lambda; // keep lambda >= 0
                if (step != 0.0) {
                    c.lambda += step;
                    const double dr = 0.5 * step;
                    for (int32_t e : c.edges) rho[e] += dr;
                }
                worst = std::max(worst, viol);
            }
            if (worst <= inner_tol) break;
        }
    }

    if (!converged)
        throw SolverError("modulus solver hit its round cap; best feasible value " +
                          std::to_string([&] {
                              double v = 0.0;
                              for (double r : rho) v += r * r;
                              return v;
                          }()));

    double value = 0.0;
    for (double r : rho) value += r * r;
    double lambda_sum = 0.0;
    for (const auto& c : constraints) {
        lambda_sum += c.lambda;
        if (c.lambda > 1e-12) sol.active_paths.push_back(c.nodes);
    }
    sol.value = value;
    sol.rho = std::move(rho);
    sol.duality_gap = std::max(0.0, 2.0 * value - lambda_sum);
    sol.constraints = static_cast<long>(constraints.size());
    sol.min_path_length = min_len;
    return sol;
}

ModulusSolution discrete_modulus(const GridGraph& graph, const CurveFamily& family,
                                 double exponent, const ModulusOptions& opts) {
    if (exponent != 2.0)
        throw ParameterError("only the conformal exponent 2 is supported");
    return discrete_modulus_marked(graph, marked_sets(graph, family), opts);
}

Domain image_domain(const PlanarMap& map, const Domain& domain) {
    switch (map.kind()) {
    case MapKind::Identity:
        return domain;
    case MapKind::Affine: {
        const Mat2 m = map.inverted() ? map.matrix().inverse() : map.matrix();
        if (m.b != 0.0 || m.c != 0.0 || m.a <= 0.0 || m.d <= 0.0)
            throw UnsupportedMapError(
                "affine image domains require an axis-aligned positive diagonal matrix");
        const DomainKind k = domain.kind();
        if (k != DomainKind::UnitSquare && k != DomainKind::Rect && k != DomainKind::Box)
            throw UnsupportedMapError("affine image domains require a rectangular source");
        const BBox bb = domain.bounding_box();
        const Vec2 t = map.inverted() ? Vec2{0.0, 0.0} - m.apply(map.translation())
                                      : map.translation();
        return Domain::box(m.a * bb.x0 + t.x, m.d * bb.y0 + t.y, m.a * bb.x1 + t.x,
                           m.d * bb.y1 + t.y);
    }
    case MapKind::HolderCusp:
        if (!map.inverted()) {
            if (domain.kind() != DomainKind::Diamond)
                throw UnsupportedMapError("cusp map image is implemented for the diamond");
            return Domain::cusp_domain(map.alpha());
        }
        if (domain.kind() != DomainKind::CuspDomain)
            throw UnsupportedMapError("inverse cusp image is implemented for the cusp domain");
        return Domain::diamond();
    case MapKind::RadialSquareDisk:
        if (!map.inverted()) {
            if (domain.kind() != DomainKind::Disk || domain.radius() != 1.0 ||
                domain.center().x != 0.0 || domain.center().y != 0.0)
                throw UnsupportedMapError("radial map image is implemented for the unit disk");
            return Domain::diamond();
        }
        if (domain.kind() != DomainKind::Diamond)
            throw UnsupportedMapError("inverse radial image is implemented for the diamond");
        return Domain::disk({0.0, 0.0}, 1.0);
    case MapKind::Composition: {
        Domain d = domain;
        for (const auto& part : map.parts()) d = image_domain(part, d);
        return d;
    }
    }
    throw Error("unreachable map kind");
}

ModulusSolution pushforward_modulus(const PlanarMap& map, const GridGraph& source_graph,
                                    const CurveFamily& family, const ModulusOptions& opts) {
    const MarkedSets src = marked_sets(source_graph, family);
    const Domain img = image_domain(map, source_graph.mask.domain);
    const GridGraph img_graph = make_grid_graph(img, source_graph.mask.h);

    MarkedSets dst;
    std::vector<char> taken(img_graph.node_count(), 0);
    auto transplant = [&](const std::vector<int32_t>& from, std::vector<int32_t>& to) {
        for (int32_t node : from) {
            const Vec2 p = map.evaluate(source_graph.mask.node_position(node));
            const int32_t img_node = static_cast<int32_t>(img_graph.mask.nearest_node(p));
            if (!taken[img_node]) {
                taken[img_node] = 1;
                to.push_back(img_node);
            }
        }
    };
    transplant(src.f0, dst.f0);
    transplant(src.f1, dst.f1);
    if (dst.f0.empty() || dst.f1.empty())
        throw ResolutionError("transplanted marked sets are empty on the image grid");
    return discrete_modulus_marked(img_graph, dst, opts);
}

double grid_capacity(const GridGraph& graph, const CurveFamily& family) {
    const MarkedSets sets = marked_sets(graph, family);
    const int n = graph.node_count();

    // 0 on F0, 1 on F1, discrete-harmonic in between; unknowns are the free
    // nodes of the 5-point Laplacian with unit edge weights.
    std::vector<int32_t> index(n, -1);
    std::vector<double> fixed(n, -1.0);
    for (int32_t v : sets.f0) fixed[v] = 0.0;
    for (int32_t v : sets.f1) fixed[v] = 1.0;
    int nf = 0;
    for (int v = 0; v < n; ++v)
        if (fixed[v] < 0.0) index[v] = nf++;

    Eigen::SparseMatrix<double> L(nf, nf);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nf);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(nf) * 5);
    for (int v = 0; v < n; ++v) {
        if (index[v] < 0) continue;
        double diag = 0.0;
        for (const auto& [e, w] : graph.adj[v]) {
            diag += 1.0;
            if (index[w] >= 0)
                trips.emplace_back(index[v], index[w], -1.0);
            else
                b[index[v]] += fixed[w];
        }
        trips.emplace_back(index[v], index[v], diag);
    }
    L.setFromTriplets(trips.begin(), trips.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success)
        throw SolverError("capacity factorization failed");
    const Eigen::VectorXd u_free = solver.solve(b);

    std::vector<double> u(n, 0.0);
    for (int v = 0; v < n; ++v) u[v] = index[v] >= 0 ? u_free[index[v]] : fixed[v];
    double energy = 0.0;
    for (const auto& e : graph.edges) {
        const double du = u[e[0]] - u[e[1]];
        energy += du * du;
    }
    return energy;
}

} // namespace qconf
