#pragma once

#include <string>
#include <vector>

#include "qconf/grid.hpp"
#include "qconf/mapping.hpp"

namespace qconf {

/// 4-neighbor grid graph over a domain mask. Edges carry the admissible
/// density; an edge connects horizontally or vertically adjacent cells and
/// has geometric length h.
struct GridGraph {
    GridMask mask;
    std::vector<std::array<int32_t, 2>> edges;            // (node_a, node_b)
    std::vector<std::vector<std::array<int32_t, 2>>> adj; // node -> {(edge, other)}

    int node_count() const { return mask.node_count(); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    Vec2 edge_midpoint(int e) const {
        const Vec2 a = mask.node_position(edges[e][0]);
        const Vec2 b = mask.node_position(edges[e][1]);
        return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    }
};

GridGraph make_grid_graph(const Domain& domain, double h);

enum class FamilyKind { OppositeSides, AnnulusConnect, BoundaryArcs };

struct CurveFamily {
    FamilyKind kind = FamilyKind::OppositeSides;
    char axis = 'x';                    // OppositeSides: joins the two sides at the
                                        // x (resp. y) extremes of a rectangle
    double r_in = 0.0, r_out = 0.0;     // AnnulusConnect
    double arc_a0 = 0.0, arc_a1 = 0.0;  // BoundaryArcs, degrees
    double arc_b0 = 0.0, arc_b1 = 0.0;

    static CurveFamily opposite_sides(char axis);
    static CurveFamily annulus_connect(double r_in, double r_out);
    static CurveFamily boundary_arcs(double a0, double a1, double b0, double b1);
};

/// Parses `opposite-sides:x|y`, `annulus:rin=<r>,rout=<R>`,
/// `arcs:<a0>:<a1>,<b0>:<b1>` (degrees).
CurveFamily parse_family(const std::string& spec);

struct MarkedSets {
    std::vector<int32_t> f0;
    std::vector<int32_t> f1;
};

/// Realizes the family's two marked node sets on the grid.
MarkedSets marked_sets(const GridGraph& graph, const CurveFamily& family);

struct ModulusSolution {
    double value = 0.0;              // sum of rho_e^2 at the solved density
    std::vector<double> rho;         // admissible density per edge
    double duality_gap = 0.0;        // active-set QP gap from the multipliers
    long iterations = 0;             // outer constraint-generation rounds
    long constraints = 0;            // paths generated
    double min_path_length = 0.0;    // shortest rho-length at termination
    std::vector<std::vector<int32_t>> active_paths; // node chains with positive multiplier
};

struct ModulusOptions {
    double tol = 1e-3;        // admissibility slack: min path length >= 1 - tol
    long max_rounds = 4000;   // outer constraint-generation rounds
    long max_batch = 1024;    // disjoint violated paths added per round
    long max_sweeps = 20000;  // dual coordinate-ascent sweeps per projection
};

/// Discrete conformal modulus of the curve family: minimizes sum rho_e^2
/// subject to every node path joining the marked sets having rho-length
/// >= 1, by lazy constraint generation with a shortest-path oracle and a
/// dual coordinate-ascent projection step. exponent must equal 2.
ModulusSolution discrete_modulus(const GridGraph& graph, const CurveFamily& family,
                                 double exponent = 2.0, const ModulusOptions& opts = {});

ModulusSolution discrete_modulus_marked(const GridGraph& graph, const MarkedSets& sets,
                                        const ModulusOptions& opts = {});

/// Image domain of a builtin (map, domain) pair, when it is again a builtin.
Domain image_domain(const PlanarMap& map, const Domain& domain);

/// Modulus of the pushed-forward family: transplants the marked sets through
/// the map onto a grid over the image domain and solves there.
ModulusSolution pushforward_modulus(const PlanarMap& map, const GridGraph& source_graph,
                                    const CurveFamily& family, const ModulusOptions& opts = {});

/// Discrete 2-capacity of the condenser (F0, F1): Dirichlet energy of the
/// discrete harmonic potential with u = 0 on F0 and u = 1 on F1.
double grid_capacity(const GridGraph& graph, const CurveFamily& family);

} // namespace qconf
