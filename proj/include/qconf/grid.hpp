#pragma once

#include <cstdint>
#include <vector>

#include "qconf/domain.hpp"

namespace qconf {

/// Cell-centered grid mask over a domain: cells of size h x h anchored at the
/// bounding-box corner, kept when the center lies inside the domain.
/// Shared by the modulus solver and the finite-difference spectral module.
struct GridMask {
    Domain domain = Domain::unit_square();
    double h = 0.0;
    int nx = 0, ny = 0;        // cells across the bounding box
    double x0 = 0.0, y0 = 0.0; // bounding-box anchor
    std::vector<int32_t> node_of_cell; // nx*ny entries, -1 outside
    std::vector<int32_t> cell_of_node; // flat cell index per node

    int node_count() const { return static_cast<int>(cell_of_node.size()); }

    int cell_index(int i, int j) const { return j * nx + i; }
    int node_at(int i, int j) const {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
        return node_of_cell[cell_index(i, j)];
    }
    Vec2 node_position(int node) const {
        const int c = cell_of_node[node];
        return {x0 + (c % nx + 0.5) * h, y0 + (c / nx + 0.5) * h};
    }
    std::pair<int, int> node_ij(int node) const {
        const int c = cell_of_node[node];
        return {c % nx, c / nx};
    }
    /// Node containing p, or -1.
    int locate(const Vec2& p) const;
    /// Nearest node to p by Euclidean distance over an expanding ring search.
    int nearest_node(const Vec2& p) const;
    /// True when the node misses at least one of its four neighbors.
    bool is_boundary_node(int node) const;
};

/// Builds a connected grid mask. Throws ResolutionError when fewer than 16
/// cells span the domain's smallest extent or when the mask is disconnected
/// (cusp tips at coarse h).
GridMask build_grid(const Domain& domain, double h);

/// Relaxed variant used where the caller enforces its own size policy.
GridMask build_grid_unchecked(const Domain& domain, double h);

} // namespace qconf
