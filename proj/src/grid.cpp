#include "qconf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "qconf/errors.hpp"

namespace qconf {

int GridMask::locate(const Vec2& p) const {
    const int i = static_cast<int>(std::floor((p.x - x0) / h));
    const int j = static_cast<int>(std::floor((p.y - y0) / h));
    return node_at(i, j);
}

int GridMask::nearest_node(const Vec2& p) const {
    const int direct = locate(p);
    if (direct >= 0) return direct;
    const int ci = std::clamp(static_cast<int>(std::floor((p.x - x0) / h)), 0, nx - 1);
    const int cj = std::clamp(static_cast<int>(std::floor((p.y - y0) / h)), 0, ny - 1);
    int best = -1;
    double best_d = kInf;
    for (int ring = 1; ring < std::max(nx, ny); ++ring) {
        for (int dj = -ring; dj <= ring; ++dj) {
            for (int di = -ring; di <= ring; ++di) {
                if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                const int node = node_at(ci + di, cj + dj);
                if (node < 0) continue;
                const double d = (node_position(node) - p).norm();
                if (d < best_d) {
                    best_d = d;
                    best = node;
                }
            }
        }
        // One extra ring after the first hit: a closer node can still sit in it.
        if (best >= 0 && best_d <= (ring - 1) * h) break;
    }
    if (best < 0) throw ResolutionError("no grid node near requested point");
    return best;
}

bool GridMask::is_boundary_node(int node) const {
    const auto [i, j] = node_ij(node);
    return node_at(i - 1, j) < 0 || node_at(i + 1, j) < 0 || node_at(i, j - 1) < 0 ||
           node_at(i, j + 1) < 0;
}

GridMask build_grid_unchecked(const Domain& domain, double h) {
    if (!(h > 0.0)) throw ParameterError("grid cell size must be positive");
    GridMask g;
    g.domain = domain;
    g.h = h;
    const BBox bb = domain.bounding_box();
    g.x0 = bb.x0;
    g.y0 = bb.y0;
    g.nx = std::max(1, static_cast<int>(std::lround(bb.width() / h)));
    g.ny = std::max(1, static_cast<int>(std::lround(bb.height() / h)));
    g.node_of_cell.assign(static_cast<size_t>(g.nx) * g.ny, -1);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 c{g.x0 + (i + 0.5) * h, g.y0 + (j + 0.5) * h};
            if (!domain.contains(c)) continue;
            g.node_of_cell[g.cell_index(i, j)] = static_cast<int32_t>(g.cell_of_node.size());
            g.cell_of_node.push_back(static_cast<int32_t>(g.cell_index(i, j)));
        }
    }
    if (g.cell_of_node.empty()) throw ResolutionError("grid mask is empty");

    // Connectivity check from the first node.
    std::vector<char> seen(g.cell_of_node.size(), 0);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    size_t reached = 1;
    while (!bfs.empty()) {
        const int node = bfs.front();
        bfs.pop();
        const auto [i, j] = g.node_ij(node);
        const int nb[4] = {g.node_at(i - 1, j), g.node_at(i + 1, j), g.node_at(i, j - 1),
                           g.node_at(i, j + 1)};
        for (int n : nb) {
            if (n >= 0 && !seen[n]) {
                seen[n] = 1;
                ++reached;
                bfs.push(n);
            }
        }
    }
    if (reached != g.cell_of_node.size())
        throw ResolutionError("grid mask is disconnected at this resolution");
    return g;
}

GridMask build_grid(const Domain& domain, double h) {
    const BBox bb = domain.bounding_box();
    const double smallest = std::min(bb.width(), bb.height());
    if (smallest / h < 16.0 - 1e-9)
        throw ResolutionError("grid needs at least 16 cells across the smallest extent");
    return build_grid_unchecked(domain, h);
}

} // namespace qconf
