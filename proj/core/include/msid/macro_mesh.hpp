#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace msid {

// Structured cantilever mesh: (nx+1)*(ny+1) nodes, every grid cell split
// along its lower-left to upper-right diagonal into two triangles.
struct MacroMesh {
    double length = 0.0; // mm, x in [0, length]
    double depth = 0.0;  // mm, y in [0, depth]
    int nx = 0;
    int ny = 0;
    std::vector<Eigen::Vector2d> nodes;
    std::vector<std::array<int, 3>> triangles; // CCW

    int node_count() const { return static_cast<int>(nodes.size()); }
    int node_id(int i, int j) const { return j * (nx + 1) + i; }
    double dx() const { return length / nx; }
    double dy() const { return depth / ny; }

    // Top-edge (y = depth) nodes ordered by increasing x.
    std::vector<int> top_edge_nodes() const;
    // Left-edge (x = 0) nodes ordered by increasing y.
    std::vector<int> left_edge_nodes() const;
    // Free-end node closest to mid depth (rounded down for odd ny).
    int tip_mid_depth_node() const { return node_id(nx, ny / 2); }
    int tip_top_corner_node() const { return node_id(nx, ny); }
    int tip_bottom_corner_node() const { return node_id(nx, 0); }

    double triangle_area(int t) const;
};

MacroMesh build_cantilever(double length, double depth, int nx, int ny);

} // namespace msid
