#include "msid/macro_mesh.hpp"

#include "msid/errors.hpp"

namespace msid {

std::vector<int> MacroMesh::top_edge_nodes() const
{
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(nx) + 1);
    for (int i = 0; i <= nx; ++i) {
        ids.push_back(node_id(i, ny));
    }
    return ids;
}

std::vector<int> MacroMesh::left_edge_nodes() const
{
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(ny) + 1);
    for (int j = 0; j <= ny; ++j) {
        ids.push_back(node_id(0, j));
    }
    return ids;
}

double MacroMesh::triangle_area(int t) const
{
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Eigen::Vector2d& a = nodes[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d& b = nodes[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d& c = nodes[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (c.x() - a.x()) * (b.y() - a.y()));
}

MacroMesh build_cantilever(double length, double depth, int nx, int ny)
{
    if (!(length > 0.0) || !(depth > 0.0)) {
        throw ParameterError("build_cantilever: dimensions must be positive");
    }
    if (nx < 1 || ny < 1) {
        throw ParameterError("build_cantilever: nx, ny must be >= 1");
    }

    MacroMesh mesh;
    mesh.length = length;
    mesh.depth = depth;
    mesh.nx = nx;
    mesh.ny = ny;

    const double dx = length / nx;
    const double dy = depth / ny;
    mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            mesh.nodes.emplace_back(i * dx, j * dy);
        }
    }

    mesh.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = mesh.node_id(i, j);
            const int b = mesh.node_id(i + 1, j);
            const int c = mesh.node_id(i + 1, j + 1);
            const int d = mesh.node_id(i, j + 1);
            mesh.triangles.push_back({a, b, c}); // lower
            mesh.triangles.push_back({a, c, d}); // upper
        }
    }
    return mesh;
}

} // namespace msid
