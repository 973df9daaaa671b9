#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace msid {

// Microstructure descriptor: pore diameter, target volume fraction, RVE
// size relative to the pore diameter, and the raster resolution.
struct RveSpec {
    double phi = 0.3;          // pore diameter (mm)
    double vf = 0.15;          // target pore volume fraction
    double size_factor = 10.0; // RVE edge / pore diameter
    std::uint64_t seed = 0;
    int raster_n = 200;        // pixels per edge

    double edge_length() const { return size_factor * phi; }
    void validate() const;
};

// Equal circles in normalized unit-square coordinates with periodic
// wrap-around. The normalized radius is 1 / (2 size_factor), so the
// packing depends on (vf, size_factor, seed) only, never on phi.
struct CircleSet {
    std::vector<Eigen::Vector2d> centers;
    double radius = 0.0;
    bool periodic = true;

    // Minimum center distance under periodic images.
    double min_periodic_distance() const;
};

// floor(vf * size_factor^2 * 4 / pi): circle count hitting the target
// fraction from below.
int circle_count(double vf, double size_factor);

// Random sequential adsorption with periodic wrap-around. Deterministic
// for a fixed (vf, size_factor, seed). Throws PackingError after 10^6
// consecutive rejections.
CircleSet rsa_pack(const RveSpec& spec);

struct MaterialGrid {
    int n = 0;                  // cells per edge
    double edge_length = 0.0;   // mm
    std::vector<std::uint8_t> pore; // row-major, 1 = pore

    bool is_pore(int i, int j) const
    {
        return pore[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
                    static_cast<std::size_t>(i)] != 0;
    }
    double pore_fraction() const;
};

// A cell is pore iff its center lies inside any circle (periodic images
// included).
MaterialGrid rasterize(const CircleSet& circles, int raster_n,
                       double edge_length);

// Binary P5 PGM, pore = 0, matrix = 255. Top raster row first.
std::string export_image(const MaterialGrid& grid);

} // namespace msid
