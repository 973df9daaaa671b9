#include "msid/rve.hpp"

#include "msid/errors.hpp"
#include "msid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace msid {

namespace {

// Squared distance on the periodic unit square.
double periodic_dist2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    double dx = std::abs(a.x() - b.x());
    double dy = std::abs(a.y() - b.y());
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    return dx * dx + dy * dy;
}

} // namespace

void RveSpec::validate() const
{
    if (!(phi > 0.0)) {
        throw ParameterError("RveSpec: phi must be positive");
    }
    if (!(vf > 0.0 && vf < 0.5)) {
        throw ParameterError("RveSpec: vf must lie in (0, 0.5)");
    }
    if (!(size_factor >= 4.0)) {
        throw ParameterError("RveSpec: size_factor must be >= 4");
    }
    if (raster_n < 50) {
        throw ParameterError("RveSpec: raster_n must be >= 50");
    }
}

double CircleSet::min_periodic_distance() const
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            best = std::min(best, periodic_dist2(centers[i], centers[j]));
        }
    }
    return std::sqrt(best);
}

int circle_count(double vf, double size_factor)
{
    return static_cast<int>(
        std::floor(vf * size_factor * size_factor * 4.0 / M_PI));
}

CircleSet rsa_pack(const RveSpec& spec)
{
    spec.validate();
    const int n = circle_count(spec.vf, spec.size_factor);
    CircleSet set;
    set.radius = 1.0 / (2.0 * spec.size_factor);
    set.periodic = true;
    set.centers.reserve(static_cast<std::size_t>(n));

    const double min_d2 = 4.0 * set.radius * set.radius;
    std::mt19937_64 gen(spec.seed);
    constexpr long kMaxRejections = 1000000;
    long rejections = 0;
    while (static_cast<int>(set.centers.size()) < n) {
        const Eigen::Vector2d cand(uniform_unit(gen), uniform_unit(gen));
        bool ok = true;
        for (const Eigen::Vector2d& c : set.centers) {
            if (periodic_dist2(cand, c) < min_d2) {
                ok = false;
                break;
            }
        }
        if (ok) {
            set.centers.push_back(cand);
            rejections = 0;
        } else if (++rejections > kMaxRejections) {
            std::ostringstream os;
            os << "rsa_pack: exceeded " << kMaxRejections
               << " consecutive rejections at " << set.centers.size() << "/"
               << n << " circles (vf too high)";
            throw PackingError(os.str());
        }
    }
    return set;
}

double MaterialGrid::pore_fraction() const
{
    std::size_t count = 0;
    for (std::uint8_t p : pore) {
        count += p;
    }
    return static_cast<double>(count) / static_cast<double>(pore.size());
}

MaterialGrid rasterize(const CircleSet& circles, int raster_n,
                       double edge_length)
{
    if (raster_n < 1) {
        throw ParameterError("rasterize: raster_n must be >= 1");
    }
    MaterialGrid grid;
    grid.n = raster_n;
    grid.edge_length = edge_length;
    grid.pore.assign(
        static_cast<std::size_t>(raster_n) * static_cast<std::size_t>(raster_n),
        0);

    const double r2 = circles.radius * circles.radius;
    for (int j = 0; j < raster_n; ++j) {
        for (int i = 0; i < raster_n; ++i) {
            const Eigen::Vector2d cell((i + 0.5) / raster_n,
                                       (j + 0.5) / raster_n);
            for (const Eigen::Vector2d& c : circles.centers) {
                if (periodic_dist2(cell, c) < r2) {
                    grid.pore[static_cast<std::size_t>(j) *
                                  static_cast<std::size_t>(raster_n) +
                              static_cast<std::size_t>(i)] = 1;
                    break;
                }
            }
        }
    }
    return grid;
}

std::string export_image(const MaterialGrid& grid)
{
    std::ostringstream os;
    os << "P5\n" << grid.n << " " << grid.n << "\n255\n";
    std::string out = os.str();
    out.reserve(out.size() + grid.pore.size());
    for (int j = grid.n - 1; j >= 0; --j) {
        for (int i = 0; i < grid.n; ++i) {
            out.push_back(grid.is_pore(i, j) ? '\0' : static_cast<char>(255));
        }
    }
    return out;
}

} // namespace msid
