#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace msid {

// Sampled surface displacements: the output of the measurement operator
// applied to a solved field, or experimental data loaded from disk.
struct MeasurementSet {
    std::vector<double> x;     // sample locations (mm)
    std::vector<double> y;     // mm
    std::vector<double> value; // displacement (mm)
    double noise_gamma = 0.0;
    std::uint64_t noise_seed = 0;

    std::size_t size() const { return value.size(); }

    double norm() const
    {
        double s = 0.0;
        for (double v : value) {
            s += v * v;
        }
        return std::sqrt(s);
    }
};

} // namespace msid
