#pragma once

#include "msid/micro_fem.hpp"
#include "msid/rve.hpp"
#include "msid/voigt.hpp"

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>

namespace msid {

// Homogenized constitutive pair plus the stress/strain-gradient coupling
// block (diagnostic only; it does not enter the stage-2 objective).
struct Tangents {
    CMatrix c = CMatrix::Zero();                          // GPa
    DMatrix d = DMatrix::Zero();                          // GPa mm^2
    Eigen::Matrix<double, 3, 6> coupling =
        Eigen::Matrix<double, 3, 6>::Zero();              // GPa mm
};

// LRU cache of factorized RVE solvers keyed by grid content and moduli.
// The solver works in normalized coordinates, so one entry serves every
// pore diameter with the same (vf, seed, raster_n): in stage-2 iterations a
// phi-only move re-uses the factorization exactly.
class HomogenizerCache {
public:
    explicit HomogenizerCache(std::size_t capacity = 2)
        : capacity_(capacity)
    {
    }

    std::shared_ptr<const MicroSolver> get_or_build(const MicroMesh& mesh);

    std::size_t builds() const { return builds_; }
    std::size_t hits() const { return hits_; }

private:
    std::size_t capacity_;
    std::size_t builds_ = 0;
    std::size_t hits_ = 0;
    std::list<std::pair<std::uint64_t, std::shared_ptr<const MicroSolver>>> lru_;
    std::mutex mutex_;
};

// Probe the RVE with the 3 unit macro-strain Voigt modes and the 6 unit
// strain-gradient Voigt modes; assemble C, D and the coupling block column
// by column. All 9 solves share one factorization.
Tangents homogenize(const RveSpec& spec, const IsotropicModuli& matrix,
                    const IsotropicModuli& pore,
                    HomogenizerCache* cache = nullptr);

struct LengthScaleFit {
    double l = 0.0;                 // mm
    double relative_residual = 0.0; // ||D - l^2 blockdiag(C,C)||_F / ||D||_F
};

// Least-squares fit of D by l^2 blockdiag(C, C) over l^2 >= 0.
LengthScaleFit extract_length_scale(const Tangents& t);

} // namespace msid
