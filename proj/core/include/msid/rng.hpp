#pragma once

#include <cstdint>
#include <random>

namespace msid {

// All randomness in the library flows through mt19937_64 plus the two
// helpers below. std::uniform_real_distribution is implementation-defined,
// so doubles are derived from the raw 64-bit stream directly; results are
// bit-reproducible for a given seed on any platform.

inline double uniform_unit(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53; // [0, 1)
}

inline double uniform_symmetric(std::mt19937_64& gen)
{
    return 2.0 * uniform_unit(gen) - 1.0; // [-1, 1]
}

} // namespace msid
