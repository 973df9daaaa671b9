#pragma once

#include <cstddef>
#include <cstdint>

namespace msid {

// 64-bit FNV-1a. Used for stiffness fingerprints and output-file checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t seed = 14695981039346656037ull)
{
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace msid
