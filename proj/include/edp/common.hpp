#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace edp {

// Bad inputs / malformed files / missing samples. CLI maps this to exit 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf encountered in a forward value or a loss. CLI maps this to exit 4.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

// Derived stream: identical (seed, tags...) always yields the same generator,
// distinct tags give decorrelated streams.
inline Rng make_rng(std::uint64_t seed, std::uint64_t tag0 = 0, std::uint64_t tag1 = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag0), static_cast<std::uint32_t>(tag0 >> 32),
                      static_cast<std::uint32_t>(tag1), static_cast<std::uint32_t>(tag1 >> 32)};
    return Rng(seq);
}

struct Point {
    double x = 0.0;
    double y = 0.0;
};

}  // namespace edp
