#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace wiredelay {

using Complex = std::complex<double>;

/// Largest channel count supported by the dense kernels.
inline constexpr int kMaxDim = 256;

/// Thrown when an integrator or solver hits a non-finite or unusable state.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Dyson symmetry index: 1 = real/orthogonal class, 2 = complex/unitary class.
struct SymmetryClass {
    int beta = 2;

    SymmetryClass() = default;
    explicit SymmetryClass(int b) : beta(b) {
        if (b != 1 && b != 2)
            throw std::invalid_argument("SymmetryClass: beta must be 1 or 2, got " + std::to_string(b));
    }
};

inline void check_dim(int n, const char* where) {
    if (n < 1 || n > kMaxDim)
        throw std::invalid_argument(std::string(where) + ": dimension " + std::to_string(n) +
                                    " outside [1, " + std::to_string(kMaxDim) + "]");
}

}  // namespace wiredelay
