#pragma once

// Fourth-order centred finite differences on equispaced samples.

#include <cstddef>
#include <span>

namespace membif::stencil {

/// Number of samples on each side a centred stencil needs.
inline constexpr std::size_t kHalfWidth = 2;

inline double d1(std::span<const double> u, std::size_t i, double h) {
  return (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
}

inline double d2(std::span<const double> u, std::size_t i, double h) {
  return (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * h * h);
}

}  // namespace membif::stencil
