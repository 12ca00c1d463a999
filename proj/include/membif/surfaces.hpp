#pragma once

// Triangulated surfaces of revolution and their first-order normal perturbations.
//
// Vertex layout: index 0 is the apex on the axis; ring k = 1 .. n_profile-1 at
// tau_k = ell k / (n_profile-1) holds n_theta vertices, theta_j = 2 pi j / n_theta
// (taken in (-pi, pi] so that j and n_theta - j are exact mirror images).

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "membif/linearized.hpp"

namespace membif {

struct SurfaceMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<std::size_t, 3>> faces;  // 0-based
  std::vector<double> displacement;                // applied normal perturbation per vertex
  std::string kind;                                // revolve, branch or family
  std::map<std::string, double> meta;              // generating parameters

  std::size_t n_theta = 0;
  std::size_t n_profile = 0;

  std::size_t vertex_index(std::size_t ring, std::size_t j) const {
    return ring == 0 ? 0 : 1 + (ring - 1) * n_theta + j;
  }
  /// Vertices of the boundary ring, in theta order.
  std::vector<std::size_t> boundary() const;
  double area() const;
  /// V - E + F (1 for a disc).
  long euler_characteristic() const;
};

double mesh_angle(std::size_t j, std::size_t n_theta);

/// Throws InvalidParams for n_theta < 16 or n_profile < 3.
SurfaceMesh revolve(const ProfileCurve& curve, std::size_t n_theta, std::size_t n_profile = 241);

/// X_0 + s sin(phi) cos(theta) nu. Throws AmplitudeTooLarge when a triangle
/// collapses or flips.
SurfaceMesh branch_linear_mesh(const Sigma0Solution& sigma0, double s, std::size_t n_theta,
                               std::size_t n_profile = 241);

/// X_0 + t h nu, the tangent of the fixed-boundary family.
SurfaceMesh family_linear_mesh(const Sigma0Solution& sigma0, const LinearizedSolution& lin, double t,
                               std::size_t n_theta, std::size_t n_profile = 241);

}  // namespace membif
