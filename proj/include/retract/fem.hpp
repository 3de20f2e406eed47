#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "retract/types.hpp"

namespace retract::fem {

/// Regular hexahedral lattice; node (i, j, k) has index (k*(ny+1) + j)*(nx+1) + i.
/// Element corners follow the usual counter-clockwise bottom-then-top order.
struct FemMesh {
  std::array<double, 3> dims{};
  std::array<int, 3> resolution{};
  std::vector<Vec3> nodes;                   // rest positions
  std::vector<std::array<int, 8>> elements;
  std::vector<int> surface_nodes;            // top face, exported as the point cloud
  std::vector<int> bottom_nodes;             // bottom face, candidates for attachment

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_dofs() const { return 3 * nodes.size(); }

  // Per element, per Gauss point: reference shape gradients and quadrature weight.
  struct Quadrature {
    std::array<Eigen::Matrix<double, 8, 3>, 8> grad;  // dN_a/dX at each point
    std::array<double, 8> weight;                     // det J * w
  };
  std::vector<Quadrature> quadrature;
};

/// Slab centred on the origin in xy with its bottom face at z = 0.
/// Rejects non-positive dims or resolutions.
FemMesh build_slab_mesh(const std::array<double, 3>& dims, const std::array<int, 3>& resolution);

struct Material {
  double young = 0.0;  // Pa
  double poisson = 0.0;
  double lame_lambda = 0.0;  // Pa
  double lame_mu = 0.0;      // Pa
};

/// Standard isotropic conversion. Throws std::invalid_argument for poisson >= 0.5.
Material lame_params(double young, double poisson);

/// Positions are packed (x0, y0, z0, x1, ...) in mm; energy is in N*mm.
using Positions = Eigen::VectorXd;

Positions pack(const std::vector<Vec3>& points);

/// St Venant-Kirchhoff strain energy with 2x2x2 Gauss quadrature.
double elastic_energy(const FemMesh& mesh, const Material& material, const Positions& x);

/// -dE/dx, newtons per dof.
Eigen::VectorXd internal_forces(const FemMesh& mesh, const Material& material, const Positions& x);

/// d^2E/dx^2, full dof ordering, symmetric.
Eigen::SparseMatrix<double> tangent_stiffness(const FemMesh& mesh, const Material& material,
                                              const Positions& x);

/// Stiffness restricted to the dofs with dof_map[d] >= 0, renumbered to dof_map[d].
Eigen::SparseMatrix<double> tangent_stiffness(const FemMesh& mesh, const Material& material,
                                              const Positions& x, const std::vector<int>& dof_map,
                                              int num_free);

}  // namespace retract::fem
