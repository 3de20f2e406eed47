#include "retract/fem.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace retract::fem {

namespace {

using Mat3 = Eigen::Matrix3d;
using Grad = Eigen::Matrix<double, 8, 3>;

constexpr std::array<std::array<int, 3>, 8> kCornerSigns{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

Grad reference_gradients(const std::array<double, 3>& xi) {
  Grad d;
  for (int a = 0; a < 8; ++a) {
    const double sx = kCornerSigns[a][0], sy = kCornerSigns[a][1], sz = kCornerSigns[a][2];
    const double fx = 1.0 + sx * xi[0], fy = 1.0 + sy * xi[1], fz = 1.0 + sz * xi[2];
    d(a, 0) = sx * fy * fz / 8.0;
    d(a, 1) = fx * sy * fz / 8.0;
    d(a, 2) = fx * fy * sz / 8.0;
  }
  return d;
}

// Displacement gradient H = F - I. Displacements are taken relative to the
// first corner (the gradients sum to zero), so a uniform translation gives H = 0 exactly.
Mat3 displacement_gradient(const FemMesh& mesh, const std::array<int, 8>& elem, const Positions& x,
                           const Grad& g) {
  auto disp = [&](int n) -> Vec3 { return x.segment<3>(3 * n) - mesh.nodes[static_cast<std::size_t>(n)]; };
  const Vec3 u0 = disp(elem[0]);
  Mat3 h = Mat3::Zero();
  for (int a = 1; a < 8; ++a) h.noalias() += (disp(elem[a]) - u0) * g.row(a);
  return h;
}

struct StressState {
  Mat3 f;  // deformation gradient
  Mat3 s;  // second Piola-Kirchhoff stress
  double w = 0.0;
};

StressState stvk(const Mat3& h, double lambda, double mu) {
  StressState st;
  st.f = Mat3::Identity() + h;
  const Mat3 e = 0.5 * (h + h.transpose() + h.transpose() * h);
  const double tr = e.trace();
  st.s = lambda * tr * Mat3::Identity() + 2.0 * mu * e;
  st.w = 0.5 * lambda * tr * tr + mu * (e.array() * e.array()).sum();
  return st;
}

void check_dims(const FemMesh& mesh, const Positions& x) {
  if (static_cast<std::size_t>(x.size()) != mesh.num_dofs())
    throw std::invalid_argument("positions do not match the mesh");
}

// Pa -> N/mm^2
constexpr double kPaToNmm2 = 1e-6;

template <typename Visit>
void for_each_gauss_point(const FemMesh& mesh, const Material& m, const Positions& x, Visit&& visit) {
  const double lambda = m.lame_lambda * kPaToNmm2;
  const double mu = m.lame_mu * kPaToNmm2;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& elem = mesh.elements[e];
    const auto& q = mesh.quadrature[e];
    for (int p = 0; p < 8; ++p) {
      const Grad& g = q.grad[p];
      const StressState st = stvk(displacement_gradient(mesh, elem, x, g), lambda, mu);
      visit(elem, g, q.weight[p], st, lambda, mu);
    }
  }
}

// 24x24 element block for one Gauss point, added into ke.
void add_point_stiffness(Eigen::Matrix<double, 24, 24>& ke, const Grad& g, double vol,
                         const StressState& st, double lambda, double mu) {
  const Mat3 ffT = st.f * st.f.transpose();
  Eigen::Matrix<double, 8, 3> fg;  // row a: (F grad N_a)^T
  for (int a = 0; a < 8; ++a) fg.row(a) = (st.f * g.row(a).transpose()).transpose();
  const Eigen::Matrix<double, 8, 3> gs = g * st.s;
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const double geo = gs.row(a).dot(g.row(b));
      const double gg = g.row(a).dot(g.row(b));
      Mat3 k = geo * Mat3::Identity() + lambda * fg.row(a).transpose() * fg.row(b) +
               mu * gg * ffT + mu * fg.row(b).transpose() * fg.row(a);
      ke.block<3, 3>(3 * a, 3 * b) += vol * k;
    }
  }
}

}  // namespace

FemMesh build_slab_mesh(const std::array<double, 3>& dims, const std::array<int, 3>& resolution) {
  for (int d = 0; d < 3; ++d) {
    if (!(dims[d] > 0.0)) throw std::invalid_argument("slab dimensions must be positive");
    if (resolution[d] < 1) throw std::invalid_argument("slab resolution must be >= 1 per axis");
  }
  FemMesh mesh;
  mesh.dims = dims;
  mesh.resolution = resolution;
  const int nx = resolution[0], ny = resolution[1], nz = resolution[2];
  auto node = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };

  mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) * (nz + 1)));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.nodes.emplace_back(-dims[0] / 2.0 + dims[0] * i / nx, -dims[1] / 2.0 + dims[1] * j / ny,
                                dims[2] * k / nz);

  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      mesh.bottom_nodes.push_back(node(i, j, 0));
      mesh.surface_nodes.push_back(node(i, j, nz));
    }

  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.elements.push_back({node(i, j, k), node(i + 1, j, k), node(i + 1, j + 1, k), node(i, j + 1, k),
                                 node(i, j, k + 1), node(i + 1, j, k + 1), node(i + 1, j + 1, k + 1),
                                 node(i, j + 1, k + 1)});

  const double gp = 1.0 / std::sqrt(3.0);
  std::array<Grad, 8> ref;
  for (int p = 0; p < 8; ++p)
    ref[p] = reference_gradients({kCornerSigns[p][0] * gp, kCornerSigns[p][1] * gp, kCornerSigns[p][2] * gp});

  mesh.quadrature.resize(mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    Eigen::Matrix<double, 8, 3> xe;
    for (int a = 0; a < 8; ++a) xe.row(a) = mesh.nodes[static_cast<std::size_t>(mesh.elements[e][a])].transpose();
    for (int p = 0; p < 8; ++p) {
      const Mat3 jac = xe.transpose() * ref[p];  // dX_i / dxi_j
      const double det = jac.determinant();
      if (!(det > 0.0)) throw std::invalid_argument("degenerate element");
      mesh.quadrature[e].grad[p] = ref[p] * jac.inverse();
      mesh.quadrature[e].weight[p] = det;
    }
  }
  return mesh;
}

Material lame_params(double young, double poisson) {
  if (poisson >= 0.5) throw std::invalid_argument("poisson ratio must be < 0.5");
  Material m;
  m.young = young;
  m.poisson = poisson;
  m.lame_lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  m.lame_mu = young / (2.0 * (1.0 + poisson));
  return m;
}

Positions pack(const std::vector<Vec3>& points) {
  Positions x(static_cast<Eigen::Index>(3 * points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) x.segment<3>(static_cast<Eigen::Index>(3 * i)) = points[i];
  return x;
}

double elastic_energy(const FemMesh& mesh, const Material& material, const Positions& x) {
  check_dims(mesh, x);
  double energy = 0.0;
  for_each_gauss_point(mesh, material, x,
                       [&](const auto&, const Grad&, double vol, const StressState& st, double, double) {
                         energy += st.w * vol;
                       });
  return energy;
}

Eigen::VectorXd internal_forces(const FemMesh& mesh, const Material& material, const Positions& x) {
  check_dims(mesh, x);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(x.size());
  for_each_gauss_point(mesh, material, x,
                       [&](const std::array<int, 8>& elem, const Grad& g, double vol, const StressState& st,
                           double, double) {
                         const Mat3 p = st.f * st.s;
                         for (int a = 0; a < 8; ++a)
                           f.segment<3>(3 * elem[a]) -= vol * (p * g.row(a).transpose());
                       });
  return f;
}

Eigen::SparseMatrix<double> tangent_stiffness(const FemMesh& mesh, const Material& material,
                                              const Positions& x, const std::vector<int>& dof_map,
                                              int num_free) {
  check_dims(mesh, x);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.elements.size() * 576);
  const double lambda = material.lame_lambda * kPaToNmm2;
  const double mu = material.lame_mu * kPaToNmm2;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& elem = mesh.elements[e];
    const auto& q = mesh.quadrature[e];
    Eigen::Matrix<double, 24, 24> ke = Eigen::Matrix<double, 24, 24>::Zero();
    for (int p = 0; p < 8; ++p) {
      const StressState st = stvk(displacement_gradient(mesh, elem, x, q.grad[p]), lambda, mu);
      add_point_stiffness(ke, q.grad[p], q.weight[p], st, lambda, mu);
    }
    for (int a = 0; a < 24; ++a) {
      const int ra = dof_map[static_cast<std::size_t>(3 * elem[a / 3] + a % 3)];
      if (ra < 0) continue;
      for (int b = 0; b < 24; ++b) {
        const int cb = dof_map[static_cast<std::size_t>(3 * elem[b / 3] + b % 3)];
        if (cb < 0) continue;
        trips.emplace_back(ra, cb, ke(a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> k(num_free, num_free);
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

Eigen::SparseMatrix<double> tangent_stiffness(const FemMesh& mesh, const Material& material,
                                              const Positions& x) {
  std::vector<int> identity(mesh.num_dofs());
  for (std::size_t d = 0; d < identity.size(); ++d) identity[d] = static_cast<int>(d);
  return tangent_stiffness(mesh, material, x, identity, static_cast<int>(identity.size()));
}

}  // namespace retract::fem
