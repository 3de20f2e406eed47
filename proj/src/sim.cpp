#include "retract/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

namespace retract::fem {

namespace {

struct Constraints {
  std::vector<char> mask;       // per node
  std::vector<Vec3> prescribed; // per node, valid where mask set
};

Constraints collect_constraints(const SimState& s, const FemMesh& mesh) {
  Constraints c;
  c.mask.assign(mesh.num_nodes(), 0);
  c.prescribed.assign(mesh.num_nodes(), Vec3::Zero());
  auto claim = [&](int n, const Vec3& target) {
    auto& m = c.mask[static_cast<std::size_t>(n)];
    if (m) throw std::invalid_argument("node " + std::to_string(n) + " is in two constraint sets");
    m = 1;
    c.prescribed[static_cast<std::size_t>(n)] = target;
  };
  for (int n : s.ap_nodes) claim(n, mesh.nodes[static_cast<std::size_t>(n)]);
  for (const auto& g : s.grasps) {
    if (!g) continue;
    for (std::size_t i = 0; i < g->nodes.size(); ++i) claim(g->nodes[i], g->tool + g->offsets[i]);
  }
  return c;
}

double free_max_norm(const Eigen::VectorXd& f, const std::vector<int>& dof_map) {
  double m = 0.0;
  for (Eigen::Index d = 0; d < f.size(); ++d)
    if (dof_map[static_cast<std::size_t>(d)] >= 0) m = std::max(m, std::abs(f[d]));
  return m;
}

Eigen::VectorXd restrict_free(const Eigen::VectorXd& f, const std::vector<int>& dof_map, int num_free) {
  Eigen::VectorXd r(num_free);
  for (Eigen::Index d = 0; d < f.size(); ++d) {
    const int k = dof_map[static_cast<std::size_t>(d)];
    if (k >= 0) r[k] = f[d];
  }
  return r;
}

// Newton direction from K d = r; shifts K when CG fails or the direction is not
// a descent direction of the energy (StVK loses convexity under compression).
Eigen::VectorXd newton_direction(const Eigen::SparseMatrix<double>& k, const Eigen::VectorXd& r) {
  double shift = 0.0;
  const double diag_scale = k.diagonal().cwiseAbs().mean();
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::SparseMatrix<double> a = k;
    if (shift > 0.0) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += shift;
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(4000);
    cg.compute(a);
    if (cg.info() == Eigen::Success) {
      Eigen::VectorXd d = cg.solve(r);
      if (cg.info() == Eigen::Success && d.allFinite() && d.dot(r) > 0.0) return d;
    }
    shift = shift == 0.0 ? 1e-4 * diag_scale : shift * 10.0;
  }
  // Steepest descent as a last resort.
  return r / std::max(diag_scale, 1e-12);
}

}  // namespace

std::vector<int> attachment_nodes(const FemMesh& mesh, const std::vector<ApPatch>& patches) {
  const int nx = mesh.resolution[0], ny = mesh.resolution[1], nz = mesh.resolution[2];
  std::vector<int> out;
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const int bottom = j * (nx + 1) + i;
        const Vec3& p = mesh.nodes[static_cast<std::size_t>(bottom)];
        if (in_any_patch(patches, p.x(), p.y())) out.push_back((k * (ny + 1) + j) * (nx + 1) + i);
      }
  return out;
}

SimState make_rest_state(const FemMesh& mesh, std::vector<int> ap_nodes) {
  SimState s;
  s.positions = pack(mesh.nodes);
  std::sort(ap_nodes.begin(), ap_nodes.end());
  ap_nodes.erase(std::unique(ap_nodes.begin(), ap_nodes.end()), ap_nodes.end());
  s.ap_nodes = std::move(ap_nodes);
  s.reactions = Eigen::VectorXd::Zero(s.positions.size());
  return s;
}

SimState solve_equilibrium(SimState state, const FemMesh& mesh, const Material& material,
                           const SolverOptions& options) {
  const Constraints c = collect_constraints(state, mesh);
  Positions& x = state.positions;
  std::vector<int> dof_map(mesh.num_dofs(), -1);
  int num_free = 0;
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    if (c.mask[n]) {
      x.segment<3>(static_cast<Eigen::Index>(3 * n)) = c.prescribed[n];
    } else {
      for (int d = 0; d < 3; ++d) dof_map[3 * n + static_cast<std::size_t>(d)] = num_free++;
    }
  }

  Eigen::VectorXd f = internal_forces(mesh, material, x);
  double res = free_max_norm(f, dof_map);
  int iter = 0;
  if (num_free > 0) {
    double energy = elastic_energy(mesh, material, x);
    while (res >= options.tolerance) {
      if (iter >= options.max_newton) {
        throw SolverError("equilibrium did not converge after " + std::to_string(iter) +
                              " Newton iterations (residual " + std::to_string(res) + " N)",
                          res);
      }
      ++iter;
      const Eigen::VectorXd r = restrict_free(f, dof_map, num_free);
      const Eigen::VectorXd d = newton_direction(tangent_stiffness(mesh, material, x, dof_map, num_free), r);

      Eigen::VectorXd step = Eigen::VectorXd::Zero(x.size());
      for (Eigen::Index dof = 0; dof < x.size(); ++dof) {
        const int k = dof_map[static_cast<std::size_t>(dof)];
        if (k >= 0) step[dof] = d[k];
      }
      double alpha = 1.0;
      Positions trial;
      Eigen::VectorXd f_trial;
      double e_trial = 0.0, res_trial = 0.0;
      for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
        trial = x + alpha * step;
        e_trial = elastic_energy(mesh, material, trial);
        f_trial = internal_forces(mesh, material, trial);
        res_trial = free_max_norm(f_trial, dof_map);
        const double slack = 1e-13 * std::max(1.0, std::abs(energy));
        if (std::isfinite(e_trial) && (e_trial <= energy + slack || res_trial < res)) break;
      }
      x = std::move(trial);
      f = std::move(f_trial);
      energy = e_trial;
      res = res_trial;
    }
  }

  state.reactions = Eigen::VectorXd::Zero(x.size());
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n)
    if (c.mask[n]) state.reactions.segment<3>(static_cast<Eigen::Index>(3 * n)) =
        f.segment<3>(static_cast<Eigen::Index>(3 * n));
  state.residual = res;
  state.newton_iterations = iter;
  return state;
}

SimState attach_grasp(SimState state, const FemMesh& mesh, Arm arm, const Vec3& tool_pos,
                      double grasp_radius) {
  if (state.grasping(arm))
    throw GraspError(std::string(arm_name(arm)) + " already holds tissue");
  std::vector<char> taken(mesh.num_nodes(), 0);
  for (int n : state.ap_nodes) taken[static_cast<std::size_t>(n)] = 1;
  for (const auto& g : state.grasps)
    if (g) for (int n : g->nodes) taken[static_cast<std::size_t>(n)] = 1;

  Grasp g;
  g.tool = tool_pos;
  const int layer = (mesh.resolution[0] + 1) * (mesh.resolution[1] + 1);
  for (int n : mesh.surface_nodes) {
    if (taken[static_cast<std::size_t>(n)]) continue;
    const Vec3 p = state.positions.segment<3>(3 * n);
    if ((p - tool_pos).norm() >= grasp_radius) continue;
    // The jaws pinch the slab through its thickness: the column below follows too.
    for (int m = n; m >= 0; m -= layer) {
      if (taken[static_cast<std::size_t>(m)]) continue;
      g.nodes.push_back(m);
      g.offsets.push_back(state.positions.segment<3>(3 * m) - tool_pos);
    }
  }
  if (g.nodes.empty())
    throw GraspError("no free tissue within " + std::to_string(grasp_radius) + " mm of the " +
                     std::string(arm_name(arm)) + " tool");
  state.grasps[index(arm)] = std::move(g);
  return state;
}

SimState move_tool(SimState state, Arm arm, const Vec3& tool_pos) {
  if (auto& g = state.grasps[index(arm)]) g->tool = tool_pos;
  return state;
}

SimState release_grasp(SimState state, const FemMesh& mesh, const Material& material, Arm arm,
                       const SolverOptions& options) {
  if (!state.grasping(arm)) throw GraspError(std::string(arm_name(arm)) + " holds no tissue");
  const Grasp held = *state.grasps[index(arm)];
  double travel = 0.0;
  for (std::size_t i = 0; i < held.nodes.size(); ++i) {
    const Vec3 rest = mesh.nodes[static_cast<std::size_t>(held.nodes[i])];
    travel = std::max(travel, (held.tool + held.offsets[i] - rest).norm());
  }
  const int steps = static_cast<int>(std::ceil(travel / options.unload_step - 1e-9));
  for (int k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    Grasp& g = *state.grasps[index(arm)];
    for (std::size_t i = 0; i < held.nodes.size(); ++i) {
      const Vec3 start = held.tool + held.offsets[i];
      const Vec3 rest = mesh.nodes[static_cast<std::size_t>(held.nodes[i])];
      g.offsets[i] = (1.0 - t) * start + t * rest - held.tool;
    }
    state = solve_equilibrium(std::move(state), mesh, material, options);
  }
  state.grasps[index(arm)].reset();
  return solve_equilibrium(std::move(state), mesh, material, options);
}

std::vector<double> node_force_magnitudes(const SimState& state) {
  std::vector<double> out(static_cast<std::size_t>(state.reactions.size() / 3));
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = state.reactions.segment<3>(static_cast<Eigen::Index>(3 * n)).norm();
  return out;
}

EnvState env_snapshot(const SimState& state, const FemMesh& mesh, const Vec3& roi) {
  EnvState env;
  env.roi = roi;
  std::vector<char> ap(mesh.num_nodes(), 0);
  for (int n : state.ap_nodes) ap[static_cast<std::size_t>(n)] = 1;
  env.points.reserve(mesh.surface_nodes.size());
  env.sigma.reserve(mesh.surface_nodes.size());
  const int layer = (mesh.resolution[0] + 1) * (mesh.resolution[1] + 1);
  for (std::size_t i = 0; i < mesh.surface_nodes.size(); ++i) {
    const int n = mesh.surface_nodes[i];
    env.points.emplace_back(state.positions.segment<3>(3 * n));
    Vec3 column = Vec3::Zero();
    for (int m = n; m >= 0; m -= layer) column += state.reactions.segment<3>(3 * m);
    env.sigma.push_back(column.norm());
    if (ap[static_cast<std::size_t>(n)]) env.fixed_indices.push_back(i);
  }
  return env;
}

void write_vtk(std::ostream& out, const SimState& state, const FemMesh& mesh) {
  out << "# vtk DataFile Version 3.0\n"
      << "tissue slab\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    const auto p = state.positions.segment<3>(static_cast<Eigen::Index>(3 * n));
    out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  out << "CELLS " << mesh.elements.size() << ' ' << mesh.elements.size() * 9 << '\n';
  for (const auto& e : mesh.elements) {
    out << 8;
    for (int n : e) out << ' ' << n;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.elements.size() << '\n';
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) out << "12\n";
  out << "POINT_DATA " << mesh.num_nodes() << '\n' << "SCALARS sigma double 1\nLOOKUP_TABLE default\n";
  for (double s : node_force_magnitudes(state)) out << s << '\n';
}

Material material_from(const Config& config) { return lame_params(config.young_modulus, config.poisson); }

FemMesh mesh_from(const Config& config) { return build_slab_mesh(config.tissue_dims, config.mesh_resolution); }

}  // namespace retract::fem
