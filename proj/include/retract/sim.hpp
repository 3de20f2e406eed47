#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "retract/config.hpp"
#include "retract/fem.hpp"
#include "retract/scenario.hpp"
#include "retract/types.hpp"

namespace retract::fem {

/// Grasped nodes follow the tool rigidly: target = tool + offset.
struct Grasp {
  std::vector<int> nodes;
  std::vector<Vec3> offsets;
  Vec3 tool = Vec3::Zero();
};

struct SimState {
  Positions positions;
  std::vector<int> ap_nodes;                 // held at rest position
  std::array<std::optional<Grasp>, 2> grasps;
  Eigen::VectorXd reactions;                 // internal force at constrained dofs, zero elsewhere
  double residual = 0.0;                     // free-dof max-norm after the last solve, N
  int newton_iterations = 0;

  bool grasping(Arm a) const { return grasps[index(a)].has_value(); }
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual(last_residual) {}
  double last_residual;
};

class GraspError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double tolerance = 1e-6;  // N, free-dof max-norm
  int max_newton = 50;
  double unload_step = 1.0;  // mm, continuation increment when releasing
};

/// Nodes of whole columns whose bottom node lies inside an attachment patch.
std::vector<int> attachment_nodes(const FemMesh& mesh, const std::vector<ApPatch>& patches);

SimState make_rest_state(const FemMesh& mesh, std::vector<int> ap_nodes);

/// Quasi-static Newton solve with constrained nodes at their prescribed
/// positions. Throws SolverError after max_newton iterations; throws
/// std::invalid_argument when a node belongs to two constraint sets.
SimState solve_equilibrium(SimState state, const FemMesh& mesh, const Material& material,
                           const SolverOptions& options = {});

/// Free surface nodes strictly within grasp_radius of the tool, together with
/// the free nodes of their columns through the thickness, start following it. Throws GraspError when nothing is in range or the arm
/// already holds tissue.
SimState attach_grasp(SimState state, const FemMesh& mesh, Arm arm, const Vec3& tool_pos,
                      double grasp_radius);

/// Moves the prescribed positions of an active grasp; no solve.
SimState move_tool(SimState state, Arm arm, const Vec3& tool_pos);

/// Drops the grasp and re-solves. The grasped nodes are first carried back
/// toward their rest positions in unload_step increments so the tissue relaxes
/// along a continuation path (StVK admits spurious buckled equilibria under a
/// sudden release). Throws GraspError when no grasp is active.
SimState release_grasp(SimState state, const FemMesh& mesh, const Material& material, Arm arm,
                       const SolverOptions& options = {});

/// Reaction magnitude per mesh node (zero on free nodes).
std::vector<double> node_force_magnitudes(const SimState& state);

/// Surface points are the top nodes. sigma at a point is the magnitude of the
/// summed reaction over its through-thickness column.
EnvState env_snapshot(const SimState& state, const FemMesh& mesh, const Vec3& roi);

/// Legacy ASCII VTK unstructured grid with a per-node "sigma" scalar.
void write_vtk(std::ostream& out, const SimState& state, const FemMesh& mesh);

Material material_from(const Config& config);
FemMesh mesh_from(const Config& config);

}  // namespace retract::fem
