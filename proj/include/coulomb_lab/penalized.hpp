#pragma once

// The unconstrained functional
//   |grad u|^2 + (q/2) D(u,u) + M |int u^2 - 1| + f_eta(|{u != 0}|)
// and its minimization over shapes.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "coulomb_lab/coulomb.hpp"
#include "coulomb_lab/field.hpp"
#include "coulomb_lab/ground_state.hpp"
#include "coulomb_lab/mask.hpp"

namespace clab {

/// eta (s - |B_1|) below |B_1|, (s - |B_1|) / eta above.
double f_eta(double s, double eta);

/// q = 2 (m / |B_1|)^{4/3} and its inverse.
double mass_to_q(double m);
double q_to_mass(double q);

enum class PenaltyMode { project, penalize };

struct PenaltySpec {
  double M;
  double eta = 0.5;
  double tau_supp = 0.0;
  PenaltyMode mode = PenaltyMode::project;

  /// M = 10 (E_1(B_1) + |B_1|) + 1 with E_1 from the radial solver.
  static double auto_M();
  static PenaltySpec with_auto_M(double eta = 0.5);
  /// Throws UsageError naming the offending field.
  void validate() const;
};

/// Each part is a term of the functional, so they sum to the energy.
struct EnergyParts {
  double dirichlet = 0.0;
  double coulomb = 0.0;  // (q/2) D(u, u)
  double l2penalty = 0.0;
  double volpenalty = 0.0;

  double total() const { return dirichlet + coulomb + l2penalty + volpenalty; }
};

struct TraceRow {
  int iteration;
  double energy;
  EnergyParts parts;
  double support_volume;
  double multiplier;  // boundary level of |grad u|^2 the flow drives towards
  double step;
};

struct MinimizerResult {
  explicit MinimizerResult(ScalarField field) : u(std::move(field)) {}

  ScalarField u;
  double energy = 0.0;
  EnergyParts parts;
  double support_volume = 0.0;
  std::vector<TraceRow> history;
  int iterations = 0;
  bool converged = false;
  /// Final shape when the result comes from a shape run.
  std::optional<DomainMask> mask;
  double lambda = 0.0;
};

/// Exact evaluation with the plain grid energy; support counted as
/// h^3 #{|u| > tau_supp}.
MinimizerResult evaluate(const ScalarField& u, double q, const PenaltySpec& spec,
                         KernelMode kernel = KernelMode::tabulated);
/// Same, but with the cut-cell energy of `mask` and support = the mask.
MinimizerResult evaluate(const ScalarField& u, double q, const PenaltySpec& spec,
                         const DomainMask& mask, KernelMode kernel = KernelMode::tabulated);

/// (u - eps)_+ - (u + eps)_-
ScalarField truncate(const ScalarField& u, double eps);

struct MinimizeOptions {
  /// Stop when the relative energy change over `window` iterations is below tol.
  double tol = 1e-5;
  int window = 40;
  int min_iters = 60;
  int max_iters = 1500;
  /// Boundary displacement per step, in cells.
  double cfl = 0.5;
  /// Volume controller gain.
  double gain = 2.0;
  double integral = 0.05;
  /// Layers of cells the boundary velocity is extended into.
  int band = 3;
  double ground_tol = 1e-6;
  KernelMode kernel = KernelMode::tabulated;
  std::function<void(const TraceRow&)> on_iteration;
};

/// Shape descent: each step solves the ground state on the current shape,
/// moves the boundary with normal speed |grad u|^2 - Lambda, where Lambda is
/// a subgradient of f_eta chosen to steer the volume, and keeps the level
/// function a signed distance.
MinimizerResult minimize_shape(const DomainMask& initial, double q, const PenaltySpec& spec,
                               const MinimizeOptions& opts = {});

/// Starts from the support of u0.
MinimizerResult minimize(const ScalarField& u0, double q, const PenaltySpec& spec,
                         const MinimizeOptions& opts = {});

}  // namespace clab
