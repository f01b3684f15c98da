#pragma once

// Ground state of |grad u|^2 + (q/2) D(u, u) over L2-normalized fields
// supported in a fixed mask. Since the energy is a quadratic form, the
// minimizer is the lowest eigenvector of H = -Lap_mask + (q/2) G.

#include <cstdint>
#include <optional>
#include <vector>

#include "coulomb_lab/coulomb.hpp"
#include "coulomb_lab/field.hpp"
#include "coulomb_lab/mask.hpp"

namespace clab {

struct GroundStateOptions {
  /// Convergence when the residual norm drops below tol * lambda.
  double tol = 1e-6;
  int max_iters = 20000;
  /// Start from seeded noise instead of the distance bump.
  bool random_start = false;
  std::uint64_t seed = 0;
  KernelMode kernel = KernelMode::tabulated;
  /// Warm start; restricted to the mask. Falls back to the bump if zero there.
  std::optional<ScalarField> initial;
};

struct GroundState {
  ScalarField u;
  double lambda = 0.0;
  double dirichlet = 0.0;
  double coulomb = 0.0;
  int iterations = 0;
  /// L2 norm of H u - lambda u over all mask cells.
  double residual = 0.0;
  /// Rayleigh quotient after every iteration.
  std::vector<double> history;
};

/// Preconditioned locally optimal block gradient iteration (block size one)
/// with a box inverse-Laplacian preconditioner. Throws GeometryError on an
/// empty mask and SolverError if the tolerance is not met.
GroundState solve_ground_state(const DomainMask& mask, double q,
                               const GroundStateOptions& opts = {});

/// L2 norm over interior mask cells (all six neighbours inside) of
/// -Lap u - lambda u + (q/2) v_u.
double el_residual(const ScalarField& u, double lambda, const DomainMask& mask, double q,
                   KernelMode kernel = KernelMode::tabulated);
double el_residual(const GroundState& gs, const DomainMask& mask, double q,
                   KernelMode kernel = KernelMode::tabulated);

/// First Dirichlet eigenvalue of the mask (q = 0 ground state).
double dirichlet_eigenvalue(const DomainMask& mask, double tol = 1e-7);

}  // namespace clab
