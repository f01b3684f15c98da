#pragma once

// One-dimensional solvers for radially symmetric states on the unit ball.
// These are the high-accuracy references for the 3D code.

#include <vector>

#include "coulomb_lab/field.hpp"

namespace clab::radial {

/// Samples u(r_j) at r_j = (j + 1/2) r_max / m.
struct RadialProfile {
  double r_max = 1.0;
  std::vector<double> values;
  bool normalized = false;

  int m() const { return static_cast<int>(values.size()); }
  double dr() const { return r_max / m(); }
  double r(int j) const { return (j + 0.5) * dr(); }
  /// Sixth-order interpolation, even about r = 0, zero for r >= r_max.
  double operator()(double r) const;
  /// 4 pi int u^2 r^2 dr.
  double mass() const;
};

struct BallEigen {
  double lambda;
  RadialProfile profile;
  /// u'(1) of the normalized profile.
  double boundary_slope;
};

/// First Dirichlet eigenpair of the unit ball by RK4 shooting and bisection.
BallEigen dirichlet_eigen_ball(int m = 4096);

/// D(u, u) for the radial density u via Newton's theorem, 4-point Gauss per
/// sample cell on a sixth-order interpolant.
double coulomb_energy_radial(const RadialProfile& p);

/// D(u_B, u_B) for the normalized first eigenfunction of the unit ball.
double reference_coulomb_constant();

struct RadialOptions {
  int m = 4096;
  double damping = 0.5;
  double tol = 1e-12;
  int max_iters = 1000;
};

struct BallState {
  double energy;  // E_q(B_1)
  double lambda;
  double dirichlet;
  double coulomb;
  RadialProfile profile;
  int iterations;
  double residual;  // Euler-Lagrange residual in the radial L2 norm
};

/// Ground state of |grad u|^2 + (q/2) D(u, u) on the unit ball by damped
/// self-consistent iteration. Throws SolverError on non-convergence.
BallState ball_ground_state(double q, const RadialOptions& opts = {});

/// Samples a radial profile centered at `center` onto a grid.
ScalarField sample(const RadialProfile& p, const Grid& grid, const Vec3& center = {0, 0, 0});

}  // namespace clab::radial
