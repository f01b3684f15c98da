#pragma once

// Tail truncation along one axis: slice profiles of a state on a domain,
// the cylinder graft that replaces the part below a cut, the volume
// rescaling, and the three-way classification of cuts.

#include <optional>
#include <string>
#include <vector>

#include "coulomb_lab/coulomb.hpp"
#include "coulomb_lab/field.hpp"
#include "coulomb_lab/mask.hpp"
#include "coulomb_lab/shapes.hpp"

namespace clab::surgery {

/// Slices are the cell layers normal to `axis` (1, 2 or 3).
struct TailProfile {
  int axis;
  std::vector<double> t;      // slice coordinate (cell centers)
  std::vector<double> eps;    // cross-section area
  std::vector<double> delta;  // int |grad u|^2 over the slice
  std::vector<double> delta_tangential;  // in-plane part of delta
  std::vector<double> mu;     // int u^2 over the slice
  std::vector<double> m;      // volume below t
  std::size_t index_of(double t) const;  // nearest slice
};

/// Gradient components are averages of the squared forward and backward
/// differences, so h sum delta equals the plain grid Dirichlet energy.
/// Throws UsageError on a bad axis.
TailProfile slice_profiles(const DomainMask& mask, const ScalarField& u, int axis);

struct Truncation {
  DomainMask mask;
  ScalarField u;
  double t;
  double sigma;
  /// int over the graft of |grad u~|^2 and u~^2 from the slice data:
  /// mu / sigma + sigma delta_tangential / 3 and sigma mu / 3.
  double graft_dirichlet;
  double graft_mass;
};

/// Keeps the part above slice `t`, and below it a cylinder of length
/// sigma = eps^{1/2} over the slice with u tapered linearly to zero.
/// A cut below the whole shape returns it unchanged with sigma = 0; an
/// empty slice with cells below it throws GeometryError.
Truncation build_truncation(const DomainMask& mask, const ScalarField& u, int axis, double t);

struct Rescaled {
  DomainMask mask;
  ScalarField u;
  double scale;  // dilation factor about the barycenter
};

/// Dilation to volume |B_1| with u(x) -> s^{-3/2} u(x / s), resampled trilinearly.
Rescaled rescale_competitor(const DomainMask& mask, const ScalarField& u);

enum class Condition { cond1, cond2, cond3 };
std::string to_string(Condition c);

struct Competitor {
  double sigma;
  double tilde_volume;
  double hat_dirichlet;
  double hat_coulomb;  // D(u^, u^)
  /// Rayleigh quotient of the rescaled graft against int |grad u|^2.
  double rayleigh_hat;
  double energy_after;
  bool decreased;
  /// (int_{tilde} |grad u~|^2 - int |grad u|^2) / (eps^{1/2} delta)
  double c_grad;
  /// (1 - int_{tilde} u~^2) / (eps^{1/2} delta + q m)
  double c_mass;
  /// graft_dirichlet / (eps^{1/2} delta) and graft_mass / (eps^{3/2} delta)
  double c2_grad;
  double c2_mass;
};

struct SurgeryOutcome {
  double t;
  double eps, delta, mu, m;
  Condition condition;
  /// m / ((eps + delta) eps^{1/2})
  double c4_ratio;
  double energy_before;
  std::optional<Competitor> competitor;  // present for cond3
};

struct ScanOptions {
  int axis = 1;
  double c4_ref = 2.0;
  /// Only cuts at or below this coordinate are scanned.
  double t_max = -1.0;
  double ground_tol = 1e-6;
  KernelMode kernel = KernelMode::tabulated;
};

/// Cond1: max(eps, delta) > 1. Cond2: m <= c4_ref (eps + delta) eps^{1/2}.
/// Cond3: otherwise; the competitor is built, rescaled and its ground state
/// solved. Empty slices with nothing below count as cond2; empty slices
/// with mass below them are skipped since no graft exists.
std::vector<SurgeryOutcome> trichotomy_scan(const DomainMask& mask, const ScalarField& u,
                                            double q, const ScanOptions& opts = {});

/// Bulb with a thin tail along -x used for the demonstrations.
shapes::Dumbbell tail_preset();
/// Three tails of different thickness for the constant measurements.
std::vector<shapes::Dumbbell> tail_family();

}  // namespace clab::surgery
