#include "coulomb_lab/penalized.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coulomb_lab/errors.hpp"
#include "coulomb_lab/level_set.hpp"
#include "coulomb_lab/radial.hpp"

namespace clab {

double f_eta(double s, double eta) {
  const double d = s - kUnitBallVolume;
  return d <= 0.0 ? eta * d : d / eta;
}

double mass_to_q(double m) { return 2.0 * std::pow(m / kUnitBallVolume, 4.0 / 3.0); }
double q_to_mass(double q) { return kUnitBallVolume * std::pow(q / 2.0, 0.75); }

double PenaltySpec::auto_M() {
  static const double value = 10.0 * (radial::ball_ground_state(1.0).energy + kUnitBallVolume) + 1.0;
  return value;
}

PenaltySpec PenaltySpec::with_auto_M(double eta) {
  PenaltySpec s{auto_M()};
  s.eta = eta;
  return s;
}

void PenaltySpec::validate() const {
  if (!(M > 0.0) || !std::isfinite(M)) throw UsageError("penalty.M must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw UsageError("penalty.eta must lie in (0, 1)");
  if (!(tau_supp >= 0.0)) throw UsageError("penalty.tau_supp must be nonnegative");
}

namespace {

MinimizerResult assemble(const ScalarField& u, double q, const PenaltySpec& spec,
                         double dirichlet, double support, KernelMode kernel) {
  MinimizerResult r(u);
  r.parts.dirichlet = dirichlet;
  r.parts.coulomb = 0.5 * q * (q == 0.0 ? 0.0 : coulomb_energy(u, CoulombKernel(u.grid(), kernel)));
  r.parts.l2penalty = spec.M * std::abs(inner(u, u) - 1.0);
  r.parts.volpenalty = f_eta(support, spec.eta);
  r.support_volume = support;
  r.energy = r.parts.total();
  return r;
}

}  // namespace

MinimizerResult evaluate(const ScalarField& u, double q, const PenaltySpec& spec,
                         KernelMode kernel) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < u.size(); ++i) count += std::abs(u[i]) > spec.tau_supp;
  return assemble(u, q, spec, dirichlet_energy(u), u.grid().cell_volume() * count, kernel);
}

MinimizerResult evaluate(const ScalarField& u, double q, const PenaltySpec& spec,
                         const DomainMask& mask, KernelMode kernel) {
  require_same_grid(u.grid(), mask.grid());
  return assemble(u, q, spec, dirichlet_energy(u, mask), mask.volume(), kernel);
}

ScalarField truncate(const ScalarField& u, double eps) {
  ScalarField t(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    t[i] = v > eps ? v - eps : (v < -eps ? v + eps : 0.0);
  }
  return t;
}

namespace {

// Volume of {level < 0} with a linear ramp across each cell.
double smooth_volume(const Grid& g, const std::vector<double>& level) {
  double s = 0.0;
  for (double l : level) s += std::clamp(0.5 - l / g.h(), 0.0, 1.0);
  return s * g.cell_volume();
}

bool relative_change_small(const std::vector<double>& e, int window, double tol) {
  if (static_cast<int>(e.size()) <= window) return false;
  const double now = e.back();
  const double then = e[e.size() - 1 - window];
  return std::abs(now - then) <= tol * std::max(1.0, std::abs(now));
}

}  // namespace

MinimizerResult minimize_shape(const DomainMask& initial, double q, const PenaltySpec& spec,
                               const MinimizeOptions& opts) {
  spec.validate();
  if (q < 0.0) throw UsageError("q must be nonnegative");
  if (initial.empty()) throw GeometryError("initial shape is empty");
  const Grid& g = initial.grid();
  const double h = g.h();

  std::vector<double> level(initial.level().begin(), initial.level().end());
  level_set::reinitialize(g, level);

  GroundStateOptions gopts;
  gopts.tol = opts.ground_tol;
  gopts.kernel = opts.kernel;

  std::optional<MinimizerResult> best;
  std::vector<double> smooth_energy;
  std::vector<TraceRow> history;
  std::optional<ScalarField> warm;
  const int margin = opts.band + 3;
  double drift = 0.0;

  for (int it = 0;; ++it) {
    DomainMask mask = DomainMask::from_level(g, level);
    if (mask.empty()) throw GeometryError("shape vanished during descent");
    gopts.initial = warm;
    GroundState gs = solve_ground_state(mask, q, gopts);
    warm = gs.u;

    ScalarField u = gs.u;
    if (spec.mode == PenaltyMode::penalize) {
      // minimizer of s^2 lambda + M huber(s^2 - 1) with Huber width 1e-6
      const double s2 = std::max(0.0, 1.0 - 1e-6 * gs.lambda / spec.M);
      u *= std::sqrt(s2);
    }
    MinimizerResult cur = evaluate(u, q, spec, mask, opts.kernel);
    if (!std::isfinite(cur.energy)) {
      throw SolverError("non-finite energy at iteration " + std::to_string(it), cur.energy);
    }

    const double vol = smooth_volume(g, level);
    smooth_energy.push_back(gs.lambda + f_eta(vol, spec.eta));

    // boundary speed |grad u|^2 - Lambda on the inside boundary cells
    const auto faces = boundary_faces(mask);
    const auto grad = boundary_gradient(gs.u, mask, faces);
    std::vector<double> sum(g.size(), 0.0);
    std::vector<std::uint8_t> seeded(g.size(), 0);
    std::vector<int> hits(g.size(), 0);
    for (std::size_t f = 0; f < faces.size(); ++f) {
      sum[faces[f].in] += grad[f] * grad[f];
      ++hits[faces[f].in];
      seeded[faces[f].in] = 1;
    }
    // the mean over boundary cells keeps the step volume-neutral
    double mean = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (seeded[i]) {
        sum[i] /= hits[i];
        mean += sum[i];
        ++cells;
      }
    mean /= std::max<std::size_t>(1, cells);

    const double rel = (mask.volume() - kUnitBallVolume) / kUnitBallVolume;
    const double gain = rel > 0.0 ? opts.gain / spec.eta : opts.gain * spec.eta;
    // the integral term absorbs the steady volume drift of the upwind transport
    drift = std::clamp(drift + opts.integral * gain * rel, -1.0, 1.0);
    const double multiplier = std::clamp(mean + gain * rel + drift, spec.eta, 1.0 / spec.eta);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (seeded[i]) sum[i] -= multiplier;
    std::vector<double> speed = level_set::extend(g, sum, seeded, opts.band);
    double vmax = 0.0;
    for (double v : speed) vmax = std::max(vmax, std::abs(v));
    const double dt = opts.cfl * h / std::max(vmax, multiplier);

    TraceRow row{it, cur.energy, cur.parts, cur.support_volume, multiplier, dt};
    history.push_back(row);
    if (opts.on_iteration) opts.on_iteration(row);

    const bool done = it + 1 >= opts.min_iters &&
                      relative_change_small(smooth_energy, opts.window, opts.tol);
    if (done || it + 1 >= opts.max_iters) {
      best = std::move(cur);
      best->converged = done;
      best->iterations = it + 1;
      best->lambda = gs.lambda;
      best->mask = std::move(mask);
      break;
    }

    level_set::advect(g, level, speed, dt);
    level_set::reinitialize(g, level, margin);
  }
  best->history = std::move(history);
  return std::move(*best);
}

MinimizerResult minimize(const ScalarField& u0, double q, const PenaltySpec& spec,
                         const MinimizeOptions& opts) {
  const DomainMask support = DomainMask::support_of(u0, spec.tau_supp);
  if (support.empty()) throw GeometryError("initial field has empty support");
  const Grid& g = u0.grid();
  return minimize_shape(
      DomainMask::from_level(g, level_set::signed_distance(g, support.inside_flags())), q, spec,
      opts);
}

}  // namespace clab
