// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. Names on the command line select a subset.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "coulomb_lab/cli.hpp"
#include "coulomb_lab/counterexamples.hpp"
#include "coulomb_lab/diagnostics.hpp"
#include "coulomb_lab/ground_state.hpp"
#include "coulomb_lab/penalized.hpp"
#include "coulomb_lab/radial.hpp"
#include "coulomb_lab/shapes.hpp"
#include "coulomb_lab/surgery.hpp"

using namespace clab;
namespace fs = std::filesystem;

namespace {

const double kPi2 = kPi * kPi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

std::string fmt(double x, int digits = 5) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

Verdict eigenvalue_oracle() {
  Verdict v;
  const double lam = radial::dirichlet_eigen_ball().lambda;
  v.check(std::abs(lam - kPi2) <= 1e-8, "radial eigenvalue within 1e-8 of pi^2");
  double err[3];
  double at96 = 0.0;
  const int ns[3] = {48, 96, 192};
  for (int i = 0; i < 3; ++i) {
    Grid g(ns[i], 1.5);
    const double l = solve_ground_state(shapes::mask(g, shapes::ball({0, 0, 0}, 1.0)), 0.0).lambda;
    err[i] = std::abs(l - kPi2);
    if (ns[i] == 96) at96 = l;
  }
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  const double order = std::log2(err[0] / err[2]) / 2.0;
  v.check(std::abs(at96 / kPi2 - 1.0) <= 0.02, "n=96 within 2% of pi^2");
  v.check(order >= 1.7 && order <= 2.3, "order in [1.7, 2.3]");
  v.detail << "radial |lambda - pi^2| = " << fmt(std::abs(lam - kPi2), 3) << ", n=96 lambda = "
           << fmt(at96, 7) << ", order " << fmt(order, 4) << " (pairwise " << fmt(o1, 4) << ", "
           << fmt(o2, 4) << ")";
  return v;
}

Verdict coulomb_oracle() {
  Verdict v;
  Grid g(128, 2.0);
  const CoulombKernel k(g);
  const auto chi = ScalarField::sample(g, [](const Vec3& x) {
    return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 1.0 ? 1.0 : 0.0;
  });
  const auto pot = coulomb_potential(chi, k);
  const double D = coulomb_energy(chi, k);
  double v0 = 0.0;
  for (int c : {63, 64})
    for (int b : {63, 64})
      for (int a : {63, 64}) v0 += pot.at(a, b, c) / 8.0;
  const double far = sample_trilinear(pot, {1.5, 0.0, 0.0});
  const double eD = D / (32 * kPi2 / 15) - 1, e0 = v0 / (2 * kPi) - 1,
               ef = far / (4 * kPi / 3 / 1.5) - 1;
  v.check(std::abs(eD) <= 0.01, "D within 1%");
  v.check(std::abs(e0) <= 0.01, "v(0) within 1%");
  v.check(std::abs(ef) <= 0.01, "far field within 1%");
  v.detail << "relative errors: D " << fmt(eD, 3) << ", v(0) " << fmt(e0, 3) << ", v(1.5) "
           << fmt(ef, 3);
  return v;
}

Verdict self_consistency() {
  Verdict v;
  Grid g(96, 1.5);
  const auto ball = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  GroundStateOptions o;
  o.tol = 1e-9;
  const auto base = solve_ground_state(ball, 0.0, o);
  const double half_ref = 0.5 * 12.0 / kPi;
  std::vector<double> slopes;
  for (double q : {0.1, 0.05, 0.02}) {
    o.initial = base.u;
    const double e3 = solve_ground_state(ball, q, o).lambda;
    const double er = radial::ball_ground_state(q).energy;
    v.check(std::abs(e3 / er - 1) <= 0.02, "3D vs radial at q=" + fmt(q));
    slopes.push_back((e3 - base.lambda) / q);
    v.detail << "q=" << q << ": " << fmt(e3, 7) << " vs " << fmt(er, 7) << "; ";
  }
  const double last = slopes.back() / half_ref - 1;
  v.check(std::abs(last) <= 0.05, "slope within 5% of D*/2");
  v.check(std::abs(slopes[2] - half_ref) <= std::abs(slopes[1] - half_ref) &&
              std::abs(slopes[1] - half_ref) <= std::abs(slopes[0] - half_ref),
          "slope approaches D*/2 as q decreases");
  v.detail << "slopes " << fmt(slopes[0]) << ", " << fmt(slopes[1]) << ", " << fmt(slopes[2])
           << " vs D*/2 = " << fmt(half_ref);
  return v;
}

Verdict bump_rates() {
  Verdict v;
  Grid g(128, 1.1);
  const CoulombKernel k(g);
  const double d1 = coulomb_energy(scaling_sequence(g, 1.0), k);
  for (double eps : {0.5, 0.25}) {
    const double r = coulomb_energy(scaling_sequence(g, eps), k) / d1;
    v.check(std::abs(r / (eps * eps) - 1) <= 0.03, "ratio eps^2 at eps=" + fmt(eps));
    v.detail << "D ratio at eps=" << eps << ": " << fmt(r / (eps * eps)) << " eps^2; ";
  }
  const auto rows = decay_report({1, 2, 4}, {6.4}, 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    v.check(r.D > 0 && r.D <= r.bound, "0 < D <= bound at n=" + std::to_string(r.n));
    if (i > 0) v.check(r.D < rows[i - 1].D, "D decreasing at n=" + std::to_string(r.n));
    v.detail << "n=" << r.n << " D=" << fmt(r.D) << " bound=" << fmt(r.bound) << "; ";
  }
  return v;
}

void shape_checks(Verdict& v, const std::string& name, const MinimizerResult& res, double q,
                  const PenaltySpec& spec) {
  const DomainMask& mask = *res.mask;
  const double h = mask.grid().h();
  const auto rep = shape_report(mask, res.u, {false, 1e-7});
  const double plain = evaluate(res.u, q, spec).energy;
  bool minimal = true;
  for (double eps : {1e-3, 1e-2}) minimal = minimal && evaluate(truncate(res.u, eps), q, spec).energy >= plain;
  v.check(res.converged, name + " converged");
  v.check(std::abs(res.support_volume / kUnitBallVolume - 1) <= 0.02, name + " volume");
  v.check(rep.asymmetry <= 0.05, name + " asymmetry");
  v.check(rep.phi_sup && *rep.phi_sup <= 3 * h, name + " phi_sup");
  v.check(rep.neg_mass_fraction <= 1e-4, name + " negative mass");
  v.check(rep.boundary_grad_relstd <= 0.1, name + " gradient relstd");
  v.check(minimal, name + " truncation competitor");
  v.detail << name << ": it=" << res.iterations << " vol=" << fmt(res.support_volume)
           << " A=" << fmt(rep.asymmetry, 3)
           << " phi_sup/h=" << (rep.phi_sup ? fmt(*rep.phi_sup / h, 3) : "n/a")
           << " neg=" << fmt(rep.neg_mass_fraction, 3)
           << " relstd=" << fmt(rep.boundary_grad_relstd, 3) << "; ";
}

Verdict small_q_shapes() {
  Verdict v;
  Grid g(96, 2.5);
  const double q = 0.02;
  const auto spec = PenaltySpec::with_auto_M();
  const std::vector<std::pair<std::string, shapes::Preset>> starts = {
      {"ellipsoid", shapes::Ellipsoid{}},
      {"dumbbell", shapes::Dumbbell{}},
      {"two_balls", shapes::TwoBalls{}},
  };
  for (const auto& [name, preset] : starts) {
    const auto res = minimize_shape(shapes::mask(g, shapes::make(preset)), q, spec);
    shape_checks(v, name, res, q, spec);
  }
  return v;
}

Verdict sweep_trend() {
  Verdict v;
  Grid g(96, 2.5);
  const auto spec = PenaltySpec::with_auto_M();
  DomainMask mask = shapes::mask(g, shapes::make(shapes::Ellipsoid{}));
  std::vector<double> energy, asym, haus;
  for (double q : {0.2, 0.1, 0.05, 0.02}) {
    const auto res = minimize_shape(mask, q, spec);
    mask = *res.mask;
    energy.push_back(res.energy);
    asym.push_back(fraenkel_asymmetry(mask).value);
    haus.push_back(hausdorff_to_ball(mask));
    v.check(res.converged, "converged at q=" + fmt(q));
    v.detail << "q=" << q << ": E=" << fmt(res.energy, 6) << " A=" << fmt(asym.back(), 3)
             << " H=" << fmt(haus.back(), 3) << "; ";
  }
  for (std::size_t i = 1; i < energy.size(); ++i) {
    v.check(energy[i] <= energy[i - 1], "energy nonincreasing");
    v.check(asym[i] <= asym[i - 1], "asymmetry nonincreasing");
    v.check(haus[i] <= haus[i - 1], "Hausdorff distance nonincreasing");
  }
  v.check(std::abs(energy.back() / kPi2 - 1) <= 0.03, "final gap to pi^2 within 3%");
  return v;
}

Verdict faber_krahn() {
  Verdict v;
  Grid g(64, 1.5);
  const std::vector<std::pair<std::string, shapes::Sdf>> masks = {
      {"ball", shapes::ball({0, 0, 0}, 1.0)},
      {"ellipsoid(1.2,1,1/1.2)", shapes::ellipsoid({0, 0, 0}, {1.2, 1, 1 / 1.2})},
      {"prolate", shapes::ellipsoid({0, 0, 0}, {1.3, 1 / std::sqrt(1.3), 1 / std::sqrt(1.3)})},
      {"oblate", shapes::ellipsoid({0, 0, 0}, {1.25, 1.25, 1 / 1.5625})},
      {"ball+bump", shapes::dilate(shapes::unite(shapes::ball({0, 0, 0}, 1.0),
                                                 shapes::ball({0.8, 0, 0}, 0.45)),
                                   0.95)},
      {"ball+spike", shapes::unite(shapes::ball({0, 0, 0}, 0.9),
                                   shapes::capsule({0, 0, 0}, {0, 0, 1.1}, 0.35))},
  };
  double least = 1e300;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto m = shapes::mask(g, masks[i].second);
    const double d = fk_deficit(m);
    v.check(d >= -0.03 * kPi2, "deficit bound for " + masks[i].first);
    if (i >= 1) {
      const double a = fraenkel_asymmetry(m).value;
      least = std::min(least, d / (a * a));
    }
    v.detail << masks[i].first << " " << fmt(d, 3) << "; ";
  }
  v.check(least > 0, "positive deficit / A^2");
  v.detail << "min deficit/A^2 = " << fmt(least, 4);
  return v;
}

Verdict surgery_check() {
  Verdict v;
  Grid g(96, 2.5);
  const double q = 0.01;
  const auto tail = shapes::mask(g, shapes::make(surgery::tail_preset()));
  const auto gt = solve_ground_state(tail, q);
  const auto out = surgery::trichotomy_scan(tail, gt.u, q);
  int found = 0;
  double best = 0;
  for (const auto& o : out)
    if (o.competitor) {
      const double drop = (o.energy_before - o.competitor->energy_after) / o.energy_before;
      best = std::max(best, drop);
      found += drop >= 1e-3;
    }
  v.check(found >= 1, "COND3 with relative drop >= 1e-3 on the tail");

  const auto ball = shapes::mask(g, shapes::make(shapes::Ball{}));
  const auto gb = solve_ground_state(ball, q);
  surgery::ScanOptions so;
  so.t_max = 0.0;
  int ball3 = 0;
  const auto bo = surgery::trichotomy_scan(ball, gb.u, q, so);
  for (const auto& o : bo) ball3 += o.condition == surgery::Condition::cond3;
  v.check(ball3 == 0, "no COND3 on the ball");
  v.detail << "tail: " << out.size() << " cuts, " << found << " decreasing, best drop "
           << fmt(best, 3) << "; ball: " << bo.size() << " cuts, " << ball3 << " COND3";
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coulomb-lab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

Verdict determinism() {
  Verdict v;
  const fs::path root =
      fs::temp_directory_path() / ("coulomb_lab_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> commands = {
      {"sweep-q", "--grid-n", "40", "--shape", "ellipsoid(1.2,1,0.8333)", "--list", "0.1,0.05",
       "--max-iters", "40", "--seed", "7"},
      {"ground-state", "--grid-n", "48", "--q", "0.05", "--random-start", "--seed", "7"},
      {"surgery-check", "--grid-n", "48", "--q", "0.01"},
      {"counterexample", "--n-list", "1,2,4", "--separations", "3", "--cells", "4"},
      {"radial", "--q-list", "0,0.05,0.1"},
  };
  int files = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    for (const char* rep : {"a", "b"}) {
      auto args = commands[c];
      args.push_back("--out");
      args.push_back((root / rep / std::to_string(c)).string());
      v.check(run_cli(args) == 0, commands[c][0] + " exit status");
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (e.path().extension() != ".csv") continue;
    const auto rel = fs::relative(e.path(), root / "a");
    v.check(slurp(e.path()) == slurp(root / "b" / rel), "identical " + rel.string());
    ++files;
  }
  v.check(files >= 6, "CSV files produced");
  v.detail << files << " CSV files compared byte for byte";
  fs::remove_all(root);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"eigenvalue-oracle", eigenvalue_oracle},
      {"coulomb-oracle", coulomb_oracle},
      {"self-consistency", self_consistency},
      {"bump-rates", bump_rates},
      {"small-q-shapes", small_q_shapes},
      {"sweep-trend", sweep_trend},
      {"faber-krahn", faber_krahn},
      {"surgery", surgery_check},
      {"determinism", determinism},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      Verdict v = fn();
      pass = v.pass;
      detail = v.detail.str();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (pass ? "PASS " : "FAIL ") << name << " (" << fmt(secs, 3) << " s): " << detail
              << std::endl;
    failed += !pass;
  }
  return failed;
}
