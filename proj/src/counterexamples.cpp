#include "coulomb_lab/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "coulomb_lab/csv.hpp"

namespace clab {

namespace {

// 1 / sqrt(int_{B_1} (1 - r^2)^6) = 1 / sqrt(2 pi B(3/2, 7))
double norm_constant() {
  static const double c = [] {
    const double beta = std::tgamma(1.5) * std::tgamma(7.0) / std::tgamma(8.5);
    return 1.0 / std::sqrt(2.0 * kPi * beta);
  }();
  return c;
}

}  // namespace

double bump_profile(double r) {
  if (r >= 1.0) return 0.0;
  const double s = 1.0 - r * r;
  return norm_constant() * s * s * s;
}

double bump_sup() { return norm_constant(); }

ScalarField assemble(const Grid& grid, const BumpSpec& spec) {
  const double h = grid.h(), eps = spec.eps;
  if (!(eps > 0.0)) throw UsageError("bump scale must be positive");
  if (spec.centers.empty() || spec.centers.size() != spec.signs.size())
    throw UsageError("bump spec needs one sign per center");
  if (eps < 4.0 * h)
    throw ResolutionError("bump radius " + std::to_string(eps) + " spans fewer than 4 cells");
  const std::size_t count = spec.centers.size();
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3& c = spec.centers[i];
    for (int a = 0; a < 3; ++a)
      if (std::abs(c[a]) + eps > grid.R())
        throw GeometryError("bump " + std::to_string(i) + " does not fit in the grid");
    for (std::size_t j = 0; j < i; ++j) {
      const Vec3& d = spec.centers[j];
      const double dist = std::hypot(c[0] - d[0], c[1] - d[1], c[2] - d[2]);
      if (dist <= 2.0 * eps)
        throw UsageError("bumps " + std::to_string(j) + " and " + std::to_string(i) +
                         " overlap");
    }
  }

  ScalarField u(grid);
  const int n = grid.n();
  std::vector<std::size_t> cells;
  std::vector<double> vals;
  for (std::size_t b = 0; b < count; ++b) {
    const Vec3& c = spec.centers[b];
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - eps + grid.R()) / h)));
      hi[a] = std::min(n - 1, static_cast<int>(std::ceil((c[a] + eps + grid.R()) / h)));
    }
    cells.clear();
    vals.clear();
    double sum = 0.0;
    for (int k = lo[2]; k <= hi[2]; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const Vec3 x = grid.point(i, j, k);
          const double r = std::hypot(x[0] - c[0], x[1] - c[1], x[2] - c[2]) / eps;
          const double v = bump_profile(r);
          if (v == 0.0) continue;
          cells.push_back(grid.index(i, j, k));
          vals.push_back(v);
          sum += v * v;
        }
    const double scale = spec.signs[b] / std::sqrt(static_cast<double>(count) * sum * grid.cell_volume());
    for (std::size_t m = 0; m < cells.size(); ++m) u[cells[m]] = scale * vals[m];
  }
  return u;
}

ScalarField scaling_sequence(const Grid& grid, double eps, const Vec3& center) {
  if (!(eps > 0.0 && eps <= 1.0)) throw UsageError("eps must lie in (0, 1]");
  return assemble(grid, BumpSpec{{center}, {1}, eps});
}

BumpSpec multibump_spec(int n, double separation) {
  if (n < 1) throw UsageError("n must be at least 1");
  if (!(separation > 0.0)) throw UsageError("separation must be positive");
  const int count = 2 * n;
  int k = 2;
  while (k * k * k < count) k += 2;
  BumpSpec spec;
  spec.eps = std::cbrt(1.0 / count);
  std::array<int, 3> top{0, 0, 0};
  for (int m = 0; m < count; ++m) {
    const std::array<int, 3> c{m % k, (m / k) % k, m / (k * k)};
    for (int a = 0; a < 3; ++a) top[a] = std::max(top[a], c[a]);
    spec.centers.push_back({c[0] * separation, c[1] * separation, c[2] * separation});
    spec.signs.push_back((c[0] + c[1] + c[2]) % 2 == 0 ? 1 : -1);
  }
  for (auto& c : spec.centers)
    for (int a = 0; a < 3; ++a) c[a] -= 0.5 * top[a] * separation;
  return spec;
}

ScalarField multibump_sequence(const Grid& grid, int n, double separation) {
  return assemble(grid, multibump_spec(n, separation));
}

double support_volume(const ScalarField& f) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < f.size(); ++i) c += f[i] != 0.0;
  return f.grid().cell_volume() * static_cast<double>(c);
}

Grid fitting_grid(const BumpSpec& spec, int cells) {
  if (cells < 4) throw ResolutionError("need at least 4 cells per bump radius");
  const double h = spec.eps / cells;
  double half = 0.0;
  for (const auto& c : spec.centers)
    for (int a = 0; a < 3; ++a) half = std::max(half, std::abs(c[a]));
  half += spec.eps + 2.0 * h;
  int n = static_cast<int>(std::ceil(2.0 * half / h));
  n += n % 2;
  if (n > kMaxFittingCells)
    throw ResolutionError("bump layout needs a grid of " + std::to_string(n) + "^3 cells");
  return Grid(n, 0.5 * n * h);
}

double base_coulomb_energy(int cells, KernelMode mode) {
  const Grid g = fitting_grid(BumpSpec{{{0, 0, 0}}, {1}, 1.0}, cells);
  return coulomb_energy(scaling_sequence(g, 1.0), CoulombKernel(g, mode));
}

std::vector<DecayRow> decay_report(const std::vector<int>& n_list,
                                   const std::vector<double>& separation_list, int cells,
                                   KernelMode mode) {
  if (n_list.empty() || separation_list.empty()) throw UsageError("empty n or separation list");
  const double base = base_coulomb_energy(cells, mode);
  std::vector<DecayRow> rows;
  for (int n : n_list)
    for (double sep : separation_list) {
      const BumpSpec spec = multibump_spec(n, sep);
      const Grid g = fitting_grid(spec, cells);
      const CoulombKernel k(g, mode);
      const double D = coulomb_energy(assemble(g, spec), k);
      const double self = coulomb_energy(scaling_sequence(g, spec.eps), k);
      const double pred = std::pow(2.0 * n, -2.0 / 3.0) * base;
      rows.push_back({n, sep, spec.eps, D, self, pred, std::sqrt(static_cast<double>(n)) * pred,
                      (D - self) / D});
    }
  return rows;
}

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows) {
  csv::write_row(out, {"n", "separation", "eps", "D", "self_term", "self_prediction", "bound",
                       "cross_share"});
  for (const auto& r : rows)
    csv::write_row(out, {std::to_string(r.n), csv::number(r.separation), csv::number(r.eps),
                         csv::number(r.D), csv::number(r.self_term),
                         csv::number(r.self_prediction), csv::number(r.bound),
                         csv::number(r.cross_share)});
}

}  // namespace clab
