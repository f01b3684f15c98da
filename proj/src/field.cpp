#include "coulomb_lab/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace clab {

Grid::Grid(int n, double R) : n_(n), R_(R) {
  if (n < 8) throw Error("grid needs at least 8 samples per axis, got " + std::to_string(n));
  if (!(R > 0.0) || !std::isfinite(R)) throw Error("grid half-width must be positive");
}

Vec3 Grid::point(std::size_t idx) const {
  const auto c = unravel(idx);
  return point(c[0], c[1], c[2]);
}

std::array<int, 3> Grid::unravel(std::size_t idx) const {
  const auto n = static_cast<std::size_t>(n_);
  return {static_cast<int>(idx % n), static_cast<int>((idx / n) % n),
          static_cast<int>(idx / (n * n))};
}

ScalarField::ScalarField(const Grid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw LengthMismatch("field has " + std::to_string(values_.size()) +
                         " values, grid expects " + std::to_string(grid_.size()));
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch();
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

void ScalarField::axpy(double a, const ScalarField& x) {
  require_same_grid(grid_, x.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ScalarField::vanishes_on_outer_layer() const {
  const int n = grid_.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (grid_.on_outer_layer(i, j, k) && at(i, j, k) != 0.0) return false;
  return true;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double integrate(const ScalarField& f) {
  const auto v = f.values();
  return f.grid().cell_volume() * std::accumulate(v.begin(), v.end(), 0.0);
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  const auto a = f.values();
  const auto b = g.values();
  return f.grid().cell_volume() * std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double dirichlet_energy(const ScalarField& u) {
  const Grid& g = u.grid();
  const int n = g.n();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  const auto v = u.values();
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = g.index(i, j, k);
        const int c[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          // face to the upper neighbour (or to the zero ghost beyond the box)
          const double up = c[a] + 1 < n ? v[idx + stride[a]] : 0.0;
          const double d = up - v[idx];
          sum += d * d;
          if (c[a] == 0) sum += v[idx] * v[idx];  // face to the lower ghost
        }
      }
  return sum * g.h();  // h^3 * sum (d/h)^2
}

ScalarField apply_laplacian(const ScalarField& u) {
  const Grid& g = u.grid();
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ScalarField out(g);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double c = u.at(i, j, k);
        double s = -6.0 * c;
        s += i > 0 ? u.at(i - 1, j, k) : 0.0;
        s += i + 1 < n ? u.at(i + 1, j, k) : 0.0;
        s += j > 0 ? u.at(i, j - 1, k) : 0.0;
        s += j + 1 < n ? u.at(i, j + 1, k) : 0.0;
        s += k > 0 ? u.at(i, j, k - 1) : 0.0;
        s += k + 1 < n ? u.at(i, j, k + 1) : 0.0;
        out.at(i, j, k) = s * inv_h2;
      }
  return out;
}

double sample_trilinear(const ScalarField& f, const Vec3& x) {
  const Grid& g = f.grid();
  const int n = g.n();
  const double h = g.h();
  int base[3];
  double w[3];
  for (int a = 0; a < 3; ++a) {
    const double s = (x[a] + g.R()) / h - 0.5;  // continuous cell index
    if (!(s > -1.0 && s < n)) return 0.0;
    const double fl = std::floor(s);
    base[a] = static_cast<int>(fl);
    w[a] = s - fl;
  }
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const int i = base[0] + dx, j = base[1] + dy, k = base[2] + dz;
        if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) continue;
        const double wt = (dx ? w[0] : 1 - w[0]) * (dy ? w[1] : 1 - w[1]) * (dz ? w[2] : 1 - w[2]);
        acc += wt * f.at(i, j, k);
      }
  return acc;
}

}  // namespace clab
