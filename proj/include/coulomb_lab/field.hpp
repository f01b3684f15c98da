#pragma once

// Cell-centered Cartesian grid on [-R,R]^3 and scalar fields sampled on it.
// Values are stored x-fastest: index = i + n*(j + n*k).

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "coulomb_lab/errors.hpp"

namespace clab {

using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
/// |B_1|, volume of the unit ball in R^3.
inline constexpr double kUnitBallVolume = 4.0 * kPi / 3.0;

class Grid {
 public:
  Grid(int n, double R);

  int n() const { return n_; }
  double R() const { return R_; }
  /// Spacing; always recomputed from n and R.
  double h() const { return 2.0 * R_ / n_; }
  double cell_volume() const {
    const double s = h();
    return s * s * s;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * n_ * n_;
  }

  double coord(int i) const { return -R_ + (i + 0.5) * h(); }
  Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
  Vec3 point(std::size_t idx) const;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_) * (static_cast<std::size_t>(j) +
                                           static_cast<std::size_t>(n_) * k);
  }
  std::array<int, 3> unravel(std::size_t idx) const;
  bool on_outer_layer(int i, int j, int k) const {
    return i == 0 || j == 0 || k == 0 || i == n_ - 1 || j == n_ - 1 || k == n_ - 1;
  }

  bool operator==(const Grid& other) const { return n_ == other.n_ && R_ == other.R_; }

 private:
  int n_;
  double R_;
};

class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double fill = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  template <class F>
  static ScalarField sample(const Grid& grid, F&& f) {
    ScalarField out(grid);
    const int n = grid.n();
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          out.values_[grid.index(i, j, k)] = f(grid.point(i, j, k));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
  double& at(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  /// this += a * x
  void axpy(double a, const ScalarField& x);

  double max_abs() const;
  double min() const;
  double max() const;
  bool all_finite() const;
  bool vanishes_on_outer_layer() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

void require_same_grid(const Grid& a, const Grid& b);

/// Midpoint quadrature: h^3 * sum f.
double integrate(const ScalarField& f);
/// h^3 * sum f g.
double inner(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);

/// Discrete int |grad u|^2 with forward differences over every face of the
/// grid, values outside the box taken as zero.
double dirichlet_energy(const ScalarField& u);

/// 7-point Laplacian, zero Dirichlet data outside the box.
ScalarField apply_laplacian(const ScalarField& u);

/// Trilinear interpolation between cell centers; zero beyond the outermost
/// centers, matching the Dirichlet extension.
double sample_trilinear(const ScalarField& f, const Vec3& x);

}  // namespace clab
