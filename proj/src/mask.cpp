#include "coulomb_lab/mask.hpp"

#include <algorithm>
#include <cmath>

namespace clab {

DomainMask::DomainMask(const Grid& grid, std::vector<double> level)
    : grid_(grid), level_(std::move(level)), inside_(grid.size(), 0) {
  if (level_.size() != grid_.size()) throw LengthMismatch("level has wrong length");
  const int n = grid_.n();
  const double half = 0.5 * grid_.h();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = grid_.index(i, j, k);
        double& l = level_[idx];
        if (!std::isfinite(l)) throw Error("non-finite level value");
        if (grid_.on_outer_layer(i, j, k)) l = std::max(l, half);
        if (l < 0.0) {
          inside_[idx] = 1;
          ++count_;
        }
      }
}

DomainMask DomainMask::from_level(const Grid& grid, std::vector<double> level) {
  return DomainMask(grid, std::move(level));
}

DomainMask DomainMask::from_inside(const Grid& grid, std::span<const std::uint8_t> inside) {
  if (inside.size() != grid.size()) throw LengthMismatch("inside flags have wrong length");
  const double half = 0.5 * grid.h();
  std::vector<double> level(grid.size());
  for (std::size_t i = 0; i < level.size(); ++i) level[i] = inside[i] ? -half : half;
  return DomainMask(grid, std::move(level));
}

DomainMask DomainMask::support_of(const ScalarField& f, double tau) {
  std::vector<std::uint8_t> flags(f.size());
  const auto v = f.values();
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = std::abs(v[i]) > tau ? 1 : 0;
  return from_inside(f.grid(), flags);
}

double DomainMask::boundary_fraction(std::size_t in, std::size_t out) const {
  const double a = level_[in];
  const double b = level_[out];
  const double t = a / (a - b);
  return std::clamp(t, kMinFraction, 1.0);
}

ScalarField DomainMask::indicator() const {
  ScalarField out(grid_);
  for (std::size_t i = 0; i < inside_.size(); ++i) out[i] = inside_[i] ? 1.0 : 0.0;
  return out;
}

std::vector<std::size_t> DomainMask::cells() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < inside_.size(); ++i)
    if (inside_[i]) out.push_back(i);
  return out;
}

double dirichlet_energy(const ScalarField& u, const DomainMask& mask) {
  require_same_grid(u.grid(), mask.grid());
  const Grid& g = mask.grid();
  const int n = g.n();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  double sum = 0.0;
  for (int k = 1; k < n - 1; ++k)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t idx = g.index(i, j, k);
        if (!mask.inside(idx)) continue;
        const double ui = u[idx];
        for (int a = 0; a < 3; ++a) {
          const std::size_t up = idx + stride[a];
          const std::size_t dn = idx - stride[a];
          if (mask.inside(up)) {
            const double d = u[up] - ui;
            sum += d * d;
          } else {
            sum += ui * ui / mask.boundary_fraction(idx, up);
          }
          if (!mask.inside(dn)) sum += ui * ui / mask.boundary_fraction(idx, dn);
        }
      }
  return sum * g.h();
}

ScalarField apply_laplacian(const ScalarField& u, const DomainMask& mask) {
  require_same_grid(u.grid(), mask.grid());
  const Grid& g = mask.grid();
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  ScalarField out(g);
  for (int k = 1; k < n - 1; ++k)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t idx = g.index(i, j, k);
        if (!mask.inside(idx)) continue;
        double s = 0.0;
        for (int a = 0; a < 3; ++a)
          for (const std::size_t nb : {idx + stride[a], idx - stride[a]}) {
            if (mask.inside(nb))
              s += u[nb] - u[idx];
            else
              s -= u[idx] / mask.boundary_fraction(idx, nb);
          }
        out[idx] = s * inv_h2;
      }
  return out;
}

ScalarField restrict_to(const ScalarField& u, const DomainMask& mask) {
  require_same_grid(u.grid(), mask.grid());
  ScalarField out(u.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask.inside(i)) out[i] = u[i];
  return out;
}

}  // namespace clab

namespace clab {

std::vector<BoundaryFace> boundary_faces(const DomainMask& mask) {
  const Grid& g = mask.grid();
  const int n = g.n();
  const double h = g.h();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  std::vector<BoundaryFace> faces;
  for (const std::size_t idx : mask.cells()) {
    for (int a = 0; a < 3; ++a)
      for (int s : {-1, 1}) {
        const std::size_t nb = s > 0 ? idx + stride[a] : idx - stride[a];
        if (mask.inside(nb)) continue;
        BoundaryFace f{idx, nb, a, s, mask.boundary_fraction(idx, nb), g.point(idx)};
        f.point[a] += s * f.fraction * h;
        faces.push_back(f);
      }
  }
  return faces;
}

std::vector<double> boundary_gradient(const ScalarField& u, const DomainMask& mask,
                                      const std::vector<BoundaryFace>& faces) {
  require_same_grid(u.grid(), mask.grid());
  const Grid& g = mask.grid();
  const int n = g.n();
  const double h = g.h();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  std::vector<double> out;
  out.reserve(faces.size());
  for (const auto& f : faces) {
    const std::size_t idx = f.in;
    const double ui = u[idx];
    const double t = f.fraction;
    // normal axis: fit through (-h, u_back), (0, u_i), (t h, 0)
    const std::size_t back = f.dir > 0 ? idx - stride[f.axis] : idx + stride[f.axis];
    double gn;
    if (mask.inside(back)) {
      const double ub = u[back];
      const double alpha = (t * ub - ui * (1.0 + t)) / (h * h * t * (1.0 + t));
      const double beta = -(alpha * t * t * h * h + ui) / (t * h);
      gn = 2.0 * alpha * t * h + beta;
    } else {
      gn = -ui / (t * h);
    }
    double g2 = gn * gn;
    for (int b = 0; b < 3; ++b) {
      if (b == f.axis) continue;
      const std::size_t up = idx + stride[b], dn = idx - stride[b];
      const bool iu = mask.inside(up), id = mask.inside(dn);
      double gb;
      if (iu && id) {
        gb = (u[up] - u[dn]) / (2.0 * h);
      } else {
        const double xu = iu ? h : mask.boundary_fraction(idx, up) * h;
        const double xd = id ? h : mask.boundary_fraction(idx, dn) * h;
        const double vu = iu ? u[up] : 0.0;
        const double vd = id ? u[dn] : 0.0;
        // derivative at 0 of the parabola through (-xd,vd), (0,ui), (xu,vu)
        gb = (xd * xd * (vu - ui) - xu * xu * (vd - ui)) / (xu * xd * (xu + xd));
      }
      g2 += gb * gb;
    }
    out.push_back(std::sqrt(g2));
  }
  return out;
}

}  // namespace clab
