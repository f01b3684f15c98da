#include "coulomb_lab/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clab::level_set {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher lower envelope of parabolas, in place on a line
// read with the given stride.
void edt_line(double* data, std::size_t stride, int n, std::vector<double>& f,
              std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  for (int q = 0; q < n; ++q) f[q] = data[q * stride];
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {  // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
  } else {
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (z[j + 1] < q) ++j;
      const double dq = q - v[j];
      d[q] = dq * dq + f[v[j]];
    }
  }
  for (int q = 0; q < n; ++q) data[q * stride] = d[q];
}

}  // namespace

std::vector<double> squared_distance_transform(const Grid& grid,
                                               std::span<const std::uint8_t> feature) {
  const int n = grid.n();
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = feature[i] ? 0.0 : kInf;
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  const std::size_t sn = static_cast<std::size_t>(n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) edt_line(&out[grid.index(0, j, k)], 1, n, f, d, v, z);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) edt_line(&out[grid.index(i, 0, k)], sn, n, f, d, v, z);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) edt_line(&out[grid.index(i, j, 0)], sn * sn, n, f, d, v, z);
  return out;
}

std::vector<double> signed_distance(const Grid& grid, std::span<const std::uint8_t> inside) {
  std::vector<std::uint8_t> outside(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) outside[i] = inside[i] ? 0 : 1;
  const auto to_inside = squared_distance_transform(grid, inside);
  const auto to_outside = squared_distance_transform(grid, outside);
  const double h = grid.h();
  const double far = 2.0 * grid.n();
  std::vector<double> level(grid.size());
  for (std::size_t i = 0; i < level.size(); ++i) {
    if (inside[i])
      level[i] = -(std::min(std::sqrt(to_outside[i]), far) - 0.5) * h;
    else
      level[i] = (std::min(std::sqrt(to_inside[i]), far) - 0.5) * h;
  }
  return level;
}

void reinitialize(const Grid& grid, std::vector<double>& level, int margin) {
  const int n = grid.n();
  const double h = grid.h();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  std::vector<double> dist(level.size(), kInf);
  std::vector<std::uint8_t> fixed(level.size(), 0);
  int lo[3] = {n, n, n}, hi[3] = {-1, -1, -1};

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = grid.index(i, j, k);
        const int c[3] = {i, j, k};
        const double li = level[idx];
        double inv2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          double t = kInf;
          for (int s : {-1, 1}) {
            const int cn = c[a] + s;
            if (cn < 0 || cn >= n) continue;
            const double ln = level[s > 0 ? idx + stride[a] : idx - stride[a]];
            if ((li < 0.0) != (ln < 0.0)) t = std::min(t, h * li / (li - ln));
          }
          if (t < kInf) {
            t = std::max(t, 1e-3 * h);
            inv2 += 1.0 / (t * t);
          }
        }
        if (inv2 > 0.0) {
          dist[idx] = 1.0 / std::sqrt(inv2);
          fixed[idx] = 1;
          for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
          }
        }
      }
  if (hi[0] < 0) return;  // no interface
  if (margin < 0) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = 0;
      hi[a] = n - 1;
    }
  } else {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, lo[a] - margin);
      hi[a] = std::min(n - 1, hi[a] + margin);
    }
  }

  auto update = [&](int i, int j, int k) {
    const std::size_t idx = grid.index(i, j, k);
    if (fixed[idx]) return;
    const int c[3] = {i, j, k};
    double a[3];
    for (int ax = 0; ax < 3; ++ax) {
      double m = kInf;
      if (c[ax] > 0) m = std::min(m, dist[idx - stride[ax]]);
      if (c[ax] + 1 < n) m = std::min(m, dist[idx + stride[ax]]);
      a[ax] = m;
    }
    std::sort(a, a + 3);
    if (a[0] == kInf) return;
    double d = a[0] + h;
    if (d > a[1]) {
      const double disc = 2.0 * h * h - (a[0] - a[1]) * (a[0] - a[1]);
      d = 0.5 * (a[0] + a[1] + std::sqrt(std::max(disc, 0.0)));
      if (d > a[2]) {
        const double s = a[0] + a[1] + a[2];
        const double q = a[0] * a[0] + a[1] * a[1] + a[2] * a[2] - h * h;
        d = (s + std::sqrt(std::max(s * s - 3.0 * q, 0.0))) / 3.0;
      }
    }
    if (d < dist[idx]) dist[idx] = d;
  };

  for (int round = 0; round < 2; ++round)
    for (int sweep = 0; sweep < 8; ++sweep) {
      const bool fi = sweep & 1, fj = sweep & 2, fk = sweep & 4;
      for (int kk = lo[2]; kk <= hi[2]; ++kk) {
        const int k = fk ? lo[2] + hi[2] - kk : kk;
        for (int jj = lo[1]; jj <= hi[1]; ++jj) {
          const int j = fj ? lo[1] + hi[1] - jj : jj;
          for (int ii = lo[0]; ii <= hi[0]; ++ii) update(fi ? lo[0] + hi[0] - ii : ii, j, k);
        }
      }
    }

  // cells left unreached keep their sign with at least the region's reach
  const double far = h * (margin < 0 ? 2.0 * n : margin + 1.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = grid.index(i, j, k);
        const bool in_region =
            i >= lo[0] && i <= hi[0] && j >= lo[1] && j <= hi[1] && k >= lo[2] && k <= hi[2];
        double d = dist[idx];
        if (!in_region || d == kInf) d = std::max(far, std::abs(level[idx]));
        level[idx] = level[idx] < 0.0 ? -d : d;
      }
}

void advect(const Grid& grid, std::vector<double>& level, std::span<const double> speed,
            double dt) {
  const int n = grid.n();
  const double h = grid.h();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  std::vector<double> next = level;
  for (int k = 1; k < n - 1; ++k)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t idx = grid.index(i, j, k);
        const double v = speed[idx];
        if (v == 0.0) continue;
        double g2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double dm = (level[idx] - level[idx - stride[a]]) / h;
          const double dp = (level[idx + stride[a]] - level[idx]) / h;
          if (v > 0.0) {
            const double lo = std::max(dm, 0.0), hi = std::min(dp, 0.0);
            g2 += std::max(lo * lo, hi * hi);
          } else {
            const double lo = std::min(dm, 0.0), hi = std::max(dp, 0.0);
            g2 += std::max(lo * lo, hi * hi);
          }
        }
        next[idx] = level[idx] - dt * v * std::sqrt(g2);
      }
  level.swap(next);
}

std::vector<double> extend(const Grid& grid, std::span<const double> values,
                           std::span<const std::uint8_t> seeded, int rings) {
  const int n = grid.n();
  std::vector<double> out(grid.size(), 0.0);
  std::vector<std::uint8_t> done(grid.size(), 0);
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (seeded[i]) {
      out[i] = values[i];
      done[i] = 1;
      front.push_back(i);
    }
  for (int r = 0; r < rings && !front.empty(); ++r) {
    // candidates: unassigned 26-neighbours of the current front
    std::vector<std::size_t> next;
    for (const std::size_t idx : front) {
      const auto c = grid.unravel(idx);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int i = c[0] + dx, j = c[1] + dy, k = c[2] + dz;
            if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) continue;
            const std::size_t nb = grid.index(i, j, k);
            if (done[nb] == 0) {
              done[nb] = 2;  // queued
              next.push_back(nb);
            }
          }
    }
    std::sort(next.begin(), next.end());
    std::vector<double> fill(next.size());
    for (std::size_t q = 0; q < next.size(); ++q) {
      const auto c = grid.unravel(next[q]);
      double sum = 0.0;
      int cnt = 0;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int i = c[0] + dx, j = c[1] + dy, k = c[2] + dz;
            if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) continue;
            const std::size_t nb = grid.index(i, j, k);
            if (done[nb] == 1) {
              sum += out[nb];
              ++cnt;
            }
          }
      fill[q] = cnt ? sum / cnt : 0.0;
    }
    for (std::size_t q = 0; q < next.size(); ++q) {
      out[next[q]] = fill[q];
      done[next[q]] = 1;
    }
    front.swap(next);
  }
  return out;
}

}  // namespace clab::level_set
