#include "coulomb_lab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clab::radial {
namespace {

constexpr double kGaussX[4] = {0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
                               0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
constexpr double kGaussW[4] = {0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
                               0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

// w'' = -lambda w from w(0) = 0, w'(0) = 1 with 2m RK4 steps; optionally
// records w at every step.
std::pair<double, double> shoot(double lambda, int steps, std::vector<double>* trace) {
  const double hs = 1.0 / steps;
  double w = 0.0, p = 1.0;
  if (trace) trace->assign(1, 0.0);
  for (int s = 0; s < steps; ++s) {
    const double k1w = p, k1p = -lambda * w;
    const double k2w = p + 0.5 * hs * k1p, k2p = -lambda * (w + 0.5 * hs * k1w);
    const double k3w = p + 0.5 * hs * k2p, k3p = -lambda * (w + 0.5 * hs * k2w);
    const double k4w = p + hs * k3p, k4p = -lambda * (w + hs * k3w);
    w += hs / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    p += hs / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if (trace) trace->push_back(w);
  }
  return {w, p};
}

// Solves the symmetric tridiagonal system with constant off-diagonal `off`.
void thomas(const std::vector<double>& diag, double off, const std::vector<double>& rhs,
            std::vector<double>& x) {
  const std::size_t m = diag.size();
  std::vector<double> c(m), d(m);
  double denom = diag[0];
  c[0] = off / denom;
  d[0] = rhs[0] / denom;
  for (std::size_t j = 1; j < m; ++j) {
    denom = diag[j] - off * c[j - 1];
    c[j] = off / denom;
    d[j] = (rhs[j] - off * d[j - 1]) / denom;
  }
  x.resize(m);
  x[m - 1] = d[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) x[j] = d[j] - c[j] * x[j + 1];
}

struct Discretization {
  int m;
  double dr;
  std::vector<double> r;
  std::vector<double> kdiag;  // second difference on w = r u, antisymmetric ghosts
  double koff;

  explicit Discretization(int m_) : m(m_), dr(1.0 / m_), r(m_), kdiag(m_), koff(-1.0 / (dr * dr)) {
    for (int j = 0; j < m; ++j) {
      r[j] = (j + 0.5) * dr;
      kdiag[j] = 2.0 / (dr * dr);
    }
    kdiag[0] = kdiag[m - 1] = 3.0 / (dr * dr);
  }

  // 4 pi dr sum a b
  double dot(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += a[j] * b[j];
    return 4.0 * kPi * dr * s;
  }

  std::vector<double> apply_k(const std::vector<double>& w) const {
    std::vector<double> out(m);
    for (int j = 0; j < m; ++j) {
      double s = kdiag[j] * w[j];
      if (j > 0) s += koff * w[j - 1];
      if (j + 1 < m) s += koff * w[j + 1];
      out[j] = s;
    }
    return out;
  }

  // r_j v_j for the density u = w / r, kernel 1 / max(r, s)
  std::vector<double> apply_g(const std::vector<double>& w) const {
    std::vector<double> out(m);
    std::vector<double> tail(m + 1, 0.0);
    for (int j = m - 1; j >= 0; --j) tail[j] = tail[j + 1] + w[j];  // r_i u_i = w_i
    double inner = 0.0;                                             // sum r_i^2 u_i = r_i w_i
    for (int j = 0; j < m; ++j) {
      const double v = 4.0 * kPi * dr * (inner / r[j] + tail[j]);
      out[j] = r[j] * v;
      inner += r[j] * w[j];
    }
    return out;
  }

  void normalize(std::vector<double>& w) const {
    const double s = std::sqrt(dot(w, w));
    double sum = 0.0;
    for (double x : w) sum += x;
    const double sign = sum < 0 ? -1.0 : 1.0;
    for (double& x : w) x *= sign / s;
  }
};

}  // namespace

double RadialProfile::operator()(double rr) const {
  rr = std::abs(rr);
  const int n = m();
  if (rr >= r_max || n == 0) return 0.0;
  const double x = rr / dr() - 0.5;
  int base = static_cast<int>(std::floor(x)) - 2;
  base = std::min(base, n - 6);
  double s = 0.0;
  for (int a = 0; a < 6; ++a) {
    double l = 1.0;
    for (int b = 0; b < 6; ++b)
      if (b != a) l *= (x - (base + b)) / double(a - b);
    const int idx = base + a;
    s += l * values[idx < 0 ? -1 - idx : idx];
  }
  return s;
}

double RadialProfile::mass() const {
  const double d = dr();
  double s = 0.0;
  for (int c = 0; c < m(); ++c)
    for (int q = 0; q < 4; ++q) {
      const double rr = (c + kGaussX[q]) * d;
      const double u = (*this)(rr);
      s += kGaussW[q] * d * u * u * rr * rr;
    }
  return 4.0 * kPi * s;
}

BallEigen dirichlet_eigen_ball(int m) {
  if (m < 16) throw Error("radial profile needs at least 16 samples");
  const int steps = 2 * m;
  double lo = 5.0, hi = 15.0;  // w(1) changes sign once on this bracket
  double flo = shoot(lo, steps, nullptr).first;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = shoot(mid, steps, nullptr).first;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  std::vector<double> trace;
  const auto [w1, p1] = shoot(lambda, steps, &trace);
  (void)w1;
  // Simpson on the 2m half-steps for int_0^1 w^2
  const double hs = 1.0 / steps;
  double integral = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const double wt = (s == 0 || s == steps) ? 1.0 : (s % 2 ? 4.0 : 2.0);
    integral += wt * trace[s] * trace[s];
  }
  integral *= hs / 3.0;
  const double scale = 1.0 / std::sqrt(4.0 * kPi * integral);

  BallEigen out{lambda, RadialProfile{1.0, std::vector<double>(m), true}, p1 * scale};
  for (int j = 0; j < m; ++j) {
    const double rj = (j + 0.5) / m;
    out.profile.values[j] = scale * trace[2 * j + 1] / rj;
  }
  return out;
}

double coulomb_energy_radial(const RadialProfile& p) {
  const double d = p.dr();
  double total = 0.0;
  double cumulative = 0.0;  // A at the start of the cell
  for (int c = 0; c < p.m(); ++c) {
    const double a = c * d;
    for (int q = 0; q < 4; ++q) {
      const double rr = a + kGaussX[q] * d;
      // A(rr) = cumulative + int_a^rr s^2 u ds
      double partial = 0.0;
      const double len = rr - a;
      for (int g = 0; g < 4; ++g) {
        const double s = a + kGaussX[g] * len;
        partial += kGaussW[g] * len * s * s * p(s);
      }
      total += kGaussW[q] * d * rr * p(rr) * (cumulative + partial);
    }
    for (int g = 0; g < 4; ++g) {
      const double s = a + kGaussX[g] * d;
      cumulative += kGaussW[g] * d * s * s * p(s);
    }
  }
  return 2.0 * (4.0 * kPi) * (4.0 * kPi) * total;
}

double reference_coulomb_constant() {
  static const double value = coulomb_energy_radial(dirichlet_eigen_ball().profile);
  return value;
}

BallState ball_ground_state(double q, const RadialOptions& opts) {
  if (!(q >= 0.0)) throw Error("coupling q must be nonnegative");
  if (opts.m < 16) throw Error("radial grid needs at least 16 samples");
  const Discretization disc(opts.m);
  const int m = opts.m;

  // start from the discrete q = 0 eigenvector's shape, sin(pi r)
  std::vector<double> w(m);
  for (int j = 0; j < m; ++j) w[j] = std::sin(kPi * disc.r[j]);
  disc.normalize(w);

  auto rayleigh = [&](const std::vector<double>& x, double& dir, double& coul) {
    dir = disc.dot(x, disc.apply_k(x));
    coul = disc.dot(x, disc.apply_g(x));
    return dir + 0.5 * q * coul;
  };

  double dir = 0.0, coul = 0.0;
  int it = 0;
  double change = 1.0;
  std::vector<double> psi, rhs(m);
  for (; it < opts.max_iters; ++it) {
    const double lambda = rayleigh(w, dir, coul);
    const auto g = disc.apply_g(w);
    for (int j = 0; j < m; ++j) rhs[j] = lambda * w[j] - 0.5 * q * g[j];
    thomas(disc.kdiag, disc.koff, rhs, psi);
    disc.normalize(psi);
    double diff = 0.0;
    for (int j = 0; j < m; ++j) diff += (psi[j] - w[j]) * (psi[j] - w[j]);
    change = std::sqrt(4.0 * kPi * disc.dr * diff);
    for (int j = 0; j < m; ++j) w[j] = (1.0 - opts.damping) * w[j] + opts.damping * psi[j];
    disc.normalize(w);
    if (change < opts.tol) break;
  }

  const double lambda = rayleigh(w, dir, coul);
  const auto kw = disc.apply_k(w);
  const auto gw = disc.apply_g(w);
  std::vector<double> res(m);
  for (int j = 0; j < m; ++j) res[j] = kw[j] + 0.5 * q * gw[j] - lambda * w[j];
  const double residual = std::sqrt(disc.dot(res, res));
  if (change >= opts.tol)
    throw SolverError("radial self-consistent iteration did not converge in " +
                          std::to_string(opts.max_iters) + " iterations",
                      residual);

  BallState out{lambda, lambda, dir, coul, RadialProfile{1.0, std::vector<double>(m), true},
                it + 1, residual};
  for (int j = 0; j < m; ++j) out.profile.values[j] = w[j] / disc.r[j];
  return out;
}

ScalarField sample(const RadialProfile& p, const Grid& grid, const Vec3& center) {
  return ScalarField::sample(grid, [&](const Vec3& x) {
    return p(std::hypot(x[0] - center[0], x[1] - center[1], x[2] - center[2]));
  });
}

}  // namespace clab::radial
