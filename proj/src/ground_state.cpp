#include "coulomb_lab/ground_state.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "coulomb_lab/level_set.hpp"
#include "fftw_support.hpp"

namespace clab {
namespace {

// (-Lap)^{-1} on a box with zero values one cell outside it, via DST-I.
class BoxPoisson {
 public:
  BoxPoisson(double h, std::array<int, 3> dims) : dims_(dims) {
    size_ = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    double* buf = fftw_alloc_real(size_);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      detail::configure_fftw_threads();
      plan_ = fftw_plan_r2r_3d(dims[2], dims[1], dims[0], buf, buf, FFTW_RODFT00, FFTW_RODFT00,
                               FFTW_RODFT00, FFTW_ESTIMATE);
    }
    fftw_free(buf);
    for (int a = 0; a < 3; ++a) {
      eig_[a].resize(dims[a]);
      for (int k = 0; k < dims[a]; ++k)
        eig_[a][k] = (2.0 - 2.0 * std::cos(kPi * (k + 1) / (dims[a] + 1))) / (h * h);
    }
    scale_ = 1.0 / (8.0 * (dims[0] + 1.0) * (dims[1] + 1.0) * (dims[2] + 1.0));
  }
  ~BoxPoisson() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  BoxPoisson(const BoxPoisson&) = delete;
  BoxPoisson& operator=(const BoxPoisson&) = delete;

  std::size_t size() const { return size_; }

  /// In place; `data` must come from fftw_alloc_real.
  void solve(double* data) const {
    fftw_execute_r2r(plan_, data, data);
    std::size_t p = 0;
    for (int k = 0; k < dims_[2]; ++k)
      for (int j = 0; j < dims_[1]; ++j)
        for (int i = 0; i < dims_[0]; ++i, ++p)
          data[p] *= scale_ / (eig_[0][i] + eig_[1][j] + eig_[2][k]);
    fftw_execute_r2r(plan_, data, data);
  }

 private:
  std::array<int, 3> dims_;
  std::size_t size_;
  fftw_plan plan_;
  std::array<std::vector<double>, 3> eig_;
  double scale_;
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_real(n)), size(n) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* data;
  std::size_t size;
};

using Vec = Eigen::VectorXd;

// H = -Lap_mask + (q/2) G acting on values of the mask cells.
class MaskOperator {
 public:
  MaskOperator(const DomainMask& mask, double q, KernelMode mode)
      : mask_(mask), grid_(mask.grid()), q_(q), kernel_(grid_, mode) {
    cells_ = mask.cells();
    box_ = bounding_box(mask);
    const int n = grid_.n();
    const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * n};
    std::vector<int> compact(grid_.size(), -1);
    for (std::size_t c = 0; c < cells_.size(); ++c) compact[cells_[c]] = static_cast<int>(c);
    neighbours_.resize(6 * cells_.size());
    diag_.resize(cells_.size());
    box_index_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const std::size_t idx = cells_[c];
      double d = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s) {
          const std::size_t nb = s ? idx + stride[a] : idx - stride[a];
          const int cn = compact[nb];
          neighbours_[6 * c + 2 * a + s] = cn;
          d += cn >= 0 ? 1.0 : 1.0 / mask.boundary_fraction(idx, nb);
        }
      diag_[c] = d * inv_h2;
      // boundary cells with small cut fractions are much stiffer than the
      // box Laplacian; a symmetric diagonal rescaling compensates
      scaling_.push_back(std::sqrt(std::min(1.0, 6.0 / d)));
      const auto ijk = grid_.unravel(idx);
      box_index_[c] = (ijk[0] - box_.lo[0]) +
                      static_cast<std::size_t>(box_.extent(0)) *
                          ((ijk[1] - box_.lo[1]) +
                           static_cast<std::size_t>(box_.extent(1)) * (ijk[2] - box_.lo[2]));
    }
    inv_h2_ = inv_h2;
    preconditioner_ = std::make_unique<BoxPoisson>(
        grid_.h(), std::array<int, 3>{box_.extent(0), box_.extent(1), box_.extent(2)});
  }

  std::size_t size() const { return cells_.size(); }
  const std::vector<std::size_t>& cells() const { return cells_; }
  const CoulombKernel& kernel() const { return kernel_; }

  Vec laplacian(const Vec& x) const {
    Vec out(x.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      double s = diag_[c] * x[c];
      for (int e = 0; e < 6; ++e) {
        const int nb = neighbours_[6 * c + e];
        if (nb >= 0) s -= inv_h2_ * x[nb];
      }
      out[c] = s;
    }
    return out;
  }

  Vec coulomb(const Vec& x) const {
    std::vector<double> in(box_.size(), 0.0), out(box_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) in[box_index_[c]] = x[c];
    kernel_.convolve(box_, in, out);
    Vec v(x.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) v[c] = out[box_index_[c]];
    return v;
  }

  Vec apply(const Vec& x) const {
    Vec y = laplacian(x);
    if (q_ != 0.0) y += 0.5 * q_ * coulomb(x);
    return y;
  }

  Vec precondition(const Vec& r) const {
    FftwBuffer buf(preconditioner_->size());
    std::fill(buf.data, buf.data + buf.size, 0.0);
    for (std::size_t c = 0; c < cells_.size(); ++c) buf.data[box_index_[c]] = scaling_[c] * r[c];
    preconditioner_->solve(buf.data);
    Vec out(r.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) out[c] = scaling_[c] * buf.data[box_index_[c]];
    return out;
  }

  Vec gather(const ScalarField& f) const {
    Vec x(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) x[c] = f[cells_[c]];
    return x;
  }

  ScalarField scatter(const Vec& x) const {
    ScalarField f(grid_);
    for (std::size_t c = 0; c < cells_.size(); ++c) f[cells_[c]] = x[c];
    return f;
  }

 private:
  const DomainMask& mask_;
  Grid grid_;
  double q_;
  CoulombKernel kernel_;
  Box box_;
  std::vector<std::size_t> cells_;
  std::vector<int> neighbours_;
  std::vector<double> diag_;
  std::vector<double> scaling_;
  std::vector<std::size_t> box_index_;
  double inv_h2_ = 0.0;
  std::unique_ptr<BoxPoisson> preconditioner_;
};

Vec start_vector(const MaskOperator& op, const DomainMask& mask, const GroundStateOptions& opts) {
  if (opts.initial) {
    require_same_grid(opts.initial->grid(), mask.grid());
    Vec x = op.gather(*opts.initial);
    if (x.norm() > 0.0) return x;
  }
  if (opts.random_start) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vec x(op.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) x[c] = dist(rng);
    return x;
  }
  const auto sd = level_set::signed_distance(mask.grid(), mask.inside_flags());
  Vec x(op.size());
  for (std::size_t c = 0; c < op.size(); ++c) x[c] = -sd[op.cells()[c]];
  return x;
}

}  // namespace

GroundState solve_ground_state(const DomainMask& mask, double q, const GroundStateOptions& opts) {
  if (mask.empty()) throw GeometryError("ground state requested on an empty mask");
  if (!(q >= 0.0)) throw Error("coupling q must be nonnegative");
  const MaskOperator op(mask, q, opts.kernel);

  Vec x = start_vector(op, mask, opts);
  x.normalize();
  Vec hx = op.apply(x);
  double lambda = x.dot(hx);
  Vec p, hp;
  GroundState gs{ScalarField(mask.grid()), 0.0, 0.0, 0.0, 0, 0.0, {}};
  double res = 0.0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    Vec r = hx - lambda * x;
    res = r.norm();
    if (res <= opts.tol * std::abs(lambda)) break;

    // orthonormal basis of span{x, T r, p}; H images follow by linearity
    Vec w = op.precondition(r);
    w -= x.dot(w) * x;
    double wn = w.norm();
    if (!(wn > 0.0) || !std::isfinite(wn)) break;
    w /= wn;
    Vec hw = op.apply(w);
    // refresh once more against x to curb drift
    const double c0 = x.dot(w);
    w -= c0 * x;
    hw -= c0 * hx;
    wn = w.norm();
    w /= wn;
    hw /= wn;

    const bool use_p = p.size() > 0;
    Eigen::Index dim = 2;
    if (use_p) {
      const double a = x.dot(p), b = w.dot(p);
      p -= a * x + b * w;
      hp -= a * hx + b * hw;
      const double pn = p.norm();
      if (pn > 1e-8) {
        p /= pn;
        hp /= pn;
        dim = 3;
      }
    }
    Eigen::MatrixXd small(dim, dim);
    small(0, 0) = x.dot(hx);
    small(0, 1) = small(1, 0) = 0.5 * (x.dot(hw) + w.dot(hx));
    small(1, 1) = w.dot(hw);
    if (dim == 3) {
      small(0, 2) = small(2, 0) = 0.5 * (x.dot(hp) + p.dot(hx));
      small(1, 2) = small(2, 1) = 0.5 * (w.dot(hp) + p.dot(hw));
      small(2, 2) = p.dot(hp);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(small);
    Eigen::VectorXd c = eig.eigenvectors().col(0);
    if (c[0] < 0) c = -c;

    Vec np = c[1] * w;
    Vec nhp = c[1] * hw;
    if (dim == 3) {
      np += c[2] * p;
      nhp += c[2] * hp;
    }
    x = c[0] * x + np;
    hx = c[0] * hx + nhp;
    p = std::move(np);
    hp = std::move(nhp);
    const double xn = x.norm();
    x /= xn;
    hx /= xn;
    if ((it + 1) % 25 == 0) hx = op.apply(x);  // drop accumulated rounding
    lambda = x.dot(hx);
    gs.history.push_back(lambda);
    if (!std::isfinite(lambda)) break;
  }

  if (x.sum() < 0) x = -x;
  hx = op.apply(x);
  lambda = x.dot(hx);
  res = (hx - lambda * x).norm();
  const double dirichlet = x.dot(op.laplacian(x));
  const double coulomb = x.dot(op.coulomb(x));
  if (!(res <= opts.tol * std::abs(lambda)) || !std::isfinite(lambda))
    throw SolverError("ground state did not converge after " + std::to_string(it) +
                          " iterations (residual " + std::to_string(res) + ")",
                      res);

  // compact vectors are Euclidean-normalized; fields are L2-normalized
  const double scale = 1.0 / std::sqrt(mask.grid().cell_volume());
  gs.u = op.scatter(x * scale);
  gs.lambda = lambda;
  gs.dirichlet = dirichlet;
  gs.coulomb = coulomb;
  gs.iterations = it;
  gs.residual = res;
  return gs;
}

double el_residual(const ScalarField& u, double lambda, const DomainMask& mask, double q,
                   KernelMode kernel) {
  require_same_grid(u.grid(), mask.grid());
  const Grid& g = mask.grid();
  const auto lap = apply_laplacian(u, mask);
  ScalarField v(g);
  if (q != 0.0) v = coulomb_potential(u, CoulombKernel(g, kernel), bounding_box(mask));
  const int n = g.n();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(n) * n};
  double sum = 0.0;
  for (const std::size_t idx : mask.cells()) {
    bool interior = true;
    for (int a = 0; a < 3 && interior; ++a)
      interior = mask.inside(idx + stride[a]) && mask.inside(idx - stride[a]);
    if (!interior) continue;
    const double r = -lap[idx] - lambda * u[idx] + 0.5 * q * v[idx];
    sum += r * r;
  }
  return std::sqrt(sum * g.cell_volume());
}

double el_residual(const GroundState& gs, const DomainMask& mask, double q, KernelMode kernel) {
  return el_residual(gs.u, gs.lambda, mask, q, kernel);
}

double dirichlet_eigenvalue(const DomainMask& mask, double tol) {
  GroundStateOptions opts;
  opts.tol = tol;
  return solve_ground_state(mask, 0.0, opts).lambda;
}

}  // namespace clab
