#include "coulomb_lab/coulomb.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <new>
#include <tuple>

#include "fftw_support.hpp"

namespace clab {

std::size_t Box::size() const {
  std::size_t s = 1;
  for (int a = 0; a < 3; ++a) s *= static_cast<std::size_t>(std::max(0, hi[a] - lo[a]));
  return s;
}

Box full_box(const Grid& grid) { return Box{{0, 0, 0}, {grid.n(), grid.n(), grid.n()}}; }

namespace {

template <class Pred>
Box box_of(const Grid& grid, Pred&& pred) {
  const int n = grid.n();
  Box b{{n, n, n}, {0, 0, 0}};
  bool any = false;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (!pred(grid.index(i, j, k))) continue;
        any = true;
        const int c[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          b.lo[a] = std::min(b.lo[a], c[a]);
          b.hi[a] = std::max(b.hi[a], c[a] + 1);
        }
      }
  return any ? b : Box{};
}

}  // namespace

Box bounding_box(const DomainMask& mask) {
  return box_of(mask.grid(), [&](std::size_t idx) { return mask.inside(idx); });
}

Box support_box(const ScalarField& f) {
  return box_of(f.grid(), [&](std::size_t idx) { return f[idx] != 0.0; });
}

Box merge(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Box m;
  for (int ax = 0; ax < 3; ++ax) {
    m.lo[ax] = std::min(a.lo[ax], b.lo[ax]);
    m.hi[ax] = std::max(a.hi[ax], b.hi[ax]);
  }
  return m;
}

double self_cell_constant() {
  // Splitting the cube into six pyramids over its faces leaves
  // 6 int_0^{1/2} asinh(1 / (2 sqrt(x^2 + 1/4))) dx; 20-point Gauss-Legendre.
  static const double value = [] {
    static const double x[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                                 0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                                 0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                                 0.9931285991850949};
    static const double w[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                                 0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                                 0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                                 0.0176140071391521};
    double s = 0.0;
    for (int q = 0; q < 10; ++q)
      for (int sign : {-1, 1}) {
        const double t = 0.25 * (1.0 + sign * x[q]);
        s += w[q] * std::asinh(0.5 / std::sqrt(t * t + 0.25));
      }
    return 6.0 * 0.25 * s;
  }();
  return value;
}

namespace detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void configure_fftw_threads() {
  static const bool ready = fftw_init_threads() != 0;
  if (ready) fftw_plan_with_nthreads(fft_threads());
}

}  // namespace detail

int fft_threads() {
  if (const char* env = std::getenv("COULOMB_LAB_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

namespace {

int good_size(int m) {
  for (int s = std::max(m, 2);; ++s) {
    int r = s;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1 && s % 2 == 0) return s;
  }
}

using detail::fftw_planner_mutex;

struct Transform {
  std::array<int, 3> dims;  // N per axis (x, y, z)
  std::size_t real_size;
  std::size_t complex_size;
  fftw_plan forward;
  fftw_plan backward;
  std::vector<double> symbol;  // kernel transform, real (kernel is even)

  ~Transform() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

using Key = std::tuple<int, double, int, int, int, int>;

std::shared_ptr<const Transform> make_transform(const CoulombKernel& kernel,
                                                std::array<int, 3> dims) {
  auto t = std::make_shared<Transform>();
  t->dims = dims;
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  t->real_size = static_cast<std::size_t>(nx) * ny * nz;
  t->complex_size = static_cast<std::size_t>(nx / 2 + 1) * ny * nz;

  double* real = fftw_alloc_real(t->real_size);
  fftw_complex* spec = fftw_alloc_complex(t->complex_size);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    detail::configure_fftw_threads();
    t->forward = fftw_plan_dft_r2c_3d(nz, ny, nx, real, spec, FFTW_ESTIMATE);
    t->backward = fftw_plan_dft_c2r_3d(nz, ny, nx, spec, real, FFTW_ESTIMATE);
  }

  auto wrap = [](int p, int N) { return p <= N / 2 ? p : p - N; };
  double total = 0.0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double w = kernel.weight(wrap(i, nx), wrap(j, ny), wrap(k, nz));
        real[i + static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k)] = w;
        total += w;
      }
  fftw_execute_dft_r2c(t->forward, real, spec);

  t->symbol.resize(t->complex_size);
  if (kernel.mode() == KernelMode::tabulated) {
    for (std::size_t q = 0; q < t->complex_size; ++q) t->symbol[q] = spec[q][0];
  } else {
    const double h = kernel.grid().h();
    const int mx = nx / 2 + 1;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < mx; ++i) {
          const double xi = 2.0 * kPi * i / (nx * h);
          const double eta = 2.0 * kPi * wrap(j, ny) / (ny * h);
          const double zeta = 2.0 * kPi * wrap(k, nz) / (nz * h);
          const double r2 = xi * xi + eta * eta + zeta * zeta;
          const std::size_t q = i + static_cast<std::size_t>(mx) * (j + static_cast<std::size_t>(ny) * k);
          t->symbol[q] = r2 > 0.0 ? 4.0 * kPi / r2 : total;
        }
  }
  fftw_free(real);
  fftw_free(spec);
  return t;
}

std::shared_ptr<const Transform> transform_for(const CoulombKernel& kernel,
                                               std::array<int, 3> dims) {
  static std::mutex cache_mutex;
  static std::map<Key, std::shared_ptr<const Transform>> cache;
  const Key key{kernel.grid().n(), kernel.grid().R(), static_cast<int>(kernel.mode()), dims[0],
                dims[1], dims[2]};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto t = make_transform(kernel, dims);
  std::lock_guard<std::mutex> lock(cache_mutex);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

CoulombKernel::CoulombKernel(const Grid& grid, KernelMode mode) : grid_(grid), mode_(mode) {}

double CoulombKernel::weight(int di, int dj, int dk) const {
  const double h = grid_.h();
  if (di == 0 && dj == 0 && dk == 0) return self_cell_constant() * h * h;
  const double r = std::sqrt(double(di) * di + double(dj) * dj + double(dk) * dk);
  return h * h / r;
}

void CoulombKernel::convolve(const Box& box, std::span<const double> in,
                             std::span<double> out) const {
  if (in.size() != box.size() || out.size() != box.size())
    throw LengthMismatch("convolution buffers do not match the box");
  if (box.empty()) return;
  const int ex = box.extent(0), ey = box.extent(1), ez = box.extent(2);
  // rounding the padded sizes up keeps the cache small across nearby boxes
  auto padded = [](int m) { return good_size(2 * ((m + 3) / 4 * 4)); };
  const auto t = transform_for(*this, {padded(ex), padded(ey), padded(ez)});
  const int nx = t->dims[0], ny = t->dims[1];

  double* real = fftw_alloc_real(t->real_size);
  fftw_complex* spec = fftw_alloc_complex(t->complex_size);
  if (!real || !spec) {
    fftw_free(real);
    fftw_free(spec);
    throw std::bad_alloc();
  }
  std::fill(real, real + t->real_size, 0.0);
  for (int k = 0; k < ez; ++k)
    for (int j = 0; j < ey; ++j)
      for (int i = 0; i < ex; ++i)
        real[i + static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k)] =
            in[i + static_cast<std::size_t>(ex) * (j + static_cast<std::size_t>(ey) * k)];
  fftw_execute_dft_r2c(t->forward, real, spec);
  for (std::size_t q = 0; q < t->complex_size; ++q) {
    spec[q][0] *= t->symbol[q];
    spec[q][1] *= t->symbol[q];
  }
  fftw_execute_dft_c2r(t->backward, spec, real);
  const double scale = 1.0 / static_cast<double>(t->real_size);
  for (int k = 0; k < ez; ++k)
    for (int j = 0; j < ey; ++j)
      for (int i = 0; i < ex; ++i)
        out[i + static_cast<std::size_t>(ex) * (j + static_cast<std::size_t>(ey) * k)] =
            scale * real[i + static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k)];
  fftw_free(real);
  fftw_free(spec);
}

ScalarField coulomb_potential(const ScalarField& u, const CoulombKernel& k, const Box& box) {
  require_same_grid(u.grid(), k.grid());
  const Grid& g = u.grid();
  ScalarField v(g);
  if (box.empty()) return v;
  std::vector<double> in(box.size()), out(box.size());
  std::size_t p = 0;
  for (int kk = box.lo[2]; kk < box.hi[2]; ++kk)
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i) in[p++] = u.at(i, j, kk);
  k.convolve(box, in, out);
  p = 0;
  for (int kk = box.lo[2]; kk < box.hi[2]; ++kk)
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i) v.at(i, j, kk) = out[p++];
  return v;
}

ScalarField coulomb_potential(const ScalarField& u, const CoulombKernel& k) {
  return coulomb_potential(u, k, full_box(u.grid()));
}

double coulomb_pairing(const ScalarField& f, const ScalarField& g, const CoulombKernel& k) {
  require_same_grid(f.grid(), g.grid());
  const Box box = merge(support_box(f), support_box(g));
  if (box.empty()) return 0.0;
  return inner(f, coulomb_potential(g, k, box));
}

double coulomb_energy(const ScalarField& u, const CoulombKernel& k) {
  return coulomb_pairing(u, u, k);
}

}  // namespace clab
