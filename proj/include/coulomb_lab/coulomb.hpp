#pragma once

// Free-space Coulomb potential v = u * 1/|x| by zero-padded FFT convolution
// (doubled box, so no periodic images), and the bilinear energy D(f, g).

#include <array>
#include <memory>
#include <span>

#include "coulomb_lab/field.hpp"
#include "coulomb_lab/mask.hpp"

namespace clab {

/// Index box [lo, hi) on a grid.
struct Box {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  int extent(int a) const { return hi[a] - lo[a]; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool contains(int i, int j, int k) const {
    return i >= lo[0] && i < hi[0] && j >= lo[1] && j < hi[1] && k >= lo[2] && k < hi[2];
  }
};

Box full_box(const Grid& grid);
Box bounding_box(const DomainMask& mask);
/// Smallest box holding every nonzero value of f.
Box support_box(const ScalarField& f);
Box merge(const Box& a, const Box& b);

enum class KernelMode { tabulated, spectral };

/// alpha = int over the unit cube centered at 0 of dx/|x|; the self-cell
/// kernel value is alpha * h^2.
double self_cell_constant();

class CoulombKernel {
 public:
  explicit CoulombKernel(const Grid& grid, KernelMode mode = KernelMode::tabulated);

  const Grid& grid() const { return grid_; }
  KernelMode mode() const { return mode_; }

  /// Tabulated kernel (quadrature weight h^3 included) at an integer offset.
  double weight(int di, int dj, int dk) const;

  /// out = G * in on the box; in and out are dense over the box, x-fastest.
  /// Values of u outside the box are taken as zero.
  void convolve(const Box& box, std::span<const double> in, std::span<double> out) const;

 private:
  Grid grid_;
  KernelMode mode_;
};

/// Potential on the whole grid.
ScalarField coulomb_potential(const ScalarField& u, const CoulombKernel& k);
/// Potential evaluated on `box` only (zero elsewhere), sourced by u on `box`.
ScalarField coulomb_potential(const ScalarField& u, const CoulombKernel& k, const Box& box);

double coulomb_energy(const ScalarField& u, const CoulombKernel& k);
double coulomb_pairing(const ScalarField& f, const ScalarField& g, const CoulombKernel& k);

/// Number of FFT threads, from COULOMB_LAB_THREADS (default 1).
int fft_threads();

}  // namespace clab
