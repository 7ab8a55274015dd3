#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const { return true; }
};

using Spectrum = std::vector<cd, FftwAllocator<cd>>;

// Multiplier on the half-complex spectrum. Odd symbols are multiplied by i.
struct Symbol {
  std::vector<double> s;
  bool odd = false;
};

// Fourier differentiation on a TorusGrid. First-derivative wavenumbers are
// zeroed at the Nyquist index; same-axis second derivatives keep -k^2.
class Spectral {
public:
  explicit Spectral(const TorusGrid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  static const Spectral& for_grid(const TorusGrid& grid);

  const TorusGrid& grid() const { return grid_; }
  std::size_t spectrum_size() const { return spec_size_; }

  Spectrum forward(const double* in) const;
  void forward(const double* in, Spectrum& out) const;
  Spectrum forward(const ScalarField& f) const { return forward(f.data()); }
  void apply(const Spectrum& in, const Symbol& s, double* out) const;
  ScalarField apply(const Spectrum& in, const Symbol& s) const;
  // out = inverse transform of in * mult (mult real, length spectrum_size)
  void apply_multiplier(const Spectrum& in, const std::vector<double>& mult, double* out) const;

  // Real partial derivative along axis a (and b if b >= 0).
  const Symbol& axis(int a, int b = -1) const;
  // part 0 = real part, 1 = imaginary part of the complex operator.
  const Symbol& grad(int j, int part) const;
  const Symbol& mixed(int i, int j, int part) const;
  const Symbol& holo(int i, int j, int part) const;

  // Symbol of psi -> tr(M dd-bar psi) for a constant Hermitian M (contravariant storage).
  std::vector<double> laplacian_symbol(const HMat& m) const;
  // Fraction of non-mean spectral energy carried by modes with some |k_a| > N/4.
  double tail_fraction(const Spectrum& s) const;

  int wavenumber(int axis, int index) const;

private:
  enum class Kind { axis, grad, mixed, holo };
  const Symbol& cached(Kind kind, int i, int j, int part) const;
  Symbol build(Kind kind, int i, int j, int part) const;
  std::vector<double> second(int a, int b) const;
  std::vector<double> first(int a) const;

  TorusGrid grid_;
  std::size_t spec_size_;
  void* plan_r2c_ = nullptr;
  void* plan_c2r_ = nullptr;
  std::vector<std::vector<int>> modes_;  // per axis: index -> wavenumber
  mutable std::mutex mu_;
  mutable std::map<std::tuple<int, int, int, int>, std::unique_ptr<Symbol>> cache_;
};

}  // namespace dlab
