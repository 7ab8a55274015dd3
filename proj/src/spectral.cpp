#include "dlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <new>
#include <numbers>
#include <stdexcept>

#include "dlab/error.hpp"

namespace dlab {

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  void* p = fftw_malloc(n * sizeof(T));
  if (!p) throw std::bad_alloc();
  return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_free(p);
}

template struct FftwAllocator<cd>;
template struct FftwAllocator<double>;

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Scratch {
  std::vector<double, FftwAllocator<double>> real;
  Spectrum spec;
};

Scratch& scratch(std::size_t real_size, std::size_t spec_size) {
  thread_local Scratch s;
  if (s.real.size() < real_size) s.real.resize(real_size);
  if (s.spec.size() < spec_size) s.spec.resize(spec_size);
  return s;
}

}  // namespace

Spectral::Spectral(const TorusGrid& grid) : grid_(grid) {
  int rank = grid.real_dims();
  int N = grid.N();
  std::vector<int> dims(rank, N);
  spec_size_ = grid.size() / N * (N / 2 + 1);

  modes_.resize(rank);
  for (int a = 0; a < rank; ++a) {
    int len = a == rank - 1 ? N / 2 + 1 : N;
    modes_[a].resize(len);
    for (int i = 0; i < len; ++i) modes_[a][i] = (a == rank - 1 || i <= N / 2) ? i : i - N;
    if (a != rank - 1) modes_[a][N / 2] = -N / 2;
  }

  std::vector<double, FftwAllocator<double>> r(grid.size());
  Spectrum c(spec_size_);
  std::lock_guard lock(planner_mutex());
  plan_r2c_ = fftw_plan_dft_r2c(rank, dims.data(), r.data(), reinterpret_cast<fftw_complex*>(c.data()), FFTW_ESTIMATE);
  plan_c2r_ = fftw_plan_dft_c2r(rank, dims.data(), reinterpret_cast<fftw_complex*>(c.data()), r.data(), FFTW_ESTIMATE);
  if (!plan_r2c_ || !plan_c2r_) throw std::runtime_error("FFTW planning failed");
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
}

const Spectral& Spectral::for_grid(const TorusGrid& grid) {
  static std::mutex m;
  static std::map<std::tuple<int, int, double>, std::unique_ptr<Spectral>> engines;
  std::lock_guard lock(m);
  auto key = std::make_tuple(grid.n(), grid.N(), grid.period());
  auto it = engines.find(key);
  if (it == engines.end()) it = engines.emplace(key, std::make_unique<Spectral>(grid)).first;
  return *it->second;
}

int Spectral::wavenumber(int axis, int index) const { return modes_[axis][index]; }

Spectrum Spectral::forward(const double* in) const {
  Spectrum out(spec_size_);
  forward(in, out);
  return out;
}

void Spectral::forward(const double* in, Spectrum& out) const {
  out.resize(spec_size_);
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  double* src = const_cast<double*>(in);
  if (fftw_alignment_of(src) == 0) {
    // out-of-place r2c leaves its input untouched
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), src, dst);
    return;
  }
  auto& s = scratch(grid_.size(), 0);
  std::memcpy(s.real.data(), in, grid_.size() * sizeof(double));
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), s.real.data(), dst);
}

void Spectral::apply(const Spectrum& in, const Symbol& sym, double* out) const {
  auto& s = scratch(grid_.size(), spec_size_);
  double scale = 1.0 / static_cast<double>(grid_.size());
  if (sym.odd) {
    for (std::size_t m = 0; m < spec_size_; ++m) s.spec[m] = cd(-in[m].imag(), in[m].real()) * (sym.s[m] * scale);
  } else {
    for (std::size_t m = 0; m < spec_size_; ++m) s.spec[m] = in[m] * (sym.s[m] * scale);
  }
  auto* src = reinterpret_cast<fftw_complex*>(s.spec.data());
  if (fftw_alignment_of(out) == 0) {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_), src, out);
    return;
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_), src, s.real.data());
  std::memcpy(out, s.real.data(), grid_.size() * sizeof(double));
}

ScalarField Spectral::apply(const Spectrum& in, const Symbol& s) const {
  ScalarField f(grid_);
  apply(in, s, f.data());
  return f;
}

void Spectral::apply_multiplier(const Spectrum& in, const std::vector<double>& mult, double* out) const {
  Symbol sym{mult, false};
  apply(in, sym, out);
}

std::vector<double> Spectral::first(int a) const {
  // i * kappa, stored without the factor i
  int rank = grid_.real_dims();
  int N = grid_.N();
  double w = 2.0 * std::numbers::pi / grid_.period();
  std::vector<double> s(spec_size_);
  std::vector<int> idx(rank, 0);
  for (std::size_t m = 0; m < spec_size_; ++m) {
    int k = modes_[a][idx[a]];
    s[m] = (std::abs(k) == N / 2) ? 0.0 : w * k;
    for (int b = rank - 1; b >= 0; --b) {
      if (++idx[b] < static_cast<int>(modes_[b].size())) break;
      idx[b] = 0;
    }
  }
  return s;
}

std::vector<double> Spectral::second(int a, int b) const {
  if (a != b) {
    auto fa = first(a), fb = first(b);
    for (std::size_t m = 0; m < spec_size_; ++m) fa[m] = -fa[m] * fb[m];
    return fa;
  }
  int rank = grid_.real_dims();
  double w = 2.0 * std::numbers::pi / grid_.period();
  std::vector<double> s(spec_size_);
  std::vector<int> idx(rank, 0);
  for (std::size_t m = 0; m < spec_size_; ++m) {
    double k = w * modes_[a][idx[a]];
    s[m] = -k * k;
    for (int c = rank - 1; c >= 0; --c) {
      if (++idx[c] < static_cast<int>(modes_[c].size())) break;
      idx[c] = 0;
    }
  }
  return s;
}

Symbol Spectral::build(Kind kind, int i, int j, int part) const {
  auto combine = [&](double ca, const std::vector<double>& a, double cb, const std::vector<double>& b) {
    std::vector<double> s(spec_size_);
    for (std::size_t m = 0; m < spec_size_; ++m) s[m] = ca * a[m] + cb * b[m];
    return s;
  };
  int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
  switch (kind) {
    case Kind::axis:
      if (j < 0) return {first(i), true};
      return {second(i, j), false};
    case Kind::grad: {
      auto s = first(part == 0 ? xj : yj);
      double c = part == 0 ? 0.5 : -0.5;
      for (auto& v : s) v *= c;
      return {s, true};
    }
    case Kind::mixed:
      if (part == 0) return {combine(0.25, second(xi, xj), 0.25, second(yi, yj)), false};
      return {combine(0.25, second(xi, yj), -0.25, second(yi, xj)), false};
    case Kind::holo:
      if (part == 0) return {combine(0.25, second(xi, xj), -0.25, second(yi, yj)), false};
      return {combine(-0.25, second(xi, yj), -0.25, second(yi, xj)), false};
  }
  throw std::logic_error("unknown symbol kind");
}

const Symbol& Spectral::cached(Kind kind, int i, int j, int part) const {
  std::lock_guard lock(mu_);
  auto key = std::make_tuple(static_cast<int>(kind), i, j, part);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, std::make_unique<Symbol>(build(kind, i, j, part))).first;
  return *it->second;
}

const Symbol& Spectral::axis(int a, int b) const {
  if (a < 0 || a >= grid_.real_dims() || b >= grid_.real_dims()) throw std::out_of_range("axis out of range");
  return cached(Kind::axis, a, b, 0);
}
const Symbol& Spectral::grad(int j, int part) const { return cached(Kind::grad, 0, j, part); }
const Symbol& Spectral::mixed(int i, int j, int part) const { return cached(Kind::mixed, i, j, part); }
const Symbol& Spectral::holo(int i, int j, int part) const { return cached(Kind::holo, i, j, part); }

std::vector<double> Spectral::laplacian_symbol(const HMat& m) const {
  int n = grid_.n();
  std::vector<double> s(spec_size_, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // M(j,i) * (mixed_re(i,j) + i mixed_im(i,j)), real part
      cd c = m(j, i);
      const auto& re = mixed(i, j, 0).s;
      const auto& im = mixed(i, j, 1).s;
      for (std::size_t k = 0; k < spec_size_; ++k) s[k] += c.real() * re[k] - c.imag() * im[k];
    }
  return s;
}

double Spectral::tail_fraction(const Spectrum& spec) const {
  int rank = grid_.real_dims();
  int N = grid_.N();
  std::vector<int> idx(rank, 0);
  double total = 0.0, tail = 0.0;
  for (std::size_t m = 0; m < spec_size_; ++m) {
    int last = idx[rank - 1];
    double w = (last == 0 || last == N / 2) ? 1.0 : 2.0;
    bool high = false, mean = true;
    for (int a = 0; a < rank; ++a) {
      int k = modes_[a][idx[a]];
      if (std::abs(k) > N / 4) high = true;
      if (k != 0) mean = false;
    }
    if (!mean) {
      double e = w * std::norm(spec[m]);
      total += e;
      if (high) tail += e;
    }
    for (int c = rank - 1; c >= 0; --c) {
      if (++idx[c] < static_cast<int>(modes_[c].size())) break;
      idx[c] = 0;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace dlab
