#include "todalab/grid.hpp"
#include "todalab/log.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace todalab {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct TorusGrid::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  std::once_flag green_once;
  Field green;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

namespace {

struct RealBuffer {
  double* p;
  explicit RealBuffer(std::size_t n) : p(static_cast<double*>(fftw_malloc(sizeof(double) * n))) {
    if (!p) throw std::bad_alloc();
  }
  ~RealBuffer() { fftw_free(p); }
  RealBuffer(const RealBuffer&) = delete;
  RealBuffer& operator=(const RealBuffer&) = delete;
};

struct ComplexBuffer {
  fftw_complex* p;
  explicit ComplexBuffer(std::size_t n) : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!p) throw std::bad_alloc();
  }
  ~ComplexBuffer() { fftw_free(p); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
};

}  // namespace

TorusGrid::TorusGrid(double L, int N) : L_(L), N_(N), h_(L / N) {
  if (N < 8 || N % 2 != 0) throw std::invalid_argument("grid N must be even and >= 8, got " + std::to_string(N));
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid side length L must be positive");
  const int M = N / 2 + 1;
  symbol_.resize(spectral_size());
  for (int k = 0; k < N; ++k) {
    const double sk = std::sin(std::numbers::pi * k / N);
    for (int l = 0; l < M; ++l) {
      const double sl = std::sin(std::numbers::pi * l / N);
      symbol_[static_cast<std::size_t>(k) * M + l] = -4.0 / (h_ * h_) * (sk * sk + sl * sl);
    }
  }
  plans_ = std::make_shared<Plans>();
  RealBuffer r(size());
  ComplexBuffer c(spectral_size());
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->r2c = fftw_plan_dft_r2c_2d(N, N, r.p, c.p, FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r_2d(N, N, c.p, r.p, FFTW_ESTIMATE);
}

std::size_t TorusGrid::index(int i, int j) const {
  i %= N_;
  j %= N_;
  if (i < 0) i += N_;
  if (j < 0) j += N_;
  return static_cast<std::size_t>(i) * N_ + j;
}

Field TorusGrid::laplacian(const Field& f) const {
  Field out(size());
  const double inv = 1.0 / (h_ * h_);
  for (int i = 0; i < N_; ++i) {
    const int ip = (i + 1) % N_, im = (i + N_ - 1) % N_;
    for (int j = 0; j < N_; ++j) {
      const int jp = (j + 1) % N_, jm = (j + N_ - 1) % N_;
      out[i * N_ + j] = inv * (f[ip * N_ + j] + f[im * N_ + j] + f[i * N_ + jp] + f[i * N_ + jm] - 4.0 * f[i * N_ + j]);
    }
  }
  return out;
}

double TorusGrid::integrate(const Field& f) const {
  double s = 0.0;
  for (double v : f) s += v;
  return s * h_ * h_;
}

void TorusGrid::forward(const Field& f, std::vector<std::complex<double>>& out) const {
  RealBuffer r(size());
  ComplexBuffer c(spectral_size());
  std::copy(f.begin(), f.end(), r.p);
  fftw_execute_dft_r2c(plans_->r2c, r.p, c.p);
  out.resize(spectral_size());
  std::memcpy(static_cast<void*>(out.data()), c.p, sizeof(fftw_complex) * spectral_size());
}

void TorusGrid::backward(const std::vector<std::complex<double>>& in, Field& out) const {
  RealBuffer r(size());
  ComplexBuffer c(spectral_size());
  std::memcpy(c.p, static_cast<const void*>(in.data()), sizeof(fftw_complex) * spectral_size());
  fftw_execute_dft_c2r(plans_->c2r, c.p, r.p);
  out.resize(size());
  const double scale = 1.0 / static_cast<double>(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = r.p[k] * scale;
}

const Field& TorusGrid::green_origin() const {
  std::call_once(plans_->green_once, [this] {
    Field f(size(), -4.0 * std::numbers::pi / area());
    f[0] += 4.0 * std::numbers::pi / (h_ * h_);
    plans_->green = poisson_solve(*this, f, false);
  });
  return plans_->green;
}

int Divisor::degree() const {
  int d = 0;
  for (const auto& [p, m] : points) d += m;
  return d;
}

int Divisor::multiplicity(const GridPoint& q) const {
  int m = 0;
  for (const auto& [p, k] : points)
    if (p.i == q.i && p.j == q.j) m += k;
  return m;
}

Field discrete_green(const TorusGrid& grid, const GridPoint& p) {
  const Field& g0 = grid.green_origin();
  const int N = grid.N();
  Field g(grid.size());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) g[grid.index(i, j)] = g0[grid.index(i - p.i, j - p.j)];
  return g;
}

Forcing forcing_from_divisor(const TorusGrid& grid, const Divisor& divisor, double c) {
  const int N = grid.N();
  Forcing F;
  F.divisor = divisor;
  F.c = c;
  F.log_G.assign(grid.size(), c);
  F.rho.assign(grid.size(), 0.0);
  for (const auto& [p, m] : divisor.points) {
    if (m <= 0) throw std::invalid_argument("divisor multiplicities must be positive");
    if (p.i < 0 || p.i >= N || p.j < 0 || p.j >= N) throw std::invalid_argument("divisor point outside the grid");
    const Field g = discrete_green(grid, p);
    for (std::size_t k = 0; k < g.size(); ++k) F.log_G[k] += m * g[k];
    F.rho[grid.index(p.i, p.j)] += 4.0 * std::numbers::pi * m / (grid.h() * grid.h());
  }
  const double background = 4.0 * std::numbers::pi * divisor.degree() / grid.area();
  for (double& r : F.rho) r -= background;
  F.G.resize(grid.size());
  for (std::size_t k = 0; k < F.G.size(); ++k) F.G[k] = std::exp(F.log_G[k]);
  return F;
}

Field poisson_solve(const TorusGrid& grid, const Field& f, bool project) {
  if (f.size() != grid.size()) throw std::invalid_argument("poisson_solve: field size mismatch");
  const double total = grid.integrate(f);
  const double scale = 1.0 + sup_norm(f) * grid.area();
  Field rhs = f;
  if (std::abs(total) > 1e-10 * scale) {
    if (!project) {
      std::ostringstream msg;
      msg << "poisson_solve: right-hand side is incompatible (integral " << std::setprecision(17) << total << ")";
      throw std::invalid_argument(msg.str());
    }
    log_warning("poisson_solve: projecting out incompatible mean " + std::to_string(total / grid.area()));
  }
  const double m = total / grid.area();
  for (double& v : rhs) v -= m;
  std::vector<std::complex<double>> hat;
  grid.forward(rhs, hat);
  const auto& sym = grid.symbol();
  hat[0] = 0.0;
  for (std::size_t k = 1; k < hat.size(); ++k) hat[k] /= sym[k];
  Field out;
  grid.backward(hat, out);
  return out;
}

std::vector<bool> forcing_mask(const Field& G, double tau) {
  const double mx = *std::max_element(G.begin(), G.end());
  std::vector<bool> mask(G.size());
  for (std::size_t k = 0; k < G.size(); ++k) mask[k] = G[k] >= tau * mx;
  return mask;
}

double sup_norm(const Field& f) {
  double s = 0.0;
  for (double v : f) s = std::max(s, std::abs(v));
  return s;
}

void write_tgrd(const std::string& path, int N, const std::vector<Field>& fields) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::uint32_t header[3] = {static_cast<std::uint32_t>(N), static_cast<std::uint32_t>(fields.size()), 0};
  out.write("TGRD", 4);
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (const auto& f : fields) {
    if (f.size() != static_cast<std::size_t>(N) * N) throw std::invalid_argument("write_tgrd: field size mismatch");
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(sizeof(double) * f.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Field> read_tgrd(const std::string& path, int& N) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  std::uint32_t header[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(magic, "TGRD", 4) != 0) throw std::runtime_error(path + ": not a TGRD file");
  N = static_cast<int>(header[0]);
  std::vector<Field> fields(header[1], Field(static_cast<std::size_t>(N) * N));
  for (auto& f : fields) in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(sizeof(double) * f.size()));
  if (!in) throw std::runtime_error(path + ": truncated TGRD file");
  return fields;
}

void write_csv(const std::string& path, const TorusGrid& grid, const std::vector<std::string>& names,
               const std::vector<Field>& fields) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "x,y";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (int i = 0; i < grid.N(); ++i)
    for (int j = 0; j < grid.N(); ++j) {
      out << i * grid.h() << ',' << j * grid.h();
      for (const auto& f : fields) out << ',' << f[grid.index(i, j)];
      out << '\n';
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace todalab
