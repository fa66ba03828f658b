#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace todalab {

using Field = std::vector<double>;

/// Square periodic grid [0, L)^2 with N nodes per side. Node (i, j) sits at
/// (i h, j h) and is stored at index i N + j.
class TorusGrid {
 public:
  TorusGrid(double L, int N);

  double L() const { return L_; }
  int N() const { return N_; }
  double h() const { return h_; }
  double area() const { return L_ * L_; }
  std::size_t size() const { return static_cast<std::size_t>(N_) * N_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(N_) * (N_ / 2 + 1); }
  std::size_t index(int i, int j) const;

  /// Eigenvalue of the 5-point Laplacian at half-spectrum slot k.
  const std::vector<double>& symbol() const { return symbol_; }

  Field laplacian(const Field& f) const;
  /// Sum f h^2.
  double integrate(const Field& f) const;
  double mean(const Field& f) const { return integrate(f) / area(); }

  void forward(const Field& f, std::vector<std::complex<double>>& out) const;
  /// Inverse transform including the 1/N^2 normalization.
  void backward(const std::vector<std::complex<double>>& in, Field& out) const;

  /// Mean-zero g with Lap_h g = 4 pi (delta_origin - 1/A), computed once.
  const Field& green_origin() const;

 private:
  struct Plans;
  double L_;
  int N_;
  double h_;
  std::vector<double> symbol_;
  std::shared_ptr<Plans> plans_;
};

struct GridPoint {
  int i = 0;
  int j = 0;
};

struct Divisor {
  std::vector<std::pair<GridPoint, int>> points;  // (node, multiplicity > 0)
  int degree() const;
  /// Multiplicity at a node (0 when absent).
  int multiplicity(const GridPoint& p) const;
};

/// G = exp(c + sum_j m_j g_{p_j}) together with rho = Lap_h log G.
struct Forcing {
  Field G;
  Field log_G;
  Field rho;
  Divisor divisor;
  double c = 0.0;
};

/// Periodic Green function at p, translated from the cached origin solve.
Field discrete_green(const TorusGrid& grid, const GridPoint& p);

Forcing forcing_from_divisor(const TorusGrid& grid, const Divisor& divisor, double c);

/// Mean-zero solution of Lap_h u = f. Incompatible f (|sum f h^2| beyond
/// 1e-10 relative) is rejected unless `project` is set, in which case the
/// mean is removed and a warning is logged.
Field poisson_solve(const TorusGrid& grid, const Field& f, bool project = false);

/// Mask {G >= tau max G}.
std::vector<bool> forcing_mask(const Field& G, double tau);

double sup_norm(const Field& f);

/// Binary TGRD file: "TGRD", u32 N, u32 field count, u32 reserved, then the
/// fields as row-major little-endian f64.
void write_tgrd(const std::string& path, int N, const std::vector<Field>& fields);
std::vector<Field> read_tgrd(const std::string& path, int& N);

/// CSV with header x,y,<names...>.
void write_csv(const std::string& path, const TorusGrid& grid, const std::vector<std::string>& names,
               const std::vector<Field>& fields);

}  // namespace todalab
