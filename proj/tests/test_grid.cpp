#include "todalab/grid.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace todalab;

namespace {

const double kPi = std::numbers::pi;

// Independent 5-point stencil.
Field stencil(const TorusGrid& g, const Field& f) {
  const int N = g.N();
  Field out(f.size());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const auto at = [&](int a, int b) { return f[((a + N) % N) * N + (b + N) % N]; };
      out[i * N + j] = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * at(i, j)) / (g.h() * g.h());
    }
  return out;
}

}  // namespace

TEST_CASE("Laplacian matches the stencil and kills constants") {
  TorusGrid g(2 * kPi, 16);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  Field f(g.size());
  for (double& x : f) x = nd(rng);
  const Field a = g.laplacian(f), b = stencil(g, f);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  CHECK(std::abs(g.integrate(a)) < 1e-11);
  const Field c = g.laplacian(Field(g.size(), 3.0));
  CHECK(sup_norm(c) < 1e-12);
}

TEST_CASE("Green function matches a dense solve at N = 16") {
  const int N = 16;
  TorusGrid g(2 * kPi, N);
  const int n = N * N;
  // bordered system [Lap 1; 1^T 0] [g; mu] = [4 pi (delta/h^2 - 1/A); 0]
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const double ih2 = 1.0 / (g.h() * g.h());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const int r = i * N + j;
      K(r, r) -= 4 * ih2;
      K(r, ((i + 1) % N) * N + j) += ih2;
      K(r, ((i + N - 1) % N) * N + j) += ih2;
      K(r, i * N + (j + 1) % N) += ih2;
      K(r, i * N + (j + N - 1) % N) += ih2;
      K(r, n) = 1.0;
      K(n, r) = 1.0;
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n + 1, -4 * kPi / g.area());
  rhs[0] += 4 * kPi * ih2;
  rhs[n] = 0.0;
  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  const Field& green = g.green_origin();
  for (int k = 0; k < n; ++k) CHECK(std::abs(green[k] - sol[k]) < 1e-10);
}

TEST_CASE("Green function solves the point-source equation") {
  TorusGrid g(2 * kPi, 64);
  const Field lap = g.laplacian(g.green_origin());
  const double ih2 = 1.0 / (g.h() * g.h());
  double err = 0.0;
  for (std::size_t k = 0; k < lap.size(); ++k) {
    const double expect = 4 * kPi * ((k == 0 ? ih2 : 0.0) - 1.0 / g.area());
    err = std::max(err, std::abs(lap[k] - expect));
  }
  CHECK(err < 1e-12 * (1 + 4 * kPi * ih2));
  CHECK(std::abs(g.mean(g.green_origin())) < 1e-13);
}

TEST_CASE("translated Green function") {
  TorusGrid g(2 * kPi, 16);
  const Field gp = discrete_green(g, {3, 5});
  const Field& g0 = g.green_origin();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) CHECK(gp[g.index((i + 3) % 16, (j + 5) % 16)] == g0[g.index(i, j)]);
}

TEST_CASE("Poisson round trip") {
  TorusGrid g(2 * kPi, 64);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ud(-1, 1);
  Field f(g.size());
  for (double& x : f) x = ud(rng);
  const double m = g.mean(f);
  for (double& x : f) x -= m;
  const Field u = poisson_solve(g, f);
  const Field back = g.laplacian(u);
  double err = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(back[k] - f[k]));
  CHECK(err < 1e-11);
  CHECK(std::abs(g.mean(u)) < 1e-12);
}

TEST_CASE("incompatible Poisson data is rejected unless projected") {
  TorusGrid g(2 * kPi, 16);
  Field f(g.size(), 1.0);
  CHECK_THROWS_AS(poisson_solve(g, f), std::invalid_argument);
  const Field u = poisson_solve(g, f, true);
  CHECK(sup_norm(u) < 1e-12);
}

TEST_CASE("forcing from a divisor") {
  TorusGrid g(2 * kPi, 32);
  Divisor D;
  D.points.push_back({{0, 0}, 2});
  D.points.push_back({{10, 4}, 1});
  CHECK(D.degree() == 3);
  CHECK(D.multiplicity({0, 0}) == 2);
  CHECK(D.multiplicity({1, 1}) == 0);
  const Forcing F = forcing_from_divisor(g, D, 0.5);
  const Field lap = g.laplacian(F.log_G);
  for (std::size_t k = 0; k < lap.size(); ++k) CHECK(lap[k] == doctest::Approx(F.rho[k]).epsilon(1e-10).scale(1));
  CHECK(std::abs(g.integrate(F.rho)) < 1e-10);
  // G is smallest at the heaviest point
  const auto mn = std::min_element(F.G.begin(), F.G.end()) - F.G.begin();
  CHECK(mn == 0);
  const auto mask = forcing_mask(F.G, 1e-2);
  CHECK_FALSE(mask[0]);
  CHECK(mask[g.index(16, 16)]);
}

TEST_CASE("TGRD round trip") {
  TorusGrid g(1.0, 8);
  Field a(g.size()), b(g.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = std::sin(0.3 * k);
    b[k] = -1.0 / (k + 1);
  }
  const auto path = (std::filesystem::temp_directory_path() / "todalab_roundtrip.tgrd").string();
  write_tgrd(path, 8, {a, b});
  int N = 0;
  const auto back = read_tgrd(path, N);
  CHECK(N == 8);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
  std::filesystem::remove(path);
}
