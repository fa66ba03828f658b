#include "todalab/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace todalab;

namespace {

ExperimentSetup setup_for(LieType t, int rank, bool folded, int N = 32) {
  ExperimentSetup s;
  s.grid = TorusGrid(2 * std::numbers::pi, N);
  s.system = affine_by_spec(t, rank, folded);
  if (folded) s.unfolded = affine_by_spec(t, rank, false);
  s.divisors.assign(s.system.size, Divisor{});
  return s;
}

void put(Divisor& D, int i, int j, int m) { D.points.push_back({{i, j}, m}); }

}  // namespace

TEST_CASE("divisor order") {
  Divisor a, b;
  put(a, 0, 0, 2);
  put(b, 0, 0, 1);
  CHECK(divisor_geq(a, b));
  CHECK_FALSE(divisor_geq(b, a));
  CHECK(divisor_geq(a, Divisor{}));
  put(b, 1, 1, 1);
  CHECK_FALSE(divisor_geq(a, b));
  Divisor c;
  put(c, 0, 0, 1);
  put(c, 0, 0, 1);
  CHECK(divisor_equal(a, c));
}

TEST_CASE("monotonicity on the twisted C2 diagram") {
  auto s = setup_for(LieType::A, 3, true);
  put(s.divisors[0], 0, 0, 1);
  const auto v = monotonicity_experiment(s, {0.5, 1.0, 2.0});
  CHECK(v.pass);
  CHECK(v.margin > 0);
  for (const auto& step : v.details["steps"]) {
    CHECK(step["dai_li"]["outcome"] == "all_positive");
    CHECK(step["routes_agree"] == true);
    CHECK(step["product_identity"]["spread"].get<double>() <= 1e-8);
  }
}

TEST_CASE("monotonicity with a repeated rung is the equality case") {
  auto s = setup_for(LieType::G, 2, false);
  put(s.divisors[0], 0, 0, 1);
  const auto v = monotonicity_experiment(s, {1.0, 1.0});
  CHECK(v.pass);
  CHECK(v.margin == 0.0);
  CHECK(v.details["steps"][0]["equality_case"] == true);
}

TEST_CASE("ordering chain on the twisted C3 diagram") {
  auto s = setup_for(LieType::A, 5, true);
  put(s.divisors[0], 0, 0, 1);
  const auto v = ordering_experiment(s);
  CHECK(v.pass);
  CHECK(v.margin > 0);
  CHECK(v.details["links"].size() == 3);
}

TEST_CASE("ordering rejects non-path diagrams and degenerate data") {
  auto cyc = setup_for(LieType::A, 3, false);
  put(cyc.divisors[0], 0, 0, 1);
  CHECK_THROWS_AS(ordering_experiment(cyc), ExperimentRejected);
  auto flat = setup_for(LieType::A, 5, true);
  CHECK_THROWS_AS(ordering_experiment(flat), std::invalid_argument);
  auto broken = setup_for(LieType::A, 5, true);
  put(broken.divisors[0], 0, 0, 1);
  put(broken.divisors[3], 5, 5, 1);
  CHECK_THROWS_AS(ordering_experiment(broken), ExperimentRejected);
}

TEST_CASE("curvature: G2 with a simple zero on -delta") {
  auto s = setup_for(LieType::G, 2, false);
  put(s.divisors[0], 0, 0, 1);
  const auto v = curvature_experiment(s, 1.0);
  CHECK(v.pass);
  CHECK(v.details["Q_min"].get<double>() > 0);
  CHECK(v.details["root_inequality"].size() == 2);
}

TEST_CASE("curvature: flat family") {
  auto s = setup_for(LieType::G, 2, false);
  const auto v = curvature_experiment(s, 1.0);
  CHECK(v.pass);
  CHECK(v.details["branch"] == "flat");
}

TEST_CASE("curvature: prong inequality on B3") {
  auto s = setup_for(LieType::B, 3, false);
  put(s.divisors[0], 0, 0, 1);
  const auto v = curvature_experiment(s, 1.0);
  CHECK(v.pass);
  REQUIRE(v.details.contains("prong"));
  CHECK(v.details["prong"]["margin"].get<double>() > 0);
  CHECK(v.details["prong"]["node"] == "alpha1");
}

TEST_CASE("curvature rejects a broken chain") {
  auto s = setup_for(LieType::G, 2, false);
  put(s.divisors[0], 0, 0, 1);
  put(s.divisors[1], 3, 3, 1);
  CHECK_THROWS_AS(curvature_experiment(s, 1.0), ExperimentRejected);
}

TEST_CASE("fold consistency") {
  TorusGrid g(2 * std::numbers::pi, 32);
  {
    std::vector<Divisor> D(3);
    put(D[0], 0, 0, 1);
    const auto v = folding_consistency_experiment(LieType::G, 2, g, D, {}, 1.0, {});
    CHECK(v.pass);
    CHECK(v.details["sup_deviation"].get<double>() == 0.0);
  }
  {
    std::vector<Divisor> D(5);
    put(D[0], 0, 0, 1);
    put(D[2], 8, 8, 1);
    put(D[3], 8, 8, 1);
    const auto v = folding_consistency_experiment(LieType::A, 4, g, D, {}, 1.0, {});
    CHECK(v.pass);
    CHECK(v.details["sup_deviation"].get<double>() <= 1e-8);
  }
  {
    std::vector<Divisor> D(5);
    put(D[1], 8, 8, 1);
    CHECK_THROWS_AS(folding_consistency_experiment(LieType::A, 4, g, D, {}, 1.0, {}), ExperimentRejected);
  }
}

TEST_CASE("unfolded energies from a fold match an unfolded solve") {
  for (int rank : {4, 5}) {
    const auto ext = affine_by_spec(LieType::A, rank, false);
    const auto fol = affine_by_spec(LieType::A, rank, true);
    TorusGrid g(2 * std::numbers::pi, 32);
    std::vector<Divisor> D(ext.size);
    put(D[0], 0, 0, 1);
    const auto pu = assemble(g, ext, D, {});
    const auto su = newton_solve(pu);
    // raw folded data: G'_O = G_a nu_aa / (d'_O (2 if halved))
    std::vector<Divisor> F(fol.size);
    AssembleOptions o;
    for (int k = 0; k < fol.size; ++k) {
      const int a = fol.orbits[k][0];
      F[k] = D[a];
      o.amplitudes.push_back(std::log(ext.symmetrizer[a].get_d() / fol.symmetrizer[k].get_d()) -
                             (fol.halved[k] ? std::log(2.0) : 0.0));
    }
    const auto pf = assemble(g, fol, F, o);
    const auto sf = newton_solve(pf);
    const auto e = unfolded_energies(pf, sf, ext);
    for (int a = 0; a < ext.size; ++a)
      for (std::size_t x = 0; x < g.size(); x += 37) CHECK(std::abs(e[a][x] - su.W[a][x]) < 1e-9);
  }
}

TEST_CASE("limit experiment") {
  auto s = setup_for(LieType::A, 3, true);
  put(s.divisors[0], 0, 0, 1);
  const auto trivial = limit_experiment(s, {1.0});
  CHECK(trivial.pass);
  std::vector<double> ladder;
  for (int k = 0; k < 6; ++k) ladder.push_back(std::pow(16.0, -k));
  const auto v = limit_experiment(s, ladder);
  CHECK(v.pass);
  CHECK(v.details["cauchy_tail"].get<double>() <= 1e-4);
  CHECK_THROWS_AS(limit_experiment(s, {0.5, 1.0}), ExperimentRejected);

  auto bad = setup_for(LieType::G, 2, false);
  put(bad.divisors[1], 0, 0, 3);
  CHECK_THROWS_AS(limit_experiment(bad, {1.0, 0.5}), ExperimentRejected);
}
