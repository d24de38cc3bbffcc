#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spgg/lattice.hpp"

using namespace spgg;

namespace {
std::size_t site(std::size_t row, std::size_t col, std::size_t L) { return row * L + col; }
}  // namespace

TEST_CASE("neighbors wrap on the torus") {
  auto nb = neighbors(site(0, 0, 3), 3);
  CHECK(nb[0] == site(2, 0, 3));
  CHECK(nb[1] == site(1, 0, 3));
  CHECK(nb[2] == site(0, 2, 3));
  CHECK(nb[3] == site(0, 1, 3));

  nb = neighbors(site(1, 1, 3), 3);
  CHECK(nb[0] == site(0, 1, 3));
  CHECK(nb[1] == site(2, 1, 3));
  CHECK(nb[2] == site(1, 0, 3));
  CHECK(nb[3] == site(1, 2, 3));
}

TEST_CASE("every site is a neighbour of exactly four others") {
  for (std::size_t L : {3, 4, 7}) {
    std::map<std::size_t, int> census;
    for (std::size_t i = 0; i < L * L; ++i) {
      auto nb = neighbors(i, L);
      std::sort(nb.begin(), nb.end());
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      for (auto j : nb) {
        CHECK(j != i);
        ++census[j];
      }
    }
    CHECK(census.size() == L * L);
    for (const auto& [k, c] : census) CHECK(c == 4);
  }
}

TEST_CASE("group payoff") {
  CHECK(group_payoff(0, Strategy::Defect, 4.4) == 0.0);
  CHECK(group_payoff(5, Strategy::Cooperate, 5.0) == doctest::Approx(4.0));
  CHECK(group_payoff(2, Strategy::Defect, 4.4) == doctest::Approx(1.76));
  CHECK_THROWS_AS(group_payoff(0, Strategy::Cooperate, 4.4), std::invalid_argument);
  CHECK_THROWS_AS(group_payoff(6, Strategy::Defect, 4.4), std::invalid_argument);
  CHECK_THROWS_AS(group_payoff(-1, Strategy::Defect, 4.4), std::invalid_argument);
}

TEST_CASE("total payoff on uniform grids") {
  StrategyGrid allc(4, Strategy::Cooperate);
  StrategyGrid alld(4, Strategy::Defect);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(total_payoff(allc, i, 4.4) == doctest::Approx(17.0).epsilon(1e-12));
    CHECK(total_payoff(alld, i, 6.0) == 0.0);
  }
}

TEST_CASE("total payoff matches group enumeration on random 4x4 grids") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = oracle::random_grid(4, 0.5, rng);
    std::vector<std::uint8_t> cells(g.cells().begin(), g.cells().end());
    const auto expect = oracle::payoff(cells, 4, 4.4);
    for (std::size_t i = 0; i < 16; ++i) CHECK(total_payoff(g, i, 4.4) == doctest::Approx(expect[i]).epsilon(1e-12));
  }
}

TEST_CASE("single cooperator among defectors") {
  StrategyGrid g(5);
  g.set(site(2, 2, 5), Strategy::Cooperate);
  const auto expect = oracle::payoff({g.cells().begin(), g.cells().end()}, 5, 5.0);
  CHECK(total_payoff(g, site(2, 2, 5), 5.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(expect[site(2, 2, 5)] == doctest::Approx(0.0).epsilon(1e-12));
  // each neighbour shares the focal group and its own group: 2 * (5 * 1 / 5)
  for (auto j : neighbors(site(2, 2, 5), 5)) {
    CHECK(total_payoff(g, j, 5.0) == doctest::Approx(2.0));
    CHECK(expect[j] == doctest::Approx(2.0));
  }
}

TEST_CASE("lcr signal") {
  StrategyGrid alld(4);
  StrategyGrid allc(4, Strategy::Cooperate);
  CHECK(lcr_signal(alld, 3) == 0.0);
  CHECK(lcr_signal(allc, 3) == 1.25);
  StrategyGrid lone(4);
  lone.set(5, Strategy::Cooperate);
  CHECK(lcr_signal(lone, 5) == 0.25);
}

TEST_CASE("shaped reward") {
  StrategyGrid allc(4, Strategy::Cooperate);
  const auto rec = shaped_reward(allc, 0, 4.4, 3.0);
  CHECK(rec.base == doctest::Approx(17.0));
  CHECK(rec.lcr == 1.25);
  CHECK(rec.total == doctest::Approx(20.75));
  StrategyGrid alld(4);
  CHECK(shaped_reward(alld, 0, 4.4, 3.0).total == 0.0);

  std::mt19937_64 rng(3);
  auto g = oracle::random_grid(6, 0.5, rng);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto r0 = shaped_reward(g, i, 4.4, 0.0);
    CHECK(r0.total == r0.base);
    CHECK(r0.base == total_payoff(g, i, 4.4));
    const auto r3 = shaped_reward(g, i, 4.4, 3.0);
    CHECK(r3.total == r3.base + 3.0 * r3.lcr);
  }
}

TEST_CASE("observation encoding") {
  StrategyGrid allc(4, Strategy::Cooperate);
  auto o = encode_observation(allc, 6);
  CHECK(o.own_strategy == 1);
  CHECK(o.focal_coop_count == 5);
  CHECK(o.global_coop_ratio == 1.0);

  StrategyGrid alld(4);
  o = encode_observation(alld, 6);
  CHECK(o.own_strategy == 0);
  CHECK(o.focal_coop_count == 0);
  CHECK(o.global_coop_ratio == 0.0);

  // 4x4 half-half: rows 2-3 cooperate. Site (2,1) sees up (1,1)=D, down (3,1)=C,
  // left and right C, itself C -> 4. Site (3,1) wraps down to (0,1)=D -> 4.
  LatticeConfig cfg;
  cfg.side = 4;
  const auto hh = init_grid(cfg);
  o = encode_observation(hh, site(2, 1, 4));
  CHECK(o.own_strategy == 1);
  CHECK(o.focal_coop_count == 4);
  CHECK(o.global_coop_ratio == 0.5);
  // L=6: site (4,2) has all neighbours in the cooperative block
  cfg.side = 6;
  o = encode_observation(init_grid(cfg), site(4, 2, 6));
  CHECK(o.own_strategy == 1);
  CHECK(o.focal_coop_count == 5);
  CHECK(o.global_coop_ratio == 0.5);
}

TEST_CASE("lcr times four equals focal count") {
  std::mt19937_64 rng(11);
  for (std::size_t L : {3, 5, 8}) {
    auto g = oracle::random_grid(L, 0.4, rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(lcr_signal(g, i) * 4.0 == encode_observation(g, i).focal_coop_count);
    }
  }
}

TEST_CASE("init modes") {
  LatticeConfig cfg;
  cfg.side = 4;
  cfg.init = InitMode::AllDefect;
  CHECK(init_grid(cfg).cooperator_count() == 0);
  cfg.init = InitMode::AllCooperate;
  CHECK(init_grid(cfg).cooperator_count() == 16);
  cfg.init = InitMode::HalfHalf;
  const auto hh = init_grid(cfg);
  for (std::size_t row = 0; row < 4; ++row)
    for (std::size_t col = 0; col < 4; ++col) CHECK(hh.at(row, col) == (row >= 2 ? 1 : 0));
  CHECK(coop_fraction(hh) == 0.5);

  cfg.side = 5;
  const auto odd = init_grid(cfg);
  for (std::size_t col = 0; col < 5; ++col) {
    CHECK(odd.at(1, col) == 0);
    CHECK(odd.at(2, col) == 1);
  }
}

TEST_CASE("bernoulli init concentrates and is deterministic") {
  LatticeConfig cfg;
  cfg.side = 200;
  cfg.init = InitMode::Bernoulli;
  cfg.seed = 42;
  const auto a = init_grid(cfg);
  const auto b = init_grid(cfg);
  CHECK(a == b);
  CHECK(std::abs(coop_fraction(a) - 0.5) <= 0.02);
  cfg.seed = 43;
  CHECK_FALSE(init_grid(cfg) == a);
  cfg.bernoulli_p = 0.0;
  CHECK(init_grid(cfg).cooperator_count() == 0);
  cfg.bernoulli_p = 1.0;
  CHECK(init_grid(cfg).cooperator_count() == 40000);
}

TEST_CASE("apply actions copies the action array") {
  std::mt19937_64 rng(5);
  auto g = oracle::random_grid(4, 0.5, rng);
  std::vector<std::uint8_t> ones(16, 1);
  CHECK(apply_actions(g, ones) == StrategyGrid(4, Strategy::Cooperate));
  std::vector<std::uint8_t> same(g.cells().begin(), g.cells().end());
  CHECK(apply_actions(g, same) == g);
  auto h = oracle::random_grid(4, 0.5, rng);
  std::vector<std::uint8_t> acts(h.cells().begin(), h.cells().end());
  CHECK(apply_actions(g, acts) == h);
  std::vector<std::uint8_t> short_acts(15, 0);
  CHECK_THROWS_AS(apply_actions(g, short_acts), std::invalid_argument);
}

TEST_CASE("coop fraction") {
  CHECK(coop_fraction(StrategyGrid(4, Strategy::Cooperate)) == 1.0);
  CHECK(coop_fraction(StrategyGrid(4)) == 0.0);
}

TEST_CASE("config validation and parsing") {
  LatticeConfig cfg;
  cfg.side = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.enhancement = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.bernoulli_p = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_init_mode("halfhalf") == InitMode::HalfHalf);
  CHECK(parse_init_mode("alldefect") == InitMode::AllDefect);
  CHECK_THROWS_AS(parse_init_mode("x"), std::invalid_argument);
  CHECK_THROWS_AS(StrategyGrid(3, std::vector<std::uint8_t>(9, 2)), std::invalid_argument);
  CHECK_THROWS_AS(StrategyGrid(3, std::vector<std::uint8_t>(8, 0)), std::invalid_argument);
}
