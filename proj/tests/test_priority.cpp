#include <doctest.h>

#include <cmath>
#include <vector>

#include "ted/priority.hpp"
#include "ted/types.hpp"

using ted::DataError;
using ted::priority_factors;
using ted::PriorityConfig;
using ted::PriorityDecay;
using ted::PriorityTarget;
using ted::turn_priority;

namespace {

PriorityConfig normdist(double gamma, double sigma,
                        PriorityTarget target = PriorityTarget::same_speaker) {
  PriorityConfig cfg;
  cfg.target = target;
  cfg.decay = PriorityDecay::normdist;
  cfg.gamma = gamma;
  cfg.sigma = sigma;
  return cfg;
}

PriorityConfig constant(double gamma,
                        PriorityTarget target = PriorityTarget::same_speaker) {
  PriorityConfig cfg;
  cfg.target = target;
  cfg.decay = PriorityDecay::constant;
  cfg.gamma = gamma;
  return cfg;
}

}  // namespace

TEST_SUITE("priority") {

TEST_CASE("peak value on the current turn is exactly 1 + gamma") {
  CHECK(turn_priority<double>(5, 5, normdist(2.0, 16.8)) == 3.0);
  CHECK(turn_priority<double>(0, 0, normdist(0.5, 3.99)) == 1.5);
}

TEST_CASE("gaussian decay matches the closed form") {
  // distance 2 at sigma 2: 1 + gamma * exp(-1/2)
  const double expected = 1.0 + 2.0 * std::exp(-0.5);
  CHECK(turn_priority<double>(3, 5, normdist(2.0, 2.0)) ==
        doctest::Approx(expected).epsilon(1e-15));
  CHECK(turn_priority<double>(7, 5, normdist(2.0, 2.0)) ==
        doctest::Approx(expected).epsilon(1e-15));

  // distance 10 at sigma 5: 1 + 3 exp(-2)
  CHECK(turn_priority<double>(0, 10, normdist(3.0, 5.0)) ==
        doctest::Approx(1.0 + 3.0 * std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("decay is symmetric and strictly decreasing in distance") {
  for (double gamma : {1.5, 2.0, 3.0, 5.0}) {
    for (double sigma : {16.8, 5.79, 5.34, 3.99}) {
      const auto cfg = normdist(gamma, sigma);
      double prev = turn_priority<double>(50, 50, cfg);
      CHECK(prev == 1.0 + gamma);
      for (int d = 1; d <= 30; ++d) {
        const double at = turn_priority<double>(50 + d, 50, cfg);
        CHECK(at == turn_priority<double>(50 - d, 50, cfg));
        CHECK(at < prev);
        CHECK(at > 1.0);
        prev = at;
      }
    }
  }
}

TEST_CASE("constant decay ignores distance") {
  const auto cfg = constant(3.0);
  CHECK(turn_priority<double>(0, 9, cfg) == 3.0);
  CHECK(turn_priority<double>(9, 9, cfg) == 3.0);
}

TEST_CASE("same-speaker targeting emphasizes the current speaker's turns") {
  const auto f =
      priority_factors<double>({0, 1, 0, 1}, 3, constant(3.0));
  REQUIRE(f.size() == 4);
  CHECK(f.values[0] == 1.0);
  CHECK(f.values[1] == 3.0);
  CHECK(f.values[2] == 1.0);
  CHECK(f.values[3] == 3.0);
}

TEST_CASE("listener targeting emphasizes the other speakers' turns") {
  const auto f = priority_factors<double>(
      {0, 1, 0, 1}, 3, constant(3.0, PriorityTarget::listener));
  CHECK(f.values[0] == 3.0);
  CHECK(f.values[1] == 1.0);
  CHECK(f.values[2] == 3.0);
  CHECK(f.values[3] == 1.0);

  // The current turn is its own speaker: always targeted under same_speaker,
  // never under listener.
  const auto self = priority_factors<double>({0, 1}, 1, constant(2.0));
  CHECK(self.values[1] == 2.0);
  CHECK(f.values[3] == 1.0);
}

TEST_CASE("all targeting emphasizes every turn") {
  const auto f = priority_factors<double>(
      {0, 1, 2}, 1, constant(4.0, PriorityTarget::all));
  CHECK(f.values[0] == 4.0);
  CHECK(f.values[1] == 4.0);
  CHECK(f.values[2] == 4.0);
}

TEST_CASE("gaussian factors on a three-turn dialogue") {
  const auto f = priority_factors<double>({0, 0, 1}, 2, normdist(2.0, 1.0));
  CHECK(f.values[0] == 1.0);
  CHECK(f.values[1] == 1.0);
  CHECK(f.values[2] == 3.0);

  const auto g = priority_factors<double>(
      {0, 0, 1}, 2, normdist(2.0, 1.0, PriorityTarget::listener));
  CHECK(g.values[0] == doctest::Approx(1.0 + 2.0 * std::exp(-2.0)).epsilon(1e-15));
  CHECK(g.values[1] == doctest::Approx(1.0 + 2.0 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(g.values[2] == 1.0);
}

TEST_CASE("distances come from original turn indices, not window positions") {
  // A window that kept turns 2, 5, 9 of a longer dialogue.
  const std::vector<int> speakers = {0, 0, 0};
  const std::vector<int> indices = {2, 5, 9};
  const auto cfg = normdist(2.0, 3.0, PriorityTarget::all);
  const auto f = priority_factors<double>(speakers, indices, 2, cfg);
  CHECK(f.values[0] == turn_priority<double>(2, 9, cfg));
  CHECK(f.values[1] == turn_priority<double>(5, 9, cfg));
  CHECK(f.values[2] == 3.0);
  CHECK(f.values[0] < f.values[1]);

  // Window positions would give distances -2/-1/0 instead of -7/-4/0.
  const auto positional = priority_factors<double>(speakers, 2, cfg);
  CHECK(f.values[0] < positional.values[0]);
}

TEST_CASE("sigma presets carry the corpus turn-count spreads") {
  CHECK(ted::sigma_preset("iemocap") == 16.8);
  CHECK(ted::sigma_preset("meld") == 5.79);
  CHECK(ted::sigma_preset("emorynlp") == 5.34);
  CHECK(ted::sigma_preset("dailydialog") == 3.99);
  CHECK_FALSE(ted::sigma_preset("unknown").has_value());
}

TEST_CASE("invalid settings are rejected") {
  CHECK_THROWS_AS(turn_priority<double>(0, 0, normdist(0.0, 1.0)), DataError);
  CHECK_THROWS_AS(turn_priority<double>(0, 0, normdist(-1.0, 1.0)), DataError);
  CHECK_THROWS_AS(turn_priority<double>(0, 0, normdist(2.0, 0.0)), DataError);
  CHECK_THROWS_AS(turn_priority<double>(0, 0, constant(0.0)), DataError);
  CHECK_THROWS_AS(priority_factors<double>({0, 1}, 2, constant(2.0)), DataError);
  CHECK_THROWS_AS(priority_factors<double>({0, 1}, -1, constant(2.0)), DataError);
  CHECK_THROWS_AS(
      priority_factors<double>({0, 1}, {0, 1, 2}, 0, constant(2.0)), DataError);
}

}  // TEST_SUITE
