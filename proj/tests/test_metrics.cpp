#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "ted/metrics.hpp"
#include "ted/rng.hpp"
#include "ted/types.hpp"

using ted::DataError;
using ted::LabelSet;
using ted::SplitMix64;

namespace {

const LabelSet kTwo{{"x", "y"}, std::nullopt};
const LabelSet kThreeNeutral{{"a", "b", "neutral"}, 2};

std::vector<int> random_labels(int n, int k, SplitMix64& rng) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int& v : out) v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion matrix is gold rows by predicted columns") {
  const auto c = ted::confusion_matrix({1, 1, 0}, {0, 1, 0}, kTwo);
  CHECK(c(0, 0) == 1);
  CHECK(c(0, 1) == 1);
  CHECK(c(1, 0) == 0);
  CHECK(c(1, 1) == 1);
  CHECK(c.sum() == 3);
}

TEST_CASE("perfect predictions score one everywhere") {
  const std::vector<int> labels = {0, 1, 2, 0, 1, 2};
  const auto r = ted::evaluate_predictions(labels, labels, kThreeNeutral);
  CHECK(r.weighted_f1 == 1.0);
  CHECK(r.micro_f1 == 1.0);
  CHECK(r.macro_f1 == 1.0);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("weighted and macro f1 on a worked two-class example") {
  // golds x,x,x,y vs preds x,y,x,y:
  //   class x: tp=2 gold=3 pred=2 -> F1 = 4/5
  //   class y: tp=1 gold=1 pred=2 -> F1 = 2/3
  const std::vector<int> golds = {0, 0, 0, 1};
  const std::vector<int> preds = {0, 1, 0, 1};
  CHECK(ted::weighted_f1(preds, golds, kTwo) ==
        doctest::Approx(0.75 * 0.8 + 0.25 * (2.0 / 3.0)).epsilon(1e-15));
  CHECK(ted::macro_f1(preds, golds, kTwo) ==
        doctest::Approx(0.5 * (0.8 + 2.0 / 3.0)).epsilon(1e-15));
  CHECK(ted::micro_f1(preds, golds, kTwo, false) == 0.75);
}

TEST_CASE("zero-support and zero-denominator classes contribute zero") {
  // Nothing is ever class b: support 0, so weighted skips it and macro
  // averages a hard 0 for it.
  const std::vector<int> golds = {0, 0, 2, 2};
  const std::vector<int> preds = {0, 2, 2, 2};
  const auto r = ted::evaluate_predictions(preds, golds, kThreeNeutral);
  CHECK(r.per_class[1].support == 0);
  CHECK(r.per_class[1].f1 == 0.0);
  // class a: tp=1 gold=2 pred=1 -> 2/3; class n: tp=2 gold=2 pred=3 -> 4/5
  CHECK(r.weighted_f1 ==
        doctest::Approx(0.5 * (2.0 / 3.0) + 0.5 * 0.8).epsilon(1e-15));
  CHECK(r.macro_f1 == doctest::Approx((2.0 / 3.0 + 0.0 + 0.8) / 3.0).epsilon(1e-15));
}

TEST_CASE("micro f1 with neutral exclusion on a worked example") {
  //            kept?  pred-neutral?  correct?
  // (0,0)      yes    no             yes
  // (1,2)      yes    yes            no
  // (2,2)      no
  // (0,1)      yes    no             no
  // (1,1)      yes    no             yes
  // (2,0)      no
  // (0,0)      yes    no             yes
  // kept=5, predicted=4, tp=3 -> P=3/4, R=3/5, F1=2/3
  const std::vector<int> golds = {0, 1, 2, 0, 1, 2, 0};
  const std::vector<int> preds = {0, 2, 2, 1, 1, 0, 0};
  CHECK(ted::micro_f1(preds, golds, kThreeNeutral, true) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  // Neutral predictions on kept examples lower recall but not precision.
  const std::vector<int> worse = {0, 2, 2, 2, 1, 0, 0};  // (0,1) -> (0,neutral)
  // kept=5, predicted=3, tp=3 -> P=1, R=3/5, F1=3/4
  CHECK(ted::micro_f1(worse, golds, kThreeNeutral, true) ==
        doctest::Approx(0.75).epsilon(1e-15));

  // Without exclusion micro f1 is plain accuracy.
  CHECK(ted::micro_f1(preds, golds, kThreeNeutral, false) ==
        doctest::Approx(4.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("micro f1 is zero when every kept prediction is neutral") {
  const std::vector<int> golds = {0, 1, 2};
  const std::vector<int> preds = {2, 2, 2};
  CHECK(ted::micro_f1(preds, golds, kThreeNeutral, true) == 0.0);
}

TEST_CASE("all-neutral golds cannot be scored with exclusion") {
  const std::vector<int> golds = {2, 2};
  const std::vector<int> preds = {0, 1};
  CHECK_THROWS_AS(ted::micro_f1(preds, golds, kThreeNeutral, true), DataError);
  CHECK_THROWS_AS(ted::micro_f1(preds, golds, kTwo, true), DataError);
}

TEST_CASE("metrics match the exact rational oracle on random data") {
  SplitMix64 rng(70);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.next_below(5));
    const int n = 1 + static_cast<int>(rng.next_below(40));
    std::vector<int> golds = random_labels(n, k, rng);
    std::vector<int> preds = random_labels(n, k, rng);

    LabelSet labels;
    for (int l = 0; l < k; ++l) labels.names.push_back("c" + std::to_string(l));
    const bool with_neutral = rng.next_below(2) == 0;
    if (with_neutral) {
      labels.neutral_index = k - 1;
      golds[0] = 0;  // keep at least one non-neutral gold
    }

    const auto exact =
        oracle::f1_scores(preds, golds, k, with_neutral ? k - 1 : -1);
    CHECK(ted::weighted_f1(preds, golds, labels) ==
          doctest::Approx(exact.weighted.value()).epsilon(1e-12));
    CHECK(ted::macro_f1(preds, golds, labels) ==
          doctest::Approx(exact.macro.value()).epsilon(1e-12));
    CHECK(ted::micro_f1(preds, golds, labels, false) ==
          doctest::Approx(exact.micro_plain.value()).epsilon(1e-12));
    if (with_neutral) {
      CHECK(ted::micro_f1(preds, golds, labels, true) ==
            doctest::Approx(exact.micro_excl.value()).epsilon(1e-12));
    }

    const auto r = ted::evaluate_predictions(preds, golds, labels);
    CHECK(r.weighted_f1 == ted::weighted_f1(preds, golds, labels));
    CHECK(r.micro_f1 == ted::micro_f1(preds, golds, labels, with_neutral));
    CHECK(r.accuracy == doctest::Approx(exact.micro_plain.value()).epsilon(1e-12));
  }
}

TEST_CASE("metric_value selects the configured metric") {
  const std::vector<int> golds = {0, 1, 2, 0};
  const std::vector<int> preds = {0, 2, 2, 1};
  CHECK(ted::metric_value(ted::Metric::weighted_f1, preds, golds, kThreeNeutral) ==
        ted::weighted_f1(preds, golds, kThreeNeutral));
  CHECK(ted::metric_value(ted::Metric::micro_f1, preds, golds, kThreeNeutral) ==
        ted::micro_f1(preds, golds, kThreeNeutral, true));
  // Without a neutral label the micro metric falls back to plain accuracy.
  CHECK(ted::metric_value(ted::Metric::micro_f1, {0, 1}, {1, 1}, kTwo) == 0.5);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(ted::weighted_f1({0}, {0, 1}, kTwo), DataError);
  CHECK_THROWS_AS(ted::weighted_f1({}, {}, kTwo), DataError);
  CHECK_THROWS_AS(ted::weighted_f1({0, 2}, {0, 1}, kTwo), DataError);
  CHECK_THROWS_AS(ted::weighted_f1({0, -1}, {0, 1}, kTwo), DataError);
  CHECK_THROWS_AS(ted::weighted_f1({0, 0}, {0, 2}, kTwo), DataError);
}

TEST_CASE("per-class stats expose precision, recall, and support") {
  const std::vector<int> golds = {0, 0, 0, 1};
  const std::vector<int> preds = {0, 1, 0, 1};
  const auto r = ted::evaluate_predictions(preds, golds, kTwo);
  CHECK(r.per_class[0].support == 3);
  CHECK(r.per_class[0].precision == 1.0);
  CHECK(r.per_class[0].recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_class[1].support == 1);
  CHECK(r.per_class[1].precision == 0.5);
  CHECK(r.per_class[1].recall == 1.0);
}

}  // TEST_SUITE
