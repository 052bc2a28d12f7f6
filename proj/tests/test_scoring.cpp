#include "dse/errors.hpp"
#include "dse/scoring.hpp"

#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace dse;

namespace {

EvaluationRecord rec(double a, double p, double r)
{
  EvaluationRecord x;
  x.accuracy  = a;
  x.params_m  = p;
  x.runtime_s = r;
  return x;
}

// 50-digit evaluations of the same objective, frozen.
constexpr double kScore718 = 35.942798627537644083;
constexpr double kScore250 = 24.463950151760658168;

}  // namespace

TEST_CASE("modified_netscore examples")
{
  CHECK(modified_netscore(rec(10, 1, 1)) == 20.0);
  CHECK(modified_netscore(rec(71.8, 3.47, 0.12), {0, 0, 0}) == 0.0);
  CHECK(modified_netscore(rec(71.8, 3.47, 0.12)) == doctest::Approx(kScore718).epsilon(1e-12));
  CHECK(modified_netscore(rec(25.0, 5.0, 0.2)) == doctest::Approx(kScore250).epsilon(1e-12));
  CHECK(std::abs(modified_netscore(rec(71.8, 3.47, 0.12)) - kScore718) < 1e-9);
  CHECK(std::abs(modified_netscore(rec(25.0, 5.0, 0.2)) - kScore250) < 1e-9);
}

TEST_CASE("frozen scores agree with the live high-precision oracle")
{
  CHECK(std::abs(oracle::netscore(71.8, 3.47, 0.12) - kScore718) < 1e-12);
  CHECK(std::abs(oracle::netscore(25.0, 5.0, 0.2) - kScore250) < 1e-12);
}

TEST_CASE("non-positive inputs are rejected")
{
  try
  {
    modified_netscore(rec(0, 1, 1));
    FAIL("expected NonPositiveInput");
  }
  catch (const NonPositiveInput &e)
  {
    CHECK(e.field == "accuracy");
  }
  CHECK_THROWS_AS(modified_netscore(rec(10, -1, 1)), NonPositiveInput);
  CHECK_THROWS_AS(modified_netscore(rec(10, 1, 0)), NonPositiveInput);
  CHECK_THROWS_AS(modified_netscore(rec(NAN, 1, 1)), NonPositiveInput);
  CHECK_THROWS_AS(validate(NetScoreWeights{-1, 0, 0}), InvalidArgument);
}

TEST_CASE("score_all maps elementwise and preserves order")
{
  CHECK(score_all({}).empty());

  const std::vector<EvaluationRecord> one{rec(10, 1, 1)};
  const auto                          s1 = score_all(one);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].score == 20.0);

  const std::vector<EvaluationRecord> three{rec(71.8, 3.47, 0.12), rec(10, 1, 1), rec(25, 5, 0.2)};
  const auto                          s3 = score_all(three);
  REQUIRE(s3.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
  {
    CHECK(s3[i].record == three[i]);
    CHECK(s3[i].score == modified_netscore(three[i]));
  }
}

TEST_CASE("score_all names the offending record")
{
  std::vector<EvaluationRecord> rs{rec(10, 1, 1), rec(10, 1, 1), rec(10, 0, 1)};
  for (auto fn : {&score_all, &score_all_serial})
  {
    try
    {
      fn(rs, {});
      FAIL("expected NonPositiveInput");
    }
    catch (const NonPositiveInput &e)
    {
      CHECK(std::string(e.what()).find("record 2") != std::string::npos);
      CHECK(e.field.find("params_m") != std::string::npos);
    }
  }
}

TEST_CASE("parallel score_all matches the serial reference bit for bit")
{
  std::mt19937_64                        rng(11);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  std::vector<EvaluationRecord>          rs;
  for (int i = 0; i < 20000; ++i)
    rs.push_back(rec(u(rng), u(rng), u(rng) / 100));
  CHECK(score_all(rs) == score_all_serial(rs));
}

TEST_CASE("monotonicity and exact scaling laws")
{
  std::mt19937_64                        rng(3);
  std::uniform_real_distribution<double> u(0.1, 90.0);
  const NetScoreWeights                  w;
  for (int i = 0; i < 500; ++i)
  {
    const auto base = rec(u(rng), u(rng) / 10, u(rng) / 100);
    const auto s    = modified_netscore(base, w);

    auto more_acc = base;
    more_acc.accuracy *= 1.01;
    CHECK(modified_netscore(more_acc, w) > s);
    auto more_p = base;
    more_p.params_m *= 1.01;
    CHECK(modified_netscore(more_p, w) < s);
    auto more_r = base;
    more_r.runtime_s *= 1.01;
    CHECK(modified_netscore(more_r, w) < s);

    auto p10 = base;
    p10.params_m *= 10;
    CHECK(std::abs(modified_netscore(p10, w) - s + 9.0) < 1e-9);
    auto r10 = base;
    r10.runtime_s *= 10;
    CHECK(std::abs(modified_netscore(r10, w) - s + 4.0) < 1e-9);
    auto a10 = base;
    a10.accuracy *= 10;
    CHECK(std::abs(modified_netscore(a10, w) - s - 20.0) < 1e-9);
  }
}

TEST_CASE("argmax of the score equals argmax of the raw ratio")
{
  std::mt19937_64                        rng(5);
  std::uniform_real_distribution<double> u(0.5, 80.0);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::vector<EvaluationRecord> rs;
    for (int i = 0; i < 12; ++i)
      rs.push_back(rec(u(rng), u(rng) / 10, u(rng) / 100));
    std::size_t by_score = 0, by_ratio = 0;
    for (std::size_t i = 1; i < rs.size(); ++i)
    {
      if (modified_netscore(rs[i]) > modified_netscore(rs[by_score]))
        by_score = i;
      if (netscore_ratio(rs[i]) > netscore_ratio(rs[by_ratio]))
        by_ratio = i;
    }
    CHECK(by_score == by_ratio);
  }
}

TEST_CASE("scoring is deterministic")
{
  const auto r = rec(33.3, 2.2, 0.11);
  CHECK(modified_netscore(r) == modified_netscore(r));
}
