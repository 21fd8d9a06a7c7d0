#include <algorithm>
#include <tuple>

#include "doctest.h"
#include "fixtures.hpp"
#include "wfc/qos.hpp"

using namespace wfc;
using namespace wfc::testing;

namespace {

std::vector<Workflow> singles(std::size_t k) {
  std::vector<Workflow> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back(nodes_only({"s" + std::to_string(i)}));
  return out;
}

std::vector<std::string> names(const std::vector<RankedWorkflow>& ranked) {
  std::vector<std::string> out;
  for (const auto& r : ranked) out.push_back(r.workflow.nodes.at(0).service);
  return out;
}

// Sort key with every attribute turned into "smaller is better".
std::vector<double> lex_key(const QoSVector& q, const std::vector<std::string>& order) {
  std::vector<double> key;
  for (const auto& a : order) {
    if (a == "rt") key.push_back(q.rt);
    if (a == "tp") key.push_back(-q.tp);
    if (a == "av") key.push_back(-q.av);
    if (a == "re") key.push_back(-q.re);
  }
  return key;
}

const std::vector<QoSVector> kFive = {
    {1.0, 10, 0.9, 500},  // s1
    {1.0, 30, 0.8, 500},  // s2: ties s1 on rt and re, wins on tp
    {0.5, 5, 0.5, 100},   // s3: fastest
    {1.0, 10, 0.99, 900}, // s4: best re among rt 1.0
    {2.0, 90, 1.0, 9000}, // s5: slowest
};

}  // namespace

TEST_CASE("aggregation over a three-service workflow") {
  const auto& r = phylo_registry();
  auto w = nodes_only({"Get_GeneTree_from_Genes", "Ext_Species_from_GeneTree", "Resolved_Names_OT"});
  auto q = aggregate_qos(r, w);
  CHECK(q.rt == 2.4 + 0.8 + 1.2);
  CHECK(q.tp == (40.0 + 80.0 + 60.0) / 3.0);
  CHECK(q.re == (3600.0 + 5400.0 + 4000.0) / 3.0);
  CHECK(q.av == 0.97);
  auto p = aggregate_qos(r, w, AvailabilityMode::product);
  CHECK(p.av == 0.97 * 0.99 * 0.98);
  CHECK(p.rt == q.rt);
}

TEST_CASE("aggregation examples") {
  auto r = qos_registry({{1.0, 10, 0.9, 100}, {2.0, 20, 0.8, 300}, {3.0, 0, 0.95, 0}});
  CHECK(aggregate_qos(r, nodes_only({"s1", "s2", "s3"})).rt == 6.0);
  CHECK(aggregate_qos(r, nodes_only({"s1", "s2", "s3"})).av == 0.8);
  auto two = aggregate_qos(r, nodes_only({"s1", "s2"}));
  CHECK(two.tp == 15.0);
  CHECK(two.re == 200.0);

  auto empty = aggregate_qos(r, Workflow{});
  CHECK(empty == QoSVector{0.0, 0.0, 1.0, 0.0});
  CHECK_THROWS_AS(aggregate_qos(r, nodes_only({"ghost"})), UnknownNameError);

  // min-mode availability is always one of the members' values
  auto perm = aggregate_qos(r, nodes_only({"s3", "s1", "s2"}));
  CHECK(perm.av == 0.8);
  CHECK(perm.rt == 6.0);
}

TEST_CASE("availability and reliability helpers") {
  CHECK(availability_from_uptime(86400, 86400) == 1.0);
  CHECK(availability_from_uptime(0, 86400) == 0.0);
  CHECK(availability_from_uptime(43200, 86400) == 0.5);
  CHECK_THROWS_AS(availability_from_uptime(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(availability_from_uptime(0, 0), std::invalid_argument);
  CHECK(reliability_from_log(1000, 4) == 250.0);
  CHECK(reliability_from_log(0, 5) == 0.0);
  CHECK(reliability_from_log(1000, 0) == 1000.0);
  CHECK_THROWS_AS(reliability_from_log(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(reliability_from_log(1, -1), std::invalid_argument);
}

TEST_CASE("weighted score") {
  std::vector<QoSVector> two = {{2.0, 0, 1, 0}, {4.0, 0, 1, 0}};
  auto n = Normalizer::over(two);
  CHECK(weighted_score(two[0], {1, 0, 0, 0}, n) == 1.0);
  CHECK(weighted_score(two[1], {1, 0, 0, 0}, n) == 0.0);
  CHECK(weighted_score(two[0], {0, 0, 0, 0}, n) == 0.0);
  // tp, av and re are all equal across the two: each contributes fully
  CHECK(weighted_score(two[1], {0, 1, 1, 1}, n) == 3.0);

  std::vector<QoSVector> three = {{2, 10, 0.9, 100}, {4, 30, 0.8, 300}, {3, 20, 1.0, 200}};
  auto n3 = Normalizer::over(three);
  QoSWeights quarter;
  // normalized columns by hand: rt (1, 0, .5), tp (0, 1, .5), av (.5, 0, 1), re (0, 1, .5)
  CHECK(weighted_score(three[0], quarter, n3) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(weighted_score(three[1], quarter, n3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(weighted_score(three[2], quarter, n3) == doctest::Approx(0.625).epsilon(1e-12));

  CHECK(weighted_score(three[1], {1, 1, 1, 1}, n3, ScoreMode::raw) == 4 + 30 + 0.8 + 300);
}

TEST_CASE("weighted ranking") {
  auto r = qos_registry({{2, 1, 1, 1}, {1, 1, 1, 1}, {3, 7, 0.5, 40}, {5, 2, 0.7, 50}});
  SUBCASE("singleton") {
    auto ranked = rank_weighted(singles(1), r, {});
    REQUIRE(ranked.size() == 1);
    CHECK(names(ranked) == std::vector<std::string>{"s1"});
  }
  SUBCASE("faster first when only rt counts") {
    auto ranked = rank_weighted(singles(2), r, {1, 0, 0, 0});
    CHECK(names(ranked) == std::vector<std::string>{"s2", "s1"});
  }
  SUBCASE("matches an independent sort") {
    QoSWeights w{0.4, 0.3, 0.2, 0.1};
    auto ranked = rank_weighted(singles(4), r, w);
    // hand columns over rt 1..5, tp 1..7, av .5..1, re 1..50
    std::vector<std::pair<double, std::string>> oracle;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& q = r.service("s" + std::to_string(i + 1)).qos;
      double s = 0.4 * (5 - q.rt) / 4 + 0.3 * (q.tp - 1) / 6 + 0.2 * (q.av - 0.5) / 0.5 + 0.1 * (q.re - 1) / 49;
      oracle.push_back({-s, "s" + std::to_string(i + 1)});
    }
    std::sort(oracle.begin(), oracle.end());
    std::vector<std::string> expected;
    for (const auto& [_, name] : oracle) expected.push_back(name);
    CHECK(names(ranked) == expected);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ranked[i].score == doctest::Approx(-oracle[i].first).epsilon(1e-12));
  }
  SUBCASE("indicator weights pick the extremum under its polarity") {
    auto r5 = qos_registry(kFive);
    CHECK(names(rank_weighted(singles(5), r5, {1, 0, 0, 0}))[0] == "s3");
    CHECK(names(rank_weighted(singles(5), r5, {0, 1, 0, 0}))[0] == "s5");
    CHECK(names(rank_weighted(singles(5), r5, {0, 0, 1, 0}))[0] == "s5");
    CHECK(names(rank_weighted(singles(5), r5, {0, 0, 0, 1}))[0] == "s5");
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(rank_weighted({}, r, {}), EmptyInputError); }
}

TEST_CASE("lexicographic ranking") {
  SUBCASE("larger re wins at the second level") {
    auto r = qos_registry({{1, 0, 1, 5}, {1, 0, 1, 9}});
    auto ranked = rank_lexicographic(singles(2), r, order_from_string("rt>re>tp>av"));
    CHECK(names(ranked) == std::vector<std::string>{"s2", "s1"});
  }
  SUBCASE("full ties fall back to canonical order") {
    auto r = qos_registry({{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}});
    auto c = singles(3);
    std::reverse(c.begin(), c.end());
    CHECK(names(rank_lexicographic(c, r, kDefaultOrder)) == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(names(rank_weighted(c, r, {})) == std::vector<std::string>{"s1", "s2", "s3"});
  }
  SUBCASE("five candidates match the brute-force comparator under every order") {
    auto r = qos_registry(kFive);
    std::vector<std::string> attrs = {"av", "re", "rt", "tp"};
    do {
      auto order = order_from_string(attrs[0] + ">" + attrs[1] + ">" + attrs[2] + ">" + attrs[3]);
      std::vector<std::pair<std::vector<double>, std::string>> oracle;
      for (std::size_t i = 0; i < kFive.size(); ++i) oracle.push_back({lex_key(kFive[i], attrs), "s" + std::to_string(i + 1)});
      std::sort(oracle.begin(), oracle.end());
      std::vector<std::string> expected;
      for (const auto& [_, name] : oracle) expected.push_back(name);
      auto ranked = rank_lexicographic(singles(5), r, order);
      CHECK(names(ranked) == expected);
      // no adjacent pair is out of order
      for (std::size_t i = 0; i + 1 < ranked.size(); ++i) CHECK_FALSE(lexicographic_better(ranked[i + 1].qos, ranked[i].qos, order));
    } while (std::next_permutation(attrs.begin(), attrs.end()));
  }
  SUBCASE("scaling every value by a constant keeps the order") {
    std::vector<QoSVector> scaled;
    for (auto q : kFive) scaled.push_back({q.rt * 3, q.tp * 3, q.av * 0.5, q.re * 3});
    auto a = qos_registry(kFive), b = qos_registry(scaled);
    CHECK(names(rank_lexicographic(singles(5), a, kDefaultOrder)) == names(rank_lexicographic(singles(5), b, kDefaultOrder)));
    CHECK(names(rank_weighted(singles(5), a, {0.1, 0.2, 0.3, 0.4})) ==
          names(rank_weighted(singles(5), b, {0.1, 0.2, 0.3, 0.4})));
  }
}

TEST_CASE("weight and order parsing") {
  CHECK(weights_from_string("0.5, 0.2,0.2,0.1") == QoSWeights{0.5, 0.2, 0.2, 0.1});
  CHECK_THROWS_AS(weights_from_string("1,2,3"), ParseError);
  CHECK_THROWS_AS(weights_from_string("1,2,x,4"), ParseError);
  CHECK_THROWS_AS(weights_from_string("1,2,inf,4"), ParseError);
  CHECK(weights_from_json(json{{"rt", 1}}) == QoSWeights{1, 0.25, 0.25, 0.25});
  CHECK(weights_from_json(weights_to_json({1, 2, 3, 4})) == QoSWeights{1, 2, 3, 4});
  CHECK_THROWS_AS(weights_from_json(json{{"speed", 1}}), ParseError);

  CHECK(order_from_string("rt>re>tp>av") == kDefaultOrder);
  CHECK(order_from_json(order_to_json(kDefaultOrder)) == kDefaultOrder);
  CHECK_THROWS_AS(order_from_string("rt>rt>tp>av"), ParseError);
  CHECK_THROWS_AS(order_from_string("rt>tp>av"), ParseError);
  CHECK(availability_from_string("product") == AvailabilityMode::product);
  CHECK_THROWS_AS(availability_from_string("max"), ParseError);
}
