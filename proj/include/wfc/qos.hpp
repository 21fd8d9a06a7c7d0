#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wfc/registry.hpp"
#include "wfc/workflow.hpp"

namespace wfc {

enum class Attribute { rt, tp, av, re };

const char* attribute_name(Attribute a);
Attribute attribute_from_name(const std::string& name);  // throws ParseError
double attribute_of(const QoSVector& q, Attribute a);
// rt is a cost, the rest are benefits.
bool larger_is_better(Attribute a);

enum class AvailabilityMode { min, product };

// rt summed, tp and re averaged over the nodes, av by min or product.
// An empty workflow has rt 0, tp 0, re 0 and av 1.
QoSVector aggregate_qos(const Registry& registry, const Workflow& workflow,
                        AvailabilityMode mode = AvailabilityMode::min);

// uptime / theta. Throws std::invalid_argument outside 0 <= uptime <= theta, theta > 0.
double availability_from_uptime(double uptime, double theta);
// total / failures, or total when there were no failures.
double reliability_from_log(double total_operation_time, long failures);

struct QoSWeights {
  double rt = 0.25;
  double tp = 0.25;
  double av = 0.25;
  double re = 0.25;

  bool operator==(const QoSWeights&) const = default;
};

// "0.5,0.2,0.2,0.1" in rt,tp,av,re order, or a JSON object keyed by attribute.
QoSWeights weights_from_string(const std::string& text);
QoSWeights weights_from_json(const json& j);
json weights_to_json(const QoSWeights& w);

using PreferenceOrder = std::array<Attribute, 4>;

inline constexpr PreferenceOrder kDefaultOrder = {Attribute::rt, Attribute::re, Attribute::tp, Attribute::av};

// "rt>re>tp>av", or a JSON array of names / the same string.
PreferenceOrder order_from_string(const std::string& text);
PreferenceOrder order_from_json(const json& j);
json order_to_json(const PreferenceOrder& order);

struct Normalizer {
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};

  static Normalizer over(std::span<const QoSVector> candidates);
  // In [0, 1] with 1 = best; 1 when every candidate has the same value.
  double normalized(const QoSVector& q, Attribute a) const;
};

enum class ScoreMode { normalized, raw };

// Raw mode is the literal weighted sum of unnormalized attributes, so it
// rewards slow services exactly as the original encoding does.
double weighted_score(const QoSVector& q, const QoSWeights& w, const Normalizer& n,
                      ScoreMode mode = ScoreMode::normalized);

// True when a beats b on the first attribute in `order` where they differ.
// Neither beats the other on an exact tie.
bool lexicographic_better(const QoSVector& a, const QoSVector& b, const PreferenceOrder& order);

struct RankedWorkflow {
  Workflow workflow;
  QoSVector qos;
  double score = 0.0;  // weighted score; 0 under lexicographic ranking
};

struct RankOptions {
  AvailabilityMode availability = AvailabilityMode::min;
  ScoreMode score = ScoreMode::normalized;
};

// Both throw EmptyInputError on an empty list. Ties fall back to canonical
// workflow order.
std::vector<RankedWorkflow> rank_weighted(std::vector<Workflow> candidates, const Registry& registry,
                                          const QoSWeights& weights, const RankOptions& options = {});
std::vector<RankedWorkflow> rank_lexicographic(std::vector<Workflow> candidates, const Registry& registry,
                                               const PreferenceOrder& order, const RankOptions& options = {});

AvailabilityMode availability_from_string(const std::string& text);
ScoreMode score_mode_from_string(const std::string& text);

// How a candidate list is ranked, as carried by compose requests and flags.
struct RankingSpec {
  enum class Method { weighted, lexicographic };
  Method method = Method::weighted;
  QoSWeights weights;
  PreferenceOrder order = kDefaultOrder;
  RankOptions options;
};

// {"method": "weighted"|"lexicographic", "weights": .., "order": ..,
//  "availability": "min"|"product", "score": "normalized"|"raw"}; all optional.
RankingSpec ranking_spec_from_json(const json& j);
json ranking_spec_to_json(const RankingSpec& spec);

std::vector<RankedWorkflow> rank(std::vector<Workflow> candidates, const Registry& registry, const RankingSpec& spec);
json ranked_to_json(const RankedWorkflow& r);

}  // namespace wfc
