#include "wfc/qos.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wfc {

namespace {

constexpr std::array<Attribute, 4> kAll = {Attribute::rt, Attribute::tp, Attribute::av, Attribute::re};

std::size_t index(Attribute a) { return static_cast<std::size_t>(a); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) {
    auto b = part.find_first_not_of(" \t");
    auto e = part.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw ParseError("not a finite number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("not a number: '" + s + "'");
  }
}

void check_weights(const QoSWeights& w) {
  for (double v : {w.rt, w.tp, w.av, w.re})
    if (!std::isfinite(v)) throw ParseError("weights must be finite");
}

PreferenceOrder order_from_names(const std::vector<std::string>& names) {
  if (names.size() != 4) throw ParseError("preference order needs exactly four attributes");
  PreferenceOrder order{};
  std::set<Attribute> seen;
  for (std::size_t i = 0; i < 4; ++i) {
    order[i] = attribute_from_name(names[i]);
    if (!seen.insert(order[i]).second) throw ParseError("attribute '" + names[i] + "' repeated in preference order");
  }
  return order;
}

std::vector<RankedWorkflow> score_all(std::vector<Workflow> candidates, const Registry& registry,
                                      const RankOptions& options) {
  if (candidates.empty()) throw EmptyInputError("no candidates to rank");
  std::vector<RankedWorkflow> out;
  out.reserve(candidates.size());
  for (auto& w : candidates) {
    QoSVector q = aggregate_qos(registry, w, options.availability);
    out.push_back({std::move(w), q, 0.0});
  }
  return out;
}

}  // namespace

const char* attribute_name(Attribute a) {
  switch (a) {
    case Attribute::rt: return "rt";
    case Attribute::tp: return "tp";
    case Attribute::av: return "av";
    case Attribute::re: return "re";
  }
  return "?";
}

Attribute attribute_from_name(const std::string& name) {
  for (auto a : kAll)
    if (name == attribute_name(a)) return a;
  throw ParseError("unknown QoS attribute '" + name + "'");
}

double attribute_of(const QoSVector& q, Attribute a) {
  switch (a) {
    case Attribute::rt: return q.rt;
    case Attribute::tp: return q.tp;
    case Attribute::av: return q.av;
    case Attribute::re: return q.re;
  }
  return 0.0;
}

bool larger_is_better(Attribute a) { return a != Attribute::rt; }

QoSVector aggregate_qos(const Registry& registry, const Workflow& workflow, AvailabilityMode mode) {
  QoSVector out;
  if (workflow.nodes.empty()) return out;
  double tp = 0.0, re = 0.0;
  double av = 1.0;
  for (const auto& node : workflow.nodes) {
    const QoSVector& q = registry.service(node.service).qos;
    out.rt += q.rt;
    tp += q.tp;
    re += q.re;
    av = mode == AvailabilityMode::min ? std::min(av, q.av) : av * q.av;
  }
  const double n = static_cast<double>(workflow.nodes.size());
  out.tp = tp / n;
  out.re = re / n;
  out.av = av;
  return out;
}

double availability_from_uptime(double uptime, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("observation period must be positive");
  if (uptime < 0.0 || uptime > theta) throw std::invalid_argument("uptime must lie within the observation period");
  return uptime / theta;
}

double reliability_from_log(double total_operation_time, long failures) {
  if (total_operation_time < 0.0 || failures < 0) throw std::invalid_argument("operation time and failures must be non-negative");
  return total_operation_time / static_cast<double>(std::max(failures, 1L));
}

QoSWeights weights_from_string(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 4) throw ParseError("weights need four comma-separated values (rt,tp,av,re)");
  QoSWeights w{parse_number(parts[0]), parse_number(parts[1]), parse_number(parts[2]), parse_number(parts[3])};
  check_weights(w);
  return w;
}

QoSWeights weights_from_json(const json& j) {
  if (j.is_string()) return weights_from_string(j.get<std::string>());
  if (!j.is_object()) throw ParseError("weights must be an object with rt, tp, av, re");
  QoSWeights w;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ParseError("weight '" + key + "' must be a number");
    switch (attribute_from_name(key)) {
      case Attribute::rt: w.rt = value.get<double>(); break;
      case Attribute::tp: w.tp = value.get<double>(); break;
      case Attribute::av: w.av = value.get<double>(); break;
      case Attribute::re: w.re = value.get<double>(); break;
    }
  }
  check_weights(w);
  return w;
}

json weights_to_json(const QoSWeights& w) { return {{"rt", w.rt}, {"tp", w.tp}, {"av", w.av}, {"re", w.re}}; }

PreferenceOrder order_from_string(const std::string& text) { return order_from_names(split(text, '>')); }

PreferenceOrder order_from_json(const json& j) {
  if (j.is_string()) return order_from_string(j.get<std::string>());
  if (!j.is_array()) throw ParseError("order must be an array of attribute names");
  std::vector<std::string> names;
  for (const auto& v : j) {
    if (!v.is_string()) throw ParseError("order entries must be attribute names");
    names.push_back(v.get<std::string>());
  }
  return order_from_names(names);
}

json order_to_json(const PreferenceOrder& order) {
  json out = json::array();
  for (auto a : order) out.push_back(attribute_name(a));
  return out;
}

Normalizer Normalizer::over(std::span<const QoSVector> candidates) {
  Normalizer n;
  if (candidates.empty()) return n;
  for (auto a : kAll) {
    double lo = attribute_of(candidates[0], a), hi = lo;
    for (const auto& q : candidates) {
      lo = std::min(lo, attribute_of(q, a));
      hi = std::max(hi, attribute_of(q, a));
    }
    n.lo[index(a)] = lo;
    n.hi[index(a)] = hi;
  }
  return n;
}

double Normalizer::normalized(const QoSVector& q, Attribute a) const {
  const double l = lo[index(a)], h = hi[index(a)];
  if (h == l) return 1.0;
  const double x = attribute_of(q, a);
  return larger_is_better(a) ? (x - l) / (h - l) : (h - x) / (h - l);
}

double weighted_score(const QoSVector& q, const QoSWeights& w, const Normalizer& n, ScoreMode mode) {
  if (mode == ScoreMode::raw) return q.rt * w.rt + q.tp * w.tp + q.av * w.av + q.re * w.re;
  return w.rt * n.normalized(q, Attribute::rt) + w.tp * n.normalized(q, Attribute::tp) +
         w.av * n.normalized(q, Attribute::av) + w.re * n.normalized(q, Attribute::re);
}

bool lexicographic_better(const QoSVector& a, const QoSVector& b, const PreferenceOrder& order) {
  for (auto attr : order) {
    const double x = attribute_of(a, attr), y = attribute_of(b, attr);
    if (x == y) continue;
    return larger_is_better(attr) ? x > y : x < y;
  }
  return false;
}

std::vector<RankedWorkflow> rank_weighted(std::vector<Workflow> candidates, const Registry& registry,
                                          const QoSWeights& weights, const RankOptions& options) {
  check_weights(weights);
  auto out = score_all(std::move(candidates), registry, options);
  std::vector<QoSVector> all;
  for (const auto& r : out) all.push_back(r.qos);
  const auto norm = Normalizer::over(all);
  for (auto& r : out) r.score = weighted_score(r.qos, weights, norm, options.score);
  std::sort(out.begin(), out.end(), [](const RankedWorkflow& a, const RankedWorkflow& b) {
    if (a.score != b.score) return a.score > b.score;
    return canonical_less(a.workflow, b.workflow);
  });
  return out;
}

std::vector<RankedWorkflow> rank_lexicographic(std::vector<Workflow> candidates, const Registry& registry,
                                               const PreferenceOrder& order, const RankOptions& options) {
  auto out = score_all(std::move(candidates), registry, options);
  std::sort(out.begin(), out.end(), [&](const RankedWorkflow& a, const RankedWorkflow& b) {
    if (lexicographic_better(a.qos, b.qos, order)) return true;
    if (lexicographic_better(b.qos, a.qos, order)) return false;
    return canonical_less(a.workflow, b.workflow);
  });
  return out;
}

AvailabilityMode availability_from_string(const std::string& text) {
  if (text == "min") return AvailabilityMode::min;
  if (text == "product") return AvailabilityMode::product;
  throw ParseError("availability mode must be 'min' or 'product', not '" + text + "'");
}

ScoreMode score_mode_from_string(const std::string& text) {
  if (text == "normalized") return ScoreMode::normalized;
  if (text == "raw") return ScoreMode::raw;
  throw ParseError("score mode must be 'normalized' or 'raw', not '" + text + "'");
}

RankingSpec ranking_spec_from_json(const json& j) {
  RankingSpec spec;
  if (j.is_null()) return spec;
  if (!j.is_object()) throw ParseError("ranking must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "method") {
      if (value == "weighted") spec.method = RankingSpec::Method::weighted;
      else if (value == "lexicographic") spec.method = RankingSpec::Method::lexicographic;
      else throw ParseError("ranking method must be 'weighted' or 'lexicographic'");
    } else if (key == "weights") {
      spec.weights = weights_from_json(value);
    } else if (key == "order") {
      spec.order = order_from_json(value);
    } else if (key == "availability" || key == "score") {
      if (!value.is_string()) throw ParseError("ranking." + key + " must be a string");
      if (key == "availability") spec.options.availability = availability_from_string(value.get<std::string>());
      else spec.options.score = score_mode_from_string(value.get<std::string>());
    } else {
      throw ParseError("unknown ranking field '" + key + "'");
    }
  }
  return spec;
}

json ranking_spec_to_json(const RankingSpec& spec) {
  return {{"method", spec.method == RankingSpec::Method::weighted ? "weighted" : "lexicographic"},
          {"weights", weights_to_json(spec.weights)},
          {"order", order_to_json(spec.order)},
          {"availability", spec.options.availability == AvailabilityMode::min ? "min" : "product"},
          {"score", spec.options.score == ScoreMode::normalized ? "normalized" : "raw"}};
}

std::vector<RankedWorkflow> rank(std::vector<Workflow> candidates, const Registry& registry, const RankingSpec& spec) {
  if (spec.method == RankingSpec::Method::weighted)
    return rank_weighted(std::move(candidates), registry, spec.weights, spec.options);
  return rank_lexicographic(std::move(candidates), registry, spec.order, spec.options);
}

json ranked_to_json(const RankedWorkflow& r) {
  return {{"workflow", workflow_to_json(r.workflow)}, {"qos", qos_to_json(r.qos)}, {"score", r.score}};
}

}  // namespace wfc
