#include "wfc/planner.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <tuple>
#include <unordered_set>

namespace wfc {

namespace {

bool expired(const Deadline& deadline) {
  return deadline && std::chrono::steady_clock::now() >= *deadline;
}

// Cartesian product over per-slot candidate lists, in odometer order with
// the last slot varying fastest.
template <typename T>
std::vector<std::vector<T>> cartesian(const std::vector<std::vector<T>>& options) {
  std::vector<std::vector<T>> out;
  for (const auto& o : options)
    if (o.empty()) return out;
  std::vector<std::size_t> idx(options.size(), 0);
  while (true) {
    std::vector<T> pick;
    pick.reserve(options.size());
    for (std::size_t i = 0; i < options.size(); ++i) pick.push_back(options[i][idx[i]]);
    out.push_back(std::move(pick));
    std::size_t k = options.size();
    while (k > 0) {
      --k;
      if (++idx[k] < options[k].size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (options.empty()) return out;
  }
}

enum class Reach { unreachable, reachable, unknown };

class AbstractSearch {
 public:
  AbstractSearch(const Registry& registry, const CompositionProblem& problem, const PlannerOptions& options)
      : registry_(registry), problem_(problem), options_(options) {
    for (const auto& name : plannable_classes(registry, options.excluded_classes)) {
      const auto& c = registry.service_class(name);
      classes_.push_back(&c);
      max_inputs_ = std::max(max_inputs_, c.inputs.size());
    }
    for (std::size_t i = 0; i < problem.initial.size(); ++i)
      state_.push_back({{0, i}, problem.initial[i].resource});
  }

  PlanSet run() {
    PlanSet result;
    for (int len = 0; len <= problem_.horizon; ++len) {
      dfs(len);
      if (truncated_) break;
      if (!options_.exhaustive && !plans_.empty()) break;
    }
    std::sort(plans_.begin(), plans_.end(), plan_canonical_less);
    result.plans = std::move(plans_);
    result.truncated = truncated_;
    return result;
  }

 private:
  std::string signature() const {
    std::set<std::string> classes;
    for (const auto& r : state_) classes.insert(r.resource_class);
    std::string sig;
    for (const auto& c : classes) {
      sig += c;
      sig += '\n';
    }
    return sig;
  }

  bool goals_reachable_now() const {
    for (const auto& g : problem_.goal) {
      bool any = std::any_of(state_.begin(), state_.end(), [&](const StateResource& r) {
        return registry_.resource_taxonomy().is_subclass(r.resource_class, g.resource);
      });
      if (!any) return false;
    }
    return true;
  }

  std::size_t open_steps() const {
    return static_cast<std::size_t>(std::count(consumed_.begin(), consumed_.end(), 0));
  }

  bool all_steps_live(const std::vector<ResourceRef>& goal_refs) const {
    const std::size_t n = plan_.steps.size();
    std::vector<bool> live(n + 1, false);
    for (const auto& g : goal_refs)
      if (g.step > 0) live[g.step] = true;
    for (auto it = plan_.bindings.rbegin(); it != plan_.bindings.rend(); ++it)
      if (live[it->step] && it->producer.step > 0) live[it->producer.step] = true;
    for (std::size_t t = 1; t <= n; ++t)
      if (!live[t]) return false;
    return true;
  }

  void emit() {
    std::vector<std::vector<ResourceRef>> per_goal;
    for (const auto& g : problem_.goal) {
      std::vector<ResourceRef> refs;
      for (const auto& r : state_)
        if (registry_.resource_taxonomy().is_subclass(r.resource_class, g.resource)) refs.push_back(r.ref);
      std::sort(refs.begin(), refs.end());
      per_goal.push_back(std::move(refs));
    }
    for (auto& goal_refs : cartesian(per_goal)) {
      if (!all_steps_live(goal_refs)) continue;
      AbstractPlan p = plan_;
      p.goal_bindings = std::move(goal_refs);
      plans_.push_back(std::move(p));
    }
  }

  Reach dfs(int remaining) {
    if ((++ticks_ & 0xff) == 0 && expired(options_.deadline)) truncated_ = true;
    if (truncated_) return Reach::unknown;
    if (remaining == 0) {
      if (!goals_reachable_now()) return Reach::unreachable;
      emit();
      return Reach::reachable;
    }
    // Every step must end up feeding the goal; each remaining step can
    // absorb at most max_inputs_ unconsumed steps, each goal one more.
    if (open_steps() > static_cast<std::size_t>(remaining) * max_inputs_ + problem_.goal.size())
      return Reach::unknown;

    auto key = std::make_pair(signature(), remaining);
    if (auto it = failures_.find(key); it != failures_.end()) return Reach::unreachable;

    Reach outcome = Reach::unreachable;
    const int step = static_cast<int>(plan_.steps.size()) + 1;
    for (const auto* cls : classes_) {
      for (const auto& choice : executable_bindings(registry_, state_, *cls, step)) {
        push(*cls, step, choice);
        Reach r = dfs(remaining - 1);
        pop(*cls, choice);
        if (r == Reach::reachable) outcome = Reach::reachable;
        else if (r == Reach::unknown && outcome == Reach::unreachable) outcome = Reach::unknown;
        if (truncated_) return Reach::unknown;
      }
    }
    if (outcome == Reach::unreachable) failures_.insert(key);
    return outcome;
  }

  void push(const ServiceClass& cls, int step, const std::vector<ResourceRef>& choice) {
    plan_.steps.push_back(cls.name);
    consumed_.push_back(0);
    for (std::size_t i = 0; i < choice.size(); ++i) {
      plan_.bindings.push_back({step, i, choice[i]});
      if (choice[i].step > 0) ++consumed_[choice[i].step - 1];
    }
    for (std::size_t k = 0; k < cls.outputs.size(); ++k) state_.push_back({{step, k}, cls.outputs[k].resource_class});
  }

  void pop(const ServiceClass& cls, const std::vector<ResourceRef>& choice) {
    for (std::size_t k = 0; k < cls.outputs.size(); ++k) state_.pop_back();
    for (std::size_t i = 0; i < choice.size(); ++i) {
      plan_.bindings.pop_back();
      if (choice[i].step > 0) --consumed_[choice[i].step - 1];
    }
    consumed_.pop_back();
    plan_.steps.pop_back();
  }

  const Registry& registry_;
  const CompositionProblem& problem_;
  const PlannerOptions& options_;
  std::vector<const ServiceClass*> classes_;
  std::size_t max_inputs_ = 0;
  std::vector<StateResource> state_;
  AbstractPlan plan_;
  std::vector<int> consumed_;
  std::set<std::pair<std::string, int>> failures_;
  std::vector<AbstractPlan> plans_;
  bool truncated_ = false;
  std::size_t ticks_ = 0;
};

struct Endpoint {
  std::string node;  // empty for an initial resource
  std::string port;
  std::size_t initial = 0;
};

struct Link {
  ResourceRef producer;
  int consumer_step = 0;  // 0 for a goal link
  std::size_t input = 0;
  std::size_t goal = 0;
};

using Chain = std::vector<const ConcreteService*>;

class ConverterIndex {
 public:
  ConverterIndex(const Registry& registry, const InstantiateOptions& options) : registry_(registry), options_(options) {
    for (const auto& s : registry.services()) {
      if (options.excluded_services.count(s.name)) continue;
      if (registry.is_converter_class(registry.class_of(s))) converters_.push_back(&s);
    }
    std::sort(converters_.begin(), converters_.end(), [](auto* a, auto* b) { return a->name < b->name; });
  }

  // All shortest converter chains turning (format, class) into a resource
  // accepted by a port of class `to_class` in format `to_format`.
  const std::vector<Chain>& chains(const std::string& from_format, const std::string& from_class,
                                   const std::string& to_format, const std::string& to_class) {
    auto key = std::make_tuple(from_format, from_class, to_format, to_class);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::vector<Chain> found;
    if (from_format == to_format) {
      found.push_back({});
    } else {
      for (int len = 1; len <= options_.max_converter_chain && found.empty(); ++len) {
        Chain chain;
        std::set<std::string> seen{from_format};
        extend(from_format, from_class, to_format, to_class, len, chain, seen, found);
      }
    }
    return cache_.emplace(key, std::move(found)).first->second;
  }

 private:
  void extend(const std::string& format, const std::string& cls, const std::string& to_format,
              const std::string& to_class, int left, Chain& chain, std::set<std::string>& seen,
              std::vector<Chain>& found) {
    const auto& tax = registry_.resource_taxonomy();
    if (left == 0) {
      if (format == to_format && tax.is_subclass(cls, to_class)) found.push_back(chain);
      return;
    }
    for (const auto* conv : converters_) {
      const auto& cc = registry_.class_of(*conv);
      const auto& in = cc.inputs[0];
      const auto& out = cc.outputs[0];
      if (conv->input_formats.at(in.name) != format) continue;
      if (!tax.is_subclass(cls, in.resource_class)) continue;
      const auto& next = conv->output_formats.at(out.name);
      if (!seen.insert(next).second) continue;
      chain.push_back(conv);
      extend(next, out.resource_class, to_format, to_class, left - 1, chain, seen, found);
      chain.pop_back();
      seen.erase(next);
    }
  }

  const Registry& registry_;
  const InstantiateOptions& options_;
  std::vector<const ConcreteService*> converters_;
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<Chain>> cache_;
};

}  // namespace

std::vector<std::vector<ResourceRef>> executable_bindings(const Registry& registry,
                                                          std::span<const StateResource> state,
                                                          const ServiceClass& cls, int step) {
  std::vector<std::vector<ResourceRef>> per_port;
  for (const auto& port : cls.inputs) {
    std::vector<ResourceRef> refs;
    for (const auto& r : state)
      if (r.ref.step < step && registry.resource_taxonomy().is_subclass(r.resource_class, port.resource_class))
        refs.push_back(r.ref);
    std::sort(refs.begin(), refs.end());
    if (refs.empty()) return {};
    per_port.push_back(std::move(refs));
  }
  return cartesian(per_port);
}

std::vector<std::string> plannable_classes(const Registry& registry, const std::set<std::string>& excluded) {
  std::vector<std::string> out;
  for (const auto& c : registry.service_classes()) {
    if (c.outputs.empty() || registry.is_converter_class(c) || excluded.count(c.name)) continue;
    out.push_back(c.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool plan_canonical_less(const AbstractPlan& a, const AbstractPlan& b) {
  const auto la = a.steps.size(), lb = b.steps.size();
  return std::tie(la, a.steps, a.bindings, a.goal_bindings) < std::tie(lb, b.steps, b.bindings, b.goal_bindings);
}

PlanSet compose_abstract(const Registry& registry, const CompositionProblem& problem, const PlannerOptions& options) {
  check_problem(registry, problem);
  AbstractSearch search(registry, problem, options);
  PlanSet result = search.run();
  if (result.plans.empty() && !result.truncated)
    throw NoPlanError("no plan reaches the goal within " + std::to_string(problem.horizon) + " steps");
  return result;
}

std::string replay_plan(const Registry& registry, const CompositionProblem& problem, const AbstractPlan& plan) {
  const auto& tax = registry.resource_taxonomy();
  const std::size_t n = plan.steps.size();
  std::vector<const ServiceClass*> classes;
  for (const auto& name : plan.steps) {
    const auto* c = registry.find_service_class(name);
    if (!c) return "unknown class " + name;
    classes.push_back(c);
  }

  // Class of the resource behind a ref, if it exists and is visible at `at`.
  auto resource_of = [&](const ResourceRef& ref, std::size_t at) -> const std::string* {
    if (ref.step == 0) return ref.slot < problem.initial.size() ? &problem.initial[ref.slot].resource : nullptr;
    if (ref.step < 1 || static_cast<std::size_t>(ref.step) >= at) return nullptr;
    const auto* c = classes[ref.step - 1];
    return ref.slot < c->outputs.size() ? &c->outputs[ref.slot].resource_class : nullptr;
  };

  std::vector<std::vector<int>> fed(n);
  for (std::size_t t = 0; t < n; ++t) fed[t].assign(classes[t]->inputs.size(), 0);
  for (const auto& b : plan.bindings) {
    if (b.step < 1 || static_cast<std::size_t>(b.step) > n) return "binding for nonexistent step";
    const auto* c = classes[b.step - 1];
    if (b.input >= c->inputs.size()) return "binding for nonexistent input";
    const auto* r = resource_of(b.producer, static_cast<std::size_t>(b.step));
    if (!r) return "binding consumes a resource that is not available at step " + std::to_string(b.step);
    if (!tax.is_subclass(*r, c->inputs[b.input].resource_class)) return "binding class mismatch at step " + std::to_string(b.step);
    ++fed[b.step - 1][b.input];
  }
  for (std::size_t t = 0; t < n; ++t)
    for (int count : fed[t])
      if (count != 1) return "input not bound exactly once at step " + std::to_string(t + 1);

  if (plan.goal_bindings.size() != problem.goal.size()) return "goal bindings do not match goals";
  for (std::size_t g = 0; g < problem.goal.size(); ++g) {
    const auto* r = resource_of(plan.goal_bindings[g], n + 1);
    if (!r) return "goal bound to a missing resource";
    if (!tax.is_subclass(*r, problem.goal[g].resource)) return "goal class mismatch";
  }

  std::vector<bool> live(n + 1, false);
  for (const auto& g : plan.goal_bindings)
    if (g.step > 0) live[g.step] = true;
  for (std::size_t t = n; t >= 1; --t) {
    if (!live[t]) return "step " + std::to_string(t) + " does not contribute to the goal";
    for (const auto& b : plan.bindings)
      if (static_cast<std::size_t>(b.step) == t && b.producer.step > 0) live[b.producer.step] = true;
  }
  return {};
}

std::vector<Workflow> instantiate(const Registry& registry, const CompositionProblem& problem, const AbstractPlan& plan,
                                  const InstantiateOptions& options) {
  const std::size_t n = plan.steps.size();
  std::vector<const ServiceClass*> classes;
  std::vector<std::vector<const ConcreteService*>> choices;
  for (const auto& name : plan.steps) {
    const auto& c = registry.service_class(name);
    classes.push_back(&c);
    std::vector<const ConcreteService*> usable;
    for (const auto* s : registry.services_of(name))
      if (!options.excluded_services.count(s->name)) usable.push_back(s);
    if (usable.empty()) throw InstantiationError("class '" + name + "' has no usable concrete service");
    choices.push_back(std::move(usable));
  }

  std::vector<Link> links;
  for (const auto& b : plan.bindings) links.push_back({b.producer, b.step, b.input, 0});
  for (std::size_t g = 0; g < plan.goal_bindings.size(); ++g) links.push_back({plan.goal_bindings[g], 0, 0, g});
  std::stable_sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
    auto ka = a.consumer_step == 0 ? std::numeric_limits<int>::max() : a.consumer_step;
    auto kb = b.consumer_step == 0 ? std::numeric_limits<int>::max() : b.consumer_step;
    return std::tie(ka, a.input, a.goal) < std::tie(kb, b.input, b.goal);
  });

  ConverterIndex converters(registry, options);
  std::vector<Workflow> out;
  std::unordered_set<std::string> seen;

  for (const auto& assignment : cartesian(choices)) {
    auto produced = [&](const ResourceRef& ref) -> std::pair<std::string, std::string> {
      if (ref.step == 0) return {problem.initial[ref.slot].format, problem.initial[ref.slot].resource};
      const auto& port = classes[ref.step - 1]->outputs[ref.slot];
      return {assignment[ref.step - 1]->output_formats.at(port.name), port.resource_class};
    };
    std::vector<std::vector<Chain>> link_chains;
    bool feasible = true;
    for (const auto& link : links) {
      auto [from_format, from_class] = produced(link.producer);
      std::string to_format, to_class;
      if (link.consumer_step == 0) {
        to_format = problem.goal[link.goal].format;
        to_class = problem.goal[link.goal].resource;
      } else {
        const auto& port = classes[link.consumer_step - 1]->inputs[link.input];
        to_format = assignment[link.consumer_step - 1]->input_formats.at(port.name);
        to_class = port.resource_class;
      }
      const auto& found = converters.chains(from_format, from_class, to_format, to_class);
      if (found.empty()) {
        feasible = false;
        break;
      }
      link_chains.push_back(found);
    }
    if (!feasible) continue;

    for (const auto& picked : cartesian(link_chains)) {
      Workflow w;
      w.initial = problem.initial;
      w.goal = problem.goal;
      std::vector<std::string> node_of_step(n + 1);
      int next = 1;
      auto add_node = [&](const std::string& service) {
        std::string id = "n" + std::to_string(next);
        w.nodes.push_back({id, service, next});
        ++next;
        return id;
      };
      auto endpoint_of = [&](const ResourceRef& ref) {
        if (ref.step == 0) return Endpoint{"", "", ref.slot};
        return Endpoint{node_of_step[ref.step], classes[ref.step - 1]->outputs[ref.slot].name, 0};
      };
      auto connect = [&](const Endpoint& from, const std::string& node, const std::string& port) {
        if (from.node.empty())
          w.sources.push_back({from.initial, node, port});
        else
          w.edges.push_back({from.node, node, from.port, port});
      };
      // Runs the converter chain and returns the endpoint carrying the result.
      auto route = [&](const Link& link, const Chain& chain) {
        Endpoint cur = endpoint_of(link.producer);
        for (const auto* conv : chain) {
          const auto& cc = registry.class_of(*conv);
          std::string id = add_node(conv->name);
          connect(cur, id, cc.inputs[0].name);
          cur = Endpoint{id, cc.outputs[0].name, 0};
        }
        return cur;
      };

      std::size_t li = 0;
      for (std::size_t t = 1; t <= n; ++t) {
        std::vector<std::pair<Endpoint, std::string>> pending;
        for (; li < links.size() && links[li].consumer_step == static_cast<int>(t); ++li)
          pending.emplace_back(route(links[li], picked[li]), classes[t - 1]->inputs[links[li].input].name);
        node_of_step[t] = add_node(assignment[t - 1]->name);
        for (const auto& [from, port] : pending) connect(from, node_of_step[t], port);
      }
      for (; li < links.size(); ++li) {
        Endpoint end = route(links[li], picked[li]);
        SinkBinding sink;
        sink.goal = links[li].goal;
        if (end.node.empty())
          sink.initial = end.initial;
        else {
          sink.src = end.node;
          sink.out_port = end.port;
        }
        w.sinks.push_back(std::move(sink));
      }
      if (seen.insert(canonical_key(w)).second) out.push_back(std::move(w));
    }
  }
  if (out.empty()) throw InstantiationError("no concrete instantiation repairs every format mismatch");
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

ComposeResult compose(const Registry& registry, const CompositionProblem& problem, const PlannerOptions& planner,
                      const InstantiateOptions& inst) {
  ComposeResult result;
  PlanSet plans = compose_abstract(registry, problem, planner);
  result.plan_count = plans.plans.size();
  result.truncated = plans.truncated;
  std::unordered_set<std::string> seen;
  for (const auto& plan : plans.plans) {
    std::vector<Workflow> ws;
    try {
      ws = instantiate(registry, problem, plan, inst);
    } catch (const InstantiationError&) {
      continue;
    }
    for (auto& w : ws)
      if (seen.insert(canonical_key(w)).second) result.workflows.push_back(std::move(w));
  }
  if (result.workflows.empty() && !result.truncated)
    throw InstantiationError("none of the " + std::to_string(result.plan_count) + " abstract plans can be instantiated");
  std::sort(result.workflows.begin(), result.workflows.end(), canonical_less);
  return result;
}

ValidationReport validate_workflow(const Registry& registry, const Workflow& w) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string subject, std::string message) {
    report.violations.push_back({std::move(kind), std::move(subject), std::move(message)});
  };
  const auto& tax = registry.resource_taxonomy();

  struct NodeInfo {
    const WorkflowNode* node;
    const ConcreteService* service;
    const ServiceClass* cls;
  };
  std::map<std::string, NodeInfo> nodes;
  std::set<int> steps;
  for (const auto& n : w.nodes) {
    const auto* s = registry.find_service(n.service);
    if (!s) {
      add("unknown service", n.id, "node " + n.id + " uses unknown service '" + n.service + "'");
      continue;
    }
    if (!nodes.emplace(n.id, NodeInfo{&n, s, &registry.class_of(*s)}).second)
      add("duplicate node", n.id, "node id " + n.id + " appears twice");
    if (n.step < 1 || !steps.insert(n.step).second)
      add("bad step", n.id, "node " + n.id + " has a non-positive or repeated step");
  }

  auto port_of = [](const std::vector<Port>& ports, const std::string& name) -> const Port* {
    for (const auto& p : ports)
      if (p.name == name) return &p;
    return nullptr;
  };

  std::map<std::pair<std::string, std::string>, int> fed;  // (node, input port) -> count
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& e : w.edges) {
    const std::string subject = e.src + "." + e.out_port + " -> " + e.dst + "." + e.in_port;
    auto s = nodes.find(e.src);
    auto d = nodes.find(e.dst);
    if (s == nodes.end() || d == nodes.end()) {
      add("dangling edge", subject, "edge " + subject + " references a missing node");
      continue;
    }
    succ[e.src].push_back(e.dst);
    const Port* out = port_of(s->second.cls->outputs, e.out_port);
    const Port* in = port_of(d->second.cls->inputs, e.in_port);
    if (!out || !in) {
      add("unknown port", subject, "edge " + subject + " names a port its service does not have");
      continue;
    }
    ++fed[{e.dst, e.in_port}];
    if (s->second.node->step >= d->second.node->step)
      add("timing", subject, "edge " + subject + " consumes a resource before it is produced");
    if (!tax.is_subclass(out->resource_class, in->resource_class))
      add("class mismatch", subject,
          "edge " + subject + " carries " + out->resource_class + " into a port expecting " + in->resource_class);
    const auto& f_out = s->second.service->output_formats.at(out->name);
    const auto& f_in = d->second.service->input_formats.at(in->name);
    if (f_out != f_in)
      add("format mismatch", subject, "edge " + subject + " carries format " + f_out + " into a port expecting " + f_in);
  }

  for (const auto& src : w.sources) {
    const std::string subject = "initial[" + std::to_string(src.initial) + "] -> " + src.dst + "." + src.in_port;
    auto d = nodes.find(src.dst);
    if (src.initial >= w.initial.size() || d == nodes.end()) {
      add("dangling source", subject, "source " + subject + " references a missing resource or node");
      continue;
    }
    const Port* in = port_of(d->second.cls->inputs, src.in_port);
    if (!in) {
      add("unknown port", subject, "source " + subject + " names a port its service does not have");
      continue;
    }
    ++fed[{src.dst, src.in_port}];
    const auto& res = w.initial[src.initial];
    if (!tax.contains(res.resource) || !tax.is_subclass(res.resource, in->resource_class))
      add("class mismatch", subject, "source " + subject + " does not supply " + in->resource_class);
    const auto& f_in = d->second.service->input_formats.at(in->name);
    if (res.format != f_in)
      add("format mismatch", subject, "source " + subject + " supplies format " + res.format + " into a port expecting " + f_in);
  }

  for (const auto& [id, info] : nodes) {
    for (const auto& p : info.cls->inputs) {
      auto it = fed.find({id, p.name});
      int count = it == fed.end() ? 0 : it->second;
      if (count != 1)
        add("unbound input", id + "." + p.name,
            "input " + id + "." + p.name + " is fed " + std::to_string(count) + " times instead of once");
    }
  }

  std::vector<int> delivered(w.goal.size(), 0);
  for (const auto& sink : w.sinks) {
    const std::string subject = "goal[" + std::to_string(sink.goal) + "]";
    if (sink.goal >= w.goal.size()) {
      add("dangling sink", subject, "sink references a missing goal");
      continue;
    }
    ++delivered[sink.goal];
    const auto& goal = w.goal[sink.goal];
    std::string cls, format;
    if (sink.initial) {
      if (*sink.initial >= w.initial.size()) {
        add("dangling sink", subject, "sink references a missing initial resource");
        continue;
      }
      cls = w.initial[*sink.initial].resource;
      format = w.initial[*sink.initial].format;
    } else {
      auto s = nodes.find(sink.src);
      const Port* out = s == nodes.end() ? nullptr : port_of(s->second.cls->outputs, sink.out_port);
      if (!out) {
        add("dangling sink", subject, "sink references a missing node or port");
        continue;
      }
      cls = out->resource_class;
      format = s->second.service->output_formats.at(out->name);
    }
    if (!tax.contains(cls) || !tax.contains(goal.resource) || !tax.is_subclass(cls, goal.resource))
      add("class mismatch", subject, subject + " receives " + cls + " instead of " + goal.resource);
    if (format != goal.format)
      add("format mismatch", subject, subject + " receives format " + format + " instead of " + goal.format);
  }
  for (std::size_t g = 0; g < delivered.size(); ++g)
    if (delivered[g] != 1)
      add("goal coverage", "goal[" + std::to_string(g) + "]",
          "goal " + std::to_string(g) + " is delivered " + std::to_string(delivered[g]) + " times instead of once");

  // Kahn's algorithm over the edge relation.
  std::map<std::string, int> indegree;
  for (const auto& [id, _] : nodes) indegree[id] = 0;
  for (const auto& [src, dsts] : succ)
    for (const auto& d : dsts) ++indegree[d];
  std::queue<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);
  std::size_t visited = 0;
  while (!ready.empty()) {
    auto id = ready.front();
    ready.pop();
    ++visited;
    for (const auto& d : succ[id])
      if (--indegree[d] == 0) ready.push(d);
  }
  if (visited != indegree.size()) add("cycle", "edges", "the edge relation contains a cycle");

  return report;
}

json validation_to_json(const ValidationReport& report) {
  json arr = json::array();
  for (const auto& v : report.violations)
    arr.push_back({{"kind", v.kind}, {"subject", v.subject}, {"message", v.message}});
  return {{"valid", report.ok()}, {"violations", arr}};
}

ValidationReport validation_from_json(const json& j) {
  if (!j.is_object() || !j.contains("violations") || !j.at("violations").is_array())
    throw ParseError("validation report needs a 'violations' array");
  ValidationReport report;
  for (const auto& v : j.at("violations")) {
    if (!v.is_object()) throw ParseError("violation must be an object");
    report.violations.push_back(
        {v.value("kind", std::string()), v.value("subject", std::string()), v.value("message", std::string())});
  }
  if (j.contains("valid") && j.at("valid") != report.ok()) throw ParseError("'valid' disagrees with the violations");
  return report;
}

}  // namespace wfc
