#include "wfc/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "wfc/http_server.hpp"

namespace wfc {

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

// Inline JSON when the text looks like it, a file path otherwise.
json inline_or_file(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("malformed JSON argument: ") + e.what());
    }
  }
  return read_document(text);
}

Registry load_registry(const std::string& path) { return Registry::from_json(read_document(path)); }

// Workflows from a bare array, a single workflow, or any document with a
// "candidates" list (compose, rank and refine output).
std::vector<Workflow> candidates_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object() && j.contains("candidates")) list = &j.at("candidates");
  else if (j.is_object()) return {workflow_from_json(j)};
  if (!list->is_array()) throw ParseError("candidates must be an array");
  std::vector<Workflow> out;
  for (const auto& c : *list) out.push_back(workflow_from_json(c.is_object() && c.contains("workflow") ? c.at("workflow") : c));
  return out;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string qos_text(const QoSVector& q) {
  return "rt " + fixed(q.rt, 3) + "  tp " + fixed(q.tp, 3) + "  av " + fixed(q.av, 3) + "  re " + fixed(q.re, 3);
}

// One line per node with where each input comes from, then goal deliveries.
void print_structure(std::ostream& out, const Workflow& w) {
  for (const auto& n : w.nodes) {
    std::vector<std::string> inputs;
    for (const auto& s : w.sources)
      if (s.dst == n.id) inputs.push_back(s.in_port + " <- initial[" + std::to_string(s.initial) + "]");
    for (const auto& e : w.edges)
      if (e.dst == n.id) inputs.push_back(e.in_port + " <- " + e.src + "." + e.out_port);
    std::sort(inputs.begin(), inputs.end());
    out << "    " << std::setw(3) << n.step << "  " << std::left << std::setw(5) << n.id << std::setw(34) << n.service
        << std::right;
    for (std::size_t i = 0; i < inputs.size(); ++i) out << (i ? ", " : "") << inputs[i];
    out << '\n';
  }
  for (const auto& s : w.sinks) {
    out << "         goal[" << s.goal << "] <- ";
    if (s.initial) out << "initial[" << *s.initial << "]\n";
    else out << s.src << "." << s.out_port << '\n';
  }
}

json ranked_document(const std::vector<RankedWorkflow>& ranked, const RankingSpec& spec) {
  json candidates = json::array();
  for (const auto& r : ranked) candidates.push_back(ranked_to_json(r));
  return {{"ranking", ranking_spec_to_json(spec)}, {"candidate_count", ranked.size()}, {"candidates", candidates}};
}

void print_ranked(std::ostream& out, const std::vector<RankedWorkflow>& ranked, std::size_t limit, bool weighted) {
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) {
    const auto& r = ranked[i];
    out << '#' << (i + 1) << "  " << r.workflow.nodes.size() << " steps";
    if (weighted) out << "  score " << fixed(r.score);
    out << "  " << qos_text(r.qos) << '\n';
    print_structure(out, r.workflow);
  }
  if (ranked.size() > limit) out << "... " << ranked.size() - limit << " more (raise --limit)\n";
}

struct RankFlags {
  std::string method;
  std::string weights;
  std::string order;
  std::string availability = "min";
  std::string score = "normalized";

  void add(CLI::App* cmd) {
    cmd->add_option("--method", method, "weighted or lexicographic (default: lexicographic when --order is given)")
        ->check(CLI::IsMember({"weighted", "lexicographic"}));
    cmd->add_option("--weights", weights, "QoS weights rt,tp,av,re or a JSON object");
    cmd->add_option("--order", order, "preference order, e.g. rt>re>tp>av");
    cmd->add_option("--availability", availability, "min or product")->check(CLI::IsMember({"min", "product"}));
    cmd->add_option("--score", score, "normalized or raw")->check(CLI::IsMember({"normalized", "raw"}));
  }

  RankingSpec spec() const {
    RankingSpec s;
    if (!weights.empty())
      s.weights = weights.find('{') != std::string::npos ? weights_from_json(inline_or_file(weights)) : weights_from_string(weights);
    if (!order.empty()) s.order = order_from_string(order);
    const std::string m = method.empty() ? (order.empty() ? "weighted" : "lexicographic") : method;
    s.method = m == "weighted" ? RankingSpec::Method::weighted : RankingSpec::Method::lexicographic;
    s.options.availability = availability_from_string(availability);
    s.options.score = score_mode_from_string(score);
    return s;
  }
};

SimilarityWeights similarity_weights(const std::string& text) {
  if (text.empty()) return {};
  return similarity_weights_from_json(inline_or_file(text));
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

int serve(const std::string& listen, const std::string& store_path, long budget_ms, std::ostream& out,
          std::ostream& err) {
  const auto [host, port] = parse_listen_address(listen);
  SessionStore store(store_path);
  store.load();
  ApiConfig config;
  config.time_budget = std::chrono::milliseconds(budget_ms);
  Api api(store, config);
  HttpServer server(api);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int bound = server.bind(host, port);
  if (bound < 0) {
    err << "cannot listen on " << listen << '\n';
    return kExitBadInput;
  }
  out << "listening on " << host << ':' << bound << " (store " << (store_path.empty() ? "in memory" : store_path)
      << ", " << store.session_ids().size() << " sessions)" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  const bool ok = server.serve();
  // wake the waiter if the server stopped on its own
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Workflow composition engine", "wfc"};
  app.require_subcommand(1);
  std::string registry_path;
  std::string format = "human";
  auto common = [&](CLI::App* cmd, bool needs_registry = true) {
    auto* r = cmd->add_option("--registry", registry_path, "registry document");
    if (needs_registry) r->required();
    cmd->add_option("--out", format, "human or json")->check(CLI::IsMember({"human", "json"}));
  };

  // compose
  auto* compose_cmd = app.add_subcommand("compose", "plan and rank workflows for a problem");
  common(compose_cmd);
  std::string problem_path;
  int horizon = 0;
  std::string compose_mode = "minimal";
  std::size_t limit = 10;
  RankFlags compose_rank;
  compose_cmd->add_option("--problem", problem_path, "problem document")->required();
  compose_cmd->add_option("--horizon", horizon, "override the problem's horizon")->check(CLI::PositiveNumber);
  compose_cmd->add_option("--mode", compose_mode, "minimal (shortest plans) or exhaustive (every length)")
      ->check(CLI::IsMember({"minimal", "exhaustive"}));
  compose_cmd->add_option("--limit", limit, "candidates shown in human output");
  compose_rank.add(compose_cmd);

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "rank given workflows by QoS");
  common(rank_cmd);
  std::string candidates_path;
  RankFlags rank_flags;
  rank_cmd->add_option("--candidates", candidates_path, "workflows: array, or a document with 'candidates'")->required();
  rank_cmd->add_option("--limit", limit, "candidates shown in human output");
  rank_flags.add(rank_cmd);

  // refine
  auto* refine_cmd = app.add_subcommand("refine", "replan a workflow under refinement requests");
  common(refine_cmd);
  std::string workflow_path, requests_path, sim_weights;
  std::string refine_mode = "exact";
  int refine_horizon = 8;
  std::size_t max_candidates = 500;
  refine_cmd->add_option("--workflow", workflow_path, "original workflow")->required();
  refine_cmd->add_option("--requests", requests_path, "request document")->required();
  refine_cmd->add_option("--mode", refine_mode, "exact or approx")->check(CLI::IsMember({"exact", "approx"}));
  refine_cmd->add_option("--horizon", refine_horizon, "longest candidate")->check(CLI::PositiveNumber);
  refine_cmd->add_option("--max-candidates", max_candidates, "cap on returned candidates");
  refine_cmd->add_option("--weights", sim_weights, "similarity weights, JSON text or file");
  refine_cmd->add_option("--limit", limit, "candidates shown in human output");

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "similarity of two workflows");
  common(sim_cmd);
  std::string a_path, b_path;
  sim_cmd->add_option("first", a_path, "workflow document")->required();
  sim_cmd->add_option("second", b_path, "workflow document")->required();
  sim_cmd->add_option("--weights", sim_weights, "similarity weights, JSON text or file");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check a workflow against a registry");
  common(validate_cmd);
  validate_cmd->add_option("workflow", workflow_path, "workflow document")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
  std::string listen = env_or("WFC_LISTEN", "127.0.0.1:8080");
  std::string store_path = env_or("WFC_STORE", "");
  long budget_ms = 30000;
  serve_cmd->add_option("--listen", listen, "host:port (env WFC_LISTEN)");
  serve_cmd->add_option("--store", store_path, "session store directory; empty keeps sessions in memory (env WFC_STORE)");
  serve_cmd->add_option("--time-budget", budget_ms, "milliseconds per compose or refine call, 0 for none (env WFC_TIME_BUDGET_MS)")
      ->check(CLI::NonNegativeNumber);

  try {
    if (const char* b = std::getenv("WFC_TIME_BUDGET_MS"); b && *b) budget_ms = std::stol(b);
  } catch (const std::exception&) {
    err << "WFC_TIME_BUDGET_MS must be a number of milliseconds\n";
    return kExitBadInput;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitBadInput;
  }

  const bool structured = format == "json";
  try {
    if (compose_cmd->parsed()) {
      const Registry registry = load_registry(registry_path);
      CompositionProblem problem = problem_from_json(read_document(problem_path));
      if (horizon > 0) problem.horizon = horizon;
      const RankingSpec spec = compose_rank.spec();
      PlannerOptions planner;
      planner.exhaustive = compose_mode == "exhaustive";
      ComposeResult composed = compose(registry, problem, planner);
      const std::size_t plans = composed.plan_count;
      auto ranked = rank(std::move(composed.workflows), registry, spec);
      if (structured) {
        json doc = ranked_document(ranked, spec);
        doc["plan_count"] = plans;
        doc["truncated"] = composed.truncated;
        out << doc.dump(2) << '\n';
      } else {
        out << ranked.size() << " candidates from " << plans << " abstract plans\n";
        print_ranked(out, ranked, limit, spec.method == RankingSpec::Method::weighted);
      }
      return kExitOk;
    }
    if (rank_cmd->parsed()) {
      const Registry registry = load_registry(registry_path);
      const RankingSpec spec = rank_flags.spec();
      auto ranked = rank(candidates_from_json(read_document(candidates_path)), registry, spec);
      if (structured) out << ranked_document(ranked, spec).dump(2) << '\n';
      else print_ranked(out, ranked, limit, spec.method == RankingSpec::Method::weighted);
      return kExitOk;
    }
    if (refine_cmd->parsed()) {
      const Registry registry = load_registry(registry_path);
      const Workflow original = workflow_from_json(read_document(workflow_path));
      const RequestSet requests = requests_from_json(read_document(requests_path));
      const SimilarityEngine engine(registry, similarity_weights(sim_weights));
      RefineOptions options;
      options.mode = similarity_mode_from_string(refine_mode);
      options.horizon = refine_horizon;
      options.max_candidates = max_candidates;
      const RefinementResult result = refine(engine, original, requests, options);
      if (structured) {
        out << refinement_result_to_json(result).dump(2) << '\n';
      } else {
        out << result.candidates.size() << " candidates (" << result.satisfying << " satisfy the requests"
            << (result.truncated ? ", truncated" : "") << "), ranked by " << similarity_mode_name(result.mode)
            << " similarity\n";
        for (std::size_t i = 0; i < result.candidates.size() && i < limit; ++i) {
          const auto& c = result.candidates[i];
          out << '#' << (i + 1) << "  similarity " << fixed(c.score) << "  (node " << fixed(c.similarity.node_level);
          if (result.mode == SimilarityMode::exact)
            out << ", edge " << fixed(c.similarity.edge_level) << ", topo " << fixed(c.similarity.topo_level);
          out << ")  " << qos_text(c.qos) << '\n';
          print_structure(out, c.workflow);
        }
      }
      return kExitOk;
    }
    if (sim_cmd->parsed()) {
      const Registry registry = load_registry(registry_path);
      const SimilarityEngine engine(registry, similarity_weights(sim_weights));
      const auto report = engine.sim_workflows(workflow_from_json(read_document(a_path)), workflow_from_json(read_document(b_path)));
      if (structured) {
        out << similarity_report_to_json(report).dump(2) << '\n';
      } else {
        out << "combined " << fixed(report.combined, 6) << '\n'
            << "  node   " << fixed(report.node_level, 6) << '\n'
            << "  edge   " << fixed(report.edge_level, 6) << '\n'
            << "  topo   " << fixed(report.topo_level, 6) << "  (edit distance " << report.edit.distance
            << (report.edit.exact ? "" : ", greedy bound") << ")\n";
      }
      return kExitOk;
    }
    if (validate_cmd->parsed()) {
      const Registry registry = load_registry(registry_path);
      const auto report = validate_workflow(registry, workflow_from_json(read_document(workflow_path)));
      if (structured) {
        out << validation_to_json(report).dump(2) << '\n';
      } else if (report.ok()) {
        out << "valid\n";
      } else {
        out << report.violations.size() << " violations\n";
        for (const auto& v : report.violations) out << "  " << v.kind << "  " << v.subject << ": " << v.message << '\n';
      }
      return report.ok() ? kExitOk : kExitCheckFailed;
    }
    if (serve_cmd->parsed()) return serve(listen, store_path, budget_ms, out, err);
  } catch (const ContradictionError& e) {
    err << "contradiction: " << e.what() << '\n';
    return kExitContradiction;
  } catch (const NoPlanError& e) {
    err << "no result: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const InstantiationError& e) {
    err << "no result: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const EmptyInputError& e) {
    err << "no result: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const Error& e) {
    // parse, integrity, unknown name, unreadable file, store version
    err << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitBadInput;
}

}  // namespace wfc
