#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace wfc;
using namespace wfc::testing;

namespace {

const std::vector<std::string> kRunningExampleSteps = {"gene_based_extraction", "names_extraction_tree", "names_resolution",
                                             "taxon_based_ext",       "gene_tree_scaling",     "tree_reconciliation"};

PlannerOptions exhaustive() {
  PlannerOptions o;
  o.exhaustive = true;
  return o;
}

std::vector<AbstractPlan> sorted(std::vector<AbstractPlan> plans) {
  std::sort(plans.begin(), plans.end());
  return plans;
}

const char* kConverterRegistry = R"({
  "formats": ["a", "b", "c", "d", "e"],
  "resource_classes": [{"name": "thing", "parent": null}],
  "service_classes": [
    {"name": "conv", "parent": null, "inputs": [{"port": "in", "class": "thing"}],
     "outputs": [{"port": "out", "class": "thing"}], "description": "convert"},
    {"name": "use", "parent": null, "inputs": [{"port": "x", "class": "thing"}],
     "outputs": [{"port": "y", "class": "thing"}], "description": "use a thing"}
  ],
  "services": [
    {"name": "a2b", "class": "conv", "input_formats": {"in": "a"}, "output_formats": {"out": "b"},
     "qos": {"rt": 1, "tp": 1, "av": 1, "re": 1}, "description": ""},
    {"name": "a2c", "class": "conv", "input_formats": {"in": "a"}, "output_formats": {"out": "c"},
     "qos": {"rt": 1, "tp": 1, "av": 1, "re": 1}, "description": ""},
    {"name": "b2d", "class": "conv", "input_formats": {"in": "b"}, "output_formats": {"out": "d"},
     "qos": {"rt": 1, "tp": 1, "av": 1, "re": 1}, "description": ""},
    {"name": "c2d", "class": "conv", "input_formats": {"in": "c"}, "output_formats": {"out": "d"},
     "qos": {"rt": 1, "tp": 1, "av": 1, "re": 1}, "description": ""},
    {"name": "d2e", "class": "conv", "input_formats": {"in": "d"}, "output_formats": {"out": "e"},
     "qos": {"rt": 1, "tp": 1, "av": 1, "re": 1}, "description": ""},
    {"name": "user", "class": "use", "input_formats": {"x": "d"}, "output_formats": {"y": "d"},
     "qos": {"rt": 1, "tp": 1, "av": 1, "re": 1}, "description": ""}
  ]
})";

}  // namespace

TEST_CASE("executable_bindings only sees resources produced before the step") {
  const auto& r = phylo_registry();
  std::vector<StateResource> state = {{{0, 0}, "gene_names"}};
  const auto& extract = r.service_class("gene_based_extraction");
  CHECK(executable_bindings(r, state, extract, 1) == std::vector<std::vector<ResourceRef>>{{{0, 0}}});
  CHECK(executable_bindings(r, state, r.service_class("names_resolution"), 1).empty());

  state.push_back({{1, 0}, "raw_gene_tree"});
  state.push_back({{2, 0}, "scaled_gene_tree"});
  state.push_back({{3, 0}, "species_tree"});
  const auto& recon = r.service_class("tree_reconciliation");
  // both gene trees are subclasses of gene_tree
  auto at4 = executable_bindings(r, state, recon, 4);
  CHECK(at4 == std::vector<std::vector<ResourceRef>>{{{1, 0}, {3, 0}}, {{2, 0}, {3, 0}}});
  CHECK(executable_bindings(r, state, recon, 3).empty());
  // a class with no inputs is always executable, with one empty choice
  CHECK(executable_bindings(r, state, r.service_class("tree_ext"), 1).size() == 1);
}

TEST_CASE("plannable classes skip converters and port-less classes") {
  auto classes = plannable_classes(phylo_registry());
  CHECK(classes == std::vector<std::string>{"gene_based_extraction", "gene_tree_scaling", "names_extraction_tree",
                                            "names_resolution", "phylogeny_based_ext", "taxon_based_ext",
                                            "tree_reconciliation"});
  CHECK(plannable_classes(phylo_registry(), {"gene_tree_scaling"}).size() == 6);
}

TEST_CASE("goal already in the initial state gives the empty plan") {
  const auto& r = phylo_registry();
  auto p = make_problem({{"gene_names", "set_of_strings"}}, {{"gene_names", "set_of_strings"}}, 3);
  auto plans = compose_abstract(r, p);
  REQUIRE(plans.plans.size() == 1);
  CHECK(plans.plans[0].steps.empty());
  CHECK(plans.plans[0].goal_bindings == std::vector<ResourceRef>{{0, 0}});
  auto result = compose(r, p);
  REQUIRE(result.workflows.size() == 1);
  const auto& w = result.workflows[0];
  CHECK(w.nodes.empty());
  REQUIRE(w.sinks.size() == 1);
  CHECK(w.sinks[0].initial == std::optional<std::size_t>(0));
  CHECK(validate_workflow(r, w).ok());
}

TEST_CASE("shortest plans for the gene names problem") {
  const auto& r = phylo_registry();
  auto plans = compose_abstract(r, gene_names_problem());
  CHECK_FALSE(plans.truncated);
  REQUIRE(plans.plans.size() == 2);
  for (const auto& p : plans.plans) {
    CHECK(p.length() == 5);
    CHECK(replay_plan(r, gene_names_problem(), p) == "");
  }
  CHECK(plans.plans[0].steps[3] == "phylogeny_based_ext");
  CHECK(plans.plans[1].steps[3] == "taxon_based_ext");
}

TEST_CASE("exhaustive search finds the six-step running example") {
  const auto& r = phylo_registry();
  auto problem = gene_names_problem();
  problem.horizon = 6;
  auto plans = compose_abstract(r, problem, exhaustive());
  bool found = std::any_of(plans.plans.begin(), plans.plans.end(), [](const AbstractPlan& p) {
    if (p.steps != kRunningExampleSteps) return false;
    // reconciliation takes the scaled tree
    return std::find(p.bindings.begin(), p.bindings.end(), Binding{6, 0, {5, 0}}) != p.bindings.end();
  });
  CHECK(found);
  CHECK(std::is_sorted(plans.plans.begin(), plans.plans.end(), plan_canonical_less));

  auto result = compose(r, problem, exhaustive());
  auto expected = canonical_key(running_example());
  CHECK(std::any_of(result.workflows.begin(), result.workflows.end(),
                    [&](const Workflow& w) { return canonical_key(w) == expected; }));
  for (const auto& w : result.workflows) {
    auto report = validate_workflow(r, w);
    CHECK_MESSAGE(report.ok(), validation_to_json(report).dump());
  }
}

TEST_CASE("planner matches brute-force enumeration") {
  const auto& r = phylo_registry();
  for (const auto& [name, problem] : small_problems()) {
    CAPTURE(name);
    auto expected = oracle::enumerate_plans(r, problem);
    REQUIRE_FALSE(expected.empty());
    auto got = compose_abstract(r, problem, exhaustive());
    CHECK(sorted(got.plans) == expected);

    std::size_t shortest = expected.front().length();
    for (const auto& p : expected) shortest = std::min(shortest, p.length());
    std::vector<AbstractPlan> minimal;
    for (const auto& p : expected)
      if (p.length() == shortest) minimal.push_back(p);
    CHECK(sorted(compose_abstract(r, problem).plans) == minimal);
  }
}

TEST_CASE("exclusions are honoured by planner and oracle alike") {
  const auto& r = phylo_registry();
  auto problem = small_problems()[0].second;
  std::set<std::string> excluded{"taxon_based_ext"};
  PlannerOptions o = exhaustive();
  o.excluded_classes = excluded;
  auto got = compose_abstract(r, problem, o);
  CHECK(sorted(got.plans) == oracle::enumerate_plans(r, problem, excluded));
  for (const auto& p : got.plans) CHECK(std::count(p.steps.begin(), p.steps.end(), "taxon_based_ext") == 0);
}

TEST_CASE("planning is deterministic") {
  const auto& r = phylo_registry();
  auto problem = gene_names_problem();
  problem.horizon = 6;
  auto a = compose(r, problem, exhaustive());
  auto b = compose(r, problem, exhaustive());
  REQUIRE(a.workflows.size() == b.workflows.size());
  for (std::size_t i = 0; i < a.workflows.size(); ++i)
    CHECK(workflow_to_json(a.workflows[i]).dump() == workflow_to_json(b.workflows[i]).dump());
}

TEST_CASE("no plan and bad problems are distinct errors") {
  const auto& r = phylo_registry();
  auto problem = gene_names_problem();
  problem.horizon = 4;
  CHECK_THROWS_AS(compose_abstract(r, problem), NoPlanError);
  problem.horizon = 0;
  CHECK_THROWS_AS(compose_abstract(r, problem), IntegrityError);
  problem = gene_names_problem();
  problem.goal[0].resource = "unicorn";
  CHECK_THROWS_AS(compose_abstract(r, problem), IntegrityError);
  problem = gene_names_problem();
  problem.initial[0].format = "csv";
  CHECK_THROWS_AS(compose_abstract(r, problem), IntegrityError);
}

TEST_CASE("a deadline in the past truncates instead of failing") {
  PlannerOptions o = exhaustive();
  o.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  auto result = compose_abstract(phylo_registry(), gene_names_problem(), o);
  CHECK(result.truncated);
}

TEST_CASE("instantiation repairs format mismatches with converters") {
  const auto& r = phylo_registry();
  auto problem = gene_names_problem();
  auto plans = compose_abstract(r, problem);
  const auto& taxon = plans.plans[1];
  REQUIRE(taxon.steps[3] == "taxon_based_ext");
  auto ws = instantiate(r, problem, taxon);
  // 2 gene tree services x 2 resolvers x 2 tree services
  CHECK(ws.size() == 8);
  for (const auto& w : ws) {
    CHECK(validate_workflow(r, w).ok());
    auto seq = w.service_sequence();
    auto at = [&](const std::string& s) { return std::find(seq.begin(), seq.end(), s) - seq.begin(); };
    bool gnr = at("Resolved_Names_GNR") < static_cast<long>(seq.size());
    bool phylomatic = at("Get_PhyloTree_Phylomatic_V1") < static_cast<long>(seq.size());
    if (gnr) CHECK(at("convert_taxa_GNR_to_OT") < static_cast<long>(seq.size()));
    if (phylomatic) {
      CHECK(at("convert_taxa_OT_to_Phylomatic") < at("Get_PhyloTree_Phylomatic_V1"));
    }
    std::size_t expected = 5 + (gnr ? 1 : 0) + (phylomatic ? 1 : 0);
    CHECK(w.nodes.size() == expected);
  }
  InstantiateOptions only_ot;
  only_ot.excluded_services = {"Get_PhyloTree_Phylomatic_V1", "Resolved_Names_GNR", "Get_GeneTree_from_Genes_V2"};
  auto one = instantiate(r, problem, taxon, only_ot);
  REQUIRE(one.size() == 1);
  CHECK(one[0].service_sequence() == std::vector<std::string>{"Get_GeneTree_from_Genes", "Ext_Species_from_GeneTree",
                                                              "Resolved_Names_OT", "Get_PhyloTree_OT_V1",
                                                              "Get_ReconciliationTree"});
}

TEST_CASE("a class with a single service leaves no choice") {
  auto r = Registry::load_file(data_path("minimal_registry.json"));
  auto problem = make_problem({{"bio_taxa", "list_of_strings"}}, {{"species_tree", "newickTree"}}, 2);
  auto result = compose(r, problem);
  REQUIRE(result.workflows.size() == 1);
  CHECK(result.workflows[0].service_sequence() == std::vector<std::string>{"get_PhyloTree_OT_V1"});
  CHECK(validate_workflow(r, result.workflows[0]).ok());
}

TEST_CASE("all shortest converter chains are enumerated") {
  auto r = registry_from_string(kConverterRegistry);
  auto problem = make_problem({{"thing", "a"}}, {{"thing", "d"}}, 1);
  AbstractPlan plan;
  plan.steps = {"use"};
  plan.bindings = {{1, 0, {0, 0}}};
  plan.goal_bindings = {{1, 0}};
  auto ws = instantiate(r, problem, plan);
  REQUIRE(ws.size() == 2);
  CHECK(ws[0].service_sequence() == std::vector<std::string>{"a2b", "b2d", "user"});
  CHECK(ws[1].service_sequence() == std::vector<std::string>{"a2c", "c2d", "user"});
  for (const auto& w : ws) CHECK(validate_workflow(r, w).ok());

  // the goal wants e: one more converter after the last step
  problem.goal[0].format = "e";
  ws = instantiate(r, problem, plan);
  REQUIRE(ws.size() == 2);
  CHECK(ws[0].service_sequence().back() == "d2e");

  InstantiateOptions short_chains;
  short_chains.max_converter_chain = 1;
  problem.goal[0].format = "d";
  CHECK_THROWS_AS(instantiate(r, problem, plan, short_chains), InstantiationError);
}

TEST_CASE("validation of the running example and broken variants") {
  const auto& r = phylo_registry();
  auto w = running_example();
  CHECK(validate_workflow(r, w).ok());

  auto kinds = [&](const Workflow& broken) {
    std::set<std::string> out;
    for (const auto& v : validate_workflow(r, broken).violations) out.insert(v.kind);
    return out;
  };

  auto swapped = w;
  for (auto& n : swapped.nodes)
    if (n.service == "Get_PhyloTree_OT_V1") n.service = "Get_PhyloTree_Phylomatic_V1";
  CHECK(kinds(swapped) == std::set<std::string>{"format mismatch"});

  auto unfed = w;
  unfed.edges.erase(unfed.edges.begin());
  CHECK(kinds(unfed).count("unbound input"));

  auto late = w;
  for (auto& n : late.nodes)
    if (n.id == "n1") n.step = 9;
  CHECK(kinds(late).count("timing"));

  auto unknown = w;
  unknown.nodes[0].service = "nope";
  CHECK(kinds(unknown).count("unknown service"));

  auto no_goal = w;
  no_goal.sinks.clear();
  CHECK(kinds(no_goal).count("goal coverage"));

  auto wrong_class = w;
  for (auto& e : wrong_class.edges)
    if (e.dst == "n6" && e.in_port == "species_tree") {
      e.src = "n1";
      e.out_port = "gene_tree";
    }
  CHECK(kinds(wrong_class).count("class mismatch"));

  auto looped = w;
  looped.edges.push_back({"n6", "n1", "reconciliation_tree", "genes"});
  auto k = kinds(looped);
  CHECK(k.count("cycle"));
  CHECK(k.count("timing"));

  auto json = validation_to_json(validate_workflow(r, swapped));
  CHECK(json["valid"] == false);
  CHECK(json["violations"][0]["kind"] == "format mismatch");
}
