// Command-line front end: parse, check, run, explore, report.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "trumlsl/ltl.hpp"
#include "trumlsl/parser.hpp"
#include "trumlsl/rules.hpp"
#include "trumlsl/scenario.hpp"
#include "trumlsl/simulation.hpp"

namespace {

using namespace trumlsl;

constexpr int kOk = 0;
constexpr int kVerdictFailure = 1;
constexpr int kUsage = 2;

std::string describe(const ExploreRun& r) {
  std::string order;
  for (const auto& c : r.order) order += (order.empty() ? "" : ",") + c.str();
  std::string entries;
  for (const auto& e : r.report.entries) entries += (entries.empty() ? "" : " ") + e.car.str() + "@" + std::to_string(e.step);
  return "order " + order + ": entries [" + entries + "] " + (r.report.ok() ? "ok" : "FAILED");
}

void print_summary(const RunReport& r, std::ostream& out) {
  out << "steps: " << r.trace.size() - 1 << "\n";
  for (const auto& v : r.verdicts) {
    out << v.name << "(" << v.ego << "): " << to_string(v.verdict.kind);
    if (v.verdict.witness) out << " at step " << *v.verdict.witness;
    if (v.grounding_default) out << " [grounding: default]";
    out << "\n";
  }
  if (r.collision)
    out << "collision: " << r.collision->first << " and " << r.collision->second << " on " << r.collision->segment
        << " at step " << r.collision->step << "\n";
  else
    out << "collision: none\n";
  for (const auto& iv : r.invariant_violations) out << "invariant violation: " << iv << "\n";
  if (r.error) out << "aborted at step " << r.error->step << ": " << r.error->message << "\n";
}

int cmd_parse(const std::string& text, bool ltl) {
  if (!ltl) {
    try {
      std::cout << to_string(parse_rule_formula(text, RuleConfig{})) << "\n";
      return kOk;
    } catch (const Error&) {
      // fall through to the temporal syntax
    }
  }
  std::cout << to_string(parse_ltl(text)) << "\n";
  return kOk;
}

int cmd_check(const std::string& path, const std::string& formula, const std::string& ego, std::size_t step,
              std::optional<std::string> back, std::optional<std::string> ahead) {
  Scenario sc = load_scenario(path, ConfigOverrides::from_env());
  if (step > sc.config.steps) throw Error(ErrorCode::IndexOutOfRange, "step beyond the scenario's run length");
  sc.config.steps = step;
  sc.monitors.clear();
  RunReport r = run(sc);
  if (r.trace.size() <= step) throw Error(ErrorCode::InvalidState, "run aborted before step " + std::to_string(step));
  const auto& ts = r.trace[step].snapshot;
  Rational b = back ? parse_rational(*back) : sc.config.back;
  Rational a = ahead ? parse_rational(*ahead) : sc.config.ahead;
  CarId id(ego);
  auto view = build_view(ts, id, b, a);
  bool holds = evaluate(ts, view, standard_valuation(ts, id), parse_rule_formula(formula, sc.config.rules));
  std::cout << (holds ? "true" : "false") << "\n";
  return holds ? kOk : kVerdictFailure;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out) {
  Scenario sc = load_scenario(path, ConfigOverrides::from_env());
  RunReport r = run(sc, seed);
  if (out.empty()) {
    std::cout << r.text();
    print_summary(r, std::cerr);
  } else {
    write_jsonl(r, out);
    print_summary(r, std::cout);
  }
  return r.ok() ? kOk : kVerdictFailure;
}

int cmd_explore(const std::string& path, std::size_t max_orders) {
  Scenario sc = load_scenario(path, ConfigOverrides::from_env());
  auto agg = explore_interleavings(sc, max_orders);
  for (const auto& r : agg.runs) std::cout << describe(r) << "\n";
  std::cout << agg.runs.size() << " order(s) explored\n";
  return agg.all_ok() ? kOk : kVerdictFailure;
}

int cmd_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::string line;
  std::size_t transitions = 0, last_step = 0;
  bool failed = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (!j.contains("type")) {
      ++transitions;
      last_step = j.value("step", std::size_t{0});
      continue;
    }
    std::string type = j["type"];
    if (type == "verdict") {
      std::cout << j["rule"].get<std::string>() << "(" << j["ego"].get<std::string>()
                << "): " << j["verdict"].get<std::string>();
      if (!j["witness"].is_null()) std::cout << " at step " << j["witness"];
      std::cout << "\n";
      failed = failed || j["verdict"] == "fail";
    } else if (type == "collision") {
      std::cout << "collision: " << (j["result"] == "ok" ? "none" : "at step " + j["step"].dump()) << "\n";
      failed = failed || j["result"] != "ok";
    } else {
      std::cout << type << ": " << j.value("message", "") << "\n";
      failed = true;
    }
  }
  std::cout << transitions << " transitions, last step " << last_step << "\n";
  return failed ? kVerdictFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial traffic-rule logic: formulas, controllers, monitors"};
  app.require_subcommand(1);

  std::string text;
  bool ltl = false;
  auto* parse = app.add_subcommand("parse", "Parse a spatial or temporal formula and echo it");
  parse->add_option("text", text, "Formula text")->required();
  parse->add_flag("--ltl", ltl, "Force the temporal syntax");

  std::string scn, formula, ego;
  std::size_t step = 0;
  std::optional<std::string> back, ahead;
  auto* check = app.add_subcommand("check", "Evaluate a formula on one step of a scenario");
  check->add_option("scenario", scn)->required();
  check->add_option("--formula", formula)->required();
  check->add_option("--ego", ego)->required();
  check->add_option("--step", step);
  check->add_option("--back", back);
  check->add_option("--ahead", ahead);

  std::optional<std::uint64_t> seed;
  std::string out;
  auto* runc = app.add_subcommand("run", "Simulate a scenario and write the JSONL trace");
  runc->add_option("scenario", scn)->required();
  runc->add_option("--seed", seed);
  runc->add_option("--out", out);

  std::size_t max_orders = 24;
  auto* explore = app.add_subcommand("explore", "Run every scheduler order of the controlled cars");
  explore->add_option("scenario", scn)->required();
  explore->add_option("--max-orders", max_orders);

  std::string trace_path;
  auto* report = app.add_subcommand("report", "Summarise a JSONL trace");
  report->add_option("trace", trace_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*parse) return cmd_parse(text, ltl);
    if (*check) return cmd_check(scn, formula, ego, step, back, ahead);
    if (*runc) return cmd_run(scn, seed, out);
    if (*explore) return cmd_explore(scn, max_orders);
    if (*report) return cmd_report(trace_path);
  } catch (const ScenarioError& e) {
    for (const auto& i : e.issues()) std::cerr << "error: " << i << "\n";
    return kUsage;
  } catch (const SyntaxError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    bool input = e.code() == ErrorCode::ParseError || e.code() == ErrorCode::SyntaxError ||
                 e.code() == ErrorCode::ValidationError;
    return input ? kUsage : kVerdictFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed trace: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
