// Acceptance run: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sys/wait.h>

#include "json.hpp"
#include "support/fixtures.hpp"
#include "support/grid_oracle.hpp"
#include "support/random_snapshots.hpp"
#include "trumlsl/parser.hpp"
#include "trumlsl/rules.hpp"
#include "trumlsl/simulation.hpp"

using namespace trumlsl;
using namespace fixtures;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

bool holds(const TrafficSnapshot& ts, const CarId& ego, Rational back, Rational ahead, const std::string& text) {
  auto v = build_view(ts, ego, back, ahead);
  return evaluate(ts, v, standard_valuation(ts, ego), parse_formula(text));
}

Rational front(const TrafficSnapshot& ts, const CarId& id) {
  const auto& c = ts.car(id);
  return rear_coordinate(ts.net(), c) + c.size;
}

Outcome fig2_regression() {
  Outcome o;
  const auto ts = load("fig2.scn").initial;
  using Set = std::set<Placement>;
  o.require(ts.placements(O("GiveWay")) == Set{{S("0"), R(98)}}, "obj(GiveWay)");
  o.require(ts.placements(O("Stop")) == Set{{S("0"), R(98)}, {S("4"), R(198)}}, "obj(Stop)");
  o.require(ts.placements(O("Ped")) == Set{{S("2"), R(90)}, {S("3"), R(90)}}, "obj(Ped)");
  o.require(!ts.car(C("M")).aut, "aut(M)");
  for (const char* c : {"A", "B", "E"}) o.require(ts.car(C(c)).aut, std::string("aut(") + c + ")");
  const std::pair<const char*, const char*> res[] = {{"A", "4"}, {"B", "2"}, {"E", "0"}, {"M", "5"}};
  for (auto [c, s] : res) o.require(ts.car(C(c)).res == std::set<SegmentId>{S(s)}, std::string("res(") + c + ")");
  o.require(ts.car(C("M")).cres == std::set<SegmentId>{S("c0")}, "cres(M)");
  for (const char* c : {"A", "B", "E"}) o.require(ts.car(C(c)).cres.empty(), std::string("cres(") + c + ")");
  o.require(ts.cars().size() == 4, "car count");
  return o;
}

Outcome worked_formulas() {
  Outcome o;
  const auto ts = load("fig2.scn").initial;
  o.require(holds(ts, C("A"), 0, 43, "re(A) ; free ; om(Stop)"), "re(A) ; free ; om(Stop) on A's view");
  o.require(holds(ts, C("E"), 0, 60, "somewhere(re(E) ; free ; (ru(M) & cs))"), "cyclist formula on E's view");
  auto without = remove(ts, O("Stop"), S("4"), 198);
  o.require(!holds(without, C("A"), 0, 43, "re(A) ; free ; om(Stop)"), "stop sign formula after remove");
  return o;
}

Outcome transition_algebra() {
  Outcome o;
  std::mt19937_64 rng(31337);
  const ObjectKind kind("Ped");
  int checked = 0;
  for (int i = 0; i < 1000 && o.pass; ++i, ++checked) {
    auto ts = random_snapshot(rng);
    std::vector<CarId> ids;
    for (const auto& [id, c] : ts.cars()) ids.push_back(id);
    const CarId& c = ids[rng() % ids.size()];
    o.require(switch_autonomy(switch_autonomy(ts, c), c) == ts, "switch involution");

    const auto& segs = ts.net().segments();
    const SegmentId& sid = std::next(segs.begin(), static_cast<long>(rng() % segs.size()))->first;
    Rational p = random_rational(rng, 0, 1) * ts.net().length(sid);
    auto placed = place(ts, kind, sid, p);
    o.require(place(placed, kind, sid, p) == placed, "place idempotence");
    if (!ts.placements(kind).count({sid, p})) o.require(remove(placed, kind, sid, p) == ts, "place/remove inverse");
    for (const auto& moved : {placed, remove(ts, kind, sid, p), switch_autonomy(ts, c)})
      for (const auto& [id, car] : ts.cars()) {
        const auto& after = moved.car(id);
        o.require(after.pos == car.pos && after.spd == car.spd && after.acc == car.acc && after.res == car.res &&
                      after.cres == car.cres && after.clm == car.clm && after.cclm == car.cclm,
                  "frame property");
      }

    Rational t1 = R(1 + static_cast<std::int64_t>(rng() % 40), 10);
    Rational t2 = R(1 + static_cast<std::int64_t>(rng() % 40), 10);
    o.require(time_transition(time_transition(ts, t1), t2) == time_transition(ts, t1 + t2),
              "time additivity at case " + std::to_string(i));
  }
  o.require(checked == 1000, "stopped early");
  if (o.pass) o.detail = std::to_string(checked) + " snapshots";
  return o;
}

Outcome chop_oracle() {
  Outcome o;
  auto a = oracle::run_agreement(4242, 1000);
  o.require(a.cases >= 1000, "fewer than 1000 cases");
  o.require(a.agree == a.cases, std::to_string(a.cases - a.agree) + " disagreements, first: " + a.first_mismatch);
  const Op needed[] = {Op::Re, Op::Cl, Op::Ru, Op::Om, Op::Free, Op::Cs, Op::Offcs, Op::Len, Op::VarEq,
                       Op::HChop, Op::VStack, Op::Somewhere, Op::Exists};
  for (Op op : needed) o.require(a.ops_seen.count(op), "operator never generated");
  o.detail = o.pass ? std::to_string(a.agree) + "/" + std::to_string(a.cases) + " agree" : o.detail;
  return o;
}

std::string braking_scenario(const Rational& v, const Rational& gap, std::size_t remove_at, std::size_t steps) {
  json ped{{"kind", "Ped"}, {"segment", "a"}, {"pos", to_string(Rational(15) + gap)}};
  json doc{{"network",
            {{"segments",
              {{{"id", "a"}, {"kind", "lane"}, {"length", 400}}, {{"id", "b"}, {"kind", "lane"}, {"length", 400}}}},
             {"edges", json::array({json::array({"a", "b"})})}}},
           {"objects", {"Ped", "Stop", "GiveWay"}},
           {"placements", json::array({ped})},
           {"cars",
            {{{"id", "E"}, {"path", {"a", "b"}}, {"pos", 10}, {"size", 5}, {"speed", to_string(v)}, {"controller", "a170"}}}},
           {"config", {{"d_p", 50}, {"brake_a", 5}, {"dt", "1/10"}, {"ahead", 60}, {"steps", steps}}}};
  ped["step"] = remove_at;
  ped["op"] = "remove";
  doc["events"] = json::array({ped});
  return doc.dump();
}

Outcome braking_safety() {
  Outcome o;
  std::mt19937_64 rng(1700);
  const std::size_t remove_at = 90, steps = 100;
  for (int i = 0; i < 200 && o.pass; ++i) {
    Rational v = random_rational(rng, 1, 20);
    if (v <= 0) v = R(1, 2);
    Rational stop = v * v / 10;  // v^2 / (2 * brake_a)
    Rational gap = stop + R(1, 10) + random_rational(rng, 0, 60);
    std::string tag = " (v=" + to_string(v) + " D=" + to_string(gap) + ")";
    auto report = run(parse_scenario(braking_scenario(v, gap, remove_at, steps), "brake"));
    o.require(!report.error, "run aborted" + tag);
    if (report.error) break;
    Rational ped = R(15) + gap;
    const CarId e("E");
    for (std::size_t k = 0; k <= remove_at; ++k)
      o.require(front(report.trace[k].snapshot, e) < ped, "front reached the pedestrian" + tag);
    o.require(report.trace[remove_at].snapshot.car(e).spd == Rational(0), "not standing at the remove" + tag);
    bool resumed = false;
    for (std::size_t k = remove_at + 1; k <= remove_at + 5; ++k)
      resumed = resumed || report.trace[k].snapshot.car(e).spd > report.trace[k - 1].snapshot.car(e).spd;
    o.require(resumed, "no speed increase within 5 steps of the remove" + tag);
  }
  return o;
}

bool reservations_only_when_safe(const Scenario& sc, const RunReport& report, const CarId& ego) {
  const auto& cfg = sc.config;
  for (std::size_t k = 1; k < report.trace.size(); ++k) {
    const auto& prev = report.trace[k - 1].snapshot;
    if (report.trace[k].snapshot.car(ego).cres.empty() || !prev.car(ego).cres.empty()) continue;
    auto v = build_view(prev, ego, cfg.back, cfg.ahead, true);
    auto nu = standard_valuation(prev, ego);
    if (!evaluate(prev, v, nu, rules::sg_i("ego")) || evaluate(prev, v, nu, rules::exists_pc(term("ego"))))
      return false;
  }
  return true;
}

Outcome rule171() {
  Outcome o;
  const CarId e("E");
  auto sc = load("stop171.scn");
  auto report = run(sc);
  o.require(!report.error, "compliant run aborted");
  o.require(report.verdicts.size() == 1 && report.verdicts[0].verdict.kind == VerdictKind::Pass,
            "compliant run is not a pass");
  o.require(!report.entries.empty(), "compliant car never entered");
  o.require(reservations_only_when_safe(sc, report, e), "reservation without safe gap or with a conflict");

  auto mutant = load("stop171_mutant.scn");
  auto bad = run(mutant);
  o.require(bad.verdicts.size() == 1 && bad.verdicts[0].verdict.kind == VerdictKind::Fail, "mutant is not a fail");
  // The violation is decided where the car first holds the crossing without
  // having stood still before.
  std::optional<std::size_t> first_enter;
  bool stood = false;
  for (std::size_t k = 0; k < bad.trace.size() && !first_enter; ++k) {
    const auto& car = bad.trace[k].snapshot.car(e);
    if (!car.cres.empty()) first_enter = k;
    stood = stood || car.spd == Rational(0);
  }
  o.require(first_enter && !stood, "mutant trace shape");
  if (o.pass && !bad.verdicts.empty()) {
    o.require(bad.verdicts[0].verdict.witness == first_enter, "witness step");
    o.detail = "mutant witness at step " + std::to_string(*first_enter);
  }
  return o;
}

Outcome rule172() {
  Outcome o;
  auto agg = explore_interleavings(load("giveway172.scn"), 24);
  o.require(agg.runs.size() == 2, "expected 2 orders");
  int main_first = 0;
  for (const auto& r : agg.runs) {
    const auto& en = r.report.entries;
    if (en.size() >= 2 && en[0].car == CarId("Mn") && en[0].step < en[1].step) ++main_first;
    o.require(r.report.ok(), "run not ok");
  }
  o.require(main_first == 2, "main-road car first in " + std::to_string(main_first) + "/2 orders");
  if (o.pass) o.detail = "main-road car first in 2/2 orders";
  return o;
}

Outcome collision_freedom() {
  Outcome o;
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(TRUMLSL_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    auto sc = load_scenario(entry.path().string());
    auto report = run(sc);
    std::string name = entry.path().filename().string();
    o.require(!report.error, name + " aborted");
    o.require(report.trace.size() == sc.config.steps + 1, name + " trace length");
    auto v = check_collision_freedom(report.trace);
    o.require(!v, name + " collision at step " + (v ? std::to_string(v->step) : ""));
    ++n;
  }
  o.require(n >= 5, "missing shipped scenarios");
  if (o.pass) o.detail = std::to_string(n) + " scenarios";
  return o;
}

int shell(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  auto dir = std::filesystem::temp_directory_path();
  for (const char* name : {"giveway172.scn", "fig2.scn"}) {
    auto a = dir / "trumlsl_det_a.jsonl", b = dir / "trumlsl_det_b.jsonl";
    std::string base = std::string(TRUMLSL_CLI) + " run " + scenario_path(name) + " --seed 99 --out ";
    int ra = shell(base + a.string() + " >/dev/null 2>&1");
    int rb = shell(base + b.string() + " >/dev/null 2>&1");
    o.require(ra == rb && ra >= 0 && ra <= 1, std::string(name) + " CLI exit codes");
    auto x = slurp(a);
    o.require(!x.empty() && x == slurp(b), std::string(name) + " JSONL differs");
    o.require(x == run(load(name), 99).text(), std::string(name) + " CLI and library traces differ");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria{
      {1, "fig2 snapshot regression", 1, fig2_regression},
      {2, "worked formula verdicts on fig2", 1, worked_formulas},
      {3, "transition algebra over 1000 random snapshots", 30, transition_algebra},
      {4, "chop evaluator vs dense grid oracle", 120, chop_oracle},
      {5, "stop-for-pedestrian braking safety", 30, braking_safety},
      {6, "stop-sign rule compliance and mutant witness", 5, rule171},
      {7, "give-way ordering in every interleaving", 5, rule172},
      {8, "collision freedom of shipped scenarios", 10, collision_freedom},
      {9, "deterministic seeded JSONL", 5, determinism},
  };
  int failed = 0;
  for (const auto& [id, title, budget, check] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs >= budget) {
      o.pass = false;
      o.detail = "over the time budget of " + std::to_string(static_cast<int>(budget)) + " s";
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s (%.2f s)%s%s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), secs,
                o.detail.empty() ? "" : " ", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
