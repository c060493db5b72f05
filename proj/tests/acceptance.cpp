// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when
// any criterion fails.

#include "prooforge/bench.hpp"
#include "prooforge/compiler.hpp"
#include "prooforge/corpus.hpp"

#include "oracle.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace prooforge;

namespace {

struct Outcome {
  bool pass = true;
  std::size_t problems = 0;
  std::ostringstream note;
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (++problems <= 3) note << (problems > 1 ? "; " : "") << what;
    else if (problems == 4) note << "; ...";
  }
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const Semantics& evm() {
  static const Semantics sem = builtin("mini-evm");
  return sem;
}
const Semantics& loop() {
  static const Semantics sem = builtin("loop-lang");
  return sem;
}

ProofConfig depth(std::size_t n, std::size_t i_max = 1000) {
  ProofConfig c;
  c.n = n;
  c.i_max = i_max;
  return c;
}

std::vector<CompiledRule> compile_spec(const Semantics& sem, const std::string& path, std::size_t n = 1) {
  AprpGraph g = construct_aprp(sem, parse_spec(bundled_text(path), sem), depth(n));
  if (!check_graph(g, sem).empty()) throw std::runtime_error(path + ": proof does not validate");
  return emit_rules(normalize(g, sem), sem);
}

const std::vector<std::string>& opcode_specs() {
  static const std::vector<std::string> paths = [] {
    std::vector<std::string> out;
    for (const auto& b : bundled_specs())
      if (b.semantics == "mini-evm") out.push_back(b.path);
    return out;
  }();
  return paths;
}

const Semantics& compiled_evm() {
  static const Semantics sem = [] {
    std::vector<CompiledRule> all;
    for (const auto& p : opcode_specs())
      for (auto& r : compile_spec(evm(), p)) all.push_back(std::move(r));
    return integrate(evm(), all);
  }();
  return sem;
}

Term opcode_config(const std::string& op, const std::string& stack, const std::string& dests = "nil") {
  return parse_config("<k> #next(" + op + ") </k> <wordStack> " + stack +
                          " </wordStack> <pc> 0 </pc> <gas> 100 </gas> <program> .Program </program> <jumpDests> " +
                          dests + " </jumpDests>",
                      evm());
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  auto rules = compile_spec(evm(), "mini-evm/add.spec");
  o.require(rules.size() == 1, "expected one compiled rule, got " + std::to_string(rules.size()));
  Semantics fast = integrate(evm(), rules);
  Term start = opcode_config("ADD", "3 : 4 : nil");
  RunResult slow = run_concrete(evm(), start, 100), quick = run_concrete(fast, start, 100);
  double d = delta_steps(slow.steps, quick.steps);
  o.require(slow.steps == 5, "original took " + std::to_string(slow.steps) + " rewrites");
  o.require(quick.steps == 1, "compiled took " + std::to_string(quick.steps) + " rewrites");
  o.require(quick.final == slow.final, "final configurations differ");
  o.require(d == 0.8, "delta_steps " + std::to_string(d));
  o.note << (o.pass ? "" : "; ") << "steps " << slow.steps << " -> " << quick.steps << ", delta_steps " << d;
  return o;
}

Outcome criterion2() {
  Outcome o;
  struct Case {
    const char *op, *stack, *dests;
  };
  const Case cases[] = {{"ADD", "3 : 4 : nil", "nil"},     {"SUB", "9 : 4 : nil", "nil"},
                        {"LT", "1 : 2 : nil", "nil"},      {"ISZERO", "0 : nil", "nil"},
                        {"POP", "7 : nil", "nil"},         {"PUSH(5)", "nil", "nil"},
                        {"DUP1", "7 : nil", "nil"},        {"SWAP1", "1 : 2 : nil", "nil"},
                        {"JUMP", "0 : nil", "0 : nil"},    {"JUMPI", "0 : 1 : nil", "0 : nil"},
                        {"JUMPDEST", "nil", "nil"},        {"STOP", "nil", "nil"}};
  o.require(opcode_specs().size() >= 10, "fewer than 10 opcode specs");
  double sum = 0;
  std::size_t n = 0;
  std::ostringstream per;
  for (const auto& c : cases) {
    Term start = opcode_config(c.op, c.stack, c.dests);
    RunResult slow = run_concrete(evm(), start, 100), quick = run_concrete(compiled_evm(), start, 100);
    o.require(slow.final == quick.final, std::string(c.op) + ": final configurations differ");
    double d = delta_steps(slow.steps, quick.steps);
    sum += d;
    ++n;
    per << " " << c.op << "=" << slow.steps << "/" << quick.steps;
  }
  double mean = sum / static_cast<double>(n);
  o.require(mean >= 0.75, "mean delta_steps below 0.75");
  o.note << (o.pass ? "" : "; ") << n << " opcodes, mean delta_steps " << mean << " (steps" << per.str() << ")";
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::vector<BenchCase> cases;
  for (const auto& p : gen_programs(42, 200)) cases.push_back({p.name, parse_config(p.config, evm())});
  BenchOptions opt;
  opt.repetitions = 1;
  opt.fuel = 10000;
  BenchReport r = run_bench(evm(), compiled_evm(), cases, opt);
  for (const auto& rec : r.records)
    if (!rec.equivalent) o.require(false, rec.name + ": " + rec.detail);
  o.require(r.equivalence_failures == 0, std::to_string(r.equivalence_failures) + " equivalence failures");
  o.note << (o.pass ? "" : "; ") << r.records.size() << " programs, " << r.equivalence_failures
         << " equivalence failures";
  if (r.summary) o.note << ", mean delta_steps " << r.summary->mean_delta_steps;
  return o;
}

Outcome criterion4() {
  Outcome o;
  AprpGraph g = construct_aprp(loop(), parse_spec(bundled_text("loop-sum.spec"), loop()), depth(1000));
  o.require(!g.partial(), "loop proof is partial");
  o.require(g.vertices.size() < 50, "loop proof has " + std::to_string(g.vertices.size()) + " vertices");
  o.require(check_graph(g, loop()).empty(), "loop proof does not validate");
  Semantics fast = integrate(loop(), emit_rules(normalize(g, loop()), loop()));
  BenchOptions opt;
  opt.repetitions = 5;
  opt.fuel = 1000000;
  BenchReport r = run_bench(loop(), fast, {{"loop-sum", parse_config(bundled_text("loop-sum.cfg"), loop())}}, opt);
  const BenchRecord& rec = r.records.at(0);
  o.require(rec.equivalent, "compiled run disagrees: " + rec.detail);
  o.require(rec.steps_original >= 10000, "original took only " + std::to_string(rec.steps_original) + " rewrites");
  o.require(rec.steps_compiled <= 2100, "compiled took " + std::to_string(rec.steps_compiled) + " rewrites");
  o.require(rec.delta_steps >= 0.8, "delta_steps below 0.8");
  o.require(rec.speedup >= 3.0, "wall speedup below 3x");
  o.note << (o.pass ? "" : "; ") << g.vertices.size() << " vertices, steps " << rec.steps_original << " -> "
         << rec.steps_compiled << ", delta_steps " << rec.delta_steps << ", speedup " << rec.speedup
         << "x (median of 5)";
  return o;
}

// Random loop-free state machines over two Int cells. Every state either
// steps unconditionally or splits on a threshold of x.
struct RandomMachine {
  std::string sem_text;
  std::size_t states = 0;
};

RandomMachine random_machine(oracle::ConstraintGen& rng) {
  RandomMachine m;
  m.states = static_cast<std::size_t>(rng.between(2, 6));
  auto state = [&](std::size_t i) { return i == m.states ? std::string("done") : "s" + std::to_string(i); };
  auto later = [&](std::size_t i) { return state(static_cast<std::size_t>(rng.between(static_cast<long long>(i) + 1,
                                                                                      static_cast<long long>(m.states)))); };
  auto update = [&]() -> std::string {
    switch (rng.between(0, 3)) {
      case 0:
        return "  <x> X => X +Int " + std::to_string(rng.between(-3, 3)) + " </x>\n";
      case 1:
        return "  <y> Y => Y +Int X </y>\n  <x> X </x>\n";
      case 2:
        return "  <x> X => X -Int Y </x>\n  <y> Y </y>\n";
      default:
        return "";
    }
  };
  std::ostringstream s;
  s << "semantics machine\n";
  for (std::size_t i = 0; i <= m.states; ++i) s << "op " << state(i) << " -> KItem\n";
  s << "configuration <k> K </k> <x> Int </x> <y> Int </y>\n";
  for (std::size_t i = 0; i < m.states; ++i) {
    if (rng.between(0, 1) == 0) {
      s << "rule r" << i << "\n  <k> " << state(i) << " ~> R => " << later(i) << " ~> R </k>\n" << update();
      continue;
    }
    std::string c = std::to_string(rng.between(-4, 4));
    std::string hi = update(), lo = update();
    auto guarded = [&](const std::string& body) {
      return body.find("<x>") == std::string::npos ? body + "  <x> X </x>\n" : body;
    };
    s << "rule r" << i << "a\n  <k> " << state(i) << " ~> R => " << later(i) << " ~> R </k>\n"
      << guarded(hi) << "  requires X >Int " << c << "\n";
    s << "rule r" << i << "b\n  <k> " << state(i) << " ~> R => " << later(i) << " ~> R </k>\n"
      << guarded(lo) << "  requires X <=Int " << c << "\n";
  }
  m.sem_text = s.str();
  return m;
}

struct Walk {
  Term end;
  std::size_t steps = 0;
};

// Follows the unique enabled path of `g` for one ground instance.
std::optional<Walk> walk(const AprpGraph& g, const Subst& ground, const Normalizer& norm) {
  VertexId v = g.root;
  Walk w;
  for (std::size_t guard = 0; guard < 10000; ++guard) {
    if (const StepEdge* s = g.step_from(v)) {
      w.steps += s->n;
      v = s->to;
      continue;
    }
    if (const BranchEdge* b = g.branch_from(v)) {
      std::optional<VertexId> next;
      for (const auto& a : b->arms) {
        Constraint c = g.at(a.to).term.constraint.substitute(ground, norm);
        if (c.is_true()) {
          if (next) return std::nullopt;
          next = a.to;
        } else if (!c.is_false()) {
          return std::nullopt;
        }
      }
      if (!next) return std::nullopt;
      v = *next;
      continue;
    }
    bool moved = false;
    for (const auto& c : g.covers)
      if (c.from == v) {
        v = c.to;
        moved = true;
        break;
      }
    if (moved) continue;
    w.end = norm(apply_subst(ground, g.at(v).term.config));
    return w;
  }
  return std::nullopt;
}

Outcome criterion5() {
  Outcome o;
  oracle::ConstraintGen rng(5);
  std::size_t graphs = 0, instances = 0, transformed = 0, branching = 0, shrunk = 0;
  while (graphs < 100) {
    RandomMachine m = random_machine(rng);
    Semantics sem = parse_semantics(m.sem_text);
    auto norm = sem.normalizer();
    ProgramSpec spec = parse_spec(
        "spec machine\ninit <k> s0 ~> REST </k> <x> X </x> <y> Y </y>\nfinal <k> done ~> REST </k>\nsameloop none\n",
        sem);
    AprpGraph g = construct_aprp(sem, spec, depth(static_cast<std::size_t>(rng.between(1, 3))));
    ++graphs;
    std::string tag = "graph " + std::to_string(graphs);
    if (g.partial() || !check_graph(g, sem).empty()) {
      o.require(false, tag + ": construction is not a valid complete proof");
      continue;
    }
    std::vector<std::pair<std::string, AprpGraph>> variants{
        {"compress", compress_steps(g)},
        {"step-branch", lift_step_branch(g, sem)},
        {"branch-branch", lift_branch_branch(g, sem)},
        {"normalize", normalize(g, sem)}};
    branching += !g.branches.empty();
    shrunk += variants.back().second.vertices.size() < g.vertices.size();
    for (const auto& [name, t] : variants) {
      ++transformed;
      auto v = check_graph(t, sem);
      if (!v.empty()) o.require(false, tag + " " + name + ": " + v[0]);
    }
    for (int k = 0; k < 12; ++k) {
      Subst ground;
      ground.set("X", Term::integer(rng.between(-8, 8)));
      ground.set("Y", Term::integer(rng.between(-8, 8)));
      ground.set("REST", Term::app(".K", {}, Sort::k()));
      RunResult truth = run_concrete(sem, norm(apply_subst(ground, spec.init.config)), 1000);
      ++instances;
      auto base = walk(g, ground, norm);
      if (!base || base->end != truth.final || base->steps != truth.steps) {
        o.require(false, tag + ": proof path disagrees with the interpreter");
        continue;
      }
      for (const auto& [name, t] : variants) {
        auto w = walk(t, ground, norm);
        if (!w || w->end != base->end || w->steps != base->steps)
          o.require(false, tag + " " + name + ": path endpoint or rewrite count changed");
      }
    }
  }
  o.require(branching >= 50 && shrunk >= 50, "random graphs too trivial");
  o.note << (o.pass ? "" : "; ") << graphs << " graphs (" << branching << " branching, " << shrunk
         << " shrunk by normalize), " << transformed << " transformed graphs, " << instances << " ground instances";
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::size_t decided = 0, unknown = 0, disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    oracle::ConstraintGen gen(1000 + static_cast<std::uint64_t>(i), 1 + i % 4);
    Term c1 = Term::app("andBool", {gen.box(), gen.formula(2)}, Sort::boolean());
    Term c2 = gen.formula(2);
    auto r = entails(Constraint::of(c1), Constraint::of(c2));
    if (r.status == Entailment::Unknown) {
      ++unknown;
      continue;
    }
    ++decided;
    if (r.yes() != oracle::brute_entails(c1, c2, gen.vars(), -8, 8)) ++disagreements;
  }
  o.require(disagreements == 0, std::to_string(disagreements) + " entailment disagreements");

  auto norm = evm().normalizer();
  std::size_t successes = 0, round_trip_failures = 0;
  oracle::ConstraintGen gen(77, 3);
  CTerm pattern = parse_spec("spec p\ninit <k> #next(ADD) </k> <wordStack> X0 : X1 : nil </wordStack> <gas> X2 </gas>\n"
                             "final <k> .K </k>\n",
                             evm())
                      .init;
  for (int i = 0; i < 1000; ++i) {
    CTerm t2{pattern.config, Constraint::of(gen.formula(1))};
    Subst inst;
    for (int v = 0; v < 3; ++v)
      if (gen.between(0, 1)) inst.set("X" + std::to_string(v), Term::integer(gen.between(-8, 8)));
    CTerm t1{norm(apply_subst(inst, t2.config)), Constraint::of(gen.formula(2))};
    auto a = implies(t1, t2, norm);
    if (!a) continue;
    ++successes;
    CTerm back = csubst_apply(*a, t2, norm);
    if (back.config != t1.config || !entails(t1.constraint, back.constraint).yes()) ++round_trip_failures;
  }
  o.require(round_trip_failures == 0, std::to_string(round_trip_failures) + " implies round-trip failures");
  o.note << (o.pass ? "" : "; ") << decided << " decided pairs (" << unknown << " unknown), " << successes
         << " implies successes round-tripped";
  return o;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(PROOFORGE_CLI) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome criterion7() {
  Outcome o;
  const std::size_t kI = 1000;
  for (const auto& b : bundled_specs()) {
    const Semantics& sem = b.semantics == "mini-evm" ? evm() : loop();
    AprpGraph g = construct_aprp(sem, b.spec, depth(b.semantics == "mini-evm" ? 1 : 1000, kI));
    o.require(g.log.size() <= kI, b.path + ": iteration log longer than the bound");
    o.require(!g.partial(), b.path + ": construction did not complete");
  }

  AprpGraph partial = construct_aprp(loop(), parse_spec(bundled_text("loop-sum.spec"), loop()), depth(1000, 3));
  o.require(partial.partial(), "I=3 loop proof is complete");
  o.require(partial.log.size() <= 3, "I=3 iteration log has " + std::to_string(partial.log.size()) + " entries");
  o.require(check_graph(partial, loop()).empty(), "I=3 loop proof does not validate");
  AprpGraph n = normalize(partial, loop());
  for (const auto& r : emit_rules(n, loop())) {
    const auto& path = r.rule.provenance.path;
    VertexId from = std::stoul(path.substr(0, path.find('>'))), to = std::stoul(path.substr(path.find('>') + 1));
    bool found = false;
    for (const auto& e : n.steps) found |= e.from == from && e.to == to && e.n == r.rule.provenance.consolidated;
    o.require(found, r.rule.name + " does not come from a proved step edge");
  }
  std::string tmp = "/tmp/prooforge-acceptance-" + std::to_string(::getpid()) + ".json";
  int rc = run_cli("prove bundled:loop-lang.sem bundled:loop-sum.spec --max-depth 1000 --max-iterations 3 -o " + tmp);
  o.require(rc == 2, "prove with I=3 exited " + std::to_string(rc));
  int crc = run_cli("compile " + tmp + " bundled:loop-lang.sem -o /dev/null");
  o.require(crc == 0, "compile of the partial proof exited " + std::to_string(crc));
  std::remove(tmp.c_str());
  o.note << (o.pass ? "" : "; ") << bundled_specs().size() << " specs complete within I=" << kI
         << ", I=3 loop proof exit " << rc;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"ADD consolidation", criterion1},       {"opcode step reduction", criterion2},
      {"equivalence over generated programs", criterion3}, {"loop whole-unit compilation", criterion4},
      {"transformation soundness", criterion5}, {"entailment and implies soundness", criterion6},
      {"construction bounds", criterion7}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.note.str().c_str(), since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
