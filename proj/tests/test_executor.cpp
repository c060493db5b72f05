#include "prooforge/corpus.hpp"
#include "prooforge/executor.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace prooforge;

namespace {

const Semantics& evm() {
  static const Semantics sem = builtin("mini-evm");
  return sem;
}
const Semantics& loop() {
  static const Semantics sem = builtin("loop-lang");
  return sem;
}

Term evm_config(const std::string& k, const std::string& stack, long gas = 100) {
  return parse_config("<k> " + k + " </k> <wordStack> " + stack + " </wordStack> <pc> 0 </pc> <gas> " +
                          std::to_string(gas) + " </gas> <program> .Program </program> <jumpDests> nil </jumpDests>",
                      evm());
}

CTerm init_of(const Semantics& sem, const std::string& spec_text) { return parse_spec(spec_text, sem).init; }

TEST(StepConcrete, NextOfAdd) {
  auto s = step_concrete(evm(), evm_config("#next(ADD)", "3 : 4 : nil"));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->rule, "next");
  EXPECT_EQ(to_string(s->config.find_cell("k")->body()), "#exec(ADD) ~> #pc(ADD)");
}

TEST(StepConcrete, EmptyKIsStuck) { EXPECT_FALSE(step_concrete(evm(), evm_config(".K", "nil"))); }

TEST(StepConcrete, StackUnderflowIsStuck) { EXPECT_FALSE(step_concrete(evm(), evm_config("#next(ADD)", "3 : nil"))); }

TEST(RunConcrete, AddTakesFiveRewrites) {
  std::ostringstream trace;
  RunResult r = run_concrete(evm(), evm_config("#next(ADD)", "3 : 4 : nil", 100), 100, &trace);
  EXPECT_EQ(r.steps, 5u);
  EXPECT_EQ(r.status, RunStatus::Stuck);
  EXPECT_EQ(r.final, parse_config("<k> .K </k> <wordStack> 7 : nil </wordStack> <pc> 1 </pc> <gas> 97 </gas> "
                                  "<program> .Program </program> <jumpDests> nil </jumpDests>",
                                  evm()));
  std::string text = trace.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "0 next #next");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(RunConcrete, StuckInputTakesNoSteps) {
  Term cfg = evm_config(".K", "nil");
  RunResult r = run_concrete(evm(), cfg, 10);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.final, cfg);
}

TEST(RunConcrete, FuelExhaustionIsDistinct) {
  RunResult r = run_concrete(evm(), evm_config("#next(ADD)", "3 : 4 : nil"), 2);
  EXPECT_EQ(r.status, RunStatus::FuelExhausted);
  EXPECT_EQ(r.steps, 2u);
  EXPECT_THROW(run_concrete(evm(), evm_config(".K", "nil"), 0), std::invalid_argument);
}

TEST(RunConcrete, LoopSumComputesThousand) {
  RunResult r = run_concrete(loop(), parse_config(bundled_text("loop-sum.cfg"), loop()), 1000000);
  EXPECT_EQ(r.status, RunStatus::Stuck);
  EXPECT_EQ(to_string(r.final.find_cell("env")->body()), "bind(x, 1000) ; bind(i, 1000) ; .Env");
  EXPECT_GE(r.steps, 10000u);
}

const char* kSymbolicAdd = R"(
spec sym
init <k> #next(ADD) ~> REST </k> <wordStack> W0 : W1 : WS </wordStack> <gas> G </gas> <pc> PC </pc>
  requires #size(WS) >=Int 0 andBool #size(WS) <=Int 1000 andBool G >=Int 3
final <k> REST </k>
)";

TEST(Execute, SymbolicAddIsFiveDeterministicRewrites) {
  CTerm t = init_of(evm(), kSymbolicAdd);
  StepResult r = execute(evm(), t, 10);
  EXPECT_EQ(r.applied, 5u);
  EXPECT_TRUE(r.branches.empty());
  EXPECT_EQ(r.rules, (std::vector<std::string>{"next", "exec-add", "add", "push", "pc"}));
  EXPECT_EQ(to_string(r.next.config.find_cell("wordStack")->body()), "W0 +Int W1 : WS");
  EXPECT_EQ(to_string(r.next.config.find_cell("gas")->body()), "G -Int 3");
  EXPECT_EQ(to_string(r.next.config.find_cell("pc")->body()), "PC +Int 1");
  EXPECT_EQ(r.next.config.find_cell("k")->body(), Term::var("REST", Sort::k()));
}

TEST(Execute, RespectsBound) {
  StepResult r = execute(evm(), init_of(evm(), kSymbolicAdd), 2);
  EXPECT_EQ(r.applied, 2u);
  EXPECT_THROW(execute(evm(), init_of(evm(), kSymbolicAdd), 0), std::invalid_argument);
}

TEST(Execute, StuckStateAppliesNothing) {
  CTerm t{evm_config(".K", "nil"), Constraint::top()};
  StepResult r = execute(evm(), t, 5);
  EXPECT_EQ(r.applied, 0u);
  EXPECT_TRUE(r.branches.empty());
  EXPECT_EQ(r.next, t);
}

TEST(Execute, UnsatisfiableInputRejected) {
  CTerm t = init_of(evm(), kSymbolicAdd);
  t.constraint = Constraint::bottom();
  EXPECT_THROW(execute(evm(), t, 1), std::invalid_argument);
}

TEST(Execute, LoopConditionBranchesTwoWays) {
  CTerm head = init_of(loop(), R"(
spec head
init <k> while(lt(var(i), lit(1000)), assign(i, plus(var(i), lit(1)))) </k>
     <env> bind(i, I) ; .Env </env>
final <k> .K </k>
)");
  StepResult r = execute(loop(), head, 20);
  // while, if, lt, var, lt-left, lit, lt-right
  EXPECT_EQ(r.applied, 7u);
  ASSERT_EQ(r.branches.size(), 2u);
  Term i = Term::var("I", Sort::integer());
  EXPECT_EQ(r.branches[0].constraint, Constraint::of(Term::app("<Int", {i, Term::integer(1000)}, Sort::boolean())));
  EXPECT_EQ(r.branches[1].constraint, Constraint::of(Term::app(">=Int", {i, Term::integer(1000)}, Sort::boolean())));
  for (const auto& b : r.branches) {
    EXPECT_TRUE(b.subst.empty());
    EXPECT_TRUE(is_sat(r.next.constraint.conj(b.constraint)).sat());
  }
}

TEST(Execute, InfeasibleArmsArePruned) {
  CTerm head = init_of(loop(), R"(
spec head
init <k> while(lt(var(i), lit(1000)), skip) </k> <env> bind(i, I) ; .Env </env>
  requires I <Int 10
final <k> .K </k>
)");
  StepResult r = execute(loop(), head, 9);
  EXPECT_TRUE(r.branches.empty());
  EXPECT_GT(r.applied, 7u);
  EXPECT_EQ(r.rules[7], "if-true");
}

TEST(Execute, CutStopsAtLoopHead) {
  CTerm head = init_of(loop(), R"(
spec head
init <k> while(lt(var(i), lit(3)), assign(i, plus(var(i), lit(1)))) </k> <env> bind(i, 0) ; .Env </env>
final <k> .K </k>
)");
  ExecOptions opt;
  opt.cut = {"while"};
  StepResult r = execute(loop(), head, 1000, opt);
  EXPECT_EQ(k_head(r.next.config), "while");
  EXPECT_EQ(to_string(r.next.config.find_cell("env")->body()), "bind(i, 1) ; .Env");
}

TEST(Implies, ResidualConstraint) {
  Term dotk = Term::bag({Term::cell("k", Term::app(".K", {}, Sort::k()))});
  Term x = Term::var("X", Sort::integer());
  Constraint x3 = Constraint::of(Term::app("==Int", {x, Term::integer(3)}, Sort::boolean()));
  auto a = implies(CTerm{dotk, x3}, CTerm{dotk, Constraint::top()});
  ASSERT_TRUE(a);
  EXPECT_TRUE(a->subst.empty());
  EXPECT_EQ(a->constraint, x3);
}

TEST(Implies, SelfIsIdentity) {
  CTerm t = init_of(evm(), kSymbolicAdd);
  auto a = implies(t, t, evm().normalizer());
  ASSERT_TRUE(a);
  EXPECT_TRUE(a->constraint.is_true());
  EXPECT_EQ(csubst_apply(*a, t, evm().normalizer()), t);
}

TEST(Implies, ConcreteLoopStateIntoAbstraction) {
  auto state = [](const std::string& v, const std::string& req) {
    return init_of(loop(), "spec s\ninit <k> while(lt(var(i), lit(9)), skip) </k> <env> bind(i, " + v +
                               ") ; .Env </env> <funs> .Funs </funs>" + req + "\nfinal <k> .K </k>\n");
  };
  CTerm concrete = state("0", "");
  CTerm abstract = state("I", " requires I >=Int 0");
  auto a = implies(concrete, abstract, loop().normalizer());
  ASSERT_TRUE(a);
  EXPECT_EQ(*a->subst.find("I"), Term::integer(0));
  EXPECT_EQ(csubst_apply(*a, abstract, loop().normalizer()).config, concrete.config);
  EXPECT_FALSE(implies(state("0 -Int 1", ""), abstract, loop().normalizer()));
  EXPECT_FALSE(implies(abstract, concrete, loop().normalizer()));
}

TEST(Implies, RigidVariables) {
  CTerm t1 = init_of(evm(), kSymbolicAdd);
  CTerm t2 = t1;
  std::set<std::string> rigid{"REST"};
  EXPECT_TRUE(implies(t1, t1, evm().normalizer(), {}, &rigid));
  Term other = t1.config.with_cell("k", Term::var("OTHER", Sort::k()));
  t2.config = t1.config.with_cell("k", Term::var("REST", Sort::k()));
  t2.constraint = Constraint::top();
  EXPECT_FALSE(implies(CTerm{other, t1.constraint}, t2, evm().normalizer(), {}, &rigid));
  EXPECT_TRUE(implies(CTerm{other, t1.constraint}, t2, evm().normalizer()));
}

// ---------------------------------------------------------------------------
// Properties.

TEST(Property, SymbolicAgreesWithConcreteOnGroundStates) {
  auto programs = gen_programs(5, 40);
  for (const auto& p : programs) {
    Term cfg = parse_config(p.config, evm());
    for (std::size_t n : {1u, 7u, 40u}) {
      StepResult sym = execute(evm(), CTerm{cfg, Constraint::top()}, n);
      EXPECT_TRUE(sym.branches.empty()) << p.name;
      Term cur = cfg;
      std::size_t m = 0;
      for (; m < n; ++m) {
        auto s = step_concrete(evm(), cur);
        if (!s) break;
        cur = s->config;
      }
      EXPECT_EQ(sym.applied, m) << p.name;
      EXPECT_EQ(sym.next.config, cur) << p.name;
    }
  }
}

TEST(Property, ImpliesRoundTrip) {
  oracle::ConstraintGen gen(99, 3);
  auto norm = evm().normalizer();
  int successes = 0;
  for (int i = 0; i < 200; ++i) {
    // t2: stack X0 : X1 : nil, gas X2, guarded by a random formula.
    std::string stack = "X0 : X1 : nil";
    CTerm t2 = init_of(evm(), "spec p\ninit <k> #next(ADD) </k> <wordStack> " + stack +
                                  " </wordStack> <gas> X2 </gas>\nfinal <k> .K </k>\n");
    t2.constraint = Constraint::of(gen.formula(1));
    // t1: an instance with some variables fixed and its own constraint.
    Subst inst;
    for (int v = 0; v < 3; ++v)
      if (gen.between(0, 1)) inst.set("X" + std::to_string(v), Term::integer(gen.between(-8, 8)));
    CTerm t1{norm(apply_subst(inst, t2.config)), Constraint::of(gen.formula(2))};
    auto a = implies(t1, t2, norm);
    if (!a) continue;
    ++successes;
    CTerm back = csubst_apply(*a, t2, norm);
    EXPECT_EQ(back.config, t1.config);
    EXPECT_TRUE(entails(t1.constraint, back.constraint).yes());
  }
  EXPECT_GT(successes, 10);
}

TEST(Property, BranchArmsPartitionGroundInstances) {
  CTerm t = init_of(evm(), R"(
spec lt
init <k> #next(LT) ~> REST </k> <wordStack> W0 : W1 : WS </wordStack> <gas> G </gas>
  requires #size(WS) >=Int 0 andBool #size(WS) <=Int 5 andBool G >=Int 3
final <k> REST </k>
)");
  StepResult r = execute(evm(), t, 10);
  ASSERT_EQ(r.branches.size(), 2u);
  auto norm = evm().normalizer();
  oracle::for_each_valuation({"W0", "W1"}, -4, 4, [&](const oracle::Valuation& v) {
    Subst s;
    for (auto& [name, val] : v) s.set(name, Term::integer(val));
    int taken = 0;
    for (const auto& b : r.branches) {
      Constraint c = r.next.constraint.conj(b.constraint).substitute(s, norm);
      taken += c.is_true() || (!c.is_false() && is_sat(c).sat());
    }
    EXPECT_EQ(taken, 1);
  });
}

}  // namespace
