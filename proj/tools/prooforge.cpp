#include "prooforge/bench.hpp"
#include "prooforge/corpus.hpp"
#include "prooforge/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace prooforge;

namespace {

enum Exit { kOk = 0, kError = 1, kPartial = 2, kFuel = 3 };

// `bundled:NAME` reads a file shipped inside the binary.
std::string read_input(const std::string& path) {
  if (path.starts_with("bundled:")) return bundled_text(path.substr(8));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string with_location(const std::string& path, const std::exception& e) {
  if (auto* pe = dynamic_cast<const ParseError*>(&e)) return path + ":" + pe->what();
  return path + ": " + e.what();
}

Semantics load_semantics(const std::string& path) {
  try {
    return parse_semantics(read_input(path));
  } catch (const MalformedInput& e) {
    throw std::runtime_error(with_location(path, e));
  }
}

AprpGraph load_graph(const std::string& path) {
  try {
    return graph_from_json(Json::parse(read_input(path)));
  } catch (const Json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const MalformedInput& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

struct ProveArgs {
  std::string sem, spec, out, dot;
  std::size_t depth = 1;
  std::size_t iterations = 1000;
  bool precise = false;
};

int cmd_prove(const ProveArgs& a) {
  Semantics sem = load_semantics(a.sem);
  ProgramSpec spec;
  try {
    spec = parse_spec(read_input(a.spec), sem);
  } catch (const MalformedInput& e) {
    throw std::runtime_error(with_location(a.spec, e));
  }
  ProofConfig cfg;
  cfg.n = a.depth;
  cfg.i_max = a.iterations;
  cfg.precise = a.precise;
  AprpGraph g = construct_aprp(sem, spec, cfg);
  write_output(a.out, graph_to_json(g, &sem.sig).dump(1) + "\n");
  if (!a.dot.empty()) write_output(a.dot, graph_to_dot(g, &sem.sig));
  std::size_t pending = 0, stuck = 0;
  for (const auto& [_, v] : g.vertices) {
    pending += v.status == Status::Pending;
    stuck += v.status == Status::Stuck;
  }
  std::cerr << "proof " << g.id << ": " << g.vertices.size() << " vertices, " << g.log.size() << " iterations, "
            << stuck << " stuck, " << pending << " pending" << (g.partial() ? " (partial)" : "") << "\n";
  return g.partial() ? kPartial : kOk;
}

int cmd_compile(const std::vector<std::string>& files, const std::string& out) {
  if (files.size() < 2) throw std::runtime_error("compile needs at least one proof and a semantics file");
  Semantics sem = load_semantics(files.back());
  std::vector<CompiledRule> rules;
  for (std::size_t i = 0; i + 1 < files.size(); ++i) {
    AprpGraph g = load_graph(files[i]);
    auto violations = check_graph(g, sem);
    if (!violations.empty()) {
      for (const auto& v : violations) std::cerr << files[i] << ": " << v << "\n";
      throw std::runtime_error(files[i] + ": proof does not validate");
    }
    TransformReport rep;
    AprpGraph n = normalize(g, sem, {}, &rep);
    auto emitted = emit_rules(n, sem);
    std::cerr << files[i] << ": " << emitted.size() << " rules (" << rep.compressed << " compressions, "
              << rep.step_branch << " step-branch, " << rep.branch_branch << " branch-branch lifts"
              << (rep.budget_exhausted ? ", budget exhausted" : "") << ")\n";
    rules.insert(rules.end(), emitted.begin(), emitted.end());
  }
  write_output(out, to_text(integrate(sem, rules)));
  return kOk;
}

int cmd_run(const std::string& sem_path, const std::string& program, std::size_t fuel, bool trace) {
  Semantics sem = load_semantics(sem_path);
  Term cfg;
  try {
    cfg = parse_config(read_input(program), sem);
  } catch (const MalformedInput& e) {
    throw std::runtime_error(with_location(program, e));
  }
  RunResult r = run_concrete(sem, cfg, fuel, trace ? &std::cerr : nullptr);
  std::cout << Printer(&sem.sig)(r.final, Sort::bag()) << "\n";
  std::cout << "steps " << r.steps << "\n";
  if (r.status == RunStatus::FuelExhausted) {
    std::cerr << "fuel exhausted after " << r.steps << " steps\n";
    return kFuel;
  }
  return kOk;
}

int cmd_check(const std::string& proof, const std::string& sem_path) {
  Semantics sem = load_semantics(sem_path);
  AprpGraph g = load_graph(proof);
  auto violations = check_graph(g, sem);
  for (const auto& v : violations) std::cout << v << "\n";
  if (!violations.empty()) return kError;
  std::cout << "ok: " << g.vertices.size() << " vertices, " << g.steps.size() << " steps, " << g.covers.size()
            << " covers, " << g.branches.size() << " branches" << (g.partial() ? ", partial" : "") << "\n";
  return kOk;
}

struct BenchArgs {
  std::string original, compiled, out;
  std::vector<std::string> programs;
  std::size_t generate = 0;
  std::optional<std::uint64_t> seed;
  BenchOptions opt;
};

int cmd_bench(const BenchArgs& a) {
  Semantics orig = load_semantics(a.original);
  Semantics comp = load_semantics(a.compiled);
  std::vector<BenchCase> cases;
  for (const auto& p : a.programs)
    cases.push_back({std::filesystem::path(p).filename().string(), parse_config(read_input(p), orig)});
  if (a.generate > 0)
    for (auto& p : gen_programs(a.seed ? *a.seed : corpus_seed(), a.generate))
      cases.push_back({p.name, parse_config(p.config, orig)});
  if (cases.empty()) throw std::runtime_error("bench needs --program files or --generate N");
  BenchReport rep = run_bench(orig, comp, cases, a.opt);
  if (!a.out.empty()) write_output(a.out, report_lines(rep));
  for (const auto& r : rep.records)
    if (!r.equivalent) std::cerr << r.name << ": equivalence violation: " << r.detail << "\n";
  std::cout << "tests " << rep.records.size() << ", equivalence failures " << rep.equivalence_failures << "\n";
  if (!rep.summary) return kError;
  const auto& s = *rep.summary;
  std::cout << "mean delta_steps " << s.mean_delta_steps << "\n"
            << "speedup geomean " << s.geomean << ", median " << s.median << ", p90 " << s.p90 << "\n"
            << "wins " << s.wins << ", ties " << s.ties << ", losses " << s.losses << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prooforge: prove, compile and benchmark rewriting semantics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "prooforge 0.1.0");

  ProveArgs pa;
  auto* prove = app.add_subcommand("prove", "Build a reachability proof for a spec");
  prove->add_option("semantics", pa.sem, "Semantics file (.sem)")->required();
  prove->add_option("spec", pa.spec, "Spec file (.spec)")->required();
  prove->add_option("-o,--output", pa.out, "Proof output (JSON); stdout by default");
  prove->add_option("--max-depth", pa.depth, "Rewrites per symbolic execution call")->capture_default_str()
      ->check(CLI::PositiveNumber);
  prove->add_option("--max-iterations", pa.iterations, "Worklist iteration bound")->capture_default_str()
      ->check(CLI::PositiveNumber);
  prove->add_flag("--precise", pa.precise, "Subsume states by implication against ancestors");
  prove->add_option("--emit-dot", pa.dot, "Also write the graph in DOT format");

  std::vector<std::string> compile_files;
  std::string compile_out;
  auto* compile = app.add_subcommand("compile", "Compile proofs into rules added to a semantics");
  compile->add_option("files", compile_files, "PROOF... SEMANTICS")->required()->expected(2, -1);
  compile->add_option("-o,--output", compile_out, "Compiled semantics; stdout by default");

  std::string run_sem, run_prog;
  std::size_t fuel = 1000000;
  bool trace = false;
  auto* run = app.add_subcommand("run", "Run a program concretely");
  run->add_option("semantics", run_sem, "Semantics file")->required();
  run->add_option("program", run_prog, "Ground configuration file")->required();
  run->add_option("--fuel", fuel, "Maximum number of rewrites")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_flag("--trace", trace, "Print one line per rewrite to stderr");

  BenchArgs ba;
  std::uint64_t seed = 0;
  auto* bench = app.add_subcommand("bench", "Compare original and compiled semantics");
  bench->add_option("original", ba.original, "Original semantics")->required();
  bench->add_option("compiled", ba.compiled, "Compiled semantics")->required();
  bench->add_option("--program", ba.programs, "Program configuration file (repeatable)");
  bench->add_option("--generate", ba.generate, "Add N generated mini-EVM programs");
  auto* seed_opt = bench->add_option("--seed", seed, "Corpus seed (default: PROOFORGE_SEED or 42)");
  bench->add_option("--repetitions", ba.opt.repetitions, "Timed runs per program")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--fuel", ba.opt.fuel, "Maximum rewrites per run")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--report", ba.out, "Write line-delimited JSON records here");

  std::string check_proof, check_sem;
  auto* check = app.add_subcommand("check", "Validate a proof graph");
  check->add_option("proof", check_proof, "Proof file (JSON)")->required();
  check->add_option("semantics", check_sem, "Semantics file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }
  try {
    if (*prove) return cmd_prove(pa);
    if (*compile) return cmd_compile(compile_files, compile_out);
    if (*run) return cmd_run(run_sem, run_prog, fuel, trace);
    if (*bench) {
      if (*seed_opt) ba.seed = seed;
      return cmd_bench(ba);
    }
    if (*check) return cmd_check(check_proof, check_sem);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
