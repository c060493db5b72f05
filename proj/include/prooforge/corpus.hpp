#pragma once

// Bundled semantics and specs, and the generated mini-EVM program corpus.

#include "prooforge/semantics.hpp"

#include <prooforge/bundled_data.hpp>

#include <cstdint>
#include <cstdlib>
#include <random>

namespace prooforge {

/// Text of a bundled file, e.g. "mini-evm.sem" or "mini-evm/add.spec".
inline std::string bundled_text(std::string_view path) {
  for (const auto& f : bundled_data::files)
    if (path == f.path) return f.text;
  throw std::invalid_argument("no bundled file " + std::string(path));
}

inline std::vector<std::string> bundled_paths() {
  std::vector<std::string> out;
  for (const auto& f : bundled_data::files) out.emplace_back(f.path);
  return out;
}

/// Bundled semantics by name: mini-evm or loop-lang.
inline Semantics builtin(std::string_view name) {
  if (name != "mini-evm" && name != "loop-lang") throw std::invalid_argument("unknown semantics " + std::string(name));
  return parse_semantics(bundled_text(std::string(name) + ".sem"));
}

struct BundledSpec {
  std::string semantics;  // builtin name
  std::string path;
  ProgramSpec spec;
};

/// Every bundled spec, parsed against its semantics.
inline std::vector<BundledSpec> bundled_specs() {
  std::vector<BundledSpec> out;
  std::map<std::string, Semantics> cache;
  for (const auto& f : bundled_data::files) {
    std::string path = f.path;
    if (!path.ends_with(".spec")) continue;
    std::string sem_name = path.starts_with("mini-evm/") ? "mini-evm" : "loop-lang";
    auto it = cache.find(sem_name);
    if (it == cache.end()) it = cache.emplace(sem_name, builtin(sem_name)).first;
    out.push_back({sem_name, path, parse_spec(f.text, it->second)});
  }
  return out;
}

inline constexpr std::uint64_t kDefaultSeed = 42;

/// PROOFORGE_SEED when set and numeric, otherwise `fallback`.
inline std::uint64_t corpus_seed(std::uint64_t fallback = kDefaultSeed) {
  const char* env = std::getenv("PROOFORGE_SEED");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (*end) throw std::invalid_argument("PROOFORGE_SEED is not a number: " + std::string(env));
  return v;
}

struct GeneratedProgram {
  std::string name;
  std::vector<std::string> ops;
  std::vector<int> jump_dests;
  long gas = 0;
  /// Ground configuration text, ready for parse_config.
  std::string config;
};

namespace corpus_detail {
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  /// Uniform-ish in [lo, hi]; modulo reduction keeps results identical
  /// across standard libraries.
  long between(long lo, long hi) { return lo + static_cast<long>(g_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(int percent) { return between(0, 99) < percent; }

 private:
  std::mt19937_64 g_;
};

inline std::string config_text(const GeneratedProgram& p) {
  std::string prog;
  for (const auto& op : p.ops) prog += op + " ; ";
  prog += ".Program";
  std::string dests;
  for (int d : p.jump_dests) dests += std::to_string(d) + " : ";
  dests += "nil";
  return "<k> #fetch </k> <wordStack> nil </wordStack> <pc> 0 </pc> <gas> " + std::to_string(p.gas) +
         " </gas> <program> " + prog + " </program> <jumpDests> " + dests + " </jumpDests>";
}

inline GeneratedProgram generate(Rng& rng, std::size_t index) {
  GeneratedProgram p;
  p.name = "prog-" + std::to_string(index);
  // Gas is occasionally too low so that some runs end in the gas guard.
  p.gas = rng.chance(10) ? rng.between(5, 40) : rng.between(200, 2000);
  long depth = 0;
  struct Pending {
    std::size_t push_at;  // index of the PUSH holding the destination
    long depth;           // stack depth on the jumping path
    std::size_t land_at;  // op index where the JUMPDEST goes
  };
  std::vector<Pending> pending;
  const std::size_t length = static_cast<std::size_t>(rng.between(4, 40));
  auto push = [&](long v) {
    p.ops.push_back("PUSH(" + std::to_string(v) + ")");
    ++depth;
  };
  while (p.ops.size() < length || !pending.empty()) {
    // Land pending jumps whose target position has been reached.
    bool landed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->land_at > p.ops.size()) {
        ++it;
        continue;
      }
      const auto addr = static_cast<long>(p.ops.size());
      p.ops[it->push_at] = "PUSH(" + std::to_string(addr) + ")";
      p.jump_dests.push_back(static_cast<int>(addr));
      depth = std::min(depth, it->depth);
      it = pending.erase(it);
      landed = true;
    }
    if (landed) {
      p.ops.push_back("JUMPDEST");
      continue;
    }
    const long pick = rng.between(0, 99);
    if (depth < 2 || pick < 25) {
      push(rng.between(-8, 20));
    } else if (pick < 35) {
      p.ops.push_back("ADD");
      --depth;
    } else if (pick < 43) {
      p.ops.push_back("SUB");
      --depth;
    } else if (pick < 51) {
      p.ops.push_back("LT");
      --depth;
    } else if (pick < 58) {
      p.ops.push_back("ISZERO");
    } else if (pick < 64) {
      p.ops.push_back("POP");
      --depth;
    } else if (pick < 71) {
      p.ops.push_back("DUP1");
      ++depth;
    } else if (pick < 78) {
      p.ops.push_back("SWAP1");
    } else if (pick < 81) {
      p.ops.push_back("JUMPDEST");
    } else if (pick < 95 && pending.size() < 3) {
      // Forward jump: PUSH(dest) then JUMP or JUMPI, landing a few ops later.
      const bool conditional = rng.chance(70);
      const std::size_t push_at = p.ops.size();
      push(0);
      p.ops.push_back(conditional ? "JUMPI" : "JUMP");
      depth -= conditional ? 2 : 1;
      pending.push_back({push_at, depth, p.ops.size() + static_cast<std::size_t>(rng.between(1, 6))});
    } else if (pick < 97) {
      // A jump to an address that is not a JUMPDEST gets stuck on the guard.
      push(static_cast<long>(length) + 100);
      p.ops.push_back("JUMP");
      --depth;
    } else {
      push(rng.between(0, 1));
    }
  }
  p.ops.push_back("STOP");
  std::sort(p.jump_dests.begin(), p.jump_dests.end());
  p.config = config_text(p);
  return p;
}
}  // namespace corpus_detail

/// Deterministic mini-EVM programs: straight-line code with forward
/// JUMP/JUMPI to JUMPDESTs, stack depth never below an opcode's needs on
/// any path, ending in STOP.
inline std::vector<GeneratedProgram> gen_programs(std::uint64_t seed, std::size_t count) {
  if (count == 0) throw std::invalid_argument("gen_programs: count must be positive");
  corpus_detail::Rng rng(seed);
  std::vector<GeneratedProgram> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(corpus_detail::generate(rng, i));
  return out;
}

}  // namespace prooforge
