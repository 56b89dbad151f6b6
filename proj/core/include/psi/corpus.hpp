#pragma once

#include <cstdint>
#include <vector>

#include "psi/process.hpp"

namespace psi {

struct CorpusBounds {
  std::size_t max_size = 5;
  std::size_t names = 3;   // free names a, b, c, ...
  std::size_t count = 100;
  bool allow_bang = true;
  bool allow_case = true;
  bool allow_sum = true;
  bool allow_assert = true;
  bool allow_res = true;
  // Replicated bodies are a single prefix with a nil continuation, which
  // keeps the reachable state space finite.
  bool finite_bang = true;
  // Only prefix-guarded sums, prefixes, restriction and parallel: the source
  // fragment of the choice encoding.
  bool sums_only = false;
};

// Deterministic for a given seed, bounds and instance. Every element passes
// check_well_formed(p, inst); duplicates up to alpha are dropped. May return
// fewer than `count` processes when the space is small.
std::vector<Proc> corpus_generate(std::uint64_t seed, const CorpusBounds& bounds, const Instance& inst);

// The free names the generator draws from.
std::vector<Name> corpus_names(std::size_t n);

}  // namespace psi
