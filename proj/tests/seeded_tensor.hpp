#pragma once

#include <cstring>

#include "hypermaps/rng.hpp"
#include "hypermaps/tensor_file.hpp"

namespace testing {

// Deterministic tensor #i of a seeded stream: rank 1 or 3, arbitrary finite float bit patterns.
inline hypermaps::Tensor seeded_tensor(std::uint64_t seed, int i) {
  using namespace hypermaps;
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
  Tensor t;
  if (rng.below(3) == 0) {
    t.dims = {static_cast<std::uint32_t>(1 + rng.below(300))};
  } else {
    t.dims = {static_cast<std::uint32_t>(1 + rng.below(8)), static_cast<std::uint32_t>(1 + rng.below(12)),
              static_cast<std::uint32_t>(1 + rng.below(12))};
  }
  std::size_t n = 1;
  for (auto d : t.dims) n *= d;
  t.values.resize(n);
  for (auto& v : t.values) {
    std::uint32_t bits = static_cast<std::uint32_t>(rng.next());
    if (((bits >> 23) & 0xFF) == 0xFF) bits &= ~(1u << 30);
    std::memcpy(&v, &bits, sizeof v);
  }
  return t;
}

}  // namespace testing
