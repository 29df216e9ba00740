#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "easeg/core/rng.hpp"

namespace easeg::train {

// Deterministic mixed-batch slice scheduler. Each configured source owns
// an epoch-shuffled index stream seeded independently, so removing or
// emptying one source never perturbs the draws of the others (this is
// what makes the alpha = 1 zero-coefficient equivalence exact). Every
// optimization step takes a fixed share of the batch from each source;
// loss weighting is done by the coefficients of the total loss, never by
// sampling ratios.
class BatchScheduler {
 public:
  struct Source {
    std::string name;
    std::size_t pool_size = 0;
    int share = 0;  // slices per step from this source
  };

  BatchScheduler(std::vector<Source> sources, std::uint64_t seed, long round);

  // One step: per-source list of pool indices (empty for empty pools).
  std::vector<std::vector<std::size_t>> next_step();

  const std::vector<Source>& sources() const { return sources_; }

  // Equal split of the batch among the configured sources; the remainder
  // goes to the earliest sources in their fixed order.
  static std::vector<int> equal_shares(int batch_size, int n_sources);

 private:
  struct Stream {
    Rng rng{0};
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    std::size_t next();
  };

  std::vector<Source> sources_;
  std::vector<Stream> streams_;
};

}  // namespace easeg::train
