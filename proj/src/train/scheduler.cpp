#include "easeg/train/scheduler.hpp"

#include <stdexcept>

namespace easeg::train {

std::size_t BatchScheduler::Stream::next() {
  if (pos >= order.size()) {
    pos = 0;
    rng.shuffle(order);
  }
  return order[pos++];
}

BatchScheduler::BatchScheduler(std::vector<Source> sources, std::uint64_t seed,
                               long round)
    : sources_(std::move(sources)) {
  if (sources_.empty())
    throw std::invalid_argument("batch scheduler: no sources configured");
  bool any = false;
  for (const auto& s : sources_) any = any || s.pool_size > 0;
  if (!any)
    throw std::invalid_argument("batch scheduler: all source pools are empty");
  streams_.resize(sources_.size());
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    auto& st = streams_[i];
    st.rng = Rng(derive_seed(seed, "scheduler/" + sources_[i].name,
                             static_cast<std::uint64_t>(round)));
    st.order.resize(sources_[i].pool_size);
    for (std::size_t j = 0; j < st.order.size(); ++j) st.order[j] = j;
    st.rng.shuffle(st.order);
  }
}

std::vector<std::vector<std::size_t>> BatchScheduler::next_step() {
  std::vector<std::vector<std::size_t>> out(sources_.size());
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (sources_[i].pool_size == 0) continue;
    out[i].reserve(sources_[i].share);
    for (int k = 0; k < sources_[i].share; ++k)
      out[i].push_back(streams_[i].next());
  }
  return out;
}

std::vector<int> BatchScheduler::equal_shares(int batch_size, int n_sources) {
  if (n_sources < 1 || batch_size < n_sources)
    throw std::invalid_argument(
        "batch scheduler: batch size must cover every configured source");
  std::vector<int> shares(n_sources, batch_size / n_sources);
  for (int r = 0; r < batch_size % n_sources; ++r) ++shares[r];
  return shares;
}

}  // namespace easeg::train
