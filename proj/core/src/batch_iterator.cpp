#include <algorithm>
#include <numeric>

#include "proad/datagen.hpp"
#include "proad/error.hpp"
#include "proad/rng.hpp"

namespace proad {

BatchIterator::BatchIterator(std::size_t num_samples, std::size_t batch_size, std::uint64_t shuffle_seed)
    : num_samples_(num_samples), batch_size_(batch_size), seed_(shuffle_seed) {
  if (num_samples == 0) throw UsageError("batch iterator over an empty sample set");
  if (batch_size == 0) throw UsageError("batch size must be >= 1");
}

std::vector<std::vector<std::size_t>> BatchIterator::epoch(std::size_t epoch_index) const {
  std::vector<std::size_t> order(num_samples_);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed_, {0xba7c, epoch_index}));
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < num_samples_; start += batch_size_) {
    const auto end = std::min(num_samples_, start + batch_size_);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace proad
