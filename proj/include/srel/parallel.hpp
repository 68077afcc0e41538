#ifndef SREL_PARALLEL_HPP
#define SREL_PARALLEL_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace srel {

// All Monte Carlo loops share one reduction contract: work is split into
// fixed chunks of kReductionChunk items, chunks may run on any worker, and
// per-chunk results are combined sequentially in chunk order. Estimates are
// therefore bit-identical for a given seed regardless of the worker count.
inline constexpr std::int64_t kReductionChunk = 1024;

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index, begin, end) over [0, count) in chunks. fn must only
// write to state owned by its chunk.
inline void parallel_chunks(std::int64_t count, int threads,
                            const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  const std::int64_t num_chunks = (count + kReductionChunk - 1) / kReductionChunk;
  const int workers = static_cast<int>(
      std::min<std::int64_t>(resolve_threads(threads), num_chunks));

  if (workers <= 1) {
    for (std::int64_t c = 0; c < num_chunks; ++c) {
      const std::int64_t b = c * kReductionChunk;
      fn(c, b, std::min(count, b + kReductionChunk));
    }
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};

  auto body = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= num_chunks || failed.load()) return;
      const std::int64_t b = c * kReductionChunk;
      try {
        fn(c, b, std::min(count, b + kReductionChunk));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

// Mean and standard error of per-item values produced by a chunked run.
// Each chunk keeps Welford (count, mean, M2) state; chunks are merged in
// chunk order, so the result does not depend on worker scheduling and a
// constant input yields exactly zero variance.
struct MeanAccumulator {
  explicit MeanAccumulator(std::int64_t count)
      : counts((count + kReductionChunk - 1) / kReductionChunk, 0),
        means(counts.size(), 0.0),
        m2s(counts.size(), 0.0),
        n(count) {}

  void add(std::int64_t chunk, double v) {
    const std::size_t c = static_cast<std::size_t>(chunk);
    counts[c] += 1;
    const double d = v - means[c];
    means[c] += d / static_cast<double>(counts[c]);
    m2s[c] += d * (v - means[c]);
  }

  void merged(double& mean_out, double& m2_out) const {
    std::int64_t cnt = 0;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) continue;
      const double delta = means[c] - mean;
      const std::int64_t total = cnt + counts[c];
      m2 += m2s[c] + delta * delta * static_cast<double>(cnt) *
                         static_cast<double>(counts[c]) / static_cast<double>(total);
      mean += delta * static_cast<double>(counts[c]) / static_cast<double>(total);
      cnt = total;
    }
    mean_out = mean;
    m2_out = m2;
  }

  double mean() const {
    double m, m2;
    merged(m, m2);
    return m;
  }

  // Standard error of the mean.
  double stderr_of_mean() const {
    if (n < 2) return 0.0;
    double m, m2;
    merged(m, m2);
    const double var = m2 / static_cast<double>(n - 1);
    return var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
  }

  std::vector<std::int64_t> counts;
  std::vector<double> means;
  std::vector<double> m2s;
  std::int64_t n;
};

}  // namespace srel

#endif
