#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fpsens/random.hpp"

namespace fpsens {

/// Worker count from FPSENS_WORKERS, else the number of hardware threads.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("FPSENS_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct BatchPlan {
  std::uint64_t seed = 0;
  std::uint64_t n_max = 10000;
  std::uint64_t batch_size = 16;
  unsigned workers = 1;
};

/// Sequential-equivalent driver for Monte Carlo loops.
///
/// Sample j belongs to batch j / batch_size, and every batch draws from its
/// own generator make_stream(seed, batch). Up to `workers` batches are drawn
/// concurrently, then their results are passed to `commit` strictly in sample
/// order; the loop ends as soon as `commit` returns true or n_max samples have
/// been committed. Results therefore do not depend on the worker count, and
/// draws made past the stopping sample are discarded.
///
/// `draw(Rng&, Workspace&) -> Result`, `commit(const Result&) -> bool`.
/// Returns the number of committed samples.
template <class MakeWorkspace, class Draw, class Commit>
std::uint64_t run_batched(const BatchPlan& plan, MakeWorkspace make_workspace, Draw draw,
                          Commit commit) {
  using Workspace = decltype(make_workspace());
  using Result = decltype(draw(std::declval<Rng&>(), std::declval<Workspace&>()));

  const unsigned workers = std::max(1u, plan.workers);
  const std::uint64_t bsize = std::max<std::uint64_t>(1, plan.batch_size);
  std::vector<Workspace> spaces;
  spaces.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) spaces.push_back(make_workspace());
  std::vector<std::vector<Result>> results(workers);

  auto run_one = [&](unsigned w, std::uint64_t batch) {
    results[w].clear();
    const std::uint64_t first = batch * bsize;
    if (first >= plan.n_max) return;
    const std::uint64_t count = std::min(bsize, plan.n_max - first);
    Rng rng = make_stream(plan.seed, batch);
    for (std::uint64_t s = 0; s < count; ++s) results[w].push_back(draw(rng, spaces[w]));
  };

  std::uint64_t committed = 0;
  for (std::uint64_t batch = 0; committed < plan.n_max; batch += workers) {
    if (workers == 1) {
      run_one(0, batch);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            run_one(w, batch + w);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (unsigned w = 0; w < workers; ++w) {
      for (const Result& r : results[w]) {
        ++committed;
        if (commit(r)) return committed;
      }
    }
  }
  return committed;
}

}  // namespace fpsens
