#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>

namespace fsorelay::fft {

enum class Direction { forward, backward };

namespace detail {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are ESTIMATE-only so repeated runs produce identical bits.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, Direction dir) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* scratch = fftw_alloc_complex(std::size_t(n) * n);
    fftw_plan plan = fftw_plan_dft_2d(n, n, scratch, scratch, key.second, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized in-place 2-D DFT of an n x n row-major array.
/// forward: sum x e^{-2 pi i k.x / n}; backward: sum X e^{+2 pi i k.x / n}.
inline void transform_2d(std::span<std::complex<double>> data, int n, Direction dir) {
  auto plan = detail::PlanCache::instance().get(n, dir);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace fsorelay::fft
