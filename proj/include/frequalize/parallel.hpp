#pragma once

#include <cstddef>
#include <functional>

namespace frequalize {

/// Worker count: FREQUALIZE_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(begin, end) over a fixed partition of [0, n) into `chunks`
/// contiguous ranges. The partition depends only on n and chunks, never on the
/// worker count, so per-chunk partial results combine deterministically.
void parallel_chunks(std::size_t n, std::size_t chunks,
                     const std::function<void(std::size_t chunk, std::size_t begin,
                                              std::size_t end)>& body);

/// Element-wise parallel loop; body(i) must only write state owned by i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Neumaier compensated sum, accumulated in call order.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace frequalize
