#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>

namespace rgate {

struct Metrics {
  std::atomic<std::uint64_t> requests_total{0};
  std::atomic<std::uint64_t> candidates_total{0};
  std::atomic<std::uint64_t> judge_calls_total{0};
  std::atomic<std::uint64_t> upstream_errors_total{0};
  std::atomic<std::uint64_t> tokens_completion_total{0};
};

std::string metrics_to_text(const Metrics& metrics);

enum class EndpointRole { reasoner = 0, planner = 1, judge = 2 };
enum class Reachability { unknown, ok, down };

const char* endpoint_role_name(EndpointRole role);
const char* reachability_name(Reachability state);

// Passive view of upstream reachability, updated from call outcomes.
class EndpointHealth {
 public:
  void record(EndpointRole role, bool ok) {
    states_[static_cast<int>(role)].store(ok ? 1 : 2, std::memory_order_relaxed);
  }
  Reachability get(EndpointRole role) const {
    switch (states_[static_cast<int>(role)].load(std::memory_order_relaxed)) {
      case 1:
        return Reachability::ok;
      case 2:
        return Reachability::down;
      default:
        return Reachability::unknown;
    }
  }

 private:
  std::atomic<int> states_[3] = {{0}, {0}, {0}};
};

// Server-wide bound on in-flight upstream calls. Wake order follows the
// condition variable, so admission is only approximately FIFO.
// TODO: switch to a ticketed queue if strict admission order matters.
class CallLimiter {
 public:
  explicit CallLimiter(int max_in_flight) : available_(max_in_flight) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++available_;
    }
    cv_.notify_one();
  }

  class Guard {
   public:
    explicit Guard(CallLimiter* limiter) : limiter_(limiter) {
      if (limiter_) limiter_->acquire();
    }
    ~Guard() {
      if (limiter_) limiter_->release();
    }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    CallLimiter* limiter_;
  };

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

}  // namespace rgate
