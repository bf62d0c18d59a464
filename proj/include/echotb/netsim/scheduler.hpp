/*
 *    Copyright (c) 2026 The Echo Testbed Authors.
 *    All rights reserved.
 *
 *    Licensed under the Apache License, Version 2.0 (the "License");
 *    you may not use this file except in compliance with the License.
 *    You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0
 *
 *    Unless required by applicable law or agreed to in writing, software
 *    distributed under the License is distributed on an "AS IS" BASIS,
 *    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *    See the License for the specific language governing permissions and
 *    limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <vector>

namespace echotb::netsim {

inline constexpr std::size_t kDefaultEventBudget = 1'000'000;

/// Cancellation handle for a scheduled task. Cancelled tasks are discarded
/// without advancing the clock.
class TimerHandle {
 public:
  TimerHandle() = default;
  void cancel() {
    if (cancelled_) *cancelled_ = true;
  }
  bool active() const { return cancelled_ && !*cancelled_; }

 private:
  friend class Scheduler;
  explicit TimerHandle(std::shared_ptr<bool> flag) : cancelled_(std::move(flag)) {}
  std::shared_ptr<bool> cancelled_;
};

/// Discrete-event core with a virtual millisecond clock. Events at equal
/// times fire in insertion order.
class Scheduler {
 public:
  using Task = std::function<void()>;

  explicit Scheduler(std::size_t budget = kDefaultEventBudget) : budget_(budget) {}
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  std::uint64_t now() const noexcept { return now_; }
  TimerHandle at(std::uint64_t t_ms, Task task);
  TimerHandle after(std::uint64_t delay_ms, Task task) { return at(now_ + delay_ms, std::move(task)); }

  // Runs to quiescence. Throws Error(budget_exceeded) after `budget` events.
  std::size_t run_until_idle();
  // Runs every event with time <= t_ms, then sets the clock to t_ms.
  std::size_t run_until(std::uint64_t t_ms);

  bool idle() const noexcept { return queue_.empty(); }
  std::size_t processed() const noexcept { return processed_; }
  void set_budget(std::size_t budget) noexcept { budget_ = budget; }

 private:
  struct Event {
    std::uint64_t time;
    std::uint64_t order;
    Task task;
    std::shared_ptr<bool> cancelled;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
  };

  std::size_t drain(std::uint64_t limit);

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t next_order_ = 0;
  std::size_t processed_ = 0;
  std::size_t budget_;
};

}  // namespace echotb::netsim
