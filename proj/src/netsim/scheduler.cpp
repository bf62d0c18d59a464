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

#include "echotb/netsim/scheduler.hpp"

#include "echotb/error.hpp"

#include <limits>

namespace echotb::netsim {

TimerHandle Scheduler::at(std::uint64_t t_ms, Task task) {
  auto flag = std::make_shared<bool>(false);
  // Scheduling into the past clamps to now; the clock never runs backwards.
  queue_.push(Event{t_ms < now_ ? now_ : t_ms, next_order_++, std::move(task), flag});
  return TimerHandle(flag);
}

std::size_t Scheduler::drain(std::uint64_t limit) {
  std::size_t ran = 0;
  while (!queue_.empty() && queue_.top().time <= limit) {
    Event ev = queue_.top();
    queue_.pop();
    if (*ev.cancelled) continue;
    if (ran >= budget_) {
      throw Error(Errc::budget_exceeded, "more than " + std::to_string(budget_) + " events without quiescence");
    }
    now_ = ev.time;
    *ev.cancelled = true;  // fired timers are no longer active
    ++ran;
    ++processed_;
    ev.task();
  }
  return ran;
}

std::size_t Scheduler::run_until_idle() { return drain(std::numeric_limits<std::uint64_t>::max()); }

std::size_t Scheduler::run_until(std::uint64_t t_ms) {
  std::size_t ran = drain(t_ms);
  if (t_ms > now_) now_ = t_ms;
  return ran;
}

}  // namespace echotb::netsim
