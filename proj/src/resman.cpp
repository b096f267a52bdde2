// Copyright 2026 The Stratus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stratus/resman.hpp"

#include <algorithm>

namespace stratus {

std::optional<std::size_t> FirstFitPolicy::place(const QueueEntry& entry,
                                                 const std::vector<MachineView>& machines) {
  const auto need = as_resources(entry.requested);
  for (std::size_t i = 0; i < machines.size(); ++i) {
    if (machines[i].status == MachineStatus::Healthy && machines[i].available().covers(need)) {
      return i;
    }
  }
  return std::nullopt;
}

ResourceManager::ResourceManager(MachineCollector& machines, TopologyMode topology,
                                 std::uint64_t fs_total_bytes)
    : machines_(machines), topology_(topology), fs_total_(fs_total_bytes),
      policy_(std::make_unique<FirstFitPolicy>()) {}

std::string ResourceManager::submit_workflow(std::shared_ptr<const WorkflowSpec> spec,
                                             std::uint32_t input_count, SimTime t,
                                             std::string run_id) {
  if (topology_ != TopologyMode::WorkflowAware) {
    throw WrongTopology("submit_workflow requires workflow-aware topology");
  }
  return engine_.start_run(std::move(spec), input_count, t, std::move(run_id));
}

std::size_t ResourceManager::enqueue_ready(SimTime t) {
  if (topology_ != TopologyMode::WorkflowAware) {
    throw WrongTopology("enqueue_ready requires workflow-aware topology");
  }
  std::size_t n = 0;
  for (const auto& run_id : engine_.run_ids()) {
    const auto spec = engine_.spec(run_id);
    const auto record = engine_.snapshot(run_id);
    for (const auto& task_id : engine_.ready(run_id)) {
      const auto* inst = record.find(task_id);
      QueueEntry e;
      e.task_id = task_id;
      e.requested = spec->find(inst->definition)->requested;
      e.enqueue_ms = t;
      e.workflow_id = record.workflow_id;
      push_entry(std::move(e));
      engine_.mark_queued(task_id, t);
      ++n;
    }
  }
  return n;
}

void ResourceManager::submit_task(QueueEntry entry) {
  if (topology_ != TopologyMode::Disjoint) {
    throw WrongTopology("external task submission requires disjoint topology");
  }
  if (entry.workflow_id) {
    throw ResmanError("queue entries carry no workflow id in disjoint topology");
  }
  push_entry(std::move(entry));
}

void ResourceManager::push_entry(QueueEntry entry) {
  std::lock_guard lock(mutex_);
  if (!seen_.insert(entry.task_id).second) {
    throw DuplicateTask(entry.task_id);
  }
  queue_.push_back(std::move(entry));
}

std::vector<MachineView> ResourceManager::views_locked() const {
  std::vector<MachineView> views;
  for (const auto& d : machines_.machines()) {
    MachineView v;
    v.machine_id = d.machine_id;
    v.status = d.status;
    v.capacity = d.capacity;
    views.push_back(std::move(v));
  }
  for (const auto& [task, r] : reservations_) {
    auto it = std::find_if(views.begin(), views.end(),
                           [&](const MachineView& v) { return v.machine_id == r.machine_id; });
    if (it != views.end()) {
      it->reserved += r.resources;
    }
  }
  return views;
}

std::vector<Assignment> ResourceManager::schedule(SimTime /*t*/) {
  std::vector<Assignment> made;
  std::vector<QueueEntry> before_queue;
  std::vector<MachineView> before_views;
  {
    std::lock_guard lock(mutex_);
    auto views = views_locked();
    if (observer_) {
      before_queue.assign(queue_.begin(), queue_.end());
      before_views = views;
    }
    std::deque<QueueEntry> remaining;
    for (auto& entry : queue_) {
      auto slot = policy_->place(entry, views);
      if (!slot) {
        remaining.push_back(std::move(entry));
        continue;
      }
      auto& view = views[*slot];
      const auto need = as_resources(entry.requested);
      view.reserved += need;
      reservations_[entry.task_id] = {view.machine_id, need};
      made.push_back({entry.task_id, view.machine_id});
    }
    queue_ = std::move(remaining);
  }
  if (observer_) {
    observer_(before_queue, before_views, made);
  }
  return made;
}

void ResourceManager::release(const std::string& task_id, std::uint64_t written_bytes) {
  std::lock_guard lock(mutex_);
  if (reservations_.erase(task_id) == 0) {
    throw ResmanError("task '" + task_id + "' holds no reservation");
  }
  fs_written_ += written_bytes;
}

std::vector<QueueEntry> ResourceManager::queue() const {
  std::lock_guard lock(mutex_);
  return {queue_.begin(), queue_.end()};
}

std::vector<MachineView> ResourceManager::machine_views() const {
  std::lock_guard lock(mutex_);
  return views_locked();
}

std::optional<std::string> ResourceManager::placement(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  auto it = reservations_.find(task_id);
  if (it == reservations_.end()) {
    return std::nullopt;
  }
  return it->second.machine_id;
}

std::vector<std::string> ResourceManager::running_on(const std::string& machine_id) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [task, r] : reservations_) {
    if (r.machine_id == machine_id) {
      out.push_back(task);
    }
  }
  return out;
}

InfrastructureStatus ResourceManager::infrastructure_status() const {
  InfrastructureStatus s;
  std::lock_guard lock(mutex_);
  for (const auto& v : views_locked()) {
    ++s.machines;
    switch (v.status) {
    case MachineStatus::Healthy: ++s.healthy; break;
    case MachineStatus::Maintenance: ++s.maintenance; break;
    case MachineStatus::Unhealthy: ++s.unhealthy; break;
    }
    s.total_capacity += v.capacity;
    s.used_capacity += v.reserved;
  }
  s.queue_depth = queue_.size();
  s.running_tasks = reservations_.size();
  return s;
}

FileSystemStatus ResourceManager::filesystem_status() const {
  std::lock_guard lock(mutex_);
  FileSystemStatus fs;
  fs.total_bytes = fs_total_;
  fs.used_bytes = std::min(fs_written_, fs_total_);
  fs.healthy = fs_total_ == 0 || fs_written_ < fs_total_;
  return fs;
}

std::vector<RunningWorkflow> ResourceManager::running_workflows() const {
  std::vector<RunningWorkflow> out;
  if (topology_ == TopologyMode::Disjoint) {
    return out;
  }
  for (const auto& run_id : engine_.run_ids()) {
    const auto r = engine_.snapshot(run_id);
    if (r.final_state == RunState::Running) {
      out.push_back({r.run_id, r.workflow_id, r.final_state});
    }
  }
  return out;
}

void ResourceManager::set_policy(std::unique_ptr<PlacementPolicy> policy) {
  std::lock_guard lock(mutex_);
  policy_ = policy ? std::move(policy) : std::make_unique<FirstFitPolicy>();
}

} // namespace stratus
