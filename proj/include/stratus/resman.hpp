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

#pragma once

// Resource manager layer: task queue, first-fit placement, infrastructure and
// file-system status, and (in workflow-aware topology) workflow ownership.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stratus/blueprint.hpp"
#include "stratus/error.hpp"
#include "stratus/machine.hpp"
#include "stratus/types.hpp"
#include "stratus/workflow.hpp"

namespace stratus {

struct QueueEntry {
  std::string task_id;
  ResourceRequest requested;
  SimTime enqueue_ms = 0;
  /// Only present in workflow-aware topology.
  std::optional<std::string> workflow_id;
};

struct Assignment {
  std::string task_id;
  std::string machine_id;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// What the scheduler sees of one machine.
struct MachineView {
  std::string machine_id;
  MachineStatus status = MachineStatus::Healthy;
  Resources capacity;
  Resources reserved;

  Resources available() const noexcept { return capacity - reserved; }
};

/// Chooses a machine for one queue entry, or nullopt to leave it queued.
/// `machines` is ordered by ascending machine_id and reflects reservations
/// made earlier in the same pass.
class PlacementPolicy {
public:
  virtual ~PlacementPolicy() = default;
  virtual std::optional<std::size_t> place(const QueueEntry& entry,
                                           const std::vector<MachineView>& machines) = 0;
};

/// First Healthy machine whose free resources cover the request.
class FirstFitPolicy final : public PlacementPolicy {
public:
  std::optional<std::size_t> place(const QueueEntry& entry,
                                   const std::vector<MachineView>& machines) override;
};

struct InfrastructureStatus {
  std::size_t machines = 0;
  std::size_t healthy = 0;
  std::size_t maintenance = 0;
  std::size_t unhealthy = 0;
  Resources total_capacity;
  Resources used_capacity;
  std::size_t queue_depth = 0;
  std::size_t running_tasks = 0;

  friend bool operator==(const InfrastructureStatus&, const InfrastructureStatus&) = default;
};

struct FileSystemStatus {
  std::uint64_t total_bytes = 0;
  std::uint64_t used_bytes = 0;
  bool healthy = true;
};

struct RunningWorkflow {
  std::string run_id;
  std::string workflow_id;
  RunState state = RunState::Running;
};

class ResmanError : public Error {
public:
  using Error::Error;
};

class WrongTopology : public ResmanError {
public:
  using ResmanError::ResmanError;
};

class DuplicateTask : public ResmanError {
public:
  explicit DuplicateTask(const std::string& id) : ResmanError("duplicate task '" + id + "'") {}
};

class ResourceManager {
public:
  /// Called from schedule() with the queue and machine views as they were
  /// before the pass, and the assignments made.
  using ScheduleObserver = std::function<void(const std::vector<QueueEntry>& queue,
                                              const std::vector<MachineView>& machines,
                                              const std::vector<Assignment>& made)>;

  ResourceManager(MachineCollector& machines, TopologyMode topology,
                  std::uint64_t fs_total_bytes = 0);

  TopologyMode topology() const noexcept { return topology_; }

  /// Workflow-aware only: the manager owns dependency resolution.
  std::string submit_workflow(std::shared_ptr<const WorkflowSpec> spec, std::uint32_t input_count,
                              SimTime t, std::string run_id = {});
  /// Workflow-aware only: queues every newly ready instance of every live
  /// run, in run-id then task order. Returns the number queued.
  std::size_t enqueue_ready(SimTime t);
  /// The embedded workflow engine (workflow-aware topology).
  WorkflowEngine& engine() noexcept { return engine_; }
  const WorkflowEngine& engine() const noexcept { return engine_; }

  /// Disjoint only: FIFO append of an instance made ready by an external
  /// workflow system.
  void submit_task(QueueEntry entry);

  std::vector<Assignment> schedule(SimTime t);

  /// Frees the reservation of a finished task and accounts its writes to
  /// the shared file system.
  void release(const std::string& task_id, std::uint64_t written_bytes);

  std::vector<QueueEntry> queue() const;
  std::vector<MachineView> machine_views() const;
  std::optional<std::string> placement(const std::string& task_id) const;
  /// Task ids currently holding a reservation on `machine_id`.
  std::vector<std::string> running_on(const std::string& machine_id) const;

  InfrastructureStatus infrastructure_status() const;
  FileSystemStatus filesystem_status() const;
  /// Always empty in disjoint topology.
  std::vector<RunningWorkflow> running_workflows() const;

  void set_policy(std::unique_ptr<PlacementPolicy> policy);
  void set_schedule_observer(ScheduleObserver obs) { observer_ = std::move(obs); }

private:
  struct Reservation {
    std::string machine_id;
    Resources resources;
  };

  void push_entry(QueueEntry entry);
  std::vector<MachineView> views_locked() const;

  MachineCollector& machines_;
  TopologyMode topology_;
  std::uint64_t fs_total_;
  std::uint64_t fs_written_ = 0;

  WorkflowEngine engine_;
  std::unique_ptr<PlacementPolicy> policy_;
  ScheduleObserver observer_;

  mutable std::mutex mutex_;
  std::deque<QueueEntry> queue_;
  std::set<std::string, std::less<>> seen_;
  std::map<std::string, Reservation, std::less<>> reservations_;
};

} // namespace stratus
