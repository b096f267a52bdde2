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

// Deterministic discrete-event cluster. Stands in for a real resource
// manager + machines and feeds every monitoring layer.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stratus/blueprint.hpp"
#include "stratus/machine.hpp"
#include "stratus/resman.hpp"
#include "stratus/task_monitor.hpp"
#include "stratus/types.hpp"
#include "stratus/workflow.hpp"

namespace stratus {

/// Generator parameters for synthetic task metrics.
struct TaskModel {
  std::string model_key = "default";
  SimTime base_runtime_ms = 1000;
  double runtime_jitter_pct = 0.0;
  std::uint64_t cpu_pct_mean = 100;
  double rss_fraction_of_request = 0.5;
  std::uint64_t io_read_bytes = 0;
  std::uint64_t io_write_bytes = 0;
  double syscall_rate_per_s = 100.0;
  double cpu_wait_fraction = 0.0;
  double failure_probability = 0.0;
};

class SimulationError : public Error {
public:
  using Error::Error;
};

/// Throws SimulationError when a fraction leaves [0,1] or jitter leaves
/// [0,100].
void validate(const TaskModel& model);

/// Keys: runtime jitter cpu rss read write syscalls wait fail.
TaskModel parse_task_model(const ModelDecl& decl);

/// Independent per-task random stream.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::mt19937_64 engine_;
};

/// Stream for one task, derived from the root seed and the task id so that
/// unrelated cluster changes do not perturb its draws.
RandomStream stream_for(std::uint64_t root_seed, std::string_view task_id);

struct SynthesizedMetrics {
  SimTime runtime_ms = 0;
  std::uint64_t cpu_pct = 0;
  std::uint64_t rss_bytes = 0;
  std::uint64_t rchar_bytes = 0;
  std::uint64_t wchar_bytes = 0;
  std::uint64_t syscall_read_count = 0;
  std::uint64_t syscall_write_count = 0;
  std::uint64_t cpu_wait_ms = 0;
  std::uint64_t page_cache_hits = 0;
  std::uint64_t page_cache_misses = 0;
  bool fails = false;
};

SynthesizedMetrics synthesize_trace(const TaskModel& model, const ResourceRequest& requested,
                                    RandomStream& rng);

enum class FaultKind : std::uint8_t { TaskOOM, TaskNonZeroExit, MachineUnhealthy };

std::string_view to_string(FaultKind k) noexcept;
std::optional<FaultKind> parse_fault_kind(std::string_view s) noexcept;

/// Task faults apply to the target's execution if it starts at or after
/// `at_ms`; machine faults fire at `at_ms`.
struct FaultInjection {
  FaultKind kind = FaultKind::TaskNonZeroExit;
  std::string target;
  SimTime at_ms = 0;
};

class TargetUnknown : public SimulationError {
public:
  explicit TargetUnknown(const std::string& t) : SimulationError("unknown injection target '" + t + "'") {}
};

class InjectionInPast : public SimulationError {
public:
  using SimulationError::SimulationError;
};

class NonQuiescent : public SimulationError {
public:
  using SimulationError::SimulationError;
};

struct Event {
  SimTime t_ms = 0;
  std::string kind;
  std::string subject;
  std::string detail;

  friend bool operator==(const Event&, const Event&) = default;
};

/// `t_ms<TAB>event_kind<TAB>subject<TAB>detail` per event.
std::string format_event_log(const std::vector<Event>& events);
std::vector<Event> parse_event_log(std::string_view text);

struct Scenario {
  WorkflowSpec workflow;
  ClusterConfig cluster;
  std::uint32_t input_count = 1;
  std::uint64_t seed = 0;
  TopologyMode topology = TopologyMode::WorkflowAware;
  std::vector<FaultInjection> injections;
  SimTime sample_interval_ms = MachineCollector::kDefaultCadenceMs;
};

/// Parses a `.scenario` file. `workflow` and `cluster` paths are resolved
/// relative to `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

struct SimulationResult {
  RunRecord run;
  std::vector<Event> events;
  std::vector<TaskTraceRecord> traces;
  std::vector<MachineSample> samples;
  std::vector<LogEntry> logs;
  /// Pending instances that could never run because an ancestor failed.
  std::set<std::string> never_eligible;

  std::string trace_file() const { return emit_trace_file(traces); }
  std::string event_log() const { return format_event_log(events); }
};

/// One simulated execution of a scenario. Single-threaded: one caller
/// drives step()/run(); layer objects may be read concurrently.
class Simulation {
public:
  using StatusObserver =
      std::function<void(const std::string& run_id, SimTime t, const WorkflowStatus& status)>;

  explicit Simulation(Scenario scenario, std::string run_id = "run1");
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Throws TargetUnknown or InjectionInPast.
  void inject(const FaultInjection& injection);

  /// Advances to the next time point. Returns false once the run is
  /// terminal. Throws NonQuiescent when no further progress is possible.
  bool step();
  /// Steps to completion.
  void run();

  bool finished() const noexcept { return finished_.load(); }
  SimTime now() const noexcept { return now_.load(); }
  const std::string& run_id() const noexcept { return run_id_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  std::shared_ptr<const WorkflowSpec> spec() const noexcept { return spec_; }

  MachineCollector& machines() noexcept { return machines_; }
  const MachineCollector& machines() const noexcept { return machines_; }
  ResourceManager& resman() noexcept { return *resman_; }
  const ResourceManager& resman() const noexcept { return *resman_; }
  TaskMonitor& tasks() noexcept { return tasks_; }
  const TaskMonitor& tasks() const noexcept { return tasks_; }
  /// The engine that owns the run: the resource manager's in workflow-aware
  /// topology, the separate workflow system's in disjoint topology.
  WorkflowEngine& workflow_engine() noexcept;
  const WorkflowEngine& workflow_engine() const noexcept;

  const TaskModel& model_for(std::string_view task_definition) const;

  /// Diagnosis of every traced task.
  std::vector<Diagnosis> diagnoses() const;

  /// Called on every run state change (from inside step()).
  void set_status_observer(StatusObserver obs) { status_observer_ = std::move(obs); }

  SimulationResult result() const;
  const std::vector<Event>& events() const noexcept { return events_; }

private:
  struct Pending {
    SimTime t;
    std::uint64_t seq;
    enum class Kind : std::uint8_t { TaskEnd, MachineFault } kind;
    std::string subject;

    bool operator>(const Pending& o) const noexcept {
      return t != o.t ? t > o.t : seq > o.seq;
    }
  };

  struct RunningTask {
    std::string machine_id;
    SimTime submit_ms = 0;
    SimTime start_ms = 0;
    SimTime planned_end_ms = 0;
    std::int32_t exit_code = 0;
    ResourceRequest requested;
    SynthesizedMetrics metrics;
  };

  void start_run();
  void dispatch(SimTime t);
  void start_task(const std::string& task_id, const std::string& machine_id, SimTime t);
  void complete_task(const std::string& task_id, SimTime t, std::optional<std::int32_t> kill_code);
  void fail_machine(const std::string& machine_id, SimTime t);
  void take_samples(SimTime t);
  void log(SimTime t, std::string kind, std::string subject, std::string detail = {});
  void push(SimTime t, Pending::Kind kind, std::string subject);
  bool run_terminal() const;
  void check_quiescence() const;
  const TaskDefinition& definition_of(const std::string& task_id) const;

  Scenario scenario_;
  std::string run_id_;
  std::shared_ptr<const WorkflowSpec> spec_;
  std::map<std::string, TaskModel, std::less<>> models_;
  std::set<std::string, std::less<>> task_ids_;

  MachineCollector machines_;
  std::unique_ptr<ResourceManager> resman_;
  std::unique_ptr<WorkflowEngine> swms_;
  TaskMonitor tasks_;

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::map<std::string, RunningTask, std::less<>> running_;
  std::vector<FaultInjection> task_faults_;
  std::vector<Event> events_;
  SimTime next_sample_ = 0;
  bool started_ = false;
  std::atomic<SimTime> now_{0};
  std::atomic<bool> finished_{false};
  StatusObserver status_observer_;
};

/// Builds a Simulation, applies `injections` on top of the scenario's, runs
/// it to completion and returns the collected outputs.
SimulationResult run_simulation(const Scenario& scenario,
                                const std::vector<FaultInjection>& injections = {},
                                const std::string& run_id = "run1");

} // namespace stratus
