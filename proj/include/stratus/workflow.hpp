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

// Workflow layer: DAG specs, instance expansion, run state, reports and run
// history.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "stratus/error.hpp"
#include "stratus/types.hpp"

namespace stratus {

/// A `model <key> k=v...` declaration. Values are interpreted by the
/// simulator, not here.
struct ModelDecl {
  std::string key;
  std::map<std::string, std::string, std::less<>> params;
};

struct TaskDefinition {
  std::string name;
  bool scatter = false;
  ResourceRequest requested;
  std::string model_key = "default";
};

struct Edge {
  std::string from;
  std::string to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct WorkflowSpec {
  std::string workflow_id;
  std::vector<TaskDefinition> tasks;
  std::vector<Edge> edges;
  std::vector<ModelDecl> models;

  const TaskDefinition* find(std::string_view name) const noexcept;
  /// Names of direct predecessors of `name`, in edge order.
  std::vector<std::string> predecessors(std::string_view name) const;
  std::vector<std::string> successors(std::string_view name) const;
};

class WorkflowError : public Error {
public:
  using Error::Error;
};

class CycleError : public WorkflowError {
public:
  explicit CycleError(std::vector<std::string> path);
  /// Closed walk, first == last, e.g. {A, B, C, A}.
  const std::vector<std::string>& path() const noexcept { return path_; }

private:
  std::vector<std::string> path_;
};

class UnknownTask : public WorkflowError {
public:
  explicit UnknownTask(std::string name)
      : WorkflowError("unknown task '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Throws CycleError, UnknownTask for dangling edges, or WorkflowError for
/// duplicate names.
void validate_dag(const WorkflowSpec& spec);

/// Parses a `.wf` file. Syntax errors are ParseError with a line number;
/// the result is validated with validate_dag.
WorkflowSpec parse_workflow(std::string_view text, std::string_view default_id = "wf1");

/// Definition names in a dependency-respecting order.
std::vector<std::string> topological_order(const WorkflowSpec& spec);

std::string export_dot(const WorkflowSpec& spec);

// -- instances ---------------------------------------------------------------

enum class TaskState : std::uint8_t { Pending, Queued, Running, Succeeded, Failed };

std::string_view to_string(TaskState s) noexcept;
std::optional<TaskState> parse_task_state(std::string_view s) noexcept;

class IllegalTransition : public WorkflowError {
public:
  using WorkflowError::WorkflowError;
};

std::string make_task_id(std::string_view workflow_id, std::string_view definition,
                         std::uint32_t index);

struct TaskInstance {
  std::string task_id;
  std::string definition;
  std::uint32_t index = 0;
  TaskState state = TaskState::Pending;
  std::optional<std::string> machine;
  std::optional<SimTime> submit_ms;
  std::optional<SimTime> start_ms;
  std::optional<SimTime> end_ms;

  bool terminal() const noexcept {
    return state == TaskState::Succeeded || state == TaskState::Failed;
  }

  // Lifecycle edges; anything else throws IllegalTransition.
  void enqueue(SimTime t);
  void start(SimTime t, std::string machine_id);
  void finish(SimTime t, bool succeeded);

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

/// One Pending instance per non-scatter definition and `input_count` per
/// scatter definition, in definition order.
std::vector<TaskInstance> expand_instances(const WorkflowSpec& spec, std::uint32_t input_count);

enum class RunState : std::uint8_t { Running, Succeeded, Failed };

std::string_view to_string(RunState s) noexcept;
std::optional<RunState> parse_run_state(std::string_view s) noexcept;

struct RunRecord {
  std::string run_id;
  std::string workflow_id;
  SimTime submission_ms = 0;
  std::vector<TaskInstance> instances;
  RunState final_state = RunState::Running;

  const TaskInstance* find(std::string_view task_id) const noexcept;
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Pending instances whose predecessor instances all Succeeded.
std::set<std::string> ready_tasks(const RunRecord& run, const WorkflowSpec& spec);

/// Pending instances that can never run because a transitive predecessor
/// definition has a Failed instance.
std::set<std::string> blocked_tasks(const RunRecord& run, const WorkflowSpec& spec);

/// Succeeded when every instance succeeded; Failed when something failed
/// and every instance is terminal or blocked; otherwise Running.
RunState settle_run_state(const RunRecord& run, const WorkflowSpec& spec);

struct WorkflowStatus {
  RunState state = RunState::Running;
  std::size_t finished = 0;
  std::size_t total = 0;
  double progress = 1.0;
  std::size_t failures = 0;

  friend bool operator==(const WorkflowStatus&, const WorkflowStatus&) = default;
};

/// An empty run reports progress 1.0.
WorkflowStatus workflow_status(const RunRecord& run);

struct DurationStats {
  std::string definition;
  std::size_t count = 0;
  SimTime min_ms = 0;
  double mean_ms = 0.0;
  SimTime max_ms = 0;
};

struct ExecutionReport {
  std::string run_id;
  std::string workflow_id;
  SimTime submission_ms = 0;
  SimTime makespan_ms = 0;
  RunState final_state = RunState::Running;
  std::vector<DurationStats> per_definition;
  std::size_t total = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

class ReportOnRunningRun : public WorkflowError {
public:
  using WorkflowError::WorkflowError;
};

ExecutionReport execution_report(const RunRecord& run);

std::string render_report(const ExecutionReport& report);

// -- run history -------------------------------------------------------------

struct RunSummary {
  std::string run_id;
  std::string workflow_id;
  SimTime submission_ms = 0;
  RunState final_state = RunState::Running;
  std::optional<SimTime> makespan_ms;
};

class StoreError : public Error {
public:
  using Error::Error;
};

/// Append-only run history, one JSON record per line.
class RunStore {
public:
  explicit RunStore(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }

  /// Appends and fsyncs.
  void append(const RunRecord& run);
  std::vector<RunRecord> load_all() const;
  std::optional<RunRecord> find(std::string_view run_id) const;
  std::size_t size() const;

private:
  std::filesystem::path path_;
};

RunSummary summarize(const RunRecord& run);

/// Runs of `workflow_id`, newest submission first (later appends first on
/// ties).
std::vector<RunSummary> list_previous_executions(const RunStore& store,
                                                 std::string_view workflow_id);

std::string encode_run(const RunRecord& run);
RunRecord decode_run(std::string_view line);

// -- engine ------------------------------------------------------------------

/// Owns live runs and applies lifecycle events. Writers are serialized;
/// readers get copies.
class WorkflowEngine {
public:
  using Observer = std::function<void(const std::string& run_id, SimTime t)>;

  /// Registers a run; an empty `run_id` is generated. Throws WorkflowError
  /// when a run of the same workflow is still live (task ids would clash).
  std::string start_run(std::shared_ptr<const WorkflowSpec> spec, std::uint32_t input_count,
                        SimTime t, std::string run_id = {});

  std::set<std::string> ready(const std::string& run_id) const;
  std::set<std::string> blocked(const std::string& run_id) const;

  void mark_queued(const std::string& task_id, SimTime t);
  void mark_running(const std::string& task_id, SimTime t, const std::string& machine_id);
  void mark_finished(const std::string& task_id, SimTime t, bool succeeded);

  bool has_run(std::string_view run_id) const;
  RunRecord snapshot(std::string_view run_id) const;
  std::shared_ptr<const WorkflowSpec> spec(std::string_view run_id) const;
  std::optional<std::string> run_of_task(std::string_view task_id) const;
  std::vector<std::string> run_ids() const;

  /// Called after each state change, outside the engine lock.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

private:
  struct Run {
    std::shared_ptr<const WorkflowSpec> spec;
    RunRecord record;
    std::map<std::string, std::size_t, std::less<>> index;
  };

  template <class Fn>
  void mutate(const std::string& task_id, SimTime t, Fn&& fn);
  const Run& run(std::string_view run_id) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, Run, std::less<>> runs_;
  std::map<std::string, std::string, std::less<>> task_to_run_;
  std::size_t counter_ = 0;
  Observer observer_;
};

} // namespace stratus
