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

// Task layer: trace records written at task exit, application logs,
// per-code-part profiles and fault diagnosis.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "stratus/error.hpp"
#include "stratus/machine.hpp"
#include "stratus/types.hpp"

namespace stratus {

/// One row of a trace file. `cpu_pct` is integer percent of one core
/// (250 = 2.5 cores on average).
struct TaskTraceRecord {
  std::string task_id;
  std::string status; // "succeeded" | "failed"
  std::int32_t exit_code = 0;
  SimTime submit_ms = 0;
  SimTime start_ms = 0;
  SimTime end_ms = 0;
  SimTime duration_ms = 0;
  std::uint64_t cpu_pct = 0;
  std::uint64_t rss_bytes = 0;
  std::uint64_t rchar_bytes = 0;
  std::uint64_t wchar_bytes = 0;
  std::uint64_t syscall_read_count = 0;
  std::uint64_t syscall_write_count = 0;
  std::uint64_t cpu_wait_ms = 0;
  std::uint64_t page_cache_hits = 0;
  std::uint64_t page_cache_misses = 0;

  friend bool operator==(const TaskTraceRecord&, const TaskTraceRecord&) = default;
};

inline constexpr std::size_t kTraceColumns = 16;

/// Tab-separated header line, without the trailing newline.
std::string_view trace_header() noexcept;

/// First violated invariant as a column name, or nullopt.
std::optional<std::string_view> check_trace_invariants(const TaskTraceRecord& r);

/// One line, no trailing newline.
std::string emit_trace(const TaskTraceRecord& record);

/// Header plus one line per record, newline-terminated.
std::string emit_trace_file(const std::vector<TaskTraceRecord>& records);

class TraceError : public Error {
public:
  enum class Kind : std::uint8_t { MissingHeader, FieldCountMismatch, InvariantViolation };

  TraceError(Kind kind, std::size_t line, std::string field, const std::string& what)
      : Error(what), kind_(kind), line_(line), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  /// Offending column for InvariantViolation.
  const std::string& field() const noexcept { return field_; }

private:
  Kind kind_;
  std::size_t line_;
  std::string field_;
};

std::vector<TaskTraceRecord> parse_trace(std::string_view text);

struct CodePartProfile {
  std::string task_id;
  std::string part_name;
  SimTime duration_ms = 0;
  std::uint64_t peak_memory_bytes = 0;
};

enum class LogLevel : std::uint8_t { Debug, Info, Warning, Error };

std::string_view to_string(LogLevel level) noexcept;
std::optional<LogLevel> parse_log_level(std::string_view s) noexcept;

struct LogEntry {
  std::string task_id;
  SimTime t_ms = 0;
  LogLevel level = LogLevel::Info;
  std::string message;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

/// `t_ms<TAB>level<TAB>task_id<TAB>message` per entry.
std::string export_logs(const std::vector<LogEntry>& entries);

enum class Verdict : std::uint8_t { None, OutOfMemory, Timeout, NonZeroExit, MachineFailure };

std::string_view to_string(Verdict v) noexcept;

struct Diagnosis {
  std::string task_id;
  Verdict verdict = Verdict::None;
  std::string evidence;
};

/// First match wins: MachineFailure, OutOfMemory, Timeout, NonZeroExit,
/// None. Other signals that also fired are listed in `evidence`.
Diagnosis diagnose(const TaskTraceRecord& record, const ResourceRequest& requested,
                   MachineStatus machine_status_at_end);

struct Utilization {
  double cpu_ratio = 0.0;
  double memory_ratio = 0.0;
  double runtime_ratio = 0.0;
};

Utilization consumed_vs_requested(const TaskTraceRecord& record, const ResourceRequest& requested);

class UnknownTaskId : public Error {
public:
  explicit UnknownTaskId(const std::string& id) : Error("unknown task '" + id + "'") {}
};

/// Per-task store for trace rows, logs and code-part profiles. Appenders
/// may run concurrently; ordering by t_ms is resolved at query time.
class TaskMonitor {
public:
  void register_task(const std::string& task_id);
  bool knows(std::string_view task_id) const;

  /// Replaces any earlier record for the task.
  void record_trace(TaskTraceRecord record);
  std::optional<TaskTraceRecord> trace(std::string_view task_id) const;
  /// All records in completion order.
  std::vector<TaskTraceRecord> traces() const;

  void append_log(LogEntry entry);
  std::vector<LogEntry> query_logs(const std::string& task_id, LogLevel min_level) const;
  std::vector<LogEntry> all_logs() const;

  void record_code_part(CodePartProfile part);
  std::vector<CodePartProfile> code_parts(const std::string& task_id) const;

private:
  struct Slot {
    std::vector<LogEntry> logs;
    std::vector<CodePartProfile> parts;
    std::optional<std::size_t> trace_index;
  };

  const Slot& slot(const std::string& task_id) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, Slot, std::less<>> tasks_;
  std::vector<TaskTraceRecord> traces_;
};

} // namespace stratus
