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

#include "stratus/task_monitor.hpp"

#include <algorithm>
#include <array>
#include <mutex>

#include "text.hpp"

namespace stratus {

namespace {

constexpr std::array<std::string_view, kTraceColumns> kColumns = {
    "task_id",  "status",      "exit",     "submit_ms",   "start_ms", "end_ms",
    "duration_ms", "cpu_pct",  "rss_bytes", "rchar_bytes", "wchar_bytes", "syscr",
    "syscw",    "cpu_wait_ms", "pcache_hit", "pcache_miss"};

const std::string& header_string() {
  static const std::string header = [] {
    std::string h;
    for (std::size_t i = 0; i < kColumns.size(); ++i) {
      if (i != 0) {
        h += '\t';
      }
      h += kColumns[i];
    }
    return h;
  }();
  return header;
}

} // namespace

std::string_view trace_header() noexcept { return header_string(); }

std::optional<std::string_view> check_trace_invariants(const TaskTraceRecord& r) {
  if (r.task_id.empty() || r.task_id.find_first_of("\t\n\r") != std::string::npos) {
    return "task_id";
  }
  if (r.status != "succeeded" && r.status != "failed") {
    return "status";
  }
  if ((r.exit_code == 0) != (r.status == "succeeded")) {
    return "exit";
  }
  if (r.start_ms < r.submit_ms) {
    return "start_ms";
  }
  if (r.end_ms < r.start_ms) {
    return "end_ms";
  }
  if (r.duration_ms != r.end_ms - r.start_ms) {
    return "duration_ms";
  }
  return std::nullopt;
}

std::string emit_trace(const TaskTraceRecord& r) {
  std::string out;
  out.reserve(160);
  auto num = [&](auto v) {
    out += '\t';
    out += std::to_string(v);
  };
  out += r.task_id;
  out += '\t';
  out += r.status;
  num(r.exit_code);
  num(r.submit_ms);
  num(r.start_ms);
  num(r.end_ms);
  num(r.duration_ms);
  num(r.cpu_pct);
  num(r.rss_bytes);
  num(r.rchar_bytes);
  num(r.wchar_bytes);
  num(r.syscall_read_count);
  num(r.syscall_write_count);
  num(r.cpu_wait_ms);
  num(r.page_cache_hits);
  num(r.page_cache_misses);
  return out;
}

std::string emit_trace_file(const std::vector<TaskTraceRecord>& records) {
  std::string out(trace_header());
  out += '\n';
  for (const auto& r : records) {
    out += emit_trace(r);
    out += '\n';
  }
  return out;
}

std::vector<TaskTraceRecord> parse_trace(std::string_view input) {
  using Kind = TraceError::Kind;
  std::vector<TaskTraceRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool seen_header = false;
  while (start < input.size()) {
    auto end = input.find('\n', start);
    if (end == std::string_view::npos) {
      end = input.size();
    }
    auto line = input.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    start = end + 1;
    ++line_no;
    if (!seen_header) {
      if (line != trace_header()) {
        throw TraceError(Kind::MissingHeader, line_no, {}, "trace: missing header line");
      }
      seen_header = true;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = text::split(line, '\t');
    if (fields.size() != kTraceColumns) {
      throw TraceError(Kind::FieldCountMismatch, line_no, {},
                       "trace line " + std::to_string(line_no) + ": expected " +
                           std::to_string(kTraceColumns) + " fields, got " +
                           std::to_string(fields.size()));
    }
    auto bad = [&](std::size_t col) {
      return TraceError(Kind::InvariantViolation, line_no, std::string(kColumns[col]),
                        "trace line " + std::to_string(line_no) + ": invalid " +
                            std::string(kColumns[col]));
    };
    auto u64 = [&](std::size_t col) {
      auto v = text::parse_number<std::uint64_t>(fields[col]);
      if (!v) {
        throw bad(col);
      }
      return *v;
    };
    TaskTraceRecord r;
    r.task_id = std::string(fields[0]);
    r.status = std::string(fields[1]);
    auto exit = text::parse_number<std::int32_t>(fields[2]);
    if (!exit) {
      throw bad(2);
    }
    r.exit_code = *exit;
    r.submit_ms = u64(3);
    r.start_ms = u64(4);
    r.end_ms = u64(5);
    r.duration_ms = u64(6);
    r.cpu_pct = u64(7);
    r.rss_bytes = u64(8);
    r.rchar_bytes = u64(9);
    r.wchar_bytes = u64(10);
    r.syscall_read_count = u64(11);
    r.syscall_write_count = u64(12);
    r.cpu_wait_ms = u64(13);
    r.page_cache_hits = u64(14);
    r.page_cache_misses = u64(15);
    if (auto field = check_trace_invariants(r)) {
      auto col = static_cast<std::size_t>(
          std::find(kColumns.begin(), kColumns.end(), *field) - kColumns.begin());
      throw bad(col);
    }
    out.push_back(std::move(r));
  }
  if (!seen_header) {
    throw TraceError(Kind::MissingHeader, 1, {}, "trace: missing header line");
  }
  return out;
}

std::string_view to_string(LogLevel level) noexcept {
  switch (level) {
  case LogLevel::Debug: return "debug";
  case LogLevel::Info: return "info";
  case LogLevel::Warning: return "warning";
  case LogLevel::Error: return "error";
  }
  return "unknown";
}

std::optional<LogLevel> parse_log_level(std::string_view s) noexcept {
  for (auto l : {LogLevel::Debug, LogLevel::Info, LogLevel::Warning, LogLevel::Error}) {
    if (to_string(l) == s) {
      return l;
    }
  }
  return std::nullopt;
}

std::string export_logs(const std::vector<LogEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += std::to_string(e.t_ms);
    out += '\t';
    out += to_string(e.level);
    out += '\t';
    out += e.task_id;
    out += '\t';
    out += e.message;
    out += '\n';
  }
  return out;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
  case Verdict::None: return "none";
  case Verdict::OutOfMemory: return "out_of_memory";
  case Verdict::Timeout: return "timeout";
  case Verdict::NonZeroExit: return "non_zero_exit";
  case Verdict::MachineFailure: return "machine_failure";
  }
  return "unknown";
}

Diagnosis diagnose(const TaskTraceRecord& record, const ResourceRequest& requested,
                   MachineStatus machine_status_at_end) {
  const bool failed = record.exit_code != 0;
  std::vector<std::pair<Verdict, std::string>> signals;
  if (machine_status_at_end == MachineStatus::Unhealthy) {
    signals.emplace_back(Verdict::MachineFailure, "machine unhealthy at task end");
  }
  if (failed && record.rss_bytes > requested.memory_bytes) {
    signals.emplace_back(Verdict::OutOfMemory,
                         "rss " + std::to_string(record.rss_bytes) + " > requested " +
                             std::to_string(requested.memory_bytes));
  }
  if (failed && record.duration_ms >= requested.max_runtime_ms) {
    signals.emplace_back(Verdict::Timeout,
                         "duration " + std::to_string(record.duration_ms) + " >= limit " +
                             std::to_string(requested.max_runtime_ms));
  }
  if (failed) {
    signals.emplace_back(Verdict::NonZeroExit, "exit code " + std::to_string(record.exit_code));
  }

  Diagnosis d;
  d.task_id = record.task_id;
  if (signals.empty()) {
    d.evidence = "exit code 0";
    return d;
  }
  d.verdict = signals.front().first;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (i != 0) {
      d.evidence += "; ";
    }
    d.evidence += signals[i].second;
  }
  return d;
}

Utilization consumed_vs_requested(const TaskTraceRecord& record, const ResourceRequest& requested) {
  Utilization u;
  u.cpu_ratio = (static_cast<double>(record.cpu_pct) / 100.0) /
                static_cast<double>(requested.cpu_cores);
  u.memory_ratio =
      static_cast<double>(record.rss_bytes) / static_cast<double>(requested.memory_bytes);
  u.runtime_ratio =
      static_cast<double>(record.duration_ms) / static_cast<double>(requested.max_runtime_ms);
  return u;
}

// -- store -------------------------------------------------------------------

void TaskMonitor::register_task(const std::string& task_id) {
  std::unique_lock lock(mutex_);
  tasks_.try_emplace(task_id);
}

bool TaskMonitor::knows(std::string_view task_id) const {
  std::shared_lock lock(mutex_);
  return tasks_.find(task_id) != tasks_.end();
}

const TaskMonitor::Slot& TaskMonitor::slot(const std::string& task_id) const {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) {
    throw UnknownTaskId(task_id);
  }
  return it->second;
}

void TaskMonitor::record_trace(TaskTraceRecord record) {
  std::unique_lock lock(mutex_);
  auto it = tasks_.find(record.task_id);
  if (it == tasks_.end()) {
    throw UnknownTaskId(record.task_id);
  }
  if (it->second.trace_index) {
    traces_[*it->second.trace_index] = std::move(record);
  } else {
    it->second.trace_index = traces_.size();
    traces_.push_back(std::move(record));
  }
}

std::optional<TaskTraceRecord> TaskMonitor::trace(std::string_view task_id) const {
  std::shared_lock lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end() || !it->second.trace_index) {
    return std::nullopt;
  }
  return traces_[*it->second.trace_index];
}

std::vector<TaskTraceRecord> TaskMonitor::traces() const {
  std::shared_lock lock(mutex_);
  return traces_;
}

void TaskMonitor::append_log(LogEntry entry) {
  std::unique_lock lock(mutex_);
  auto it = tasks_.find(entry.task_id);
  if (it == tasks_.end()) {
    throw UnknownTaskId(entry.task_id);
  }
  it->second.logs.push_back(std::move(entry));
}

std::vector<LogEntry> TaskMonitor::query_logs(const std::string& task_id, LogLevel min_level) const {
  std::vector<LogEntry> out;
  {
    std::shared_lock lock(mutex_);
    for (const auto& e : slot(task_id).logs) {
      if (e.level >= min_level) {
        out.push_back(e);
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LogEntry& a, const LogEntry& b) { return a.t_ms < b.t_ms; });
  return out;
}

std::vector<LogEntry> TaskMonitor::all_logs() const {
  std::vector<LogEntry> out;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, s] : tasks_) {
      out.insert(out.end(), s.logs.begin(), s.logs.end());
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LogEntry& a, const LogEntry& b) { return a.t_ms < b.t_ms; });
  return out;
}

void TaskMonitor::record_code_part(CodePartProfile part) {
  std::unique_lock lock(mutex_);
  auto it = tasks_.find(part.task_id);
  if (it == tasks_.end()) {
    throw UnknownTaskId(part.task_id);
  }
  it->second.parts.push_back(std::move(part));
}

std::vector<CodePartProfile> TaskMonitor::code_parts(const std::string& task_id) const {
  std::shared_lock lock(mutex_);
  return slot(task_id).parts;
}

} // namespace stratus
