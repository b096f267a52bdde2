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

// Fixture access, random input generators and reference implementations
// used to cross-check the library. Oracles here only read event logs and
// plain specs; they never call the scheduling or readiness code under test.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stratus/query_service.hpp"
#include "stratus/resman.hpp"
#include "stratus/simulator.hpp"
#include "stratus/workflow.hpp"

namespace testsupport {

inline std::filesystem::path fixture(std::string_view name) {
  return std::filesystem::path(STRATUS_FIXTURE_DIR) / name;
}

inline stratus::Scenario fixture_scenario(std::string_view name) {
  return stratus::load_scenario(fixture(name));
}

inline constexpr std::uint64_t kGiB = 1ull << 30;

class Rng {
public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(g_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(g_); }
  std::string word(std::size_t max_len) {
    static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz0123456789_-/.";
    std::string s(between(1, max_len), 'a');
    for (auto& c : s) {
      c = alphabet[between(0, alphabet.size() - 1)];
    }
    return s;
  }
  std::mt19937_64& engine() { return g_; }

private:
  std::mt19937_64 g_;
};

/// A valid record with every field drawn at random.
inline stratus::TaskTraceRecord random_trace(Rng& rng) {
  stratus::TaskTraceRecord r;
  r.task_id = rng.word(24);
  const bool ok = rng.chance(0.7);
  r.status = ok ? "succeeded" : "failed";
  r.exit_code = ok ? 0 : static_cast<std::int32_t>(rng.between(1, 255)) * (rng.chance(0.1) ? -1 : 1);
  r.submit_ms = rng.between(0, 1ull << 40);
  r.start_ms = r.submit_ms + rng.between(0, 1ull << 20);
  r.end_ms = r.start_ms + rng.between(0, 1ull << 30);
  r.duration_ms = r.end_ms - r.start_ms;
  r.cpu_pct = rng.between(0, 6400);
  r.rss_bytes = rng.between(0, ~0ull);
  r.rchar_bytes = rng.between(0, ~0ull);
  r.wchar_bytes = rng.between(0, ~0ull);
  r.syscall_read_count = rng.between(0, 1ull << 32);
  r.syscall_write_count = rng.between(0, 1ull << 32);
  r.cpu_wait_ms = rng.between(0, r.duration_ms);
  r.page_cache_hits = rng.between(0, 1ull << 36);
  r.page_cache_misses = rng.between(0, 1ull << 36);
  return r;
}

/// Random DAG over tasks t0..t{n-1}; edges only go from lower to higher index.
inline stratus::WorkflowSpec random_dag(Rng& rng, std::size_t n, double edge_p,
                                        std::uint64_t max_cpus = 4) {
  stratus::WorkflowSpec spec;
  spec.workflow_id = "rnd";
  stratus::ModelDecl model{"m", {{"runtime", std::to_string(rng.between(200, 3000))},
                                 {"jitter", std::to_string(rng.between(0, 40))},
                                 {"rss", "0.5"},
                                 {"write", std::to_string(rng.between(0, 1u << 20))}}};
  spec.models.push_back(model);
  for (std::size_t i = 0; i < n; ++i) {
    stratus::TaskDefinition d;
    d.name = "t" + std::to_string(i);
    d.scatter = rng.chance(0.5);
    d.requested.cpu_cores = static_cast<std::uint32_t>(rng.between(1, max_cpus));
    d.requested.memory_bytes = rng.between(1, 8) * kGiB;
    d.requested.disk_bytes = rng.between(0, 4) * kGiB;
    d.requested.max_runtime_ms = 100000;
    d.model_key = rng.chance(0.7) ? "m" : "default";
    spec.tasks.push_back(d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.chance(edge_p)) {
        spec.edges.push_back({spec.tasks[i].name, spec.tasks[j].name});
      }
    }
  }
  return spec;
}

inline stratus::ClusterConfig random_cluster(Rng& rng, std::size_t n) {
  stratus::ClusterConfig c;
  c.fs_total_bytes = 1ull << 40;
  for (std::size_t i = 0; i < n; ++i) {
    stratus::MachineDescriptor d;
    d.machine_id = "m" + std::to_string(100 + i);
    d.machine_type = rng.chance(0.5) ? stratus::MachineType::BareMetal
                                     : stratus::MachineType::VirtualMachine;
    d.hardware.cpu_architecture = "x86_64";
    d.hardware.cpu_model = "generic";
    d.hardware.memory_clock_mhz = 2400;
    d.hardware.disk_partitions = {{"root", 64 * kGiB}};
    d.capacity = {static_cast<std::uint32_t>(rng.between(4, 16)), rng.between(8, 32) * kGiB,
                  64 * kGiB};
    c.machines.push_back(d);
  }
  return c;
}

// -- event log helpers -------------------------------------------------------

inline std::string definition_of(const std::string& task_id) {
  const auto a = task_id.find('/');
  const auto b = task_id.rfind('/');
  return task_id.substr(a + 1, b - a - 1);
}

/// Value of `key=` inside a space-separated detail field.
inline std::string detail_value(const std::string& detail, const std::string& key) {
  std::istringstream in(detail);
  std::string tok;
  while (in >> tok) {
    if (tok.rfind(key + "=", 0) == 0) {
      return tok.substr(key.size() + 1);
    }
  }
  return {};
}

// -- first-fit oracle --------------------------------------------------------

struct OracleMachine {
  std::string id;
  bool eligible = true;
  std::uint64_t cpu = 0;
  std::uint64_t mem = 0;
  std::uint64_t disk = 0;
};

/// Plain re-statement of FIFO first-fit: every entry, in order, goes to the
/// lowest-id eligible machine with room on all three dimensions.
inline std::vector<stratus::Assignment> first_fit_oracle(
    const std::vector<stratus::QueueEntry>& queue, const std::vector<stratus::MachineView>& views) {
  std::vector<OracleMachine> free;
  for (const auto& v : views) {
    free.push_back({v.machine_id, v.status == stratus::MachineStatus::Healthy,
                    std::uint64_t{v.capacity.cpu_cores} - v.reserved.cpu_cores,
                    v.capacity.memory_bytes - v.reserved.memory_bytes,
                    v.capacity.disk_bytes - v.reserved.disk_bytes});
  }
  std::sort(free.begin(), free.end(),
            [](const OracleMachine& a, const OracleMachine& b) { return a.id < b.id; });
  std::vector<stratus::Assignment> out;
  for (const auto& e : queue) {
    for (auto& m : free) {
      if (m.eligible && m.cpu >= e.requested.cpu_cores && m.mem >= e.requested.memory_bytes &&
          m.disk >= e.requested.disk_bytes) {
        m.cpu -= e.requested.cpu_cores;
        m.mem -= e.requested.memory_bytes;
        m.disk -= e.requested.disk_bytes;
        out.push_back({e.task_id, m.id});
        break;
      }
    }
  }
  return out;
}

// -- event-log checks --------------------------------------------------------

/// Sweeps the event log tracking per-machine reservations from task_started
/// and task_finished/task_failed. Returns a description of the first
/// over-commitment, if any.
inline std::optional<std::string> capacity_violation(const std::vector<stratus::Event>& events,
                                                     const stratus::WorkflowSpec& spec,
                                                     const stratus::ClusterConfig& cluster) {
  struct Use {
    std::uint64_t cpu = 0, mem = 0, disk = 0;
  };
  std::map<std::string, Use> used;
  std::map<std::string, std::string> where;
  std::map<std::string, stratus::Resources> cap;
  for (const auto& m : cluster.machines) {
    cap[m.machine_id] = m.capacity;
  }
  for (const auto& e : events) {
    if (e.kind != "task_started" && e.kind != "task_finished" && e.kind != "task_failed") {
      continue;
    }
    const auto& req = spec.find(definition_of(e.subject))->requested;
    if (e.kind == "task_started") {
      const auto m = detail_value(e.detail, "machine");
      where[e.subject] = m;
      auto& u = used[m];
      u.cpu += req.cpu_cores;
      u.mem += req.memory_bytes;
      u.disk += req.disk_bytes;
      if (u.cpu > cap[m].cpu_cores || u.mem > cap[m].memory_bytes || u.disk > cap[m].disk_bytes) {
        return "t=" + std::to_string(e.t_ms) + " machine " + m + " over capacity after " + e.subject;
      }
    } else {
      auto& u = used[where.at(e.subject)];
      u.cpu -= req.cpu_cores;
      u.mem -= req.memory_bytes;
      u.disk -= req.disk_bytes;
    }
  }
  return std::nullopt;
}

inline std::set<std::string> descendants(const stratus::WorkflowSpec& spec, const std::string& def) {
  std::set<std::string> out;
  std::vector<std::string> stack{def};
  while (!stack.empty()) {
    const auto d = stack.back();
    stack.pop_back();
    for (const auto& e : spec.edges) {
      if (e.from == d && out.insert(e.to).second) {
        stack.push_back(e.to);
      }
    }
  }
  return out;
}

/// Checks every edge a->b: each b instance starts no earlier than every
/// successful a completion, and no instance below a failed definition is
/// ever queued.
inline std::optional<std::string> dependency_violation(const std::vector<stratus::Event>& events,
                                                       const stratus::WorkflowSpec& spec) {
  std::map<std::string, stratus::SimTime> last_success;
  std::map<std::string, stratus::SimTime> first_start;
  std::set<std::string> poisoned;
  for (const auto& e : events) {
    if (e.kind == "task_finished") {
      auto& t = last_success[definition_of(e.subject)];
      t = std::max(t, e.t_ms);
    } else if (e.kind == "task_failed") {
      for (const auto& d : descendants(spec, definition_of(e.subject))) {
        poisoned.insert(d);
      }
    } else if (e.kind == "task_queued" && poisoned.count(definition_of(e.subject)) != 0) {
      return e.subject + " queued below a failed task at t=" + std::to_string(e.t_ms);
    } else if (e.kind == "task_started") {
      const auto def = definition_of(e.subject);
      if (first_start.count(def) == 0) {
        first_start[def] = e.t_ms;
      }
    }
  }
  for (const auto& edge : spec.edges) {
    auto s = first_start.find(edge.to);
    if (s == first_start.end()) {
      continue;
    }
    auto f = last_success.find(edge.from);
    if (f == last_success.end() || s->second < f->second) {
      return "edge " + edge.from + "->" + edge.to + " violated";
    }
  }
  return std::nullopt;
}

/// Rebuilds the status history of a run from its event log alone.
inline std::vector<stratus::ProgressRecord> replay_progress(
    const std::vector<stratus::Event>& events, const stratus::WorkflowSpec& spec,
    std::uint32_t input_count) {
  using stratus::RunState;
  std::map<std::string, std::size_t> per_def;
  std::size_t total = 0;
  for (const auto& t : spec.tasks) {
    per_def[t.name] = t.scatter ? input_count : 1;
    total += per_def[t.name];
  }
  std::map<std::string, std::string> state; // task_id -> queued|running|ok|failed
  std::vector<stratus::ProgressRecord> out;
  auto emit = [&](stratus::SimTime t) {
    stratus::WorkflowStatus s;
    s.total = total;
    std::set<std::string> failed_defs;
    for (const auto& [id, st] : state) {
      s.finished += st == "ok" ? 1 : 0;
      if (st == "failed") {
        ++s.failures;
        failed_defs.insert(definition_of(id));
      }
    }
    s.progress = total == 0 ? 1.0 : static_cast<double>(s.finished) / static_cast<double>(total);
    if (s.finished == total) {
      s.state = RunState::Succeeded;
    } else if (s.failures == 0) {
      s.state = RunState::Running;
    } else {
      std::set<std::string> blocked;
      for (const auto& d : failed_defs) {
        auto below = descendants(spec, d);
        blocked.insert(below.begin(), below.end());
      }
      // Settled once nothing is in flight and every unfinished definition
      // is blocked.
      bool settled = true;
      for (const auto& [id, st] : state) {
        settled = settled && (st == "ok" || st == "failed");
      }
      std::map<std::string, std::size_t> done;
      for (const auto& [id, st] : state) {
        ++done[definition_of(id)];
      }
      for (const auto& [def, n] : per_def) {
        if (done[def] < n && blocked.count(def) == 0) {
          settled = false;
        }
      }
      s.state = settled ? RunState::Failed : RunState::Running;
    }
    if (out.empty() || !(out.back().status == s)) {
      out.push_back({t, s});
    }
  };
  for (const auto& e : events) {
    if (e.kind == "run_submitted") {
      emit(e.t_ms);
    } else if (e.kind == "task_queued") {
      state[e.subject] = "queued";
    } else if (e.kind == "task_started") {
      state[e.subject] = "running";
    } else if (e.kind == "task_finished") {
      state[e.subject] = "ok";
      emit(e.t_ms);
    } else if (e.kind == "task_failed") {
      state[e.subject] = "failed";
      emit(e.t_ms);
    }
  }
  return out;
}

} // namespace testsupport
