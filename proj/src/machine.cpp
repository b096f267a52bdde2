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

#include "stratus/machine.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "text.hpp"

namespace stratus {

std::string_view to_string(MachineType t) noexcept {
  return t == MachineType::BareMetal ? "bare_metal" : "vm";
}

std::optional<MachineType> parse_machine_type(std::string_view s) noexcept {
  if (s == "bare_metal") {
    return MachineType::BareMetal;
  }
  if (s == "vm") {
    return MachineType::VirtualMachine;
  }
  return std::nullopt;
}

std::string_view to_string(MachineStatus s) noexcept {
  switch (s) {
  case MachineStatus::Healthy: return "healthy";
  case MachineStatus::Maintenance: return "maintenance";
  case MachineStatus::Unhealthy: return "unhealthy";
  }
  return "unknown";
}

std::optional<MachineStatus> parse_machine_status(std::string_view s) noexcept {
  for (auto st : {MachineStatus::Healthy, MachineStatus::Maintenance, MachineStatus::Unhealthy}) {
    if (to_string(st) == s) {
      return st;
    }
  }
  return std::nullopt;
}

MachineCollector::MachineCollector(std::size_t retention) : retention_(std::max<std::size_t>(1, retention)) {}

const MachineCollector::Entry& MachineCollector::entry(const std::string& machine_id) const {
  auto it = machines_.find(machine_id);
  if (it == machines_.end()) {
    throw UnknownMachine(machine_id);
  }
  return it->second;
}

MachineCollector::Entry& MachineCollector::entry(const std::string& machine_id) {
  auto it = machines_.find(machine_id);
  if (it == machines_.end()) {
    throw UnknownMachine(machine_id);
  }
  return it->second;
}

void MachineCollector::register_machine(MachineDescriptor d, SimTime t) {
  if (d.machine_id.empty()) {
    throw MachineError("empty machine id");
  }
  if (d.capacity.cpu_cores == 0 || d.capacity.memory_bytes == 0 || d.capacity.disk_bytes == 0) {
    throw MachineError(d.machine_id + ": capacity values must be positive");
  }
  std::uint64_t parts = 0;
  for (const auto& p : d.hardware.disk_partitions) {
    parts += p.bytes;
  }
  if (parts > d.capacity.disk_bytes) {
    throw MachineError(d.machine_id + ": disk partitions exceed disk capacity");
  }
  std::unique_lock lock(mutex_);
  if (!ever_used_.insert(d.machine_id).second) {
    throw DuplicateMachineId(d.machine_id);
  }
  Entry e;
  e.status_history.emplace_back(t, d.status);
  std::string id = d.machine_id;
  e.descriptor = std::move(d);
  machines_.emplace(std::move(id), std::move(e));
}

void MachineCollector::deregister_machine(const std::string& machine_id) {
  std::unique_lock lock(mutex_);
  if (machines_.erase(machine_id) == 0) {
    throw UnknownMachine(machine_id);
  }
}

void MachineCollector::set_status(const std::string& machine_id, MachineStatus status, SimTime t) {
  std::unique_lock lock(mutex_);
  auto& e = entry(machine_id);
  e.descriptor.status = status;
  if (!e.status_history.empty() && e.status_history.back().first == t) {
    e.status_history.back().second = status;
  } else {
    e.status_history.emplace_back(t, status);
  }
}

MachineStatus MachineCollector::status(const std::string& machine_id) const {
  std::shared_lock lock(mutex_);
  return entry(machine_id).descriptor.status;
}

MachineStatus MachineCollector::status_at(const std::string& machine_id, SimTime t) const {
  std::shared_lock lock(mutex_);
  const auto& hist = entry(machine_id).status_history;
  auto it = std::upper_bound(hist.begin(), hist.end(), t,
                             [](SimTime v, const auto& p) { return v < p.first; });
  if (it == hist.begin()) {
    return hist.front().second;
  }
  return std::prev(it)->second;
}

bool MachineCollector::contains(std::string_view machine_id) const {
  std::shared_lock lock(mutex_);
  return machines_.find(machine_id) != machines_.end();
}

MachineDescriptor MachineCollector::descriptor(const std::string& machine_id) const {
  std::shared_lock lock(mutex_);
  return entry(machine_id).descriptor;
}

std::vector<MachineDescriptor> MachineCollector::machines() const {
  std::shared_lock lock(mutex_);
  std::vector<MachineDescriptor> out;
  out.reserve(machines_.size());
  for (const auto& [id, e] : machines_) {
    out.push_back(e.descriptor);
  }
  return out;
}

void MachineCollector::record_sample(MachineSample sample) {
  std::unique_lock lock(mutex_);
  auto& e = entry(sample.machine_id);
  const auto& cap = e.descriptor.capacity;
  if (sample.used_cpu_cores < 0.0 || !std::isfinite(sample.used_cpu_cores) ||
      sample.used_cpu_cores > static_cast<double>(cap.cpu_cores) ||
      sample.used_memory_bytes > cap.memory_bytes || sample.used_disk_bytes > cap.disk_bytes) {
    throw InvalidSample(sample.machine_id + ": sample at t=" + std::to_string(sample.t_ms) +
                        " exceeds capacity");
  }
  if (!e.series.empty() && sample.t_ms <= e.series.back().t_ms) {
    throw InvalidSample(sample.machine_id + ": sample timestamps must strictly increase");
  }
  e.series.push_back(std::move(sample));
  while (e.series.size() > retention_) {
    e.series.pop_front();
  }
}

std::vector<MachineSample> MachineCollector::query_series(const std::string& machine_id,
                                                          SimTime t_from, SimTime t_to) const {
  if (t_from > t_to) {
    throw InvalidWindow("window start " + std::to_string(t_from) + " is after end " +
                        std::to_string(t_to));
  }
  std::shared_lock lock(mutex_);
  const auto& series = entry(machine_id).series;
  auto lo = std::lower_bound(series.begin(), series.end(), t_from,
                             [](const MachineSample& s, SimTime v) { return s.t_ms < v; });
  auto hi = std::upper_bound(series.begin(), series.end(), t_to,
                             [](SimTime v, const MachineSample& s) { return v < s.t_ms; });
  return {lo, hi};
}

std::optional<MachineSample> MachineCollector::latest_sample(const std::string& machine_id,
                                                             SimTime t) const {
  std::shared_lock lock(mutex_);
  const auto& series = entry(machine_id).series;
  auto it = std::upper_bound(series.begin(), series.end(), t,
                             [](SimTime v, const MachineSample& s) { return v < s.t_ms; });
  if (it == series.begin()) {
    return std::nullopt;
  }
  return *std::prev(it);
}

Resources MachineCollector::available_resources(const std::string& machine_id, SimTime t_ms) const {
  const auto cap = descriptor(machine_id).capacity;
  const auto latest = latest_sample(machine_id, t_ms);
  if (!latest) {
    return cap;
  }
  // Fractional cpu usage rounds up: a partly used core is not available.
  const auto used_cpu = static_cast<std::uint64_t>(std::ceil(latest->used_cpu_cores));
  return {cap.cpu_cores - std::min(cap.cpu_cores, used_cpu),
          cap.memory_bytes - latest->used_memory_bytes, cap.disk_bytes - latest->used_disk_bytes};
}

ClusterConfig parse_cluster(std::string_view input) {
  ClusterConfig cfg;
  bool have_fs = false;
  std::set<std::string, std::less<>> ids;
  text::for_each_line(input, [&](std::size_t line, std::string_view content) {
    const auto tokens = text::split_ws(content);
    if (tokens.front() == "fs") {
      const auto kv = text::parse_key_values(tokens, 1, line);
      if (have_fs) {
        throw ParseError(line, "duplicate fs line");
      }
      cfg.fs_total_bytes =
          text::require_number<std::uint64_t>(text::require_key(kv, "total", line), line, "total");
      have_fs = true;
      return;
    }
    if (tokens.front() != "machine" || tokens.size() < 2) {
      throw ParseError(line, "expected 'machine <id> ...' or 'fs total=<bytes>'");
    }
    MachineDescriptor d;
    d.machine_id = std::string(tokens[1]);
    if (!ids.insert(d.machine_id).second) {
      throw ParseError(line, "duplicate machine id '" + d.machine_id + "'");
    }
    const auto kv = text::parse_key_values(tokens, 2, line);
    auto type = parse_machine_type(text::require_key(kv, "type", line));
    if (!type) {
      throw ParseError(line, "type must be bare_metal or vm");
    }
    d.machine_type = *type;
    d.capacity.cpu_cores =
        text::require_number<std::uint64_t>(text::require_key(kv, "cpus", line), line, "cpus");
    d.capacity.memory_bytes =
        text::require_number<std::uint64_t>(text::require_key(kv, "mem", line), line, "mem");
    d.capacity.disk_bytes =
        text::require_number<std::uint64_t>(text::require_key(kv, "disk", line), line, "disk");
    if (d.capacity.cpu_cores == 0 || d.capacity.memory_bytes == 0 || d.capacity.disk_bytes == 0) {
      throw ParseError(line, "cpus, mem and disk must be positive");
    }
    d.hardware.cpu_architecture = text::require_key(kv, "arch", line);
    d.hardware.cpu_model = text::require_key(kv, "model", line);
    d.hardware.memory_clock_mhz =
        text::require_number<std::uint32_t>(text::require_key(kv, "clock", line), line, "clock");
    if (d.hardware.memory_clock_mhz == 0) {
      throw ParseError(line, "clock must be positive");
    }
    if (auto it = kv.find("parts"); it != kv.end()) {
      std::uint64_t sum = 0;
      for (auto part : text::split(it->second, ',')) {
        const auto colon = part.find(':');
        if (colon == std::string_view::npos || colon == 0) {
          throw ParseError(line, "partition must be <name>:<bytes>");
        }
        const auto bytes =
            text::require_number<std::uint64_t>(part.substr(colon + 1), line, "partition size");
        sum += bytes;
        d.hardware.disk_partitions.push_back({std::string(part.substr(0, colon)), bytes});
      }
      if (sum > d.capacity.disk_bytes) {
        throw ParseError(line, "partitions exceed disk capacity");
      }
    } else {
      d.hardware.disk_partitions.push_back({"root", d.capacity.disk_bytes});
    }
    static const std::set<std::string, std::less<>> known{"type", "cpus", "mem", "disk", "arch",
                                                          "model", "clock", "parts"};
    for (const auto& [k, v] : kv) {
      if (known.count(k) == 0) {
        throw ParseError(line, "unknown machine attribute '" + k + "'");
      }
    }
    cfg.machines.push_back(std::move(d));
  });
  return cfg;
}

} // namespace stratus
