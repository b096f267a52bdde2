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

// Machine layer: node identity, health status and utilization series.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stratus/error.hpp"
#include "stratus/types.hpp"

namespace stratus {

enum class MachineType : std::uint8_t { BareMetal, VirtualMachine };
enum class MachineStatus : std::uint8_t { Healthy, Maintenance, Unhealthy };

std::string_view to_string(MachineType t) noexcept;
std::optional<MachineType> parse_machine_type(std::string_view s) noexcept;
std::string_view to_string(MachineStatus s) noexcept;
std::optional<MachineStatus> parse_machine_status(std::string_view s) noexcept;

struct DiskPartition {
  std::string name;
  std::uint64_t bytes = 0;
};

struct HardwareSpec {
  std::string cpu_architecture;
  std::string cpu_model;
  std::uint32_t memory_clock_mhz = 1;
  std::vector<DiskPartition> disk_partitions;
};

struct MachineDescriptor {
  std::string machine_id;
  MachineType machine_type = MachineType::BareMetal;
  HardwareSpec hardware;
  MachineStatus status = MachineStatus::Healthy;
  Resources capacity;
};

struct MachineSample {
  std::string machine_id;
  SimTime t_ms = 0;
  double used_cpu_cores = 0.0;
  std::uint64_t used_memory_bytes = 0;
  std::uint64_t used_disk_bytes = 0;
  /// Open-ended extra metrics (e.g. virtualization counters).
  std::map<std::string, double> annex;
};

class MachineError : public Error {
public:
  using Error::Error;
};

class DuplicateMachineId : public MachineError {
public:
  explicit DuplicateMachineId(const std::string& id)
      : MachineError("machine id '" + id + "' already used") {}
};

class UnknownMachine : public MachineError {
public:
  explicit UnknownMachine(const std::string& id) : MachineError("unknown machine '" + id + "'") {}
};

class InvalidWindow : public MachineError {
public:
  using MachineError::MachineError;
};

class InvalidSample : public MachineError {
public:
  using MachineError::MachineError;
};

/// Registry of machines plus their sample series. Single writer per machine,
/// concurrent readers; queries return copies.
class MachineCollector {
public:
  static constexpr std::size_t kDefaultRetention = 100000;
  static constexpr SimTime kDefaultCadenceMs = 1000;

  explicit MachineCollector(std::size_t retention = kDefaultRetention);

  /// Ids are never reusable, not even after deregistration.
  void register_machine(MachineDescriptor descriptor, SimTime t = 0);
  void deregister_machine(const std::string& machine_id);

  void set_status(const std::string& machine_id, MachineStatus status, SimTime t);
  MachineStatus status(const std::string& machine_id) const;
  /// Status in effect at `t` (the last change at or before `t`).
  MachineStatus status_at(const std::string& machine_id, SimTime t) const;

  bool contains(std::string_view machine_id) const;
  MachineDescriptor descriptor(const std::string& machine_id) const;
  /// All registered machines, ascending machine_id.
  std::vector<MachineDescriptor> machines() const;

  /// Rejects used > capacity and non-increasing timestamps.
  void record_sample(MachineSample sample);
  std::vector<MachineSample> query_series(const std::string& machine_id, SimTime t_from,
                                          SimTime t_to) const;
  std::optional<MachineSample> latest_sample(const std::string& machine_id, SimTime t) const;

  /// Capacity minus the latest sample at or before `t_ms`.
  Resources available_resources(const std::string& machine_id, SimTime t_ms) const;

private:
  struct Entry {
    MachineDescriptor descriptor;
    std::vector<std::pair<SimTime, MachineStatus>> status_history;
    std::deque<MachineSample> series;
  };

  const Entry& entry(const std::string& machine_id) const;
  Entry& entry(const std::string& machine_id);

  std::size_t retention_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry, std::less<>> machines_;
  std::set<std::string, std::less<>> ever_used_;
};

struct ClusterConfig {
  std::vector<MachineDescriptor> machines;
  std::uint64_t fs_total_bytes = 0;
};

/// Parses a `.cluster` file:
///   machine <id> type=<bare_metal|vm> cpus=<n> mem=<bytes> disk=<bytes>
///           arch=<text> model=<text> clock=<mhz> [parts=<name>:<bytes>,...]
///   fs total=<bytes>
ClusterConfig parse_cluster(std::string_view text);

} // namespace stratus
