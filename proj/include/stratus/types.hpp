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

#include <cstdint>

namespace stratus {

/// Simulated milliseconds. There is no wall-clock coupling anywhere.
using SimTime = std::uint64_t;

/// Resources a task definition asks for.
struct ResourceRequest {
  std::uint32_t cpu_cores = 1;
  std::uint64_t memory_bytes = 1;
  std::uint64_t disk_bytes = 0;
  std::uint64_t max_runtime_ms = 1;

  friend bool operator==(const ResourceRequest&, const ResourceRequest&) = default;
};

/// cpu/memory/disk triple used for capacities, reservations and usage.
struct Resources {
  std::uint64_t cpu_cores = 0;
  std::uint64_t memory_bytes = 0;
  std::uint64_t disk_bytes = 0;

  bool covers(const Resources& need) const noexcept {
    return cpu_cores >= need.cpu_cores && memory_bytes >= need.memory_bytes &&
           disk_bytes >= need.disk_bytes;
  }

  Resources& operator+=(const Resources& o) noexcept {
    cpu_cores += o.cpu_cores;
    memory_bytes += o.memory_bytes;
    disk_bytes += o.disk_bytes;
    return *this;
  }

  /// Caller guarantees `o` fits; see covers().
  Resources& operator-=(const Resources& o) noexcept {
    cpu_cores -= o.cpu_cores;
    memory_bytes -= o.memory_bytes;
    disk_bytes -= o.disk_bytes;
    return *this;
  }

  friend Resources operator+(Resources a, const Resources& b) noexcept { return a += b; }
  friend Resources operator-(Resources a, const Resources& b) noexcept { return a -= b; }
  friend bool operator==(const Resources&, const Resources&) = default;
};

inline Resources as_resources(const ResourceRequest& r) noexcept {
  return {r.cpu_cores, r.memory_bytes, r.disk_bytes};
}

} // namespace stratus
