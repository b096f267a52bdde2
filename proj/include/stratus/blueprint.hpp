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

// Layer taxonomy, monitoring features, access matrix and capability
// classification. Every other module builds on these types.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stratus/error.hpp"

namespace stratus {

/// Monitoring layers. Underlying values follow the hierarchy order, so
/// `ResourceManager > Workflow > Machine > Task` compares as expected.
enum class LayerId : std::uint8_t {
  Task = 0,
  Machine = 1,
  Workflow = 2,
  ResourceManager = 3,
};

inline constexpr std::size_t kLayerCount = 4;

/// Layers in presentation order (highest abstraction first).
inline constexpr std::array<LayerId, kLayerCount> kAllLayers = {
    LayerId::ResourceManager, LayerId::Workflow, LayerId::Machine, LayerId::Task};

std::string_view to_string(LayerId layer) noexcept;
std::optional<LayerId> parse_layer(std::string_view name) noexcept;

enum class FeatureKey : std::uint8_t {
  // resource manager
  InfrastructureStatus,
  FileSystemStatus,
  RunningWorkflows,
  // workflow
  WorkflowStatus,
  WorkflowSpecification,
  GraphicalRepresentation,
  WorkflowId,
  ExecutionReport,
  PreviousExecutions,
  // machine
  MachineStatus,
  MachineType,
  HardwareSpecification,
  AvailableResources,
  UsedResources,
  // task
  TaskStatus,
  RequestedResources,
  ConsumedResources,
  ResourceConsumptionForCodeParts,
  TaskId,
  ApplicationLogs,
  TaskDuration,
  LowLevelTaskMetrics,
  FaultDiagnosis,
};

inline constexpr std::size_t kFeatureCount = 23;

/// All features in canonical order.
const std::array<FeatureKey, kFeatureCount>& all_features() noexcept;

LayerId owning_layer(FeatureKey feature) noexcept;

/// lower_snake_case wire/file name, e.g. `graphical_representation`.
std::string_view to_string(FeatureKey feature) noexcept;
std::optional<FeatureKey> parse_feature(std::string_view name) noexcept;

/// Human label used in rendered grids, e.g. "Graphical representation".
std::string_view display_name(FeatureKey feature) noexcept;

enum class TopologyMode : std::uint8_t {
  WorkflowAware,
  Disjoint,
};

std::string_view to_string(TopologyMode mode) noexcept;
std::optional<TopologyMode> parse_topology(std::string_view name) noexcept;

/// A set of layers packed into four bits.
class LayerSet {
public:
  constexpr LayerSet() = default;
  constexpr LayerSet(std::initializer_list<LayerId> layers) {
    for (auto l : layers) {
      insert(l);
    }
  }

  constexpr bool contains(LayerId l) const noexcept { return (bits_ & bit(l)) != 0; }
  constexpr void insert(LayerId l) noexcept { bits_ |= bit(l); }
  constexpr void erase(LayerId l) noexcept { bits_ &= static_cast<std::uint8_t>(~bit(l)); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  std::size_t size() const noexcept;
  /// Lowest layer in the set; the set must be non-empty.
  LayerId lowest() const noexcept;
  /// Members in presentation order.
  std::vector<LayerId> members() const;

  friend constexpr bool operator==(LayerSet, LayerSet) = default;

private:
  static constexpr std::uint8_t bit(LayerId l) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(l));
  }
  std::uint8_t bits_ = 0;
};

class AccessMatrixError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Features added beyond the fixed vocabulary through an override file.
struct ExtensionFeature {
  std::string key;
  LayerId owner;
  LayerSet permitted;

  friend bool operator==(const ExtensionFeature&, const ExtensionFeature&) = default;
};

/// Which layers may serve each feature.
class AccessMatrix {
public:
  /// Empty matrix; use default_access_matrix() for the standard one.
  AccessMatrix() = default;

  LayerSet permitted(FeatureKey feature) const noexcept {
    return sets_[static_cast<std::size_t>(feature)];
  }

  /// Replaces the permitted set of one feature. Throws AccessMatrixError if
  /// the set omits the owning layer or contains a layer below it.
  void set(FeatureKey feature, LayerSet layers);

  const std::vector<ExtensionFeature>& extensions() const noexcept { return extensions_; }
  void add_extension(ExtensionFeature ext);

  friend bool operator==(const AccessMatrix&, const AccessMatrix&) = default;

private:
  std::array<LayerSet, kFeatureCount> sets_{};
  std::vector<ExtensionFeature> extensions_;
};

AccessMatrix default_access_matrix();

/// Applies an override file on top of the default matrix.
///
/// Lines are `<feature_key>: <layer>[,<layer>...]`; unknown keys are an
/// error. Extension features use `+<key>: <layers>` and are owned by the
/// lowest listed layer.
AccessMatrix parse_access_matrix(std::string_view text);

/// Membership in the matrix; in Disjoint topology the resource manager is
/// additionally denied every Workflow-owned feature.
bool access_allowed(const AccessMatrix& matrix, LayerId layer, FeatureKey feature,
                    TopologyMode topology) noexcept;

/// The effective matrix after applying the topology filter.
AccessMatrix effective_matrix(const AccessMatrix& matrix, TopologyMode topology);

/// 23x4 grid of `x` / `·`, one feature per row. Byte-stable.
std::string render_matrix(const AccessMatrix& matrix, TopologyMode topology);

struct CapabilityProfile {
  std::string name;
  std::set<FeatureKey> supported;
};

/// `name <text>` line, then one feature key per line.
CapabilityProfile parse_profile(std::string_view text);

struct LayerCoverage {
  std::size_t supported = 0;
  std::size_t total = 0;
};

struct CoverageSummary {
  std::string name;
  std::map<LayerId, LayerCoverage> per_layer;
  std::set<FeatureKey> missing;

  const LayerCoverage& at(LayerId l) const { return per_layer.at(l); }
};

CoverageSummary classify_capabilities(const CapabilityProfile& profile);

std::string render_coverage(const CoverageSummary& summary);

} // namespace stratus
