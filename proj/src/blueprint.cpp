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

#include "stratus/blueprint.hpp"

#include <bit>
#include <sstream>

#include "text.hpp"

namespace stratus {

namespace {

struct FeatureInfo {
  FeatureKey key;
  LayerId owner;
  std::string_view name;
  std::string_view label;
};

constexpr std::array<FeatureInfo, kFeatureCount> kFeatures = {{
    {FeatureKey::InfrastructureStatus, LayerId::ResourceManager, "infrastructure_status",
     "Infrastructure status"},
    {FeatureKey::FileSystemStatus, LayerId::ResourceManager, "file_system_status",
     "File system status"},
    {FeatureKey::RunningWorkflows, LayerId::ResourceManager, "running_workflows",
     "Running workflows"},
    {FeatureKey::WorkflowStatus, LayerId::Workflow, "workflow_status", "Status"},
    {FeatureKey::WorkflowSpecification, LayerId::Workflow, "workflow_specification",
     "Workflow specification"},
    {FeatureKey::GraphicalRepresentation, LayerId::Workflow, "graphical_representation",
     "Graphical representation"},
    {FeatureKey::WorkflowId, LayerId::Workflow, "workflow_id", "Workflow ID"},
    {FeatureKey::ExecutionReport, LayerId::Workflow, "execution_report", "Execution report"},
    {FeatureKey::PreviousExecutions, LayerId::Workflow, "previous_executions",
     "Previous executions"},
    {FeatureKey::MachineStatus, LayerId::Machine, "machine_status", "Status"},
    {FeatureKey::MachineType, LayerId::Machine, "machine_type", "Machine type"},
    {FeatureKey::HardwareSpecification, LayerId::Machine, "hardware_specification",
     "Hardware specification"},
    {FeatureKey::AvailableResources, LayerId::Machine, "available_resources",
     "Available resources"},
    {FeatureKey::UsedResources, LayerId::Machine, "used_resources", "Used resources"},
    {FeatureKey::TaskStatus, LayerId::Task, "task_status", "Task status"},
    {FeatureKey::RequestedResources, LayerId::Task, "requested_resources",
     "Requested resources"},
    {FeatureKey::ConsumedResources, LayerId::Task, "consumed_resources", "Consumed resources"},
    {FeatureKey::ResourceConsumptionForCodeParts, LayerId::Task,
     "resource_consumption_for_code_parts", "Resource consumption for code parts"},
    {FeatureKey::TaskId, LayerId::Task, "task_id", "Task ID"},
    {FeatureKey::ApplicationLogs, LayerId::Task, "application_logs", "Application logs"},
    {FeatureKey::TaskDuration, LayerId::Task, "task_duration", "Task duration"},
    {FeatureKey::LowLevelTaskMetrics, LayerId::Task, "low_level_task_metrics",
     "Low-level task metrics"},
    {FeatureKey::FaultDiagnosis, LayerId::Task, "fault_diagnosis", "Fault diagnosis"},
}};

constexpr const FeatureInfo& info(FeatureKey f) { return kFeatures[static_cast<std::size_t>(f)]; }

constexpr std::string_view layer_abbrev(LayerId l) {
  switch (l) {
  case LayerId::ResourceManager: return "RM";
  case LayerId::Workflow: return "WF";
  case LayerId::Machine: return "M";
  case LayerId::Task: return "T";
  }
  return "?";
}

LayerSet parse_layer_list(std::string_view list, std::size_t line) {
  LayerSet out;
  for (auto tok : text::split(list, ',')) {
    tok = text::trim(tok);
    auto layer = parse_layer(tok);
    if (!layer) {
      throw AccessMatrixError(line, "unknown layer '" + std::string(tok) + "'");
    }
    out.insert(*layer);
  }
  if (out.empty()) {
    throw AccessMatrixError(line, "empty layer list");
  }
  return out;
}

} // namespace

std::string_view to_string(LayerId layer) noexcept {
  switch (layer) {
  case LayerId::ResourceManager: return "resource_manager";
  case LayerId::Workflow: return "workflow";
  case LayerId::Machine: return "machine";
  case LayerId::Task: return "task";
  }
  return "unknown";
}

std::optional<LayerId> parse_layer(std::string_view name) noexcept {
  for (auto l : kAllLayers) {
    if (to_string(l) == name) {
      return l;
    }
  }
  return std::nullopt;
}

const std::array<FeatureKey, kFeatureCount>& all_features() noexcept {
  static const auto features = [] {
    std::array<FeatureKey, kFeatureCount> out{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      out[i] = kFeatures[i].key;
    }
    return out;
  }();
  return features;
}

LayerId owning_layer(FeatureKey feature) noexcept { return info(feature).owner; }

std::string_view to_string(FeatureKey feature) noexcept { return info(feature).name; }

std::optional<FeatureKey> parse_feature(std::string_view name) noexcept {
  for (const auto& f : kFeatures) {
    if (f.name == name) {
      return f.key;
    }
  }
  return std::nullopt;
}

std::string_view display_name(FeatureKey feature) noexcept { return info(feature).label; }

std::string_view to_string(TopologyMode mode) noexcept {
  return mode == TopologyMode::WorkflowAware ? "workflow-aware" : "disjoint";
}

std::optional<TopologyMode> parse_topology(std::string_view name) noexcept {
  if (name == "workflow-aware") {
    return TopologyMode::WorkflowAware;
  }
  if (name == "disjoint") {
    return TopologyMode::Disjoint;
  }
  return std::nullopt;
}

std::size_t LayerSet::size() const noexcept {
  return static_cast<std::size_t>(std::popcount(static_cast<unsigned>(bits_)));
}

LayerId LayerSet::lowest() const noexcept {
  return static_cast<LayerId>(std::countr_zero(static_cast<unsigned>(bits_)));
}

std::vector<LayerId> LayerSet::members() const {
  std::vector<LayerId> out;
  for (auto l : kAllLayers) {
    if (contains(l)) {
      out.push_back(l);
    }
  }
  return out;
}

void AccessMatrix::set(FeatureKey feature, LayerSet layers) {
  const auto owner = owning_layer(feature);
  if (!layers.contains(owner)) {
    throw AccessMatrixError(0, std::string(to_string(feature)) + ": owning layer " +
                                   std::string(to_string(owner)) + " must be permitted");
  }
  if (layers.lowest() < owner) {
    throw AccessMatrixError(0, std::string(to_string(feature)) + ": layer " +
                                   std::string(to_string(layers.lowest())) +
                                   " is below the owning layer");
  }
  sets_[static_cast<std::size_t>(feature)] = layers;
}

void AccessMatrix::add_extension(ExtensionFeature ext) {
  if (parse_feature(ext.key)) {
    throw AccessMatrixError(0, "extension '" + ext.key + "' shadows a built-in feature");
  }
  for (auto& existing : extensions_) {
    if (existing.key == ext.key) {
      existing = std::move(ext);
      return;
    }
  }
  extensions_.push_back(std::move(ext));
}

AccessMatrix default_access_matrix() {
  using L = LayerId;
  const LayerSet rm{L::ResourceManager};
  const LayerSet rm_wf{L::ResourceManager, L::Workflow};
  const LayerSet wf{L::Workflow};
  const LayerSet rm_m{L::ResourceManager, L::Machine};
  const LayerSet m{L::Machine};
  const LayerSet all{L::ResourceManager, L::Workflow, L::Machine, L::Task};
  const LayerSet t{L::Task};

  AccessMatrix matrix;
  using F = FeatureKey;
  matrix.set(F::InfrastructureStatus, rm);
  matrix.set(F::FileSystemStatus, rm);
  matrix.set(F::RunningWorkflows, rm);
  matrix.set(F::WorkflowStatus, rm_wf);
  matrix.set(F::WorkflowSpecification, rm_wf);
  matrix.set(F::GraphicalRepresentation, wf);
  matrix.set(F::WorkflowId, rm_wf);
  matrix.set(F::ExecutionReport, wf);
  matrix.set(F::PreviousExecutions, wf);
  matrix.set(F::MachineStatus, rm_m);
  matrix.set(F::MachineType, rm_m);
  matrix.set(F::HardwareSpecification, m);
  matrix.set(F::AvailableResources, rm_m);
  matrix.set(F::UsedResources, rm_m);
  matrix.set(F::TaskStatus, all);
  matrix.set(F::RequestedResources, all);
  matrix.set(F::ConsumedResources, all);
  matrix.set(F::ResourceConsumptionForCodeParts, t);
  matrix.set(F::TaskId, all);
  matrix.set(F::ApplicationLogs, t);
  matrix.set(F::TaskDuration, all);
  matrix.set(F::LowLevelTaskMetrics, t);
  matrix.set(F::FaultDiagnosis, t);
  return matrix;
}

AccessMatrix parse_access_matrix(std::string_view input) {
  AccessMatrix matrix = default_access_matrix();
  text::for_each_line(input, [&](std::size_t line, std::string_view content) {
    const auto colon = content.find(':');
    if (colon == std::string_view::npos) {
      throw AccessMatrixError(line, "expected '<feature_key>: <layers>'");
    }
    auto key = text::trim(content.substr(0, colon));
    const auto layers = parse_layer_list(content.substr(colon + 1), line);
    if (!key.empty() && key.front() == '+') {
      key.remove_prefix(1);
      if (key.empty()) {
        throw AccessMatrixError(line, "empty extension key");
      }
      try {
        matrix.add_extension({std::string(key), layers.lowest(), layers});
      } catch (const AccessMatrixError& e) {
        throw AccessMatrixError(line, e.what());
      }
      return;
    }
    auto feature = parse_feature(key);
    if (!feature) {
      throw AccessMatrixError(line, "unknown feature key '" + std::string(key) + "'");
    }
    try {
      matrix.set(*feature, layers);
    } catch (const AccessMatrixError& e) {
      throw AccessMatrixError(line, e.what());
    }
  });
  return matrix;
}

bool access_allowed(const AccessMatrix& matrix, LayerId layer, FeatureKey feature,
                    TopologyMode topology) noexcept {
  if (topology == TopologyMode::Disjoint && layer == LayerId::ResourceManager &&
      owning_layer(feature) == LayerId::Workflow) {
    return false;
  }
  return matrix.permitted(feature).contains(layer);
}

AccessMatrix effective_matrix(const AccessMatrix& matrix, TopologyMode topology) {
  AccessMatrix out = matrix;
  for (auto f : all_features()) {
    LayerSet s;
    for (auto l : kAllLayers) {
      if (access_allowed(matrix, l, f, topology)) {
        s.insert(l);
      }
    }
    out.set(f, s);
  }
  return out;
}

std::string render_matrix(const AccessMatrix& matrix, TopologyMode topology) {
  constexpr std::size_t kNameWidth = 37;
  std::string out = "feature";
  out.append(kNameWidth - out.size(), ' ');
  for (std::size_t i = 0; i < kAllLayers.size(); ++i) {
    auto abbrev = layer_abbrev(kAllLayers[i]);
    out += abbrev;
    if (i + 1 < kAllLayers.size()) {
      out.append(3 - abbrev.size(), ' ');
    }
  }
  out += '\n';
  for (auto f : all_features()) {
    std::string row(to_string(f));
    row.append(kNameWidth - row.size(), ' ');
    for (std::size_t i = 0; i < kAllLayers.size(); ++i) {
      row += access_allowed(matrix, kAllLayers[i], f, topology) ? "x" : "·";
      if (i + 1 < kAllLayers.size()) {
        row += "  ";
      }
    }
    out += row;
    out += '\n';
  }
  return out;
}

CapabilityProfile parse_profile(std::string_view input) {
  CapabilityProfile profile;
  bool named = false;
  text::for_each_line(input, [&](std::size_t line, std::string_view content) {
    if (content.starts_with("name ")) {
      if (named) {
        throw ParseError(line, "duplicate name line");
      }
      profile.name = std::string(text::trim(content.substr(5)));
      named = true;
      return;
    }
    auto feature = parse_feature(content);
    if (!feature) {
      throw ParseError(line, "unknown feature key '" + std::string(content) + "'");
    }
    profile.supported.insert(*feature);
  });
  if (!named) {
    throw ParseError(0, "profile has no 'name' line");
  }
  return profile;
}

CoverageSummary classify_capabilities(const CapabilityProfile& profile) {
  CoverageSummary summary;
  summary.name = profile.name;
  for (auto l : kAllLayers) {
    summary.per_layer[l] = {};
  }
  for (auto f : all_features()) {
    auto& cov = summary.per_layer[owning_layer(f)];
    ++cov.total;
    if (profile.supported.count(f) != 0) {
      ++cov.supported;
    } else {
      summary.missing.insert(f);
    }
  }
  return summary;
}

std::string render_coverage(const CoverageSummary& summary) {
  std::ostringstream os;
  os << "profile: " << summary.name << '\n';
  for (auto l : kAllLayers) {
    const auto& c = summary.at(l);
    std::string name(to_string(l));
    name.append(18 - name.size(), ' ');
    os << name << c.supported << '/' << c.total << '\n';
  }
  os << "missing:";
  for (auto f : summary.missing) {
    os << ' ' << to_string(f);
  }
  os << '\n';
  return os.str();
}

} // namespace stratus
