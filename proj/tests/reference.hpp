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

// Hand-entered reference data for the access matrix and capability coverage.
// Columns are RM, WF, M, T.

#include <array>
#include <string_view>

namespace testsupport {

struct MatrixRow {
  std::string_view key;
  std::array<bool, 4> marks;
};

inline constexpr std::array<MatrixRow, 23> kAccessReference = {{
    {"infrastructure_status", {1, 0, 0, 0}},
    {"file_system_status", {1, 0, 0, 0}},
    {"running_workflows", {1, 0, 0, 0}},
    {"workflow_status", {1, 1, 0, 0}},
    {"workflow_specification", {1, 1, 0, 0}},
    {"graphical_representation", {0, 1, 0, 0}},
    {"workflow_id", {1, 1, 0, 0}},
    {"execution_report", {0, 1, 0, 0}},
    {"previous_executions", {0, 1, 0, 0}},
    {"machine_status", {1, 0, 1, 0}},
    {"machine_type", {1, 0, 1, 0}},
    {"hardware_specification", {0, 0, 1, 0}},
    {"available_resources", {1, 0, 1, 0}},
    {"used_resources", {1, 0, 1, 0}},
    {"task_status", {1, 1, 1, 1}},
    {"requested_resources", {1, 1, 1, 1}},
    {"consumed_resources", {1, 1, 1, 1}},
    {"resource_consumption_for_code_parts", {0, 0, 0, 1}},
    {"task_id", {1, 1, 1, 1}},
    {"application_logs", {0, 0, 0, 1}},
    {"task_duration", {1, 1, 1, 1}},
    {"low_level_task_metrics", {0, 0, 0, 1}},
    {"fault_diagnosis", {0, 0, 0, 1}},
}};

struct CoverageRow {
  std::string_view fixture;
  std::string_view name;
  std::array<std::size_t, 4> supported; // RM, WF, M, T
};

inline constexpr std::array<std::size_t, 4> kLayerTotals = {3, 6, 5, 9};

inline constexpr std::array<CoverageRow, 5> kCoverageReference = {{
    {"pegasus.profile", "Pegasus", {0, 5, 0, 6}},
    {"nextflow.profile", "Nextflow", {0, 6, 0, 6}},
    {"airflow.profile", "Airflow", {1, 6, 0, 4}},
    {"snakemake.profile", "Snakemake", {0, 5, 0, 6}},
    {"argo.profile", "Argo", {1, 6, 0, 5}},
}};

} // namespace testsupport
