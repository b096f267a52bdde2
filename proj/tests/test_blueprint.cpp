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

#include <doctest.h>

#include "stratus/blueprint.hpp"
#include "support.hpp"
#include "reference.hpp"

using namespace stratus;
using testsupport::kAccessReference;

namespace {

constexpr std::array<LayerId, 4> kColumns = {LayerId::ResourceManager, LayerId::Workflow,
                                             LayerId::Machine, LayerId::Task};

CoverageSummary classify_file(std::string_view name) {
  return classify_capabilities(parse_profile(read_file(testsupport::fixture(name))));
}

} // namespace

TEST_CASE("feature vocabulary round-trips through its wire names") {
  CHECK(all_features().size() == kFeatureCount);
  for (auto f : all_features()) {
    CHECK(parse_feature(to_string(f)) == f);
    CHECK_FALSE(display_name(f).empty());
  }
  CHECK_FALSE(parse_feature("workflow status").has_value());
  for (auto l : kAllLayers) {
    CHECK(parse_layer(to_string(l)) == l);
  }
  CHECK(parse_topology("disjoint") == TopologyMode::Disjoint);
  CHECK(parse_topology("workflow-aware") == TopologyMode::WorkflowAware);
  CHECK_FALSE(parse_topology("aware").has_value());
}

TEST_CASE("owning layers follow the 3/6/5/9 grouping") {
  std::map<LayerId, std::size_t> per_layer;
  for (auto f : all_features()) {
    ++per_layer[owning_layer(f)];
  }
  CHECK(per_layer[LayerId::ResourceManager] == 3);
  CHECK(per_layer[LayerId::Workflow] == 6);
  CHECK(per_layer[LayerId::Machine] == 5);
  CHECK(per_layer[LayerId::Task] == 9);
}

TEST_CASE("default matrix lookups") {
  const auto m = default_access_matrix();
  CHECK(m.permitted(FeatureKey::GraphicalRepresentation) == LayerSet{LayerId::Workflow});
  CHECK(m.permitted(FeatureKey::TaskStatus) ==
        LayerSet{LayerId::ResourceManager, LayerId::Workflow, LayerId::Machine, LayerId::Task});
  CHECK(m.permitted(FeatureKey::FileSystemStatus) == LayerSet{LayerId::ResourceManager});
}

TEST_CASE("default matrix equals the reference grid") {
  const auto m = default_access_matrix();
  REQUIRE(kAccessReference.size() == kFeatureCount);
  for (std::size_t i = 0; i < kAccessReference.size(); ++i) {
    const auto f = all_features()[i];
    CAPTURE(kAccessReference[i].key);
    CHECK(to_string(f) == kAccessReference[i].key);
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(m.permitted(f).contains(kColumns[c]) == kAccessReference[i].marks[c]);
    }
  }
}

TEST_CASE("matrix invariants: owner included, nothing below the owner") {
  const auto m = default_access_matrix();
  for (auto f : all_features()) {
    CHECK(m.permitted(f).contains(owning_layer(f)));
    for (auto l : m.permitted(f).members()) {
      CHECK(static_cast<int>(l) >= static_cast<int>(owning_layer(f)));
    }
  }
}

TEST_CASE("access_allowed examples") {
  const auto m = default_access_matrix();
  CHECK(access_allowed(m, LayerId::ResourceManager, FeatureKey::WorkflowSpecification,
                       TopologyMode::WorkflowAware));
  CHECK_FALSE(access_allowed(m, LayerId::ResourceManager, FeatureKey::WorkflowSpecification,
                             TopologyMode::Disjoint));
  CHECK(access_allowed(m, LayerId::Workflow, FeatureKey::WorkflowSpecification,
                       TopologyMode::Disjoint));
}

TEST_CASE("access_allowed is membership for every pair in workflow-aware mode") {
  const auto m = default_access_matrix();
  std::size_t pairs = 0;
  for (auto f : all_features()) {
    for (auto l : kAllLayers) {
      ++pairs;
      CHECK(access_allowed(m, l, f, TopologyMode::WorkflowAware) == m.permitted(f).contains(l));
      const bool hidden = l == LayerId::ResourceManager && owning_layer(f) == LayerId::Workflow;
      CHECK(access_allowed(m, l, f, TopologyMode::Disjoint) ==
            (m.permitted(f).contains(l) && !hidden));
    }
  }
  CHECK(pairs == kFeatureCount * 4);
}

TEST_CASE("effective matrix applies the disjoint filter") {
  const auto m = default_access_matrix();
  CHECK(effective_matrix(m, TopologyMode::WorkflowAware) == m);
  const auto d = effective_matrix(m, TopologyMode::Disjoint);
  for (auto f : all_features()) {
    if (owning_layer(f) == LayerId::Workflow) {
      CHECK_FALSE(d.permitted(f).contains(LayerId::ResourceManager));
    } else {
      CHECK(d.permitted(f) == m.permitted(f));
    }
  }
}

TEST_CASE("matrix rendering is byte-stable and marks permitted layers") {
  const auto m = default_access_matrix();
  const auto a = render_matrix(m, TopologyMode::WorkflowAware);
  CHECK(a == render_matrix(default_access_matrix(), TopologyMode::WorkflowAware));
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  CHECK(line.starts_with("feature"));
  std::size_t row = 0;
  while (std::getline(in, line)) {
    REQUIRE(row < kAccessReference.size());
    CHECK(line.starts_with(std::string(kAccessReference[row].key) + " "));
    std::size_t marks = 0;
    for (std::size_t p = 0; (p = line.find('x', p)) != std::string::npos; ++p) {
      if (p >= 37) {
        ++marks;
      }
    }
    std::size_t expected = 0;
    for (bool b : kAccessReference[row].marks) {
      expected += b ? 1 : 0;
    }
    CHECK(marks == expected);
    ++row;
  }
  CHECK(row == kFeatureCount);
}

TEST_CASE("override file edits rows and rejects bad input") {
  const auto m = parse_access_matrix("# widen\ngraphical_representation: workflow,resource_manager\n");
  CHECK(m.permitted(FeatureKey::GraphicalRepresentation) ==
        LayerSet{LayerId::Workflow, LayerId::ResourceManager});
  CHECK(m.permitted(FeatureKey::TaskStatus) ==
        default_access_matrix().permitted(FeatureKey::TaskStatus));

  CHECK_THROWS_AS(parse_access_matrix("no_such_feature: task\n"), AccessMatrixError);
  CHECK_THROWS_AS(parse_access_matrix("graphical_representation: resource_manager\n"),
                  AccessMatrixError);
  CHECK_THROWS_AS(parse_access_matrix("workflow_status: workflow,task\n"), AccessMatrixError);
  try {
    parse_access_matrix("\n\nbogus: task\n");
    FAIL("expected an error");
  } catch (const AccessMatrixError& e) {
    CHECK(e.line() == 3);
  }

  const auto ext = parse_access_matrix("+gpu_utilization: machine,resource_manager\n");
  REQUIRE(ext.extensions().size() == 1);
  CHECK(ext.extensions()[0].owner == LayerId::Machine);
  CHECK(ext.extensions()[0].permitted.contains(LayerId::ResourceManager));
}

TEST_CASE("classify the shipped profiles") {
  for (const auto& row : testsupport::kCoverageReference) {
    CAPTURE(row.name);
    const auto s = classify_file(row.fixture);
    CHECK(s.name == row.name);
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(s.at(kColumns[c]).supported == row.supported[c]);
      CHECK(s.at(kColumns[c]).total == testsupport::kLayerTotals[c]);
    }
  }
}

TEST_CASE("empty profile covers nothing") {
  const auto s = classify_capabilities({"empty", {}});
  std::size_t total = 0;
  for (auto l : kAllLayers) {
    CHECK(s.at(l).supported == 0);
    total += s.at(l).total;
  }
  CHECK(total == kFeatureCount);
  CHECK(s.missing.size() == kFeatureCount);
}

TEST_CASE("classification is monotone under feature addition") {
  testsupport::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    CapabilityProfile p{"p", {}};
    for (auto f : all_features()) {
      if (rng.chance(0.4)) {
        p.supported.insert(f);
      }
    }
    const auto before = classify_capabilities(p);
    const auto extra = all_features()[rng.between(0, kFeatureCount - 1)];
    p.supported.insert(extra);
    const auto after = classify_capabilities(p);
    for (auto l : kAllLayers) {
      CHECK(after.at(l).supported >= before.at(l).supported);
    }
    CHECK(after.missing.size() + p.supported.size() == kFeatureCount);
  }
}

TEST_CASE("profile parser errors") {
  CHECK_THROWS_AS(parse_profile("task_id\n"), ParseError);
  CHECK_THROWS_AS(parse_profile("name x\nnot_a_feature\n"), ParseError);
  CHECK_THROWS_AS(parse_profile("name x\nname y\n"), ParseError);
}
