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

#include <atomic>
#include <httplib.h>

#include "stratus/query_service.hpp"
#include "support.hpp"
#include "reference.hpp"

using namespace stratus;
using nlohmann::json;

namespace {

std::string path_of(FeatureKey f) {
  return "/v1/" + std::string(to_string(owning_layer(f))) + "/" + std::string(to_string(f));
}

std::string subject_for(LayerId owner) {
  switch (owner) {
  case LayerId::Workflow: return "run1";
  case LayerId::Machine: return "node01";
  case LayerId::Task: return "wf1/I/0";
  default: return {};
  }
}

std::map<std::string, std::string> params(LayerId as, const std::string& subject = {}) {
  std::map<std::string, std::string> p{{"as_layer", std::string(to_string(as))}};
  if (!subject.empty()) {
    p["subject"] = subject;
  }
  return p;
}

std::vector<ProgressRecord> parse_ndjson(const std::string& body) {
  std::vector<ProgressRecord> out;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    ProgressRecord r;
    r.t_ms = j.at("t_ms").get<SimTime>();
    const auto& s = j;
    r.status.state = *parse_run_state(s.at("state").get<std::string>());
    r.status.finished = s.at("finished").get<std::size_t>();
    r.status.total = s.at("total").get<std::size_t>();
    r.status.progress = s.at("progress").get<double>();
    r.status.failures = s.at("failures").get<std::size_t>();
    out.push_back(r);
  }
  return out;
}

struct Finished {
  Simulation sim;
  QueryEngine engine;

  Finished(const char* scenario, TopologyMode topo)
      : sim(testsupport::fixture_scenario(scenario)), engine(topo) {
    engine.attach(sim);
    sim.run();
  }
};

} // namespace

TEST_CASE("authorize follows the matrix and topology") {
  const auto m = default_access_matrix();
  QueryRequest r;
  r.feature = FeatureKey::WorkflowStatus;
  r.as_layer = LayerId::ResourceManager;
  CHECK(authorize(r, m, TopologyMode::WorkflowAware).allowed);
  const auto denied = authorize(r, m, TopologyMode::Disjoint);
  CHECK_FALSE(denied.allowed);
  CHECK_FALSE(denied.reason.empty());

  r.feature = FeatureKey::FaultDiagnosis;
  r.as_layer = LayerId::Machine;
  CHECK_FALSE(authorize(r, m, TopologyMode::WorkflowAware));
  r.as_layer = LayerId::Task;
  CHECK(authorize(r, m, TopologyMode::Disjoint));

  r.feature = FeatureKey::MachineStatus;
  r.as_layer = LayerId::ResourceManager;
  CHECK(authorize(r, m, TopologyMode::Disjoint));
}

TEST_CASE("every feature and layer pair is served or refused per the reference grid") {
  for (auto topo : {TopologyMode::WorkflowAware, TopologyMode::Disjoint}) {
    Finished f("fig1.scenario", topo);
    std::size_t pairs = 0;
    for (const auto& row : testsupport::kAccessReference) {
      const auto feature = *parse_feature(row.key);
      const auto owner = owning_layer(feature);
      for (std::size_t col = 0; col < 4; ++col) {
        const auto layer = static_cast<LayerId>(3 - col);
        bool expected = row.marks[col];
        if (topo == TopologyMode::Disjoint && layer == LayerId::ResourceManager &&
            owner == LayerId::Workflow) {
          expected = false;
        }
        CAPTURE(row.key);
        CAPTURE(to_string(layer));
        const auto [status, body] = f.engine.handle(path_of(feature), params(layer, subject_for(owner)));
        const auto j = json::parse(body);
        if (expected) {
          CHECK(status == 200);
          CHECK(j.at("feature") == row.key);
          CHECK(j.contains("payload"));
        } else {
          CHECK(status == 403);
          CHECK(j.size() == 1);
          CHECK(j.contains("error"));
        }
        ++pairs;
      }
    }
    CHECK(pairs == 92);
  }
}

TEST_CASE("status codes are checked in order") {
  Finished f("fig1.scenario", TopologyMode::Disjoint);
  const auto& e = f.engine;
  auto code = [&](const std::string& path, const std::map<std::string, std::string>& p) {
    return e.handle(path, p).first;
  };
  CHECK(code("/v1/workflow/nonsense", params(LayerId::Task)) == 404);
  CHECK(code("/v1/galaxy/status", params(LayerId::Task)) == 404);
  CHECK(code("/v1/machine/task_status", params(LayerId::Task)) == 404);
  CHECK(code("/v2/task/task_status", params(LayerId::Task)) == 404);
  CHECK(code("/v1/task/task_status", {}) == 400);
  CHECK(code("/v1/task/task_status", {{"as_layer", "cloud"}}) == 400);
  CHECK(code("/v1/workflow/workflow_status", params(LayerId::ResourceManager)) == 403);
  CHECK(code("/v1/workflow/workflow_status", params(LayerId::Workflow)) == 400);
  CHECK(code("/v1/workflow/workflow_status", params(LayerId::Workflow, "run9")) == 404);
  CHECK(code("/v1/task/task_status", params(LayerId::Task, "wf1/I/99")) == 404);
  CHECK(code("/v1/machine/machine_status", params(LayerId::Machine, "node77")) == 404);
  auto bad_window = params(LayerId::Machine, "node01");
  bad_window["from"] = "10";
  bad_window["to"] = "5";
  CHECK(code("/v1/machine/used_resources", bad_window) == 400);
  bad_window["from"] = "soon";
  CHECK(code("/v1/machine/used_resources", bad_window) == 400);
  auto bad_level = params(LayerId::Task, "wf1/I/0");
  bad_level["min_level"] = "loud";
  CHECK(code("/v1/task/application_logs", bad_level) == 400);
  CHECK(code("/v1/resource_manager/infrastructure_status", params(LayerId::ResourceManager)) == 200);
}

TEST_CASE("status alias resolves per layer") {
  Finished f("fig1.scenario", TopologyMode::WorkflowAware);
  const auto wf = json::parse(f.engine.handle("/v1/workflow/status", params(LayerId::Workflow, "run1")).second);
  CHECK(wf.at("feature") == "workflow_status");
  CHECK(wf.at("payload").at("state") == "succeeded");
  CHECK(wf.at("payload").at("finished") == 18);
  const auto rm = json::parse(f.engine.handle("/v1/resource_manager/status", params(LayerId::ResourceManager)).second);
  CHECK(rm.at("feature") == "infrastructure_status");
  CHECK(rm.at("payload").at("machines") == 4);
  const auto m = json::parse(f.engine.handle("/v1/machine/status", params(LayerId::Machine, "node03")).second);
  CHECK(m.at("payload").at("status") == "healthy");
  const auto t = json::parse(f.engine.handle("/v1/task/status", params(LayerId::Task, "wf1/VI/3")).second);
  CHECK(t.at("payload").at("state") == "succeeded");
}

TEST_CASE("payloads carry the underlying records") {
  Finished f("fault-oom.scenario", TopologyMode::WorkflowAware);
  auto get = [&](const std::string& path, LayerId as, const std::string& subject,
                 std::map<std::string, std::string> extra = {}) {
    auto p = params(as, subject);
    p.insert(extra.begin(), extra.end());
    const auto [status, body] = f.engine.handle(path, p);
    REQUIRE(status == 200);
    return json::parse(body).at("payload");
  };
  CHECK(get("/v1/task/fault_diagnosis", LayerId::Task, "wf1/II/1").at("verdict") == "out_of_memory");
  CHECK(get("/v1/task/fault_diagnosis", LayerId::Task, "wf1/II/0").at("verdict") == "none");
  const auto metrics = get("/v1/task/low_level_task_metrics", LayerId::Task, "wf1/II/1");
  CHECK(metrics.at("exit") == 137);
  CHECK(get("/v1/task/resource_consumption_for_code_parts", LayerId::Task, "wf1/I/0").size() == 3);
  const auto errors = get("/v1/task/application_logs", LayerId::Task, "wf1/II/1", {{"min_level", "error"}});
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].at("level") == "error");
  CHECK(get("/v1/task/application_logs", LayerId::Task, "wf1/I/0").size() >= 3);

  const auto report = get("/v1/workflow/execution_report", LayerId::Workflow, "run1");
  CHECK(report.at("final_state") == "failed");
  CHECK(report.at("failed") == 1);
  CHECK(get("/v1/workflow/graphical_representation", LayerId::Workflow, "run1")
            .at("dot")
            .get<std::string>()
            .starts_with("digraph"));
  CHECK(get("/v1/workflow/workflow_specification", LayerId::Workflow, "run1").at("tasks").size() == 6);

  const auto series = get("/v1/machine/used_resources", LayerId::Machine, "node01", {{"from", "0"}, {"to", "2000"}});
  CHECK(series.size() == 3);
  CHECK(get("/v1/resource_manager/running_workflows", LayerId::ResourceManager, "").empty());
}

TEST_CASE("features that need finished work answer 409 while it runs") {
  Simulation sim(testsupport::fixture_scenario("fig1.scenario"));
  QueryEngine engine(TopologyMode::WorkflowAware);
  engine.attach(sim);
  sim.step();
  sim.step();
  CHECK(engine.handle("/v1/workflow/execution_report", params(LayerId::Workflow, "run1")).first == 409);
  CHECK(engine.handle("/v1/task/fault_diagnosis", params(LayerId::Task, "wf1/I/0")).first == 409);
  CHECK(engine.handle("/v1/task/task_duration", params(LayerId::Task, "wf1/VI/0")).first == 409);
  const auto running = json::parse(
      engine.handle("/v1/task/task_duration", params(LayerId::Task, "wf1/I/0")).second);
  CHECK(running.at("payload").at("running") == true);
  const auto workflows = json::parse(
      engine.handle("/v1/resource_manager/running_workflows", params(LayerId::ResourceManager)).second);
  REQUIRE(workflows.at("payload").size() == 1);
  CHECK(workflows.at("payload")[0].at("run_id") == "run1");
  sim.run();
  CHECK(engine.handle("/v1/workflow/execution_report", params(LayerId::Workflow, "run1")).first == 200);
}

TEST_CASE("stored runs are served from the run store") {
  const auto dir = std::filesystem::temp_directory_path() / "stratus-query-store";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  RunStore store(dir / "runs.log");
  {
    Simulation sim(testsupport::fixture_scenario("fig1.scenario"), "wf1-0001");
    sim.run();
    store.append(sim.workflow_engine().snapshot("wf1-0001"));
  }
  QueryEngine engine(TopologyMode::WorkflowAware);
  engine.attach(store);
  const auto [status, body] = engine.handle("/v1/workflow/previous_executions", params(LayerId::Workflow, "wf1-0001"));
  REQUIRE(status == 200);
  CHECK(json::parse(body).at("payload").size() == 1);
  CHECK(engine.handle("/v1/workflow/graphical_representation", params(LayerId::Workflow, "wf1-0001")).first == 404);
  const auto feed = engine.live_progress_stream("wf1-0001");
  CHECK(feed->closed());
  REQUIRE(feed->history().size() == 1);
  CHECK(feed->history()[0].status.state == RunState::Succeeded);
  CHECK_THROWS_AS(engine.live_progress_stream("wf1-0002"), UnknownRun);
  CHECK(engine.handle("/v1/resource_manager/infrastructure_status", params(LayerId::ResourceManager)).first == 404);
  std::filesystem::remove_all(dir);
}

TEST_CASE("progress feed deduplicates and closes once") {
  ProgressFeed feed;
  WorkflowStatus s;
  s.total = 2;
  feed.publish(0, s);
  feed.publish(5, s);
  s.finished = 1;
  s.progress = 0.5;
  feed.publish(7, s);
  CHECK(feed.history().size() == 2);
  std::size_t cursor = 0;
  std::vector<ProgressRecord> got;
  CHECK(feed.wait_next(cursor, got, std::chrono::milliseconds(10)));
  CHECK(got.size() == 2);
  CHECK(feed.wait_next(cursor, got, std::chrono::milliseconds(10)));
  CHECK(got.size() == 2);
  feed.close();
  feed.close();
  CHECK(feed.closed());
  CHECK_FALSE(feed.wait_next(cursor, got, std::chrono::milliseconds(10)));
}

TEST_CASE("live stream equals the status replayed from the event log") {
  for (const char* name : {"fig1.scenario", "fault-exit.scenario", "fault-machine.scenario", "fig1-32.scenario"}) {
    CAPTURE(name);
    Simulation sim(testsupport::fixture_scenario(name));
    QueryEngine engine(sim.scenario().topology);
    engine.attach(sim);
    const auto feed = engine.live_progress_stream("run1");
    sim.run();
    CHECK(feed->closed());
    const auto records = feed->history();
    CHECK(records == testsupport::replay_progress(sim.events(), sim.scenario().workflow,
                                                  sim.scenario().input_count));
    for (std::size_t i = 1; i < records.size(); ++i) {
      CHECK(records[i - 1].status.finished <= records[i].status.finished);
      CHECK(records[i - 1].t_ms <= records[i].t_ms);
    }
    CHECK(records.back().status.state == sim.result().run.final_state);
    const auto snapshot = parse_ndjson(
        engine.handle("/v1/workflow/progress_stream", params(LayerId::Workflow, "run1")).second);
    CHECK(snapshot == records);
  }
}

TEST_CASE("HTTP serving with a live chunked stream") {
  Simulation sim(testsupport::fixture_scenario("fig1.scenario"));
  QueryEngine engine(TopologyMode::WorkflowAware);
  engine.attach(sim);
  QueryServer server(engine);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(10, 0);
  auto denied = client.Get("/v1/workflow/graphical_representation?as_layer=resource_manager&subject=run1");
  REQUIRE(denied);
  CHECK(denied->status == 403);
  CHECK(json::parse(denied->body).size() == 1);

  std::string streamed;
  std::mutex mu;
  std::atomic<int> chunks{0};
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    c.Get("/v1/workflow/progress_stream?as_layer=workflow&subject=run1",
          [&](const char* data, std::size_t n) {
            std::lock_guard<std::mutex> lock(mu);
            streamed.append(data, n);
            ++chunks;
            return true;
          });
  });
  sim.step();
  for (int i = 0; i < 500 && chunks.load() == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  CHECK(chunks.load() >= 1);
  CHECK_FALSE(sim.finished());
  sim.run();
  reader.join();

  const auto records = parse_ndjson(streamed);
  CHECK(records == testsupport::replay_progress(sim.events(), sim.scenario().workflow,
                                                sim.scenario().input_count));
  CHECK(records.back().status.state == RunState::Succeeded);

  auto ok = client.Get("/v1/task/task_status?as_layer=machine&subject=wf1/II/2");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(json::parse(ok->body).at("payload").at("state") == "succeeded");
  server.stop();
}

TEST_CASE("bind addresses") {
  CHECK(parse_bind_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK_THROWS_AS(parse_bind_address("localhost"), Error);
  CHECK_THROWS_AS(parse_bind_address("h:99999"), Error);
}
