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

#include "stratus/query_service.hpp"

#include <algorithm>
#include <limits>

#include <httplib.h>

#include "text.hpp"

namespace stratus {

using nlohmann::json;

namespace {

constexpr std::string_view kPrefix = "/v1/";
constexpr std::string_view kStreamFeature = "progress_stream";

json resources_json(const Resources& r) {
  return {{"cpu_cores", r.cpu_cores}, {"memory_bytes", r.memory_bytes}, {"disk_bytes", r.disk_bytes}};
}

json request_json(const ResourceRequest& r) {
  return {{"cpu_cores", r.cpu_cores},
          {"memory_bytes", r.memory_bytes},
          {"disk_bytes", r.disk_bytes},
          {"max_runtime_ms", r.max_runtime_ms}};
}

json trace_json(const TaskTraceRecord& r) {
  return {{"task_id", r.task_id},
          {"status", r.status},
          {"exit", r.exit_code},
          {"submit_ms", r.submit_ms},
          {"start_ms", r.start_ms},
          {"end_ms", r.end_ms},
          {"duration_ms", r.duration_ms},
          {"cpu_pct", r.cpu_pct},
          {"rss_bytes", r.rss_bytes},
          {"rchar_bytes", r.rchar_bytes},
          {"wchar_bytes", r.wchar_bytes},
          {"syscr", r.syscall_read_count},
          {"syscw", r.syscall_write_count},
          {"cpu_wait_ms", r.cpu_wait_ms},
          {"pcache_hit", r.page_cache_hits},
          {"pcache_miss", r.page_cache_misses}};
}

std::string error_body(const std::string& message) { return json{{"error", message}}.dump(); }

std::optional<SimTime> param_time(const std::map<std::string, std::string>& params,
                                  const char* key) {
  auto it = params.find(key);
  if (it == params.end()) {
    return std::nullopt;
  }
  auto v = text::parse_number<SimTime>(it->second);
  if (!v) {
    throw QueryError(400, std::string("invalid '") + key + "' parameter");
  }
  return v;
}

/// Accepts `status` as shorthand for the layer's own status feature.
std::optional<FeatureKey> resolve_feature(LayerId layer, std::string_view name) {
  if (name == "status") {
    switch (layer) {
    case LayerId::ResourceManager: return FeatureKey::InfrastructureStatus;
    case LayerId::Workflow: return FeatureKey::WorkflowStatus;
    case LayerId::Machine: return FeatureKey::MachineStatus;
    case LayerId::Task: return FeatureKey::TaskStatus;
    }
  }
  return parse_feature(name);
}

struct PathParts {
  LayerId layer;
  std::string feature;
};

PathParts split_path(const std::string& path) {
  if (path.rfind(kPrefix, 0) != 0) {
    throw QueryError(404, "unknown path '" + path + "'");
  }
  const auto rest = std::string_view(path).substr(kPrefix.size());
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos || rest.find('/', slash + 1) != std::string_view::npos) {
    throw QueryError(404, "path must be /v1/<layer>/<feature>");
  }
  auto layer = parse_layer(rest.substr(0, slash));
  if (!layer) {
    throw QueryError(404, "unknown layer '" + std::string(rest.substr(0, slash)) + "'");
  }
  return {*layer, std::string(rest.substr(slash + 1))};
}

} // namespace

json to_json(const WorkflowStatus& s) {
  return {{"state", to_string(s.state)},
          {"finished", s.finished},
          {"total", s.total},
          {"progress", s.progress},
          {"failures", s.failures}};
}

json to_json(const ExecutionReport& r) {
  json per = json::array();
  for (const auto& d : r.per_definition) {
    per.push_back({{"definition", d.definition},
                   {"count", d.count},
                   {"min_ms", d.min_ms},
                   {"mean_ms", d.mean_ms},
                   {"max_ms", d.max_ms}});
  }
  return {{"run_id", r.run_id},
          {"workflow_id", r.workflow_id},
          {"submission_ms", r.submission_ms},
          {"makespan_ms", r.makespan_ms},
          {"final_state", to_string(r.final_state)},
          {"total", r.total},
          {"succeeded", r.succeeded},
          {"failed", r.failed},
          {"per_definition", std::move(per)}};
}

json to_json(const RunSummary& s) {
  return {{"run_id", s.run_id},
          {"workflow_id", s.workflow_id},
          {"submission_ms", s.submission_ms},
          {"final_state", to_string(s.final_state)},
          {"makespan_ms", s.makespan_ms ? json(*s.makespan_ms) : json(nullptr)}};
}

json QueryResponse::to_json() const {
  return {{"feature", to_string(feature)},
          {"subject", subject},
          {"served_at_ms", served_at_ms},
          {"payload", payload}};
}

json ProgressRecord::to_json() const {
  auto j = stratus::to_json(status);
  j["t_ms"] = t_ms;
  return j;
}

AuthDecision authorize(const QueryRequest& request, const AccessMatrix& matrix,
                       TopologyMode topology) {
  if (access_allowed(matrix, request.as_layer, request.feature, topology)) {
    return {true, {}};
  }
  std::string reason = "layer " + std::string(to_string(request.as_layer)) +
                       " may not read feature " + std::string(to_string(request.feature));
  if (matrix.permitted(request.feature).contains(request.as_layer)) {
    reason += " in " + std::string(to_string(topology)) +
              " topology (workflow features are hidden from the resource manager)";
  } else {
    reason += " (permitted:";
    for (auto l : matrix.permitted(request.feature).members()) {
      reason += ' ';
      reason += to_string(l);
    }
    reason += ')';
  }
  return {false, std::move(reason)};
}

// -- progress feed -----------------------------------------------------------

void ProgressFeed::publish(SimTime t, const WorkflowStatus& status) {
  {
    std::lock_guard lock(mutex_);
    if (closed_ || (!records_.empty() && records_.back().status == status)) {
      return;
    }
    records_.push_back({t, status});
  }
  cv_.notify_all();
}

void ProgressFeed::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool ProgressFeed::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::vector<ProgressRecord> ProgressFeed::history() const {
  std::lock_guard lock(mutex_);
  return records_;
}

bool ProgressFeed::wait_next(std::size_t& cursor, std::vector<ProgressRecord>& out,
                             std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || records_.size() > cursor; });
  for (; cursor < records_.size(); ++cursor) {
    out.push_back(records_[cursor]);
  }
  return !closed_;
}

// -- engine ------------------------------------------------------------------

QueryEngine::QueryEngine(TopologyMode topology, AccessMatrix matrix)
    : topology_(topology), matrix_(std::move(matrix)) {}

void QueryEngine::attach(Simulation& sim) {
  sim_ = &sim;
  live_feed_ = std::make_shared<ProgressFeed>();
  sim.set_status_observer([feed = live_feed_, id = sim.run_id()](
                              const std::string& run_id, SimTime t, const WorkflowStatus& s) {
    if (run_id != id) {
      return;
    }
    feed->publish(t, s);
    if (s.state != RunState::Running) {
      feed->close();
    }
  });
}

void QueryEngine::attach(const RunStore& store) { store_ = &store; }

std::optional<RunRecord> QueryEngine::find_run(const std::string& run_id) const {
  if (sim_ != nullptr && sim_->workflow_engine().has_run(run_id)) {
    return sim_->workflow_engine().snapshot(run_id);
  }
  if (store_ != nullptr) {
    return store_->find(run_id);
  }
  return std::nullopt;
}

std::shared_ptr<const WorkflowSpec> QueryEngine::spec_of(const RunRecord& run) const {
  if (sim_ != nullptr && sim_->spec()->workflow_id == run.workflow_id) {
    return sim_->spec();
  }
  return nullptr;
}

std::shared_ptr<ProgressFeed> QueryEngine::live_progress_stream(const std::string& run_id) const {
  if (sim_ != nullptr && run_id == sim_->run_id()) {
    return live_feed_;
  }
  auto run = find_run(run_id);
  if (!run) {
    throw UnknownRun(run_id);
  }
  auto feed = std::make_shared<ProgressFeed>();
  SimTime t = run->submission_ms;
  for (const auto& inst : run->instances) {
    if (inst.end_ms) {
      t = std::max(t, *inst.end_ms);
    }
  }
  feed->publish(t, workflow_status(*run));
  feed->close();
  return feed;
}

json QueryEngine::resource_manager_feature(FeatureKey f) const {
  if (sim_ == nullptr) {
    throw QueryError(404, "no live cluster attached");
  }
  const auto& rm = sim_->resman();
  switch (f) {
  case FeatureKey::InfrastructureStatus: {
    const auto s = rm.infrastructure_status();
    return {{"machines", s.machines},
            {"healthy", s.healthy},
            {"maintenance", s.maintenance},
            {"unhealthy", s.unhealthy},
            {"total_capacity", resources_json(s.total_capacity)},
            {"used_capacity", resources_json(s.used_capacity)},
            {"queue_depth", s.queue_depth},
            {"running_tasks", s.running_tasks}};
  }
  case FeatureKey::FileSystemStatus: {
    const auto fs = rm.filesystem_status();
    return {{"total_bytes", fs.total_bytes}, {"used_bytes", fs.used_bytes}, {"healthy", fs.healthy}};
  }
  case FeatureKey::RunningWorkflows: {
    json out = json::array();
    for (const auto& w : rm.running_workflows()) {
      out.push_back({{"run_id", w.run_id}, {"workflow_id", w.workflow_id}, {"state", to_string(w.state)}});
    }
    return out;
  }
  default: break;
  }
  throw QueryError(404, "not a resource manager feature");
}

json QueryEngine::workflow_feature(FeatureKey f, const std::string& run_id) const {
  auto run = find_run(run_id);
  if (!run) {
    throw UnknownRun(run_id);
  }
  auto need_spec = [&] {
    auto spec = spec_of(*run);
    if (!spec) {
      throw QueryError(404, "specification of run '" + run_id + "' is not loaded");
    }
    return spec;
  };
  switch (f) {
  case FeatureKey::WorkflowStatus: return to_json(workflow_status(*run));
  case FeatureKey::WorkflowSpecification: {
    const auto spec = need_spec();
    json tasks = json::array();
    for (const auto& t : spec->tasks) {
      auto j = request_json(t.requested);
      j["name"] = t.name;
      j["scatter"] = t.scatter;
      j["model"] = t.model_key;
      tasks.push_back(std::move(j));
    }
    json edges = json::array();
    for (const auto& e : spec->edges) {
      edges.push_back({e.from, e.to});
    }
    return {{"workflow_id", spec->workflow_id}, {"tasks", std::move(tasks)}, {"edges", std::move(edges)}};
  }
  case FeatureKey::GraphicalRepresentation:
    return {{"format", "dot"}, {"dot", export_dot(*need_spec())}};
  case FeatureKey::WorkflowId:
    return {{"run_id", run->run_id}, {"workflow_id", run->workflow_id}};
  case FeatureKey::ExecutionReport:
    try {
      return to_json(execution_report(*run));
    } catch (const ReportOnRunningRun& e) {
      throw QueryError(409, e.what());
    }
  case FeatureKey::PreviousExecutions: {
    json out = json::array();
    if (store_ != nullptr) {
      for (const auto& s : list_previous_executions(*store_, run->workflow_id)) {
        out.push_back(to_json(s));
      }
    }
    return out;
  }
  default: break;
  }
  throw QueryError(404, "not a workflow feature");
}

json QueryEngine::machine_feature(const QueryRequest& r, const std::string& id) const {
  if (sim_ == nullptr || !sim_->machines().contains(id)) {
    throw QueryError(404, "unknown machine '" + id + "'");
  }
  const auto& mc = sim_->machines();
  const auto d = mc.descriptor(id);
  switch (r.feature) {
  case FeatureKey::MachineStatus:
    return {{"machine_id", id}, {"status", to_string(mc.status(id))}};
  case FeatureKey::MachineType:
    return {{"machine_id", id}, {"machine_type", to_string(d.machine_type)}};
  case FeatureKey::HardwareSpecification: {
    json parts = json::array();
    for (const auto& p : d.hardware.disk_partitions) {
      parts.push_back({{"name", p.name}, {"bytes", p.bytes}});
    }
    return {{"cpu_architecture", d.hardware.cpu_architecture},
            {"cpu_model", d.hardware.cpu_model},
            {"memory_clock_mhz", d.hardware.memory_clock_mhz},
            {"capacity", resources_json(d.capacity)},
            {"disk_partitions", std::move(parts)}};
  }
  case FeatureKey::AvailableResources: {
    const auto t = r.window ? r.window->to_ms : sim_->now();
    auto j = resources_json(mc.available_resources(id, t));
    j["t_ms"] = t;
    return j;
  }
  case FeatureKey::UsedResources: {
    const auto w = r.window.value_or(QueryWindow{0, std::numeric_limits<SimTime>::max()});
    json out = json::array();
    try {
      for (const auto& s : mc.query_series(id, w.from_ms, w.to_ms)) {
        out.push_back({{"t_ms", s.t_ms},
                       {"cpu_cores", s.used_cpu_cores},
                       {"memory_bytes", s.used_memory_bytes},
                       {"disk_bytes", s.used_disk_bytes}});
      }
    } catch (const InvalidWindow& e) {
      throw QueryError(400, e.what());
    }
    return out;
  }
  default: break;
  }
  throw QueryError(404, "not a machine feature");
}

json QueryEngine::task_feature(const QueryRequest& r, const std::string& id) const {
  if (sim_ == nullptr || !sim_->tasks().knows(id)) {
    throw QueryError(404, "unknown task '" + id + "'");
  }
  const auto& engine = sim_->workflow_engine();
  const auto run_id = engine.run_of_task(id);
  if (!run_id) {
    throw QueryError(404, "task '" + id + "' has not been submitted");
  }
  const auto run = engine.snapshot(*run_id);
  const auto* inst = run.find(id);
  const auto& def = *sim_->spec()->find(inst->definition);
  const auto trace = sim_->tasks().trace(id);
  auto need_trace = [&] {
    if (!trace) {
      throw QueryError(409, "task '" + id + "' has not finished");
    }
    return *trace;
  };

  switch (r.feature) {
  case FeatureKey::TaskStatus: {
    json j{{"task_id", id}, {"state", to_string(inst->state)}};
    j["machine"] = inst->machine ? json(*inst->machine) : json(nullptr);
    return j;
  }
  case FeatureKey::RequestedResources: return request_json(def.requested);
  case FeatureKey::ConsumedResources: {
    const auto t = need_trace();
    const auto u = consumed_vs_requested(t, def.requested);
    return {{"cpu_pct", t.cpu_pct},
            {"rss_bytes", t.rss_bytes},
            {"rchar_bytes", t.rchar_bytes},
            {"wchar_bytes", t.wchar_bytes},
            {"cpu_ratio", u.cpu_ratio},
            {"memory_ratio", u.memory_ratio},
            {"runtime_ratio", u.runtime_ratio}};
  }
  case FeatureKey::ResourceConsumptionForCodeParts: {
    json out = json::array();
    for (const auto& p : sim_->tasks().code_parts(id)) {
      out.push_back({{"part", p.part_name},
                     {"duration_ms", p.duration_ms},
                     {"peak_memory_bytes", p.peak_memory_bytes}});
    }
    return out;
  }
  case FeatureKey::TaskId:
    return {{"task_id", id},
            {"run_id", *run_id},
            {"workflow_id", run.workflow_id},
            {"definition", inst->definition},
            {"index", inst->index}};
  case FeatureKey::ApplicationLogs: {
    json out = json::array();
    for (const auto& e : sim_->tasks().query_logs(id, r.min_level.value_or(LogLevel::Debug))) {
      if (r.window && (e.t_ms < r.window->from_ms || e.t_ms > r.window->to_ms)) {
        continue;
      }
      out.push_back({{"t_ms", e.t_ms}, {"level", to_string(e.level)}, {"message", e.message}});
    }
    return out;
  }
  case FeatureKey::TaskDuration: {
    if (trace) {
      return {{"running", false},
              {"start_ms", trace->start_ms},
              {"end_ms", trace->end_ms},
              {"duration_ms", trace->duration_ms}};
    }
    if (inst->start_ms) {
      const auto now = std::max(sim_->now(), *inst->start_ms);
      return {{"running", true}, {"start_ms", *inst->start_ms}, {"elapsed_ms", now - *inst->start_ms}};
    }
    throw QueryError(409, "task '" + id + "' has not started");
  }
  case FeatureKey::LowLevelTaskMetrics: return trace_json(need_trace());
  case FeatureKey::FaultDiagnosis: {
    const auto t = need_trace();
    const auto status = inst->machine ? sim_->machines().status_at(*inst->machine, t.end_ms)
                                      : MachineStatus::Healthy;
    const auto d = diagnose(t, def.requested, status);
    return {{"verdict", to_string(d.verdict)}, {"evidence", d.evidence}};
  }
  default: break;
  }
  throw QueryError(404, "not a task feature");
}

QueryResponse QueryEngine::query(const QueryRequest& request) const {
  if (auto auth = authorize(request, matrix_, topology_); !auth) {
    throw QueryError(403, auth.reason);
  }
  QueryResponse resp;
  resp.feature = request.feature;
  resp.served_at_ms = sim_ != nullptr ? sim_->now() : 0;
  const auto owner = owning_layer(request.feature);
  if (owner == LayerId::ResourceManager) {
    resp.payload = resource_manager_feature(request.feature);
    return resp;
  }
  if (!request.subject || request.subject->empty()) {
    throw QueryError(400, "feature " + std::string(to_string(request.feature)) +
                              " requires a subject");
  }
  resp.subject = *request.subject;
  switch (owner) {
  case LayerId::Workflow: resp.payload = workflow_feature(request.feature, resp.subject); break;
  case LayerId::Machine: resp.payload = machine_feature(request, resp.subject); break;
  default: resp.payload = task_feature(request, resp.subject); break;
  }
  return resp;
}

QueryRequest parse_query(const std::string& path, const std::map<std::string, std::string>& params) {
  const auto parts = split_path(path);
  auto feature = resolve_feature(parts.layer, parts.feature);
  if (!feature || owning_layer(*feature) != parts.layer) {
    throw QueryError(404, "no feature '" + parts.feature + "' on layer " +
                              std::string(to_string(parts.layer)));
  }
  QueryRequest r;
  r.feature = *feature;
  auto as = params.find("as_layer");
  if (as == params.end()) {
    throw QueryError(400, "missing 'as_layer' parameter");
  }
  auto layer = parse_layer(as->second);
  if (!layer) {
    throw QueryError(400, "invalid 'as_layer' parameter '" + as->second + "'");
  }
  r.as_layer = *layer;
  if (auto s = params.find("subject"); s != params.end()) {
    r.subject = s->second;
  }
  const auto from = param_time(params, "from");
  const auto to = param_time(params, "to");
  if (from || to) {
    r.window = QueryWindow{from.value_or(0), to.value_or(std::numeric_limits<SimTime>::max())};
    if (r.window->from_ms > r.window->to_ms) {
      throw QueryError(400, "'from' is after 'to'");
    }
  }
  if (auto m = params.find("min_level"); m != params.end()) {
    r.min_level = parse_log_level(m->second);
    if (!r.min_level) {
      throw QueryError(400, "invalid 'min_level' parameter '" + m->second + "'");
    }
  }
  return r;
}

std::pair<int, std::string> QueryEngine::handle(
    const std::string& path, const std::map<std::string, std::string>& params) const {
  try {
    if (path == std::string(kPrefix) + "workflow/" + std::string(kStreamFeature)) {
      auto req = parse_query(std::string(kPrefix) + "workflow/workflow_status", params);
      if (auto auth = authorize(req, matrix_, topology_); !auth) {
        throw QueryError(403, auth.reason);
      }
      if (!req.subject) {
        throw QueryError(400, "progress_stream requires a subject");
      }
      std::string body;
      for (const auto& rec : live_progress_stream(*req.subject)->history()) {
        body += rec.to_json().dump();
        body += '\n';
      }
      return {200, body};
    }
    return {200, query(parse_query(path, params)).to_json().dump()};
  } catch (const QueryError& e) {
    return {e.status(), error_body(e.what())};
  } catch (const Error& e) {
    return {404, error_body(e.what())};
  }
}

// -- HTTP --------------------------------------------------------------------

std::pair<std::string, int> parse_bind_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error("bind address must be <host>:<port>, got '" + address + "'");
  }
  auto port = text::parse_number<int>(std::string_view(address).substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) {
    throw Error("invalid port in bind address '" + address + "'");
  }
  return {address.substr(0, colon), *port};
}

QueryServer::QueryServer(const QueryEngine& engine)
    : engine_(engine), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

QueryServer::~QueryServer() { stop(); }

void QueryServer::install_routes() {
  const std::string stream_path = std::string(kPrefix) + "workflow/" + std::string(kStreamFeature);
  auto flatten = [](const httplib::Request& req) {
    std::map<std::string, std::string> params;
    for (const auto& [k, v] : req.params) {
      params.emplace(k, v);
    }
    return params;
  };

  server_->Get(stream_path, [this, flatten](const httplib::Request& req, httplib::Response& res) {
    const auto params = flatten(req);
    std::shared_ptr<ProgressFeed> feed;
    try {
      auto q = parse_query(std::string(kPrefix) + "workflow/workflow_status", params);
      if (auto auth = authorize(q, engine_.matrix(), engine_.topology()); !auth) {
        throw QueryError(403, auth.reason);
      }
      if (!q.subject) {
        throw QueryError(400, "progress_stream requires a subject");
      }
      feed = engine_.live_progress_stream(*q.subject);
    } catch (const QueryError& e) {
      res.status = e.status();
      res.set_content(error_body(e.what()), "application/json");
      return;
    }
    auto cursor = std::make_shared<std::size_t>(0);
    res.set_chunked_content_provider(
        "application/x-ndjson", [feed, cursor](std::size_t, httplib::DataSink& sink) {
          std::vector<ProgressRecord> batch;
          const bool open = feed->wait_next(*cursor, batch, std::chrono::milliseconds(200));
          for (const auto& rec : batch) {
            const auto line = rec.to_json().dump() + "\n";
            if (!sink.write(line.data(), line.size())) {
              return false;
            }
          }
          if (!open) {
            sink.done();
          }
          return true;
        });
  });

  server_->Get(R"(/v1/[^/]+/[^/]+)",
               [this, flatten](const httplib::Request& req, httplib::Response& res) {
                 auto [status, body] = engine_.handle(req.path, flatten(req));
                 res.status = status;
                 res.set_content(body, "application/json");
               });
}

int QueryServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void QueryServer::listen(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  server_->listen_after_bind();
}

void QueryServer::stop() {
  if (server_) {
    server_->stop();
  }
  if (thread_.joinable()) {
    thread_.join();
  }
}

} // namespace stratus
