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

// Uniform monitoring API: every feature of every layer behind one path
// grammar, filtered by the access matrix, readable while a run is live.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stratus/blueprint.hpp"
#include "stratus/simulator.hpp"
#include "stratus/workflow.hpp"

namespace httplib {
class Server;
}

namespace stratus {

struct QueryWindow {
  SimTime from_ms = 0;
  SimTime to_ms = 0;
};

struct QueryRequest {
  LayerId as_layer = LayerId::Task;
  FeatureKey feature = FeatureKey::TaskStatus;
  std::optional<std::string> subject;
  std::optional<QueryWindow> window;
  /// Only read by application_logs.
  std::optional<LogLevel> min_level;
};

struct QueryResponse {
  FeatureKey feature = FeatureKey::TaskStatus;
  std::string subject;
  nlohmann::json payload;
  SimTime served_at_ms = 0;

  nlohmann::json to_json() const;
};

struct AuthDecision {
  bool allowed = false;
  std::string reason;

  explicit operator bool() const noexcept { return allowed; }
};

nlohmann::json to_json(const WorkflowStatus& status);
nlohmann::json to_json(const ExecutionReport& report);
nlohmann::json to_json(const RunSummary& summary);

AuthDecision authorize(const QueryRequest& request, const AccessMatrix& matrix,
                       TopologyMode topology);

/// Carries the HTTP status it maps to.
class QueryError : public Error {
public:
  QueryError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

private:
  int status_;
};

class UnknownRun : public QueryError {
public:
  explicit UnknownRun(const std::string& id) : QueryError(404, "unknown run '" + id + "'") {}
};

struct ProgressRecord {
  SimTime t_ms = 0;
  WorkflowStatus status;

  nlohmann::json to_json() const;
  friend bool operator==(const ProgressRecord&, const ProgressRecord&) = default;
};

/// Append-only status history of one run. Each subscriber keeps its own
/// cursor; close() happens once, when the run turns terminal.
class ProgressFeed {
public:
  /// Appends unless the status equals the last one published.
  void publish(SimTime t, const WorkflowStatus& status);
  void close();

  bool closed() const;
  std::vector<ProgressRecord> history() const;

  /// Blocks until records past `cursor` exist, the feed closes or `timeout`
  /// elapses. Appends new records to `out` and advances `cursor`. Returns
  /// false once the feed is closed and fully drained.
  bool wait_next(std::size_t& cursor, std::vector<ProgressRecord>& out,
                 std::chrono::milliseconds timeout);

private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<ProgressRecord> records_;
  bool closed_ = false;
};

/// Serves feature reads over an optional live simulation and an optional
/// run store. Both must outlive the engine.
class QueryEngine {
public:
  QueryEngine(TopologyMode topology, AccessMatrix matrix = default_access_matrix());

  /// Hooks the simulation's status observer. Call before the run starts.
  void attach(Simulation& sim);
  void attach(const RunStore& store);

  TopologyMode topology() const noexcept { return topology_; }
  const AccessMatrix& matrix() const noexcept { return matrix_; }

  /// Throws QueryError (403 on access denial, 400/404/409 otherwise).
  QueryResponse query(const QueryRequest& request) const;

  /// Live feed for a run of the attached simulation; stored runs yield a
  /// closed feed holding their final status. Throws UnknownRun.
  std::shared_ptr<ProgressFeed> live_progress_stream(const std::string& run_id) const;

  /// Full HTTP routing minus the socket: path plus query parameters in,
  /// status code and JSON body out.
  std::pair<int, std::string> handle(const std::string& path,
                                     const std::map<std::string, std::string>& params) const;

private:
  std::optional<RunRecord> find_run(const std::string& run_id) const;
  std::shared_ptr<const WorkflowSpec> spec_of(const RunRecord& run) const;

  nlohmann::json resource_manager_feature(FeatureKey f) const;
  nlohmann::json workflow_feature(FeatureKey f, const std::string& run_id) const;
  nlohmann::json machine_feature(const QueryRequest& r, const std::string& machine_id) const;
  nlohmann::json task_feature(const QueryRequest& r, const std::string& task_id) const;

  TopologyMode topology_;
  AccessMatrix matrix_;
  Simulation* sim_ = nullptr;
  const RunStore* store_ = nullptr;
  std::shared_ptr<ProgressFeed> live_feed_;
};

/// Decodes `GET /v1/<layer>/<feature>` into a request. Throws QueryError.
QueryRequest parse_query(const std::string& path, const std::map<std::string, std::string>& params);

/// HTTP front end over a QueryEngine.
class QueryServer {
public:
  explicit QueryServer(const QueryEngine& engine);
  ~QueryServer();

  QueryServer(const QueryServer&) = delete;
  QueryServer& operator=(const QueryServer&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and starts serving on a
  /// background thread. Returns the bound port; throws Error on failure.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

private:
  void install_routes();

  const QueryEngine& engine_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// Splits `host:port`. Throws Error when malformed.
std::pair<std::string, int> parse_bind_address(const std::string& address);

} // namespace stratus
