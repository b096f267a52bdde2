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

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "stratus/blueprint.hpp"
#include "stratus/query_service.hpp"
#include "stratus/simulator.hpp"
#include "stratus/workflow.hpp"

namespace fs = std::filesystem;
using namespace stratus;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRunFailed = 2;
constexpr int kExitUsage = 64;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

fs::path out_root() {
  if (const char* env = std::getenv("STRATUS_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "stratus-out";
}

fs::path store_path(const std::string& flag) {
  if (!flag.empty()) {
    return flag;
  }
  if (const char* env = std::getenv("STRATUS_STORE"); env != nullptr && *env != '\0') {
    return env;
  }
  return out_root() / "runs.log";
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << content;
}

TopologyMode topology_arg(const std::string& s) {
  auto t = parse_topology(s);
  if (!t) {
    throw Error("topology must be workflow-aware or disjoint, got '" + s + "'");
  }
  return *t;
}

std::string next_run_id(const RunStore& store, const std::string& workflow_id) {
  std::size_t n = 1;
  for (const auto& r : store.load_all()) {
    if (r.workflow_id == workflow_id) {
      ++n;
    }
  }
  std::ostringstream os;
  os << workflow_id << '-' << std::setw(4) << std::setfill('0') << n;
  return os.str();
}

std::string samples_tsv(const std::vector<MachineSample>& samples) {
  std::string out = "t_ms\tmachine_id\tcpu_cores\tmemory_bytes\tdisk_bytes\n";
  for (const auto& s : samples) {
    std::ostringstream line;
    line << s.t_ms << '\t' << s.machine_id << '\t' << s.used_cpu_cores << '\t'
         << s.used_memory_bytes << '\t' << s.used_disk_bytes << '\n';
    out += line.str();
  }
  return out;
}

std::string render_status(const RunRecord& run) {
  const auto s = workflow_status(run);
  std::ostringstream os;
  os << std::left << std::setw(10) << "run" << run.run_id << '\n'
     << std::setw(10) << "workflow" << run.workflow_id << '\n'
     << std::setw(10) << "state" << to_string(s.state) << '\n'
     << std::setw(10) << "finished" << s.finished << '/' << s.total << '\n'
     << std::setw(10) << "progress" << std::fixed << std::setprecision(3) << s.progress << '\n'
     << std::setw(10) << "failures" << s.failures << '\n';
  return os.str();
}

struct RunOptions {
  std::string input;
  std::string cluster;
  std::optional<std::uint32_t> inputs;
  std::optional<std::uint64_t> seed;
  std::string topology;
  std::string run_id;
  std::string store;
};

Scenario build_scenario(const RunOptions& o) {
  Scenario s;
  const fs::path input(o.input);
  if (input.extension() == ".scenario") {
    s = load_scenario(input);
  } else if (input.extension() == ".wf") {
    if (o.cluster.empty()) {
      throw Error("running a .wf file needs --cluster <file.cluster>");
    }
    s.workflow = parse_workflow(read_file(input));
    s.cluster = parse_cluster(read_file(o.cluster));
  } else {
    throw Error("expected a .scenario or .wf file, got '" + o.input + "'");
  }
  if (o.inputs) {
    s.input_count = *o.inputs;
  }
  if (o.seed) {
    s.seed = *o.seed;
  }
  if (!o.topology.empty()) {
    s.topology = topology_arg(o.topology);
  }
  return s;
}

int cmd_run(const RunOptions& o) {
  auto scenario = build_scenario(o);
  RunStore store(store_path(o.store));
  const auto run_id = o.run_id.empty() ? next_run_id(store, scenario.workflow.workflow_id) : o.run_id;
  Simulation sim(std::move(scenario), run_id);
  sim.run();
  const auto result = sim.result();

  const auto dir = out_root() / run_id;
  write_file(dir / ("trace-" + run_id + ".tsv"), result.trace_file());
  write_file(dir / ("events-" + run_id + ".log"), result.event_log());
  write_file(dir / ("samples-" + run_id + ".tsv"), samples_tsv(result.samples));
  write_file(dir / ("logs-" + run_id + ".tsv"), export_logs(result.logs));
  store.append(result.run);

  const auto report = execution_report(result.run);
  std::cout << render_status(result.run) << std::left << std::setw(10) << "makespan"
            << report.makespan_ms << " ms\n"
            << std::setw(10) << "output" << dir.string() << '\n';
  return result.run.final_state == RunState::Succeeded ? kExitOk : kExitRunFailed;
}

RunRecord stored_run(const std::string& run_id, const std::string& store_flag) {
  RunStore store(store_path(store_flag));
  auto run = store.find(run_id);
  if (!run) {
    throw Error("run '" + run_id + "' not found in " + store.path().string());
  }
  return *run;
}

int cmd_serve(const std::string& bind, const std::string& topology, const std::string& scenario_path,
              const std::string& store_flag, int pace_ms) {
  const auto [host, port] = parse_bind_address(bind);
  const auto mode = topology_arg(topology);
  RunStore store(store_path(store_flag));
  QueryEngine engine(mode);
  engine.attach(store);

  std::unique_ptr<Simulation> sim;
  if (!scenario_path.empty()) {
    auto scenario = load_scenario(scenario_path);
    scenario.topology = mode;
    const auto run_id = next_run_id(store, scenario.workflow.workflow_id);
    sim = std::make_unique<Simulation>(std::move(scenario), run_id);
    engine.attach(*sim);
  }

  QueryServer server(engine);
  const int bound = server.start(host, port);
  std::cout << "listening on " << host << ':' << bound << " (" << to_string(mode) << ")\n";
  if (sim) {
    std::cout << "live run " << sim->run_id() << '\n';
  }
  std::cout.flush();

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  bool stored = false;
  while (!g_stop) {
    if (sim && !sim->finished()) {
      sim->step();
      std::this_thread::sleep_for(std::chrono::milliseconds(pace_ms));
      continue;
    }
    if (sim && !stored) {
      store.append(sim->result().run);
      stored = true;
      std::cout << "run " << sim->run_id() << " finished\n" << std::flush;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.stop();
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratus: layered monitoring for simulated workflow clusters", "stratus"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate a workflow run and record its outputs");
  run->add_option("input", run_opts.input, ".scenario file, or .wf file with --cluster")->required();
  run->add_option("--cluster", run_opts.cluster, "Cluster file when running a .wf directly");
  run->add_option("--inputs", run_opts.inputs, "Input item count for scatter tasks");
  run->add_option("--seed", run_opts.seed, "Root random seed");
  run->add_option("--topology", run_opts.topology, "workflow-aware or disjoint");
  run->add_option("--run-id", run_opts.run_id, "Run id (default <workflow>-NNNN)");
  run->add_option("--store", run_opts.store, "Run store path");

  std::string run_id;
  std::string store_flag;
  auto* status = app.add_subcommand("status", "Print the status of a stored run");
  status->add_option("run_id", run_id)->required();
  status->add_option("--store", store_flag, "Run store path");

  auto* report = app.add_subcommand("report", "Print the execution report of a stored run");
  report->add_option("run_id", run_id)->required();
  report->add_option("--store", store_flag, "Run store path");

  std::string wf_path;
  auto* dot = app.add_subcommand("dot", "Write a workflow as Graphviz DOT");
  dot->add_option("workflow", wf_path)->required();

  std::string topology = "workflow-aware";
  std::string matrix_file;
  auto* matrix = app.add_subcommand("matrix", "Print the effective access matrix");
  matrix->add_option("--topology", topology, "workflow-aware or disjoint");
  matrix->add_option("--matrix-file", matrix_file, "Override file applied on top of the default");

  std::string profile_path;
  auto* classify = app.add_subcommand("classify", "Summarize a capability profile per layer");
  classify->add_option("profile", profile_path)->required();

  std::string bind = "127.0.0.1:8080";
  std::string scenario_path;
  int pace_ms = 0;
  auto* serve = app.add_subcommand("serve", "Serve the monitoring API");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--topology", topology, "workflow-aware or disjoint");
  serve->add_option("--scenario", scenario_path, "Simulate this scenario live while serving");
  serve->add_option("--store", store_flag, "Run store path");
  serve->add_option("--pace-ms", pace_ms, "Wall-clock delay between simulation steps")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run) {
      return cmd_run(run_opts);
    }
    if (*status) {
      std::cout << render_status(stored_run(run_id, store_flag));
      return kExitOk;
    }
    if (*report) {
      const auto r = execution_report(stored_run(run_id, store_flag));
      std::cout << render_report(r);
      const auto path = out_root() / run_id / ("report-" + run_id + ".json");
      write_file(path, to_json(r).dump(2) + "\n");
      return kExitOk;
    }
    if (*dot) {
      std::cout << export_dot(parse_workflow(read_file(wf_path)));
      return kExitOk;
    }
    if (*matrix) {
      const auto m = matrix_file.empty() ? default_access_matrix()
                                         : parse_access_matrix(read_file(matrix_file));
      std::cout << render_matrix(m, topology_arg(topology));
      return kExitOk;
    }
    if (*classify) {
      std::cout << render_coverage(classify_capabilities(parse_profile(read_file(profile_path))));
      return kExitOk;
    }
    if (*serve) {
      return cmd_serve(bind, topology, scenario_path, store_flag, pace_ms);
    }
  } catch (const std::exception& e) {
    std::cerr << "stratus: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
