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

#include "stratus/workflow.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "text.hpp"

namespace stratus {

using nlohmann::json;

// -- spec --------------------------------------------------------------------

const TaskDefinition* WorkflowSpec::find(std::string_view name) const noexcept {
  for (const auto& t : tasks) {
    if (t.name == name) {
      return &t;
    }
  }
  return nullptr;
}

std::vector<std::string> WorkflowSpec::predecessors(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    if (e.to == name) {
      out.push_back(e.from);
    }
  }
  return out;
}

std::vector<std::string> WorkflowSpec::successors(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    if (e.from == name) {
      out.push_back(e.to);
    }
  }
  return out;
}

namespace {

std::string join_path(const std::vector<std::string>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i != 0) {
      out += " -> ";
    }
    out += path[i];
  }
  return out;
}

bool valid_name(std::string_view name) {
  return !name.empty() && name.find_first_of("/\"\\=") == std::string_view::npos;
}

} // namespace

CycleError::CycleError(std::vector<std::string> path)
    : WorkflowError("cycle detected: " + join_path(path)), path_(std::move(path)) {}

void validate_dag(const WorkflowSpec& spec) {
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    if (!index.emplace(spec.tasks[i].name, i).second) {
      throw WorkflowError("duplicate task name '" + spec.tasks[i].name + "'");
    }
  }
  std::vector<std::vector<std::size_t>> succ(spec.tasks.size());
  for (const auto& e : spec.edges) {
    auto from = index.find(e.from);
    if (from == index.end()) {
      throw UnknownTask(e.from);
    }
    auto to = index.find(e.to);
    if (to == index.end()) {
      throw UnknownTask(e.to);
    }
    succ[from->second].push_back(to->second);
  }

  // Iterative DFS; gray nodes are on the current stack.
  enum class Color : std::uint8_t { White, Gray, Black };
  std::vector<Color> color(spec.tasks.size(), Color::White);
  struct Frame {
    std::size_t node;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (std::size_t root = 0; root < spec.tasks.size(); ++root) {
    if (color[root] != Color::White) {
      continue;
    }
    stack.push_back({root, 0});
    color[root] = Color::Gray;
    while (!stack.empty()) {
      auto& top = stack.back();
      if (top.next == succ[top.node].size()) {
        color[top.node] = Color::Black;
        stack.pop_back();
        continue;
      }
      const auto child = succ[top.node][top.next++];
      if (color[child] == Color::Gray) {
        std::vector<std::string> path;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [&](const Frame& f) { return f.node == child; });
        for (; it != stack.end(); ++it) {
          path.push_back(spec.tasks[it->node].name);
        }
        path.push_back(spec.tasks[child].name);
        throw CycleError(std::move(path));
      }
      if (color[child] == Color::White) {
        color[child] = Color::Gray;
        stack.push_back({child, 0});
      }
    }
  }
}

WorkflowSpec parse_workflow(std::string_view input, std::string_view default_id) {
  WorkflowSpec spec;
  spec.workflow_id = std::string(default_id);
  bool have_id = false;
  std::map<std::string, std::size_t, std::less<>> task_lines;
  std::set<std::string, std::less<>> declared_models{"default"};
  std::set<std::string, std::less<>> explicit_models;
  std::vector<std::pair<std::size_t, std::string>> model_refs;

  text::for_each_line(input, [&](std::size_t line, std::string_view content) {
    const auto tokens = text::split_ws(content);
    const auto kind = tokens.front();
    if (kind == "workflow") {
      if (tokens.size() != 2 || !valid_name(tokens[1])) {
        throw ParseError(line, "expected 'workflow <id>'");
      }
      if (have_id) {
        throw ParseError(line, "duplicate workflow line");
      }
      spec.workflow_id = std::string(tokens[1]);
      have_id = true;
    } else if (kind == "model") {
      if (tokens.size() < 2) {
        throw ParseError(line, "expected 'model <key> k=v...'");
      }
      ModelDecl decl;
      decl.key = std::string(tokens[1]);
      declared_models.insert(decl.key);
      if (!explicit_models.insert(decl.key).second) {
        throw ParseError(line, "duplicate model '" + decl.key + "'");
      }
      for (auto& [k, v] : text::parse_key_values(tokens, 2, line)) {
        decl.params.emplace(k, v);
      }
      spec.models.push_back(std::move(decl));
    } else if (kind == "task") {
      if (tokens.size() < 2 || !valid_name(tokens[1])) {
        throw ParseError(line, "expected 'task <name> key=value...'");
      }
      TaskDefinition def;
      def.name = std::string(tokens[1]);
      if (!task_lines.emplace(def.name, line).second) {
        throw ParseError(line, "duplicate task name '" + def.name + "'");
      }
      const auto kv = text::parse_key_values(tokens, 2, line);
      static const std::set<std::string, std::less<>> known{"scatter", "cpus", "mem",
                                                            "disk",    "timeout", "model"};
      for (const auto& [k, v] : kv) {
        if (known.count(k) == 0) {
          throw ParseError(line, "unknown task attribute '" + k + "'");
        }
      }
      auto scatter = text::parse_bool(text::require_key(kv, "scatter", line));
      if (!scatter) {
        throw ParseError(line, "scatter must be true or false");
      }
      def.scatter = *scatter;
      def.requested.cpu_cores =
          text::require_number<std::uint32_t>(text::require_key(kv, "cpus", line), line, "cpus");
      def.requested.memory_bytes =
          text::require_number<std::uint64_t>(text::require_key(kv, "mem", line), line, "mem");
      if (auto it = kv.find("disk"); it != kv.end()) {
        def.requested.disk_bytes = text::require_number<std::uint64_t>(it->second, line, "disk");
      }
      def.requested.max_runtime_ms = text::require_number<std::uint64_t>(
          text::require_key(kv, "timeout", line), line, "timeout");
      if (def.requested.cpu_cores == 0 || def.requested.memory_bytes == 0 ||
          def.requested.max_runtime_ms == 0) {
        throw ParseError(line, "cpus, mem and timeout must be positive");
      }
      if (auto it = kv.find("model"); it != kv.end()) {
        def.model_key = it->second;
      }
      model_refs.emplace_back(line, def.model_key);
      spec.tasks.push_back(std::move(def));
    } else if (kind == "edge") {
      if (tokens.size() != 4 || tokens[2] != "->") {
        throw ParseError(line, "expected 'edge <from> -> <to>'");
      }
      for (auto name : {tokens[1], tokens[3]}) {
        if (task_lines.find(name) == task_lines.end()) {
          throw ParseError(line, "edge references unknown task '" + std::string(name) + "'");
        }
      }
      spec.edges.push_back({std::string(tokens[1]), std::string(tokens[3])});
    } else {
      throw ParseError(line, "unknown directive '" + std::string(kind) + "'");
    }
  });

  for (const auto& [line, key] : model_refs) {
    if (declared_models.count(key) == 0) {
      throw ParseError(line, "task references undeclared model '" + key + "'");
    }
  }
  if (spec.tasks.empty()) {
    throw ParseError(0, "no tasks");
  }
  validate_dag(spec);
  return spec;
}

std::vector<std::string> topological_order(const WorkflowSpec& spec) {
  std::map<std::string_view, std::size_t> indegree;
  for (const auto& t : spec.tasks) {
    indegree[t.name] = 0;
  }
  for (const auto& e : spec.edges) {
    ++indegree[e.to];
  }
  std::vector<std::string> out;
  std::vector<bool> emitted(spec.tasks.size(), false);
  // Kahn's algorithm, always taking the earliest-defined ready node.
  while (out.size() < spec.tasks.size()) {
    bool progressed = false;
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
      if (!emitted[i] && indegree[spec.tasks[i].name] == 0) {
        emitted[i] = true;
        out.push_back(spec.tasks[i].name);
        for (const auto& s : spec.successors(spec.tasks[i].name)) {
          --indegree[s];
        }
        progressed = true;
        break;
      }
    }
    if (!progressed) {
      throw WorkflowError("workflow is not acyclic");
    }
  }
  return out;
}

std::string export_dot(const WorkflowSpec& spec) {
  std::ostringstream os;
  os << "digraph \"" << spec.workflow_id << "\" {\n";
  for (const auto& t : spec.tasks) {
    os << "  \"" << t.name << "\" [label=\"" << t.name << (t.scatter ? " [xK]" : " [x1]")
       << "\"];\n";
  }
  for (const auto& e : spec.edges) {
    os << "  \"" << e.from << "\" -> \"" << e.to << "\";\n";
  }
  os << "}\n";
  return os.str();
}

// -- instances ---------------------------------------------------------------

std::string_view to_string(TaskState s) noexcept {
  switch (s) {
  case TaskState::Pending: return "pending";
  case TaskState::Queued: return "queued";
  case TaskState::Running: return "running";
  case TaskState::Succeeded: return "succeeded";
  case TaskState::Failed: return "failed";
  }
  return "unknown";
}

std::optional<TaskState> parse_task_state(std::string_view s) noexcept {
  for (auto st : {TaskState::Pending, TaskState::Queued, TaskState::Running, TaskState::Succeeded,
                  TaskState::Failed}) {
    if (to_string(st) == s) {
      return st;
    }
  }
  return std::nullopt;
}

std::string make_task_id(std::string_view workflow_id, std::string_view definition,
                         std::uint32_t index) {
  std::string id;
  id.reserve(workflow_id.size() + definition.size() + 12);
  id.append(workflow_id).append("/").append(definition).append("/").append(std::to_string(index));
  return id;
}

namespace {

[[noreturn]] void illegal(const TaskInstance& inst, std::string_view to) {
  throw IllegalTransition(inst.task_id + ": illegal transition " +
                          std::string(to_string(inst.state)) + " -> " + std::string(to));
}

} // namespace

void TaskInstance::enqueue(SimTime t) {
  if (state != TaskState::Pending) {
    illegal(*this, "queued");
  }
  state = TaskState::Queued;
  submit_ms = t;
}

void TaskInstance::start(SimTime t, std::string machine_id) {
  if (state != TaskState::Queued) {
    illegal(*this, "running");
  }
  if (submit_ms && t < *submit_ms) {
    throw IllegalTransition(task_id + ": start before submit");
  }
  state = TaskState::Running;
  start_ms = t;
  machine = std::move(machine_id);
}

void TaskInstance::finish(SimTime t, bool succeeded) {
  if (state != TaskState::Running) {
    illegal(*this, succeeded ? "succeeded" : "failed");
  }
  if (t < *start_ms) {
    throw IllegalTransition(task_id + ": end before start");
  }
  state = succeeded ? TaskState::Succeeded : TaskState::Failed;
  end_ms = t;
}

std::vector<TaskInstance> expand_instances(const WorkflowSpec& spec, std::uint32_t input_count) {
  if (input_count == 0) {
    throw WorkflowError("input_count must be positive");
  }
  std::vector<TaskInstance> out;
  for (const auto& def : spec.tasks) {
    const std::uint32_t n = def.scatter ? input_count : 1;
    for (std::uint32_t i = 0; i < n; ++i) {
      TaskInstance inst;
      inst.task_id = make_task_id(spec.workflow_id, def.name, i);
      inst.definition = def.name;
      inst.index = i;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::string_view to_string(RunState s) noexcept {
  switch (s) {
  case RunState::Running: return "running";
  case RunState::Succeeded: return "succeeded";
  case RunState::Failed: return "failed";
  }
  return "unknown";
}

std::optional<RunState> parse_run_state(std::string_view s) noexcept {
  for (auto st : {RunState::Running, RunState::Succeeded, RunState::Failed}) {
    if (to_string(st) == s) {
      return st;
    }
  }
  return std::nullopt;
}

const TaskInstance* RunRecord::find(std::string_view task_id) const noexcept {
  for (const auto& i : instances) {
    if (i.task_id == task_id) {
      return &i;
    }
  }
  return nullptr;
}

namespace {

struct DefinitionTally {
  std::size_t total = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

std::map<std::string, DefinitionTally, std::less<>> tally(const RunRecord& run) {
  std::map<std::string, DefinitionTally, std::less<>> out;
  for (const auto& inst : run.instances) {
    auto& t = out[inst.definition];
    ++t.total;
    t.succeeded += inst.state == TaskState::Succeeded ? 1 : 0;
    t.failed += inst.state == TaskState::Failed ? 1 : 0;
  }
  return out;
}

} // namespace

std::set<std::string> ready_tasks(const RunRecord& run, const WorkflowSpec& spec) {
  const auto counts = tally(run);
  std::map<std::string, bool, std::less<>> def_ready;
  for (const auto& def : spec.tasks) {
    bool ok = true;
    for (const auto& pred : spec.predecessors(def.name)) {
      auto it = counts.find(pred);
      if (it != counts.end() && it->second.succeeded != it->second.total) {
        ok = false;
        break;
      }
    }
    def_ready[def.name] = ok;
  }
  std::set<std::string> out;
  for (const auto& inst : run.instances) {
    if (inst.state == TaskState::Pending) {
      auto it = def_ready.find(inst.definition);
      if (it != def_ready.end() && it->second) {
        out.insert(inst.task_id);
      }
    }
  }
  return out;
}

std::set<std::string> blocked_tasks(const RunRecord& run, const WorkflowSpec& spec) {
  const auto counts = tally(run);
  std::set<std::string, std::less<>> poisoned;
  std::vector<std::string> frontier;
  for (const auto& [def, t] : counts) {
    if (t.failed > 0) {
      frontier.push_back(def);
    }
  }
  while (!frontier.empty()) {
    auto def = std::move(frontier.back());
    frontier.pop_back();
    for (auto& s : spec.successors(def)) {
      if (poisoned.insert(s).second) {
        frontier.push_back(s);
      }
    }
  }
  std::set<std::string> out;
  for (const auto& inst : run.instances) {
    if (inst.state == TaskState::Pending && poisoned.count(inst.definition) != 0) {
      out.insert(inst.task_id);
    }
  }
  return out;
}

RunState settle_run_state(const RunRecord& run, const WorkflowSpec& spec) {
  bool all_ok = true;
  bool any_failed = false;
  for (const auto& inst : run.instances) {
    all_ok = all_ok && inst.state == TaskState::Succeeded;
    any_failed = any_failed || inst.state == TaskState::Failed;
  }
  if (all_ok) {
    return RunState::Succeeded;
  }
  if (!any_failed) {
    return RunState::Running;
  }
  const auto blocked = blocked_tasks(run, spec);
  for (const auto& inst : run.instances) {
    if (!inst.terminal() && blocked.count(inst.task_id) == 0) {
      return RunState::Running;
    }
  }
  return RunState::Failed;
}

WorkflowStatus workflow_status(const RunRecord& run) {
  WorkflowStatus s;
  s.state = run.final_state;
  s.total = run.instances.size();
  for (const auto& inst : run.instances) {
    s.finished += inst.state == TaskState::Succeeded ? 1 : 0;
    s.failures += inst.state == TaskState::Failed ? 1 : 0;
  }
  s.progress = s.total == 0 ? 1.0 : static_cast<double>(s.finished) / static_cast<double>(s.total);
  return s;
}

ExecutionReport execution_report(const RunRecord& run) {
  if (run.final_state == RunState::Running) {
    throw ReportOnRunningRun("run " + run.run_id + " is still running");
  }
  ExecutionReport r;
  r.run_id = run.run_id;
  r.workflow_id = run.workflow_id;
  r.submission_ms = run.submission_ms;
  r.final_state = run.final_state;
  r.total = run.instances.size();

  std::optional<SimTime> first_start;
  std::optional<SimTime> last_end;
  std::vector<std::string> order;
  std::map<std::string, std::vector<SimTime>, std::less<>> durations;
  for (const auto& inst : run.instances) {
    r.succeeded += inst.state == TaskState::Succeeded ? 1 : 0;
    r.failed += inst.state == TaskState::Failed ? 1 : 0;
    if (inst.start_ms) {
      first_start = first_start ? std::min(*first_start, *inst.start_ms) : *inst.start_ms;
    }
    if (inst.end_ms) {
      last_end = last_end ? std::max(*last_end, *inst.end_ms) : *inst.end_ms;
    }
    if (durations.find(inst.definition) == durations.end()) {
      order.push_back(inst.definition);
      durations[inst.definition];
    }
    if (inst.start_ms && inst.end_ms) {
      durations[inst.definition].push_back(*inst.end_ms - *inst.start_ms);
    }
  }
  if (first_start && last_end) {
    r.makespan_ms = *last_end - *first_start;
  }
  for (const auto& def : order) {
    const auto& d = durations[def];
    DurationStats st;
    st.definition = def;
    st.count = d.size();
    if (!d.empty()) {
      st.min_ms = *std::min_element(d.begin(), d.end());
      st.max_ms = *std::max_element(d.begin(), d.end());
      double sum = 0;
      for (auto v : d) {
        sum += static_cast<double>(v);
      }
      st.mean_ms = sum / static_cast<double>(d.size());
    }
    r.per_definition.push_back(std::move(st));
  }
  return r;
}

std::string render_report(const ExecutionReport& r) {
  std::ostringstream os;
  auto field = [&](std::string_view k, const auto& v) {
    os << std::left << std::setw(15) << k << v << '\n';
  };
  field("run", r.run_id);
  field("workflow", r.workflow_id);
  field("state", to_string(r.final_state));
  field("submission_ms", r.submission_ms);
  field("makespan_ms", r.makespan_ms);
  field("instances", std::to_string(r.total) + " (succeeded " + std::to_string(r.succeeded) +
                         ", failed " + std::to_string(r.failed) + ")");
  os << '\n';

  std::size_t name_w = std::string_view("definition").size();
  for (const auto& s : r.per_definition) {
    name_w = std::max(name_w, s.definition.size());
  }
  os << std::left << std::setw(static_cast<int>(name_w + 2)) << "definition" << std::right
     << std::setw(7) << "count" << std::setw(12) << "min_ms" << std::setw(14) << "mean_ms"
     << std::setw(12) << "max_ms" << '\n';
  for (const auto& s : r.per_definition) {
    os << std::left << std::setw(static_cast<int>(name_w + 2)) << s.definition << std::right
       << std::setw(7) << s.count << std::setw(12) << s.min_ms << std::setw(14) << std::fixed
       << std::setprecision(1) << s.mean_ms << std::setw(12) << s.max_ms << '\n';
  }
  return os.str();
}

// -- run history -------------------------------------------------------------

namespace {

json opt(const std::optional<SimTime>& v) { return v ? json(*v) : json(nullptr); }

std::optional<SimTime> opt_time(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) {
    return std::nullopt;
  }
  return v.get<SimTime>();
}

} // namespace

std::string encode_run(const RunRecord& run) {
  json instances = json::array();
  for (const auto& i : run.instances) {
    instances.push_back({{"task_id", i.task_id},
                         {"definition", i.definition},
                         {"index", i.index},
                         {"state", to_string(i.state)},
                         {"machine", i.machine ? json(*i.machine) : json(nullptr)},
                         {"submit_ms", opt(i.submit_ms)},
                         {"start_ms", opt(i.start_ms)},
                         {"end_ms", opt(i.end_ms)}});
  }
  json j = {{"run_id", run.run_id},
            {"workflow_id", run.workflow_id},
            {"submission_ms", run.submission_ms},
            {"final_state", to_string(run.final_state)},
            {"instances", std::move(instances)}};
  return j.dump();
}

RunRecord decode_run(std::string_view line) {
  try {
    const auto j = json::parse(line);
    RunRecord run;
    run.run_id = j.at("run_id").get<std::string>();
    run.workflow_id = j.at("workflow_id").get<std::string>();
    run.submission_ms = j.at("submission_ms").get<SimTime>();
    auto fs = parse_run_state(j.at("final_state").get<std::string>());
    if (!fs) {
      throw StoreError("bad final_state");
    }
    run.final_state = *fs;
    for (const auto& ji : j.at("instances")) {
      TaskInstance i;
      i.task_id = ji.at("task_id").get<std::string>();
      i.definition = ji.at("definition").get<std::string>();
      i.index = ji.at("index").get<std::uint32_t>();
      auto st = parse_task_state(ji.at("state").get<std::string>());
      if (!st) {
        throw StoreError("bad instance state");
      }
      i.state = *st;
      if (!ji.at("machine").is_null()) {
        i.machine = ji.at("machine").get<std::string>();
      }
      i.submit_ms = opt_time(ji, "submit_ms");
      i.start_ms = opt_time(ji, "start_ms");
      i.end_ms = opt_time(ji, "end_ms");
      run.instances.push_back(std::move(i));
    }
    return run;
  } catch (const json::exception& e) {
    throw StoreError(std::string("malformed run record: ") + e.what());
  }
}

RunStore::RunStore(std::filesystem::path path) : path_(std::move(path)) {}

void RunStore::append(const RunRecord& run) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  std::string line = encode_run(run);
  line += '\n';
  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw StoreError("cannot open store " + path_.string() + ": " + std::strerror(errno));
  }
  const char* data = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const auto n = ::write(fd, data, left);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      const int err = errno;
      ::close(fd);
      throw StoreError("write to store failed: " + std::string(std::strerror(err)));
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw StoreError("fsync of store failed: " + std::string(std::strerror(err)));
  }
  ::close(fd);
}

std::vector<RunRecord> RunStore::load_all() const {
  std::vector<RunRecord> out;
  if (!std::filesystem::exists(path_)) {
    return out;
  }
  std::ifstream in(path_);
  if (!in) {
    throw StoreError("cannot read store " + path_.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) {
      continue;
    }
    try {
      out.push_back(decode_run(line));
    } catch (const StoreError& e) {
      throw StoreError(path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::optional<RunRecord> RunStore::find(std::string_view run_id) const {
  std::optional<RunRecord> found;
  for (auto& r : load_all()) {
    if (r.run_id == run_id) {
      found = std::move(r);
    }
  }
  return found;
}

std::size_t RunStore::size() const { return load_all().size(); }

RunSummary summarize(const RunRecord& run) {
  RunSummary s;
  s.run_id = run.run_id;
  s.workflow_id = run.workflow_id;
  s.submission_ms = run.submission_ms;
  s.final_state = run.final_state;
  if (run.final_state != RunState::Running) {
    s.makespan_ms = execution_report(run).makespan_ms;
  }
  return s;
}

std::vector<RunSummary> list_previous_executions(const RunStore& store,
                                                 std::string_view workflow_id) {
  std::vector<RunSummary> out;
  const auto records = store.load_all();
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->workflow_id == workflow_id) {
      out.push_back(summarize(*it));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RunSummary& a, const RunSummary& b) {
    return a.submission_ms > b.submission_ms;
  });
  return out;
}

// -- engine ------------------------------------------------------------------

std::string WorkflowEngine::start_run(std::shared_ptr<const WorkflowSpec> spec,
                                      std::uint32_t input_count, SimTime t, std::string run_id) {
  {
    std::unique_lock lock(mutex_);
    for (const auto& [id, r] : runs_) {
      if (r.record.workflow_id == spec->workflow_id && r.record.final_state == RunState::Running) {
        throw WorkflowError("workflow " + spec->workflow_id + " already has live run " + id);
      }
    }
    ++counter_;
    if (run_id.empty()) {
      run_id = spec->workflow_id + "-run" + std::to_string(counter_);
    }
    if (runs_.count(run_id) != 0) {
      throw WorkflowError("duplicate run id " + run_id);
    }
    Run r;
    r.record.run_id = run_id;
    r.record.workflow_id = spec->workflow_id;
    r.record.submission_ms = t;
    r.record.instances = expand_instances(*spec, input_count);
    r.record.final_state = settle_run_state(r.record, *spec);
    for (std::size_t i = 0; i < r.record.instances.size(); ++i) {
      r.index.emplace(r.record.instances[i].task_id, i);
      task_to_run_[r.record.instances[i].task_id] = run_id;
    }
    r.spec = std::move(spec);
    runs_.emplace(run_id, std::move(r));
  }
  if (observer_) {
    observer_(run_id, t);
  }
  return run_id;
}

const WorkflowEngine::Run& WorkflowEngine::run(std::string_view run_id) const {
  auto it = runs_.find(run_id);
  if (it == runs_.end()) {
    throw WorkflowError("unknown run '" + std::string(run_id) + "'");
  }
  return it->second;
}

std::set<std::string> WorkflowEngine::ready(const std::string& run_id) const {
  std::shared_lock lock(mutex_);
  const auto& r = run(run_id);
  return ready_tasks(r.record, *r.spec);
}

std::set<std::string> WorkflowEngine::blocked(const std::string& run_id) const {
  std::shared_lock lock(mutex_);
  const auto& r = run(run_id);
  return blocked_tasks(r.record, *r.spec);
}

template <class Fn>
void WorkflowEngine::mutate(const std::string& task_id, SimTime t, Fn&& fn) {
  std::string run_id;
  {
    std::unique_lock lock(mutex_);
    auto owner = task_to_run_.find(task_id);
    if (owner == task_to_run_.end()) {
      throw UnknownTask(task_id);
    }
    run_id = owner->second;
    auto& r = runs_.find(run_id)->second;
    fn(r.record.instances[r.index.find(task_id)->second]);
    r.record.final_state = settle_run_state(r.record, *r.spec);
  }
  if (observer_) {
    observer_(run_id, t);
  }
}

void WorkflowEngine::mark_queued(const std::string& task_id, SimTime t) {
  mutate(task_id, t, [&](TaskInstance& i) { i.enqueue(t); });
}

void WorkflowEngine::mark_running(const std::string& task_id, SimTime t,
                                  const std::string& machine_id) {
  mutate(task_id, t, [&](TaskInstance& i) { i.start(t, machine_id); });
}

void WorkflowEngine::mark_finished(const std::string& task_id, SimTime t, bool succeeded) {
  mutate(task_id, t, [&](TaskInstance& i) { i.finish(t, succeeded); });
}

bool WorkflowEngine::has_run(std::string_view run_id) const {
  std::shared_lock lock(mutex_);
  return runs_.find(run_id) != runs_.end();
}

RunRecord WorkflowEngine::snapshot(std::string_view run_id) const {
  std::shared_lock lock(mutex_);
  return run(run_id).record;
}

std::shared_ptr<const WorkflowSpec> WorkflowEngine::spec(std::string_view run_id) const {
  std::shared_lock lock(mutex_);
  return run(run_id).spec;
}

std::optional<std::string> WorkflowEngine::run_of_task(std::string_view task_id) const {
  std::shared_lock lock(mutex_);
  auto it = task_to_run_.find(task_id);
  if (it == task_to_run_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<std::string> WorkflowEngine::run_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, r] : runs_) {
    out.push_back(id);
  }
  return out;
}

} // namespace stratus
