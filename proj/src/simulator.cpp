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

#include "stratus/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "text.hpp"

namespace stratus {

namespace {

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t round_u64(double v) {
  return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
}

std::uint64_t scale(std::uint64_t v, double factor) {
  return factor >= 1.0 ? v : round_u64(static_cast<double>(v) * factor);
}

constexpr std::int32_t kExitTimeout = 124;
constexpr std::int32_t kExitOom = 137;
constexpr std::int32_t kExitMachineLost = 143;

} // namespace

void validate(const TaskModel& m) {
  auto fraction = [&](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw SimulationError("model " + m.model_key + ": " + what + " must be in [0,1]");
    }
  };
  fraction(m.rss_fraction_of_request, "rss");
  fraction(m.cpu_wait_fraction, "wait");
  fraction(m.failure_probability, "fail");
  if (!(m.runtime_jitter_pct >= 0.0 && m.runtime_jitter_pct <= 100.0)) {
    throw SimulationError("model " + m.model_key + ": jitter must be in [0,100]");
  }
  if (m.base_runtime_ms == 0) {
    throw SimulationError("model " + m.model_key + ": runtime must be positive");
  }
  if (!(m.syscall_rate_per_s >= 0.0) || !std::isfinite(m.syscall_rate_per_s)) {
    throw SimulationError("model " + m.model_key + ": syscalls must be nonnegative");
  }
}

TaskModel parse_task_model(const ModelDecl& decl) {
  TaskModel m;
  m.model_key = decl.key;
  for (const auto& [k, v] : decl.params) {
    auto num = [&](auto& out) {
      using T = std::decay_t<decltype(out)>;
      auto parsed = text::parse_number<T>(v);
      if (!parsed) {
        throw SimulationError("model " + decl.key + ": invalid " + k + " '" + v + "'");
      }
      out = *parsed;
    };
    if (k == "runtime") {
      num(m.base_runtime_ms);
    } else if (k == "jitter") {
      num(m.runtime_jitter_pct);
    } else if (k == "cpu") {
      num(m.cpu_pct_mean);
    } else if (k == "rss") {
      num(m.rss_fraction_of_request);
    } else if (k == "read") {
      num(m.io_read_bytes);
    } else if (k == "write") {
      num(m.io_write_bytes);
    } else if (k == "syscalls") {
      num(m.syscall_rate_per_s);
    } else if (k == "wait") {
      num(m.cpu_wait_fraction);
    } else if (k == "fail") {
      num(m.failure_probability);
    } else {
      throw SimulationError("model " + decl.key + ": unknown parameter '" + k + "'");
    }
  }
  validate(m);
  return m;
}

RandomStream stream_for(std::uint64_t root_seed, std::string_view task_id) {
  return RandomStream(splitmix64(root_seed ^ splitmix64(fnv1a64(task_id))));
}

SynthesizedMetrics synthesize_trace(const TaskModel& model, const ResourceRequest& requested,
                                    RandomStream& rng) {
  SynthesizedMetrics m;
  const double base = static_cast<double>(model.base_runtime_ms);
  const double jitter = model.runtime_jitter_pct / 100.0;
  const double u = rng.uniform(-1.0, 1.0);
  if (jitter == 0.0) {
    m.runtime_ms = model.base_runtime_ms;
  } else {
    const auto lo = static_cast<SimTime>(std::ceil(base * (1.0 - jitter)));
    const auto hi = static_cast<SimTime>(std::floor(base * (1.0 + jitter)));
    m.runtime_ms = std::clamp(round_u64(base * (1.0 + u * jitter)), lo, std::max(lo, hi));
  }
  m.runtime_ms = std::max<SimTime>(1, m.runtime_ms);

  const double seconds = static_cast<double>(m.runtime_ms) / 1000.0;
  m.cpu_pct = model.cpu_pct_mean;
  m.rss_bytes = round_u64(model.rss_fraction_of_request * static_cast<double>(requested.memory_bytes));
  m.rchar_bytes = model.io_read_bytes;
  m.wchar_bytes = model.io_write_bytes;

  const auto syscalls = round_u64(model.syscall_rate_per_s * seconds);
  const auto io = static_cast<double>(m.rchar_bytes) + static_cast<double>(m.wchar_bytes);
  const double read_share = io > 0.0 ? static_cast<double>(m.rchar_bytes) / io : 0.5;
  m.syscall_read_count = std::min(syscalls, round_u64(static_cast<double>(syscalls) * read_share));
  m.syscall_write_count = syscalls - m.syscall_read_count;
  m.cpu_wait_ms = round_u64(model.cpu_wait_fraction * static_cast<double>(m.runtime_ms));

  const std::uint64_t pages = (m.rchar_bytes + m.wchar_bytes + 4095) / 4096;
  const double hit_ratio = 0.7 + 0.3 * rng.uniform();
  m.page_cache_hits = std::min(pages, round_u64(static_cast<double>(pages) * hit_ratio));
  m.page_cache_misses = pages - m.page_cache_hits;

  m.fails = rng.uniform() < model.failure_probability;
  return m;
}

std::string_view to_string(FaultKind k) noexcept {
  switch (k) {
  case FaultKind::TaskOOM: return "task_oom";
  case FaultKind::TaskNonZeroExit: return "task_non_zero_exit";
  case FaultKind::MachineUnhealthy: return "machine_unhealthy";
  }
  return "unknown";
}

std::optional<FaultKind> parse_fault_kind(std::string_view s) noexcept {
  if (s == "task_oom" || s == "TaskOOM") {
    return FaultKind::TaskOOM;
  }
  if (s == "task_non_zero_exit" || s == "TaskNonZeroExit") {
    return FaultKind::TaskNonZeroExit;
  }
  if (s == "machine_unhealthy" || s == "MachineUnhealthy") {
    return FaultKind::MachineUnhealthy;
  }
  return std::nullopt;
}

std::string format_event_log(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += std::to_string(e.t_ms);
    out += '\t';
    out += e.kind;
    out += '\t';
    out += e.subject;
    out += '\t';
    out += e.detail;
    out += '\n';
  }
  return out;
}

std::vector<Event> parse_event_log(std::string_view input) {
  std::vector<Event> out;
  std::size_t line_no = 0;
  for (auto line : text::split(input, '\n')) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    auto f = text::split(line, '\t');
    if (f.size() != 4) {
      throw ParseError(line_no, "event log: expected 4 fields");
    }
    Event e;
    e.t_ms = text::require_number<SimTime>(f[0], line_no, "t_ms");
    e.kind = std::string(f[1]);
    e.subject = std::string(f[2]);
    e.detail = std::string(f[3]);
    out.push_back(std::move(e));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Scenario parse_scenario(std::string_view input, const std::filesystem::path& base_dir) {
  Scenario s;
  bool have_wf = false;
  bool have_cluster = false;
  text::for_each_line(input, [&](std::size_t line, std::string_view content) {
    const auto tok = text::split_ws(content);
    const auto key = tok.front();
    auto single = [&]() -> std::string_view {
      if (tok.size() != 2) {
        throw ParseError(line, "expected '" + std::string(key) + " <value>'");
      }
      return tok[1];
    };
    if (key == "workflow") {
      const auto path = base_dir / std::string(single());
      try {
        s.workflow = parse_workflow(read_file(path));
      } catch (const ParseError& e) {
        throw ParseError(0, path.string() + ": " + e.what());
      }
      have_wf = true;
    } else if (key == "cluster") {
      const auto path = base_dir / std::string(single());
      try {
        s.cluster = parse_cluster(read_file(path));
      } catch (const ParseError& e) {
        throw ParseError(0, path.string() + ": " + e.what());
      }
      have_cluster = true;
    } else if (key == "inputs") {
      s.input_count = text::require_number<std::uint32_t>(single(), line, "inputs");
      if (s.input_count == 0) {
        throw ParseError(line, "inputs must be positive");
      }
    } else if (key == "seed") {
      s.seed = text::require_number<std::uint64_t>(single(), line, "seed");
    } else if (key == "topology") {
      auto t = parse_topology(single());
      if (!t) {
        throw ParseError(line, "topology must be workflow-aware or disjoint");
      }
      s.topology = *t;
    } else if (key == "sample_interval") {
      s.sample_interval_ms = text::require_number<SimTime>(single(), line, "sample_interval");
      if (s.sample_interval_ms == 0) {
        throw ParseError(line, "sample_interval must be positive");
      }
    } else if (key == "inject") {
      if (tok.size() < 3) {
        throw ParseError(line, "expected 'inject <kind> <target> [at=<ms>]'");
      }
      FaultInjection inj;
      auto kind = parse_fault_kind(tok[1]);
      if (!kind) {
        throw ParseError(line, "unknown injection kind '" + std::string(tok[1]) + "'");
      }
      inj.kind = *kind;
      inj.target = std::string(tok[2]);
      const auto kv = text::parse_key_values(tok, 3, line);
      for (const auto& [k, v] : kv) {
        if (k != "at") {
          throw ParseError(line, "unknown injection attribute '" + k + "'");
        }
        inj.at_ms = text::require_number<SimTime>(v, line, "at");
      }
      s.injections.push_back(std::move(inj));
    } else {
      throw ParseError(line, "unknown scenario directive '" + std::string(key) + "'");
    }
  });
  if (!have_wf || !have_cluster) {
    throw ParseError(0, "scenario needs both 'workflow' and 'cluster' lines");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.parent_path());
}

// -- simulation --------------------------------------------------------------

Simulation::Simulation(Scenario scenario, std::string run_id)
    : scenario_(std::move(scenario)), run_id_(std::move(run_id)) {
  validate_dag(scenario_.workflow);
  if (scenario_.input_count == 0) {
    throw SimulationError("input_count must be positive");
  }
  if (scenario_.sample_interval_ms == 0) {
    throw SimulationError("sample interval must be positive");
  }
  spec_ = std::make_shared<const WorkflowSpec>(scenario_.workflow);
  models_.emplace("default", TaskModel{});
  for (const auto& decl : spec_->models) {
    models_[decl.key] = parse_task_model(decl);
  }
  for (const auto& t : spec_->tasks) {
    if (models_.find(t.model_key) == models_.end()) {
      throw SimulationError("task " + t.name + " references unknown model '" + t.model_key + "'");
    }
  }
  for (const auto& d : scenario_.cluster.machines) {
    machines_.register_machine(d, 0);
  }
  resman_ = std::make_unique<ResourceManager>(machines_, scenario_.topology,
                                              scenario_.cluster.fs_total_bytes);
  if (scenario_.topology == TopologyMode::Disjoint) {
    swms_ = std::make_unique<WorkflowEngine>();
  }
  for (const auto& inst : expand_instances(*spec_, scenario_.input_count)) {
    task_ids_.insert(inst.task_id);
    tasks_.register_task(inst.task_id);
  }
  workflow_engine().set_observer([this](const std::string& id, SimTime t) {
    if (status_observer_) {
      status_observer_(id, t, workflow_status(workflow_engine().snapshot(id)));
    }
  });
  for (const auto& inj : scenario_.injections) {
    inject(inj);
  }
}

Simulation::~Simulation() = default;

WorkflowEngine& Simulation::workflow_engine() noexcept {
  return swms_ ? *swms_ : resman_->engine();
}

const WorkflowEngine& Simulation::workflow_engine() const noexcept {
  return swms_ ? *swms_ : resman_->engine();
}

const TaskModel& Simulation::model_for(std::string_view task_definition) const {
  const auto* def = spec_->find(task_definition);
  if (def == nullptr) {
    throw UnknownTask(std::string(task_definition));
  }
  return models_.find(def->model_key)->second;
}

void Simulation::inject(const FaultInjection& inj) {
  if (inj.kind == FaultKind::MachineUnhealthy) {
    if (!machines_.contains(inj.target)) {
      throw TargetUnknown(inj.target);
    }
  } else if (task_ids_.count(inj.target) == 0) {
    throw TargetUnknown(inj.target);
  }
  if (started_ && inj.at_ms <= now()) {
    throw InjectionInPast("injection at " + std::to_string(inj.at_ms) +
                          " is not after the current time " + std::to_string(now()));
  }
  if (inj.kind == FaultKind::MachineUnhealthy) {
    push(inj.at_ms, Pending::Kind::MachineFault, inj.target);
  } else {
    task_faults_.push_back(inj);
  }
}

void Simulation::push(SimTime t, Pending::Kind kind, std::string subject) {
  queue_.push({t, seq_++, kind, std::move(subject)});
}

void Simulation::log(SimTime t, std::string kind, std::string subject, std::string detail) {
  events_.push_back({t, std::move(kind), std::move(subject), std::move(detail)});
}

const TaskDefinition& Simulation::definition_of(const std::string& task_id) const {
  // task ids are <workflow>/<definition>/<index>
  const auto first = task_id.find('/');
  const auto last = task_id.rfind('/');
  const auto* def = spec_->find(std::string_view(task_id).substr(first + 1, last - first - 1));
  if (def == nullptr) {
    throw UnknownTask(task_id);
  }
  return *def;
}

bool Simulation::run_terminal() const {
  return workflow_engine().snapshot(run_id_).final_state != RunState::Running;
}

void Simulation::start_run() {
  const auto total = expand_instances(*spec_, scenario_.input_count).size();
  log(0, "run_submitted", spec_->workflow_id,
      "instances=" + std::to_string(total) + " topology=" +
          std::string(to_string(scenario_.topology)));
  if (scenario_.topology == TopologyMode::WorkflowAware) {
    resman_->submit_workflow(spec_, scenario_.input_count, 0, run_id_);
  } else {
    swms_->start_run(spec_, scenario_.input_count, 0, run_id_);
  }
}

void Simulation::dispatch(SimTime t) {
  if (scenario_.topology == TopologyMode::WorkflowAware) {
    const auto ready = resman_->engine().ready(run_id_);
    resman_->enqueue_ready(t);
    for (const auto& id : ready) {
      log(t, "task_queued", id);
    }
  } else {
    for (const auto& id : swms_->ready(run_id_)) {
      QueueEntry e;
      e.task_id = id;
      e.requested = definition_of(id).requested;
      e.enqueue_ms = t;
      resman_->submit_task(std::move(e));
      swms_->mark_queued(id, t);
      log(t, "task_queued", id);
    }
  }
  for (const auto& a : resman_->schedule(t)) {
    start_task(a.task_id, a.machine_id, t);
  }
}

void Simulation::start_task(const std::string& task_id, const std::string& machine_id, SimTime t) {
  const auto& def = definition_of(task_id);
  const auto& model = models_.find(def.model_key)->second;
  auto rng = stream_for(scenario_.seed, task_id);

  RunningTask rt;
  rt.machine_id = machine_id;
  rt.start_ms = t;
  rt.requested = def.requested;
  rt.metrics = synthesize_trace(model, def.requested, rng);
  SimTime runtime = rt.metrics.runtime_ms;
  rt.exit_code = rt.metrics.fails ? 1 : 0;
  if (runtime >= def.requested.max_runtime_ms) {
    runtime = def.requested.max_runtime_ms;
    rt.exit_code = kExitTimeout;
  }
  for (const auto& f : task_faults_) {
    if (f.target != task_id || f.at_ms > t) {
      continue;
    }
    if (f.kind == FaultKind::TaskOOM) {
      const auto mem = def.requested.memory_bytes;
      rt.metrics.rss_bytes = mem + std::max<std::uint64_t>(1, mem / 8);
      runtime = std::max<SimTime>(1, runtime / 2);
      rt.exit_code = kExitOom;
    } else if (rt.exit_code == 0) {
      rt.exit_code = 1;
    }
  }
  rt.planned_end_ms = t + runtime;

  const auto snapshot = workflow_engine().snapshot(run_id_);
  if (const auto* inst = snapshot.find(task_id); inst != nullptr && inst->submit_ms) {
    rt.submit_ms = *inst->submit_ms;
  }
  workflow_engine().mark_running(task_id, t, machine_id);
  tasks_.append_log({task_id, t, LogLevel::Debug,
                     "model=" + def.model_key + " planned_runtime_ms=" + std::to_string(runtime)});
  tasks_.append_log({task_id, t, LogLevel::Info, "started on " + machine_id});
  log(t, "task_started", task_id, "machine=" + machine_id);
  push(rt.planned_end_ms, Pending::Kind::TaskEnd, task_id);
  running_.emplace(task_id, std::move(rt));
}

void Simulation::complete_task(const std::string& task_id, SimTime t,
                               std::optional<std::int32_t> kill_code) {
  auto node = running_.extract(task_id);
  if (node.empty()) {
    return;
  }
  const auto& rt = node.mapped();
  const std::int32_t exit = kill_code.value_or(rt.exit_code);
  const SimTime duration = t - rt.start_ms;
  const double factor =
      static_cast<double>(duration) / static_cast<double>(rt.metrics.runtime_ms);

  TaskTraceRecord rec;
  rec.task_id = task_id;
  rec.status = exit == 0 ? "succeeded" : "failed";
  rec.exit_code = exit;
  rec.submit_ms = rt.submit_ms;
  rec.start_ms = rt.start_ms;
  rec.end_ms = t;
  rec.duration_ms = duration;
  rec.cpu_pct = rt.metrics.cpu_pct;
  rec.rss_bytes = rt.metrics.rss_bytes;
  rec.rchar_bytes = scale(rt.metrics.rchar_bytes, factor);
  rec.wchar_bytes = scale(rt.metrics.wchar_bytes, factor);
  rec.syscall_read_count = scale(rt.metrics.syscall_read_count, factor);
  rec.syscall_write_count = scale(rt.metrics.syscall_write_count, factor);
  rec.cpu_wait_ms = std::min<std::uint64_t>(duration, scale(rt.metrics.cpu_wait_ms, factor));
  rec.page_cache_hits = scale(rt.metrics.page_cache_hits, factor);
  rec.page_cache_misses = scale(rt.metrics.page_cache_misses, factor);
  tasks_.record_trace(rec);

  tasks_.record_code_part({task_id, "stage_in", duration / 10, rec.rss_bytes / 4});
  tasks_.record_code_part({task_id, "compute", duration * 8 / 10, rec.rss_bytes});
  tasks_.record_code_part({task_id, "stage_out", duration / 10, rec.rss_bytes / 8});

  if (exit == 0) {
    if (rec.rss_bytes * 5 > rt.requested.memory_bytes * 4) {
      tasks_.append_log({task_id, t, LogLevel::Warning, "peak rss above 80% of requested memory"});
    }
    tasks_.append_log({task_id, t, LogLevel::Info, "completed in " + std::to_string(duration) + " ms"});
  } else {
    tasks_.append_log({task_id, t, LogLevel::Error, "exited with code " + std::to_string(exit)});
  }

  resman_->release(task_id, rec.wchar_bytes);
  workflow_engine().mark_finished(task_id, t, exit == 0);
  log(t, exit == 0 ? "task_finished" : "task_failed", task_id,
      "exit=" + std::to_string(exit) + " machine=" + rt.machine_id);
}

void Simulation::fail_machine(const std::string& machine_id, SimTime t) {
  machines_.set_status(machine_id, MachineStatus::Unhealthy, t);
  log(t, "machine_status", machine_id, "unhealthy");
  for (const auto& task_id : resman_->running_on(machine_id)) {
    complete_task(task_id, t, kExitMachineLost);
  }
}

void Simulation::take_samples(SimTime t) {
  for (const auto& v : resman_->machine_views()) {
    MachineSample s;
    s.machine_id = v.machine_id;
    s.t_ms = t;
    s.used_cpu_cores = static_cast<double>(v.reserved.cpu_cores);
    s.used_memory_bytes = v.reserved.memory_bytes;
    s.used_disk_bytes = v.reserved.disk_bytes;
    machines_.record_sample(std::move(s));
    log(t, "machine_sample", v.machine_id,
        "cpu=" + std::to_string(v.reserved.cpu_cores) +
            " mem=" + std::to_string(v.reserved.memory_bytes) +
            " disk=" + std::to_string(v.reserved.disk_bytes));
  }
}

void Simulation::check_quiescence() const {
  if (!running_.empty()) {
    return;
  }
  std::string stuck;
  const auto blocked = workflow_engine().blocked(run_id_);
  for (const auto& inst : workflow_engine().snapshot(run_id_).instances) {
    if (!inst.terminal() && blocked.count(inst.task_id) == 0) {
      if (!stuck.empty()) {
        stuck += ", ";
      }
      stuck += inst.task_id + " (" + std::string(to_string(inst.state)) + ")";
    }
  }
  throw NonQuiescent("simulation cannot progress at t=" + std::to_string(now()) +
                     "; non-terminal instances: " + stuck);
}

bool Simulation::step() {
  if (finished_) {
    return false;
  }
  if (!started_) {
    started_ = true;
    start_run();
    dispatch(0);
    take_samples(0);
    next_sample_ = scenario_.sample_interval_ms;
  } else {
    check_quiescence();
    SimTime t = next_sample_;
    while (!queue_.empty() && queue_.top().kind == Pending::Kind::TaskEnd &&
           running_.find(queue_.top().subject) == running_.end()) {
      queue_.pop(); // end of a task that was already killed
    }
    const bool event_first = !queue_.empty() && queue_.top().t <= next_sample_;
    if (event_first) {
      t = queue_.top().t;
      now_ = t;
      while (!queue_.empty() && queue_.top().t == t) {
        auto ev = queue_.top();
        queue_.pop();
        if (ev.kind == Pending::Kind::TaskEnd) {
          auto it = running_.find(ev.subject);
          if (it != running_.end() && it->second.planned_end_ms == t) {
            complete_task(ev.subject, t, std::nullopt);
          }
        } else {
          fail_machine(ev.subject, t);
        }
      }
      dispatch(t);
    }
    now_ = t;
    if (t == next_sample_) {
      take_samples(t);
      next_sample_ += scenario_.sample_interval_ms;
    }
  }
  if (run_terminal()) {
    const auto state = workflow_engine().snapshot(run_id_).final_state;
    log(now(), "run_finished", spec_->workflow_id, std::string(to_string(state)));
    finished_ = true;
  }
  return !finished_;
}

void Simulation::run() {
  while (step()) {
  }
}

std::vector<Diagnosis> Simulation::diagnoses() const {
  std::vector<Diagnosis> out;
  const auto run = workflow_engine().snapshot(run_id_);
  for (const auto& rec : tasks_.traces()) {
    const auto* inst = run.find(rec.task_id);
    const auto status = inst && inst->machine ? machines_.status_at(*inst->machine, rec.end_ms)
                                              : MachineStatus::Healthy;
    out.push_back(diagnose(rec, definition_of(rec.task_id).requested, status));
  }
  return out;
}

SimulationResult Simulation::result() const {
  SimulationResult r;
  r.run = workflow_engine().snapshot(run_id_);
  r.events = events_;
  r.traces = tasks_.traces();
  for (const auto& d : machines_.machines()) {
    auto series = machines_.query_series(d.machine_id, 0, std::numeric_limits<SimTime>::max());
    r.samples.insert(r.samples.end(), series.begin(), series.end());
  }
  std::stable_sort(r.samples.begin(), r.samples.end(),
                   [](const MachineSample& a, const MachineSample& b) { return a.t_ms < b.t_ms; });
  r.logs = tasks_.all_logs();
  r.never_eligible = workflow_engine().blocked(run_id_);
  return r;
}

SimulationResult run_simulation(const Scenario& scenario,
                                const std::vector<FaultInjection>& injections,
                                const std::string& run_id) {
  Simulation sim(scenario, run_id);
  for (const auto& inj : injections) {
    sim.inject(inj);
  }
  sim.run();
  return sim.result();
}

} // namespace stratus
