#pragma once

// Run orchestration. Each step first evaluates every agent's controller
// chain (feedback -> via-point -> band -> tracker) against the state at the
// start of the step, then integrates the world once. The evaluation phase
// touches only per-agent state, so it may run concurrently; the commit is
// serial, which keeps logs identical in both modes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <tbb/parallel_for.h>

#include "ficnav/attraction_tracker.hpp"
#include "ficnav/band_planner.hpp"
#include "ficnav/csv_log.hpp"
#include "ficnav/feedback_channel.hpp"
#include "ficnav/metrics.hpp"
#include "ficnav/scenario.hpp"
#include "ficnav/via_sequencer.hpp"
#include "ficnav/world_sim.hpp"

namespace ficnav {

struct RunOptions {
  std::optional<double> feedback_hz;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool parallel = false;
};

struct AgentRuntime {
  BandPlanner band;
  TrackerState tracker;
  ViaSequencer sequencer;
  ZohChannel feedback;
};

class Simulation {
 public:
  explicit Simulation(Scenario sc, const RunOptions& opt = {}) : sc_(std::move(sc)), parallel_(opt.parallel) {
    if (opt.seed) sc_.seed = *opt.seed;
    if (opt.duration) sc_.duration = *opt.duration;
    world_.viscous = sc_.viscous;
    world_.obstacles = sc_.obstacles;
    for (std::size_t i = 0; i < sc_.agents.size(); ++i) {
      const AgentConfig& a = sc_.agents[i];
      world_.agents.push_back(make_body(a));
      const double hz = opt.feedback_hz ? *opt.feedback_hz : a.feedback_hz.value_or(sc_.feedback_hz);
      runtime_.push_back({BandPlanner(band_params(a), a.pose, sc_.band_mode, sc_.hysteresis),
                          make_tracker(a.tracker, a.kind, sc_.hysteresis), ViaSequencer(resolve_plan(sc_, i)),
                          ZohChannel(hz)});
    }
    steps_ = static_cast<std::int64_t>(std::llround(sc_.duration / sc_.dt));
    wrenches_.resize(sc_.agents.size());
    record_.agents.resize(sc_.agents.size());
  }

  const Scenario& scenario() const { return sc_; }
  const World& world() const { return world_; }
  const std::vector<AgentRuntime>& runtime() const { return runtime_; }
  std::int64_t total_steps() const { return steps_; }
  std::int64_t current_step() const { return world_.step; }
  bool done() const { return world_.step >= steps_; }

  std::vector<LogAgent> log_agents() const {
    std::vector<LogAgent> out;
    for (const auto& a : sc_.agents) out.push_back({a.id, a.kind});
    return out;
  }

  /// Advances one step; returns the record observed at the start of it.
  const StepRecord& step() {
    const double t = world_.time;
    const double dt = sc_.dt;
    record_.step = world_.step;
    record_.t = t;
    auto evaluate = [&](std::size_t i) {
      AgentRuntime& rt = runtime_[i];
      const AgentBody& body = world_.agents[i];
      AgentSample& s = record_.agents[i];
      const StateSample& held = rt.feedback.sample({body.pose, body.twist}, t);
      s.vp = rt.sequencer.current_target(held.pose, t);
      s.xd = rt.band.desired();
      s.vd = rt.band.desired_rate();
      s.x = body.pose;
      s.v = body.twist;
      s.w = track_wrench(rt.tracker, s.xd, held.pose, rt.feedback.fresh());
      s.advances = rt.sequencer.advances();
      rt.band.step(s.vp, dt);
      wrenches_[i] = s.w;
    };
    const std::size_t n = runtime_.size();
    if (parallel_ && n > 1) {
      tbb::parallel_for(std::size_t{0}, n, evaluate);
    } else {
      for (std::size_t i = 0; i < n; ++i) evaluate(i);
    }
    step_world(world_, wrenches_, dt, &diag_);
    for (std::size_t i = 0; i < n; ++i) {
      record_.agents[i].acc = diag_.accel[i];
      record_.agents[i].wext = diag_.external[i];
    }
    return record_;
  }

 private:
  Scenario sc_;
  bool parallel_ = false;
  World world_;
  std::vector<AgentRuntime> runtime_;
  std::vector<DofVector> wrenches_;
  StepDiagnostics diag_;
  StepRecord record_;
  std::int64_t steps_ = 0;
};

/// Receives every step of a run.
class StepSink {
 public:
  virtual ~StepSink() = default;
  virtual void begin(const Simulation&) {}
  virtual void on_step(const Simulation&, const StepRecord&) = 0;
  virtual void end(const Simulation&) {}
};

class CsvSink : public StepSink {
 public:
  explicit CsvSink(std::ostream& os) : os_(os) {}
  void begin(const Simulation& sim) override {
    every_ = sim.scenario().log_every;
    writer_.emplace(os_, sim.log_agents(), sim.scenario().dt, every_);
  }
  void on_step(const Simulation&, const StepRecord& r) override {
    if (r.step % static_cast<std::int64_t>(every_) == 0) writer_->write(r);
  }

 private:
  std::ostream& os_;
  std::size_t every_ = 1;
  std::optional<CsvWriter> writer_;
};

/// Keeps every `every`-th step in memory.
class MemorySink : public StepSink {
 public:
  explicit MemorySink(std::size_t every = 1) : every_(every) {}
  void begin(const Simulation& sim) override {
    log_.dt = sim.scenario().dt * double(every_);
    log_.agents.clear();
    for (const auto& a : sim.scenario().agents) {
      AgentTrack t;
      t.id = a.id;
      for (std::size_t i = 0; i < dof_count(a.kind); ++i) t.dofs.push_back(dof_kind(a.kind, i));
      log_.agents.push_back(std::move(t));
    }
  }
  void on_step(const Simulation&, const StepRecord& r) override {
    if (r.step % static_cast<std::int64_t>(every_) != 0) return;
    for (std::size_t i = 0; i < r.agents.size(); ++i) {
      const AgentSample& s = r.agents[i];
      AgentTrack& t = log_.agents[i];
      t.vp.push_back(s.vp);
      t.xd.push_back(s.xd);
      t.vd.push_back(s.vd);
      t.x.push_back(s.x);
      t.v.push_back(s.v);
      t.acc.push_back(s.acc);
      t.w.push_back(s.w);
      t.wext.push_back(s.wext);
      t.advances.push_back(static_cast<long>(s.advances));
    }
  }
  const TrajectoryLog& log() const { return log_; }

 private:
  std::size_t every_;
  TrajectoryLog log_;
};

struct AgentSummary {
  std::string id;
  std::vector<DofKind> dofs;
  std::vector<double> rmse;
  double q_max = 0.0;
  double p_max = 0.0;
  std::size_t advances = 0;
  bool at_final = false;
  double final_error = 0.0;
  double trigger_radius = 0.0;
  /// Largest |dv_d/dt| / a_max over all DoFs and steps.
  double band_accel_ratio = 0.0;
  /// Largest |v_d| / v_max.
  double band_speed_ratio = 0.0;
  /// Largest body-frame |acceleration| / a_max.
  double accel_ratio = 0.0;
  std::size_t penetrations = 0;
  std::size_t workspace_exits = 0;
  /// Gates crossed, by obstacle index, with the sign of the crossing.
  std::vector<std::pair<std::size_t, int>> gate_crossings;
  std::size_t non_finite = 0;

  bool completed() const { return at_final && final_error < trigger_radius; }
};

/// Gate passes in declaration order with the declared direction.
inline bool gates_in_order(const std::vector<Obstacle>& obstacles,
                           const std::vector<std::pair<std::size_t, int>>& crossings) {
  std::vector<std::size_t> gates;
  for (std::size_t i = 0; i < obstacles.size(); ++i)
    if (std::holds_alternative<Gate>(obstacles[i].geometry)) gates.push_back(i);
  std::size_t next = 0;
  for (const auto& [idx, sign] : crossings) {
    if (next < gates.size() && idx == gates[next] &&
        sign == std::get<Gate>(obstacles[idx].geometry).direction)
      ++next;
  }
  return next == gates.size();
}

struct RunSummary {
  std::string scenario;
  std::int64_t steps = 0;
  double dt = 0.0;
  double feedback_hz = 0.0;
  double wall_seconds = 0.0;
  std::vector<AgentSummary> agents;
  bool gates_ok = true;
};

/// Full-rate metrics: tracking RMSE, limit ratios, obstacle checks.
class SummarySink : public StepSink {
 public:
  void begin(const Simulation& sim) override {
    const Scenario& sc = sim.scenario();
    summary_ = {};
    summary_.scenario = sc.name;
    summary_.dt = sc.dt;
    acc_.clear();
    prev_.clear();
    for (std::size_t i = 0; i < sc.agents.size(); ++i) {
      const AgentConfig& a = sc.agents[i];
      AgentSummary s;
      s.id = a.id;
      for (std::size_t k = 0; k < dof_count(a.kind); ++k) s.dofs.push_back(dof_kind(a.kind, k));
      s.trigger_radius = a.plan.trigger_radius;
      acc_.emplace_back(s.dofs);
      summary_.agents.push_back(std::move(s));
    }
    summary_.feedback_hz = sim.runtime().empty() ? sc.feedback_hz : sim.runtime().front().feedback.rate();
    prev_.resize(sc.agents.size());
    start_ = std::chrono::steady_clock::now();
  }

  void on_step(const Simulation& sim, const StepRecord& r) override {
    const Scenario& sc = sim.scenario();
    const double dt = sc.dt;
    for (std::size_t i = 0; i < r.agents.size(); ++i) {
      const AgentSample& s = r.agents[i];
      const AgentConfig& cfg = sc.agents[i];
      AgentSummary& out = summary_.agents[i];
      Prev& p = prev_[i];
      acc_[i].add(s.xd, s.x);
      const std::size_t n = s.x.size();
      double q = 0.0, pw = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double m = cfg.inertia[k];
        q += (m * s.vd[k]) * (m * s.vd[k]);
        if (p.have) pw += s.vd[k] * m * (s.vd[k] - p.vd[k]) / dt;
        out.band_speed_ratio = std::max(out.band_speed_ratio, std::abs(s.vd[k]) / cfg.v_max[k]);
        if (p.have)
          out.band_accel_ratio =
              std::max(out.band_accel_ratio, std::abs(s.vd[k] - p.vd[k]) / dt / cfg.a_max[k]);
      }
      out.q_max = std::max(out.q_max, std::sqrt(q));
      out.p_max = std::max(out.p_max, std::abs(pw));
      const DofVector body_acc = world_to_body(cfg.kind, s.x[yaw_index(cfg.kind)], s.acc);
      for (std::size_t k = 0; k < n; ++k)
        out.accel_ratio = std::max(out.accel_ratio, std::abs(body_acc[k]) / cfg.a_max[k]);
      if (!s.x.all_finite() || !s.v.all_finite()) ++out.non_finite;

      const bool planar = cfg.kind == AgentKind::kPlanar;
      const Vec3 pos = position_of(cfg.kind, s.x);
      for (std::size_t o = 0; o < sc.obstacles.size(); ++o) {
        const Obstacle& ob = sc.obstacles[o];
        if (penetrates(ob, pos, r.t, planar)) ++out.penetrations;
        if (p.have && ob.active(r.t)) {
          if (const Gate* g = std::get_if<Gate>(&ob.geometry)) {
            if (int sign = crossing(*g, p.pos, pos); sign != 0) out.gate_crossings.emplace_back(o, sign);
          }
        }
      }
      const int dims = planar ? 2 : 3;
      for (int k = 0; k < dims; ++k)
        if (pos[k] < sc.workspace_min[k] || pos[k] > sc.workspace_max[k]) {
          ++out.workspace_exits;
          break;
        }
      p.vd = s.vd;
      p.pos = pos;
      p.have = true;
    }
    ++summary_.steps;
  }

  void end(const Simulation& sim) override {
    summary_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    for (std::size_t i = 0; i < summary_.agents.size(); ++i) {
      AgentSummary& out = summary_.agents[i];
      const auto& rt = sim.runtime()[i];
      const AgentBody& body = sim.world().agents[i];
      if (acc_[i].count() > 0) out.rmse = acc_[i].result();
      out.advances = rt.sequencer.advances();
      out.at_final = rt.sequencer.at_final();
      out.final_error = positional_distance(body.kind, body.pose, rt.sequencer.final_via());
    }
    summary_.gates_ok = true;
    for (const auto& a : summary_.agents)
      summary_.gates_ok = summary_.gates_ok && gates_in_order(sim.scenario().obstacles, a.gate_crossings);
  }

  const RunSummary& summary() const { return summary_; }

 private:
  struct Prev {
    DofVector vd;
    Vec3 pos{};
    bool have = false;
  };

  /// Sign of a crossing of the gate plane through the opening, 0 if none.
  static int crossing(const Gate& g, const Vec3& a, const Vec3& b) {
    const double da = a[g.axis] - g.center[g.axis], db = b[g.axis] - g.center[g.axis];
    if ((da < 0.0) == (db < 0.0) || da == db) return 0;
    const double u = da / (da - db);
    const Vec3 hit = a + u * (b - a);
    const int lateral = g.axis == 0 ? 1 : 0;
    if (std::abs(hit[lateral] - g.center[lateral]) > 0.5 * g.width) return 0;
    if (std::abs(hit[2] - g.center[2]) > 0.5 * g.height) return 0;
    return db > da ? 1 : -1;
  }

  RunSummary summary_;
  std::vector<RmseAccumulator> acc_;
  std::vector<Prev> prev_;
  std::chrono::steady_clock::time_point start_;
};

inline std::string format_summary(const RunSummary& s, const Scenario& sc) {
  std::ostringstream os;
  os << "scenario = " << s.scenario << "\n";
  os << "steps = " << s.steps << "\n";
  os << "dt = " << format_number(s.dt) << "\n";
  os << "feedback_hz = " << format_number(s.feedback_hz) << "\n";
  os << "wall_seconds = " << s.wall_seconds << "\n";
  os << "gates_in_order = " << (s.gates_ok ? "true" : "false") << "\n";
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentSummary& a = s.agents[i];
    const AgentKind kind = sc.agents[i].kind;
    const std::string p = a.id + ".";
    for (std::size_t k = 0; k < a.rmse.size(); ++k)
      os << p << "rmse." << dof_name(kind, k) << " = " << format_number(a.rmse[k]) << "\n";
    os << p << "q_max = " << format_number(a.q_max) << "\n";
    os << p << "p_max = " << format_number(a.p_max) << "\n";
    os << p << "advances = " << a.advances << "\n";
    os << p << "at_final = " << (a.at_final ? "true" : "false") << "\n";
    os << p << "final_error = " << format_number(a.final_error) << "\n";
    os << p << "completed = " << (a.completed() ? "true" : "false") << "\n";
    os << p << "band_accel_ratio = " << format_number(a.band_accel_ratio) << "\n";
    os << p << "band_speed_ratio = " << format_number(a.band_speed_ratio) << "\n";
    os << p << "accel_ratio = " << format_number(a.accel_ratio) << "\n";
    os << p << "penetrations = " << a.penetrations << "\n";
    os << p << "workspace_exits = " << a.workspace_exits << "\n";
    os << p << "gate_crossings = " << a.gate_crossings.size() << "\n";
  }
  return os.str();
}

/// Runs a simulation to completion, feeding every sink.
inline void drive(Simulation& sim, const std::vector<StepSink*>& sinks) {
  for (StepSink* s : sinks) s->begin(sim);
  while (!sim.done()) {
    const StepRecord& r = sim.step();
    for (StepSink* s : sinks) s->on_step(sim, r);
  }
  for (StepSink* s : sinks) s->end(sim);
}

inline RunSummary simulate(const Scenario& sc, const RunOptions& opt = {}, StepSink* extra = nullptr) {
  Simulation sim(sc, opt);
  SummarySink summary;
  std::vector<StepSink*> sinks{&summary};
  if (extra) sinks.push_back(extra);
  drive(sim, sinks);
  return summary.summary();
}

/// Writes <out>/<name>.csv and <out>/<name>.summary.txt.
inline RunSummary run(const Scenario& sc, const std::filesystem::path& out_dir, const RunOptions& opt = {}) {
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / (sc.name + ".csv"), std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open " + (out_dir / (sc.name + ".csv")).string());
  Simulation sim(sc, opt);
  CsvSink csv_sink(csv);
  SummarySink summary;
  drive(sim, {&csv_sink, &summary});
  std::ofstream txt(out_dir / (sc.name + ".summary.txt"), std::ios::binary);
  txt << format_summary(summary.summary(), sim.scenario());
  return summary.summary();
}

struct BenchStats {
  double mean = 0.0;
  double sd = 0.0;
};

struct BenchReport {
  BenchStats single;
  BenchStats swarm;
  std::size_t repeats = 0;
  std::int64_t steps = 0;
  double ratio() const { return single.mean > 0.0 ? swarm.mean / single.mean : 0.0; }
};

/// Serial wall-clock seconds per simulated step for one run.
inline double seconds_per_step(const Scenario& sc) {
  Simulation sim(sc);
  const auto t0 = std::chrono::steady_clock::now();
  while (!sim.done()) sim.step();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return secs / double(sim.total_steps());
}

/// Mean and sample sd.
inline BenchStats stats_of(const std::vector<double>& samples) {
  BenchStats s;
  if (samples.empty()) return s;
  for (double v : samples) s.mean += v;
  s.mean /= double(samples.size());
  if (samples.size() > 1) {
    for (double v : samples) s.sd += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(s.sd / double(samples.size() - 1));
  }
  return s;
}

inline BenchStats time_per_step(const Scenario& sc, std::size_t repeats) {
  std::vector<double> samples;
  for (std::size_t r = 0; r < repeats; ++r) samples.push_back(seconds_per_step(sc));
  return stats_of(samples);
}

/// Repeats alternate between the two scenarios so that drift in machine
/// load affects both alike.
inline BenchReport bench(const Scenario& single, const Scenario& swarm, std::size_t repeats) {
  if (repeats == 0) throw InvalidInput("bench: repeats must be positive");
  if (single.dt != swarm.dt || single.duration != swarm.duration)
    throw InvalidInput("bench: scenarios must share dt and duration");
  std::vector<double> a, b;
  for (std::size_t r = 0; r < repeats; ++r) {
    a.push_back(seconds_per_step(single));
    b.push_back(seconds_per_step(swarm));
  }
  BenchReport rep;
  rep.repeats = repeats;
  rep.single = stats_of(a);
  rep.swarm = stats_of(b);
  rep.steps = static_cast<std::int64_t>(std::llround(single.duration / single.dt));
  return rep;
}

}  // namespace ficnav
