#pragma once

// Scenario files.
//
//   # comment
//   scenario NAME {
//     key = value [value ...]
//     agent ID { ... band { } tracker { } bubble { } plan { schedule T { } } }
//     obstacle ID { ... track { } }
//   }
//
// Sections open with `kind [args] {` and close with a lone `}`. Values are
// whitespace separated; double quotes group a value containing spaces.
// The full key list is in README.md.

#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ficnav/attraction_tracker.hpp"
#include "ficnav/band_planner.hpp"
#include "ficnav/dof.hpp"
#include "ficnav/geometry.hpp"
#include "ficnav/via_sequencer.hpp"
#include "ficnav/world_sim.hpp"

namespace ficnav {

/// `count` via-points drawn uniformly from the box [min, max].
struct RandomVias {
  std::size_t count = 0;
  Vec3 min{};
  Vec3 max{};
  friend bool operator==(const RandomVias&, const RandomVias&) = default;
};

struct PlanSwapSpec {
  double time = 0.0;
  std::vector<DofVector> vias;
  std::optional<RandomVias> random;
  friend bool operator==(const PlanSwapSpec&, const PlanSwapSpec&) = default;
};

struct PlanSpec {
  double trigger_radius = 0.2;
  YawMode yaw_mode = YawMode::kExplicit;
  double yaw_deadband = 0.05;
  std::vector<DofVector> vias;
  std::optional<RandomVias> random;
  std::vector<PlanSwapSpec> schedule;
  friend bool operator==(const PlanSpec&, const PlanSpec&) = default;
};

struct AgentConfig {
  std::string id;
  AgentKind kind = AgentKind::kPlanar;
  DofVector pose;
  DofVector twist;
  DofVector inertia;
  DofVector a_max;
  DofVector v_max;
  DofVector wrench_max;
  DofVector k_band;
  DofVector m_desired;
  std::vector<RoaProfileParams> tracker;
  std::optional<Bubble> bubble;
  PlanSpec plan;
  std::optional<double> feedback_hz;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct Scenario {
  std::string name;
  double duration = 0.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  double feedback_hz = 1000.0;
  BandMode band_mode = BandMode::kFractal;
  double hysteresis = 1e-6;
  /// Every n-th step is written to the CSV log.
  std::size_t log_every = 1;
  ViscousField viscous;
  Vec3 workspace_min{-1e3, -1e3, -1e3};
  Vec3 workspace_max{1e3, 1e3, 1e3};
  std::vector<AgentConfig> agents;
  std::vector<Obstacle> obstacles;

  std::size_t total_dof() const {
    std::size_t n = 0;
    for (const auto& a : agents) n += dof_count(a.kind);
    return n;
  }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Diagnostic {
  int line = 0;
  std::string field;
  std::string message;
};

inline std::string format_diagnostic(const Diagnostic& d) {
  std::string s = "line " + std::to_string(d.line) + ": ";
  if (!d.field.empty()) s += d.field + ": ";
  return s + d.message;
}

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<Diagnostic> diags)
      : std::runtime_error(join(diags)), diags_(std::move(diags)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  static std::string join(const std::vector<Diagnostic>& diags) {
    std::string s;
    for (const auto& d : diags) s += format_diagnostic(d) + "\n";
    return s;
  }
  std::vector<Diagnostic> diags_;
};

/// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace detail {

struct Entry {
  std::string key;
  std::vector<std::string> values;
  int line = 0;
};

struct Section {
  std::string kind;
  std::vector<std::string> args;
  int line = 0;
  std::vector<Entry> entries;
  std::vector<Section> children;
};

inline std::vector<std::string> tokenize(std::string_view line, int lineno, std::vector<Diagnostic>& diags) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '"') {
      const std::size_t close = line.find('"', i + 1);
      if (close == std::string_view::npos) {
        diags.push_back({lineno, "", "unterminated string"});
        return {};
      }
      out.emplace_back(line.substr(i + 1, close - i - 1));
      i = close + 1;
      continue;
    }
    if (c == '{' || c == '}' || c == '=') {
      out.emplace_back(1, c);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#' &&
           line[j] != '{' && line[j] != '}' && line[j] != '=' && line[j] != '"')
      ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<Section> parse_tree(std::string_view text, std::vector<Diagnostic>& diags) {
  Section root;
  std::vector<Section*> stack{&root};
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto tok = tokenize(line, lineno, diags);
    if (tok.empty()) continue;
    if (tok.size() == 1 && tok[0] == "}") {
      if (stack.size() == 1) {
        diags.push_back({lineno, "", "unmatched '}'"});
      } else {
        stack.pop_back();
      }
      continue;
    }
    if (tok.back() == "{") {
      if (tok.size() < 2 || tok[0] == "=" || tok[0] == "{") {
        diags.push_back({lineno, "", "section header needs a name before '{'"});
        continue;
      }
      Section s;
      s.kind = tok[0];
      s.args.assign(tok.begin() + 1, tok.end() - 1);
      s.line = lineno;
      stack.back()->children.push_back(std::move(s));
      stack.push_back(&stack.back()->children.back());
      continue;
    }
    if (tok.size() >= 2 && tok[1] == "=") {
      if (tok.size() == 2) {
        diags.push_back({lineno, tok[0], "missing value after '='"});
        continue;
      }
      stack.back()->entries.push_back({tok[0], {tok.begin() + 2, tok.end()}, lineno});
      continue;
    }
    diags.push_back({lineno, "", "expected 'key = value', 'section {' or '}'"});
  }
  if (stack.size() > 1) diags.push_back({stack.back()->line, stack.back()->kind, "section is never closed"});
  return std::move(root.children);
}

/// Reads typed values out of one section and reports unknown or bad keys.
class Reader {
 public:
  Reader(const Section& s, std::string scope, std::vector<Diagnostic>& diags)
      : s_(s), scope_(std::move(scope)), diags_(diags) {}

  ~Reader() {
    for (const Entry& e : s_.entries)
      if (!used_.count(e.key)) diags_.push_back({e.line, field(e.key), "unknown key"});
  }

  const Entry* find(const std::string& key) {
    used_.insert(key);
    const Entry* hit = nullptr;
    for (const Entry& e : s_.entries) {
      if (e.key != key) continue;
      if (hit) diags_.push_back({e.line, field(key), "duplicate key"});
      hit = &e;
    }
    return hit;
  }

  std::vector<const Entry*> find_all(const std::string& key) {
    used_.insert(key);
    std::vector<const Entry*> out;
    for (const Entry& e : s_.entries)
      if (e.key == key) out.push_back(&e);
    return out;
  }

  bool number(const std::string& key, double& out, bool required = false) {
    const Entry* e = find(key);
    if (!e) {
      if (required) diags_.push_back({s_.line, field(key), "required key missing"});
      return false;
    }
    if (e->values.size() != 1) {
      diags_.push_back({e->line, field(key), "expected one number"});
      return false;
    }
    return parse_double(*e, e->values[0], out);
  }

  bool numbers(const Entry& e, std::vector<double>& out) {
    out.clear();
    for (const auto& v : e.values) {
      double d = 0.0;
      if (!parse_double(e, v, d)) return false;
      out.push_back(d);
    }
    return true;
  }

  /// Per-DoF vector; a single value is broadcast to every DoF.
  bool dof_vector(const std::string& key, std::size_t n, DofVector& out, bool required = false) {
    const Entry* e = find(key);
    if (!e) {
      if (required) diags_.push_back({s_.line, field(key), "required key missing"});
      return false;
    }
    std::vector<double> v;
    if (!numbers(*e, v)) return false;
    if (v.size() == 1) v.assign(n, v[0]);
    if (v.size() != n) {
      diags_.push_back({e->line, field(key), "expected " + std::to_string(n) + " values, got " +
                                                 std::to_string(e->values.size())});
      return false;
    }
    out = DofVector(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[i];
    return true;
  }

  bool vec3(const std::string& key, Vec3& out, bool required = false) {
    DofVector v;
    if (!dof_vector(key, 3, v, required)) return false;
    out = {v[0], v[1], v[2]};
    return true;
  }

  bool word(const std::string& key, std::string& out, bool required = false) {
    const Entry* e = find(key);
    if (!e) {
      if (required) diags_.push_back({s_.line, field(key), "required key missing"});
      return false;
    }
    if (e->values.size() != 1) {
      diags_.push_back({e->line, field(key), "expected one word"});
      return false;
    }
    out = e->values[0];
    return true;
  }

  std::string field(const std::string& key) const { return scope_ + "." + key; }
  void error(int line, const std::string& key, std::string msg) {
    diags_.push_back({line, field(key), std::move(msg)});
  }
  int line_of(const std::string& key) const {
    for (const Entry& e : s_.entries)
      if (e.key == key) return e.line;
    return s_.line;
  }
  const Section& section() const { return s_; }

 private:
  bool parse_double(const Entry& e, const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    if (text == "inf" || text == "+inf") {
      out = std::numeric_limits<double>::infinity();
      return true;
    }
    if (text == "-inf") {
      out = -std::numeric_limits<double>::infinity();
      return true;
    }
    const auto r = std::from_chars(first, last, out);
    if (r.ec != std::errc{} || r.ptr != last) {
      diags_.push_back({e.line, field(e.key), "not a number: '" + text + "'"});
      return false;
    }
    return true;
  }

  const Section& s_;
  std::string scope_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> used_;
};

inline void check_children(const Section& s, const std::set<std::string>& allowed,
                           const std::string& scope, std::vector<Diagnostic>& diags) {
  for (const Section& c : s.children)
    if (!allowed.count(c.kind)) diags.push_back({c.line, scope + "." + c.kind, "unknown section"});
}

inline std::optional<RandomVias> read_random(const Section& s, const std::string& scope,
                                             std::vector<Diagnostic>& diags) {
  std::optional<RandomVias> out;
  for (const Section& c : s.children) {
    if (c.kind != "random") continue;
    if (out) diags.push_back({c.line, scope + ".random", "only one random block allowed"});
    check_children(c, {}, scope + ".random", diags);
    Reader r(c, scope + ".random", diags);
    RandomVias rv;
    double count = 0.0;
    if (r.number("count", count, true)) {
      if (!(count >= 1.0) || count != std::floor(count) || count > 1e6)
        r.error(r.line_of("count"), "count", "must be a positive integer");
      else
        rv.count = static_cast<std::size_t>(count);
    }
    r.vec3("min", rv.min, true);
    r.vec3("max", rv.max, true);
    for (int i = 0; i < 3; ++i)
      if (rv.min[i] > rv.max[i]) r.error(r.line_of("max"), "max", "must not be below min");
    out = rv;
  }
  return out;
}

inline void read_vias(Reader& r, std::size_t n, std::vector<DofVector>& out) {
  for (const Entry* e : r.find_all("via")) {
    std::vector<double> v;
    if (!r.numbers(*e, v)) continue;
    if (v.size() != n) {
      r.error(e->line, "via", "expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
      continue;
    }
    DofVector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = v[i];
    out.push_back(d);
  }
}

inline std::optional<AgentKind> parse_kind(const std::string& w) {
  if (w == "planar") return AgentKind::kPlanar;
  if (w == "spatial") return AgentKind::kSpatial;
  return std::nullopt;
}

inline void read_plan(const Section& s, AgentConfig& a, std::vector<Diagnostic>& diags) {
  const std::size_t n = dof_count(a.kind);
  check_children(s, {"random", "schedule"}, "Plan", diags);
  Reader r(s, "Plan", diags);
  PlanSpec& p = a.plan;
  r.number("trigger_radius", p.trigger_radius);
  r.number("yaw_deadband", p.yaw_deadband);
  std::string mode;
  if (r.word("yaw_mode", mode)) {
    if (mode == "explicit") p.yaw_mode = YawMode::kExplicit;
    else if (mode == "face_target") p.yaw_mode = YawMode::kFaceTarget;
    else r.error(r.line_of("yaw_mode"), "yaw_mode", "expected 'explicit' or 'face_target'");
  }
  read_vias(r, n, p.vias);
  p.random = read_random(s, "Plan", diags);
  if (!(p.trigger_radius > 0.0)) r.error(r.line_of("trigger_radius"), "trigger_radius", "must be positive");
  if (!(p.yaw_deadband >= 0.0)) r.error(r.line_of("yaw_deadband"), "yaw_deadband", "must be non-negative");
  if (p.vias.empty() && !p.random) r.error(s.line, "via", "plan must not be empty");
  for (const Section& c : s.children) {
    if (c.kind != "schedule") continue;
    PlanSwapSpec sw;
    double t = 0.0;
    if (c.args.size() != 1 || std::from_chars(c.args[0].data(), c.args[0].data() + c.args[0].size(), t).ec !=
                                  std::errc{}) {
      diags.push_back({c.line, "Plan.schedule", "expected 'schedule TIME {'"});
      continue;
    }
    sw.time = t;
    check_children(c, {"random"}, "Plan.schedule", diags);
    Reader sr(c, "Plan.schedule", diags);
    read_vias(sr, n, sw.vias);
    sw.random = read_random(c, "Plan.schedule", diags);
    if (sw.vias.empty() && !sw.random) sr.error(c.line, "via", "scheduled plan must not be empty");
    if (!p.schedule.empty() && !(sw.time > p.schedule.back().time))
      sr.error(c.line, "time", "schedule times must be strictly increasing");
    p.schedule.push_back(std::move(sw));
  }
}

inline void read_roa(Reader& r, RoaProfileParams& p, bool required) {
  r.number("k0", p.k0, required);
  r.number("x0", p.x0, required);
  r.number("xb", p.xb, required);
  r.number("f_max", p.f_max, required);
}

inline void report_roa(const RoaProfileParams& p, const std::string& scope, int line,
                       std::vector<Diagnostic>& diags, const std::string& suffix = "") {
  const RoaDiagnostics d = validate_params(p);
  for (const std::string& msg : d.problems) {
    const auto colon = msg.find(':');
    diags.push_back({line, scope + "." + msg.substr(0, colon) + suffix, msg.substr(colon + 2)});
  }
}

inline AgentConfig read_agent(const Section& s, std::vector<Diagnostic>& diags) {
  AgentConfig a;
  if (s.args.size() != 1) diags.push_back({s.line, "Agent.id", "expected 'agent ID {'"});
  else a.id = s.args[0];
  check_children(s, {"band", "tracker", "bubble", "plan"}, "Agent", diags);
  Reader r(s, "Agent", diags);
  std::string kind;
  if (r.word("kind", kind, true)) {
    if (auto k = parse_kind(kind)) a.kind = *k;
    else r.error(r.line_of("kind"), "kind", "expected 'planar' or 'spatial'");
  }
  const std::size_t n = dof_count(a.kind);
  a.pose = DofVector(n);
  a.twist = DofVector(n);
  r.dof_vector("pose", n, a.pose);
  r.dof_vector("twist", n, a.twist);
  const bool have_inertia = r.dof_vector("inertia", n, a.inertia, true);
  const bool have_amax = r.dof_vector("a_max", n, a.a_max, true);
  r.dof_vector("v_max", n, a.v_max, true);
  if (!r.dof_vector("wrench_max", n, a.wrench_max) && have_inertia && have_amax) {
    a.wrench_max = DofVector(n);
    for (std::size_t i = 0; i < n; ++i) a.wrench_max[i] = a.inertia[i] * a.a_max[i];
  }
  double fb = 0.0;
  if (r.number("feedback_hz", fb)) {
    if (!(fb > 0.0) || !std::isfinite(fb)) r.error(r.line_of("feedback_hz"), "feedback_hz", "must be positive");
    a.feedback_hz = fb;
  }

  auto positive = [&](const char* key, const DofVector& v, const char* what) {
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x)) {
        r.error(r.line_of(key), key, what);
        return;
      }
  };
  positive("inertia", a.inertia, "diagonal entries must be positive");
  positive("a_max", a.a_max, "must be positive");
  positive("v_max", a.v_max, "must be positive");
  positive("wrench_max", a.wrench_max, "must be positive");
  for (std::size_t i = 0; i < a.pose.size(); ++i)
    if (dof_kind(a.kind, i) == DofKind::kAngular) a.pose[i] = wrap_angle(a.pose[i]);
  if (!a.pose.all_finite() || !a.twist.all_finite()) r.error(s.line, "pose", "must be finite");

  bool have_band = false, have_tracker = false;
  for (const Section& c : s.children) {
    if (c.kind == "band") {
      have_band = true;
      check_children(c, {}, "Band", diags);
      Reader br(c, "Band", diags);
      br.dof_vector("k_band", n, a.k_band, true);
      if (!br.dof_vector("m_desired", n, a.m_desired)) a.m_desired = a.inertia;
      for (std::size_t i = 0; i < a.k_band.size(); ++i)
        if (!(a.k_band[i] > 0.0)) br.error(br.line_of("k_band"), "k_band", "must be positive");
      if (a.m_desired.size() == a.inertia.size())
        for (std::size_t i = 0; i < n; ++i)
          if (!(a.m_desired[i] >= a.inertia[i])) {
            br.error(br.line_of("m_desired"), "m_desired", "must be at least the agent inertia");
            break;
          }
    } else if (c.kind == "tracker") {
      have_tracker = true;
      check_children(c, {}, "Tracker", diags);
      Reader tr(c, "Tracker", diags);
      DofVector k0, x0, xb, fm;
      const bool ok = tr.dof_vector("k0", n, k0, true) & tr.dof_vector("x0", n, x0, true) &
                      tr.dof_vector("xb", n, xb, true) & tr.dof_vector("f_max", n, fm, true);
      if (ok) {
        for (std::size_t i = 0; i < n; ++i) {
          a.tracker.push_back({k0[i], x0[i], xb[i], fm[i]});
          report_roa(a.tracker.back(), "Tracker", c.line, diags, "[" + std::string(dof_name(a.kind, i)) + "]");
          if (a.wrench_max.size() == n && fm[i] > a.wrench_max[i] * (1.0 + 1e-12))
            tr.error(tr.line_of("f_max"), "f_max", "exceeds wrench_max for DoF " + std::string(dof_name(a.kind, i)));
        }
      }
    } else if (c.kind == "bubble") {
      if (a.bubble) diags.push_back({c.line, "Bubble", "only one bubble per agent"});
      check_children(c, {}, "Bubble", diags);
      Reader br(c, "Bubble", diags);
      Bubble b;
      std::string shape = "circle";
      br.word("shape", shape);
      if (shape == "circle") {
        b.shape = BubbleShape::kCircle;
        br.number("radius", b.radius, true);
        if (!(b.radius > 0.0) || !std::isfinite(b.radius))
          br.error(br.line_of("radius"), "radius", "must be positive");
      } else if (shape == "rectangle") {
        b.shape = BubbleShape::kRectangle;
        br.vec3("half_extents", b.half_extents, true);
        const std::size_t dims = linear_count(a.kind);
        for (std::size_t i = 0; i < dims; ++i)
          if (!(b.half_extents[i] > 0.0)) br.error(br.line_of("half_extents"), "half_extents", "must be positive");
      } else {
        br.error(br.line_of("shape"), "shape", "expected 'circle' or 'rectangle'");
      }
      read_roa(br, b.repulsion, true);
      report_roa(b.repulsion, "Bubble", c.line, diags);
      a.bubble = b;
    } else if (c.kind == "plan") {
      read_plan(c, a, diags);
    }
  }
  if (!have_band) diags.push_back({s.line, "Agent.band", "required section missing"});
  if (!have_tracker) diags.push_back({s.line, "Agent.tracker", "required section missing"});
  bool have_plan = false;
  for (const Section& c : s.children) have_plan |= c.kind == "plan";
  if (!have_plan) diags.push_back({s.line, "Agent.plan", "required section missing"});
  return a;
}

inline Obstacle read_obstacle(const Section& s, std::vector<Diagnostic>& diags) {
  Obstacle o;
  if (s.args.size() != 1) diags.push_back({s.line, "Obstacle.id", "expected 'obstacle ID {'"});
  else o.id = s.args[0];
  check_children(s, {"track"}, "Obstacle", diags);
  Reader r(s, "Obstacle", diags);
  std::string type;
  r.word("type", type, true);
  if (type == "box") {
    Box b;
    r.vec3("center", b.center, true);
    r.vec3("half", b.half, true);
    for (double h : b.half)
      if (!(h > 0.0)) {
        r.error(r.line_of("half"), "half", "must be positive");
        break;
      }
    o.geometry = b;
  } else if (type == "wall") {
    Wall w;
    r.vec3("from", w.from, true);
    r.vec3("to", w.to, true);
    r.number("thickness", w.thickness);
    if (const Entry* e = r.find("z_range")) {
      std::vector<double> v;
      if (r.numbers(*e, v)) {
        if (v.size() != 2 || !(v[0] < v[1])) r.error(e->line, "z_range", "expected 'low high' with low < high");
        else {
          w.z_min = v[0];
          w.z_max = v[1];
        }
      }
    }
    if (!(w.thickness > 0.0)) r.error(r.line_of("thickness"), "thickness", "must be positive");
    o.geometry = w;
  } else if (type == "gate") {
    Gate g;
    r.vec3("center", g.center, true);
    std::string axis;
    if (r.word("axis", axis, true)) {
      if (axis == "x") g.axis = 0;
      else if (axis == "y") g.axis = 1;
      else r.error(r.line_of("axis"), "axis", "expected 'x' or 'y'");
    }
    double dir = 1.0;
    if (r.number("direction", dir) && dir != 1.0 && dir != -1.0)
      r.error(r.line_of("direction"), "direction", "expected 1 or -1");
    g.direction = dir < 0.0 ? -1 : 1;
    r.number("width", g.width);
    r.number("height", g.height);
    r.number("frame", g.frame);
    if (!(g.width > 0.0) || !(g.height > 0.0) || !(g.frame > 0.0))
      r.error(s.line, "width", "width, height and frame must be positive");
    o.geometry = g;
  } else if (!type.empty()) {
    r.error(r.line_of("type"), "type", "expected 'box', 'wall' or 'gate'");
  }
  r.number("active_from", o.active_from);
  r.number("active_until", o.active_until);
  if (!(o.active_from < o.active_until)) r.error(r.line_of("active_until"), "active_until", "must exceed active_from");
  for (const Section& c : s.children) {
    if (c.kind != "track") continue;
    check_children(c, {}, "Track", diags);
    Reader tr(c, "Track", diags);
    ScriptedTrack t;
    for (const Entry* e : tr.find_all("at")) {
      std::vector<double> v;
      if (!tr.numbers(*e, v)) continue;
      if (v.size() != 4) {
        tr.error(e->line, "at", "expected 'time x y z'");
        continue;
      }
      if (!t.waypoints.empty() && !(v[0] > t.waypoints.back().t))
        tr.error(e->line, "at", "times must be strictly increasing");
      t.waypoints.push_back({v[0], {v[1], v[2], v[3]}});
    }
    if (t.waypoints.empty()) tr.error(c.line, "at", "track needs at least one waypoint");
    o.track = t;
  }
  return o;
}

}  // namespace detail

/// Parses and validates scenario text. Throws ScenarioError listing every
/// problem found, each with its line number.
inline Scenario load_scenario(std::string_view text) {
  std::vector<Diagnostic> diags;
  auto tree = detail::parse_tree(text, diags);
  if (!diags.empty()) throw ScenarioError(diags);
  const detail::Section* top = nullptr;
  for (const auto& s : tree) {
    if (s.kind != "scenario") {
      diags.push_back({s.line, s.kind, "unknown top-level section"});
    } else if (top) {
      diags.push_back({s.line, "scenario", "only one scenario per file"});
    } else {
      top = &s;
    }
  }
  if (!top) {
    diags.push_back({1, "scenario", "no 'scenario NAME {' section"});
    throw ScenarioError(diags);
  }
  Scenario sc;
  if (top->args.size() != 1) diags.push_back({top->line, "Scenario.name", "expected 'scenario NAME {'"});
  else sc.name = top->args[0];
  detail::check_children(*top, {"agent", "obstacle"}, "Scenario", diags);
  {
    detail::Reader r(*top, "Scenario", diags);
    r.number("duration", sc.duration, true);
    r.number("dt", sc.dt);
    double seed = 1.0;
    if (r.number("seed", seed)) {
      if (!(seed >= 0.0) || seed != std::floor(seed) || seed > 9.007199254740992e15)
        r.error(r.line_of("seed"), "seed", "must be a non-negative integer");
      else
        sc.seed = static_cast<std::uint64_t>(seed);
    }
    r.number("feedback_hz", sc.feedback_hz);
    r.number("hysteresis", sc.hysteresis);
    double every = 1.0;
    if (r.number("log_every", every)) {
      if (!(every >= 1.0) || every != std::floor(every)) r.error(r.line_of("log_every"), "log_every", "must be a positive integer");
      else sc.log_every = static_cast<std::size_t>(every);
    }
    std::string mode;
    if (r.word("band_mode", mode)) {
      if (mode == "plain_spring") sc.band_mode = BandMode::kPlainSpring;
      else if (mode == "fractal") sc.band_mode = BandMode::kFractal;
      else r.error(r.line_of("band_mode"), "band_mode", "expected 'plain_spring' or 'fractal'");
    }
    DofVector visc;
    if (r.dof_vector("viscous", 6, visc)) {
      for (std::size_t i = 0; i < 6; ++i) {
        if (!(visc[i] >= 0.0)) r.error(r.line_of("viscous"), "viscous", "coefficients must be non-negative");
        sc.viscous.c[i] = visc[i];
      }
    }
    if (const detail::Entry* e = r.find("workspace")) {
      std::vector<double> v;
      if (r.numbers(*e, v)) {
        if (v.size() != 6) {
          r.error(e->line, "workspace", "expected 'xmin ymin zmin xmax ymax zmax'");
        } else {
          sc.workspace_min = {v[0], v[1], v[2]};
          sc.workspace_max = {v[3], v[4], v[5]};
          for (int i = 0; i < 3; ++i)
            if (!(v[i] < v[i + 3])) r.error(e->line, "workspace", "min must be below max");
        }
      }
    }
    if (!(sc.dt > 0.0) || sc.dt > 0.01) r.error(r.line_of("dt"), "dt", "must lie in (0, 0.01]");
    if (!(sc.duration >= sc.dt) || !std::isfinite(sc.duration))
      r.error(r.line_of("duration"), "duration", "must be at least dt");
    if (!(sc.feedback_hz > 0.0) || !std::isfinite(sc.feedback_hz))
      r.error(r.line_of("feedback_hz"), "feedback_hz", "must be positive");
    if (!(sc.hysteresis >= 0.0)) r.error(r.line_of("hysteresis"), "hysteresis", "must be non-negative");
  }
  std::set<std::string> ids;
  for (const auto& c : top->children) {
    std::string id;
    if (c.kind == "agent") {
      sc.agents.push_back(detail::read_agent(c, diags));
      id = sc.agents.back().id;
    } else if (c.kind == "obstacle") {
      sc.obstacles.push_back(detail::read_obstacle(c, diags));
      id = sc.obstacles.back().id;
    } else {
      continue;
    }
    if (!id.empty() && !ids.insert(id).second) diags.push_back({c.line, c.kind + ".id", "duplicate id '" + id + "'"});
  }
  if (sc.agents.empty()) diags.push_back({top->line, "Scenario.agent", "at least one agent required"});
  if (!diags.empty()) throw ScenarioError(diags);
  return sc;
}

namespace detail {

inline std::string join_numbers(const DofVector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v[i]);
  return s;
}
inline std::string join_numbers(const Vec3& v) {
  return format_number(v[0]) + " " + format_number(v[1]) + " " + format_number(v[2]);
}

inline void write_random(std::ostream& os, const std::optional<RandomVias>& r, const std::string& pad) {
  if (!r) return;
  os << pad << "random {\n"
     << pad << "  count = " << r->count << "\n"
     << pad << "  min = " << join_numbers(r->min) << "\n"
     << pad << "  max = " << join_numbers(r->max) << "\n"
     << pad << "}\n";
}

}  // namespace detail

/// Text form accepted by load_scenario; load_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& sc) {
  using detail::join_numbers;
  std::ostringstream os;
  os << "scenario \"" << sc.name << "\" {\n";
  os << "  duration = " << format_number(sc.duration) << "\n";
  os << "  dt = " << format_number(sc.dt) << "\n";
  os << "  seed = " << sc.seed << "\n";
  os << "  feedback_hz = " << format_number(sc.feedback_hz) << "\n";
  os << "  band_mode = " << (sc.band_mode == BandMode::kFractal ? "fractal" : "plain_spring") << "\n";
  os << "  hysteresis = " << format_number(sc.hysteresis) << "\n";
  os << "  log_every = " << sc.log_every << "\n";
  os << "  viscous =";
  for (double c : sc.viscous.c) os << " " << format_number(c);
  os << "\n";
  os << "  workspace = " << join_numbers(sc.workspace_min) << " " << join_numbers(sc.workspace_max) << "\n";
  for (const AgentConfig& a : sc.agents) {
    const std::size_t n = dof_count(a.kind);
    os << "\n  agent \"" << a.id << "\" {\n";
    os << "    kind = " << agent_kind_name(a.kind) << "\n";
    os << "    pose = " << join_numbers(a.pose) << "\n";
    os << "    twist = " << join_numbers(a.twist) << "\n";
    os << "    inertia = " << join_numbers(a.inertia) << "\n";
    os << "    a_max = " << join_numbers(a.a_max) << "\n";
    os << "    v_max = " << join_numbers(a.v_max) << "\n";
    os << "    wrench_max = " << join_numbers(a.wrench_max) << "\n";
    if (a.feedback_hz) os << "    feedback_hz = " << format_number(*a.feedback_hz) << "\n";
    os << "    band {\n      k_band = " << join_numbers(a.k_band) << "\n      m_desired = "
       << join_numbers(a.m_desired) << "\n    }\n";
    DofVector k0(n), x0(n), xb(n), fm(n);
    for (std::size_t i = 0; i < n; ++i) {
      k0[i] = a.tracker[i].k0;
      x0[i] = a.tracker[i].x0;
      xb[i] = a.tracker[i].xb;
      fm[i] = a.tracker[i].f_max;
    }
    os << "    tracker {\n      k0 = " << join_numbers(k0) << "\n      x0 = " << join_numbers(x0)
       << "\n      xb = " << join_numbers(xb) << "\n      f_max = " << join_numbers(fm) << "\n    }\n";
    if (a.bubble) {
      const Bubble& b = *a.bubble;
      os << "    bubble {\n";
      if (b.shape == BubbleShape::kCircle) {
        os << "      shape = circle\n      radius = " << format_number(b.radius) << "\n";
      } else {
        os << "      shape = rectangle\n      half_extents = " << join_numbers(b.half_extents) << "\n";
      }
      os << "      k0 = " << format_number(b.repulsion.k0) << "\n      x0 = " << format_number(b.repulsion.x0)
         << "\n      xb = " << format_number(b.repulsion.xb) << "\n      f_max = "
         << format_number(b.repulsion.f_max) << "\n    }\n";
    }
    const PlanSpec& p = a.plan;
    os << "    plan {\n";
    os << "      trigger_radius = " << format_number(p.trigger_radius) << "\n";
    os << "      yaw_mode = " << (p.yaw_mode == YawMode::kExplicit ? "explicit" : "face_target") << "\n";
    os << "      yaw_deadband = " << format_number(p.yaw_deadband) << "\n";
    for (const DofVector& v : p.vias) os << "      via = " << join_numbers(v) << "\n";
    detail::write_random(os, p.random, "      ");
    for (const PlanSwapSpec& sw : p.schedule) {
      os << "      schedule " << format_number(sw.time) << " {\n";
      for (const DofVector& v : sw.vias) os << "        via = " << join_numbers(v) << "\n";
      detail::write_random(os, sw.random, "        ");
      os << "      }\n";
    }
    os << "    }\n  }\n";
  }
  for (const Obstacle& o : sc.obstacles) {
    os << "\n  obstacle \"" << o.id << "\" {\n";
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Box>) {
            os << "    type = box\n    center = " << join_numbers(g.center) << "\n    half = "
               << join_numbers(g.half) << "\n";
          } else if constexpr (std::is_same_v<T, Wall>) {
            os << "    type = wall\n    from = " << join_numbers(g.from) << "\n    to = " << join_numbers(g.to)
               << "\n    thickness = " << format_number(g.thickness) << "\n    z_range = "
               << format_number(g.z_min) << " " << format_number(g.z_max) << "\n";
          } else {
            os << "    type = gate\n    center = " << join_numbers(g.center) << "\n    axis = "
               << (g.axis == 0 ? "x" : "y") << "\n    direction = " << g.direction
               << "\n    width = " << format_number(g.width) << "\n    height = " << format_number(g.height)
               << "\n    frame = " << format_number(g.frame) << "\n";
          }
        },
        o.geometry);
    if (std::isfinite(o.active_from)) os << "    active_from = " << format_number(o.active_from) << "\n";
    if (std::isfinite(o.active_until)) os << "    active_until = " << format_number(o.active_until) << "\n";
    if (o.track) {
      os << "    track {\n";
      for (const auto& w : o.track->waypoints)
        os << "      at = " << format_number(w.t) << " " << join_numbers(w.position) << "\n";
      os << "    }\n";
    }
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline std::vector<DofVector> draw_vias(const RandomVias& r, AgentKind kind, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<DofVector> out;
  const std::size_t lin = linear_count(kind);
  for (std::size_t k = 0; k < r.count; ++k) {
    DofVector v(dof_count(kind));
    for (std::size_t i = 0; i < lin; ++i) v[i] = r.min[i] + unit_uniform(g) * (r.max[i] - r.min[i]);
    out.push_back(v);
  }
  return out;
}

/// Concrete via plan for agent `index`; random blocks are drawn from
/// streams derived from the scenario seed, the agent index and the block.
inline ViaPlan resolve_plan(const Scenario& sc, std::size_t index) {
  const AgentConfig& a = sc.agents.at(index);
  ViaPlan p;
  p.agent_id = a.id;
  p.kind = a.kind;
  p.trigger_radius = a.plan.trigger_radius;
  p.yaw_mode = a.plan.yaw_mode;
  p.yaw_deadband = a.plan.yaw_deadband;
  const std::uint64_t base = mix_seed(sc.seed ^ mix_seed(index + 1));
  p.vias = a.plan.vias;
  if (a.plan.random) {
    auto drawn = draw_vias(*a.plan.random, a.kind, mix_seed(base));
    p.vias.insert(p.vias.end(), drawn.begin(), drawn.end());
  }
  for (std::size_t k = 0; k < a.plan.schedule.size(); ++k) {
    const PlanSwapSpec& sw = a.plan.schedule[k];
    ViaSwap s{sw.time, sw.vias};
    if (sw.random) {
      auto drawn = draw_vias(*sw.random, a.kind, mix_seed(base + k + 1));
      s.vias.insert(s.vias.end(), drawn.begin(), drawn.end());
    }
    p.schedule.push_back(std::move(s));
  }
  return p;
}

inline std::vector<BandParams> band_params(const AgentConfig& a) {
  std::vector<BandParams> out;
  for (std::size_t i = 0; i < dof_count(a.kind); ++i)
    out.push_back({a.k_band[i], a.m_desired[i], a.a_max[i], a.v_max[i], dof_kind(a.kind, i)});
  return out;
}

inline AgentBody make_body(const AgentConfig& a) {
  return {a.id, a.kind, a.pose, a.twist, a.inertia, {a.a_max, a.v_max, a.wrench_max}, a.bubble};
}

}  // namespace ficnav
