#pragma once

// CSV trajectory log, schema version 1.
//
//   line 1   # ficnav-log 1 dt=<dt> log_every=<n>
//   line 2   t,<agent>.<channel>.<dof>...,<agent>.advances,...
//   then     one row per logged step
//
// Channels per agent, in order: vp xd vd x v acc w wext. DoF names are
// x y yaw (planar) or x y z roll pitch yaw (spatial). Numbers use the
// shortest round-trip decimal form.

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ficnav/dof.hpp"
#include "ficnav/metrics.hpp"
#include "ficnav/scenario.hpp"

namespace ficnav {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr std::array<std::string_view, 8> kChannelNames{"vp", "xd", "vd", "x", "v", "acc", "w", "wext"};

struct AgentSample {
  DofVector vp, xd, vd, x, v, acc, w, wext;
  std::size_t advances = 0;

  const DofVector& channel(std::size_t c) const {
    const DofVector* all[] = {&vp, &xd, &vd, &x, &v, &acc, &w, &wext};
    return *all[c];
  }
};

/// Everything observed at the start of one integration step.
struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  std::vector<AgentSample> agents;
};

struct LogAgent {
  std::string id;
  AgentKind kind = AgentKind::kPlanar;
};

inline std::vector<std::string> csv_columns(const std::vector<LogAgent>& agents) {
  std::vector<std::string> cols{"t"};
  for (const LogAgent& a : agents) {
    for (std::string_view ch : kChannelNames)
      for (std::size_t i = 0; i < dof_count(a.kind); ++i)
        cols.push_back(a.id + "." + std::string(ch) + "." + std::string(dof_name(a.kind, i)));
    cols.push_back(a.id + ".advances");
  }
  return cols;
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<LogAgent> agents, double dt, std::size_t log_every)
      : os_(os), agents_(std::move(agents)) {
    os_ << "# ficnav-log " << kCsvSchemaVersion << " dt=" << format_number(dt) << " log_every=" << log_every
        << "\n";
    const auto cols = csv_columns(agents_);
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << "\n";
  }

  void write(const StepRecord& r) {
    line_.clear();
    line_ += format_number(r.t);
    for (std::size_t a = 0; a < r.agents.size(); ++a) {
      const AgentSample& s = r.agents[a];
      for (std::size_t c = 0; c < kChannelNames.size(); ++c)
        for (double v : s.channel(c)) {
          line_ += ',';
          line_ += format_number(v);
        }
      line_ += ',';
      line_ += std::to_string(s.advances);
    }
    line_ += '\n';
    os_ << line_;
  }

 private:
  std::ostream& os_;
  std::vector<LogAgent> agents_;
  std::string line_;
};

/// Parses a log written by CsvWriter. The time step in the result is the
/// spacing between logged rows.
inline TrajectoryLog read_csv_log(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ficnav-log ", 0) != 0)
    throw InvalidInput("read_csv_log: missing '# ficnav-log' preamble");
  std::istringstream pre(line.substr(13));
  int version = 0;
  pre >> version;
  if (version != kCsvSchemaVersion) throw InvalidInput("read_csv_log: unsupported schema version");
  double dt = 0.0;
  std::size_t every = 1;
  std::string tok;
  while (pre >> tok) {
    if (tok.rfind("dt=", 0) == 0) dt = std::stod(tok.substr(3));
    if (tok.rfind("log_every=", 0) == 0) every = std::stoul(tok.substr(10));
  }
  if (!std::getline(is, line)) throw InvalidInput("read_csv_log: missing header row");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
  }
  if (cols.empty() || cols[0] != "t") throw InvalidInput("read_csv_log: first column must be 't'");

  TrajectoryLog log;
  log.dt = dt * double(every);
  std::vector<std::size_t> widths;
  std::size_t c = 1;
  while (c < cols.size()) {
    const std::string& name = cols[c];
    const auto dot = name.find('.');
    if (dot == std::string::npos) throw InvalidInput("read_csv_log: bad column '" + name + "'");
    AgentTrack a;
    a.id = name.substr(0, dot);
    std::size_t n = 0;
    const std::string vp_prefix = a.id + ".vp.";
    while (c + n < cols.size() && cols[c + n].rfind(vp_prefix, 0) == 0) ++n;
    if (n != 3 && n != 6) throw InvalidInput("read_csv_log: agent '" + a.id + "' has unsupported DoF count");
    const AgentKind kind = n == 3 ? AgentKind::kPlanar : AgentKind::kSpatial;
    for (std::size_t i = 0; i < n; ++i) a.dofs.push_back(dof_kind(kind, i));
    const std::vector<std::string> expect = csv_columns({{a.id, kind}});
    for (std::size_t k = 1; k < expect.size(); ++k)
      if (c + k - 1 >= cols.size() || cols[c + k - 1] != expect[k])
        throw InvalidInput("read_csv_log: unexpected column layout for agent '" + a.id + "'");
    c += expect.size() - 1;
    widths.push_back(n);
    log.agents.push_back(std::move(a));
  }

  std::vector<double> row;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    row.clear();
    std::istringstream rs(line);
    while (std::getline(rs, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != cols.size()) throw InvalidInput("read_csv_log: row width does not match header");
    std::size_t k = 1;
    for (std::size_t a = 0; a < log.agents.size(); ++a) {
      AgentTrack& tr = log.agents[a];
      std::vector<DofVector>* chans[] = {&tr.vp, &tr.xd, &tr.vd, &tr.x, &tr.v, &tr.acc, &tr.w, &tr.wext};
      for (auto* ch : chans) {
        DofVector v(widths[a]);
        for (std::size_t i = 0; i < widths[a]; ++i) v[i] = row[k++];
        ch->push_back(v);
      }
      tr.advances.push_back(static_cast<long>(row[k++]));
    }
  }
  return log;
}

}  // namespace ficnav
