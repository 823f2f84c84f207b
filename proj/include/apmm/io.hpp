#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "apmm/assembly.hpp"
#include "apmm/config.hpp"
#include "apmm/errors.hpp"
#include "apmm/geometry.hpp"
#include "apmm/sparse.hpp"
#include "apmm/timeloop.hpp"
#include "apmm/verification.hpp"

namespace apmm {

enum class Study { Run, MmsConvergence, EtaSweep, ConditionStudy };

inline const char* to_string(Study s) {
  switch (s) {
    case Study::Run: return "run";
    case Study::MmsConvergence: return "mms-convergence";
    case Study::EtaSweep: return "eta-sweep";
    case Study::ConditionStudy: return "condition-study";
  }
  return "?";
}

/// Everything one invocation needs. `hs` and `etas` feed the studies; an
/// empty `etas` selects the study's own default list.
struct RunSpec {
  Scheme scheme = Scheme::AP;
  PhysConfig phys;
  DiscConfig disc;
  SourceKind source = SourceKind::Eq3Mms;
  std::string output_dir = "out";
  Study study = Study::Run;
  std::vector<double> hs = {0.05, 0.025, 0.0125, 0.00625};
  std::vector<double> etas;
};

inline std::vector<double> default_etas(Study s) {
  if (s == Study::ConditionStudy) return {1e-2, 1e-4, 1e-6, 1e-8, 0.0};
  return {1e-1, 1e-2, 1e-3, 1e-4};
}

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline double parse_number(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::ParseError, where + ": '" + text + "' is not a number");
  return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), where));
  if (out.empty()) throw Error(ErrorKind::ParseError, where + ": empty list");
  return out;
}

template <class E, std::size_t K>
E parse_enum(const std::string& text, const std::pair<const char*, E> (&names)[K], const std::string& where) {
  for (const auto& [n, e] : names)
    if (text == n) return e;
  throw Error(ErrorKind::ParseError, where + ": unknown value '" + text + "'");
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

}  // namespace detail

/// Applies one key=value setting. Returns false for an unknown key.
inline bool apply_setting(RunSpec& spec, const std::string& key, const std::string& value, const std::string& where,
                          bool& dy_given) {
  static constexpr std::pair<const char*, Scheme> schemes[] = {{"ap", Scheme::AP}, {"naive", Scheme::Naive}};
  static constexpr std::pair<const char*, GeometryMode> modes[] = {{"strip", GeometryMode::Strip},
                                                                    {"full", GeometryMode::Full}};
  static constexpr std::pair<const char*, SourceKind> sources[] = {{"eq3_mms", SourceKind::Eq3Mms},
                                                                   {"eq3_literal", SourceKind::Eq3Literal},
                                                                   {"eq4", SourceKind::Eq4},
                                                                   {"smooth_mms", SourceKind::SmoothMms},
                                                                   {"zero", SourceKind::Zero}};
  static constexpr std::pair<const char*, Study> studies[] = {{"run", Study::Run},
                                                              {"mms-convergence", Study::MmsConvergence},
                                                              {"eta-sweep", Study::EtaSweep},
                                                              {"condition-study", Study::ConditionStudy}};
  auto num = [&] { return detail::parse_number(value, where); };
  if (key == "eta") spec.phys.eta = num();
  else if (key == "nu") spec.phys.nu = num();
  else if (key == "lambda") spec.phys.lambda_ref = num();
  else if (key == "L") spec.phys.L = num();
  else if (key == "l") spec.phys.l = num();
  else if (key == "T") spec.phys.T = num();
  else if (key == "dx") {
    spec.disc.dx = num();
    if (!dy_given) spec.disc.dy = spec.disc.dx;
  } else if (key == "dy") {
    spec.disc.dy = num();
    dy_given = true;
  } else if (key == "dt") spec.disc.dt = num();
  else if (key == "mode") spec.disc.mode = detail::parse_enum(value, modes, where);
  else if (key == "scheme") spec.scheme = detail::parse_enum(value, schemes, where);
  else if (key == "source") spec.source = detail::parse_enum(value, sources, where);
  else if (key == "study") spec.study = detail::parse_enum(value, studies, where);
  else if (key == "output") spec.output_dir = value;
  else if (key == "hs") spec.hs = detail::parse_list(value, where);
  else if (key == "etas") spec.etas = detail::parse_list(value, where);
  else return false;
  return true;
}

/// Reads a flat `key = value` file ('#' starts a comment) on top of `base`,
/// then applies the overrides in order and validates the result. Setting dx
/// also sets dy unless dy is given explicitly. An empty path means no file.
inline RunSpec parse_config(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {},
                            RunSpec base = {}) {
  RunSpec spec = std::move(base);
  bool dy_given = false;
  auto set = [&](const std::string& key, const std::string& value, const std::string& where) {
    if (!apply_setting(spec, key, value, where, dy_given))
      throw Error(ErrorKind::UnknownKey, where + ": unknown key '" + key + "'");
  };

  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config file " + path);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      const std::string where = path + ":" + std::to_string(lineno);
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where + ": expected key=value");
      const std::string key = detail::trim(line.substr(0, eq));
      if (key.empty()) throw Error(ErrorKind::ParseError, where + ": missing key");
      set(key, detail::trim(line.substr(eq + 1)), where);
    }
  }
  for (const auto& [k, v] : overrides) set(k, v, "--" + k);
  require_valid(spec.phys, spec.disc);
  return spec;
}

/// The spec as `key=value` lines that parse_config reads back unchanged.
inline std::string config_echo(const RunSpec& s) {
  std::ostringstream os;
  os << "scheme=" << to_string(s.scheme) << '\n'
     << "source=" << to_string(s.source) << '\n'
     << "study=" << to_string(s.study) << '\n'
     << "eta=" << format_double(s.phys.eta) << '\n'
     << "nu=" << format_double(s.phys.nu) << '\n'
     << "lambda=" << format_double(s.phys.lambda_ref) << '\n'
     << "L=" << format_double(s.phys.L) << '\n'
     << "l=" << format_double(s.phys.l) << '\n'
     << "T=" << format_double(s.phys.T) << '\n'
     << "dx=" << format_double(s.disc.dx) << '\n'
     << "dy=" << format_double(s.disc.dy) << '\n'
     << "dt=" << format_double(s.disc.dt) << '\n'
     << "mode=" << to_string(s.disc.mode) << '\n'
     << "hs=" << detail::join(s.hs) << '\n'
     << "output=" << s.output_dir << '\n';
  if (!s.etas.empty()) os << "etas=" << detail::join(s.etas) << '\n';
  return os.str();
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

}  // namespace detail

inline void write_config_echo(const RunSpec& s, const std::string& path) {
  auto out = detail::open_out(path);
  out << config_echo(s);
  detail::finish(out, path);
}

/// One line per plasma node: x y phi [q]. Header lines start with '#'.
inline void dump_field(const Grid& g, const State& s, const std::string& path, const std::string& echo = {}) {
  auto out = detail::open_out(path);
  std::istringstream lines(echo);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << "# t=" << format_double(s.t) << " n=" << s.n << '\n';
  const bool with_q = !s.q.empty();
  out << (with_q ? "# x y phi q\n" : "# x y phi\n");
  for (int id = 0; id < g.node_count(); ++id) {
    if (g.is_ghost(id)) continue;
    const auto [i, j] = g.position(id);
    out << format_double(g.x(i)) << ' ' << format_double(g.y(j)) << ' ' << format_double(s.phi[id]);
    if (with_q) out << ' ' << format_double(s.q[id]);
    out << '\n';
  }
  detail::finish(out, path);
}

struct FieldDump {
  std::vector<std::string> header;
  bool has_q = false;
  std::vector<double> x, y, phi, q;
};

inline FieldDump read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  FieldDump d;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      d.header.push_back(line);
      if (line == "# x y phi q") d.has_q = true;
      continue;
    }
    std::istringstream ls(line);
    std::vector<double> cols;
    for (std::string tok; ls >> tok;) cols.push_back(detail::parse_number(tok, path + ":" + std::to_string(lineno)));
    if (cols.size() != (d.has_q ? 4u : 3u))
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": wrong column count");
    d.x.push_back(cols[0]);
    d.y.push_back(cols[1]);
    d.phi.push_back(cols[2]);
    if (d.has_q) d.q.push_back(cols[3]);
  }
  return d;
}

inline void write_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                      const std::string& path) {
  auto out = detail::open_out(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << '\n';
  }
  detail::finish(out, path);
}

inline void write_csv(std::vector<ConvergenceRow> rows, const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) cells.push_back({format_double(r.h), format_double(r.dt), format_double(r.err_l2)});
  write_csv({"h", "dt", "err_l2"}, cells, path);
}

inline void write_csv(std::vector<EtaRow> rows, const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eta > b.eta; });
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({format_double(r.eta), format_double(r.err_l1_time), format_double(r.err_l2_time)});
  write_csv({"eta", "err_l1_time", "err_l2_time"}, cells, path);
}

inline void write_csv(std::vector<CondRow> rows, const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eta > b.eta; });
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({format_double(r.eta), format_double(r.kappa_ap),
                     r.kappa_naive ? format_double(*r.kappa_naive) : std::string()});
  write_csv({"eta", "kappa_ap", "kappa_naive"}, cells, path);
}

}  // namespace apmm
