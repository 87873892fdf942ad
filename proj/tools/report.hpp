#pragma once

// Report plumbing for the command-line tool: JSON with 17 significant
// digits, RFC-4180 CSV and a small SVG plot of geodesic traces.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "finslerlab/finslerlab.hpp"

namespace cli {

using json = nlohmann::ordered_json;

/// Exit codes.
inline constexpr int kPass = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;

/// Configuration problem (bad flag combination, unknown model, ...).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

inline Check make_check(std::string name, double residual, double tol, std::string note = {}) {
  return {std::move(name), residual, tol, std::isfinite(residual) && residual <= tol, std::move(note)};
}

inline Check failed_check(std::string name, double tol, std::string note) {
  return {std::move(name), std::numeric_limits<double>::infinity(), tol, false, std::move(note)};
}

struct Report {
  std::string command;
  json config = json::object();
  std::vector<Check> checks;
  json result = json::object();
  double seconds = 0.0;

  bool pass() const {
    for (const Check& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Serializes with floating-point numbers at 17 significant digits;
/// non-finite numbers become null.
inline void write_json(std::ostream& os, const json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 2);
      }
      os << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent + 2);
      }
      os << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    default: os << j.dump();
  }
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const Report& r, bool timestamp) {
  json j;
  j["schema"] = 1;
  j["tool"] = "finslerlab";
  j["version"] = finslerlab::kVersion;
  j["command"] = r.command;
  j["config"] = r.config;
  json checks = json::array();
  for (const Check& c : r.checks) {
    json cj;
    cj["name"] = c.name;
    cj["max_residual"] = c.max_residual;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  j["result"] = r.result;
  j["pass"] = r.pass();
  // wall time and clock are the only nondeterministic fields
  if (timestamp) {
    j["timing"] = {{"seconds", r.seconds}};
    j["timestamp"] = utc_timestamp();
  }
  return j;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_checks_csv(std::ostream& os, const Report& r) {
  os << "name,max_residual,tolerance,pass,note\r\n";
  for (const Check& c : r.checks)
    os << csv_field(c.name) << ',' << format_double(c.max_residual) << ',' << format_double(c.tolerance) << ','
       << (c.pass ? "true" : "false") << ',' << csv_field(c.note) << "\r\n";
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path + " for writing");
  write(f);
  if (!f) throw UsageError("write to " + path + " failed");
}

/// Traces projected on (x1, x2); the ball of radius R fills the inscribed circle.
inline void write_svg(std::ostream& os, const std::vector<finslerlab::GeodesicTrace>& traces, double R) {
  const double c = 400.0;
  auto px = [&](double v) { return format_double(c + c * v / R); };
  auto py = [&](double v) { return format_double(c - c * v / R); };
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" viewBox=\"0 0 800 "
        "800\">\n"
     << "  <circle cx=\"400\" cy=\"400\" r=\"400\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  for (const auto& tr : traces) {
    if (tr.points.size() < 2) continue;
    os << "  <polyline fill=\"none\" stroke=\"" << (tr.truncated ? "#c00" : "#036") << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      if (i) os << ' ';
      os << px(tr.points[i][0]) << ',' << py(tr.points[i][1]);
    }
    os << "\"/>\n";
    const auto& a = tr.points.front();
    const auto& b = tr.points.back();
    os << "  <line x1=\"" << px(a[0]) << "\" y1=\"" << py(a[1]) << "\" x2=\"" << px(b[0]) << "\" y2=\"" << py(b[1])
       << "\" stroke=\"#e90\" stroke-width=\"0.75\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace cli
