#include "kbdepth/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "kbdepth/version.hpp"

namespace kbdepth {

double round6(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

Json number(double v) {
  double r = round6(v);
  if (std::isfinite(r) && r == std::floor(r) && std::fabs(r) < 1e15)
    return Json(static_cast<int64_t>(r));
  return Json(r);
}

Json depth_json(const Depth& d) {
  if (d.is_finite()) return Json(d.value());
  return Json("unreachable");
}

uint64_t text_digest(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(uint64_t digest) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

Json report_header(const std::string& op) {
  Json j = Json::object();
  j["tool"] = "kbdepth";
  j["version"] = kVersion;
  j["op"] = op;
  j["inputs"] = Json::object();
  return j;
}

std::string render_report(const Json& j) { return j.dump(2) + "\n"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

}  // namespace kbdepth
