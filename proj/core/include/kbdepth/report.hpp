#ifndef KBDEPTH_REPORT_HPP_
#define KBDEPTH_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbdepth/depth.hpp"

namespace kbdepth {

// All machine-readable output preserves insertion order so reports diff
// cleanly run to run.
using Json = nlohmann::ordered_json;

// Doubles are reported at six significant digits so reruns and reference
// values compare exactly as text.
double round6(double v);
Json number(double v);

// Finite depths are integers; the sentinel is the string "unreachable".
Json depth_json(const Depth& d);

// FNV-1a over raw input text, hex form, for provenance lines in reports.
uint64_t text_digest(const std::string& text);
std::string digest_hex(uint64_t digest);

// {"tool", "version", "op", "inputs"} skeleton every command report starts from.
Json report_header(const std::string& op);

std::string render_report(const Json& j);  // two-space indent, trailing newline

// Attached wherever encoded lengths are reported.
inline constexpr const char* kProxyNote =
    "description lengths are constructive upper bounds from a fixed code, "
    "not minimal descriptions";
// Attached wherever a support set may be partial.
inline constexpr const char* kSampledNote =
    "support set is an under-approximation from the traces examined";

// Minimal CSV quoting for the tabular summaries.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace kbdepth

#endif  // KBDEPTH_REPORT_HPP_
