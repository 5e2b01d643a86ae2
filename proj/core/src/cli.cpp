#include "kbdepth/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "kbdepth/alloc.hpp"
#include "kbdepth/census.hpp"
#include "kbdepth/closure.hpp"
#include "kbdepth/cluster.hpp"
#include "kbdepth/depth.hpp"
#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/noise.hpp"
#include "kbdepth/parser.hpp"
#include "kbdepth/report.hpp"
#include "kbdepth/search.hpp"
#include "kbdepth/selfcheck.hpp"
#include "kbdepth/trace.hpp"
#include "kbdepth/tradeoff.hpp"
#include "kbdepth/version.hpp"

namespace kbdepth {
namespace {

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kUsage, "cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Json input_json(const std::string& path, const std::string& text) {
  Json j = Json::object();
  j["path"] = path;
  j["digest"] = digest_hex(text_digest(text));
  return j;
}

KnowledgeBase load_kb(const std::string& path, Json& inputs) {
  std::string text = read_input(path);
  inputs["kb"] = input_json(path, text);
  return parse_kb(text);
}

Formula load_query(const KnowledgeBase& kb, const std::string& text) {
  Formula q = parse_formula(text);
  if (!kb.symbols().covers(q))
    throw Error(Errc::kInvalidArgument,
                "query uses symbols outside the knowledge base: " + text);
  return q;
}

Json formula_texts(const std::vector<Formula>& fs) {
  Json arr = Json::array();
  for (const Formula& f : fs) arr.push_back(f.to_string());
  return arr;
}

std::vector<Formula> load_formula_lines(const std::string& text) {
  std::vector<Formula> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    try {
      out.push_back(parse_formula(line.substr(a, b - a + 1)));
    } catch (const Error& e) {
      throw Error(Errc::kParse, std::string("bad formula: ") + e.what(),
                  lineno);
    }
  }
  return out;
}

BitString bits_from_hex(const std::string& hex, uint64_t nbits) {
  std::vector<uint8_t> bytes;
  if (hex.size() % 2 != 0)
    throw Error(Errc::kDecode, "hex code must have an even digit count");
  for (size_t i = 0; i < hex.size(); i += 2) {
    auto nib = [&](char c) -> unsigned {
      if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
      throw Error(Errc::kDecode, "bad hex digit in code");
    };
    bytes.push_back(static_cast<uint8_t>((nib(hex[i]) << 4) | nib(hex[i + 1])));
  }
  if (nbits > bytes.size() * 8)
    throw Error(Errc::kDecode, "declared bit count exceeds the hex payload");
  return BitString::from_bytes(bytes, nbits);
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(Errc::kUsage, "bad number in list: " + part);
    }
  }
  return out;
}

std::vector<uint32_t> parse_index_list(const std::string& text) {
  std::vector<uint32_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      size_t used = 0;
      unsigned long v = std::stoul(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(static_cast<uint32_t>(v));
    } catch (const std::exception&) {
      throw Error(Errc::kUsage, "bad index in list: " + part);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Json trace_json(const DerivationTrace& trace) {
  Json steps = Json::array();
  for (const TraceStep& s : trace.steps) {
    Json step = Json::object();
    step["rule"] = s.rule_id;
    step["pointers"] = s.pointers;
    steps.push_back(std::move(step));
  }
  Json j = Json::object();
  j["m"] = trace.base_size;
  j["steps"] = std::move(steps);
  j["output_pointer"] = trace.output_pointer;
  return j;
}

Json dr_json(const DrReport& dr) {
  Json j = Json::object();
  j["samples"] = dr.samples;
  j["comparisons"] = dr.comparisons;
  j["violations"] = dr.violations;
  j["violation_rate"] = number(dr.violation_rate);
  if (dr.first_violation) {
    Json v = Json::object();
    v["scope"] = dr.first_violation->scope;
    v["small"] = dr.first_violation->small;
    v["large"] = dr.first_violation->large;
    v["added"] = dr.first_violation->added;
    v["gain_small"] = number(dr.first_violation->gain_small);
    v["gain_large"] = number(dr.first_violation->gain_large);
    j["first_violation"] = std::move(v);
  } else {
    j["first_violation"] = nullptr;
  }
  return j;
}

Json proxy_json(const DescriptionProxy& proxy) {
  Json j = Json::object();
  j["bits"] = proxy.bits;
  switch (proxy.source) {
    case ProxySource::kPointer: j["source"] = "pointer"; break;
    case ProxySource::kTrace: j["source"] = "trace"; break;
    case ProxySource::kRaw: j["source"] = "raw"; break;
  }
  j["pointer_bits"] =
      proxy.pointer_bits ? Json(*proxy.pointer_bits) : Json(nullptr);
  j["trace_bits"] = proxy.trace_bits ? Json(*proxy.trace_bits) : Json(nullptr);
  j["raw_bits"] = proxy.raw_bits;
  j["trace_exact"] = proxy.trace_exact;
  return j;
}

Json costs_json(const AmortizedCosts& c) {
  Json j = Json::object();
  j["depth"] = c.depth;
  j["proxy_bits"] = c.proxy_bits;
  j["frequency"] = number(c.frequency);
  j["cost_cache"] = number(c.cost_cache);
  j["cost_derive"] = number(c.cost_derive);
  j["winner"] = c.cache_wins ? "cache" : "derive";
  return j;
}

struct Options {
  std::string kb_path;
  std::string query;
  std::string cache_path;
  std::string workload_path;
  std::string candidates_path;
  std::string noise_path;
  std::string validate_hex;
  uint64_t validate_bits = 0;
  double frequency = 0.0;
  double rho = 1.0;
  double c_hit = 1.0;
  std::string sweep;
  double budget = 0.0;
  uint64_t seed_size = 3;
  bool brute = false;
  uint64_t dr_samples = 0;
  uint64_t dr_seed = 7;
  double delta_clust = 0.5;
  double kappa = 0.5;
  double lambda = 0.0;
  std::string selection;
  int64_t sla_depth = 0;
  uint64_t m = 0;
  uint64_t n = 0;
  double delta0 = 0.0;
  uint64_t samples = 50;
  uint64_t seed = 0;
  uint64_t instances = 20;
  uint64_t node_budget = 1000000;
  uint64_t tie_cap = 100000;
  bool sampled = false;
  double loss_rate = -1.0;
  double pollution_rate = -1.0;
  std::string format;  // empty means the subcommand's default
};

SearchLimits limits_of(const Options& o) {
  SearchLimits l;
  l.node_budget = o.node_budget;
  l.tie_cap = o.tie_cap;
  return l;
}

// Noise comes either from a spec file or from sampling rates on the line.
NoiseSpec load_spec_input(const Options& o, const KnowledgeBase& kb,
                          Json& inputs) {
  std::string path;
  std::string text;
  if (!o.noise_path.empty()) {
    path = o.noise_path;
    text = read_input(path);
  } else if (o.loss_rate >= 0.0 || o.pollution_rate >= 0.0) {
    path = "(sampled)";
    Json spec = Json::object();
    spec["loss_rate"] = std::max(0.0, o.loss_rate);
    spec["pollution_rate"] = std::max(0.0, o.pollution_rate);
    spec["seed"] = o.seed;
    text = spec.dump();
  } else {
    throw Error(Errc::kUsage,
                "need --noise or --loss-rate/--pollution-rate");
  }
  inputs["noise"] = input_json(path, text);
  return load_noise_spec(text, kb);
}

CostModel model_of(const Options& o) { return CostModel{o.rho, o.c_hit}; }

int cmd_core(const Options& o, std::ostream& out) {
  Json j = report_header("core");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  CoreResult core = atom_core(kb);
  j["m"] = kb.operational_base().size();
  j["core_size"] = core.core.size();
  j["removed"] = formula_texts(core.shortcuts);
  j["core"] = formula_texts(core.core.ordered());
  out << render_report(j);
  return 0;
}

int cmd_depth(const Options& o, std::ostream& out) {
  Json j = report_header("depth");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  Formula q = load_query(kb, o.query);
  std::vector<Formula> cache;
  if (!o.cache_path.empty()) {
    std::string text = read_input(o.cache_path);
    j["inputs"]["cache"] = input_json(o.cache_path, text);
    cache = load_formula_lines(text);
    for (const Formula& f : cache)
      if (!kb.symbols().covers(f))
        throw Error(Errc::kInvalidArgument,
                    "cache entry uses symbols outside the knowledge base: " +
                        f.to_string());
  }
  j["query"] = q.to_string();
  DepthProfile profile = depth_profile(kb, q, cache);
  Json depths = Json::object();
  depths["core"] = depth_json(profile.n_int);
  depths["operational"] = depth_json(profile.n_op);
  depths["cached"] = depth_json(profile.n_cached);
  j["depths"] = std::move(depths);

  DepthResult d = derivation_depth(q, kb.operational_base(), kb.system());
  Json steps = Json::array();
  for (const WitnessStep& w : d.witness) {
    Json step = Json::object();
    step["derived"] = w.derived.to_string();
    step["rule"] = w.rule_id;
    step["premises"] = formula_texts(w.premises);
    steps.push_back(std::move(step));
  }
  j["witness"] = std::move(steps);
  DerivationTrace trace = witness_to_trace(q, d, kb.operational_base());
  j["witness_checked"] =
      replay_validate(trace, kb.operational_base(), kb.system()) == q;
  if (!kb.operational_base().contains(q)) {
    j["predecessors"] =
        formula_texts(predecessors(q, kb.operational_base(), kb.system()));
  } else {
    j["predecessors"] = nullptr;
  }
  out << render_report(j);
  return 0;
}

int cmd_trace(const Options& o, std::ostream& out) {
  Json j = report_header("trace");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  if (!o.validate_hex.empty()) {
    j["mode"] = "validate";
    BitString bits = bits_from_hex(o.validate_hex, o.validate_bits);
    DerivationTrace trace = decode_trace(bits, kb.system());
    Formula replay = replay_validate(trace, kb.operational_base(), kb.system());
    j["trace"] = trace_json(trace);
    j["bit_count"] = bits.size();
    j["replay"] = replay.to_string();
    if (!o.query.empty()) {
      Formula q = load_query(kb, o.query);
      j["query"] = q.to_string();
      j["matches_query"] = replay == q;
    }
    out << render_report(j);
    return 0;
  }
  j["mode"] = "emit";
  Formula q = load_query(kb, o.query);
  j["query"] = q.to_string();
  DepthResult d = derivation_depth(q, kb.operational_base(), kb.system());
  if (!d.depth.is_finite())
    throw Error(Errc::kUnreachableQuery, "query lies outside the closure");
  DerivationTrace trace = witness_to_trace(q, d, kb.operational_base());
  TraceEncoding enc = encode_trace(trace, kb.system());
  j["trace"] = trace_json(trace);
  j["bit_count"] = enc.bits.size();
  j["bits"] = enc.bits.to_bit_text();
  j["hex"] = enc.bits.to_hex();
  j["replay_matches"] =
      replay_validate(trace, kb.operational_base(), kb.system()) == q;
  out << render_report(j);
  return 0;
}

int cmd_encode(const Options& o, std::ostream& out) {
  Json j = report_header("encode");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  Formula q = load_query(kb, o.query);
  j["query"] = q.to_string();
  BitString enc = canonical_encode(q, kb.symbols());
  j["bit_count"] = enc.size();
  j["bits"] = enc.to_bit_text();
  j["hex"] = enc.to_hex();
  j["roundtrip"] = canonical_decode(enc, kb.symbols()) == q;
  out << render_report(j);
  return 0;
}

int cmd_nsearch(const Options& o, std::ostream& out) {
  Json j = report_header("nsearch");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  Formula q = load_query(kb, o.query);
  j["query"] = q.to_string();
  SearchLimits limits = limits_of(o);

  ShortestTraceResult st =
      min_trace_length(q, kb.operational_base(), kb.system(), limits);
  j["n"] = st.length;
  j["n_exact"] = st.exact;

  EssMode mode = o.sampled ? EssMode::kSampled : EssMode::kExact;
  EssResult ess = ess_plus(q, kb.operational_base(), kb.system(), mode, limits);
  j["support"] = formula_texts(ess.atoms);
  j["support_size"] = ess.atoms.size();
  j["support_exact"] = ess.exact;

  LocalityReport loc = locality_report(kb, q, limits);
  Json l = Json::object();
  l["a_size"] = loc.a_size;
  l["m_eff"] = loc.m_eff;
  l["depth"] = loc.depth;
  l["l_full"] = number(loc.l_full);
  l["l_eff"] = number(loc.l_eff);
  l["improvement"] = loc.improvement ? number(*loc.improvement) : Json(nullptr);
  l["lambda"] = number(loc.lambda);
  l["support_exact"] = loc.ess_exact;
  j["locality"] = std::move(l);

  Json notes = Json::array();
  if (!ess.exact || !loc.ess_exact) notes.push_back(kSampledNote);
  j["notes"] = std::move(notes);
  out << render_report(j);
  return 0;
}

int cmd_tradeoff(const Options& o, std::ostream& out) {
  Json j = report_header("tradeoff");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  Formula q = load_query(kb, o.query);
  j["query"] = q.to_string();
  Json model = Json::object();
  model["rho"] = number(o.rho);
  model["c_hit"] = number(o.c_hit);
  j["model"] = std::move(model);
  SearchLimits limits = limits_of(o);

  DescriptionProxy proxy = description_proxy(q, kb.operational_base(),
                                             kb.system(), kb.symbols(), limits);
  j["proxy"] = proxy_json(proxy);
  AmortizedCosts costs =
      amortized_costs(q, kb.operational_base(), kb.system(), kb.symbols(),
                      o.frequency, model_of(o), limits);
  j["costs"] = costs_json(costs);
  j["notes"] = Json::array({kProxyNote});
  out << render_report(j);
  return 0;
}

int cmd_fc(const Options& o, std::ostream& out) {
  Json j = report_header("fc");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  Formula q = load_query(kb, o.query);
  j["query"] = q.to_string();
  SearchLimits limits = limits_of(o);

  CriticalFrequency fc = critical_frequency(
      q, kb.operational_base(), kb.system(), kb.symbols(), model_of(o), limits);
  j["m"] = fc.m;
  j["depth"] = fc.depth;
  j["proxy_bits"] = fc.proxy_bits;
  j["rho"] = number(o.rho);
  j["c_hit"] = number(o.c_hit);
  j["f_star"] = fc.f_star ? number(*fc.f_star) : Json(nullptr);
  j["theory_scale"] = number(fc.theory_scale);
  j["ratio"] = fc.ratio ? number(*fc.ratio) : Json(nullptr);

  auto bisected = crossover_bisect(o.rho, fc.proxy_bits, fc.depth, o.c_hit);
  Json bi = Json::object();
  bi["f_star"] = bisected ? number(*bisected) : Json(nullptr);
  bool agrees = bisected.has_value() == fc.f_star.has_value();
  if (agrees && bisected)
    agrees = std::fabs(*bisected - *fc.f_star) <=
             1e-6 * std::max(1.0, *fc.f_star);
  bi["agrees"] = agrees;
  j["bisect_check"] = std::move(bi);

  Json sweep = Json::array();
  std::vector<std::string> csv_lines;
  if (!o.sweep.empty()) {
    for (double rho : parse_double_list(o.sweep)) {
      CostModel m{rho, o.c_hit};
      CriticalFrequency row = critical_frequency(
          q, kb.operational_base(), kb.system(), kb.symbols(), m, limits);
      Json r = Json::object();
      r["rho"] = number(rho);
      r["f_star"] = row.f_star ? number(*row.f_star) : Json(nullptr);
      r["theory_scale"] = number(row.theory_scale);
      r["ratio"] = row.ratio ? number(*row.ratio) : Json(nullptr);
      sweep.push_back(std::move(r));
      csv_lines.push_back(
          csv_row({fmt6(rho), row.f_star ? fmt6(*row.f_star) : "",
                   fmt6(row.theory_scale), row.ratio ? fmt6(*row.ratio) : ""}));
    }
  }
  j["sweep"] = std::move(sweep);
  if (o.format == "csv") {
    out << csv_row({"rho", "f_star", "theory_scale", "ratio"});
    for (const std::string& line : csv_lines) out << line;
    return 0;
  }
  out << render_report(j);
  return 0;
}

int cmd_allocate(const Options& o, std::ostream& out) {
  Json j = report_header("allocate");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  std::string wl_text = read_input(o.workload_path);
  j["inputs"]["workload"] = input_json(o.workload_path, wl_text);
  Workload workload = load_workload(wl_text);
  std::string cand_text = read_input(o.candidates_path);
  j["inputs"]["candidates"] = input_json(o.candidates_path, cand_text);
  SearchLimits limits = limits_of(o);
  CandidateSet candidates = load_candidates(
      cand_text, kb.operational_base(), kb.system(), kb.symbols(), limits);

  for (const WorkloadEntry& e : workload.entries)
    if (!kb.symbols().covers(e.query))
      throw Error(Errc::kInvalidArgument,
                  "workload query uses symbols outside the knowledge base: " +
                      e.text);

  std::vector<Formula> items;
  std::vector<double> costs;
  Json item_rows = Json::array();
  for (const CandidateItem& c : candidates.items) {
    items.push_back(c.formula);
    costs.push_back(c.cost);
    Json row = Json::object();
    row["formula"] = c.text;
    row["cost"] = number(c.cost);
    row["cost_explicit"] = c.cost_explicit;
    item_rows.push_back(std::move(row));
  }
  j["m"] = kb.operational_base().size();
  j["budget"] = number(o.budget);
  j["items"] = std::move(item_rows);

  DepthObjective objective(kb.system(), kb.symbols(), kb.operational_base(),
                           workload.entries, items);
  Json excluded = Json::array();
  for (size_t qi : objective.excluded_queries())
    excluded.push_back(workload.entries[qi].text);
  j["excluded_queries"] = std::move(excluded);

  Allocation greedy = greedy_knapsack(objective, costs, o.budget, o.seed_size);
  Json g = Json::object();
  g["selection"] = greedy.selection;
  Json picked = Json::array();
  for (uint32_t id : greedy.selection)
    picked.push_back(candidates.items[id].text);
  g["selected"] = std::move(picked);
  g["delta"] = number(greedy.delta);
  g["cost"] = number(greedy.cost);
  j["greedy"] = std::move(g);

  Json per_query = Json::array();
  for (size_t qi = 0; qi < workload.entries.size(); ++qi) {
    Json row = Json::object();
    row["query"] = workload.entries[qi].text;
    row["prob"] = number(workload.entries[qi].prob);
    row["depth_before"] = depth_json(objective.query_depth(qi, {}));
    row["depth_after"] =
        depth_json(objective.query_depth(qi, greedy.selection));
    per_query.push_back(std::move(row));
  }
  j["queries"] = std::move(per_query);

  if (o.brute) {
    Allocation brute = brute_force_opt(objective, costs, o.budget);
    Json b = Json::object();
    b["selection"] = brute.selection;
    b["delta"] = number(brute.delta);
    b["cost"] = number(brute.cost);
    j["brute"] = std::move(b);
    j["greedy_over_optimal"] =
        brute.delta > 0 ? number(greedy.delta / brute.delta) : Json(nullptr);
  } else {
    j["brute"] = nullptr;
  }
  if (o.dr_samples > 0) {
    j["dr"] = dr_json(dr_check(objective, o.dr_samples, o.dr_seed));
  } else {
    j["dr"] = nullptr;
  }
  j["evaluations"] = objective.evaluations();
  out << render_report(j);
  return 0;
}

int cmd_cluster(const Options& o, std::ostream& out) {
  Json j = report_header("cluster");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  std::string wl_text = read_input(o.workload_path);
  j["inputs"]["workload"] = input_json(o.workload_path, wl_text);
  Workload workload = load_workload(wl_text);
  SearchLimits limits = limits_of(o);
  MinHashParams params;

  j["delta_clust"] = number(o.delta_clust);

  auto cluster_row = [&](const QueryCluster& c) {
    Json row = Json::object();
    row["members"] = c.members;
    Json queries = Json::array();
    for (size_t m : c.members) queries.push_back(workload.entries[m].text);
    row["queries"] = std::move(queries);
    row["core"] = formula_texts(c.core);
    row["ext_size"] = c.ext.size();
    row["supplement_size"] = c.supplement.size();
    row["kappa"] = number(c.kappa);
    row["weight"] = number(c.weight);
    row["mean_depth"] = number(c.mean_depth);
    return row;
  };

  if (o.candidates_path.empty()) {
    ClusterModel model =
        cluster_queries(kb, workload, o.delta_clust, params, limits);
    Json rows = Json::array();
    for (const QueryCluster& c : model.clusters) rows.push_back(cluster_row(c));
    j["clusters"] = std::move(rows);
    Json excluded = Json::array();
    for (size_t qi : model.excluded)
      excluded.push_back(workload.entries[qi].text);
    j["excluded_queries"] = std::move(excluded);
    j["bucket_pairs"] = model.bucket_pairs;
    j["exact_pairs"] = model.exact_pairs;
    out << render_report(j);
    return 0;
  }

  std::string cand_text = read_input(o.candidates_path);
  j["inputs"]["candidates"] = input_json(o.candidates_path, cand_text);
  CandidateSet candidates = load_candidates(
      cand_text, kb.operational_base(), kb.system(), kb.symbols(), limits);
  j["kappa_threshold"] = number(o.kappa);
  j["budget"] = number(o.budget);

  ClusterAllocation ca = cluster_aware_allocate(
      kb, workload, candidates, o.budget, o.delta_clust, o.kappa, o.seed_size,
      params, limits);
  Json rows = Json::array();
  for (const QueryCluster& c : ca.model.clusters) rows.push_back(cluster_row(c));
  j["clusters"] = std::move(rows);
  Json excluded = Json::array();
  for (size_t qi : ca.model.excluded)
    excluded.push_back(workload.entries[qi].text);
  j["excluded_queries"] = std::move(excluded);
  j["audit"] = ca.audit;
  Json eff = Json::array();
  for (const QueryCluster& c : ca.effective) eff.push_back(cluster_row(c));
  j["effective_clusters"] = std::move(eff);
  j["full_size"] = ca.full_size;
  j["reduced_size"] = ca.reduced_size;
  Json reduced = Json::array();
  for (uint32_t id : ca.reduced_items)
    reduced.push_back(candidates.items[id].text);
  j["reduced"] = std::move(reduced);

  Json alloc = Json::object();
  Json selected = Json::array();
  Json original_ids = Json::array();
  for (uint32_t id : ca.allocation.selection) {
    original_ids.push_back(ca.reduced_items[id]);
    selected.push_back(candidates.items[ca.reduced_items[id]].text);
  }
  alloc["selection"] = std::move(original_ids);
  alloc["selected"] = std::move(selected);
  alloc["delta"] = number(ca.allocation.delta);
  alloc["cost"] = number(ca.allocation.cost);
  j["allocation"] = std::move(alloc);
  out << render_report(j);
  return 0;
}

int cmd_noise(const Options& o, std::ostream& out) {
  Json j = report_header("noise");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  NoiseSpec spec = load_spec_input(o, kb, j["inputs"]);
  SearchLimits limits = limits_of(o);

  Json spec_json = Json::object();
  spec_json["lost"] = formula_texts(spec.lost);
  spec_json["spurious"] = formula_texts(spec.spurious);
  spec_json["generated"] = spec.generated;
  if (spec.generated) {
    spec_json["loss_rate"] = number(spec.loss_rate);
    spec_json["pollution_rate"] = number(spec.pollution_rate);
    spec_json["seed"] = spec.seed;
  }
  j["spec"] = std::move(spec_json);

  NoisyBase noisy = apply_noise(kb.operational_base(), spec, kb.symbols());
  j["m"] = noisy.m;
  j["m_tilde"] = noisy.m_tilde;
  j["recovery_depth"] = depth_json(
      reconstruction_depth(kb.operational_base(), spec, kb.system(),
                           kb.symbols()));
  j["conversion_bits"] = base_conversion_bits(kb.operational_base(), spec);

  if (!o.query.empty()) {
    Formula q = load_query(kb, o.query);
    j["query"] = q.to_string();
    PerturbationReport pr = perturbation_report(
        q, kb.operational_base(), spec, kb.system(), kb.symbols());
    Json p = Json::object();
    p["clean_depth"] = depth_json(pr.clean_depth);
    p["preserved_depth"] = depth_json(pr.preserved_depth);
    p["noisy_depth"] = depth_json(pr.noisy_depth);
    p["recovery_depth"] = depth_json(pr.recovery_depth);
    p["degrade_checked"] = pr.degrade_checked;
    p["degrade_ok"] = pr.degrade_ok;
    p["monotone_ok"] = pr.monotone_ok;
    p["loss_only_checked"] = pr.loss_only_checked;
    p["loss_only_ok"] = pr.loss_only_ok;
    p["inflation"] = pr.inflation ? number(*pr.inflation) : Json(nullptr);
    j["perturbation"] = std::move(p);

    if (o.frequency > 0.0) {
      NoisyTradeoff nt =
          noisy_tradeoff(q, kb, spec, o.frequency, model_of(o), limits);
      Json t = Json::object();
      t["noisy_costs"] = costs_json(nt.noisy_costs);
      t["noisy_f_star"] =
          nt.noisy_fc.f_star ? number(*nt.noisy_fc.f_star) : Json(nullptr);
      t["clean_costs"] =
          nt.clean_costs ? costs_json(*nt.clean_costs) : Json(nullptr);
      Json nw = Json::object();
      nw["checked"] = nt.no_worse_checked;
      nw["ok"] = nt.no_worse_ok;
      nw["clean_opt"] = number(nt.clean_opt);
      nw["noisy_opt"] = number(nt.noisy_opt);
      nw["allowance"] = number(nt.allowance);
      t["no_worse"] = std::move(nw);
      j["tradeoff"] = std::move(t);
    } else {
      j["tradeoff"] = nullptr;
    }
  } else {
    j["perturbation"] = nullptr;
    j["tradeoff"] = nullptr;
  }

  if (!o.candidates_path.empty()) {
    std::string wl_text = read_input(o.workload_path);
    j["inputs"]["workload"] = input_json(o.workload_path, wl_text);
    Workload workload = load_workload(wl_text);
    std::string cand_text = read_input(o.candidates_path);
    j["inputs"]["candidates"] = input_json(o.candidates_path, cand_text);
    CandidateSet candidates = load_candidates(cand_text, noisy.observed,
                                              kb.system(), kb.symbols(), limits);
    std::vector<uint32_t> selection = parse_index_list(o.selection);
    for (uint32_t id : selection)
      if (id >= candidates.items.size())
        throw Error(Errc::kUsage, "selection index out of range");
    RobustObjective ro = robust_objective(kb, workload, spec, candidates,
                                          selection, o.lambda, limits);
    Json r = Json::object();
    r["lambda"] = number(ro.lambda);
    r["delta"] = number(ro.delta);
    r["penalty"] = number(ro.penalty);
    r["value"] = number(ro.value);
    Json terms = Json::array();
    for (const RobustTerm& t : ro.terms) {
      Json term = Json::object();
      term["item"] = t.item;
      term["formula"] = candidates.items[t.item].text;
      term["support_size"] = t.support_size;
      term["polluted"] = t.polluted;
      term["exposure"] = number(t.exposure);
      terms.push_back(std::move(term));
    }
    r["terms"] = std::move(terms);
    j["robust"] = std::move(r);
  } else {
    j["robust"] = nullptr;
  }
  out << render_report(j);
  return 0;
}

int cmd_twophase(const Options& o, std::ostream& out) {
  Json j = report_header("twophase");
  KnowledgeBase kb = load_kb(o.kb_path, j["inputs"]);
  std::string wl_text = read_input(o.workload_path);
  j["inputs"]["workload"] = input_json(o.workload_path, wl_text);
  Workload workload = load_workload(wl_text);
  NoiseSpec spec = load_spec_input(o, kb, j["inputs"]);
  std::string cand_text = read_input(o.candidates_path);
  j["inputs"]["candidates"] = input_json(o.candidates_path, cand_text);
  SearchLimits limits = limits_of(o);

  // Skip the closure gates here: repair may make entries derivable that the
  // observed base alone cannot reach, and the allocator reports the rest.
  NoisyBase noisy = apply_noise(kb.operational_base(), spec, kb.symbols());
  CandidateSet candidates =
      load_candidates(cand_text, noisy.observed, kb.system(), kb.symbols(),
                      limits, /*require_entailed=*/false);

  TwoPhaseResult r =
      two_phase_allocate(kb, workload, spec, candidates, o.sla_depth, o.budget,
                         o.seed_size, o.dr_samples, o.dr_seed, limits);
  j["sla_depth"] = r.sla_depth;
  j["budget"] = number(r.budget);
  j["critical"] = formula_texts(r.critical);
  j["recoverable"] = formula_texts(r.recoverable);
  j["irrecoverable"] = formula_texts(r.irrecoverable);
  j["index_bits"] = r.index_bits;
  j["comp_cost"] = number(r.comp_cost);
  j["phase2_budget"] = number(r.phase2_budget);
  Json rejected = Json::array();
  for (uint32_t id : r.rejected) rejected.push_back(candidates.items[id].text);
  j["rejected"] = std::move(rejected);
  j["selection"] = r.selection;
  Json selected = Json::array();
  for (uint32_t id : r.selection) selected.push_back(candidates.items[id].text);
  j["selected"] = std::move(selected);
  j["delta_add"] = number(r.delta_add);
  j["max_depth"] = depth_json(r.max_depth);
  Json unreachable = Json::array();
  for (size_t qi : r.unreachable_queries)
    unreachable.push_back(workload.entries[qi].text);
  j["unreachable_queries"] = std::move(unreachable);
  j["feasible"] = r.feasible;
  j["reason"] = r.reason;
  j["dr"] = dr_json(r.dr);
  out << render_report(j);
  return r.feasible ? 0 : 1;
}

int cmd_richness(const Options& o, std::ostream& out) {
  Json j = report_header("richness");
  RichnessCensus census = richness_census(o.m, o.n, o.delta0);
  j["m"] = census.m;
  j["n"] = census.n;
  j["delta0"] = number(census.delta0);
  j["count"] = census.count;
  j["count_saturated"] = census.count_saturated;
  j["log2_count"] =
      census.count == 0 ? Json(nullptr) : number(census.log2_count);
  j["bound_log2"] = number(census.bound_log2);
  j["satisfied"] = census.satisfied;
  j["enumerated"] = census.enumerated;
  if (census.enumerated) {
    j["enumerated_count"] = census.enumerated_count;
    j["enumeration_matches"] = census.enumeration_matches;
  }
  out << render_report(j);
  return 0;
}

int cmd_tightness(const Options& o, std::ostream& out) {
  TightnessSuite suite = tightness_suite(o.m, o.samples, o.seed);
  if (o.format == "csv") {
    out << csv_row({"sample", "depth", "trace_bits", "ratio", "picked"});
    for (size_t i = 0; i < suite.rows.size(); ++i) {
      const TightnessSample& row = suite.rows[i];
      std::string picked;
      for (size_t k = 0; k < row.picked.size(); ++k)
        picked += (k ? " " : "") + std::to_string(row.picked[k]);
      out << csv_row({std::to_string(i), std::to_string(row.depth),
                      std::to_string(row.trace_bits), fmt6(row.ratio), picked});
    }
    return suite.all_depths_ok ? 0 : 1;
  }
  Json j = report_header("tightness");
  j["m"] = suite.m;
  j["n"] = suite.n;
  j["samples"] = suite.samples;
  j["seed"] = suite.seed;
  j["denominator"] = number(suite.denominator);
  j["all_depths_ok"] = suite.all_depths_ok;
  j["min_ratio"] = number(suite.min_ratio);
  j["max_ratio"] = number(suite.max_ratio);
  j["mean_ratio"] = number(suite.mean_ratio);
  Json rows = Json::array();
  for (const TightnessSample& row : suite.rows) {
    Json r = Json::object();
    r["picked"] = row.picked;
    r["depth"] = row.depth;
    r["trace_bits"] = row.trace_bits;
    r["ratio"] = number(row.ratio);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["notes"] = Json::array({kProxyNote});
  out << render_report(j);
  return suite.all_depths_ok ? 0 : 1;
}

int cmd_verify(const Options& o, std::ostream& out) {
  SelfCheckOptions opts;
  opts.instances = o.instances;
  opts.seed = o.seed == 0 ? 1 : o.seed;
  opts.limits = limits_of(o);
  SelfCheckReport report = run_selfcheck(opts);

  if (o.format == "json") {
    Json j = report_header("verify");
    j["instances"] = report.instances;
    j["checks"] = report.checks;
    Json inv = Json::object();
    for (const auto& [name, count] : report.per_invariant) inv[name] = count;
    j["invariants"] = std::move(inv);
    Json failures = Json::array();
    for (const CheckFailure& f : report.failures) {
      Json row = Json::object();
      row["invariant"] = f.invariant;
      row["instance"] = f.instance;
      row["detail"] = f.detail;
      failures.push_back(std::move(row));
    }
    j["failures"] = std::move(failures);
    j["ok"] = report.ok();
    out << render_report(j);
    return report.ok() ? 0 : 1;
  }

  for (const auto& [name, count] : report.per_invariant) {
    bool failed = false;
    for (const CheckFailure& f : report.failures)
      if (f.invariant == name) failed = true;
    out << (failed ? "FAIL" : "ok") << " " << name << " (" << count
        << " checks)\n";
  }
  for (const CheckFailure& f : report.failures)
    out << "FAIL " << f.invariant << " instance " << f.instance << ": "
        << f.detail << "\n";
  out << "verify: " << (report.ok() ? "PASS" : "FAIL") << " (" << report.checks
      << " checks, " << report.failures.size() << " failures)\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"knowledge-base inference cost toolkit", "kbdepth"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  int rc = 0;

  auto add_kb = [&](CLI::App* sub) {
    sub->add_option("--kb", o.kb_path, "knowledge base file")->required();
  };
  auto add_query = [&](CLI::App* sub, bool required) {
    CLI::Option* opt = sub->add_option("--query", o.query, "ground conjunction");
    if (required) opt->required();
  };
  auto add_limits = [&](CLI::App* sub) {
    sub->add_option("--node-budget", o.node_budget, "search state budget");
    sub->add_option("--tie-cap", o.tie_cap, "shortest-trace tie cap");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--rho", o.rho, "bits-to-steps exchange rate");
    sub->add_option("--c-hit", o.c_hit, "cache lookup cost");
  };

  CLI::App* core = app.add_subcommand("core", "irredundant premise core");
  add_kb(core);
  core->callback([&] { rc = cmd_core(o, out); });

  CLI::App* depth = app.add_subcommand("depth", "depth profile with witness");
  add_kb(depth);
  add_query(depth, true);
  depth->add_option("--cache", o.cache_path, "cached formulas, one per line");
  depth->callback([&] { rc = cmd_depth(o, out); });

  CLI::App* trace = app.add_subcommand("trace", "emit or validate traces");
  add_kb(trace);
  add_query(trace, false);
  trace->add_option("--validate", o.validate_hex, "hex trace code to check");
  trace->add_option("--nbits", o.validate_bits, "bit count of --validate");
  trace->callback([&] {
    if (o.validate_hex.empty() && o.query.empty())
      throw CLI::RequiredError("--query or --validate");
    if (!o.validate_hex.empty() && o.validate_bits == 0)
      throw CLI::RequiredError("--nbits");
    rc = cmd_trace(o, out);
  });

  CLI::App* encode = app.add_subcommand("encode", "canonical formula code");
  add_kb(encode);
  add_query(encode, true);
  encode->callback([&] { rc = cmd_encode(o, out); });

  CLI::App* nsearch =
      app.add_subcommand("nsearch", "shortest traces and their support");
  add_kb(nsearch);
  add_query(nsearch, true);
  add_limits(nsearch);
  nsearch->add_flag("--sampled", o.sampled,
                    "report support from the first shortest trace only");
  nsearch->callback([&] { rc = cmd_nsearch(o, out); });

  CLI::App* tradeoff = app.add_subcommand("tradeoff", "cache versus derive");
  add_kb(tradeoff);
  add_query(tradeoff, true);
  add_model(tradeoff);
  add_limits(tradeoff);
  tradeoff->add_option("--frequency", o.frequency, "expected uses")->required();
  tradeoff->callback([&] { rc = cmd_tradeoff(o, out); });

  CLI::App* fc = app.add_subcommand("fc", "break-even frequency");
  add_kb(fc);
  add_query(fc, true);
  add_model(fc);
  add_limits(fc);
  fc->add_option("--sweep", o.sweep, "comma list of rho values");
  fc->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  fc->callback([&] { rc = cmd_fc(o, out); });

  CLI::App* allocate = app.add_subcommand("allocate", "budgeted cache picks");
  add_kb(allocate);
  add_limits(allocate);
  allocate->add_option("--workload", o.workload_path, "query mix")->required();
  allocate->add_option("--candidates", o.candidates_path, "candidate pool")
      ->required();
  allocate->add_option("--budget", o.budget, "bit budget")->required();
  allocate->add_option("--seed-size", o.seed_size, "greedy seed size");
  allocate->add_flag("--brute", o.brute, "compare with exhaustive optimum");
  allocate->add_option("--dr-samples", o.dr_samples,
                       "diminishing-returns probes");
  allocate->add_option("--dr-seed", o.dr_seed, "probe seed");
  allocate->callback([&] { rc = cmd_allocate(o, out); });

  CLI::App* cluster = app.add_subcommand("cluster", "workload clustering");
  add_kb(cluster);
  add_limits(cluster);
  cluster->add_option("--workload", o.workload_path, "query mix")->required();
  cluster->add_option("--delta-clust", o.delta_clust,
                      "cohesion distance bound");
  cluster->add_option("--candidates", o.candidates_path,
                      "candidate pool (enables allocation)");
  cluster->add_option("--budget", o.budget, "bit budget for allocation");
  cluster->add_option("--kappa-threshold", o.kappa,
                      "cohesion threshold for splitting");
  cluster->add_option("--seed-size", o.seed_size, "greedy seed size");
  cluster->callback([&] { rc = cmd_cluster(o, out); });

  CLI::App* noise = app.add_subcommand("noise", "perturbed-base analysis");
  add_kb(noise);
  add_limits(noise);
  add_model(noise);
  noise->add_option("--noise", o.noise_path, "noise spec json");
  noise->add_option("--loss-rate", o.loss_rate, "sampled member loss rate");
  noise->add_option("--pollution-rate", o.pollution_rate,
                    "sampled spurious-addition rate");
  noise->add_option("--seed", o.seed, "sampling seed");
  add_query(noise, false);
  noise->add_option("--frequency", o.frequency,
                    "expected uses (enables the cost block)");
  noise->add_option("--workload", o.workload_path,
                    "query mix (for the robust block)");
  noise->add_option("--candidates", o.candidates_path,
                    "candidate pool (enables the robust block)");
  noise->add_option("--selection", o.selection, "comma list of item indices");
  noise->add_option("--lambda", o.lambda, "pollution penalty weight");
  noise->callback([&] {
    if (!o.candidates_path.empty() && o.workload_path.empty())
      throw CLI::RequiredError("--workload");
    rc = cmd_noise(o, out);
  });

  CLI::App* twophase =
      app.add_subcommand("twophase", "repair then allocate under a depth bound");
  add_kb(twophase);
  add_limits(twophase);
  twophase->add_option("--workload", o.workload_path, "query mix")->required();
  twophase->add_option("--noise", o.noise_path, "noise spec json");
  twophase->add_option("--loss-rate", o.loss_rate, "sampled member loss rate");
  twophase->add_option("--pollution-rate", o.pollution_rate,
                       "sampled spurious-addition rate");
  twophase->add_option("--seed", o.seed, "sampling seed");
  twophase->add_option("--candidates", o.candidates_path, "candidate pool")
      ->required();
  twophase->add_option("--sla-depth", o.sla_depth, "worst-case depth bound")
      ->required();
  twophase->add_option("--budget", o.budget, "bit budget")->required();
  twophase->add_option("--seed-size", o.seed_size, "greedy seed size");
  twophase->add_option("--dr-samples", o.dr_samples,
                       "diminishing-returns probes");
  twophase->add_option("--dr-seed", o.dr_seed, "probe seed");
  twophase->callback([&] { rc = cmd_twophase(o, out); });

  CLI::App* richness = app.add_subcommand("richness", "query count census");
  richness->add_option("--m", o.m, "base size")->required();
  richness->add_option("--n", o.n, "target cost")->required();
  richness->add_option("--delta0", o.delta0, "bound slack in [0,1]");
  richness->callback([&] { rc = cmd_richness(o, out); });

  CLI::App* tightness =
      app.add_subcommand("tightness", "sampled depth and code-length family");
  tightness->add_option("--m", o.m, "base size")->required();
  tightness->add_option("--samples", o.samples, "sample count");
  tightness->add_option("--seed", o.seed, "sample seed");
  tightness->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  tightness->callback([&] { rc = cmd_tightness(o, out); });

  CLI::App* verify = app.add_subcommand("verify", "cross-implementation checks");
  verify->add_option("--instances", o.instances, "random instances");
  verify->add_option("--seed", o.seed, "instance seed");
  verify->add_option("--format", o.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  add_limits(verify);
  verify->callback([&] { rc = cmd_verify(o, out); });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.line() > 0) {
      err << " (line " << e.line();
      if (e.column() > 0) err << ", column " << e.column();
      err << ")";
    }
    err << "\n";
    return (e.code() == Errc::kParse || e.code() == Errc::kUsage) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace kbdepth
