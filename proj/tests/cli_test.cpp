#include "kbdepth/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "kbdepth/version.hpp"
#include "support/tempdir.hpp"

namespace kbdepth {
namespace {

using Json = nlohmann::json;
using testing::TempDir;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
  Json json;  // parsed stdout when it is JSON
};

RunResult run(const std::vector<std::string>& args, bool parse_json = true) {
  std::ostringstream out, err;
  RunResult r;
  r.code = run_command(args, out, err);
  r.out = out.str();
  r.err = err.str();
  if (parse_json && !r.out.empty() && r.out[0] == '{')
    r.json = Json::parse(r.out);
  return r;
}

const char kFamily[] =
    "parent(alice,bob).\n"
    "parent(bob,carol).\n"
    "ancestor(X,Y) :- parent(X,Y).\n"
    "ancestor(X,Z) :- parent(X,Y), ancestor(Y,Z).\n";

const char kChainStored[] =
    "a0.\n"
    "a1 :- a0.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n"
    "%stored\n"
    "a3.\n";

TEST(Cli, EnvelopeAndCore) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", "p(a).\nq(b).\nr(c) :- p(a).\nr(c).\n");
  RunResult r = run({"core", "--kb", kb});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["tool"], "kbdepth");
  EXPECT_EQ(r.json["version"], std::string(kVersion));
  EXPECT_EQ(r.json["op"], "core");
  ASSERT_TRUE(r.json["inputs"].contains("kb"));
  EXPECT_EQ(r.json["inputs"]["kb"]["path"], kb);
  std::string digest = r.json["inputs"]["kb"]["digest"];
  EXPECT_EQ(digest.size(), 16u);
  // r(c) follows from p(a), so the core drops it.
  EXPECT_EQ(r.json["m"], 3);
  EXPECT_EQ(r.json["core_size"], 2);
  ASSERT_EQ(r.json["removed"].size(), 1u);
  EXPECT_EQ(r.json["removed"][0], "r(c)");
}

TEST(Cli, DepthProfileWithWitness) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", kFamily);
  RunResult r = run({"depth", "--kb", kb, "--query", "ancestor(alice,carol)"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["op"], "depth");
  EXPECT_EQ(r.json["query"], "ancestor(alice,carol)");
  EXPECT_EQ(r.json["depths"]["operational"], 2);
  EXPECT_EQ(r.json["depths"]["core"], 2);
  EXPECT_TRUE(r.json["witness_checked"].get<bool>());
  EXPECT_FALSE(r.json["witness"].empty());
  EXPECT_FALSE(r.json["predecessors"].is_null());

  // Cached formulas join the base through --cache.
  std::string cache = dir.write("cache.txt", "ancestor(bob,carol)\n");
  RunResult c = run({"depth", "--kb", kb, "--query", "ancestor(alice,carol)",
                     "--cache", cache});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.json["depths"]["cached"], 1);
  EXPECT_TRUE(c.json["inputs"].contains("cache"));

  // Base members have no predecessors to report.
  RunResult base = run({"depth", "--kb", kb, "--query", "parent(alice,bob)"});
  ASSERT_EQ(base.code, 0);
  EXPECT_EQ(base.json["depths"]["operational"], 0);
  EXPECT_TRUE(base.json["predecessors"].is_null());

  // Unreachable queries are a domain failure.
  RunResult bad = run({"depth", "--kb", kb, "--query", "parent(carol,alice)"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_FALSE(bad.err.empty());
}

TEST(Cli, TraceEmitThenValidateRoundTrip) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", kFamily);
  RunResult emitted = run({"trace", "--kb", kb, "--query",
                           "ancestor(alice,carol)"});
  ASSERT_EQ(emitted.code, 0) << emitted.err;
  EXPECT_EQ(emitted.json["mode"], "emit");
  EXPECT_TRUE(emitted.json["replay_matches"].get<bool>());
  std::string hex = emitted.json["hex"];
  int nbits = emitted.json["bit_count"];
  EXPECT_EQ(emitted.json["bits"].get<std::string>().size(),
            static_cast<size_t>(nbits));

  RunResult checked = run({"trace", "--kb", kb, "--validate", hex, "--nbits",
                           std::to_string(nbits), "--query",
                           "ancestor(alice,carol)"});
  ASSERT_EQ(checked.code, 0) << checked.err;
  EXPECT_EQ(checked.json["mode"], "validate");
  EXPECT_TRUE(checked.json["matches_query"].get<bool>());
  EXPECT_EQ(checked.json["replay"], "ancestor(alice,carol)");

  // Truncating the stream must fail loudly.
  RunResult broken = run({"trace", "--kb", kb, "--validate", hex, "--nbits",
                          std::to_string(nbits - 4)});
  EXPECT_EQ(broken.code, 1);
  // --validate needs --nbits.
  RunResult vague = run({"trace", "--kb", kb, "--validate", hex});
  EXPECT_EQ(vague.code, 2);
}

TEST(Cli, EncodeMatchesFrozenExample) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", "p(a).\nq(b).\n");
  RunResult r = run({"encode", "--kb", kb, "--query", "p(a) & q(b)"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["bit_count"], 21);
  EXPECT_EQ(r.json["bits"], "010011010100100010010");
  EXPECT_EQ(r.json["hex"], "4d4890");
  EXPECT_TRUE(r.json["roundtrip"].get<bool>());
}

TEST(Cli, NsearchReportsSupportAndLocality) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", kFamily);
  RunResult r = run({"nsearch", "--kb", kb, "--query",
                     "ancestor(alice,carol)"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["n"], 2);
  EXPECT_TRUE(r.json["n_exact"].get<bool>());
  EXPECT_TRUE(r.json["support_exact"].get<bool>());
  EXPECT_EQ(r.json["support_size"], 2);
  EXPECT_EQ(r.json["locality"]["a_size"], 2);
  EXPECT_EQ(r.json["locality"]["m_eff"], 2);
  EXPECT_TRUE(r.json["notes"].empty());
}

TEST(Cli, TradeoffAndFc) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", kChainStored);
  RunResult t = run({"tradeoff", "--kb", kb, "--query", "a5", "--frequency",
                     "16"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_EQ(t.json["costs"]["depth"], 2);
  EXPECT_TRUE(t.json["costs"].contains("winner"));
  EXPECT_TRUE(t.json["proxy"].contains("source"));
  EXPECT_EQ(t.json["model"]["rho"], 1);

  // Missing --frequency is a usage error.
  EXPECT_EQ(run({"tradeoff", "--kb", kb, "--query", "a5"}).code, 2);

  RunResult f = run({"fc", "--kb", kb, "--query", "a5"});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_EQ(f.json["depth"], 2);
  ASSERT_FALSE(f.json["f_star"].is_null());
  EXPECT_TRUE(f.json["bisect_check"]["agrees"].get<bool>());

  RunResult sweep = run({"fc", "--kb", kb, "--query", "a5", "--sweep",
                         "1,2,4,8", "--format", "csv"},
                        false);
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  EXPECT_EQ(sweep.out.substr(0, sweep.out.find('\n')),
            "rho,f_star,theory_scale,ratio");
  EXPECT_EQ(std::count(sweep.out.begin(), sweep.out.end(), '\n'), 5);
}

TEST(Cli, AllocateGreedyBruteAndDr) {
  TempDir dir;
  std::string kb = dir.write("kb.txt",
                             "root.\n"
                             "l1 :- root.\nl2 :- l1.\nl3 :- l2.\nl4 :- l3.\n"
                             "r1 :- root.\nr2 :- r1.\nr3 :- r2.\n");
  std::string wl = dir.write("wl.jsonl",
                             "{\"horizon\": 100}\n"
                             "{\"query\": \"l4\", \"prob\": 0.6}\n"
                             "{\"query\": \"r3\", \"prob\": 0.4}\n");
  std::string cands = dir.write("cands.txt",
                                "l2 @cost=8\nl3 @cost=8\nr2 @cost=8\n");
  RunResult r = run({"allocate", "--kb", kb, "--workload", wl, "--candidates",
                     cands, "--budget", "16", "--brute", "--dr-samples", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["greedy"]["delta"], 2.6);
  EXPECT_EQ(r.json["brute"]["delta"], 2.6);
  EXPECT_EQ(r.json["greedy_over_optimal"], 1);
  EXPECT_EQ(r.json["dr"]["violations"], 0);
  ASSERT_EQ(r.json["queries"].size(), 2u);
  EXPECT_EQ(r.json["queries"][0]["depth_before"], 4);
  EXPECT_EQ(r.json["queries"][0]["depth_after"], 1);
  EXPECT_EQ(r.json["items"].size(), 3u);
}

TEST(Cli, ClusterModelAndAllocation) {
  TempDir dir;
  std::string kb = dir.write("kb.txt",
                             "a1.\na2.\nb1.\nb2.\n"
                             "xa :- a1, a2.\n"
                             "ya :- a1, a2.\n"
                             "xb :- b1, b2.\n"
                             "yb :- b1, b2.\n"
                             "cross :- a1, b1.\n");
  std::string wl = dir.write("wl.jsonl",
                             "{\"horizon\": 100}\n"
                             "{\"query\": \"xa\", \"prob\": 0.25}\n"
                             "{\"query\": \"ya\", \"prob\": 0.25}\n"
                             "{\"query\": \"xb\", \"prob\": 0.25}\n"
                             "{\"query\": \"yb\", \"prob\": 0.25}\n");
  RunResult model = run({"cluster", "--kb", kb, "--workload", wl,
                         "--delta-clust", "0.5"});
  ASSERT_EQ(model.code, 0) << model.err;
  EXPECT_EQ(model.json["clusters"].size(), 2u);
  EXPECT_FALSE(model.json.contains("allocation"));

  std::string cands = dir.write("cands.txt",
                                "xa @cost=8\nxb @cost=8\ncross @cost=1\n");
  RunResult alloc = run({"cluster", "--kb", kb, "--workload", wl,
                         "--candidates", cands, "--budget", "16"});
  ASSERT_EQ(alloc.code, 0) << alloc.err;
  EXPECT_EQ(alloc.json["full_size"], 3);
  EXPECT_EQ(alloc.json["reduced_size"], 2);
  EXPECT_EQ(alloc.json["allocation"]["selection"].size(), 2u);
  EXPECT_EQ(alloc.json["audit"].size(), 2u);
}

TEST(Cli, NoiseSpecFileAndSampledRates) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", kChainStored);
  std::string spec = dir.write("noise.json",
                               "{\"lost\": [\"a3\"], \"spurious\": []}");
  RunResult r = run({"noise", "--kb", kb, "--noise", spec, "--query", "a5",
                     "--frequency", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["m"], 2);
  EXPECT_EQ(r.json["m_tilde"], 1);
  EXPECT_EQ(r.json["recovery_depth"], 3);
  EXPECT_EQ(r.json["spec"]["lost"][0], "a3");
  EXPECT_EQ(r.json["perturbation"]["clean_depth"], 2);
  EXPECT_EQ(r.json["perturbation"]["noisy_depth"], 5);
  EXPECT_TRUE(r.json["perturbation"]["degrade_ok"].get<bool>());
  EXPECT_TRUE(r.json["tradeoff"]["no_worse"]["ok"].get<bool>());

  RunResult sampled = run({"noise", "--kb", kb, "--loss-rate", "0.5",
                           "--pollution-rate", "0", "--seed", "5"});
  ASSERT_EQ(sampled.code, 0) << sampled.err;
  EXPECT_EQ(sampled.json["inputs"]["noise"]["path"], "(sampled)");
  EXPECT_TRUE(sampled.json["spec"]["generated"].get<bool>());
  EXPECT_TRUE(sampled.json["perturbation"].is_null());

  // Neither a spec file nor rates: usage error.
  EXPECT_EQ(run({"noise", "--kb", kb}).code, 2);
}

TEST(Cli, TwophaseFeasibleAndInfeasible) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", kChainStored);
  std::string wl = dir.write("wl.jsonl",
                             "{\"horizon\": 10}\n"
                             "{\"query\": \"a5\", \"prob\": 1.0}\n");
  std::string spec = dir.write("noise.json",
                               "{\"lost\": [\"a3\"], \"spurious\": []}");
  std::string cands = dir.write("cands.txt", "a4 @cost=8\n");
  RunResult ok = run({"twophase", "--kb", kb, "--workload", wl, "--noise",
                      spec, "--candidates", cands, "--sla-depth", "3",
                      "--budget", "64"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(ok.json["feasible"].get<bool>());
  EXPECT_EQ(ok.json["recoverable"][0], "a3");
  EXPECT_LE(ok.json["max_depth"].get<int>(), 3);
  EXPECT_EQ(ok.json["reason"], "");

  RunResult broke = run({"twophase", "--kb", kb, "--workload", wl, "--noise",
                         spec, "--candidates", cands, "--sla-depth", "3",
                         "--budget", "0.5"});
  EXPECT_EQ(broke.code, 1);
  EXPECT_FALSE(broke.json["feasible"].get<bool>());
  EXPECT_NE(broke.json["reason"].get<std::string>().find("budget"),
            std::string::npos);
}

TEST(Cli, RichnessAndTightness) {
  RunResult r = run({"richness", "--m", "16", "--n", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json["count"], 43680);
  EXPECT_TRUE(r.json["satisfied"].get<bool>());

  RunResult t = run({"tightness", "--m", "16", "--samples", "5", "--seed",
                     "2026"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(t.json["all_depths_ok"].get<bool>());
  EXPECT_EQ(t.json["rows"][0]["trace_bits"], 57);

  RunResult csv = run({"tightness", "--m", "16", "--samples", "3", "--format",
                       "csv"},
                      false);
  ASSERT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')),
            "sample,depth,trace_bits,ratio,picked");
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 4);
}

TEST(Cli, VerifyTextAndJson) {
  RunResult text = run({"verify", "--instances", "3", "--seed", "4"}, false);
  ASSERT_EQ(text.code, 0) << text.out;
  EXPECT_NE(text.out.find("verify: PASS"), std::string::npos);
  EXPECT_NE(text.out.find("ok "), std::string::npos);

  RunResult j = run({"verify", "--instances", "3", "--seed", "4", "--format",
                     "json"});
  ASSERT_EQ(j.code, 0);
  EXPECT_TRUE(j.json["ok"].get<bool>());
  EXPECT_EQ(j.json["instances"], 3);
  EXPECT_TRUE(j.json["failures"].empty());
}

TEST(Cli, UsageAndErrorExitCodes) {
  TempDir dir;
  std::string kb = dir.write("kb.txt", "p(a).\n");
  EXPECT_EQ(run({"no-such-op"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}, false).code, 0);
  EXPECT_EQ(run({"core", "--kb", dir.dir() + "/missing.txt"}).code, 2);
  EXPECT_EQ(run({"depth", "--kb", kb, "--query", "p(a"}).code, 2);
  EXPECT_EQ(run({"depth", "--kb", kb, "--query", "zz(a)"}).code, 1);
  std::string bad = dir.write("bad.txt", "p(a)\n");  // missing dot
  EXPECT_EQ(run({"core", "--kb", bad}).code, 2);
  EXPECT_EQ(run({"fc", "--kb", kb, "--query", "p(a)", "--format", "yaml"})
                .code,
            2);
}

}  // namespace
}  // namespace kbdepth
