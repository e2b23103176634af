// Aggregation and emission: yearly tables, CSV/JSON views, stage-file
// round-trips, configuration, and the command-line binary end to end.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "keytrace/json_io.hpp"
#include "keytrace/pipeline.hpp"
#include "keytrace/report.hpp"
#include "keytrace/synth.hpp"

using namespace keytrace;
namespace fs = std::filesystem;

namespace {

std::vector<ReportEntry> sample_entries() {
  return {
      {"rfc", "ZSK Pre-Pub", 2020},    {"rfc", "ZSK Pre-Pub", 2020},
      {"rfc", "noncompliant", 2020},   {"rfc", "Mystery", 2020},
      {"rfc", "KSK Double-DS", 2021},  {"behavior", "Cutover", 2020},
  };
}

}  // namespace

TEST_CASE("yearly aggregation orders canonical rows first") {
  YearlyTable t = aggregate_by_year("rfc", sample_entries());
  CHECK(t.rows == std::vector<std::string>{"ZSK Pre-Pub", "KSK Double-DS", "noncompliant",
                                           "Mystery"});
  CHECK(t.years == std::vector<int>{2020, 2021});
  CHECK(t.count("ZSK Pre-Pub", 2020) == 2);
  CHECK(t.count("ZSK Pre-Pub", 2021) == 0);
  CHECK(t.count("KSK Double-DS", 2021) == 1);
  CHECK(t.year_total(2020) == 4);  // the behavior entry belongs to another scheme
  CHECK(t.year_total(2021) == 1);
  CHECK(t.share("ZSK Pre-Pub", 2020) == 0.5);
  CHECK(t.share("Mystery", 2021) == 0.0);
}

TEST_CASE("aggregation of an absent scheme is empty") {
  YearlyTable t = aggregate_by_year("lifecycle", sample_entries());
  CHECK(t.rows.empty());
  CHECK(t.years.empty());
  CHECK(t.year_total(2020) == 0);
}

TEST_CASE("counts CSV is emitted verbatim") {
  YearlyTable t = aggregate_by_year("rfc", sample_entries());
  CHECK(emit_counts_csv(t) ==
        "class,2020,2021\n"
        "ZSK Pre-Pub,2,0\n"
        "KSK Double-DS,0,1\n"
        "noncompliant,1,0\n"
        "Mystery,1,0\n");
}

TEST_CASE("shares CSV uses two decimals of the year total") {
  YearlyTable t = aggregate_by_year("rfc", sample_entries());
  CHECK(emit_shares_csv(t) ==
        "class,2020,2021\n"
        "ZSK Pre-Pub,0.50,0.00\n"
        "KSK Double-DS,0.00,1.00\n"
        "noncompliant,0.25,0.00\n"
        "Mystery,0.25,0.00\n");
}

TEST_CASE("cardinality histogram CSV") {
  std::map<std::pair<int, int>, long> hist{{{1, 1}, 3}, {{2, 1}, 1}};
  CHECK(emit_cardinality_csv(hist) == "n,m,count\n1,1,3\n2,1,1\n");
}

TEST_CASE("nested JSON report") {
  std::map<std::pair<int, int>, long> hist{{{1, 1}, 3}};
  ojson j = report_json(sample_entries(), hist);
  CHECK(j["schemes"]["rfc"]["years"] == ojson({2020, 2021}));
  CHECK(j["schemes"]["rfc"]["classes"]["ZSK Pre-Pub"]["counts"] == ojson({2, 0}));
  CHECK(j["schemes"]["rfc"]["classes"]["ZSK Pre-Pub"]["shares"][0].get<double>() == 0.5);
  CHECK(j["schemes"]["behavior"]["classes"]["Cutover"]["counts"] == ojson({1}));
  CHECK(j["schemes"]["emergency"]["classes"].empty());
  REQUIRE(j["cardinality"].size() == 1);
  CHECK(j["cardinality"][0]["n"] == 1);
  CHECK(j["cardinality"][0]["count"] == 3);
}

TEST_CASE("the shipped template table matches the builtin one byte for byte") {
  std::ifstream in(fs::path(KEYTRACE_SOURCE_DIR) / "data" / "templates.csv", std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == templates_csv());
}

TEST_CASE("stage files round-trip byte-identically") {
  for (char const* process : {"zsk-pre-publication", "ksk-double-ksk", "ksk-update-ta"}) {
    synth::Scenario sc;
    sc.process = process;
    sc.seed = 5;
    PipelineOutput out = run_pipeline(synth::generate(sc).polls);
    INFO(process);

    std::ostringstream l1;
    write_lifetimes(l1, out.lifetimes);
    std::istringstream lin(l1.str());
    auto lts = read_lifetimes(lin);
    std::ostringstream l2;
    write_lifetimes(l2, lts);
    CHECK(l1.str() == l2.str());

    std::ostringstream t1;
    write_transitions(t1, out.transitions);
    std::istringstream tin(t1.str());
    auto trs = read_transitions(tin);
    std::ostringstream t2;
    write_transitions(t2, trs);
    CHECK(t1.str() == t2.str());

    std::ostringstream c1;
    write_classifications(c1, out.classifications);
    std::istringstream cin(c1.str());
    auto cls = read_classifications(cin);
    std::ostringstream c2;
    write_classifications(c2, cls);
    CHECK(c1.str() == c2.str());
  }
}

TEST_CASE("stage readers reject damaged files") {
  std::istringstream bad("this is not json\n");
  CHECK_THROWS_AS(read_lifetimes(bad), BadStageFile);

  std::istringstream bad2("{\"zone\": 3}\n");
  CHECK_THROWS_AS(read_transitions(bad2), BadStageFile);

  std::istringstream bad3("[\n");
  CHECK_THROWS_AS(read_classifications(bad3), BadStageFile);

  KeyLifetime lt;
  lt.zone = "z.";
  std::ostringstream os;
  os << lifetime_json(0, lt).dump() << '\n' << lifetime_json(2, lt).dump() << '\n';
  std::istringstream gap(os.str());
  CHECK_THROWS_AS(read_lifetimes(gap), BadStageFile);  // ids must be contiguous
}

TEST_CASE("flat config parsing") {
  std::istringstream in(
      "# outage statistics\n"
      "tau = 300\n"
      "extended_threshold=2592000\n"
      "epsilon = 100  # override the poll-gap default\n"
      "sigma_factor = 3.5\n"
      "threads = 2\n"
      "\n"
      "year_rule = t-alpha\n");
  PipelineConfig cfg = parse_config(in);
  CHECK(cfg.tau == 300);
  CHECK(cfg.extended_threshold == 2592000);
  CHECK(cfg.epsilon == 100);
  CHECK(cfg.sigma_factor == 3.5);
  CHECK(cfg.threads == 2);
  CHECK(cfg.year_rule == "t-alpha");
}

TEST_CASE("config rejects unknown keys and bad values") {
  auto parse = [](std::string text) {
    std::istringstream in(std::move(text));
    return parse_config(in);
  };
  CHECK_THROWS(parse("minimum = 1\n"));
  CHECK_THROWS(parse("tau\n"));
  CHECK_THROWS(parse("tau = abc\n"));
  CHECK_THROWS(parse("tau = -1\n"));
  CHECK_THROWS(parse("sigma_factor = -0.5\n"));
  CHECK_THROWS(parse("year_rule = newest\n"));
  CHECK_NOTHROW(parse("tau = 0\n"));
}

TEST_CASE("the environment can cap worker threads") {
  PipelineConfig cfg;
  cfg.threads = 4;
  unsetenv("KEYTRACE_THREADS");
  CHECK(detail::resolve_threads(cfg) == 4);
  setenv("KEYTRACE_THREADS", "2", 1);
  CHECK(detail::resolve_threads(cfg) == 2);
  setenv("KEYTRACE_THREADS", "16", 1);
  CHECK(detail::resolve_threads(cfg) == 4);  // the cap never raises
  unsetenv("KEYTRACE_THREADS");

  cfg.threads = 0;
  CHECK(detail::resolve_threads(cfg) >= 1);
}

namespace {

int run_cmd(std::string const& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -2;
}

std::string slurp(fs::path const& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("command-line stages compose and match the one-shot pipeline") {
  std::string const cli = KEYTRACE_CLI_PATH;
  fs::path dir = fs::temp_directory_path() / ("keytrace_test_" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto in = [&](std::string s) { return (dir / s).string(); };
  std::string quiet = " >/dev/null 2>&1";

  REQUIRE(run_cmd(cli + " synth --process pre-pub --seed 5 --out " + in("corpus.jsonl") +
                  " --truth " + in("truth.json") + quiet) == 0);
  CHECK(slurp(in("truth.json")).find("zsk-pre-publication") != std::string::npos);

  REQUIRE(run_cmd(cli + " pipeline --input " + in("corpus.jsonl") + " --out-dir " + in("full") +
                  quiet) == 0);
  for (char const* f :
       {"observables.jsonl", "lifetimes.jsonl", "transitions.jsonl", "classifications.jsonl"})
    CHECK(fs::exists(dir / "full" / f));

  // the same chain, one stage at a time, from the stage files alone
  REQUIRE(run_cmd(cli + " reconstruct --input " + in("corpus.jsonl") + " --out-dir " + in("st") +
                  quiet) == 0);
  REQUIRE(run_cmd(cli + " transitions --lifetimes " + in("st/lifetimes.jsonl") + " --out-dir " +
                  in("st") + quiet) == 0);
  REQUIRE(run_cmd(cli + " classify --transitions " + in("st/transitions.jsonl") + " --lifetimes " +
                  in("st/lifetimes.jsonl") + " --input " + in("corpus.jsonl") + " --out-dir " +
                  in("st") + quiet) == 0);
  CHECK(slurp(in("st/lifetimes.jsonl")) == slurp(in("full/lifetimes.jsonl")));
  CHECK(slurp(in("st/transitions.jsonl")) == slurp(in("full/transitions.jsonl")));
  CHECK(slurp(in("st/classifications.jsonl")) == slurp(in("full/classifications.jsonl")));

  REQUIRE(run_cmd(cli + " report --classifications " + in("full/classifications.jsonl") +
                  " --by-year --scheme rfc --out " + in("rfc.csv") + quiet) == 0);
  CHECK(slurp(in("rfc.csv")) == "class,2011\nZSK Pre-Pub,1\n");

  REQUIRE(run_cmd(cli + " report --classifications " + in("full/classifications.jsonl") +
                  " --by-year --scheme lifecycle --out " + in("life.csv") + quiet) == 0);
  CHECK(slurp(in("life.csv")).rfind("class,2011\nValid,", 0) == 0);

  // usage errors exit 2
  CHECK(run_cmd(cli + " report --by-year" + quiet) == 2);
  CHECK(run_cmd(cli + " frobnicate" + quiet) == 2);
  CHECK(run_cmd(cli + " ingest --input " + in("corpus.jsonl") + quiet) == 2);
  CHECK(run_cmd(cli + " report --classifications x --by-year --scheme bogus" + quiet) == 2);

  fs::remove_all(dir);
}
