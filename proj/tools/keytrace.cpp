// keytrace: DNSSEC key-transition analysis over JSONL polling snapshots.
//
// Subcommands chain through files: ingest writes observables.jsonl,
// reconstruct writes lifetimes.jsonl, transitions writes transitions.jsonl,
// classify writes classifications.jsonl, report renders CSV/JSON views, synth
// generates corpora with ground truth, pipeline runs everything. Exit codes:
// 0 success (skipped lines are counted, not fatal), 1 data errors, 2 usage
// errors.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "keytrace/pipeline.hpp"

namespace fs = std::filesystem;
using namespace keytrace;

namespace {

struct CommonOpts {
  std::string config_path;
  PipelineConfig cfg;
  // Direct flags; applied on top of the config file.
  std::optional<long long> tau, extended_threshold, epsilon, threads;
  std::optional<double> sigma_factor;

  PipelineConfig resolve() const {
    PipelineConfig c = cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
      try {
        c = parse_config(in, c);
      } catch (std::exception const& e) {
        throw CLI::ValidationError("--config", e.what());
      }
    }
    if (tau) c.tau = *tau;
    if (extended_threshold) c.extended_threshold = *extended_threshold;
    if (epsilon) c.epsilon = *epsilon;
    if (threads) c.threads = static_cast<int>(*threads);
    if (sigma_factor) c.sigma_factor = *sigma_factor;
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "flat key=value config file");
  cmd->add_option("--tau", o.tau, "zero tolerance in seconds for discretization");
  cmd->add_option("--extended-threshold", o.extended_threshold,
                  "extended-duration threshold in seconds");
  cmd->add_option("--epsilon", o.epsilon, "cutover slack in seconds (default: max poll gap)");
  cmd->add_option("--sigma-factor", o.sigma_factor, "outage threshold sigma multiplier");
  cmd->add_option("--threads", o.threads, "worker cap (KEYTRACE_THREADS also caps)");
}

Corpus load_corpus_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input: " + path);
  Corpus c = load_corpus(in);
  std::cerr << "[keytrace] " << path << ": " << c.stats.lines << " lines, " << c.stats.malformed
            << " skipped, " << c.zones.size() << " zone(s)\n";
  if (c.stats.timing_anomalies || c.stats.vantage_disagreements)
    std::cerr << "[keytrace] anomalies: " << c.stats.timing_anomalies << " inverted rrsig(s), "
              << c.stats.vantage_disagreements << " vantage disagreement(s)\n";
  return c;
}

EvidenceMap evidence_for(Corpus& corpus) {
  SigIndex index(corpus);
  match_sigs_to_keys(corpus, index);
  EvidenceMap ev = build_evidence(corpus, index);
  if (corpus.stats.orphan_rrsigs || corpus.stats.ambiguous_rrsigs)
    std::cerr << "[keytrace] attribution: " << corpus.stats.orphan_rrsigs << " orphan, "
              << corpus.stats.ambiguous_rrsigs << " ambiguous rrsig(s)\n";
  return ev;
}

void write_file(fs::path const& p, std::function<void(std::ostream&)> const& emit) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  emit(os);
  if (!os) throw std::runtime_error("short write to " + p.string());
}

std::vector<KeyLifetime> read_lifetimes_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lifetimes: " + path);
  return read_lifetimes(in);
}

std::vector<TransitionRecord> read_transitions_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transitions: " + path);
  return read_transitions(in);
}

std::string resolve_process(std::string const& p) {
  static std::map<std::string, std::string> const aliases = {
      {"pre-pub", "zsk-pre-publication"},   {"double-sig", "zsk-double-signature"},
      {"double-ds", "ksk-double-ds"},       {"double-ksk", "ksk-double-ksk"},
      {"double-rrset", "ksk-double-rrset"}, {"update-ta", "ksk-update-ta"},
  };
  auto it = aliases.find(p);
  return it == aliases.end() ? p : it->second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNSSEC key-transition analysis toolkit"};
  app.require_subcommand(1);

  // --- ingest ---------------------------------------------------------------
  std::string in_path, out_dir;
  CommonOpts ingest_o;
  auto* ingest = app.add_subcommand("ingest", "parse a polling corpus, emit observables.jsonl");
  ingest->add_option("--input", in_path, "corpus JSONL")->required();
  ingest->add_option("--out-dir", out_dir, "output directory")->required();
  add_common(ingest, ingest_o);

  // --- reconstruct ----------------------------------------------------------
  std::string rec_in, rec_out;
  CommonOpts rec_o;
  auto* reconstruct =
      app.add_subcommand("reconstruct", "bridge/bust/bind key lifetimes, emit lifetimes.jsonl");
  reconstruct->add_option("--input", rec_in, "corpus JSONL")->required();
  reconstruct->add_option("--out-dir", rec_out, "output directory")->required();
  add_common(reconstruct, rec_o);

  // --- transitions ----------------------------------------------------------
  std::string tr_lts, tr_out;
  CommonOpts tr_o;
  auto* transitions =
      app.add_subcommand("transitions", "detect transitions and pair anatomies from lifetimes.jsonl");
  transitions->add_option("--lifetimes", tr_lts, "lifetimes.jsonl from reconstruct")->required();
  transitions->add_option("--out-dir", tr_out, "output directory")->required();
  add_common(transitions, tr_o);

  // --- classify -------------------------------------------------------------
  std::string cl_trs, cl_lts, cl_in, cl_out;
  CommonOpts cl_o;
  auto* classify = app.add_subcommand(
      "classify", "classify pairs (rfc + emergency), transitions (behavior) and lifetimes");
  classify->add_option("--transitions", cl_trs, "transitions.jsonl")->required();
  classify->add_option("--lifetimes", cl_lts, "lifetimes.jsonl")->required();
  classify->add_option("--input", cl_in, "corpus JSONL (for integrity and poll gaps)")->required();
  classify->add_option("--out-dir", cl_out, "output directory")->required();
  add_common(classify, cl_o);

  // --- report ---------------------------------------------------------------
  std::string rp_cls, rp_trs, rp_scheme = "rfc", rp_out = "-";
  bool rp_by_year = false, rp_shares = false, rp_cardinality = false, rp_json = false;
  auto* report = app.add_subcommand("report", "aggregate classifications into tables");
  report->add_option("--classifications", rp_cls, "classifications.jsonl");
  report->add_option("--transitions", rp_trs, "transitions.jsonl (for --cardinality)");
  report->add_flag("--by-year", rp_by_year, "emit per-year class table");
  report->add_option("--scheme", rp_scheme, "rfc|emergency|behavior|lifecycle")
      ->check(CLI::IsMember({"rfc", "emergency", "behavior", "lifecycle"}));
  report->add_flag("--shares", rp_shares, "emit shares instead of raw counts");
  report->add_flag("--cardinality", rp_cardinality, "emit n,m,count histogram");
  report->add_flag("--json", rp_json, "emit the full nested report as JSON");
  report->add_option("--out", rp_out, "output path, '-' for stdout");

  // --- synth ----------------------------------------------------------------
  std::string sy_process = "zsk-pre-publication", sy_perturb, sy_out, sy_truth;
  std::uint64_t sy_seed = 0;
  long long sy_poll = 0, sy_jitter = 0;
  bool sy_list = false;
  auto* syn = app.add_subcommand("synth", "generate a scripted corpus with ground truth");
  syn->add_option("--process", sy_process, "scenario family (see --list-processes)");
  syn->add_option("--perturb", sy_perturb, "inject one named soft-constraint violation");
  syn->add_option("--seed", sy_seed, "scenario seed");
  syn->add_option("--out", sy_out, "corpus JSONL path");
  syn->add_option("--truth", sy_truth, "ground-truth JSON path");
  syn->add_option("--poll-interval", sy_poll, "seconds between polls (default 1 day)");
  syn->add_option("--jitter", sy_jitter, "uniform poll-time jitter bound in seconds");
  syn->add_flag("--list-processes", sy_list, "list process and perturbation tokens");

  // --- pipeline -------------------------------------------------------------
  std::string pl_in, pl_out;
  CommonOpts pl_o;
  auto* pipeline = app.add_subcommand("pipeline", "run every stage, writing all stage files");
  pipeline->add_option("--input", pl_in, "corpus JSONL")->required();
  pipeline->add_option("--out-dir", pl_out, "output directory")->required();
  add_common(pipeline, pl_o);

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const& e) {
    return app.exit(e);
  } catch (CLI::ParseError const& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      Corpus corpus = load_corpus_file(in_path);
      EvidenceMap ev = evidence_for(corpus);
      std::size_t n = 0;
      for (auto const& [z, ze] : ev) n += ze.observables.size();
      write_file(fs::path(out_dir) / "observables.jsonl",
                 [&](std::ostream& os) { write_observables(os, ev); });
      std::cerr << "[keytrace] observables: " << n << "\n";
    } else if (*reconstruct) {
      PipelineConfig cfg = rec_o.resolve();
      Corpus corpus = load_corpus_file(rec_in);
      EvidenceMap ev = evidence_for(corpus);
      auto lts = reconstruct_lifetimes(corpus, ev, cfg);
      write_file(fs::path(rec_out) / "lifetimes.jsonl",
                 [&](std::ostream& os) { write_lifetimes(os, lts); });
      std::cerr << "[keytrace] lifetimes: " << lts.size() << "\n";
    } else if (*transitions) {
      PipelineConfig cfg = tr_o.resolve();
      auto lts = read_lifetimes_file(tr_lts);
      auto trs = compute_transitions(lts, cfg);
      write_file(fs::path(tr_out) / "transitions.jsonl",
                 [&](std::ostream& os) { write_transitions(os, trs); });
      std::cerr << "[keytrace] transitions: " << trs.size() << "\n";
    } else if (*classify) {
      PipelineConfig cfg = cl_o.resolve();
      Corpus corpus = load_corpus_file(cl_in);
      EvidenceMap ev = evidence_for(corpus);
      auto lts = read_lifetimes_file(cl_lts);
      auto trs = read_transitions_file(cl_trs);
      auto cls = compute_classifications(trs, lts, corpus, ev, cfg);
      write_file(fs::path(cl_out) / "classifications.jsonl",
                 [&](std::ostream& os) { write_classifications(os, cls); });
      std::cerr << "[keytrace] classifications: " << cls.size() << "\n";
    } else if (*report) {
      if (!rp_by_year && !rp_cardinality && !rp_json)
        throw CLI::ValidationError("report", "choose --by-year, --cardinality or --json");
      std::string text;
      std::vector<ReportEntry> entries;
      if (rp_by_year || rp_json) {
        if (rp_cls.empty()) throw CLI::ValidationError("report", "--classifications required");
        std::ifstream in(rp_cls);
        if (!in) throw std::runtime_error("cannot open classifications: " + rp_cls);
        for (auto const& c : read_classifications(in))
          entries.push_back({c.scheme, c.class_name, c.year});
      }
      std::map<std::pair<int, int>, long> hist;
      if (rp_cardinality || rp_json) {
        if (rp_trs.empty() && rp_cardinality)
          throw CLI::ValidationError("report", "--transitions required for --cardinality");
        if (!rp_trs.empty())
          for (auto const& t : read_transitions_file(rp_trs))
            ++hist[{static_cast<int>(t.departing_ids.size()),
                    static_cast<int>(t.remaining_ids.size())}];
      }
      if (rp_json) {
        text = report_json(entries, hist).dump(2);
        text.push_back('\n');
      } else if (rp_cardinality) {
        text = emit_cardinality_csv(hist);
      } else {
        YearlyTable t = aggregate_by_year(rp_scheme, entries);
        text = rp_shares ? emit_shares_csv(t) : emit_counts_csv(t);
      }
      if (rp_out == "-")
        std::cout << text;
      else
        write_file(rp_out, [&](std::ostream& os) { os << text; });
    } else if (*syn) {
      if (sy_list) {
        for (auto const& p : synth::known_processes()) {
          std::cout << p;
          auto perts = synth::perturbations_for(p);
          if (!perts.empty()) {
            std::cout << "  (perturb:";
            for (auto const& t : perts) std::cout << ' ' << t;
            std::cout << ')';
          }
          std::cout << '\n';
        }
        return 0;
      }
      if (sy_out.empty() || sy_truth.empty())
        throw CLI::ValidationError("synth", "--out and --truth are required");
      synth::Scenario sc;
      sc.process = resolve_process(sy_process);
      if (!sy_perturb.empty()) sc.perturbations.push_back(sy_perturb);
      sc.seed = sy_seed;
      if (sy_poll > 0) sc.poll_interval = sy_poll;
      sc.jitter = sy_jitter;
      synth::Generated g = synth::generate(sc);
      write_file(sy_out, [&](std::ostream& os) {
        for (auto const& poll : g.polls) os << serialize_poll_record(poll) << '\n';
      });
      write_file(sy_truth, [&](std::ostream& os) { os << truth_json(g.truth).dump(2) << '\n'; });
      std::cerr << "[keytrace] synth " << sc.process
                << (g.truth.perturbation.empty() ? "" : " / " + g.truth.perturbation) << " seed "
                << sc.seed << ": " << g.polls.size() << " polls, " << g.truth.keys.size()
                << " keys\n";
    } else if (*pipeline) {
      PipelineConfig cfg = pl_o.resolve();
      Corpus corpus = load_corpus_file(pl_in);
      EvidenceMap ev = evidence_for(corpus);
      fs::path dir(pl_out);
      write_file(dir / "observables.jsonl", [&](std::ostream& os) { write_observables(os, ev); });
      auto lts = reconstruct_lifetimes(corpus, ev, cfg);
      std::cerr << "[keytrace] lifetimes: " << lts.size() << "\n";
      write_file(dir / "lifetimes.jsonl", [&](std::ostream& os) { write_lifetimes(os, lts); });
      auto trs = compute_transitions(lts, cfg);
      std::cerr << "[keytrace] transitions: " << trs.size() << "\n";
      write_file(dir / "transitions.jsonl", [&](std::ostream& os) { write_transitions(os, trs); });
      auto cls = compute_classifications(trs, lts, corpus, ev, cfg);
      std::cerr << "[keytrace] classifications: " << cls.size() << "\n";
      write_file(dir / "classifications.jsonl",
                 [&](std::ostream& os) { write_classifications(os, cls); });
    }
  } catch (CLI::ValidationError const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (synth::InvalidScenario const& e) {
    std::cerr << "error: invalid scenario: " << e.what() << "\n";
    return 1;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
