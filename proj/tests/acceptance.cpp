// End-to-end acceptance harness. Each criterion drives the whole pipeline on
// generated corpora and checks the output against independent ground truth.
// One result line per criterion; the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "keytrace/json_io.hpp"
#include "keytrace/pipeline.hpp"
#include "keytrace/report.hpp"
#include "keytrace/synth.hpp"

using namespace keytrace;

namespace {

struct Log {
  std::ostringstream out;
  bool ok = true;
  int shown = 0;

  template <class... A>
  void fail(A&&... a) {
    ok = false;
    if (++shown <= 8) {
      out << "    ";
      (out << ... << a) << '\n';
    }
  }
};

char const* kScripted[] = {
    "zsk-pre-publication", "zsk-double-signature", "ksk-double-ds",   "ksk-double-ksk",
    "ksk-double-rrset",    "ksk-update-ta",        "ksk-emergency-2", "ksk-emergency-3",
    "zsk-emergency-2",     "zsk-emergency-3",
};

std::string ctx_of(synth::Scenario const& sc) {
  std::string s = sc.process;
  if (!sc.perturbations.empty()) s += "/" + sc.perturbations.front();
  return s + " seed " + std::to_string(sc.seed);
}

// Index of the unique lifetime for this key, -1 if absent, -2 if split.
int locate(std::vector<KeyLifetime> const& lts, KeyIdentity const& key) {
  int found = -1;
  for (std::size_t i = 0; i < lts.size(); ++i) {
    if (!(lts[i].key == key)) continue;
    if (found >= 0) return -2;
    found = static_cast<int>(i);
  }
  return found;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool lifetime_matches(KeyLifetime const& lt, synth::TruthKey const& tk, std::string const& ctx,
                      Log& log) {
  bool ok = true;
  auto bad = [&](char const* what) {
    log.fail(ctx, ": key ", tk.label, " wrong ", what);
    ok = false;
  };
  if (lt.L != tk.L) bad("validity span");
  if (lt.S_alpha != tk.s_alpha) bad("first inception");
  if (lt.S_phi != tk.s_phi) bad("last inception");
  if (lt.S_omega != tk.s_omega) bad("last expiration");
  if (lt.DS != tk.ds) bad("delegation span");
  if (lt.fs != tk.fs) bad("first sighting");
  if (lt.ls != tk.ls) bad("last sighting");
  if (lt.role_ksk != tk.role_ksk || lt.role_zsk != tk.role_zsk) bad("roles");
  if (tk.contiguous && !lt.ghosts.empty()) bad("ghost gluing");
  return ok;
}

struct RowQuery {
  std::vector<ClassificationRecord> const* rows;

  ClassificationRecord const* pair_row(std::string const& scheme, int dep, int rem) const {
    for (auto const& c : *rows)
      if (c.scheme == scheme && c.departing_id == dep && c.remaining_id == rem) return &c;
    return nullptr;
  }
  ClassificationRecord const* behavior_row(int dep, int rem) const {
    for (auto const& c : *rows) {
      if (c.scheme != "behavior") continue;
      bool has_d = std::find(c.departing_ids.begin(), c.departing_ids.end(), dep) !=
                   c.departing_ids.end();
      bool has_r = std::find(c.remaining_ids.begin(), c.remaining_ids.end(), rem) !=
                   c.remaining_ids.end();
      if (has_d && has_r) return &c;
    }
    return nullptr;
  }
};

// Run one scenario and hold the pipeline output against its ground truth:
// reconstructed lifetimes, pair classes, warning sets, severities, overlay
// rows, behavior, and integrity.
bool check_scenario(synth::Scenario const& sc, Log& log) {
  std::string ctx = ctx_of(sc);
  synth::Generated gen;
  PipelineOutput out;
  try {
    gen = synth::generate(sc);
    out = run_pipeline(gen.polls);
  } catch (std::exception const& e) {
    log.fail(ctx, ": threw ", e.what());
    return false;
  }

  bool ok = true;
  std::map<std::string, int> ids;
  for (auto const& tk : gen.truth.keys) {
    int id = locate(out.lifetimes, tk.key);
    if (id < 0) {
      log.fail(ctx, ": key ", tk.label, id == -1 ? " missing" : " split");
      ok = false;
      continue;
    }
    ids[tk.label] = id;
    ok &= lifetime_matches(out.lifetimes[id], tk, ctx, log);
  }

  RowQuery q{&out.classifications};
  for (auto const& pe : gen.truth.pairs) {
    auto di = ids.find(pe.departing), ri = ids.find(pe.remaining);
    if (di == ids.end() || ri == ids.end()) {
      ok = false;
      continue;
    }
    int dep = di->second, rem = ri->second;

    if (!pe.rfc_class.empty()) {
      auto* row = q.pair_row("rfc", dep, rem);
      if (!row) {
        log.fail(ctx, ": no rfc row for ", pe.departing, "->", pe.remaining);
        ok = false;
      } else {
        if (row->class_name != pe.rfc_class) {
          log.fail(ctx, ": rfc class ", row->class_name, " wanted ", pe.rfc_class);
          ok = false;
        }
        if (sorted(row->violated_soft) != sorted(pe.rfc_warnings)) {
          std::string got;
          for (auto const& w : row->violated_soft) got += w + " ";
          log.fail(ctx, ": rfc warnings [", got, "] wanted ", pe.rfc_warnings.size(), " entries");
          ok = false;
        }
        std::string want_sev = pe.rfc_severity.empty()
                                   ? (pe.rfc_warnings.empty() ? "valid" : "warning")
                                   : pe.rfc_severity;
        if (row->severity != want_sev) {
          log.fail(ctx, ": rfc severity ", row->severity, " wanted ", want_sev);
          ok = false;
        }
      }
    }

    if (pe.emergency_checked) {
      auto* row = q.pair_row("emergency", dep, rem);
      if (pe.emergency_class.empty()) {
        if (row) {
          log.fail(ctx, ": unexpected emergency row ", row->class_name);
          ok = false;
        }
      } else if (!row) {
        log.fail(ctx, ": no emergency row, wanted ", pe.emergency_class);
        ok = false;
      } else if (row->class_name != pe.emergency_class ||
                 sorted(row->violated_soft) != sorted(pe.emergency_warnings)) {
        log.fail(ctx, ": emergency row ", row->class_name, " wanted ", pe.emergency_class);
        ok = false;
      }
    }

    if (!pe.behavior.empty()) {
      auto* row = q.behavior_row(dep, rem);
      if (!row) {
        log.fail(ctx, ": no behavior row for ", pe.departing, "->", pe.remaining);
        ok = false;
      } else if (row->class_name != pe.behavior) {
        log.fail(ctx, ": behavior ", row->class_name, " wanted ", pe.behavior);
        ok = false;
      }
    }
  }

  if (gen.truth.integrity_clean) {
    for (auto const& c : out.classifications)
      if (!c.violated_integrity.empty()) {
        log.fail(ctx, ": integrity violation ", c.violated_integrity.front(), " in ", c.scheme);
        ok = false;
        break;
      }
  }
  return ok;
}

// --- criteria --------------------------------------------------------------

bool scripted_processes(Log& log) {
  for (auto const* process : kScripted)
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      synth::Scenario sc;
      sc.process = process;
      sc.seed = seed;
      if (!check_scenario(sc, log)) return false;
    }
  return true;
}

bool perturbation_warnings(Log& log) {
  bool ok = true;
  for (auto const* process : kScripted)
    for (auto const& pert : synth::perturbations_for(process))
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synth::Scenario sc;
        sc.process = process;
        sc.perturbations = {pert};
        sc.seed = seed;
        ok &= check_scenario(sc, log);
      }
  // The double-KSK layout with the long retire tail carries two warnings at
  // once; its truth pins the exact pair.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::Scenario sc;
    sc.process = "fig-double-ksk";
    sc.seed = seed;
    ok &= check_scenario(sc, log);
    synth::Generated gen = synth::generate(sc);
    if (sorted(gen.truth.pairs.at(0).rfc_warnings) !=
        std::vector<std::string>{"DoubleSig", "Retire"}) {
      log.fail("fig-double-ksk truth does not pin {DoubleSig, Retire}");
      ok = false;
    }
  }
  return ok;
}

bool noncompliant_cutover(Log& log) {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::Scenario sc;
    sc.process = "noncompliant-cutover";
    sc.seed = seed;
    ok &= check_scenario(sc, log);
  }
  return ok;
}

bool anatomy_oracle(Log& log) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    synth::Scenario sc;
    sc.process = "random";
    sc.seed = seed;
    auto gen = synth::generate(sc);
    PipelineOutput out = run_pipeline(gen.polls);
    for (auto const& tr : out.transitions)
      for (auto const& p : tr.pairs) {
        auto const& d = out.lifetimes.at(p.departing_id);
        auto const& r = out.lifetimes.at(p.remaining_id);
        synth::DenseFeatures f = synth::dense_pair_features(d, r, tr.role);
        auto const& a = p.anatomy;
        bool same = a.pre_ds == f.pre_ds && a.pre_stage == f.pre_stage &&
                    a.rem_pre_ds == f.rem_pre_ds && a.ds_pre_rem == f.ds_pre_rem &&
                    a.double_sig == f.double_sig && a.dep_sig_only == f.dep_sig_only &&
                    a.rem_sig_only == f.rem_sig_only && a.retire == f.retire &&
                    a.ds_overlap == f.ds_overlap && a.total_duration == f.total_duration;
        if (!same) {
          log.fail("seed ", seed, " pair ", p.departing_id, "->", p.remaining_id,
                   ": anatomy disagrees with the dense recount");
          return false;
        }
      }
  }
  return true;
}

// Pieces of [lo,hi] not explained by truth, ghosts, or lying outside the
// sparse corpus's own evidence.
bool sampling_recovery(Log& log) {
  synth::Scenario sc;
  sc.process = "nyquist";
  auto gen = synth::generate(sc);

  // At half the re-signing cadence every signing event still lands on a poll:
  // recovery must be exact apart from raw sighting instants.
  {
    auto polls = synth::sparsify(gen.polls, days(15));
    PipelineOutput out = run_pipeline(polls);
    for (auto const& tk : gen.truth.keys) {
      int id = locate(out.lifetimes, tk.key);
      if (id < 0) {
        log.fail("15d: key ", tk.label, " not uniquely recovered");
        return false;
      }
      auto const& lt = out.lifetimes[id];
      if (lt.L != tk.L || lt.S_alpha != tk.s_alpha || lt.S_phi != tk.s_phi ||
          lt.S_omega != tk.s_omega || lt.role_ksk != tk.role_ksk ||
          lt.role_zsk != tk.role_zsk || !lt.ghosts.empty()) {
        log.fail("15d: key ", tk.label, " distorted");
        return false;
      }
    }
  }

  // At four times the cadence events fall between polls. Distortion is
  // expected, but every divergence must stay inside a ghost-glued stretch or
  // outside what the thinned corpus could ever witness.
  auto polls = synth::sparsify(gen.polls, days(60));
  PipelineOutput out = run_pipeline(polls);
  Interval hull{polls.front().ts, polls.back().ts};
  bool distorted = false;
  for (auto const& tk : gen.truth.keys) {
    std::vector<Interval> pieces, allowed;
    for (auto const& lt : out.lifetimes) {
      if (!(lt.key == tk.key)) continue;
      pieces.push_back(lt.L);
      for (auto const& g : lt.ghosts) allowed.push_back(g);
    }
    if (pieces.empty()) {
      log.fail("60d: key ", tk.label, " vanished entirely");
      return false;
    }
    pieces = merge_intervals(pieces);
    std::vector<Interval> diff = subtract_instants({tk.L}, pieces);
    for (auto const& extra : subtract_instants(pieces, {tk.L})) diff.push_back(extra);
    for (auto const& m : diff) {
      distorted = true;
      for (auto const& inside : subtract_instants(subtract_instants({m}, allowed), {hull})) {
        log.fail("60d: key ", tk.label, " unsound span [", inside.lo, ",", inside.hi, "]");
        return false;
      }
    }
    if (pieces.size() > 1) distorted = true;
  }
  if (!distorted) {
    log.fail("60d sampling produced no distortion at all; the check is vacuous");
    return false;
  }
  return true;
}

bool outage_split(Log& log) {
  synth::Scenario sc;
  sc.process = "outage-split";
  sc.t0 = 1577836800;  // 2020-01-01, so the steady year is a leap year
  auto gen = synth::generate(sc);
  auto polls = synth::sparsify(gen.polls, 0, {{sc.t0 + days(300) + 1, sc.t0 + days(700) - 1}});

  std::vector<Sec> ts;
  for (auto const& p : polls) ts.push_back(p.ts);
  auto ths = detect_outages(ts);
  auto const* y2020 = [&]() -> OutageThreshold const* {
    for (auto const& t : ths)
      if (t.year == 2020) return &t;
    return nullptr;
  }();
  if (!y2020) {
    log.fail("no 2020 gap statistics row");
    return false;
  }
  bool ok = true;
  if (y2020->mean_gap != 864000.0 || y2020->stddev_gap != 172800.0 ||
      y2020->threshold != 1555200.0) {
    log.fail("2020 stats mean=", y2020->mean_gap, " sd=", y2020->stddev_gap,
             " thr=", y2020->threshold, " wanted 864000/172800/1555200");
    ok = false;
  }

  PipelineOutput out = run_pipeline(polls);
  for (auto const& tk : gen.truth.keys) {
    int n = 0;
    for (auto const& lt : out.lifetimes)
      if (lt.key == tk.key) ++n;
    if (n != 2) {
      log.fail("key ", tk.label, " reconstructed as ", n, " runs, wanted 2");
      ok = false;
    }
  }
  return ok;
}

bool update_ta_boundary(Log& log) {
  bool ok = true;
  auto boundary_delta = [&](synth::Scenario const& sc, PipelineOutput const& out,
                            synth::GroundTruth const& truth) -> std::optional<Sec> {
    for (auto const& tr : out.transitions)
      for (auto const& p : tr.pairs) {
        Sec avg = static_cast<Sec>(out.lifetimes.at(p.departing_id).avg_sig_validity);
        (void)truth;
        (void)sc;
        return p.anatomy.total_duration - (days(30) + avg);
      }
    return std::nullopt;
  };

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::Scenario sc;
    sc.process = "ksk-update-ta";
    sc.seed = seed;
    ok &= check_scenario(sc, log);

    sc.perturbations = {"unrevoked"};
    ok &= check_scenario(sc, log);
    auto gen = synth::generate(sc);
    PipelineOutput out = run_pipeline(gen.polls);
    auto delta = boundary_delta(sc, out, gen.truth);
    if (!delta || *delta != 0) {
      log.fail("unrevoked seed ", seed, ": duration sits ", delta ? *delta : -999999,
               "s from the acceptance boundary, wanted exactly 0");
      ok = false;
    }

    sc.perturbations = {"reject-boundary"};
    ok &= check_scenario(sc, log);
    auto gen2 = synth::generate(sc);
    PipelineOutput out2 = run_pipeline(gen2.polls);
    auto delta2 = boundary_delta(sc, out2, gen2.truth);
    if (!delta2 || *delta2 != -1) {
      log.fail("reject-boundary seed ", seed, ": duration sits ", delta2 ? *delta2 : -999999,
               "s from the boundary, wanted exactly -1");
      ok = false;
    }
  }
  return ok;
}

bool no_unknown_behavior(Log& log) {
  long rows = 0, unknown = 0;
  auto tally = [&](synth::Scenario const& sc) {
    auto gen = synth::generate(sc);
    PipelineOutput out = run_pipeline(gen.polls);
    for (auto const& c : out.classifications) {
      if (c.scheme != "behavior") continue;
      ++rows;
      if (c.class_name == "Unknown") {
        ++unknown;
        if (unknown <= 5) log.fail(ctx_of(sc), ": Unknown behavior row");
      }
    }
  };
  for (auto const& process : synth::known_processes()) {
    if (process == "random") continue;
    std::vector<std::string> perts = synth::perturbations_for(process);
    perts.insert(perts.begin(), "");
    for (auto const& pert : perts)
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        synth::Scenario sc;
        sc.process = process;
        sc.seed = seed;
        if (!pert.empty()) sc.perturbations = {pert};
        tally(sc);
      }
  }
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    synth::Scenario sc;
    sc.process = "random";
    sc.seed = seed;
    tally(sc);
  }
  if (rows == 0) {
    log.fail("no behavior rows were produced at all");
    return false;
  }
  if (unknown != 0) {
    log.fail(unknown, " of ", rows, " behavior rows fell back to Unknown");
    return false;
  }
  return true;
}

bool multi_signer_cardinality(Log& log) {
  bool ok = true;
  for (int n = 1; n <= 2; ++n)
    for (int m = 1; m <= 2; ++m) {
      synth::Scenario sc;
      sc.process = "multi-signer";
      sc.n_departing = n;
      sc.n_remaining = m;
      sc.seed = 2;
      ok &= check_scenario(sc, log);

      auto gen = synth::generate(sc);
      PipelineOutput out = run_pipeline(gen.polls);
      std::map<std::pair<int, int>, long> hist;
      for (auto const& tr : out.transitions)
        hist[{static_cast<int>(tr.departing_ids.size()),
              static_cast<int>(tr.remaining_ids.size())}]++;
      std::map<std::pair<int, int>, long> want{{{n, m}, 1}};
      if (hist != want) {
        log.fail(n, "x", m, ": cardinality histogram has ", hist.size(), " cells");
        ok = false;
      }
      int rfc_rows = 0;
      for (auto const& c : out.classifications)
        if (c.scheme == "rfc") ++rfc_rows;
      if (rfc_rows != n * m) {
        log.fail(n, "x", m, ": ", rfc_rows, " pair rows, wanted ", n * m);
        ok = false;
      }
    }
  return ok;
}

bool deterministic_output(Log& log) {
  synth::Scenario sc;
  sc.process = "random";
  sc.seed = 5;
  auto polls = synth::generate(sc).polls;

  auto snapshot = [&](PipelineConfig const& cfg) {
    PipelineOutput out = run_pipeline(polls, cfg);
    std::ostringstream os;
    write_lifetimes(os, out.lifetimes);
    write_transitions(os, out.transitions);
    write_classifications(os, out.classifications);
    std::vector<ReportEntry> entries;
    for (auto const& c : out.classifications)
      entries.push_back({c.scheme, c.class_name, c.year});
    std::map<std::pair<int, int>, long> hist;
    for (auto const& tr : out.transitions)
      hist[{static_cast<int>(tr.departing_ids.size()),
            static_cast<int>(tr.remaining_ids.size())}]++;
    for (char const* scheme : {"rfc", "emergency", "behavior", "lifecycle"}) {
      YearlyTable t = aggregate_by_year(scheme, entries);
      os << emit_counts_csv(t) << emit_shares_csv(t);
    }
    os << emit_cardinality_csv(hist) << report_json(entries, hist).dump();
    return os.str();
  };

  PipelineConfig cfg;
  std::string first = snapshot(cfg);
  if (first != snapshot(cfg)) {
    log.fail("two identical runs serialized differently");
    return false;
  }
  PipelineConfig wide;
  wide.threads = 8;
  if (first != snapshot(wide)) {
    log.fail("an 8-thread run serialized differently from the default run");
    return false;
  }
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    char const* name;
    bool (*fn)(Log&);
  };
  Criterion const criteria[] = {
      {"scripted-processes-classify-exactly", scripted_processes},
      {"single-perturbation-warnings", perturbation_warnings},
      {"noncompliant-cutover-handled", noncompliant_cutover},
      {"anatomy-matches-dense-recount", anatomy_oracle},
      {"sampling-rate-recovery", sampling_recovery},
      {"outage-threshold-and-split", outage_split},
      {"update-ta-acceptance-boundary", update_ta_boundary},
      {"no-unknown-behavior", no_unknown_behavior},
      {"multi-signer-cardinality", multi_signer_cardinality},
      {"deterministic-output", deterministic_output},
  };

  int failures = 0;
  for (auto const& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Log log;
    bool ok = false;
    try {
      ok = c.fn(log);
    } catch (std::exception const& e) {
      log.fail("unhandled exception: ", e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.name, secs);
    if (!ok) {
      ++failures;
      std::fputs(log.out.str().c_str(), stdout);
    }
  }
  std::printf("%d/%d criteria passed\n",
              static_cast<int>(std::size(criteria)) - failures,
              static_cast<int>(std::size(criteria)));
  return failures;
}
