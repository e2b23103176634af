#pragma once

// Stage orchestration. Each stage is a pure function from persisted-form
// inputs to persisted-form outputs, so re-running a later stage from its
// files is indistinguishable from running the whole chain in memory. Zones
// are independent: the heavy stages fan out across a small thread pool and
// merge results in zone-name order, keeping every byte deterministic.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "keytrace/json_io.hpp"

namespace keytrace {

struct PipelineConfig {
  Sec tau = 0;                          // ZERO tolerance for discretization
  Sec extended_threshold = days(30);    // emergency "extended duration"
  std::optional<Sec> epsilon;           // cutover slack; unset = max poll gap in window
  double sigma_factor = 4.0;            // outage threshold = mean + sigma * stddev
  int threads = 0;                      // worker cap; 0 = hardware concurrency
  std::string year_rule = "t-alpha";    // transition year = earliest pair's T_alpha
};

// ---------------------------------------------------------------------------
// Flat key=value configuration. '#' starts a comment; unknown keys are
// rejected so typos cannot silently fall back to defaults.
// ---------------------------------------------------------------------------

inline PipelineConfig parse_config(std::istream& in, PipelineConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    try {
      if (key == "tau")
        cfg.tau = std::stoll(value);
      else if (key == "extended_threshold")
        cfg.extended_threshold = std::stoll(value);
      else if (key == "epsilon")
        cfg.epsilon = std::stoll(value);
      else if (key == "sigma_factor")
        cfg.sigma_factor = std::stod(value);
      else if (key == "threads")
        cfg.threads = std::stoi(value);
      else if (key == "year_rule")
        cfg.year_rule = value;
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (std::invalid_argument const&) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (cfg.tau < 0 || cfg.extended_threshold < 0 || (cfg.epsilon && *cfg.epsilon < 0) ||
      cfg.sigma_factor < 0)
    throw std::runtime_error("config: thresholds must be >= 0");
  if (cfg.year_rule != "t-alpha")
    throw std::runtime_error("config: unsupported year_rule '" + cfg.year_rule + "'");
  return cfg;
}

namespace detail {

inline int resolve_threads(PipelineConfig const& cfg) {
  int t = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  if (char const* env = std::getenv("KEYTRACE_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0 && cap < t) t = cap;
  }
  return t;
}

// Runs f(0..n-1) across up to `threads` workers; the first exception wins and
// is rethrown on the caller.
template <class F>
inline void parallel_for(std::size_t n, int threads, F&& f) {
  if (n == 0) return;
  int t = std::min<int>(threads, static_cast<int>(n));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<std::string> zone_order(Corpus const& corpus) {
  std::vector<std::string> zones;
  for (auto const& [zone, zd] : corpus.zones) zones.push_back(zone);
  return zones;
}

// Distinct zones in first-appearance order (lifetimes are grouped by zone).
inline std::vector<std::string> zone_order(std::vector<KeyLifetime> const& lts) {
  std::vector<std::string> zones;
  for (auto const& lt : lts)
    if (zones.empty() || zones.back() != lt.zone) {
      bool seen = false;
      for (auto const& z : zones) seen = seen || z == lt.zone;
      if (!seen) zones.push_back(lt.zone);
    }
  return zones;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reconstruction: per zone, observables run through bridging, outage
// statistics, busting and binding. The returned lifetimes are ordered by zone
// name and, within a zone, by bind's (key, span) order; their positions are
// the stable ids every later stage uses.
// ---------------------------------------------------------------------------

inline std::vector<KeyLifetime> reconstruct_zone(ZoneData const& zd, ZoneEvidence const& ze,
                                                 PipelineConfig const& cfg) {
  std::vector<Observable> obs = bridge(ze.observables);
  std::vector<Sec> ts;
  for (auto const& p : zd.polls) ts.push_back(p.ts);
  auto thresholds = detect_outages(std::move(ts), cfg.sigma_factor);
  obs = bust(std::move(obs), zd, ze, thresholds);
  return keytrace::bind(obs, ze, zd.zone);
}

inline std::vector<KeyLifetime> reconstruct_lifetimes(Corpus const& corpus, EvidenceMap const& ev,
                                                      PipelineConfig const& cfg) {
  auto zones = detail::zone_order(corpus);
  std::vector<std::vector<KeyLifetime>> slots(zones.size());
  detail::parallel_for(zones.size(), detail::resolve_threads(cfg), [&](std::size_t i) {
    auto const& zd = corpus.zones.at(zones[i]);
    auto evit = ev.find(zones[i]);
    if (evit == ev.end()) return;
    slots[i] = reconstruct_zone(zd, evit->second, cfg);
  });
  std::vector<KeyLifetime> out;
  for (auto& s : slots)
    for (auto& lt : s) out.push_back(std::move(lt));
  return out;
}

// ---------------------------------------------------------------------------
// Transitions: detection plus per-pair anatomy and discretization, KSK
// partition first, then ZSK, transitions in hand-off order.
// ---------------------------------------------------------------------------

inline std::vector<TransitionRecord> compute_transitions(std::vector<KeyLifetime> const& lts,
                                                         PipelineConfig const& cfg) {
  auto zones = detail::zone_order(lts);
  std::vector<std::vector<TransitionRecord>> slots(zones.size());
  detail::parallel_for(zones.size(), detail::resolve_threads(cfg), [&](std::size_t zi) {
    for (Role role : {Role::ksk, Role::zsk}) {
      for (Transition const& tr : detect_transitions(lts, zones[zi], role)) {
        TransitionRecord rec;
        rec.zone = tr.zone;
        rec.role = tr.role;
        rec.at = tr.at;
        for (auto const* d : tr.departing)
          rec.departing_ids.push_back(static_cast<int>(d - lts.data()));
        for (auto const* r : tr.remaining)
          rec.remaining_ids.push_back(static_cast<int>(r - lts.data()));
        bool first = true;
        Sec earliest_alpha = 0;
        for (auto const* d : tr.departing)
          for (auto const* r : tr.remaining) {
            PairRecord p;
            p.departing_id = static_cast<int>(d - lts.data());
            p.remaining_id = static_cast<int>(r - lts.data());
            p.anatomy = compute_pair_anatomy(*d, *r, role);
            p.discrete = discretize(p.anatomy, cfg.tau);
            if (first) {
              rec.window = p.anatomy.T;
              earliest_alpha = p.anatomy.T.lo;
              first = false;
            } else {
              rec.window.lo = std::min(rec.window.lo, p.anatomy.T.lo);
              rec.window.hi = std::max(rec.window.hi, p.anatomy.T.hi);
              earliest_alpha = std::min(earliest_alpha, p.anatomy.T.lo);
            }
            rec.pairs.push_back(std::move(p));
          }
        rec.year = year_utc(earliest_alpha);
        slots[zi].push_back(std::move(rec));
      }
    }
  });
  std::vector<TransitionRecord> out;
  for (auto& s : slots)
    for (auto& t : s) out.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Classification: per pair the RFC class and the emergency overlay, each
// hardened by the integrity conditions over that pair's window; per
// transition the behavior class; per lifetime the lifecycle state. Output
// order per zone: transitions in file order (pair lines, then overlay lines,
// then the behavior line), then the zone's lifecycle lines.
// ---------------------------------------------------------------------------

inline std::vector<ClassificationRecord> compute_classifications(
    std::vector<TransitionRecord> const& trs, std::vector<KeyLifetime> const& lts,
    Corpus const& corpus, EvidenceMap const& ev, PipelineConfig const& cfg) {
  auto zones = detail::zone_order(lts);
  std::vector<std::vector<ClassificationRecord>> slots(zones.size());
  detail::parallel_for(zones.size(), detail::resolve_threads(cfg), [&](std::size_t zi) {
    std::string const& zone = zones[zi];
    auto zdit = corpus.zones.find(zone);
    auto evit = ev.find(zone);
    if (zdit == corpus.zones.end() || evit == ev.end())
      throw BadStageFile("classify: zone '" + zone + "' missing from corpus");
    ZoneData const& zd = zdit->second;
    ZoneEvidence const& ze = evit->second;

    for (TransitionRecord const& tr : trs) {
      if (tr.zone != zone) continue;
      for (PairRecord const& p : tr.pairs) {
        KeyLifetime const& dep = lts.at(p.departing_id);
        EvalContext ctx{dep.avg_sig_validity, cfg.extended_threshold};
        auto integrity = verify_integrity(zone, zd.polls, p.anatomy.T, ze);

        ClassificationOutcome rfc = classify_rfc(p.discrete, tr.role, ctx, dep);
        apply_integrity(rfc, integrity);
        ClassificationRecord rec;
        rec.zone = zone;
        rec.scheme = "rfc";
        rec.class_name = rfc.class_name;
        rec.severity = severity_name(rfc.severity);
        rec.year = tr.year;
        rec.role = role_name(tr.role);
        rec.at = tr.at;
        rec.departing_id = p.departing_id;
        rec.remaining_id = p.remaining_id;
        rec.violated_soft = rfc.violated_soft;
        rec.violated_integrity = rfc.violated_integrity;
        rec.rollback = rfc.rollback;
        slots[zi].push_back(std::move(rec));

        if (auto em = classify_emergency(p.discrete, tr.role, ctx)) {
          apply_integrity(*em, integrity);
          ClassificationRecord er;
          er.zone = zone;
          er.scheme = "emergency";
          er.class_name = em->class_name;
          er.severity = severity_name(em->severity);
          er.year = tr.year;
          er.role = role_name(tr.role);
          er.at = tr.at;
          er.departing_id = p.departing_id;
          er.remaining_id = p.remaining_id;
          er.violated_soft = em->violated_soft;
          er.violated_integrity = em->violated_integrity;
          er.rollback = em->rollback;
          slots[zi].push_back(std::move(er));
        }
      }

      Transition t;
      t.zone = tr.zone;
      t.role = tr.role;
      t.at = tr.at;
      for (int id : tr.departing_ids) t.departing.push_back(&lts.at(id));
      for (int id : tr.remaining_ids) t.remaining.push_back(&lts.at(id));
      ClassificationOutcome beh = classify_behavior(t, lts, zd.polls, tr.window, cfg.epsilon);
      ClassificationRecord br;
      br.zone = zone;
      br.scheme = "behavior";
      br.class_name = beh.class_name;
      br.severity = severity_name(beh.severity);
      br.year = tr.year;
      br.role = role_name(tr.role);
      br.at = tr.at;
      br.departing_ids = tr.departing_ids;
      br.remaining_ids = tr.remaining_ids;
      slots[zi].push_back(std::move(br));
    }

    for (std::size_t i = 0; i < lts.size(); ++i) {
      if (lts[i].zone != zone) continue;
      ClassificationRecord lr;
      lr.zone = zone;
      lr.scheme = "lifecycle";
      lr.class_name = lifecycle_state_name(classify_lifecycle(lts[i]));
      lr.year = year_utc(lts[i].L.lo);
      lr.lifetime_id = static_cast<int>(i);
      slots[zi].push_back(std::move(lr));
    }
  });
  std::vector<ClassificationRecord> out;
  for (auto& s : slots)
    for (auto& c : s) out.push_back(std::move(c));
  return out;
}

// ---------------------------------------------------------------------------
// Whole chain in memory.
// ---------------------------------------------------------------------------

struct PipelineOutput {
  CorpusStats stats;
  EvidenceMap evidence;
  std::vector<KeyLifetime> lifetimes;
  std::vector<TransitionRecord> transitions;
  std::vector<ClassificationRecord> classifications;
};

inline PipelineOutput run_pipeline(Corpus corpus, PipelineConfig const& cfg = {}) {
  PipelineOutput out;
  SigIndex index(corpus);
  match_sigs_to_keys(corpus, index);
  out.evidence = build_evidence(corpus, index);
  out.lifetimes = reconstruct_lifetimes(corpus, out.evidence, cfg);
  out.transitions = compute_transitions(out.lifetimes, cfg);
  out.classifications =
      compute_classifications(out.transitions, out.lifetimes, corpus, out.evidence, cfg);
  out.stats = corpus.stats;
  return out;
}

inline PipelineOutput run_pipeline(std::vector<PollRecord> polls, PipelineConfig const& cfg = {}) {
  return run_pipeline(build_corpus(std::move(polls)), cfg);
}

}  // namespace keytrace
