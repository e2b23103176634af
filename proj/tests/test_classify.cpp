// Template matching, the three classification schemes, and the integrity
// conditions.

#include <catch2/catch_amalgamated.hpp>

#include "keytrace/classify.hpp"
#include "keytrace/corpus.hpp"
#include "keytrace/observables.hpp"

using namespace keytrace;

namespace {

DiscretePair dp(std::initializer_list<std::pair<Feature, Sign>> signs, Sec total = days(10)) {
  DiscretePair d;
  d.signs.fill(Sign::na);
  for (auto const& [f, s] : signs) d.signs[int(f)] = s;
  d.total_duration = total;
  return d;
}

std::vector<std::string> names(std::vector<std::string> v) { return v; }

}  // namespace

TEST_CASE("builtin template table shape") {
  auto const& rows = builtin_templates();
  REQUIRE(rows.size() == 10);
  std::vector<std::string> rfc, emergency;
  for (auto const& r : rows)
    (r.scheme == "rfc" ? rfc : emergency).push_back(r.name);
  CHECK(rfc == names({"ZSK Pre-Pub", "ZSK Double-Sig", "KSK Double-DS", "KSK Double-KSK",
                      "KSK Double-RRset", "KSK Update-TA"}));
  CHECK(emergency ==
        names({"KSK Emergency 2", "KSK Emergency 3", "ZSK Emergency 2", "ZSK Emergency 3"}));

  // spot checks
  auto const& prepub = rows[0];
  CHECK(prepub.role == Role::zsk);
  CHECK(prepub.cells[int(Feature::pre_stage)] == TemplateCell{CellKind::mandatory, CellSign::gt0});
  CHECK(prepub.cells[int(Feature::double_sig)] == TemplateCell{CellKind::soft, CellSign::eq0});
  CHECK(prepub.cells[int(Feature::pre_ds)].kind == CellKind::wildcard);

  auto const& uta = rows[5];
  CHECK(uta.name == "KSK Update-TA");
  for (int i = 0; i < kFeatureCount; ++i) {
    if (Feature(i) == Feature::total_duration)
      CHECK(uta.cells[i] == TemplateCell{CellKind::mandatory, CellSign::min_duration});
    else
      CHECK(uta.cells[i].kind == CellKind::wildcard);
  }

  auto const& rrset = rows[4];
  CHECK(rrset.cells[int(Feature::ds_pre_rem)] == TemplateCell{CellKind::mandatory, CellSign::ne0});
  CHECK(rrset.cells[int(Feature::rem_pre_ds)].kind == CellKind::wildcard);
}

TEST_CASE("cell predicates") {
  EvalContext ctx;
  auto holds = [&](CellSign cs, Sign s) {
    return cell_holds({CellKind::mandatory, cs}, s, 0, ctx);
  };
  CHECK(holds(CellSign::none, Sign::na));
  CHECK(holds(CellSign::lt0, Sign::neg));
  CHECK_FALSE(holds(CellSign::lt0, Sign::zero));
  CHECK(holds(CellSign::eq0, Sign::zero));
  CHECK_FALSE(holds(CellSign::eq0, Sign::pos));
  CHECK(holds(CellSign::gt0, Sign::pos));
  CHECK(holds(CellSign::ne0, Sign::neg));
  CHECK(holds(CellSign::ne0, Sign::pos));
  CHECK_FALSE(holds(CellSign::ne0, Sign::zero));
  CHECK(holds(CellSign::ge0, Sign::zero));
  CHECK(holds(CellSign::ge0, Sign::pos));
  CHECK_FALSE(holds(CellSign::ge0, Sign::neg));
}

TEST_CASE("duration rules compare the raw duration, not its sign") {
  EvalContext ctx;
  ctx.dep_avg_sig_validity = static_cast<double>(days(30));
  TemplateCell min_dur{CellKind::mandatory, CellSign::min_duration};
  CHECK(cell_holds(min_dur, Sign::na, days(60), ctx));       // boundary is inclusive
  CHECK_FALSE(cell_holds(min_dur, Sign::na, days(60) - 1, ctx));

  TemplateCell ext{CellKind::mandatory, CellSign::extended};
  ctx.extended_threshold = days(30);
  CHECK_FALSE(cell_holds(ext, Sign::na, days(30), ctx));     // strictly greater
  CHECK(cell_holds(ext, Sign::na, days(30) + 1, ctx));
}

TEST_CASE("match_template mechanics") {
  EvalContext ctx;
  auto const& prepub = builtin_templates()[0];

  SECTION("all cells satisfied") {
    auto v = match_template(prepub,
                            dp({{Feature::pre_stage, Sign::pos},
                                {Feature::double_sig, Sign::zero},
                                {Feature::dep_sig_only, Sign::pos},
                                {Feature::retire, Sign::pos},
                                {Feature::rem_sig_only, Sign::pos}}),
                            ctx);
    REQUIRE(v.has_value());
    CHECK(v->empty());
  }
  SECTION("a violated soft cell is reported, not fatal") {
    auto v = match_template(prepub,
                            dp({{Feature::pre_stage, Sign::pos},
                                {Feature::double_sig, Sign::pos},
                                {Feature::dep_sig_only, Sign::pos},
                                {Feature::retire, Sign::pos},
                                {Feature::rem_sig_only, Sign::pos}}),
                            ctx);
    REQUIRE(v.has_value());
    CHECK(*v == std::vector<Feature>{Feature::double_sig});
  }
  SECTION("an unavailable soft cell is a warning too") {
    auto v = match_template(prepub,
                            dp({{Feature::pre_stage, Sign::pos},
                                {Feature::double_sig, Sign::zero},
                                {Feature::dep_sig_only, Sign::pos},
                                {Feature::retire, Sign::pos}}),
                            ctx);  // rem_sig_only left NA
    REQUIRE(v.has_value());
    CHECK(*v == std::vector<Feature>{Feature::rem_sig_only});
  }
  SECTION("a failed mandatory cell rejects the row") {
    CHECK_FALSE(match_template(prepub, dp({{Feature::pre_stage, Sign::zero}}), ctx).has_value());
  }
  SECTION("an unavailable mandatory cell rejects the row") {
    CHECK_FALSE(match_template(prepub, dp({}), ctx).has_value());
  }
  SECTION("duration rules ignore the NA sign and read the raw value") {
    auto const& uta = builtin_templates()[5];
    CHECK(match_template(uta, dp({}, days(31)), ctx).has_value());
    CHECK_FALSE(match_template(uta, dp({}, days(29)), ctx).has_value());
  }
}

TEST_CASE("the template table round-trips through its CSV form") {
  auto rows = load_templates(templates_csv());
  CHECK(rows == builtin_templates());
}

TEST_CASE("rfc classification picks the first matching row") {
  EvalContext ctx;
  KeyLifetime dep;

  SECTION("clean pre-publication") {
    auto out = classify_rfc(dp({{Feature::pre_stage, Sign::pos},
                                {Feature::double_sig, Sign::zero},
                                {Feature::dep_sig_only, Sign::pos},
                                {Feature::retire, Sign::pos},
                                {Feature::rem_sig_only, Sign::pos}}),
                            Role::zsk, ctx, dep);
    CHECK(out.class_name == "ZSK Pre-Pub");
    CHECK(out.severity == Severity::valid);
    CHECK(out.violated_soft.empty());
  }
  SECTION("soft violation demotes to warning") {
    auto out = classify_rfc(dp({{Feature::pre_stage, Sign::pos},
                                {Feature::double_sig, Sign::pos},
                                {Feature::dep_sig_only, Sign::pos},
                                {Feature::retire, Sign::pos},
                                {Feature::rem_sig_only, Sign::pos}}),
                            Role::zsk, ctx, dep);
    CHECK(out.class_name == "ZSK Pre-Pub");
    CHECK(out.severity == Severity::warning);
    CHECK(out.violated_soft == names({"DoubleSig"}));
  }
  SECTION("staging zero falls through to double-signature") {
    auto out = classify_rfc(dp({{Feature::pre_stage, Sign::zero},
                                {Feature::double_sig, Sign::pos},
                                {Feature::dep_sig_only, Sign::zero},
                                {Feature::retire, Sign::zero},
                                {Feature::rem_sig_only, Sign::zero}}),
                            Role::zsk, ctx, dep);
    CHECK(out.class_name == "ZSK Double-Sig");
    CHECK(out.severity == Severity::valid);
  }
  SECTION("nothing matches: noncompliant") {
    auto out = classify_rfc(dp({{Feature::pre_stage, Sign::neg},
                                {Feature::double_sig, Sign::zero}}),
                            Role::zsk, ctx, dep);
    CHECK(out.class_name == "noncompliant");
    CHECK(out.severity == Severity::noncompliant);
  }
  SECTION("double-ksk precedes double-rrset when both would match") {
    auto d = dp({{Feature::pre_ds, Sign::pos},
                 {Feature::double_sig, Sign::pos},
                 {Feature::pre_stage, Sign::zero},
                 {Feature::dep_sig_only, Sign::zero},
                 {Feature::retire, Sign::pos},
                 {Feature::ds_overlap, Sign::zero},
                 {Feature::rem_sig_only, Sign::pos},
                 {Feature::ds_pre_rem, Sign::pos},
                 {Feature::rem_pre_ds, Sign::pos}});
    CHECK(classify_rfc(d, Role::ksk, ctx, dep).class_name == "KSK Double-KSK");
    d.signs[int(Feature::rem_pre_ds)] = Sign::neg;  // breaks double-ksk, not double-rrset
    CHECK(classify_rfc(d, Role::ksk, ctx, dep).class_name == "KSK Double-RRset");
  }
  SECTION("clean double-ds") {
    auto out = classify_rfc(dp({{Feature::pre_ds, Sign::neg},
                                {Feature::double_sig, Sign::zero},
                                {Feature::pre_stage, Sign::zero},
                                {Feature::dep_sig_only, Sign::zero},
                                {Feature::retire, Sign::zero},
                                {Feature::ds_overlap, Sign::pos},
                                {Feature::rem_sig_only, Sign::pos},
                                {Feature::ds_pre_rem, Sign::neg},
                                {Feature::rem_pre_ds, Sign::neg}}),
                            Role::ksk, ctx, dep);
    CHECK(out.class_name == "KSK Double-DS");
    CHECK(out.severity == Severity::valid);
  }
}

TEST_CASE("trust-anchor-update inputs") {
  KeyLifetime dep;
  CHECK_FALSE(update_ta_inputs(dep).satisfied());

  dep.revoked = {{100, 200}};
  auto u = update_ta_inputs(dep);
  CHECK(u.revoked_seen);
  CHECK_FALSE(u.self_signed_while_revoked);

  dep.sigs = {{"A", 150, 400}};  // not a key-rrset signature
  CHECK_FALSE(update_ta_inputs(dep).self_signed_while_revoked);

  dep.sigs.push_back({"DNSKEY", 250, 400});  // misses the revoked interval
  CHECK_FALSE(update_ta_inputs(dep).self_signed_while_revoked);

  dep.sigs.push_back({"DNSKEY", 150, 400});
  CHECK(update_ta_inputs(dep).satisfied());
}

TEST_CASE("update-ta demotes to a warning when the revocation is missing") {
  EvalContext ctx;
  ctx.dep_avg_sig_validity = static_cast<double>(days(30));
  auto d = dp({}, days(61));  // no other ksk row can match all-NA signs

  KeyLifetime dep;
  auto out = classify_rfc(d, Role::ksk, ctx, dep);
  CHECK(out.class_name == "KSK Update-TA");
  CHECK(out.severity == Severity::warning);
  CHECK(out.violated_soft == names({"Unrevoked"}));

  dep.revoked = {{100, 200}};
  dep.sigs = {{"DNSKEY", 150, 400}};
  out = classify_rfc(d, Role::ksk, ctx, dep);
  CHECK(out.class_name == "KSK Update-TA");
  CHECK(out.severity == Severity::valid);
  CHECK(out.violated_soft.empty());
}

TEST_CASE("emergency overlay") {
  EvalContext ctx;

  SECTION("ksk emergency 2") {
    auto out = classify_emergency(dp({{Feature::double_sig, Sign::zero},
                                      {Feature::pre_stage, Sign::zero},
                                      {Feature::dep_sig_only, Sign::zero},
                                      {Feature::retire, Sign::zero},
                                      {Feature::ds_overlap, Sign::zero},
                                      {Feature::rem_sig_only, Sign::pos},
                                      {Feature::rem_pre_ds, Sign::zero}}),
                                  Role::ksk, ctx);
    REQUIRE(out.has_value());
    CHECK(out->class_name == "KSK Emergency 2");
    CHECK(out->severity == Severity::valid);
    CHECK_FALSE(out->rollback);
  }
  SECTION("zsk emergency 3 needs the extended duration") {
    auto staged = dp({{Feature::pre_stage, Sign::pos},
                      {Feature::double_sig, Sign::pos}},
                     days(31));
    auto out = classify_emergency(staged, Role::zsk, ctx);
    REQUIRE(out.has_value());
    CHECK(out->class_name == "ZSK Emergency 3");

    staged.total_duration = days(29);
    CHECK_FALSE(classify_emergency(staged, Role::zsk, ctx).has_value());
  }
  SECTION("no overlay for ordinary shapes") {
    CHECK_FALSE(classify_emergency(dp({{Feature::double_sig, Sign::pos},
                                       {Feature::pre_stage, Sign::zero}},
                                      days(5)),
                                   Role::ksk, ctx)
                    .has_value());
  }
  SECTION("transitioning to an older key reads as rollback") {
    auto d = dp({{Feature::double_sig, Sign::zero},
                 {Feature::pre_stage, Sign::zero},
                 {Feature::dep_sig_only, Sign::zero},
                 {Feature::retire, Sign::zero},
                 {Feature::rem_sig_only, Sign::pos}});
    d.relative_age = PairAnatomy::RelativeAge::older;
    auto out = classify_emergency(d, Role::zsk, ctx);
    REQUIRE(out.has_value());
    CHECK(out->class_name == "ZSK Emergency 2");
    CHECK(out->rollback);
  }
}

namespace {

struct BehaviorFixture {
  std::vector<KeyLifetime> lts;

  KeyLifetime& add(std::string tag, Sec lo, Sec hi) {
    KeyLifetime lt;
    lt.zone = "z.";
    lt.key.zone = "z.";
    lt.key.algorithm = 8;
    lt.key.flags = 256;
    lt.key.public_key = std::move(tag);
    lt.L = {lo, hi};
    lt.role_zsk = true;
    lts.push_back(std::move(lt));
    return lts.back();
  }

  Transition tr(std::vector<int> dep, std::vector<int> rem, Sec at) const {
    Transition t;
    t.zone = "z.";
    t.role = Role::zsk;
    t.at = at;
    for (int i : dep) t.departing.push_back(&lts[i]);
    for (int i : rem) t.remaining.push_back(&lts[i]);
    return t;
  }
};

void sign_between(KeyLifetime& lt, Sec a, Sec b) {
  lt.S_alpha = a;
  lt.S_phi = b;
  lt.S_omega = b + 10;
  lt.sigs.push_back({"A", a, b + 10});
}

}  // namespace

TEST_CASE("behavior: measurable concurrent signing is Multi-Signature") {
  BehaviorFixture f;
  sign_between(f.add("A", 0, 100), 0, 50);
  sign_between(f.add("B", 30, 200), 30, 80);
  auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {30, 100});
  CHECK(out.class_name == "Multi-Signature");
}

TEST_CASE("behavior: concurrency anywhere in the partition counts") {
  BehaviorFixture f;
  sign_between(f.add("A", 0, 100), 0, 40);
  sign_between(f.add("B", 50, 200), 41, 90);
  sign_between(f.add("C", 0, 300), 10, 60);  // overlaps A inside the window
  auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {0, 100});
  CHECK(out.class_name == "Multi-Signature");
}

TEST_CASE("behavior: concurrency outside the window does not count") {
  BehaviorFixture f;
  sign_between(f.add("A", 0, 100), 0, 50);
  sign_between(f.add("B", 30, 200), 30, 80);  // shared hull [30,50]
  auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {60, 100}, 5);
  CHECK(out.class_name != "Multi-Signature");
}

TEST_CASE("behavior: co-present keys never seen in use") {
  BehaviorFixture f;
  f.add("A", 0, 100);
  f.add("B", 50, 200);
  auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {50, 100});
  CHECK(out.class_name == "Co-Present");
}

TEST_CASE("behavior: unused and non-overlapping is Unknown") {
  BehaviorFixture f;
  f.add("A", 0, 100);
  f.add("B", 150, 200);
  auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {0, 200});
  CHECK(out.class_name == "Unknown");
}

TEST_CASE("behavior: cutover tiers by successor start against the slack") {
  BehaviorFixture f;
  sign_between(f.add("A", 0, 100), 0, 40);  // S_phi 40, S_omega 50
  auto& b = f.add("B", 30, 200);
  b.S_alpha = 45;
  b.S_phi = 90;
  b.sigs.push_back({"A", 45, 120});

  SECTION("within the slack: Cutover") {
    auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {30, 100}, 10);
    CHECK(out.class_name == "Cutover");
  }
  SECTION("past the slack but inside residual validity: Likely-Cutover") {
    auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {30, 100}, 2);
    CHECK(out.class_name == "Likely-Cutover");
  }
  SECTION("after all validity expired: Candidate-Cutover") {
    f.lts[1].S_alpha = 60;  // S_omega(A) = 50 < 60
    auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {30, 100}, 2);
    CHECK(out.class_name == "Candidate-Cutover");
  }
  SECTION("a foreign key signing in the quiet period blocks the candidate tier") {
    f.lts[1].S_alpha = 60;
    auto& c = f.add("C", 0, 300);
    c.sigs.push_back({"A", 55, 70});  // inception strictly between 50 and 60
    auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {30, 100}, 2);
    CHECK(out.class_name == "Unknown");
  }
  SECTION("simultaneous stop and start counts as Cutover even with zero slack") {
    f.lts[1].S_alpha = 40;
    auto out = classify_behavior(f.tr({0}, {1}, 100), f.lts, {}, {30, 100}, 0);
    CHECK(out.class_name == "Cutover");
  }
}

TEST_CASE("behavior: default slack is the widest poll gap in the window") {
  BehaviorFixture f;
  sign_between(f.add("A", 0, 1000), 0, 400);  // S_phi 400
  f.lts[0].S_omega = 800;                     // residual validity past the handoff
  auto& b = f.add("B", 300, 2000);
  b.S_alpha = 650;
  b.S_phi = 900;
  b.sigs.push_back({"A", 650, 1200});

  std::vector<PollRecord> polls;
  for (Sec ts : {0, 300, 600, 900}) {
    PollRecord p;
    p.zone = "z.";
    p.ts = ts;
    polls.push_back(p);
  }
  // max gap 300: 650 <= 400 + 300 reads as Cutover
  auto out = classify_behavior(f.tr({0}, {1}, 1000), f.lts, polls, {0, 1000});
  CHECK(out.class_name == "Cutover");
  // an explicit tighter slack demotes it
  out = classify_behavior(f.tr({0}, {1}, 1000), f.lts, polls, {0, 1000}, 100);
  CHECK(out.class_name == "Likely-Cutover");
}

TEST_CASE("behavior: many-to-one hand-offs without concurrency stay Unknown") {
  BehaviorFixture f;
  sign_between(f.add("A", 0, 100), 0, 20);
  sign_between(f.add("B", 0, 100), 30, 50);
  sign_between(f.add("C", 120, 300), 60, 90);
  auto out = classify_behavior(f.tr({0, 1}, {2}, 100), f.lts, {}, {0, 300}, 5);
  CHECK(out.class_name == "Unknown");
}

namespace {

DnskeyRdata const kIKey{257, 3, 8, "AAAAAA=="};  // wire tag 1033

RrsigRecord dnskey_sig(Sec lo, Sec hi) { return {"DNSKEY", 1033, 8, "t.", lo, hi}; }

PollRecord integrity_poll(Sec ts, RrsigRecord keyset_sig) {
  PollRecord p;
  p.zone = "t.";
  p.ts = ts;
  RRsetObservation keyset;
  keyset.rtype = "DNSKEY";
  keyset.dnskeys = {kIKey};
  keyset.rrsigs = {std::move(keyset_sig)};
  p.rrsets.push_back(std::move(keyset));
  return p;
}

std::vector<std::string> integrity_of(std::vector<PollRecord> polls, Interval window) {
  Corpus c = build_corpus(polls);
  SigIndex index(c);
  EvidenceMap ev = build_evidence(c, index);
  return verify_integrity("t.", c.zones.at("t.").polls, window, ev.at("t."));
}

}  // namespace

TEST_CASE("integrity: clean corpus raises nothing") {
  CHECK(integrity_of({integrity_poll(100, dnskey_sig(0, 1000)),
                      integrity_poll(200, dnskey_sig(0, 1000))},
                     {0, 1000})
            .empty());
}

TEST_CASE("integrity: key rrset without a temporally valid signature") {
  auto v = integrity_of({integrity_poll(100, dnskey_sig(0, 1000)),
                         integrity_poll(200, dnskey_sig(600, 1000))},
                        {0, 1000});
  CHECK(v == names({"dnskey-rrsig-coverage"}));
}

TEST_CASE("integrity: violations outside the window are ignored") {
  CHECK(integrity_of({integrity_poll(100, dnskey_sig(0, 1000)),
                      integrity_poll(200, dnskey_sig(600, 1000))},
                     {0, 150})
            .empty());
}

TEST_CASE("integrity: delegation chain must cover a key in use") {
  auto with_ds = [](Sec ts, Interval ds_validity) {
    PollRecord p = integrity_poll(ts, dnskey_sig(0, 1000));
    RRsetObservation ds;
    ds.rtype = "DS";
    ds.ds.push_back({1033, 8, 2, std::string(64, 'a')});
    ds.rrsigs = {RrsigRecord{"DS", 777, 8, "p.", ds_validity.lo, ds_validity.hi}};
    p.rrsets.push_back(std::move(ds));
    return p;
  };
  // both polls inside the delegation's validity: clean
  CHECK(integrity_of({with_ds(100, {0, 300}), with_ds(200, {0, 300})}, {0, 1000}).empty());
  // second poll past it: the key in use has no chain of trust there
  auto v = integrity_of({with_ds(100, {0, 150}), with_ds(200, {0, 150})}, {0, 1000});
  CHECK(v == names({"ds-chain-of-trust"}));
}

TEST_CASE("integrity: in-zone data must verify against a present key") {
  auto with_a = [](Sec ts, RrsigRecord sig) {
    PollRecord p = integrity_poll(ts, dnskey_sig(0, 1000));
    RRsetObservation a;
    a.rtype = "A";
    a.rrsigs = {std::move(sig)};
    p.rrsets.push_back(std::move(a));
    return p;
  };
  CHECK(integrity_of({with_a(100, {"A", 1033, 8, "t.", 0, 1000})}, {0, 1000}).empty());

  // signature by a key tag nobody published
  auto v = integrity_of({with_a(100, {"A", 9999, 8, "t.", 0, 1000})}, {0, 1000});
  CHECK(v == names({"data-rrsig-verifiability"}));

  // signature expired at the poll instant
  v = integrity_of({with_a(100, {"A", 1033, 8, "t.", 0, 50})}, {0, 1000});
  CHECK(v == names({"data-rrsig-verifiability"}));

  // unsigned data rrsets are out of scope
  auto unsigned_ok = [](Sec ts) {
    PollRecord p = integrity_poll(ts, dnskey_sig(0, 1000));
    RRsetObservation txt;
    txt.rtype = "TXT";
    txt.raw_rdata = {"hello"};
    p.rrsets.push_back(std::move(txt));
    return p;
  };
  CHECK(integrity_of({unsigned_ok(100)}, {0, 1000}).empty());
}

TEST_CASE("integrity failures harden outcomes to errors") {
  ClassificationOutcome out;
  out.severity = Severity::valid;
  apply_integrity(out, {"dnskey-rrsig-coverage"});
  CHECK(out.severity == Severity::error);
  CHECK(out.violated_integrity == names({"dnskey-rrsig-coverage"}));

  ClassificationOutcome warn;
  warn.severity = Severity::warning;
  apply_integrity(warn, {"ds-chain-of-trust"});
  CHECK(warn.severity == Severity::error);

  ClassificationOutcome nc;
  nc.severity = Severity::noncompliant;
  apply_integrity(nc, {"ds-chain-of-trust"});
  CHECK(nc.severity == Severity::noncompliant);  // never softened, never relabeled

  ClassificationOutcome clean;
  clean.severity = Severity::warning;
  apply_integrity(clean, {});
  CHECK(clean.severity == Severity::warning);
}

TEST_CASE("severity names") {
  CHECK(std::string(severity_name(Severity::valid)) == "valid");
  CHECK(std::string(severity_name(Severity::warning)) == "warning");
  CHECK(std::string(severity_name(Severity::error)) == "error");
  CHECK(std::string(severity_name(Severity::noncompliant)) == "noncompliant");
}
