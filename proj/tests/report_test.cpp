#include <gtest/gtest.h>

#include "iqkd/report.hpp"

using namespace iqkd;

namespace {

void expect_same_scheme(const SchemeDefinition& a, const SchemeDefinition& b) {
  EXPECT_EQ(a.name, b.name);
  ASSERT_EQ(a.bases.size(), b.bases.size());
  for (std::size_t i = 0; i < a.bases.size(); ++i) {
    const auto& x = a.bases[i];
    const auto& y = b.bases[i];
    EXPECT_EQ(x.basis, y.basis);
    EXPECT_EQ(x.setup.kind, y.setup.kind);
    EXPECT_EQ(x.setup.window, y.setup.window);
    EXPECT_EQ(x.setup.unitary.inputs(), y.setup.unitary.inputs());
    EXPECT_EQ(x.setup.unitary.outputs(), y.setup.unitary.outputs());
    EXPECT_LT((x.setup.unitary.matrix() - y.setup.unitary.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(x.model.windows(), y.model.windows());
    EXPECT_EQ(x.model.bit0_windows(), y.model.bit0_windows());
    EXPECT_EQ(x.model.bit1_windows(), y.model.bit1_windows());
    EXPECT_EQ(x.model.kind(), y.model.kind());
  }
  EXPECT_EQ(a.alphabet.size(), b.alphabet.size());
}

}  // namespace

TEST(Tidy, RoundsToTwelveDigits) {
  EXPECT_EQ(tidy(0.1 + 0.2), 0.3);
  EXPECT_EQ(tidy(1e-17), 0.0);
  EXPECT_EQ(tidy(-0.0), 0.0);
  EXPECT_FALSE(std::signbit(tidy(-1e-20)));
}

TEST(ComplexJson, ExactRoundTrip) {
  const cplx z{1.0 / 3.0, -std::sqrt(2.0)};
  EXPECT_EQ(complex_from_json(exact_complex_json(z)), z);
  EXPECT_THROW(complex_from_json(json::array({1.0})), Error);
  EXPECT_THROW(complex_from_json(json("x")), Error);
}

TEST(SchemeRecord, RoundTripsEveryScheme) {
  for (auto n : kAllSchemes) {
    for (auto d : {DetectorKind::threshold, DetectorKind::counter}) {
      const auto def = scheme(n, {.detector = d});
      const auto text = scheme_record(def).dump();
      expect_same_scheme(def, scheme_from_record(json::parse(text)));
    }
  }
}

TEST(SchemeRecord, VariantWithoutTimeOneMonitoring) {
  auto rec = scheme_record(scheme(SchemeName::unified_xz_bb84));
  rec["bases"][1]["windows"] = json::array({"s0", "s2", "d0", "d2"});
  const auto def = scheme_from_record(rec);
  expect_same_scheme(def, scheme(SchemeName::unified_xz_bb84, {.unified_z_monitors_t1 = false}));
}

TEST(SchemeRecord, RejectsMalformedRecords) {
  auto good = scheme_record(scheme(SchemeName::xy_bb84));
  auto broken = [&](auto edit) {
    auto j = good;
    edit(j);
    return j;
  };
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j.erase("bases"); })), Error);
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j["bases"] = json::array(); })), Error);
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j["bases"][0]["setup"] = "prism"; })), Error);
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j["bases"][0]["windows"] = json::array({"s9"}); })), Error);
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j["bases"][1]["basis"] = "x"; })), Error);
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j["bases"][0]["window"] = json::array({3, 1}); })), Error);
  EXPECT_THROW(scheme_from_record(broken([](json& j) { j["bases"][0]["phi"] = "zero"; })), Error);
}

TEST(AttackRecord, RoundTripsExactly) {
  for (const char* spec : {"identity", "fake-time-bin", "blocking:0.3", "measure-resend:y"}) {
    const auto a = canned_attack(spec);
    const auto b = attack_from_record(json::parse(attack_record(a).dump()));
    EXPECT_EQ(a.name(), b.name());
    EXPECT_EQ(a.channel_basis(), b.channel_basis());
    EXPECT_EQ(a.stacked(), b.stacked()) << spec;
  }
}

TEST(AttackRecord, RejectsMalformedRecords) {
  const auto good = attack_record(identity_attack());
  auto broken = [&](auto edit) {
    auto j = good;
    edit(j);
    return j;
  };
  EXPECT_THROW(attack_from_record(broken([](json& j) { j.erase("eve_dim"); })), Error);
  EXPECT_THROW(attack_from_record(broken([](json& j) { j["vectors"][0]["k"] = "t'7"; })), Error);
  EXPECT_THROW(attack_from_record(broken([](json& j) { j["vectors"][0]["i"] = 2; })), Error);
  EXPECT_THROW(attack_from_record(broken([](json& j) { j["vectors"][1]["eve"] = json::array({json::array({2.0, 0.0})}); })),
               Error);  // no longer an isometry
  EXPECT_THROW(attack_from_record(broken([](json& j) { j["vectors"][1]["eve"] = json::array(); })), Error);
}

TEST(SessionJson, AbsentRatesAreNull) {
  SessionConfig cfg{scheme(SchemeName::xy_bb84), blocking_attack(0.0), 100, 1, {}, 1, 1};
  const auto j = session_json(run_session(cfg));
  EXPECT_TRUE(j["per_basis"][0]["qber"].is_null());
  EXPECT_TRUE(j["per_basis"][0]["eve_guess_accuracy"].is_null());
  EXPECT_EQ(j["per_basis"][0]["loss_rate"], 1.0);
  EXPECT_EQ(j["overall"]["rounds"], 100);
  EXPECT_EQ(j["pairs"].size(), 4u);
}

TEST(SessionCsv, OneRowPerBasis) {
  SessionConfig cfg{scheme(SchemeName::native_six_state), std::nullopt, 300, 4, {}, 1, 1};
  const auto csv = session_csv(run_session(cfg));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("basis,sent,", 0), 0u);
  EXPECT_NE(csv.find("\nz,"), std::string::npos);
}

TEST(AnalysisJson, RobustnessFields) {
  const auto def = scheme(SchemeName::unified_xz_bb84);
  const auto j = robustness_json(def, robustness_verdict(def));
  EXPECT_EQ(j["verdict"], "nonrobust");
  EXPECT_EQ(j["nullity"], 5);
  EXPECT_TRUE(j.contains("witness"));
}
