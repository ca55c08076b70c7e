#include <gtest/gtest.h>

#include "iqkd/schemes.hpp"
#include "support.hpp"

using namespace iqkd;

namespace {

const double kPi = std::numbers::pi;

// Port probabilities for a single photon alpha0 |t'0> + alpha1 |t'1>.
std::map<oracle::Port, double> port_probabilities(const std::array<cplx, 2>& alpha, SetupKind kind, double phi) {
  std::map<oracle::Port, cplx> amp;
  for (int t = 0; t < 2; ++t) {
    if (kind == SetupKind::native_z) {
      amp[t == 0 ? oracle::Port{1, 1} : oracle::Port{0, 1}] += alpha[static_cast<std::size_t>(t)];
      continue;
    }
    for (const auto& [p, a] : oracle::mach_zehnder_path_sum(t, phi)) amp[p] += alpha[static_cast<std::size_t>(t)] * a;
  }
  std::map<oracle::Port, double> out;
  for (const auto& [p, a] : amp) out[p] = std::norm(a);
  return out;
}

// Outcome class probabilities from the port probabilities, using the reading
// rules written out by hand for the two detector layouts.
std::map<Outcome, double> expected_outcomes(const AliceState& a, const BasisSetup& bs, bool unified_z) {
  std::map<Outcome, double> out{{Outcome::bit0, 0.0}, {Outcome::bit1, 0.0}, {Outcome::loss, 0.0}, {Outcome::invalid, 0.0}};
  for (const auto& [p, prob] : port_probabilities(a.alpha, bs.setup.kind, bs.setup.phi)) {
    Outcome o = Outcome::loss;
    if (unified_z) {
      if (p.bin == 0) o = Outcome::bit0;
      if (p.bin == 2) o = Outcome::bit1;
    } else if (p.bin == 1) {
      o = p.arm == 1 ? Outcome::bit0 : Outcome::bit1;
    }
    out[o] += prob;
  }
  return out;
}

bool is_unified_z(SchemeName n, Basis b) {
  return b == Basis::z && (n == SchemeName::unified_xz_bb84 || n == SchemeName::unified_six_state);
}

}  // namespace

TEST(Alphabet, NormalizedAndOrthogonalWithinBasis) {
  for (auto b : {Basis::x, Basis::y, Basis::z}) {
    const auto s0 = alice_state(b, 0), s1 = alice_state(b, 1);
    EXPECT_TRUE(s0.vector.is_normalized());
    EXPECT_NEAR(std::abs(inner_product(s0.vector, s1.vector)), 0.0, 1e-15);
  }
  // Mutually unbiased across bases.
  for (auto [a, b] : {std::pair{Basis::x, Basis::y}, {Basis::x, Basis::z}, {Basis::y, Basis::z}}) {
    EXPECT_NEAR(std::norm(inner_product(alice_state(a, 0).vector, alice_state(b, 1).vector)), 0.5, 1e-15);
  }
  EXPECT_THROW(alice_state(Basis::x, 2), Error);
}

TEST(Parsing, NamesRoundTrip) {
  for (auto n : kAllSchemes) EXPECT_EQ(parse_scheme_name(to_string(n)), n);
  for (auto b : {Basis::x, Basis::y, Basis::z}) EXPECT_EQ(parse_basis(to_string(b)), b);
  EXPECT_EQ(parse_detector_kind("counter"), DetectorKind::counter);
  EXPECT_THROW(parse_scheme_name("bb84"), Error);
  EXPECT_THROW(parse_basis("w"), Error);
  EXPECT_THROW(parse_detector_kind("pnr"), Error);
}

TEST(Parsing, OutcomePatternRoundTrip) {
  const auto p = parse_outcome_pattern("{s0x2,d1}");
  EXPECT_EQ(p.total(), 3);
  EXPECT_EQ(to_string(p), "{s0x2,d1}");
  EXPECT_EQ(parse_outcome_pattern(to_string(p)), p);
  EXPECT_TRUE(parse_outcome_pattern("{}").no_click());
  EXPECT_THROW(parse_outcome_pattern("d1"), Error);
  EXPECT_THROW(parse_outcome_pattern("{d1x}"), Error);
  EXPECT_THROW(parse_outcome_pattern("{q1}"), Error);
}

TEST(MeasurementModel, ReadingRules) {
  const auto m = t1_model(DetectorKind::threshold);
  auto click = [](std::vector<std::pair<ModeLabel, int>> c) { return OutcomePattern{std::move(c)}; };
  EXPECT_EQ(m.interpret(click({})), Outcome::loss);
  EXPECT_EQ(m.interpret(click({{ModeLabel::down(1), 1}})), Outcome::bit0);
  EXPECT_EQ(m.interpret(click({{ModeLabel::straight(1), 1}})), Outcome::bit1);
  EXPECT_EQ(m.interpret(click({{ModeLabel::straight(1), 1}, {ModeLabel::down(1), 1}})), Outcome::invalid);
  EXPECT_THROW(m.interpret(click({{ModeLabel::straight(0), 1}})), Error);

  const auto c = t1_model(DetectorKind::counter);
  EXPECT_EQ(c.interpret(click({{ModeLabel::down(1), 2}})), Outcome::invalid);

  const auto u = unified_z_model(DetectorKind::threshold, true);
  EXPECT_EQ(u.interpret(click({{ModeLabel::straight(1), 1}})), Outcome::loss);
  EXPECT_EQ(u.interpret(click({{ModeLabel::straight(0), 1}})), Outcome::bit0);
  EXPECT_EQ(u.interpret(click({{ModeLabel::down(2), 1}})), Outcome::bit1);
  EXPECT_EQ(u.interpret(click({{ModeLabel::down(0), 1}, {ModeLabel::down(2), 1}})), Outcome::invalid);
}

TEST(MeasurementModel, RejectsInconsistentWindows) {
  const auto s1 = ModeLabel::straight(1), d1 = ModeLabel::down(1);
  EXPECT_THROW(MeasurementModel({s1}, DetectorKind::threshold, {d1}, {}), Error);
  EXPECT_THROW(MeasurementModel({s1, d1}, DetectorKind::threshold, {s1}, {s1}), Error);
}

TEST(MeasurementModel, PartitionCoversEveryPatternOnce) {
  for (auto kind : {DetectorKind::threshold, DetectorKind::counter}) {
    for (const auto& m : {t1_model(kind), unified_z_model(kind, true), unified_z_model(kind, false)}) {
      for (int cap = 1; cap <= 2; ++cap) {
        const auto all = m.possible_patterns(cap);
        const auto part = m.partition(cap);
        std::vector<OutcomePattern> joined;
        for (const auto* v : {&part.j0, &part.j1, &part.loss, &part.invalid}) joined.insert(joined.end(), v->begin(), v->end());
        std::sort(joined.begin(), joined.end());
        auto sorted = all;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(joined, sorted);
        EXPECT_TRUE(std::adjacent_find(joined.begin(), joined.end()) == joined.end());
        for (const auto& p : part.j0) EXPECT_EQ(m.interpret(p), Outcome::bit0);
        for (const auto& p : part.invalid) EXPECT_EQ(m.interpret(p), Outcome::invalid);
        if (cap == 1) {
          EXPECT_TRUE(part.invalid.empty());
        }
      }
    }
  }
}

TEST(Schemes, CatalogShape) {
  EXPECT_EQ(scheme(SchemeName::xy_bb84).alphabet.size(), 4u);
  EXPECT_EQ(scheme(SchemeName::native_six_state).alphabet.size(), 6u);
  EXPECT_EQ(scheme(SchemeName::unified_six_state).bases.size(), 3u);
  const auto u = scheme(SchemeName::unified_xz_bb84);
  EXPECT_EQ(u.setup_for(Basis::z).setup.kind, SetupKind::mach_zehnder);
  EXPECT_EQ(u.setup_for(Basis::z).model.windows().size(), 6u);
  EXPECT_EQ(scheme(SchemeName::unified_xz_bb84, {.unified_z_monitors_t1 = false}).setup_for(Basis::z).model.windows().size(), 4u);
  EXPECT_EQ(scheme(SchemeName::native_xz_bb84).setup_for(Basis::z).setup.kind, SetupKind::native_z);
  EXPECT_THROW(scheme(SchemeName::xy_bb84).setup_for(Basis::z), Error);
}

// Every (scheme, Alice state, Bob basis) against the path-sum oracle. This
// covers matching-basis correctness (never the wrong bit) and conjugate-basis
// uniformity (bit 0 and bit 1 equally likely).
TEST(Schemes, DetectionDistributionsMatchPathSum) {
  for (auto n : kAllSchemes) {
    const auto def = scheme(n);
    for (const auto& a : def.alphabet) {
      for (const auto& bs : def.bases) {
        const auto got = outcome_probabilities(detection_distribution(a, bs), bs.model);
        const auto want = expected_outcomes(a, bs, is_unified_z(n, bs.basis));
        for (auto o : {Outcome::bit0, Outcome::bit1, Outcome::loss, Outcome::invalid}) {
          EXPECT_NEAR(got.at(o), want.at(o), 1e-12) << to_string(n) << " " << to_string(a.basis) << a.bit << " -> "
                                                    << to_string(bs.basis) << " " << to_string(o);
        }
        const double total = got.at(Outcome::bit0) + got.at(Outcome::bit1) + got.at(Outcome::loss) + got.at(Outcome::invalid);
        EXPECT_NEAR(total, 1.0, 1e-12);
        if (bs.basis == a.basis) {
          EXPECT_NEAR(got.at(a.bit == 0 ? Outcome::bit1 : Outcome::bit0), 0.0, 1e-12);
          EXPECT_GT(got.at(a.bit == 0 ? Outcome::bit0 : Outcome::bit1), 0.2);
        } else {
          EXPECT_NEAR(got.at(Outcome::bit0), got.at(Outcome::bit1), 1e-12);
        }
        EXPECT_NEAR(got.at(Outcome::invalid), 0.0, 1e-15);
      }
    }
  }
}

TEST(Schemes, InterferometricMatchedDetectionIsOneHalf) {
  const auto def = scheme(SchemeName::xy_bb84, {.window = {-1, 2}});
  for (const auto& a : def.alphabet) {
    const auto p = outcome_probabilities(detection_distribution(a, def.setup_for(a.basis)), def.setup_for(a.basis).model);
    EXPECT_NEAR(p.at(a.bit == 0 ? Outcome::bit0 : Outcome::bit1), 0.5, 1e-12);
  }
  const auto y = scheme(SchemeName::xy_bb84).setup_for(Basis::y);
  EXPECT_NEAR(y.setup.phi, kPi / 2, 0.0);
}
