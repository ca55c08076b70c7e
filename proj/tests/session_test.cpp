#include <gtest/gtest.h>

#include "iqkd/session.hpp"
#include "support.hpp"

using namespace iqkd;

namespace {

SessionReport run(SchemeName n, std::optional<AttackIsometry> attack, std::uint64_t rounds, std::uint64_t seed,
                  unsigned threads = 1) {
  SessionConfig cfg{scheme(n), std::move(attack), rounds, seed, {}, 1, threads};
  return run_session(cfg);
}

}  // namespace

TEST(Rng, SplitMixReferenceValue) {
  // First output of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(mix64(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
  const RoundStream a(42, 7), b(42, 7), c(42, 8);
  EXPECT_EQ(a.word(3), b.word(3));
  EXPECT_NE(a.word(3), c.word(3));
  EXPECT_NE(a.word(3), a.word(4));
}

TEST(Rng, UniformRangeAndMean) {
  double sum = 0.0;
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    const double u = RoundStream(1, static_cast<std::uint64_t>(r)).uniform(0);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Mean of n uniforms has standard deviation 1/sqrt(12 n).
  EXPECT_NEAR(sum / n, 0.5, 3.0 / std::sqrt(12.0 * n));
}

TEST(Sampling, ClampProbability) {
  EXPECT_EQ(clamp_probability(1e-13), 0.0);
  EXPECT_EQ(clamp_probability(1.0 - 1e-13), 1.0);
  EXPECT_EQ(clamp_probability(0.25), 0.25);
}

TEST(Sampling, InverseCdf) {
  const auto a = parse_outcome_pattern("{s1}");
  const auto b = parse_outcome_pattern("{d1}");
  const PatternDistribution dist{{OutcomePattern{}, 0.5}, {a, 0.0}, {b, 0.5}};
  EXPECT_EQ(sample_outcome(dist, 0.0), OutcomePattern{});
  EXPECT_EQ(sample_outcome(dist, 0.4999), OutcomePattern{});
  EXPECT_EQ(sample_outcome(dist, 0.5), b);
  EXPECT_EQ(sample_outcome(dist, 1.0 - 1e-16), b);
}

TEST(Sampling, RejectsMalformedDistributions) {
  EXPECT_THROW(sample_outcome({}, 0.5), Error);
  EXPECT_THROW(sample_outcome({{OutcomePattern{}, 0.7}}, 0.5), Error);
  EXPECT_THROW(sample_outcome({{OutcomePattern{}, -0.1}, {parse_outcome_pattern("{s1}"), 1.1}}, 0.5), Error);
  EXPECT_THROW(sample_outcome({{OutcomePattern{}, std::nan("")}}, 0.5), Error);
}

TEST(Session, DeterministicAndThreadIndependent) {
  const auto a = run(SchemeName::unified_six_state, measure_resend_attack(Basis::y), 20000, 9);
  const auto b = run(SchemeName::unified_six_state, measure_resend_attack(Basis::y), 20000, 9);
  const auto c = run(SchemeName::unified_six_state, measure_resend_attack(Basis::y), 20000, 9, 4);
  const auto d = run(SchemeName::unified_six_state, measure_resend_attack(Basis::y), 20000, 10);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, d);
  // More threads than rounds is clamped.
  EXPECT_EQ(run(SchemeName::xy_bb84, std::nullopt, 3, 1, 16), run(SchemeName::xy_bb84, std::nullopt, 3, 1));
}

TEST(Session, CountsAreConsistent) {
  const auto r = run(SchemeName::native_six_state, measure_resend_attack(Basis::x), 30000, 3);
  std::uint64_t sent = 0;
  for (const auto& [b, s] : r.per_basis) {
    EXPECT_EQ(s.sent, s.detected + s.lost + s.invalid);
    EXPECT_EQ(s.detected, s.sifted + s.mismatched_detected);
    EXPECT_LE(s.errors, s.sifted);
    EXPECT_LE(s.eve_correct, s.sifted);
    sent += s.sent;
  }
  EXPECT_EQ(sent, r.rounds);
  std::uint64_t pair_total = 0;
  for (const auto& [k, counts] : r.pairs) {
    for (const auto& [o, n] : counts) pair_total += n;
  }
  EXPECT_EQ(pair_total, r.rounds);
}

// With no attack, every (Alice basis, Bob basis) outcome frequency sits
// within three standard deviations of the Born-rule prediction.
TEST(Session, IdentityFrequenciesMatchBornRule) {
  for (auto n : kAllSchemes) {
    const auto def = scheme(n);
    const auto r = run(n, std::nullopt, 60000, 2024);
    for (const auto& [key, counts] : r.pairs) {
      const auto [ab, bb] = key;
      std::uint64_t total = 0;
      for (const auto& [o, c] : counts) total += c;
      ASSERT_GT(total, 0u);
      const auto& bs = def.setup_for(bb);
      std::map<Outcome, double> p;
      for (int bit = 0; bit < 2; ++bit) {
        for (const auto& [o, q] : outcome_probabilities(detection_distribution(alice_state(ab, bit), bs), bs.model)) {
          p[o] += 0.5 * q;
        }
      }
      for (const auto& [o, c] : counts) {
        EXPECT_TRUE(oracle::within_3_sigma(c, total, p[o]))
            << to_string(n) << " " << to_string(ab) << "->" << to_string(bb) << " " << to_string(o) << ": " << c << "/"
            << total << " vs " << p[o];
      }
    }
    for (const auto& [b, s] : r.per_basis) {
      EXPECT_EQ(s.errors, 0u);
      EXPECT_TRUE(oracle::within_3_sigma(s.eve_correct, s.sifted, 0.5)) << to_string(n);
      if (s.mismatched_detected > 0) {
        EXPECT_TRUE(oracle::within_3_sigma(s.mismatched_bit0, s.mismatched_detected, 0.5));
      }
    }
  }
}

TEST(Session, MeasureResendQber) {
  const auto r = run(SchemeName::xy_bb84, measure_resend_attack(Basis::z), 80000, 77);
  for (const auto& [b, s] : r.per_basis) {
    ASSERT_TRUE(s.qber());
    EXPECT_TRUE(oracle::within_3_sigma(s.errors, s.sifted, 0.5)) << *s.qber();
  }
}

TEST(Session, FakeTimeBinOnUnified) {
  const auto r = run(SchemeName::unified_xz_bb84, fake_time_bin_attack(), 40000, 42);
  const auto& x = r.per_basis.at(Basis::x);
  const auto& z = r.per_basis.at(Basis::z);
  EXPECT_EQ(x.lost, x.sent);
  EXPECT_EQ(z.errors, 0u);
  EXPECT_EQ(z.eve_correct, z.sifted);
  EXPECT_GT(z.sifted, 0u);
  EXPECT_THROW(run(SchemeName::xy_bb84, fake_time_bin_attack(), 10, 1), Error);
}

TEST(Session, BlockingEverythingLosesEverything) {
  const auto r = run(SchemeName::xy_bb84, blocking_attack(0.0), 5000, 1);
  for (const auto& [b, s] : r.per_basis) {
    EXPECT_EQ(s.lost, s.sent);
    EXPECT_FALSE(s.qber());
    EXPECT_FALSE(s.eve_accuracy());
  }
}

TEST(Session, BasisWeights) {
  SessionConfig cfg{scheme(SchemeName::xy_bb84), std::nullopt, 20000, 5, {{Basis::x, 0.75}, {Basis::y, 0.25}}, 1, 1};
  const auto r = run_session(cfg);
  EXPECT_TRUE(oracle::within_3_sigma(r.per_basis.at(Basis::x).sent, r.rounds, 0.75));
  cfg.basis_probabilities = {{Basis::z, 1.0}};
  EXPECT_THROW(run_session(cfg), Error);
  cfg.basis_probabilities = {{Basis::x, 0.0}, {Basis::y, 1.0}};
  EXPECT_THROW(run_session(cfg), Error);
  cfg.basis_probabilities = {{Basis::x, 0.5}, {Basis::y, 0.6}};
  EXPECT_THROW(run_session(cfg), Error);
  cfg.basis_probabilities.clear();
  cfg.rounds = 0;
  EXPECT_THROW(run_session(cfg), Error);
}
