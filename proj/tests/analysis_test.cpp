#include <gtest/gtest.h>

#include "iqkd/analysis.hpp"
#include "support.hpp"

using namespace iqkd;

namespace {

const double kR2 = std::sqrt(2.0);

int reference_nullity(const Matrix& m) {
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-9);
  return static_cast<int>(m.cols() - lu.rank());
}

bool is_robust_scheme(SchemeName n) { return n != SchemeName::unified_xz_bb84 && n != SchemeName::unified_six_state; }

}  // namespace

TEST(Constraints, ShapeAndColumnOrder) {
  const auto xy = build_constraints(scheme(SchemeName::xy_bb84));
  EXPECT_EQ(xy.matrix.rows(), 4);
  EXPECT_EQ(xy.matrix.cols(), 6);
  EXPECT_EQ(to_string(xy.columns[0]), "(0,V)");
  EXPECT_EQ(to_string(xy.columns[5]), "(1,t'1)");
  // Each alphabet state forbids the other bit's t1 detector.
  EXPECT_EQ(xy.rows[0].outcome, ModeLabel::straight(1));
  EXPECT_EQ(xy.rows[0].kind, Outcome::bit1);

  const auto uni = build_constraints(scheme(SchemeName::unified_xz_bb84));
  EXPECT_EQ(uni.matrix.cols(), 10);
  EXPECT_EQ(uni.matrix.rows(), 6);  // 2 per x state, 2 per z state
  EXPECT_EQ(build_constraints(scheme(SchemeName::native_six_state)).matrix.rows(), 6);
}

TEST(Constraints, VacuumColumnsAreZero) {
  for (auto n : kAllSchemes) {
    const auto cs = build_constraints(scheme(n));
    for (std::size_t c = 0; c < cs.columns.size(); ++c) {
      if (cs.columns[c].k.is_vacuum) {
        EXPECT_EQ(cs.matrix.col(static_cast<Eigen::Index>(c)).norm(), 0.0);
      }
    }
  }
}

TEST(Nullspace, MatchesReferenceRankAndHasTinyResidual) {
  for (auto n : kAllSchemes) {
    const auto cs = build_constraints(scheme(n));
    const auto z = solve_zero_error(cs);
    EXPECT_EQ(z.nullity, reference_nullity(cs.matrix)) << to_string(n);
    EXPECT_EQ(z.rank + z.nullity, cs.matrix.cols());
    EXPECT_LT(max_residual(cs.matrix, z.basis), 1e-12);
    for (std::size_t a = 0; a < z.basis.size(); ++a) {
      for (std::size_t b = 0; b < z.basis.size(); ++b) {
        EXPECT_NEAR(std::abs(z.basis[a].dot(z.basis[b]) - (a == b ? 1.0 : 0.0)), 0.0, 1e-12);
      }
    }
  }
}

TEST(Nullspace, StableUnderRowPermutationAndColumnScaling) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mag(0.5, 2.0), ph(-3.0, 3.0);
  for (auto n : kAllSchemes) {
    const Matrix m = build_constraints(scheme(n)).matrix;
    const int base = solve_nullspace(m).nullity;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(m.rows()));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix p(m.rows(), m.cols());
      for (Eigen::Index r = 0; r < m.rows(); ++r) p.row(r) = m.row(perm[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < m.cols(); ++c) p.col(c) *= std::polar(mag(rng), ph(rng));
      EXPECT_EQ(solve_nullspace(p).nullity, base) << to_string(n);
    }
  }
}

TEST(Nullspace, EdgeCases) {
  EXPECT_EQ(solve_nullspace(Matrix::Zero(0, 4)).nullity, 4);
  EXPECT_EQ(solve_nullspace(Matrix::Zero(3, 3)).nullity, 3);
  EXPECT_EQ(solve_nullspace(Matrix::Identity(3, 3)).nullity, 0);
  Matrix tiny = Matrix::Identity(2, 2);
  tiny(1, 1) = 1e-12;
  EXPECT_EQ(solve_nullspace(tiny).nullity, 1);
}

TEST(Verdicts, AllSchemes) {
  for (auto n : kAllSchemes) {
    const auto r = robustness_verdict(scheme(n));
    if (is_robust_scheme(n)) {
      EXPECT_EQ(r.verdict, Verdict::robust) << to_string(n);
      EXPECT_EQ(r.space.nullity, 3) << to_string(n);
      EXPECT_FALSE(r.witness);
      EXPECT_FALSE(r.reduction.empty());
    } else {
      EXPECT_EQ(r.verdict, Verdict::nonrobust) << to_string(n);
      EXPECT_EQ(r.space.nullity, 5) << to_string(n);
      ASSERT_TRUE(r.witness);
    }
  }
}

TEST(Verdicts, UnmonitoredTimeOneKeepsUnifiedVerdict) {
  for (auto n : {SchemeName::unified_xz_bb84, SchemeName::unified_six_state}) {
    const auto r = robustness_verdict(scheme(n, {.unified_z_monitors_t1 = false}));
    EXPECT_EQ(r.verdict, Verdict::nonrobust);
    EXPECT_EQ(r.space.nullity, 5);
  }
}

TEST(Verdicts, CounterDetectorsGiveSameVerdicts) {
  for (auto n : kAllSchemes) {
    EXPECT_EQ(robustness_verdict(scheme(n, {.detector = DetectorKind::counter})).verdict,
              robustness_verdict(scheme(n)).verdict);
  }
}

// The witness behaves like the fake time-bin attack: silent on x, perfect on z.
TEST(Verdicts, UnifiedWitnessIsFakeTimeBinLike) {
  const auto def = scheme(SchemeName::unified_xz_bb84);
  const auto r = robustness_verdict(def);
  ASSERT_TRUE(r.witness);
  const auto& w = *r.witness;
  for (auto b : def.basis_list()) EXPECT_NEAR(error_probability(w, def, b), 0.0, 1e-12);
  EXPECT_NEAR(outcome_rates(w, def, Basis::x).at(Outcome::loss), 1.0, 1e-12);
  const auto z = eve_information(w, def, Basis::z);
  ASSERT_TRUE(z.guess_probability);
  EXPECT_EQ(*z.guess_probability, 1.0);
  EXPECT_NEAR(z.bits, 1.0, 1e-12);
  // Supported on (0,t'-1) and (1,t'2) only, like the canned attack.
  const auto& cb = w.channel_basis();
  for (std::size_t k = 0; k < cb.size(); ++k) {
    const bool allowed0 = !cb[k].is_vacuum && cb[k].bin == -1;
    const bool allowed1 = !cb[k].is_vacuum && cb[k].bin == 2;
    if (!allowed0) {
      EXPECT_LT(w.eve_vector(0, k).norm(), 1e-9);
    }
    if (!allowed1) {
      EXPECT_LT(w.eve_vector(1, k).norm(), 1e-9);
    }
  }
}

TEST(Verdicts, RobustNullspaceIsForwardingPlusVacuum) {
  const auto r = robustness_verdict(scheme(SchemeName::xy_bb84));
  EXPECT_TRUE(r.nonforwarding.empty());
  const auto f = forwarding_direction(r.constraints);
  ASSERT_TRUE(f);
  EXPECT_LT((r.constraints.matrix * *f).norm(), 1e-12);
}

TEST(EveInformation, CannedAttacks) {
  const auto xy = scheme(SchemeName::xy_bb84);
  for (auto b : xy.basis_list()) {
    const auto id = eve_information(identity_attack(), xy, b);
    ASSERT_TRUE(id.guess_probability);
    EXPECT_NEAR(*id.guess_probability, 0.5, 1e-12);
    EXPECT_NEAR(id.detection_probability, 0.5, 1e-12);
    EXPECT_EQ(id.bits, 0.0);
  }
  // Everything blocked: no detections, no guess.
  const auto none = eve_information(blocking_attack(0.0), xy, Basis::x);
  EXPECT_FALSE(none.guess_probability);
  EXPECT_EQ(none.bits, 0.0);
  EXPECT_NEAR(outcome_rates(blocking_attack(0.5), xy, Basis::x).at(Outcome::loss), 0.875, 1e-12);
}

TEST(EveInformation, BinaryEntropy) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
  EXPECT_NEAR(binary_entropy(0.11), 0.4999, 1e-3);
}

TEST(EveInformation, HelstromProjectors) {
  Matrix a = Matrix::Zero(3, 3), b = Matrix::Zero(3, 3);
  a(0, 0) = 0.5;
  b(1, 1) = 0.5;
  a(2, 2) = b(2, 2) = 0.25;
  const auto [plus, tie] = helstrom_projectors(a, b);
  EXPECT_NEAR(std::abs(plus(0, 0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(plus(1, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(tie(2, 2) - 1.0), 0.0, 1e-12);
}

// Measure-resend in z against xy-BB84, computed by enumerating Eve's result
// and the resent pulse: half the conclusive x outcomes are wrong.
TEST(ErrorProbability, MeasureResendMatchesEnumeration) {
  const auto xy = scheme(SchemeName::xy_bb84);
  for (auto basis : xy.basis_list()) {
    const auto& bs = xy.setup_for(basis);
    double wrong = 0.0, conclusive = 0.0;
    for (int bit = 0; bit < 2; ++bit) {
      const auto sent = alice_state(basis, bit);
      for (int m = 0; m < 2; ++m) {
        const auto resent = alice_state(Basis::z, m);
        const double pm = std::norm(inner_product(resent.vector, sent.vector));
        for (const auto& [o, p] : outcome_probabilities(detection_distribution(resent, bs), bs.model)) {
          if (is_wrong(o, bit)) wrong += 0.5 * pm * p;
          if (is_conclusive(o)) conclusive += 0.5 * pm * p;
        }
      }
    }
    const auto a = measure_resend_attack(Basis::z);
    EXPECT_NEAR(error_probability(a, xy, basis), wrong, 1e-12);
    EXPECT_NEAR(wrong / conclusive, 0.5, 1e-12);
  }
}

TEST(Profile, LossAsymmetryFlag) {
  const auto def = scheme(SchemeName::unified_xz_bb84);
  const auto p = profile_attack(fake_time_bin_attack(), def);
  EXPECT_TRUE(p.loss_asymmetry_flagged);
  EXPECT_NEAR(p.loss_asymmetry, 0.5, 1e-12);
  EXPECT_FALSE(profile_attack(identity_attack().embedded(build_constraints(def).channel_basis), def).loss_asymmetry_flagged);
}

TEST(TwoPhoton, AllowedRaysForEveryAlphabetState) {
  const auto xy = scheme(SchemeName::xy_bb84);
  const cplx I{0, 1};
  const std::map<std::pair<Basis, int>, std::array<cplx, 3>> expected{
      {{Basis::x, 0}, {0.5, kR2 / 2, 0.5}},
      {{Basis::x, 1}, {0.5, -kR2 / 2, 0.5}},
      {{Basis::y, 0}, {0.5, I * kR2 / 2.0, -0.5}},
      {{Basis::y, 1}, {0.5, -I * kR2 / 2.0, -0.5}},
  };
  const auto basis = two_photon_basis();
  for (const auto& a : xy.alphabet) {
    const auto sol = two_photon_zero_error_states(a, xy);
    ASSERT_EQ(sol.rays.size(), 1u);
    const auto& e = expected.at({a.basis, a.bit});
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(std::abs(sol.rays[0].amplitude(basis[c].amplitudes().begin()->first) - e[c]), 0.0, 1e-12);
    }
    // Direct check: the ray never produces a forbidden output.
    const auto& bs = xy.setup_for(a.basis);
    double bad = 0.0;
    for (const auto& [f, amp] : evolve_two_photon(bs.setup, sol.rays[0]).amplitudes()) {
      if (is_wrong(bs.model.interpret(bs.model.pattern_of(f)), a.bit)) bad += std::norm(amp);
    }
    EXPECT_LT(bad, 1e-18);
  }
  EXPECT_THROW(two_photon_zero_error_states(alice_state(Basis::x, 0), scheme(SchemeName::unified_xz_bb84)), Error);
}

TEST(TwoPhoton, CaseSplit) {
  const auto t0 = ModeLabel::input(0), t2 = ModeLabel::input(2);
  EXPECT_EQ(two_photon_case_split(StateVector::basis(FockBasisState{{t2, 2}})), PhotonCase::zero_in_window);
  EXPECT_EQ(two_photon_case_split(StateVector::basis(FockBasisState{{t0, 1}, {t2, 1}})), PhotonCase::one_in_window);
  EXPECT_EQ(two_photon_case_split(StateVector::basis(FockBasisState{{t0, 2}})), PhotonCase::two_in_window);
  EXPECT_EQ(two_photon_case_split(StateVector::basis(FockBasisState{{t0, 2}}) + StateVector::basis(FockBasisState{{t2, 2}})),
            PhotonCase::mixed);
  EXPECT_THROW(two_photon_case_split(StateVector::basis(FockBasisState{{t0, 3}})), Error);
}
