// Reference values for the release check run by `iqkd verify`. Each fixture
// compares a constructed quantity with literal expected amplitudes or
// matrices and reports the largest deviation.

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "iqkd/analysis.hpp"
#include "iqkd/attack.hpp"
#include "iqkd/fock.hpp"
#include "iqkd/interferometer.hpp"
#include "iqkd/linear_optics.hpp"
#include "iqkd/schemes.hpp"

namespace iqkd {

struct FixtureContext {
  double reflection_phase = kReflectionPhase;
};

struct FixtureResult {
  std::string anchor;
  bool passed = false;
  double deviation = 0.0;
  std::string detail;
};

struct Fixture {
  std::string anchor;
  std::function<FixtureResult(const FixtureContext&)> run;
};

namespace fixture {

inline constexpr double kTolerance = 1e-9;

/// "n_s0 n_s1 n_s2 n_d0 n_d1 n_d2" occupation string over bins 0..2.
inline FockBasisState six(const std::string& occ) {
  if (occ.size() != 6) throw Error("six-mode occupation needs 6 digits");
  FockBasisState b;
  for (int m = 0; m < 6; ++m) {
    const ModeLabel label = m < 3 ? ModeLabel::straight(m) : ModeLabel::down(m - 3);
    b.set(label, occ[static_cast<std::size_t>(m)] - '0');
  }
  return b;
}

inline StateVector terms(const std::vector<std::pair<std::string, cplx>>& t, cplx scale = 1.0) {
  StateVector::Amplitudes amps;
  for (const auto& [occ, a] : t) amps[six(occ)] += scale * a;
  return StateVector(amps);
}

inline double deviation(const StateVector& a, const StateVector& b) {
  double worst = 0.0;
  for (const auto& [basis, amp] : a.amplitudes()) worst = std::max(worst, std::abs(amp - b.amplitude(basis)));
  for (const auto& [basis, amp] : b.amplitudes()) worst = std::max(worst, std::abs(amp - a.amplitude(basis)));
  return worst;
}

inline double deviation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return (a - b).cwiseAbs().maxCoeff();
}

inline FixtureResult judge(std::string anchor, double dev, std::string detail = {}) {
  return {std::move(anchor), dev < kTolerance, dev, std::move(detail)};
}

/// Projector onto span(vectors) for subspace comparison.
inline Matrix projector(const std::vector<Vector>& vectors, Eigen::Index n) {
  Matrix p = Matrix::Zero(n, n);
  for (const auto& q : detail::orthonormalize(vectors)) p += q * q.adjoint();
  return p;
}

inline Vector unit(Eigen::Index n, std::vector<std::pair<Eigen::Index, cplx>> entries) {
  Vector v = Vector::Zero(n);
  for (const auto& [i, x] : entries) v(i) = x;
  return v / v.norm();
}

inline SchemeDefinition scheme_at(SchemeName n, const FixtureContext& ctx) {
  SchemeOptions o;
  o.reflection_phase = ctx.reflection_phase;
  return scheme(n, o);
}

}  // namespace fixture

inline std::vector<Fixture> reference_fixtures() {
  using namespace fixture;
  const double pi = std::numbers::pi;
  const cplx I{0.0, 1.0};
  const double r2 = std::sqrt(2.0);
  std::vector<Fixture> out;

  out.push_back({"beam splitter single-photon rule", [=](const FixtureContext& ctx) {
                   const auto bs = beam_splitter(ModeLabel::abstract("bs", 1), ModeLabel::abstract("bs", 2),
                                                 ModeLabel::abstract("bs", 3), ModeLabel::abstract("bs", 4),
                                                 ctx.reflection_phase);
                   Matrix expected(2, 2);
                   expected << 1, I, I, 1;
                   return judge("beam splitter single-photon rule", deviation(bs.matrix(), expected / r2));
                 }});

  out.push_back({"beam splitter two-photon rules", [=](const FixtureContext& ctx) {
                   const auto a1 = ModeLabel::abstract("bs", 1), a2 = ModeLabel::abstract("bs", 2);
                   const auto b3 = ModeLabel::abstract("bs", 3), b4 = ModeLabel::abstract("bs", 4);
                   const auto bs = beam_splitter(a1, a2, b3, b4, ctx.reflection_phase);
                   auto out_state = [&](int n3, int n4) {
                     FockBasisState f;
                     f.set(b3, n3);
                     f.set(b4, n4);
                     return f;
                   };
                   auto expect = [&](std::vector<std::pair<std::pair<int, int>, cplx>> t) {
                     StateVector::Amplitudes amps;
                     for (const auto& [occ, a] : t) amps[out_state(occ.first, occ.second)] = a;
                     return StateVector(amps);
                   };
                   double dev = 0.0;
                   dev = std::max(dev, deviation(evolve(StateVector::basis(FockBasisState{{a1, 2}}), bs),
                                                 expect({{{2, 0}, 0.5}, {{1, 1}, I * r2 / 2.0}, {{0, 2}, -0.5}})));
                   dev = std::max(dev, deviation(evolve(StateVector::basis(FockBasisState{{a2, 2}}), bs),
                                                 expect({{{2, 0}, -0.5}, {{1, 1}, I * r2 / 2.0}, {{0, 2}, 0.5}})));
                   dev = std::max(dev, deviation(evolve(StateVector::basis(FockBasisState{{a1, 1}, {a2, 1}}), bs),
                                                 expect({{{2, 0}, I / r2}, {{0, 2}, I / r2}})));
                   return judge("beam splitter two-photon rules", dev);
                 }});

  for (double phi : {0.0, pi / 2}) {
    const std::string anchor = std::string("single-pulse interferometer map, phi=") + (phi == 0.0 ? "0" : "pi/2");
    out.push_back({anchor, [=](const FixtureContext& ctx) {
                     const auto setup = build_mach_zehnder(phi, {-1, 2}, ctx.reflection_phase);
                     const cplx e = std::polar(1.0, phi);
                     double dev = 0.0;
                     for (int i : {-1, 0, 1, 2}) {
                       StateVector::Amplitudes amps;
                       amps[FockBasisState::single(ModeLabel::straight(i))] = 0.5;
                       amps[FockBasisState::single(ModeLabel::straight(i + 1))] = -e / 2.0;
                       amps[FockBasisState::single(ModeLabel::down(i))] = I / 2.0;
                       amps[FockBasisState::single(ModeLabel::down(i + 1))] = I * e / 2.0;
                       dev = std::max(dev, deviation(single_photon_image(setup, i), StateVector(amps)));
                     }
                     return judge(anchor, dev, "t'i -> (s_i - e^{i phi} s_{i+1} + i d_i + i e^{i phi} d_{i+1}) / 2");
                   }});
  }

  out.push_back({"alphabet images through the interferometer", [=](const FixtureContext& ctx) {
                   const auto x = build_mach_zehnder(0.0, {-1, 2}, ctx.reflection_phase);
                   const auto y = build_mach_zehnder(pi / 2, {-1, 2}, ctx.reflection_phase);
                   const double s = 1.0 / std::sqrt(8.0);
                   double dev = 0.0;
                   dev = std::max(dev, deviation(evolve_in_setup(x, alice_state(Basis::x, 0).vector, 1),
                                                 terms({{"100000", 1}, {"001000", -1}, {"000100", I}, {"000010", 2.0 * I}, {"000001", I}}, s)));
                   dev = std::max(dev, deviation(evolve_in_setup(x, alice_state(Basis::x, 1).vector, 1),
                                                 terms({{"100000", 1}, {"010000", -2}, {"001000", 1}, {"000100", I}, {"000001", -I}}, s)));
                   dev = std::max(dev, deviation(evolve_in_setup(y, alice_state(Basis::y, 0).vector, 1),
                                                 terms({{"100000", 1}, {"001000", 1}, {"000100", I}, {"000010", -2}, {"000001", -I}}, s)));
                   dev = std::max(dev, deviation(evolve_in_setup(y, alice_state(Basis::y, 1).vector, 1),
                                                 terms({{"100000", 1}, {"010000", -2.0 * I}, {"001000", -1}, {"000100", I}, {"000001", I}}, s)));
                   return judge("alphabet images through the interferometer", dev);
                 }});

  const std::vector<ModeLabel> six_modes{ModeLabel::straight(0), ModeLabel::straight(1), ModeLabel::straight(2),
                                         ModeLabel::down(0),     ModeLabel::down(1),     ModeLabel::down(2)};
  out.push_back({"x-basis transfer matrix", [=](const FixtureContext& ctx) {
                   Matrix e(4, 6);
                   e << -1, 0, 0, I, 0, 0,  //
                       1, -1, 0, I, I, 0,   //
                       0, 1, -1, 0, I, I,   //
                       0, 0, 1, 0, 0, I;
                   const auto b = beta_matrix(build_mach_zehnder(0.0, {-1, 2}, ctx.reflection_phase), {-1, 0, 1, 2}, six_modes);
                   return judge("x-basis transfer matrix", deviation(b, e / 2.0));
                 }});
  out.push_back({"y-basis transfer matrix", [=](const FixtureContext& ctx) {
                   Matrix e(4, 6);
                   e << -I, 0, 0, -1, 0, 0,  //
                       1, -I, 0, I, -1, 0,   //
                       0, 1, -I, 0, I, -1,   //
                       0, 0, 1, 0, 0, I;
                   const auto b = beta_matrix(build_mach_zehnder(pi / 2, {-1, 2}, ctx.reflection_phase), {-1, 0, 1, 2}, six_modes);
                   return judge("y-basis transfer matrix", deviation(b, e / 2.0));
                 }});
  out.push_back({"z-basis transfer matrix without interferometer", [=](const FixtureContext&) {
                   Matrix e(2, 2);
                   e << 0, 1, 1, 0;
                   const auto b = beta_matrix(build_native_z({-1, 2}), {0, 1}, {ModeLabel::straight(1), ModeLabel::down(1)});
                   return judge("z-basis transfer matrix without interferometer", deviation(b, e));
                 }});

  out.push_back({"xy-BB84 x-basis zero-error constraints", [=](const FixtureContext& ctx) {
                   // Columns (i,k): (0,V) (0,t'0) (0,t'1) (1,V) (1,t'0) (1,t'1).
                   const auto cs = build_constraints(scheme_at(SchemeName::xy_bb84, ctx));
                   const double c = 1.0 / (2.0 * r2);
                   Matrix e(2, 6);
                   e << 0, -c, c, 0, -c, c,  // 0_x, s1 forbidden
                       0, I * c, I * c, 0, -I * c, -I * c;  // 1_x, d1 forbidden
                   return judge("xy-BB84 x-basis zero-error constraints", deviation(cs.matrix.topRows(2), e));
                 }});

  out.push_back({"xy-BB84 zero-error solution", [=](const FixtureContext& ctx) {
                   const auto cs = build_constraints(scheme_at(SchemeName::xy_bb84, ctx));
                   const auto z = solve_zero_error(cs);
                   const std::vector<Vector> expected{unit(6, {{0, 1.0}}), unit(6, {{3, 1.0}}), unit(6, {{1, 1.0}, {5, 1.0}})};
                   const double dev = deviation(projector(z.basis, 6), projector(expected, 6));
                   return judge("xy-BB84 zero-error solution", dev,
                                "nullity " + std::to_string(z.nullity) + "; v(0,t'0) = v(1,t'1), v(0,t'1) = v(1,t'0) = 0");
                 }});

  out.push_back({"forwarding and blocking attacks", [=](const FixtureContext& ctx) {
                   const auto def = scheme_at(SchemeName::xy_bb84, ctx);
                   double dev = 0.0;
                   for (double p : {0.0, 0.5, 1.0}) {
                     const auto a = blocking_attack(p);
                     for (auto b : def.basis_list()) {
                       dev = std::max(dev, error_probability(a, def, b));
                       dev = std::max(dev, eve_information(a, def, b).bits);
                     }
                   }
                   return judge("forwarding and blocking attacks", dev, "no errors and no Eve information on detected rounds");
                 }});

  out.push_back({"unified-xz zero-error solution", [=](const FixtureContext& ctx) {
                   // Columns: (0,V) (0,t'-1) (0,t'0) (0,t'1) (0,t'2) (1,V) (1,t'-1) (1,t'0) (1,t'1) (1,t'2).
                   const auto cs = build_constraints(scheme_at(SchemeName::unified_xz_bb84, ctx));
                   const auto z = solve_zero_error(cs);
                   const std::vector<Vector> expected{unit(10, {{0, 1.0}}), unit(10, {{5, 1.0}}), unit(10, {{1, 1.0}}),
                                                      unit(10, {{9, 1.0}}), unit(10, {{2, 1.0}, {8, 1.0}})};
                   const double dev = deviation(projector(z.basis, 10), projector(expected, 10));
                   return judge("unified-xz zero-error solution", dev, "nullity " + std::to_string(z.nullity));
                 }});

  out.push_back({"fake time-bin attack on unified-xz", [=](const FixtureContext& ctx) {
                   const auto def = scheme_at(SchemeName::unified_xz_bb84, ctx);
                   const auto a = fake_time_bin_attack();
                   double dev = 0.0;
                   for (auto b : def.basis_list()) dev = std::max(dev, error_probability(a, def, b));
                   dev = std::max(dev, 1.0 - eve_information(a, def, Basis::z).bits);
                   dev = std::max(dev, 1.0 - outcome_rates(a, def, Basis::x).at(Outcome::loss));
                   return judge("fake time-bin attack on unified-xz", dev, "zero errors, x-basis always lost, 1 bit on z");
                 }});

  for (double phi : {0.0, pi / 2}) {
    const std::string tag = phi == 0.0 ? "0" : "pi/2";
    const std::string a20 = "two-photon pulse in t'0, phi=" + tag;
    out.push_back({a20, [=](const FixtureContext& ctx) {
                     const cplx e = std::polar(1.0, phi);
                     const auto setup = build_mach_zehnder(phi, {-1, 2}, ctx.reflection_phase);
                     const auto got = evolve_two_photon(setup, StateVector::basis(FockBasisState::single(ModeLabel::input(0), 2)));
                     const auto expected = terms({{"200000", 1},
                                                  {"100100", r2 * I},
                                                  {"000200", -1},
                                                  {"110000", -r2 * e},
                                                  {"100010", r2 * I * e},
                                                  {"010100", -r2 * I * e},
                                                  {"000110", -r2 * e},
                                                  {"020000", e * e},
                                                  {"010010", -r2 * I * e * e},
                                                  {"000020", -e * e}},
                                                 0.25);
                     return judge(a20, deviation(got, expected));
                   }});
    const std::string a11 = "one photon in each of t'0 and t'1, phi=" + tag;
    out.push_back({a11, [=](const FixtureContext& ctx) {
                     const cplx e = std::polar(1.0, phi);
                     const auto setup = build_mach_zehnder(phi, {-1, 2}, ctx.reflection_phase);
                     const auto got = evolve_two_photon(
                         setup, StateVector::basis(FockBasisState{{ModeLabel::input(0), 1}, {ModeLabel::input(1), 1}}));
                     const auto expected = terms({{"110000", 1},
                                                  {"100010", I},
                                                  {"010100", I},
                                                  {"000110", -1},
                                                  {"020000", -r2 * e},
                                                  {"000020", -r2 * e},
                                                  {"101000", -e},
                                                  {"100001", I * e},
                                                  {"001100", -I * e},
                                                  {"000101", -e},
                                                  {"011000", e * e},
                                                  {"010001", -I * e * e},
                                                  {"001010", -I * e * e},
                                                  {"000011", -e * e}},
                                                 0.25);
                     return judge(a11, deviation(got, expected));
                   }});
  }

  out.push_back({"two-photon state allowed for 0_x", [=](const FixtureContext& ctx) {
                   const auto def = scheme_at(SchemeName::xy_bb84, ctx);
                   const auto sol = two_photon_zero_error_states(alice_state(Basis::x, 0), def);
                   if (sol.rays.size() != 1) {
                     return judge("two-photon state allowed for 0_x", INFINITY, std::to_string(sol.rays.size()) + " solution rays");
                   }
                   const auto b = two_photon_basis();
                   const auto expected = cplx{0.5} * b[0] + cplx{r2 / 2} * b[1] + cplx{0.5} * b[2];
                   return judge("two-photon state allowed for 0_x", deviation(sol.rays[0], expected.with_universe(sol.rays[0].universe())),
                                "(|20> + sqrt2 |11> + |02>) / 2");
                 }});

  return out;
}

inline std::vector<FixtureResult> run_fixtures(const FixtureContext& ctx = {}) {
  std::vector<FixtureResult> out;
  for (const auto& f : reference_fixtures()) {
    try {
      out.push_back(f.run(ctx));
    } catch (const std::exception& e) {
      out.push_back({f.anchor, false, INFINITY, e.what()});
    }
  }
  return out;
}

}  // namespace iqkd
