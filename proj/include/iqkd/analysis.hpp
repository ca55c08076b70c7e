// Zero-error attack analysis: the linear constraint system on Eve's vectors,
// its nullspace, the robustness verdict, Eve's information, and the
// two-photon checks for the interferometric BB84 setup.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "iqkd/attack.hpp"
#include "iqkd/fock.hpp"
#include "iqkd/interferometer.hpp"
#include "iqkd/linear_optics.hpp"
#include "iqkd/schemes.hpp"

namespace iqkd {

struct ConstraintColumn {
  int i;
  ChannelState k;
};

inline std::string to_string(const ConstraintColumn& c) {
  return "(" + std::to_string(c.i) + "," + to_string(c.k) + ")";
}

struct ConstraintRow {
  Basis alice_basis;
  int alice_bit;
  ModeLabel outcome;  // the single click that must never happen
  Outcome kind;       // how Bob would read it: the wrong bit or invalid
};

/// Rows: (alphabet state, forbidden single-click outcome). Columns: (i, k)
/// i-major over Alice's index and the scheme's channel basis.
struct ConstraintSystem {
  std::vector<ConstraintColumn> columns;
  std::vector<ChannelState> channel_basis;
  std::vector<ConstraintRow> rows;
  Matrix matrix;
};

/// Vacuum plus every channel bin from which some basis' open windows can be reached.
inline std::vector<ChannelState> scheme_channel_basis(const SchemeDefinition& def) {
  std::set<int> bins;
  for (const auto& bs : def.bases) {
    const auto& w = bs.model.windows();
    auto rs = reversed_space(bs.setup, {w.begin(), w.end()});
    bins.insert(rs.relevant_bins.begin(), rs.relevant_bins.end());
  }
  return channel_basis_for({bins.begin(), bins.end()});
}

/// <j| U_B |k> for a single-photon channel state; vacuum never clicks.
inline cplx beta_entry(const BobSetup& setup, const ChannelState& k, const ModeLabel& j) {
  if (k.is_vacuum) return 0.0;
  if (!setup.window.contains(k.bin)) throw Error("channel bin t'" + std::to_string(k.bin) + " is outside the setup window");
  return setup.unitary.entry(j, ModeLabel::input(k.bin));
}

inline bool is_wrong(Outcome o, int bit) {
  return o == Outcome::invalid || (o == Outcome::bit0 && bit == 1) || (o == Outcome::bit1 && bit == 0);
}

inline ConstraintSystem build_constraints(const SchemeDefinition& def) {
  ConstraintSystem cs;
  cs.channel_basis = scheme_channel_basis(def);
  for (int i = 0; i < 2; ++i) {
    for (const auto& k : cs.channel_basis) cs.columns.push_back({i, k});
  }
  std::vector<std::vector<cplx>> coeffs;
  for (const auto& a : def.alphabet) {
    const auto& bs = def.setup_for(a.basis);
    for (const auto& j : bs.model.windows()) {
      const Outcome o = bs.model.interpret(OutcomePattern{{{j, 1}}});
      if (!is_wrong(o, a.bit)) continue;
      cs.rows.push_back({a.basis, a.bit, j, o});
      std::vector<cplx> row;
      for (const auto& c : cs.columns) row.push_back(a.alpha[static_cast<std::size_t>(c.i)] * beta_entry(bs.setup, c.k, j));
      coeffs.push_back(std::move(row));
    }
  }
  cs.matrix = Matrix::Zero(static_cast<Eigen::Index>(coeffs.size()), static_cast<Eigen::Index>(cs.columns.size()));
  for (std::size_t r = 0; r < coeffs.size(); ++r) {
    for (std::size_t c = 0; c < coeffs[r].size(); ++c) {
      cs.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = coeffs[r][c];
    }
  }
  return cs;
}

struct Pivot {
  Eigen::Index row;
  Eigen::Index column;
  cplx value;
};

struct ZeroErrorSpace {
  int rank = 0;
  int nullity = 0;
  std::vector<Vector> basis;  // orthonormal
  std::vector<Pivot> pivots;  // elimination log, in order
};

namespace detail {

/// First nonzero entry made real and positive.
inline Vector fix_phase(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= kZeroTolerance) {
      v *= std::abs(v(i)) / v(i);
      break;
    }
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i).real()) < 1e-15) v(i).real(0.0);
    if (std::abs(v(i).imag()) < 1e-15) v(i).imag(0.0);
  }
  return v;
}

/// Modified Gram-Schmidt (applied twice); drops dependent vectors.
inline std::vector<Vector> orthonormalize(const std::vector<Vector>& in) {
  std::vector<Vector> out;
  for (auto v : in) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) v -= q * q.dot(v);
    }
    const double n = v.norm();
    if (n >= kZeroTolerance) out.push_back(v / n);
  }
  return out;
}

/// Reduced row echelon form without column exchanges; returns the nonzero rows.
inline std::vector<Vector> row_reduce(std::vector<Vector> rows) {
  if (rows.empty()) return rows;
  const Eigen::Index n = rows.front().size();
  std::size_t r = 0;
  for (Eigen::Index c = 0; c < n && r < rows.size(); ++c) {
    std::size_t best = r;
    for (std::size_t q = r; q < rows.size(); ++q) {
      if (std::abs(rows[q](c)) > std::abs(rows[best](c))) best = q;
    }
    if (std::abs(rows[best](c)) < kZeroTolerance) continue;
    std::swap(rows[r], rows[best]);
    rows[r] /= rows[r](c);
    for (std::size_t q = 0; q < rows.size(); ++q) {
      if (q != r) rows[q] -= rows[q](c) * rows[r];
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

}  // namespace detail

/// Nullspace of `m` by Gauss-Jordan elimination with full pivoting. Pivots
/// below 1e-9 times the largest entry count as zero. The returned basis is
/// brought to a canonical form (row-reduced, orthonormalized, phase-fixed)
/// so it does not depend on the pivot order.
inline ZeroErrorSpace solve_nullspace(const Matrix& m) {
  ZeroErrorSpace out;
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  Matrix a = m;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(cols));
  for (Eigen::Index c = 0; c < cols; ++c) perm[static_cast<std::size_t>(c)] = c;
  std::vector<Eigen::Index> row_id(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) row_id[static_cast<std::size_t>(r)] = r;

  const double largest = rows > 0 && cols > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double threshold = kZeroTolerance * largest;
  Eigen::Index rank = 0;
  while (rank < rows && rank < cols && largest > 0.0) {
    Eigen::Index pr = rank, pc = rank;
    double best = -1.0;
    for (Eigen::Index c = rank; c < cols; ++c) {
      for (Eigen::Index r = rank; r < rows; ++r) {
        if (std::abs(a(r, c)) > best) {
          best = std::abs(a(r, c));
          pr = r;
          pc = c;
        }
      }
    }
    if (best < threshold) break;
    a.row(rank).swap(a.row(pr));
    a.col(rank).swap(a.col(pc));
    std::swap(row_id[static_cast<std::size_t>(rank)], row_id[static_cast<std::size_t>(pr)]);
    std::swap(perm[static_cast<std::size_t>(rank)], perm[static_cast<std::size_t>(pc)]);
    out.pivots.push_back({row_id[static_cast<std::size_t>(rank)], perm[static_cast<std::size_t>(rank)], a(rank, rank)});
    a.row(rank) /= a(rank, rank);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r != rank && a(r, rank) != cplx{}) a.row(r) -= a(r, rank) * a.row(rank);
    }
    ++rank;
  }
  out.rank = static_cast<int>(rank);
  out.nullity = static_cast<int>(cols - rank);

  std::vector<Vector> raw;
  for (Eigen::Index f = rank; f < cols; ++f) {
    Vector v = Vector::Zero(cols);
    v(perm[static_cast<std::size_t>(f)]) = 1.0;
    for (Eigen::Index p = 0; p < rank; ++p) v(perm[static_cast<std::size_t>(p)]) = -a(p, f);
    raw.push_back(v);
  }
  for (const auto& v : detail::orthonormalize(detail::row_reduce(raw))) out.basis.push_back(detail::fix_phase(v));
  return out;
}

inline ZeroErrorSpace solve_zero_error(const ConstraintSystem& cs) { return solve_nullspace(cs.matrix); }

/// Largest |C v| over the basis; zero for an empty basis.
inline double max_residual(const Matrix& c, const std::vector<Vector>& basis) {
  double worst = 0.0;
  for (const auto& v : basis) {
    if (c.rows() > 0) worst = std::max(worst, (c * v).norm());
  }
  return worst;
}

/// The bit-independent family: v_{0,t'0} = v_{1,t'1}, all other non-vacuum
/// components zero. Returned as a unit vector over the constraint columns.
inline std::optional<Vector> forwarding_direction(const ConstraintSystem& cs) {
  std::optional<Eigen::Index> a, b;
  for (std::size_t c = 0; c < cs.columns.size(); ++c) {
    const auto& col = cs.columns[c];
    if (!col.k.is_vacuum && col.i == 0 && col.k.bin == 0) a = static_cast<Eigen::Index>(c);
    if (!col.k.is_vacuum && col.i == 1 && col.k.bin == 1) b = static_cast<Eigen::Index>(c);
  }
  if (!a || !b) return std::nullopt;
  Vector f = Vector::Zero(static_cast<Eigen::Index>(cs.columns.size()));
  f(*a) = f(*b) = 1.0 / std::sqrt(2.0);
  return f;
}

/// Nullspace directions whose non-vacuum part leaves the forwarding family.
inline std::vector<Vector> nonforwarding_directions(const ConstraintSystem& cs, const ZeroErrorSpace& z) {
  const auto f = forwarding_direction(cs);
  std::vector<Vector> out;
  for (const auto& v : z.basis) {
    Vector nv = v;
    for (std::size_t c = 0; c < cs.columns.size(); ++c) {
      if (cs.columns[c].k.is_vacuum) nv(static_cast<Eigen::Index>(c)) = 0.0;
    }
    if (f) nv -= *f * f->dot(nv);
    if (nv.norm() >= kZeroTolerance) out.push_back(v);
  }
  return out;
}

/// Outcome patterns with Eve's conditional (unnormalized) density matrices.
struct JointOutcome {
  OutcomePattern pattern;
  Matrix eve_state;  // rho_p; trace = probability of the pattern
  double probability() const { return eve_state.trace().real(); }
};

/// Alice sends sum_i alpha_i |i>, Eve applies the attack, Bob measures with `bs`.
/// Patterns come out in canonical order.
inline std::vector<JointOutcome> joint_outcomes(const AttackIsometry& attack, const std::array<cplx, 2>& alpha,
                                                const BasisSetup& bs, int cap = 1) {
  const auto E = static_cast<Eigen::Index>(attack.eve_dim());
  // Output Fock state -> Eve vector.
  std::map<FockBasisState, Vector> w;
  for (std::size_t k = 0; k < attack.channel_basis().size(); ++k) {
    Vector ev = Vector::Zero(E);
    for (int i = 0; i < 2; ++i) ev += alpha[static_cast<std::size_t>(i)] * attack.eve_vector(i, k);
    if (ev.norm() < kZeroTolerance) continue;
    const auto out = evolve_in_setup(bs.setup, attack.channel_basis()[k].vector(), cap);
    for (const auto& [f, amp] : out.amplitudes()) {
      auto it = w.try_emplace(f, Vector::Zero(E)).first;
      it->second += amp * ev;
    }
  }
  std::map<OutcomePattern, Matrix> acc;
  for (const auto& [f, vec] : w) {
    auto it = acc.try_emplace(bs.model.pattern_of(f), Matrix::Zero(E, E)).first;
    it->second += vec * vec.adjoint();
  }
  std::vector<JointOutcome> out;
  for (auto& [p, rho] : acc) out.push_back({p, std::move(rho)});
  return out;
}

/// Helstrom projector onto the positive part of (sigma0 - sigma1). Eigenvalues
/// within 1e-12 of zero are ties; the second member returns their projector.
inline std::pair<Matrix, Matrix> helstrom_projectors(const Matrix& sigma0, const Matrix& sigma1) {
  const Eigen::Index n = sigma0.rows();
  Matrix diff = sigma0 - sigma1;
  diff = (diff + diff.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
  Matrix plus = Matrix::Zero(n, n), tie = Matrix::Zero(n, n);
  for (Eigen::Index e = 0; e < n; ++e) {
    const double lam = es.eigenvalues()(e);
    const Vector q = es.eigenvectors().col(e);
    if (lam > 1e-12) plus += q * q.adjoint();
    else if (lam >= -1e-12) tie += q * q.adjoint();
  }
  return {plus, tie};
}

struct EveInformation {
  Basis basis;
  double detection_probability = 0.0;          // conclusive, averaged over Alice's bit
  std::optional<double> guess_probability;     // absent when Bob never detects
  double bits = 0.0;                           // 1 - h(p_guess)
};

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Eve's best guess of Alice's bit on rounds where Alice and Bob both used
/// `basis` and Bob got a conclusive result. With sigma_b the prior-weighted
/// (1/2) unnormalized Eve state over conclusive outcomes,
/// p_guess = (p_det + |sigma_0 - sigma_1|_tr) / (2 p_det).
inline EveInformation eve_information(const AttackIsometry& attack, const SchemeDefinition& def, Basis basis) {
  const auto& bs = def.setup_for(basis);
  const auto E = static_cast<Eigen::Index>(attack.eve_dim());
  std::array<Matrix, 2> sigma{Matrix::Zero(E, E), Matrix::Zero(E, E)};
  for (int bit = 0; bit < 2; ++bit) {
    for (const auto& jo : joint_outcomes(attack, alice_state(basis, bit).alpha, bs)) {
      if (is_conclusive(bs.model.interpret(jo.pattern))) sigma[static_cast<std::size_t>(bit)] += 0.5 * jo.eve_state;
    }
  }
  EveInformation info;
  info.basis = basis;
  info.detection_probability = (sigma[0] + sigma[1]).trace().real();
  if (info.detection_probability < 1e-12) return info;
  Matrix diff = sigma[0] - sigma[1];
  diff = (diff + diff.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
  const double trace_norm = es.eigenvalues().cwiseAbs().sum();
  double pg = 0.5 * (1.0 + trace_norm / info.detection_probability);
  if (pg > 1.0 - 1e-12) pg = 1.0;
  if (pg < 0.5 + 1e-12) pg = 0.5;
  info.guess_probability = pg;
  info.bits = 1.0 - binary_entropy(pg);
  return info;
}

/// P(outcome class | Bob basis), Alice's state uniform over the alphabet.
inline std::map<Outcome, double> outcome_rates(const AttackIsometry& attack, const SchemeDefinition& def, Basis bob) {
  const auto& bs = def.setup_for(bob);
  std::map<Outcome, double> out{{Outcome::bit0, 0.0}, {Outcome::bit1, 0.0}, {Outcome::loss, 0.0}, {Outcome::invalid, 0.0}};
  const double w = 1.0 / static_cast<double>(def.alphabet.size());
  for (const auto& a : def.alphabet) {
    for (const auto& jo : joint_outcomes(attack, a.alpha, bs)) out[bs.model.interpret(jo.pattern)] += w * jo.probability();
  }
  return out;
}

/// Probability of a wrong or invalid outcome on matched-basis rounds, per basis.
inline double error_probability(const AttackIsometry& attack, const SchemeDefinition& def, Basis basis) {
  const auto& bs = def.setup_for(basis);
  double p = 0.0;
  for (int bit = 0; bit < 2; ++bit) {
    for (const auto& jo : joint_outcomes(attack, alice_state(basis, bit).alpha, bs)) {
      if (is_wrong(bs.model.interpret(jo.pattern), bit)) p += 0.5 * jo.probability();
    }
  }
  return p;
}

/// Loss-rate spread across Bob's bases above this is flagged.
inline constexpr double kLossAsymmetryFlag = 0.05;

struct AttackProfile {
  std::vector<EveInformation> information;
  std::map<Basis, std::map<Outcome, double>> rates;
  std::map<Basis, double> error_probability;
  double loss_asymmetry = 0.0;
  bool loss_asymmetry_flagged = false;
};

inline AttackProfile profile_attack(const AttackIsometry& attack, const SchemeDefinition& def) {
  AttackProfile out;
  double lo = 1.0, hi = 0.0;
  for (auto b : def.basis_list()) {
    out.information.push_back(eve_information(attack, def, b));
    out.rates[b] = outcome_rates(attack, def, b);
    out.error_probability[b] = error_probability(attack, def, b);
    lo = std::min(lo, out.rates[b][Outcome::loss]);
    hi = std::max(hi, out.rates[b][Outcome::loss]);
  }
  out.loss_asymmetry = hi - lo;
  out.loss_asymmetry_flagged = out.loss_asymmetry > kLossAsymmetryFlag;
  return out;
}

enum class Verdict { robust, nonrobust, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::robust: return "robust";
    case Verdict::nonrobust: return "nonrobust";
    case Verdict::inconclusive: return "inconclusive";
  }
  return {};
}

struct RobustnessReport {
  ConstraintSystem constraints;
  ZeroErrorSpace space;
  double residual = 0.0;
  Verdict verdict = Verdict::inconclusive;
  bool structural_robust = false;           // nullspace inside the forwarding family + vacuum
  std::vector<Vector> nonforwarding;        // structural counterexamples
  std::optional<AttackIsometry> witness;    // dynamic search result
  std::optional<AttackProfile> witness_profile;
  std::string reduction;                    // allowed attack family for robust schemes
};

namespace detail {

/// Nullspace vectors supported only on Alice-index `i` rows.
inline std::vector<Vector> index_restricted(const ConstraintSystem& cs, const ZeroErrorSpace& z, int i) {
  if (z.basis.empty()) return {};
  const auto n = static_cast<Eigen::Index>(cs.columns.size());
  const auto r = static_cast<Eigen::Index>(z.basis.size());
  Matrix q(n, r);
  for (Eigen::Index c = 0; c < r; ++c) q.col(c) = z.basis[static_cast<std::size_t>(c)];
  std::vector<Eigen::Index> other;
  for (Eigen::Index c = 0; c < n; ++c) {
    if (cs.columns[static_cast<std::size_t>(c)].i != i) other.push_back(c);
  }
  Matrix m(static_cast<Eigen::Index>(other.size()), r);
  for (std::size_t p = 0; p < other.size(); ++p) m.row(static_cast<Eigen::Index>(p)) = q.row(other[p]);
  std::vector<Vector> out;
  for (const auto& c : solve_nullspace(m).basis) out.push_back(q * c);
  return orthonormalize(out);
}

}  // namespace detail

/// Searches the zero-error set for an attack whose Eve records for |0> and |1>
/// are orthogonal while still letting photons through to Bob. For each i the
/// candidates are the nullspace vectors supported on i alone; the one with
/// the largest conclusive-click probability summed over Bob's bases (top
/// eigenvector of that Hermitian form) is kept. A witness is returned only if
/// it is zero-error and gives Eve a perfect guess on some basis.
inline std::optional<AttackIsometry> search_witness(const SchemeDefinition& def, const ConstraintSystem& cs,
                                                    const ZeroErrorSpace& z) {
  const auto K = static_cast<Eigen::Index>(cs.channel_basis.size());
  Matrix form = Matrix::Zero(K, K);
  for (const auto& bs : def.bases) {
    for (const auto& j : bs.model.windows()) {
      if (!is_conclusive(bs.model.interpret(OutcomePattern{{{j, 1}}}))) continue;
      Vector beta(K);
      for (Eigen::Index k = 0; k < K; ++k) beta(k) = beta_entry(bs.setup, cs.channel_basis[static_cast<std::size_t>(k)], j);
      form += beta.conjugate() * beta.transpose();
    }
  }
  Matrix v = Matrix::Zero(2 * K, 2);
  for (int i = 0; i < 2; ++i) {
    const auto cand = detail::index_restricted(cs, z, i);
    if (cand.empty()) return std::nullopt;
    Matrix basis(K, static_cast<Eigen::Index>(cand.size()));
    for (std::size_t c = 0; c < cand.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = cand[c].segment(i * K, K);
    Matrix g = basis.adjoint() * form * basis;
    g = (g + g.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Eigen::Index top = g.rows() - 1;
    if (es.eigenvalues()(top) < kZeroTolerance) return std::nullopt;
    Vector a = detail::fix_phase(basis * es.eigenvectors().col(top));
    v.block(i * K, i, K, 1) = a / a.norm();
  }
  AttackIsometry w("witness", cs.channel_basis, v);
  for (Eigen::Index e = 0; e < v.cols(); ++e) {
    if (cs.matrix.rows() > 0 && (cs.matrix * v.col(e)).norm() >= kZeroTolerance) return std::nullopt;
  }
  for (auto b : def.basis_list()) {
    const auto info = eve_information(w, def, b);
    if (info.guess_probability && *info.guess_probability == 1.0) return w;
  }
  return std::nullopt;
}

inline RobustnessReport robustness_verdict(const SchemeDefinition& def) {
  RobustnessReport r;
  r.constraints = build_constraints(def);
  r.space = solve_zero_error(r.constraints);
  r.residual = max_residual(r.constraints.matrix, r.space.basis);
  r.nonforwarding = nonforwarding_directions(r.constraints, r.space);
  r.structural_robust = r.nonforwarding.empty();
  r.witness = search_witness(def, r.constraints, r.space);
  if (r.witness) r.witness_profile = profile_attack(*r.witness, def);
  if (r.structural_robust && !r.witness) {
    r.verdict = Verdict::robust;
    r.reduction =
        "every zero-error attack has v(0,t'0) = v(1,t'1) and all other non-vacuum components zero: Eve forwards "
        "the qubit or blocks it, and her record is independent of the bit on detected rounds";
  } else if (!r.structural_robust && r.witness) {
    r.verdict = Verdict::nonrobust;
  } else {
    r.verdict = Verdict::inconclusive;
  }
  return r;
}

/// Two-photon inputs alpha|20> + beta|11> + gamma|02> on (t'0, t'1).
inline std::array<StateVector, 3> two_photon_basis() {
  const auto t0 = ModeLabel::input(0);
  const auto t1 = ModeLabel::input(1);
  return {StateVector::basis(FockBasisState{{t0, 2}}), StateVector::basis(FockBasisState{{t0, 1}, {t1, 1}}),
          StateVector::basis(FockBasisState{{t1, 2}})};
}

struct TwoPhotonSolution {
  std::vector<StateVector> rays;   // orthonormal solutions, first amplitude real positive
  std::vector<FockBasisState> forbidden;  // output states giving a wrong bit or a double click
  Matrix constraints;              // rows: forbidden outputs, columns: |20>, |11>, |02>
};

/// Two-photon states that never make Bob's `expected.basis` setup report the
/// wrong bit or an invalid (multi-click) result when Alice sent `expected`.
inline TwoPhotonSolution two_photon_zero_error_states(const AliceState& expected, const SchemeDefinition& def) {
  if (def.name != SchemeName::xy_bb84) throw Error("two-photon analysis is defined for xy-BB84 only");
  const auto& bs = def.setup_for(expected.basis);
  const auto inputs = two_photon_basis();
  std::array<StateVector, 3> outs;
  std::set<FockBasisState> forbidden;
  for (std::size_t c = 0; c < 3; ++c) {
    outs[c] = evolve_two_photon(bs.setup, inputs[c]);
    for (const auto& [f, _] : outs[c].amplitudes()) {
      if (is_wrong(bs.model.interpret(bs.model.pattern_of(f)), expected.bit)) forbidden.insert(f);
    }
  }
  TwoPhotonSolution sol;
  sol.forbidden.assign(forbidden.begin(), forbidden.end());
  sol.constraints = Matrix::Zero(static_cast<Eigen::Index>(forbidden.size()), 3);
  for (std::size_t r = 0; r < sol.forbidden.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      sol.constraints(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = outs[c].amplitude(sol.forbidden[r]);
    }
  }
  for (const auto& v : solve_nullspace(sol.constraints).basis) {
    StateVector s;
    for (std::size_t c = 0; c < 3; ++c) s = s + v(static_cast<Eigen::Index>(c)) * inputs[c];
    sol.rays.push_back(s.with_universe({ModeLabel::input(0), ModeLabel::input(1)}));
  }
  return sol;
}

enum class PhotonCase { zero_in_window, one_in_window, two_in_window, mixed };

inline std::string to_string(PhotonCase c) {
  switch (c) {
    case PhotonCase::zero_in_window: return "zero-in-window";
    case PhotonCase::one_in_window: return "one-in-window";
    case PhotonCase::two_in_window: return "two-in-window";
    case PhotonCase::mixed: return "mixed";
  }
  return {};
}

/// Classifies a state of at most two photons by how many occupy t'0, t'1.
inline PhotonCase two_photon_case_split(const StateVector& state) {
  std::set<int> in_window;
  for (const auto& [b, _] : state.amplitudes()) {
    if (b.total_photons() > 2) throw Error("case split needs at most 2 photons, got " + std::to_string(b.total_photons()));
    in_window.insert(b.occupation(ModeLabel::input(0)) + b.occupation(ModeLabel::input(1)));
  }
  if (in_window.size() > 1) return PhotonCase::mixed;
  const int n = in_window.empty() ? 0 : *in_window.begin();
  return n == 0 ? PhotonCase::zero_in_window : n == 1 ? PhotonCase::one_in_window : PhotonCase::two_in_window;
}

}  // namespace iqkd
