// Linear-optical elements as mode unitaries and their lift to Fock space.
//
// Beam-splitter convention: transmission keeps the phase, reflection picks up
// e^{i pi/2}. Every fixture in this project assumes exactly that convention.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "iqkd/fock.hpp"

namespace iqkd {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kDefaultPhotonCap = 2;
inline constexpr int kMaxPhotonCap = 4;

/// Reflection phase of the standard symmetric beam splitter.
inline constexpr double kReflectionPhase = std::numbers::pi / 2;

/// Complex matrix from input modes (columns) to output modes (rows), both in
/// canonical label order. Unitarity is checked on construction.
class ModeUnitary {
 public:
  ModeUnitary(std::vector<ModeLabel> inputs, std::vector<ModeLabel> outputs, const Matrix& m) {
    if (inputs.size() != outputs.size() || m.rows() != static_cast<Eigen::Index>(outputs.size()) ||
        m.cols() != static_cast<Eigen::Index>(inputs.size())) {
      throw Error("mode unitary dimension mismatch");
    }
    auto in_order = canonical_order(inputs);
    auto out_order = canonical_order(outputs);
    matrix_.resize(m.rows(), m.cols());
    for (std::size_t r = 0; r < out_order.size(); ++r) {
      outputs_.push_back(outputs[out_order[r]]);
      for (std::size_t c = 0; c < in_order.size(); ++c) {
        matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            m(static_cast<Eigen::Index>(out_order[r]), static_cast<Eigen::Index>(in_order[c]));
      }
    }
    for (auto i : in_order) inputs_.push_back(inputs[i]);
    check_distinct(inputs_, "input");
    check_distinct(outputs_, "output");
    const double dev = unitarity_deviation();
    if (dev >= kZeroTolerance) {
      throw Error("matrix is not unitary (max |U^dag U - I| = " + std::to_string(dev) + ")");
    }
  }

  const std::vector<ModeLabel>& inputs() const { return inputs_; }
  const std::vector<ModeLabel>& outputs() const { return outputs_; }
  const Matrix& matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }

  std::set<ModeLabel> input_set() const { return {inputs_.begin(), inputs_.end()}; }
  std::set<ModeLabel> output_set() const { return {outputs_.begin(), outputs_.end()}; }

  std::optional<Eigen::Index> input_index(const ModeLabel& m) const { return find(inputs_, m); }
  std::optional<Eigen::Index> output_index(const ModeLabel& m) const { return find(outputs_, m); }

  /// Amplitude <out|U|in> for single-photon modes; zero if either is unknown.
  cplx entry(const ModeLabel& out, const ModeLabel& in) const {
    auto r = output_index(out);
    auto c = input_index(in);
    return r && c ? matrix_(*r, *c) : cplx{};
  }

  double unitarity_deviation() const {
    const Matrix g = matrix_.adjoint() * matrix_ - Matrix::Identity(matrix_.rows(), matrix_.cols());
    return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
  }

 private:
  static std::vector<std::size_t> canonical_order(const std::vector<ModeLabel>& labels) {
    std::vector<std::size_t> idx(labels.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return labels[a] < labels[b]; });
    return idx;
  }
  static void check_distinct(const std::vector<ModeLabel>& sorted, const char* what) {
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) {
        throw Error(std::string("duplicate ") + what + " mode " + to_string(sorted[i]));
      }
    }
  }
  static std::optional<Eigen::Index> find(const std::vector<ModeLabel>& v, const ModeLabel& m) {
    auto it = std::lower_bound(v.begin(), v.end(), m);
    if (it == v.end() || !(*it == m)) return std::nullopt;
    return static_cast<Eigen::Index>(it - v.begin());
  }

  std::vector<ModeLabel> inputs_;
  std::vector<ModeLabel> outputs_;
  Matrix matrix_;
};

/// Symmetric 50/50 splitter: out1 = (in1 + r in2)/sqrt2, out2 = (r in1 + in2)/sqrt2
/// with r = e^{i reflection_phase}. Only +-pi/2 give a unitary.
inline ModeUnitary beam_splitter(const ModeLabel& in1, const ModeLabel& in2, const ModeLabel& out1,
                                 const ModeLabel& out2, double reflection_phase = kReflectionPhase) {
  const cplx r = std::polar(1.0, reflection_phase);
  const double h = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m << h, r * h, r * h, h;
  return ModeUnitary({in1, in2}, {out1, out2}, m);
}

/// Splitter acting in place on two modes (outputs carry the input labels).
inline ModeUnitary beam_splitter(const ModeLabel& a, const ModeLabel& b) { return beam_splitter(a, b, a, b); }

/// Input arms bs.1, bs.2 to output arms bs.3, bs.4.
inline ModeUnitary beam_splitter() {
  return beam_splitter(ModeLabel::abstract("bs", 1), ModeLabel::abstract("bs", 2), ModeLabel::abstract("bs", 3),
                       ModeLabel::abstract("bs", 4));
}

inline ModeUnitary phase_shifter(double phi, const ModeLabel& mode = ModeLabel::abstract("ps")) {
  Matrix m(1, 1);
  m(0, 0) = std::polar(1.0, phi);
  return ModeUnitary({mode}, {mode}, m);
}

inline ModeUnitary identity_unitary(const std::vector<ModeLabel>& modes) {
  return ModeUnitary(modes, modes, Matrix::Identity(static_cast<Eigen::Index>(modes.size()),
                                                    static_cast<Eigen::Index>(modes.size())));
}

/// Permutation unitary sending each `first` label to its `second` label.
inline ModeUnitary mode_map(const std::vector<std::pair<ModeLabel, ModeLabel>>& mapping) {
  std::vector<ModeLabel> in;
  std::vector<ModeLabel> out;
  for (const auto& [a, b] : mapping) {
    in.push_back(a);
    out.push_back(b);
  }
  const auto n = static_cast<Eigen::Index>(mapping.size());
  return ModeUnitary(in, out, Matrix::Identity(n, n));
}

/// Extends `u` to act on `universe`, passing every other mode through unchanged.
inline ModeUnitary embed(const ModeUnitary& u, const std::vector<ModeLabel>& universe) {
  std::set<ModeLabel> all(universe.begin(), universe.end());
  if (all.size() != universe.size()) throw Error("embed universe contains duplicate modes");
  for (const auto& m : u.inputs()) {
    if (!all.count(m)) throw Error("embed: unknown mode " + to_string(m));
  }
  std::vector<ModeLabel> in(universe.begin(), universe.end());
  std::vector<ModeLabel> out;
  std::vector<ModeLabel> passthrough;
  for (const auto& m : universe) {
    if (!u.input_index(m)) passthrough.push_back(m);
  }
  out = passthrough;
  for (const auto& m : u.outputs()) {
    if (std::find(passthrough.begin(), passthrough.end(), m) != passthrough.end()) {
      throw Error("embed: output mode " + to_string(m) + " collides with a passthrough mode");
    }
    out.push_back(m);
  }
  const auto n = static_cast<Eigen::Index>(universe.size());
  Matrix m = Matrix::Zero(n, n);
  // Columns follow `in` as given, rows follow `out` as built; the constructor canonicalizes.
  auto col_of = [&](const ModeLabel& l) {
    return static_cast<Eigen::Index>(std::find(in.begin(), in.end(), l) - in.begin());
  };
  for (std::size_t r = 0; r < passthrough.size(); ++r) {
    m(static_cast<Eigen::Index>(r), col_of(passthrough[r])) = 1.0;
  }
  for (std::size_t r = 0; r < u.outputs().size(); ++r) {
    for (std::size_t c = 0; c < u.inputs().size(); ++c) {
      m(static_cast<Eigen::Index>(passthrough.size() + r), col_of(u.inputs()[c])) =
          u.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return ModeUnitary(in, out, m);
}

/// second * first; second's inputs must be exactly first's outputs.
inline ModeUnitary compose(const ModeUnitary& second, const ModeUnitary& first) {
  if (second.inputs() != first.outputs()) {
    throw Error("compose: dimension/mode mismatch (" + std::to_string(second.size()) + " inputs vs " +
                std::to_string(first.size()) + " outputs)");
  }
  return ModeUnitary(first.inputs(), second.outputs(), second.matrix() * first.matrix());
}

inline ModeUnitary adjoint(const ModeUnitary& u) {
  return ModeUnitary(u.outputs(), u.inputs(), u.matrix().adjoint());
}

/// Permanent by direct expansion over permutations; intended for n <= kMaxPhotonCap.
inline cplx permanent(const Matrix& a) {
  const auto n = a.rows();
  if (n != a.cols()) throw Error("permanent of a non-square matrix");
  if (n == 0) return 1.0;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  cplx total{};
  do {
    cplx prod{1.0};
    for (Eigen::Index r = 0; r < n; ++r) prod *= a(r, perm[static_cast<std::size_t>(r)]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

namespace detail {

inline double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline void check_cap(int cap) {
  if (cap < 0 || cap > kMaxPhotonCap) {
    throw Error("photon cap must be in [0, " + std::to_string(kMaxPhotonCap) + "]");
  }
}

/// Column indices of `u` for the photons of `basis`, one entry per photon.
inline std::vector<Eigen::Index> photon_columns(const FockBasisState& basis, const ModeUnitary& u) {
  std::vector<Eigen::Index> cols;
  for (const auto& [mode, n] : basis.occupations()) {
    auto c = u.input_index(mode);
    if (!c) throw Error("state mode " + to_string(mode) + " is not an input of the unitary");
    cols.insert(cols.end(), static_cast<std::size_t>(n), *c);
  }
  return cols;
}

inline double occupation_norm(const std::vector<Eigen::Index>& indices) {
  double f = 1;
  std::size_t i = 0;
  while (i < indices.size()) {
    std::size_t j = i;
    while (j < indices.size() && indices[j] == indices[i]) ++j;
    f *= factorial(static_cast<int>(j - i));
    i = j;
  }
  return f;
}

inline FockBasisState basis_from_rows(const std::vector<Eigen::Index>& rows, const ModeUnitary& u) {
  FockBasisState b;
  for (auto r : rows) {
    const auto& label = u.outputs()[static_cast<std::size_t>(r)];
    b.set(label, b.occupation(label) + 1);
  }
  return b;
}

inline void check_state(const StateVector& state, int cap) {
  check_cap(cap);
  if (state.max_photons() > cap) {
    throw Error("photon cap exceeded (" + std::to_string(state.max_photons()) + " > " + std::to_string(cap) + ")");
  }
}

}  // namespace detail

/// Fock-space evolution through `u` via permanents: for an input with
/// occupations n and output occupations n' (same total N) the amplitude is
/// perm(U[n', n]) / sqrt(prod n_j! prod n'_i!), where U[n', n] repeats row i
/// n'_i times and column j n_j times.
///
/// The state's modes must be inputs of `u`; absent inputs are vacuum.
inline StateVector evolve(const StateVector& state, const ModeUnitary& u, int cap = kDefaultPhotonCap) {
  detail::check_state(state, cap);
  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : state.amplitudes()) {
    const auto cols = detail::photon_columns(basis, u);
    const auto n = static_cast<int>(cols.size());
    // Only rows coupled to an occupied input can receive photons.
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < u.size(); ++r) {
      for (auto c : cols) {
        if (std::abs(u.matrix()(r, c)) >= kZeroTolerance * kZeroTolerance) {
          rows.push_back(r);
          break;
        }
      }
    }
    const double in_norm = detail::occupation_norm(cols);
    // Enumerate output multisets as non-decreasing index sequences into `rows`.
    std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
    if (n > 0 && rows.empty()) continue;
    while (true) {
      std::vector<Eigen::Index> out_rows;
      for (auto p : pick) out_rows.push_back(rows[p]);
      Matrix sub(n, n);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) sub(a, b) = u.matrix()(out_rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
      }
      const cplx value = permanent(sub) / std::sqrt(in_norm * detail::occupation_norm(out_rows));
      out[detail::basis_from_rows(out_rows, u)] += amp * value;
      // Next multiset.
      int k = n - 1;
      while (k >= 0 && pick[static_cast<std::size_t>(k)] + 1 == rows.size()) --k;
      if (k < 0) break;
      const auto next = pick[static_cast<std::size_t>(k)] + 1;
      for (int j = k; j < n; ++j) pick[static_cast<std::size_t>(j)] = next;
    }
  }
  return StateVector(std::move(out), u.output_set());
}

/// Same map as evolve(), built by substituting every input creation operator
/// a_j^dag with sum_i U_ij b_i^dag and expanding the product of operators.
/// Kept as an independent route for cross-checking.
inline StateVector evolve_by_expansion(const StateVector& state, const ModeUnitary& u, int cap = kDefaultPhotonCap) {
  detail::check_state(state, cap);
  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : state.amplitudes()) {
    const auto cols = detail::photon_columns(basis, u);
    // Polynomial in output creation operators: sorted row multiset -> coefficient.
    std::map<std::vector<Eigen::Index>, cplx> poly{{{}, cplx{1.0}}};
    for (auto c : cols) {
      std::map<std::vector<Eigen::Index>, cplx> next;
      for (const auto& [mono, coef] : poly) {
        for (Eigen::Index r = 0; r < u.size(); ++r) {
          const cplx x = u.matrix()(r, c);
          if (x == cplx{}) continue;
          auto m = mono;
          m.insert(std::upper_bound(m.begin(), m.end(), r), r);
          next[m] += coef * x;
        }
      }
      poly = std::move(next);
    }
    const double in_norm = std::sqrt(detail::occupation_norm(cols));
    for (const auto& [mono, coef] : poly) {
      // (b^dag)^k |0> = sqrt(k!) |k>
      const double out_norm = std::sqrt(detail::occupation_norm(mono));
      out[detail::basis_from_rows(mono, u)] += amp * coef * out_norm / in_norm;
    }
  }
  return StateVector(std::move(out), u.output_set());
}

}  // namespace iqkd
