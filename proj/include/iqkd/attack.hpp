// Eve's attacks as isometries from Alice's qubit into (Eve ancilla) x (channel).
//
// U_E |i>_A = sum_k |v_{i,k}>_E |k>_P, with |k> running over vacuum and
// single-photon channel bins. Rows of the stacked matrix are (i, k) pairs in
// i-major order; columns are Eve's basis.

#pragma once

#include <cmath>
#include <array>
#include <complex>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "iqkd/fock.hpp"
#include "iqkd/linear_optics.hpp"
#include "iqkd/schemes.hpp"

namespace iqkd {

/// A channel basis state: vacuum or one photon in t'_bin.
struct ChannelState {
  bool is_vacuum = true;
  int bin = 0;

  static ChannelState vacuum() { return {true, 0}; }
  static ChannelState photon(int bin) { return {false, bin}; }

  StateVector vector() const {
    return is_vacuum ? StateVector::vacuum() : StateVector::single_photon(ModeLabel::input(bin));
  }

  auto operator<=>(const ChannelState& o) const {
    if (is_vacuum != o.is_vacuum) return is_vacuum ? std::strong_ordering::less : std::strong_ordering::greater;
    return is_vacuum ? std::strong_ordering::equal : bin <=> o.bin;
  }
  bool operator==(const ChannelState& o) const { return (*this <=> o) == 0; }
};

inline std::string to_string(const ChannelState& c) {
  return c.is_vacuum ? "V" : "t'" + std::to_string(c.bin);
}

inline ChannelState parse_channel_state(std::string_view s) {
  if (s == "V") return ChannelState::vacuum();
  auto m = parse_mode_label(s);
  if (m.kind != ModeKind::input_bin) throw Error("channel state must be V or t'<bin>, got '" + std::string(s) + "'");
  return ChannelState::photon(m.bin);
}

/// Vacuum plus the given bins, canonical order.
inline std::vector<ChannelState> channel_basis_for(const std::vector<int>& bins) {
  std::set<ChannelState> s{ChannelState::vacuum()};
  for (int b : bins) s.insert(ChannelState::photon(b));
  return {s.begin(), s.end()};
}

class AttackIsometry {
 public:
  AttackIsometry(std::string name, std::vector<ChannelState> channel_basis, Matrix stacked, int input_dim = 2)
      : name_(std::move(name)), input_dim_(input_dim), channel_(std::move(channel_basis)), v_(std::move(stacked)) {
    if (input_dim_ < 1) throw Error("attack input dimension must be positive");
    if (std::set<ChannelState>(channel_.begin(), channel_.end()).size() != channel_.size()) {
      throw Error("attack channel basis has repeated states");
    }
    if (v_.rows() != static_cast<Eigen::Index>(input_dim_ * channel_.size()) || v_.cols() < 1) {
      throw Error("attack vectors have shape " + std::to_string(v_.rows()) + "x" + std::to_string(v_.cols()) +
                  ", expected " + std::to_string(input_dim_ * channel_.size()) + " rows");
    }
    if (const double dev = isometry_deviation(); dev >= kZeroTolerance) {
      throw Error("attack is not an isometry (deviation " + std::to_string(dev) + ")");
    }
  }

  const std::string& name() const { return name_; }
  int input_dim() const { return input_dim_; }
  int eve_dim() const { return static_cast<int>(v_.cols()); }
  const std::vector<ChannelState>& channel_basis() const { return channel_; }
  const Matrix& stacked() const { return v_; }

  Eigen::Index row(int i, std::size_t k) const { return static_cast<Eigen::Index>(i * channel_.size() + k); }

  /// |v_{i,k}> as a column over Eve's basis.
  Vector eve_vector(int i, std::size_t k) const { return v_.row(row(i, k)).transpose(); }

  std::optional<std::size_t> channel_index(const ChannelState& c) const {
    for (std::size_t k = 0; k < channel_.size(); ++k) {
      if (channel_[k] == c) return k;
    }
    return std::nullopt;
  }

  /// max |sum_k <v_{i,k}, v_{i',k}> - delta_{i,i'}|
  double isometry_deviation() const {
    double worst = 0.0;
    for (int i = 0; i < input_dim_; ++i) {
      for (int ip = 0; ip < input_dim_; ++ip) {
        cplx g = 0.0;
        for (std::size_t k = 0; k < channel_.size(); ++k) g += v_.row(row(i, k)).dot(v_.row(row(ip, k)));
        worst = std::max(worst, std::abs(g - (i == ip ? 1.0 : 0.0)));
      }
    }
    return worst;
  }

  /// Same attack expressed over a larger channel basis (new rows are zero).
  AttackIsometry embedded(const std::vector<ChannelState>& target) const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(input_dim_ * target.size()), v_.cols());
    for (std::size_t k = 0; k < channel_.size(); ++k) {
      std::optional<std::size_t> t;
      for (std::size_t q = 0; q < target.size(); ++q) {
        if (target[q] == channel_[k]) t = q;
      }
      if (!t) throw Error("incompatible attack: channel state " + to_string(channel_[k]) + " is outside the scheme's reversed space");
      for (int i = 0; i < input_dim_; ++i) {
        out.row(static_cast<Eigen::Index>(i * target.size() + *t)) = v_.row(row(i, k));
      }
    }
    return AttackIsometry(name_, target, std::move(out), input_dim_);
  }

  /// Channel-side state for Eve basis vector e given Alice amplitudes over |i>.
  StateVector channel_state(const std::vector<cplx>& alpha, Eigen::Index e) const {
    StateVector out;
    for (std::size_t k = 0; k < channel_.size(); ++k) {
      cplx c = 0.0;
      for (int i = 0; i < input_dim_; ++i) c += alpha[static_cast<std::size_t>(i)] * v_(row(i, k), e);
      if (std::abs(c) >= kZeroTolerance) out = out + c * channel_[k].vector();
    }
    return out;
  }

 private:
  std::string name_;
  int input_dim_;
  std::vector<ChannelState> channel_;
  Matrix v_;
};

/// Eve forwards the qubit untouched: v_{0,t'0} = v_{1,t'1} = 1.
inline AttackIsometry identity_attack() {
  auto basis = channel_basis_for({0, 1});  // V, t'0, t'1
  Matrix v = Matrix::Zero(6, 1);
  v(1, 0) = 1.0;  // (0, t'0)
  v(5, 0) = 1.0;  // (1, t'1)
  return AttackIsometry("identity", basis, v);
}

/// Forwards the qubit with amplitude p, otherwise sends vacuum and keeps an
/// orthogonal record of which bin was blocked. p = 1 is the identity attack.
inline AttackIsometry blocking_attack(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("blocking amplitude p must lie in [0, 1], got " + std::to_string(p));
  const double q = std::sqrt(std::max(0.0, 1.0 - p * p));
  Matrix v = Matrix::Zero(6, 3);
  v(1, 0) = p;  // (0, t'0) -> |phi>
  v(5, 0) = p;  // (1, t'1) -> |phi>
  v(0, 1) = q;  // (0, V) -> |psi_0>
  v(3, 2) = q;  // (1, V) -> |psi_1>
  return AttackIsometry("blocking:" + format_real(p), channel_basis_for({0, 1}), v);
}

/// Eve measures in `basis`, keeps the result, and resends resend[m] for result m
/// (defaults to Alice's alphabet state for that result).
inline AttackIsometry measure_resend_attack(Basis basis, std::optional<std::array<StateVector, 2>> resend = std::nullopt) {
  std::array<StateVector, 2> sent{alice_state(basis, 0).vector, alice_state(basis, 1).vector};
  if (resend) sent = *resend;
  std::set<int> bins{0, 1};
  for (const auto& s : sent) {
    if (!s.is_normalized()) throw Error("resend states must be normalized");
    for (const auto& [b, _] : s.amplitudes()) {
      if (b.total_photons() != 1 || b.occupations().begin()->first.kind != ModeKind::input_bin) {
        throw Error("resend states must be single photons over channel bins");
      }
      bins.insert(b.occupations().begin()->first.bin);
    }
  }
  auto channel = channel_basis_for({bins.begin(), bins.end()});
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(2 * channel.size()), 2);
  for (int m = 0; m < 2; ++m) {
    const auto meas = alice_state(basis, m).alpha;
    for (int i = 0; i < 2; ++i) {
      const cplx overlap = std::conj(meas[static_cast<std::size_t>(i)]);  // <m|i>
      for (std::size_t k = 1; k < channel.size(); ++k) {
        const cplx ck = sent[static_cast<std::size_t>(m)].amplitude(FockBasisState::single(ModeLabel::input(channel[k].bin)));
        v(static_cast<Eigen::Index>(i * channel.size() + k), m) += overlap * ck;
      }
    }
  }
  return AttackIsometry("measure-resend:" + to_string(basis), channel, v);
}

/// |0> -> |E1>|t'_{-1}>, |1> -> |E2>|t'_2>: fake time bins that only the
/// unified z-interpretation can register.
inline AttackIsometry fake_time_bin_attack() {
  auto channel = channel_basis_for({-1, 2});  // V, t'-1, t'2
  Matrix v = Matrix::Zero(6, 2);
  v(1, 0) = 1.0;  // (0, t'-1) -> E1
  v(5, 1) = 1.0;  // (1, t'2) -> E2
  return AttackIsometry("fake-time-bin", channel, v);
}

/// Turns one direction d over the (i, k) index set into a valid isometry: Eve
/// holds s*d in her first dimension, with s chosen so the remaining Gram
/// deficit is positive semidefinite, and that deficit is routed to vacuum
/// through two extra Eve dimensions. Vacuum rows never produce errors, so a
/// zero-error direction stays zero-error.
inline AttackIsometry attack_from_direction(const std::vector<ChannelState>& channel, const Vector& d,
                                            std::string name = "direction") {
  const auto K = static_cast<Eigen::Index>(channel.size());
  if (d.size() != 2 * K) throw Error("direction length does not match the channel basis");
  if (channel.empty() || !channel.front().is_vacuum) throw Error("channel basis must start with vacuum");
  Eigen::Matrix2cd g;
  for (int i = 0; i < 2; ++i) {
    for (int ip = 0; ip < 2; ++ip) g(i, ip) = d.segment(i * K, K).dot(d.segment(ip * K, K));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(g);
  const double top = es.eigenvalues().maxCoeff();
  if (top < kZeroTolerance) throw Error("direction is zero");
  const double s = 1.0 / std::sqrt(top);
  Eigen::Matrix2cd residual = Eigen::Matrix2cd::Identity() - s * s * g;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> rs(residual);
  // residual = W^dag W with W = diag(sqrt(lambda)) Q^dag; column i of W is Eve's vacuum record for |i>.
  Eigen::Matrix2cd w = Eigen::Matrix2cd::Zero();
  for (int r = 0; r < 2; ++r) {
    const double lam = std::max(0.0, rs.eigenvalues()(r));
    w.row(r) = std::sqrt(lam) * rs.eigenvectors().col(r).adjoint();
  }
  Matrix v = Matrix::Zero(2 * K, 3);
  v.col(0) = s * d;
  for (int i = 0; i < 2; ++i) {
    v(i * K, 1) += w(0, i);
    v(i * K, 2) += w(1, i);
  }
  return AttackIsometry(std::move(name), channel, v);
}

enum class CannedAttack { identity, blocking, measure_resend, fake_time_bin };

/// Parses identity, blocking:p, measure-resend:<basis>, fake-time-bin.
/// File-backed specs are handled by the caller.
inline AttackIsometry canned_attack(std::string_view spec) {
  if (spec == "identity") return identity_attack();
  if (spec == "fake-time-bin") return fake_time_bin_attack();
  if (spec.starts_with("blocking:")) {
    const std::string arg(spec.substr(9));
    char* end = nullptr;
    const double p = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size()) throw Error("malformed blocking amplitude '" + arg + "'");
    return blocking_attack(p);
  }
  if (spec.starts_with("measure-resend:")) return measure_resend_attack(parse_basis(spec.substr(15)));
  throw Error("unknown attack '" + std::string(spec) + "'");
}

}  // namespace iqkd
