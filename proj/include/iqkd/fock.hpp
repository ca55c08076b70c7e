// Occupation-number (Fock) states over labeled photonic modes.
//
// A mode is a (path, time-bin) pair. Basis states are stored sparsely: only
// occupied modes appear, so the vacuum is the empty map. A StateVector is a
// sparse superposition of basis states together with the mode universe it
// lives in.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iqkd {

using cplx = std::complex<double>;

/// Amplitudes with modulus below this are treated as exact zeros.
inline constexpr double kZeroTolerance = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModeKind : std::uint8_t {
  input_bin,     // t'_i, channel pulse entering Bob's lab
  straight_bin,  // s_i, straight output arm
  down_bin,      // d_i, down output arm
  abstract,      // internal ports, ancillas, user-defined modes
};

/// Ordered by kind, then bin for the time-bin kinds and (name, bin) for
/// abstract labels.
struct ModeLabel {
  ModeKind kind = ModeKind::abstract;
  int bin = 0;
  std::string name;

  static ModeLabel input(int b) { return {ModeKind::input_bin, b, {}}; }
  static ModeLabel straight(int b) { return {ModeKind::straight_bin, b, {}}; }
  static ModeLabel down(int b) { return {ModeKind::down_bin, b, {}}; }
  static ModeLabel abstract(std::string n, int b = 0) {
    return {ModeKind::abstract, b, std::move(n)};
  }

  bool is_bin() const { return kind != ModeKind::abstract; }

  std::strong_ordering operator<=>(const ModeLabel& o) const {
    if (auto c = kind <=> o.kind; c != 0) return c;
    if (kind == ModeKind::abstract) {
      if (auto c = name.compare(o.name); c != 0) {
        return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
      }
    }
    return bin <=> o.bin;
  }
  bool operator==(const ModeLabel& o) const { return (*this <=> o) == 0; }

  ModeLabel shifted(int delta) const {
    ModeLabel out = *this;
    if (is_bin()) out.bin += delta;
    return out;
  }
};

inline std::string to_string(const ModeLabel& m) {
  switch (m.kind) {
    case ModeKind::input_bin: return "t'" + std::to_string(m.bin);
    case ModeKind::straight_bin: return "s" + std::to_string(m.bin);
    case ModeKind::down_bin: return "d" + std::to_string(m.bin);
    case ModeKind::abstract: return m.name + "#" + std::to_string(m.bin);
  }
  return {};
}

namespace detail {

inline int parse_int(std::string_view s, std::string_view what) {
  if (s.empty()) throw Error("malformed " + std::string(what) + ": empty number");
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw Error("malformed " + std::string(what) + ": '" + std::string(s) + "'");
  long v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') {
      throw Error("malformed " + std::string(what) + ": '" + std::string(s) + "'");
    }
    v = v * 10 + (s[i] - '0');
    if (v > 1'000'000'000L) throw Error("number out of range in " + std::string(what));
  }
  return static_cast<int>(neg ? -v : v);
}

}  // namespace detail

inline ModeLabel parse_mode_label(std::string_view s) {
  if (s.size() >= 2 && s[0] == 't' && s[1] == '\'') {
    return ModeLabel::input(detail::parse_int(s.substr(2), "mode label"));
  }
  if (auto hash = s.rfind('#'); hash != std::string_view::npos) {
    if (hash == 0) throw Error("malformed mode label: '" + std::string(s) + "'");
    return ModeLabel::abstract(std::string(s.substr(0, hash)),
                               detail::parse_int(s.substr(hash + 1), "mode label"));
  }
  if (!s.empty() && s[0] == 's') return ModeLabel::straight(detail::parse_int(s.substr(1), "mode label"));
  if (!s.empty() && s[0] == 'd') return ModeLabel::down(detail::parse_int(s.substr(1), "mode label"));
  throw Error("malformed mode label: '" + std::string(s) + "'");
}

/// Photon counts per mode; unoccupied modes are never stored.
class FockBasisState {
 public:
  using Occupations = std::map<ModeLabel, int>;

  FockBasisState() = default;
  explicit FockBasisState(const Occupations& occ) {
    for (const auto& [mode, n] : occ) set(mode, n);
  }
  FockBasisState(std::initializer_list<std::pair<const ModeLabel, int>> occ)
      : FockBasisState(Occupations(occ)) {}

  static FockBasisState single(const ModeLabel& m, int n = 1) { return FockBasisState({{m, n}}); }

  const Occupations& occupations() const { return occ_; }
  bool is_vacuum() const { return occ_.empty(); }

  int occupation(const ModeLabel& m) const {
    auto it = occ_.find(m);
    return it == occ_.end() ? 0 : it->second;
  }

  int total_photons() const {
    int total = 0;
    for (const auto& [_, n] : occ_) total += n;
    return total;
  }

  void set(const ModeLabel& m, int n) {
    if (n < 0) throw Error("negative occupation for mode " + to_string(m));
    if (n == 0) {
      occ_.erase(m);
    } else {
      occ_[m] = n;
    }
  }

  auto operator<=>(const FockBasisState&) const = default;

 private:
  Occupations occ_;
};

/// "|n1,n2,...>@[m1,m2,...]" listing every mode of `universe` in canonical order.
inline std::string to_string(const FockBasisState& b, const std::set<ModeLabel>& universe) {
  std::string kets = "|";
  std::string labels = "@[";
  bool first = true;
  for (const auto& m : universe) {
    if (!first) {
      kets += ",";
      labels += ",";
    }
    first = false;
    kets += std::to_string(b.occupation(m));
    labels += to_string(m);
  }
  return kets + ">" + labels + "]";
}

inline std::set<ModeLabel> modes_of(const FockBasisState& b) {
  std::set<ModeLabel> out;
  for (const auto& [m, _] : b.occupations()) out.insert(m);
  return out;
}

inline std::string to_string(const FockBasisState& b) { return to_string(b, modes_of(b)); }

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Inverse of to_string(basis, universe). Returns the basis and the listed universe.
inline std::pair<FockBasisState, std::set<ModeLabel>> parse_basis_state(std::string_view text) {
  auto close = text.find(">@[");
  if (text.empty() || text.front() != '|' || close == std::string_view::npos || text.back() != ']') {
    throw Error("malformed basis state: '" + std::string(text) + "'");
  }
  auto counts = detail::split(text.substr(1, close - 1), ',');
  auto labels = detail::split(text.substr(close + 3, text.size() - close - 4), ',');
  if (counts.size() != labels.size()) {
    throw Error("basis state occupation/label count mismatch: '" + std::string(text) + "'");
  }
  FockBasisState basis;
  std::set<ModeLabel> universe;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto m = parse_mode_label(labels[i]);
    if (!universe.insert(m).second) throw Error("duplicate mode label '" + std::string(labels[i]) + "'");
    basis.set(m, detail::parse_int(counts[i], "occupation"));
  }
  return {basis, universe};
}

/// Sparse complex superposition of Fock basis states.
///
/// Values are immutable once built: every operation returns a new vector.
/// Amplitudes below kZeroTolerance are pruned at construction, and every
/// stored basis state only uses modes from the universe.
class StateVector {
 public:
  using Amplitudes = std::map<FockBasisState, cplx>;

  StateVector() = default;

  StateVector(Amplitudes amps, std::set<ModeLabel> universe) : universe_(std::move(universe)) {
    for (auto& [basis, amp] : amps) {
      for (const auto& [m, _] : basis.occupations()) {
        if (!universe_.count(m)) {
          throw Error("basis state uses mode " + to_string(m) + " outside the mode universe");
        }
      }
      if (std::abs(amp) >= kZeroTolerance) amps_.emplace(basis, amp);
    }
  }

  /// Universe defaults to the modes the basis states occupy.
  explicit StateVector(const Amplitudes& amps) : StateVector(amps, occupied_modes(amps)) {}

  static StateVector vacuum(std::set<ModeLabel> universe = {}) {
    return StateVector(Amplitudes{{FockBasisState{}, cplx{1.0}}}, std::move(universe));
  }

  static StateVector basis(const FockBasisState& b, cplx amp = 1.0) {
    return StateVector(Amplitudes{{b, amp}});
  }

  static StateVector single_photon(const ModeLabel& m, cplx amp = 1.0) {
    return basis(FockBasisState::single(m), amp);
  }

  const Amplitudes& amplitudes() const { return amps_; }
  const std::set<ModeLabel>& universe() const { return universe_; }
  bool is_zero() const { return amps_.empty(); }

  cplx amplitude(const FockBasisState& b) const {
    auto it = amps_.find(b);
    return it == amps_.end() ? cplx{} : it->second;
  }

  double norm_squared() const {
    double s = 0;
    for (const auto& [_, a] : amps_) s += std::norm(a);
    return s;
  }
  double norm() const { return std::sqrt(norm_squared()); }
  bool is_normalized(double tol = kZeroTolerance) const { return std::abs(norm_squared() - 1.0) < tol; }

  /// Distinct total photon numbers present in the superposition.
  std::set<int> photon_numbers() const {
    std::set<int> out;
    for (const auto& [b, _] : amps_) out.insert(b.total_photons());
    return out;
  }

  int max_photons() const {
    int m = 0;
    for (const auto& [b, _] : amps_) m = std::max(m, b.total_photons());
    return m;
  }

  StateVector with_universe(std::set<ModeLabel> extra) const {
    extra.insert(universe_.begin(), universe_.end());
    return StateVector(amps_, std::move(extra));
  }

  friend StateVector operator+(const StateVector& a, const StateVector& b) {
    Amplitudes sum = a.amps_;
    for (const auto& [basis, amp] : b.amps_) sum[basis] += amp;
    auto universe = a.universe_;
    universe.insert(b.universe_.begin(), b.universe_.end());
    return StateVector(std::move(sum), std::move(universe));
  }

  friend StateVector operator*(cplx s, const StateVector& v) {
    Amplitudes out;
    for (const auto& [basis, amp] : v.amps_) out.emplace(basis, s * amp);
    return StateVector(std::move(out), v.universe_);
  }

  friend StateVector operator-(const StateVector& a, const StateVector& b) { return a + cplx{-1.0} * b; }

 private:
  static std::set<ModeLabel> occupied_modes(const Amplitudes& amps) {
    std::set<ModeLabel> out;
    for (const auto& [b, _] : amps) {
      for (const auto& [m, __] : b.occupations()) out.insert(m);
    }
    return out;
  }

  Amplitudes amps_;
  std::set<ModeLabel> universe_;
};

/// <a|b>; modes missing from either universe count as vacuum.
inline cplx inner_product(const StateVector& a, const StateVector& b) {
  cplx s{};
  const auto& small = a.amplitudes().size() <= b.amplitudes().size() ? a.amplitudes() : b.amplitudes();
  const bool a_small = &small == &a.amplitudes();
  for (const auto& [basis, amp] : small) {
    cplx other = (a_small ? b : a).amplitude(basis);
    s += a_small ? std::conj(amp) * other : std::conj(other) * amp;
  }
  return s;
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  for (const auto& m : a.universe()) {
    if (b.universe().count(m)) throw Error("mode collision on " + to_string(m));
  }
  StateVector::Amplitudes out;
  for (const auto& [ba, xa] : a.amplitudes()) {
    for (const auto& [bb, xb] : b.amplitudes()) {
      auto occ = ba.occupations();
      occ.insert(bb.occupations().begin(), bb.occupations().end());
      out[FockBasisState(occ)] += xa * xb;
    }
  }
  auto universe = a.universe();
  universe.insert(b.universe().begin(), b.universe().end());
  return StateVector(std::move(out), std::move(universe));
}

inline StateVector normalize(const StateVector& v) {
  const double n = v.norm();
  if (n < kZeroTolerance) throw Error("cannot normalize zero state");
  return cplx{1.0 / n} * v;
}

/// Moves every occupation to mapping(mode). The mapping must be injective on
/// the state's universe.
inline StateVector relabel(const StateVector& v, const std::function<ModeLabel(const ModeLabel&)>& mapping) {
  std::map<ModeLabel, ModeLabel> image;
  std::set<ModeLabel> universe;
  for (const auto& m : v.universe()) {
    auto target = mapping(m);
    if (!universe.insert(target).second) {
      throw Error("relabel mapping is not injective (" + to_string(target) + " hit twice)");
    }
    image.emplace(m, target);
  }
  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : v.amplitudes()) {
    FockBasisState mapped;
    for (const auto& [m, n] : basis.occupations()) mapped.set(image.at(m), n);
    out.emplace(mapped, amp);
  }
  return StateVector(std::move(out), std::move(universe));
}

inline StateVector relabel(const StateVector& v, const std::map<ModeLabel, ModeLabel>& mapping) {
  return relabel(v, [&](const ModeLabel& m) {
    auto it = mapping.find(m);
    return it == mapping.end() ? m : it->second;
  });
}

/// Delays (delta > 0) or advances every time-bin mode; abstract modes stay put.
inline StateVector shift_bins(const StateVector& v, int delta) {
  return relabel(v, [delta](const ModeLabel& m) { return m.shifted(delta); });
}

/// Exact amplitude-by-amplitude comparison; universes are ignored.
inline bool approx_equal(const StateVector& a, const StateVector& b, double tol = kZeroTolerance) {
  for (const auto& [basis, amp] : a.amplitudes()) {
    if (std::abs(amp - b.amplitude(basis)) >= tol) return false;
  }
  for (const auto& [basis, amp] : b.amplitudes()) {
    if (std::abs(amp - a.amplitude(basis)) >= tol) return false;
  }
  return true;
}

/// Comparison modulo a global phase: both vectors are divided by their first
/// nonzero amplitude's phase before an exact comparison.
inline bool approx_equal_up_to_global_phase(const StateVector& a, const StateVector& b,
                                            double tol = kZeroTolerance) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  auto dephase = [](const StateVector& v) {
    cplx first = v.amplitudes().begin()->second;
    return cplx{std::abs(first)} / first * v;
  };
  return approx_equal(dephase(a), dephase(b), tol);
}

/// Human-readable superposition, e.g. "(0.5+0i)|1,0>@[t'0,t'1] + ...".
/// Shortest decimal text that reads back to the same double; -0 prints as 0.
inline std::string format_real(double x) {
  if (x == 0.0) x = 0.0;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline std::string to_display_string(const StateVector& v) {
  if (v.is_zero()) return "0";
  std::string out;
  for (const auto& [basis, amp] : v.amplitudes()) {
    if (!out.empty()) out += " + ";
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", amp.real(), amp.imag());
    out += buf;
    out += to_string(basis, v.universe());
  }
  return out;
}

}  // namespace iqkd
