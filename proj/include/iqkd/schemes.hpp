// Scheme definitions: Alice's alphabets, Bob's setup per basis, and how Bob
// turns detector clicks into bit values, losses, or invalid results.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iqkd/fock.hpp"
#include "iqkd/interferometer.hpp"
#include "iqkd/linear_optics.hpp"

namespace iqkd {

enum class Basis { x, y, z };
enum class DetectorKind { threshold, counter };
enum class Outcome { bit0, bit1, loss, invalid };

inline std::string to_string(Basis b) {
  switch (b) {
    case Basis::x: return "x";
    case Basis::y: return "y";
    case Basis::z: return "z";
  }
  return {};
}

inline Basis parse_basis(std::string_view s) {
  if (s == "x") return Basis::x;
  if (s == "y") return Basis::y;
  if (s == "z") return Basis::z;
  throw Error("unknown basis '" + std::string(s) + "' (expected x, y or z)");
}

inline std::string to_string(DetectorKind k) { return k == DetectorKind::threshold ? "threshold" : "counter"; }

inline DetectorKind parse_detector_kind(std::string_view s) {
  if (s == "threshold") return DetectorKind::threshold;
  if (s == "counter") return DetectorKind::counter;
  throw Error("unknown detector kind '" + std::string(s) + "'");
}

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::bit0: return "bit0";
    case Outcome::bit1: return "bit1";
    case Outcome::loss: return "loss";
    case Outcome::invalid: return "invalid";
  }
  return {};
}

inline bool is_conclusive(Outcome o) { return o == Outcome::bit0 || o == Outcome::bit1; }

/// One of Alice's single-photon states over t'_0, t'_1.
struct AliceState {
  Basis basis;
  int bit;
  std::array<cplx, 2> alpha;  // amplitudes on t'_0, t'_1
  StateVector vector;
};

inline AliceState alice_state(Basis basis, int bit) {
  if (bit != 0 && bit != 1) throw Error("bit must be 0 or 1");
  const double h = 1.0 / std::sqrt(2.0);
  const double sign = bit == 0 ? 1.0 : -1.0;
  std::array<cplx, 2> a{};
  switch (basis) {
    case Basis::x: a = {h, sign * h}; break;
    case Basis::y: a = {h, cplx{0, sign * h}}; break;
    case Basis::z: a = bit == 0 ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0}; break;
  }
  auto v = a[0] * StateVector::single_photon(ModeLabel::input(0)) +
           a[1] * StateVector::single_photon(ModeLabel::input(1));
  return {basis, bit, a, v.with_universe({ModeLabel::input(0), ModeLabel::input(1)})};
}

/// Detector counts per opened window; threshold detectors report 1 for any
/// nonzero count. Sorted by mode, zero counts omitted; empty means no click.
struct OutcomePattern {
  std::vector<std::pair<ModeLabel, int>> counts;

  bool no_click() const { return counts.empty(); }
  int total() const {
    int t = 0;
    for (const auto& [_, n] : counts) t += n;
    return t;
  }
  auto operator<=>(const OutcomePattern&) const = default;
};

inline std::string to_string(const OutcomePattern& p) {
  std::string out = "{";
  for (std::size_t i = 0; i < p.counts.size(); ++i) {
    if (i) out += ",";
    out += to_string(p.counts[i].first);
    if (p.counts[i].second != 1) out += "x" + std::to_string(p.counts[i].second);
  }
  return out + "}";
}

inline OutcomePattern parse_outcome_pattern(std::string_view s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') {
    throw Error("malformed outcome pattern '" + std::string(s) + "'");
  }
  OutcomePattern p;
  for (auto part : detail::split(s.substr(1, s.size() - 2), ',')) {
    int n = 1;
    auto x = part.rfind('x');
    if (x != std::string_view::npos && x > 0 && part[0] != 't') {
      n = detail::parse_int(part.substr(x + 1), "outcome count");
      part = part.substr(0, x);
    }
    p.counts.emplace_back(parse_mode_label(part), n);
  }
  std::sort(p.counts.begin(), p.counts.end());
  return p;
}

/// Partition of the reachable outcome patterns.
struct OutcomePartition {
  std::vector<OutcomePattern> j0, j1, loss, invalid;
};

/// Which windows Bob opens and how he reads them.
///
/// A single click in a bit-0 (bit-1) window means that bit; a single click in
/// any other open window, or no click, is a loss. Clicks in two or more
/// windows (or, for counters, two or more photons) are invalid: an ideal
/// Alice never sends more than one photon.
class MeasurementModel {
 public:
  MeasurementModel(std::set<ModeLabel> windows, DetectorKind kind, std::set<ModeLabel> bit0_windows,
                   std::set<ModeLabel> bit1_windows)
      : windows_(std::move(windows)), kind_(kind), bit0_(std::move(bit0_windows)), bit1_(std::move(bit1_windows)) {
    for (const auto& m : bit0_) {
      if (!windows_.count(m)) throw Error("bit-0 window " + to_string(m) + " is not an open detector window");
      if (bit1_.count(m)) throw Error("window " + to_string(m) + " is assigned to both bit values");
    }
    for (const auto& m : bit1_) {
      if (!windows_.count(m)) throw Error("bit-1 window " + to_string(m) + " is not an open detector window");
    }
  }

  const std::set<ModeLabel>& windows() const { return windows_; }
  DetectorKind kind() const { return kind_; }
  const std::set<ModeLabel>& bit0_windows() const { return bit0_; }
  const std::set<ModeLabel>& bit1_windows() const { return bit1_; }

  std::set<ModeLabel> loss_windows() const {
    std::set<ModeLabel> out;
    for (const auto& m : windows_) {
      if (!bit0_.count(m) && !bit1_.count(m)) out.insert(m);
    }
    return out;
  }

  /// What Bob's detectors report for a Fock basis state; unopened modes are traced out.
  OutcomePattern pattern_of(const FockBasisState& b) const {
    OutcomePattern p;
    for (const auto& [m, n] : b.occupations()) {
      if (windows_.count(m)) p.counts.emplace_back(m, kind_ == DetectorKind::threshold ? 1 : n);
    }
    return p;
  }

  Outcome interpret(const OutcomePattern& p) const {
    for (const auto& [m, n] : p.counts) {
      if (!windows_.count(m) || n < 1 || (kind_ == DetectorKind::threshold && n != 1)) {
        throw Error("uncovered outcome " + to_string(p));
      }
    }
    if (p.no_click()) return Outcome::loss;
    if (p.counts.size() > 1 || p.total() > 1) return Outcome::invalid;
    const auto& m = p.counts.front().first;
    if (bit0_.count(m)) return Outcome::bit0;
    if (bit1_.count(m)) return Outcome::bit1;
    return Outcome::loss;
  }

  /// Every pattern reachable with at most `max_photons` photons, canonical order.
  std::vector<OutcomePattern> possible_patterns(int max_photons) const {
    std::vector<ModeLabel> w(windows_.begin(), windows_.end());
    std::set<OutcomePattern> out;
    // Distribute up to max_photons photons over the windows.
    std::vector<int> counts(w.size(), 0);
    auto rec = [&](auto& self, std::size_t idx, int left) -> void {
      if (idx == w.size()) {
        OutcomePattern p;
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (counts[i] > 0) p.counts.emplace_back(w[i], kind_ == DetectorKind::threshold ? 1 : counts[i]);
        }
        out.insert(p);
        return;
      }
      for (int n = 0; n <= left; ++n) {
        counts[idx] = n;
        self(self, idx + 1, left - n);
      }
      counts[idx] = 0;
    };
    rec(rec, 0, max_photons);
    return {out.begin(), out.end()};
  }

  OutcomePartition partition(int max_photons) const {
    OutcomePartition part;
    for (const auto& p : possible_patterns(max_photons)) {
      switch (interpret(p)) {
        case Outcome::bit0: part.j0.push_back(p); break;
        case Outcome::bit1: part.j1.push_back(p); break;
        case Outcome::loss: part.loss.push_back(p); break;
        case Outcome::invalid: part.invalid.push_back(p); break;
      }
    }
    return part;
  }

 private:
  std::set<ModeLabel> windows_;
  DetectorKind kind_;
  std::set<ModeLabel> bit0_;
  std::set<ModeLabel> bit1_;
};

inline Outcome interpret(const OutcomePattern& p, const MeasurementModel& model) { return model.interpret(p); }

enum class SchemeName { xy_bb84, native_xz_bb84, native_yz_bb84, native_six_state, unified_xz_bb84, unified_six_state };

inline constexpr std::array<SchemeName, 6> kAllSchemes{SchemeName::xy_bb84,          SchemeName::native_xz_bb84,
                                                       SchemeName::native_yz_bb84,   SchemeName::native_six_state,
                                                       SchemeName::unified_xz_bb84,  SchemeName::unified_six_state};

inline std::string to_string(SchemeName n) {
  switch (n) {
    case SchemeName::xy_bb84: return "xy-BB84";
    case SchemeName::native_xz_bb84: return "native-xz-BB84";
    case SchemeName::native_yz_bb84: return "native-yz-BB84";
    case SchemeName::native_six_state: return "native-six-state";
    case SchemeName::unified_xz_bb84: return "unified-xz-BB84";
    case SchemeName::unified_six_state: return "unified-six-state";
  }
  return {};
}

/// Accepts the canonical names; "unified-xz" is accepted as shorthand.
inline SchemeName parse_scheme_name(std::string_view s) {
  for (auto n : kAllSchemes) {
    if (s == to_string(n)) return n;
  }
  if (s == "unified-xz") return SchemeName::unified_xz_bb84;
  if (s == "native-xz") return SchemeName::native_xz_bb84;
  if (s == "native-yz") return SchemeName::native_yz_bb84;
  throw Error("unknown scheme '" + std::string(s) + "'");
}

struct BasisSetup {
  Basis basis;
  BobSetup setup;
  MeasurementModel model;
};

struct SchemeDefinition {
  SchemeName name;
  std::vector<BasisSetup> bases;
  std::vector<AliceState> alphabet;

  const BasisSetup& setup_for(Basis b) const {
    for (const auto& s : bases) {
      if (s.basis == b) return s;
    }
    throw Error("scheme " + to_string(name) + " has no setup for basis " + to_string(b));
  }

  std::vector<Basis> basis_list() const {
    std::vector<Basis> out;
    for (const auto& s : bases) out.push_back(s.basis);
    return out;
  }

  void validate() const {
    for (const auto& a : alphabet) setup_for(a.basis);
  }
};

struct SchemeOptions {
  DetectorKind detector = DetectorKind::threshold;
  /// Unified z-basis: open the t_1 windows too and count their clicks as
  /// losses (true), or leave them unmonitored (false).
  bool unified_z_monitors_t1 = true;
  TimeBinWindow window{-1, 2};
  double reflection_phase = kReflectionPhase;
};

/// Bit 0 on d_1, bit 1 on s_1, detectors open at t_1 only.
inline MeasurementModel t1_model(DetectorKind kind) {
  const auto s1 = ModeLabel::straight(1);
  const auto d1 = ModeLabel::down(1);
  return MeasurementModel({s1, d1}, kind, {d1}, {s1});
}

/// Unified z reading of the interferometer outputs: t_0 clicks mean 0, t_2 clicks mean 1.
inline MeasurementModel unified_z_model(DetectorKind kind, bool monitor_t1) {
  std::set<ModeLabel> windows{ModeLabel::straight(0), ModeLabel::straight(2), ModeLabel::down(0),
                              ModeLabel::down(2)};
  if (monitor_t1) {
    windows.insert(ModeLabel::straight(1));
    windows.insert(ModeLabel::down(1));
  }
  return MeasurementModel(windows, kind, {ModeLabel::straight(0), ModeLabel::down(0)},
                          {ModeLabel::straight(2), ModeLabel::down(2)});
}

inline SchemeDefinition scheme(SchemeName name, const SchemeOptions& opt = {}) {
  const double half_pi = std::numbers::pi / 2;
  auto mz = [&](double phi) { return build_mach_zehnder(phi, opt.window, opt.reflection_phase); };
  auto interferometric = [&](Basis b) {
    return BasisSetup{b, mz(b == Basis::y ? half_pi : 0.0), t1_model(opt.detector)};
  };
  auto native_z = [&] { return BasisSetup{Basis::z, build_native_z(opt.window), t1_model(opt.detector)}; };
  auto unified_z = [&] {
    return BasisSetup{Basis::z, mz(0.0), unified_z_model(opt.detector, opt.unified_z_monitors_t1)};
  };

  SchemeDefinition def{name, {}, {}};
  switch (name) {
    case SchemeName::xy_bb84: def.bases = {interferometric(Basis::x), interferometric(Basis::y)}; break;
    case SchemeName::native_xz_bb84: def.bases = {interferometric(Basis::x), native_z()}; break;
    case SchemeName::native_yz_bb84: def.bases = {interferometric(Basis::y), native_z()}; break;
    case SchemeName::native_six_state:
      def.bases = {interferometric(Basis::x), interferometric(Basis::y), native_z()};
      break;
    case SchemeName::unified_xz_bb84: def.bases = {interferometric(Basis::x), unified_z()}; break;
    case SchemeName::unified_six_state:
      def.bases = {interferometric(Basis::x), interferometric(Basis::y), unified_z()};
      break;
  }
  for (const auto& b : def.bases) {
    def.alphabet.push_back(alice_state(b.basis, 0));
    def.alphabet.push_back(alice_state(b.basis, 1));
  }
  def.validate();
  return def;
}

using PatternDistribution = std::vector<std::pair<OutcomePattern, double>>;

/// Born-rule distribution over Bob's outcome patterns for a pure channel
/// state, in canonical pattern order.
inline PatternDistribution detection_distribution(const StateVector& channel, const BasisSetup& bs,
                                                  int cap = kDefaultPhotonCap) {
  auto out = evolve_in_setup(bs.setup, channel, cap);
  std::map<OutcomePattern, double> acc;
  for (const auto& [basis, amp] : out.amplitudes()) acc[bs.model.pattern_of(basis)] += std::norm(amp);
  return {acc.begin(), acc.end()};
}

inline PatternDistribution detection_distribution(const AliceState& alice, const BasisSetup& bs) {
  return detection_distribution(alice.vector, bs, 1);
}

/// Probability mass per outcome class.
inline std::map<Outcome, double> outcome_probabilities(const PatternDistribution& dist, const MeasurementModel& model) {
  std::map<Outcome, double> out{{Outcome::bit0, 0.0}, {Outcome::bit1, 0.0}, {Outcome::loss, 0.0}, {Outcome::invalid, 0.0}};
  for (const auto& [p, prob] : dist) out[model.interpret(p)] += prob;
  return out;
}

}  // namespace iqkd
