// Bob's time-bin setups: the Mach-Zehnder interferometer (built by composing
// its optical elements) and the interferometer-free z-basis setup.

#pragma once

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "iqkd/fock.hpp"
#include "iqkd/linear_optics.hpp"

namespace iqkd {

/// Inclusive range of channel input bins t'_first..t'_last. Outputs span
/// bins first..last+1 on each arm because the long arm delays by one bin.
struct TimeBinWindow {
  int first_input_bin = -1;
  int last_input_bin = 2;

  void validate() const {
    if (first_input_bin > last_input_bin) {
      throw Error("time-bin window is empty (first " + std::to_string(first_input_bin) + " > last " +
                  std::to_string(last_input_bin) + ")");
    }
  }
  int first_output_bin() const { return first_input_bin; }
  int last_output_bin() const { return last_input_bin + 1; }
  bool contains(int bin) const { return bin >= first_input_bin && bin <= last_input_bin; }
  int size() const { return last_input_bin - first_input_bin + 1; }

  std::vector<int> input_bins() const {
    std::vector<int> out;
    for (int b = first_input_bin; b <= last_input_bin; ++b) out.push_back(b);
    return out;
  }

  /// s_first..s_last+1 then d_first..d_last+1.
  std::vector<ModeLabel> output_modes() const {
    std::vector<ModeLabel> out;
    for (int b = first_output_bin(); b <= last_output_bin(); ++b) out.push_back(ModeLabel::straight(b));
    for (int b = first_output_bin(); b <= last_output_bin(); ++b) out.push_back(ModeLabel::down(b));
    return out;
  }

  bool operator==(const TimeBinWindow&) const = default;
};

enum class SetupKind { mach_zehnder, native_z };

inline std::string to_string(SetupKind k) { return k == SetupKind::mach_zehnder ? "mach-zehnder" : "native-z"; }

/// One of Bob's measurement setups over a window of time bins. The unitary
/// is square: besides the channel bins it takes the vacuum ancilla ports the
/// optics add, and its outputs are exactly the s/d bins of the window.
struct BobSetup {
  SetupKind kind;
  double phi;
  TimeBinWindow window;
  ModeUnitary unitary;
};

namespace detail {

inline ModeLabel upper_port(int bin, const TimeBinWindow& w) {
  return w.contains(bin) ? ModeLabel::input(bin) : ModeLabel::abstract("mz.vac_upper", bin);
}

/// Channel bins plus the vacuum ancilla ports, shared by every setup kind.
inline std::vector<ModeLabel> setup_inputs(const TimeBinWindow& w) {
  std::vector<ModeLabel> in;
  for (int b = w.first_output_bin(); b <= w.last_output_bin(); ++b) {
    in.push_back(upper_port(b, w));
    in.push_back(ModeLabel::abstract("mz.vac_lower", b));
  }
  return in;
}

inline ModeUnitary then(const ModeUnitary& acc, const ModeUnitary& element) {
  return compose(embed(element, acc.outputs()), acc);
}

}  // namespace detail

/// Mach-Zehnder time-bin transform, composed stage by stage: the first splitter
/// per bin, the phase on the long arm, a one-bin delay of the long arm, and the
/// second splitter per bin (short arm transmits to s, reflects to d).
///
/// The long-arm slot of the last output bin only ever carries ancilla vacuum;
/// the delay wraps it onto the first bin so the whole map stays a permutation.
inline BobSetup build_mach_zehnder(double phi, TimeBinWindow window, double reflection_phase = kReflectionPhase) {
  window.validate();
  const int lo = window.first_output_bin();
  const int hi = window.last_output_bin();
  auto short_arm = [](int b) { return ModeLabel::abstract("mz.short", b); };
  auto long_arm = [](int b) { return ModeLabel::abstract("mz.long", b); };
  auto delayed = [](int b) { return ModeLabel::abstract("mz.delayed", b); };

  ModeUnitary u = identity_unitary(detail::setup_inputs(window));
  for (int b = lo; b <= hi; ++b) {
    u = detail::then(u, beam_splitter(detail::upper_port(b, window), ModeLabel::abstract("mz.vac_lower", b),
                                      short_arm(b), long_arm(b), reflection_phase));
  }
  for (int b = lo; b <= hi; ++b) u = detail::then(u, phase_shifter(phi, long_arm(b)));
  std::vector<std::pair<ModeLabel, ModeLabel>> delay;
  for (int b = lo; b <= hi; ++b) delay.emplace_back(long_arm(b), delayed(b == hi ? lo : b + 1));
  u = detail::then(u, mode_map(delay));
  for (int b = lo; b <= hi; ++b) {
    u = detail::then(u, beam_splitter(short_arm(b), delayed(b), ModeLabel::straight(b), ModeLabel::down(b),
                                      reflection_phase));
  }
  return BobSetup{SetupKind::mach_zehnder, phi, window, std::move(u)};
}

/// z-basis setup without an interferometer: t'_0 -> d_1 and t'_1 -> s_1, so the
/// bit-value modes coincide with the interferometric setups. Other bins land on
/// modes no z-basis detector watches (t'_i -> d_{i+1} for i <= 0, s_i for i >= 1);
/// ancilla ports fill the remaining outputs in canonical order.
inline BobSetup build_native_z(TimeBinWindow window) {
  window.validate();
  std::vector<std::pair<ModeLabel, ModeLabel>> map;
  std::set<ModeLabel> used;
  for (int b : window.input_bins()) {
    auto target = b <= 0 ? ModeLabel::down(b + 1) : ModeLabel::straight(b);
    map.emplace_back(ModeLabel::input(b), target);
    used.insert(target);
  }
  std::vector<ModeLabel> free_outputs;
  for (const auto& m : window.output_modes()) {
    if (!used.count(m)) free_outputs.push_back(m);
  }
  std::set<ModeLabel> ancillas;
  for (const auto& m : detail::setup_inputs(window)) {
    if (m.kind == ModeKind::abstract) ancillas.insert(m);
  }
  auto out = free_outputs.begin();
  for (const auto& a : ancillas) map.emplace_back(a, *out++);
  return BobSetup{SetupKind::native_z, 0.0, window, mode_map(map)};
}

/// Rejects any state mode that is not a channel bin inside the window.
inline void check_in_window(const BobSetup& setup, const StateVector& state) {
  for (const auto& [basis, _] : state.amplitudes()) {
    for (const auto& [m, __] : basis.occupations()) {
      if (m.kind != ModeKind::input_bin || !setup.window.contains(m.bin)) {
        throw Error("mode " + to_string(m) + " is outside the setup window [" +
                    std::to_string(setup.window.first_input_bin) + ", " +
                    std::to_string(setup.window.last_input_bin) + "]");
      }
    }
  }
}

inline StateVector evolve_in_setup(const BobSetup& setup, const StateVector& state, int cap = kDefaultPhotonCap) {
  check_in_window(setup, state);
  return evolve(state, setup.unitary, cap);
}

inline StateVector evolve_two_photon(const BobSetup& setup, const StateVector& state) {
  if (state.is_zero() || state.photon_numbers() != std::set<int>{2}) {
    throw Error("two-photon evolution requires a state with exactly 2 photons");
  }
  return evolve_in_setup(setup, state, 2);
}

/// Single-photon image of the channel pulse t'_bin.
inline StateVector single_photon_image(const BobSetup& setup, int bin) {
  return evolve_in_setup(setup, StateVector::single_photon(ModeLabel::input(bin)), 1);
}

/// beta(k, j) = <j| U_B |t'_k> on the single-photon subspace.
inline Matrix beta_matrix(const BobSetup& setup, const std::vector<int>& input_bins,
                          const std::vector<ModeLabel>& output_modes) {
  Matrix beta(static_cast<Eigen::Index>(input_bins.size()), static_cast<Eigen::Index>(output_modes.size()));
  for (std::size_t k = 0; k < input_bins.size(); ++k) {
    if (!setup.window.contains(input_bins[k])) {
      throw Error("input bin t'" + std::to_string(input_bins[k]) + " is outside the setup window");
    }
    for (std::size_t j = 0; j < output_modes.size(); ++j) {
      beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          setup.unitary.entry(output_modes[j], ModeLabel::input(input_bins[k]));
    }
  }
  return beta;
}

/// The part of the channel input space that can reach the measured modes.
struct ReversedSpace {
  std::vector<StateVector> basis;     // orthonormal single-photon states over channel bins
  std::vector<int> relevant_bins;     // bins with nonzero projection
  std::vector<int> irrelevant_bins;   // bins that can never influence the measured modes
  bool includes_vacuum = true;        // |V> always maps to |V>
};

/// Pulls every measured mode back through U_B^dag, projects onto the channel
/// bins, and returns an orthonormal basis of their span (Gram-Schmidt in
/// measured-mode order).
inline ReversedSpace reversed_space(const BobSetup& setup, const std::vector<ModeLabel>& measured_modes) {
  const auto bins = setup.window.input_bins();
  ReversedSpace out;
  std::vector<Vector> kept;
  std::set<int> relevant;
  for (const auto& j : measured_modes) {
    if (!setup.unitary.output_index(j)) throw Error("measured mode " + to_string(j) + " is not a setup output");
    Vector v(static_cast<Eigen::Index>(bins.size()));
    for (std::size_t k = 0; k < bins.size(); ++k) {
      v(static_cast<Eigen::Index>(k)) = std::conj(setup.unitary.entry(j, ModeLabel::input(bins[k])));
      if (std::abs(v(static_cast<Eigen::Index>(k))) >= kZeroTolerance) relevant.insert(bins[k]);
    }
    for (const auto& q : kept) v -= q * q.dot(v);
    for (const auto& q : kept) v -= q * q.dot(v);
    const double n = v.norm();
    if (n < kZeroTolerance) continue;
    kept.push_back(v / n);
  }
  for (const auto& q : kept) {
    StateVector::Amplitudes amps;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      amps.emplace(FockBasisState::single(ModeLabel::input(bins[k])), q(static_cast<Eigen::Index>(k)));
    }
    std::set<ModeLabel> universe;
    for (int b : bins) universe.insert(ModeLabel::input(b));
    out.basis.emplace_back(std::move(amps), std::move(universe));
  }
  for (int b : bins) (relevant.count(b) ? out.relevant_bins : out.irrelevant_bins).push_back(b);
  return out;
}

}  // namespace iqkd
