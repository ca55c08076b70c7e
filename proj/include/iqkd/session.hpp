// Monte-Carlo QKD sessions: Alice's choices, Eve's isometry, Bob's sampled
// detection, sifting, and Eve's per-round Helstrom guess.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "iqkd/analysis.hpp"
#include "iqkd/attack.hpp"
#include "iqkd/rng.hpp"
#include "iqkd/schemes.hpp"

namespace iqkd {

/// Probabilities closer than this to 0 (or 1) are treated as exact.
inline constexpr double kProbabilityClamp = 1e-12;

inline double clamp_probability(double p) {
  if (p < kProbabilityClamp) return 0.0;
  if (p > 1.0 - kProbabilityClamp) return 1.0;
  return p;
}

struct SessionConfig {
  SchemeDefinition scheme;
  std::optional<AttackIsometry> attack;  // none: the qubit reaches Bob untouched
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  std::map<Basis, double> basis_probabilities;  // empty: uniform over the scheme's bases
  int photon_cap = 1;
  unsigned threads = 1;
};

inline constexpr std::array<Outcome, 4> kAllOutcomes{Outcome::bit0, Outcome::bit1, Outcome::loss, Outcome::invalid};

/// Counts for rounds where Bob used one basis.
struct BasisStats {
  std::uint64_t sent = 0;
  std::uint64_t detected = 0;  // conclusive
  std::uint64_t lost = 0;
  std::uint64_t invalid = 0;
  std::uint64_t sifted = 0;  // matching basis and conclusive
  std::uint64_t errors = 0;
  std::uint64_t sifted_invalid = 0;  // matching basis, invalid outcome
  std::uint64_t eve_correct = 0;     // over sifted rounds
  std::uint64_t mismatched_detected = 0;
  std::uint64_t mismatched_bit0 = 0;
  std::uint64_t mismatched_agree = 0;
  std::uint64_t mismatched_eve_correct = 0;

  std::uint64_t effective_errors() const { return errors + sifted_invalid; }
  std::optional<double> qber() const {
    if (sifted == 0) return std::nullopt;
    return static_cast<double>(errors) / static_cast<double>(sifted);
  }
  std::optional<double> effective_qber() const {
    const auto n = sifted + sifted_invalid;
    if (n == 0) return std::nullopt;
    return static_cast<double>(effective_errors()) / static_cast<double>(n);
  }
  std::optional<double> loss_rate() const {
    if (sent == 0) return std::nullopt;
    return static_cast<double>(lost) / static_cast<double>(sent);
  }
  std::optional<double> eve_accuracy() const {
    if (sifted == 0) return std::nullopt;
    return static_cast<double>(eve_correct) / static_cast<double>(sifted);
  }

  BasisStats& operator+=(const BasisStats& o) {
    sent += o.sent;
    detected += o.detected;
    lost += o.lost;
    invalid += o.invalid;
    sifted += o.sifted;
    errors += o.errors;
    sifted_invalid += o.sifted_invalid;
    eve_correct += o.eve_correct;
    mismatched_detected += o.mismatched_detected;
    mismatched_bit0 += o.mismatched_bit0;
    mismatched_agree += o.mismatched_agree;
    mismatched_eve_correct += o.mismatched_eve_correct;
    return *this;
  }
  bool operator==(const BasisStats&) const = default;
};

struct SessionReport {
  std::vector<Basis> bases;
  std::map<Basis, BasisStats> per_basis;  // keyed by Bob's basis
  std::map<std::pair<Basis, Basis>, std::map<Outcome, std::uint64_t>> pairs;  // (Alice, Bob) -> outcome counts
  std::uint64_t rounds = 0;

  std::uint64_t sifted() const {
    std::uint64_t n = 0;
    for (const auto& [_, s] : per_basis) n += s.sifted;
    return n;
  }
  double sift_fraction() const { return rounds ? static_cast<double>(sifted()) / static_cast<double>(rounds) : 0.0; }
  bool operator==(const SessionReport&) const = default;
};

/// One reachable outcome for a given (Alice state, Bob basis).
struct OutcomeEntry {
  OutcomePattern pattern;
  Outcome outcome;
  double probability;
  double eve_guess0;  // P(Eve guesses bit 0 | this outcome); 1/2 outside conclusive outcomes
};

/// Inverse-CDF draw over entries in their stored (canonical) order.
inline std::size_t sample_index(const std::vector<OutcomeEntry>& entries, double u) {
  double cum = 0.0;
  std::size_t last = entries.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].probability <= 0.0) continue;
    cum += entries[i].probability;
    last = i;
    if (u < cum) return i;
  }
  if (last == entries.size()) throw Error("cannot sample from an empty distribution");
  return last;
}

/// Draws a pattern from a distribution that must sum to 1 within 1e-9.
inline OutcomePattern sample_outcome(const PatternDistribution& dist, double u) {
  double total = 0.0;
  for (const auto& [p, prob] : dist) {
    if (!(prob >= 0.0)) throw Error("malformed distribution: negative or NaN probability");
    total += prob;
  }
  if (std::abs(total - 1.0) >= kZeroTolerance) throw Error("malformed distribution: probabilities sum to " + format_real(total));
  std::vector<OutcomeEntry> entries;
  for (const auto& [p, prob] : dist) entries.push_back({p, Outcome::loss, prob, 0.5});
  return entries[sample_index(entries, u)].pattern;
}

/// Precomputed outcome tables for every (Alice state, Bob basis).
class SessionModel {
 public:
  SessionModel(const SchemeDefinition& def, const AttackIsometry& attack, int cap) {
    const auto bases = def.basis_list();
    for (std::size_t a = 0; a < def.alphabet.size(); ++a) {
      for (auto bob : bases) {
        const auto& bs = def.setup_for(bob);
        auto joint = joint_outcomes(attack, def.alphabet[a].alpha, bs, cap);
        double total = 0.0;
        for (const auto& jo : joint) total += jo.probability();
        if (std::abs(total - 1.0) >= kZeroTolerance) {
          throw Error("outcome probabilities sum to " + format_real(total) + "; is the attack inside the setup window?");
        }
        joint_[{a, bob}] = std::move(joint);
      }
    }
    // Eve's measurement for each (Alice basis, Bob basis): Helstrom between her
    // states conditioned on a conclusive outcome, bit prior 1/2.
    for (std::size_t a = 0; a < def.alphabet.size(); ++a) {
      const auto& alice = def.alphabet[a];
      for (auto bob : bases) {
        const auto& bs = def.setup_for(bob);
        const auto E = static_cast<Eigen::Index>(attack.eve_dim());
        std::array<Matrix, 2> sigma{Matrix::Zero(E, E), Matrix::Zero(E, E)};
        for (std::size_t q = 0; q < def.alphabet.size(); ++q) {
          if (def.alphabet[q].basis != alice.basis) continue;
          for (const auto& jo : joint_.at({q, bob})) {
            if (is_conclusive(bs.model.interpret(jo.pattern))) {
              sigma[static_cast<std::size_t>(def.alphabet[q].bit)] += jo.eve_state;
            }
          }
        }
        const auto [plus, tie] = helstrom_projectors(sigma[0], sigma[1]);
        std::vector<OutcomeEntry> entries;
        for (const auto& jo : joint_.at({a, bob})) {
          const Outcome o = bs.model.interpret(jo.pattern);
          const double p = clamp_probability(jo.probability());
          double g0 = 0.5;
          if (p > 0.0 && is_conclusive(o)) {
            g0 = clamp_probability(((plus * jo.eve_state).trace().real() + 0.5 * (tie * jo.eve_state).trace().real()) /
                                   jo.probability());
          }
          entries.push_back({jo.pattern, o, p, g0});
        }
        table_[{a, bob}] = std::move(entries);
      }
    }
  }

  const std::vector<OutcomeEntry>& entries(std::size_t alice_index, Basis bob) const { return table_.at({alice_index, bob}); }

 private:
  std::map<std::pair<std::size_t, Basis>, std::vector<JointOutcome>> joint_;
  std::map<std::pair<std::size_t, Basis>, std::vector<OutcomeEntry>> table_;
};

namespace detail {

inline std::vector<double> basis_weights(const SessionConfig& cfg) {
  const auto bases = cfg.scheme.basis_list();
  std::vector<double> w;
  if (cfg.basis_probabilities.empty()) return std::vector<double>(bases.size(), 1.0 / static_cast<double>(bases.size()));
  double total = 0.0;
  for (auto b : bases) {
    auto it = cfg.basis_probabilities.find(b);
    if (it == cfg.basis_probabilities.end() || !(it->second > 0.0)) {
      throw Error("basis weight for " + to_string(b) + " must be positive");
    }
    w.push_back(it->second);
    total += it->second;
  }
  if (cfg.basis_probabilities.size() != bases.size()) throw Error("basis weights name a basis the scheme does not use");
  if (std::abs(total - 1.0) >= kZeroTolerance) throw Error("basis weights must sum to 1");
  return w;
}

inline std::size_t pick(const std::vector<double>& weights, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  return weights.size() - 1;
}

// Per-round draw positions in the round's stream.
enum Draw : std::uint64_t { alice_basis = 0, alice_bit = 1, bob_basis = 2, outcome = 3, eve_guess = 4 };

}  // namespace detail

inline SessionReport run_session(const SessionConfig& cfg) {
  if (cfg.rounds == 0) throw Error("rounds must be positive");
  const auto& def = cfg.scheme;
  const auto channel = scheme_channel_basis(def);
  const AttackIsometry attack = cfg.attack ? cfg.attack->embedded(channel) : identity_attack().embedded(channel);
  const SessionModel model(def, attack, cfg.photon_cap);
  const auto bases = def.basis_list();
  const auto weights = detail::basis_weights(cfg);
  std::map<std::pair<Basis, int>, std::size_t> alice_index;
  for (std::size_t a = 0; a < def.alphabet.size(); ++a) alice_index[{def.alphabet[a].basis, def.alphabet[a].bit}] = a;

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    SessionReport part;
    for (std::uint64_t r = begin; r < end; ++r) {
      const RoundStream rs(cfg.seed, r);
      const Basis a_basis = bases[detail::pick(weights, rs.uniform(detail::alice_basis))];
      const int bit = rs.uniform(detail::alice_bit) < 0.5 ? 0 : 1;
      const Basis b_basis = bases[detail::pick(weights, rs.uniform(detail::bob_basis))];
      const auto& entries = model.entries(alice_index.at({a_basis, bit}), b_basis);
      const auto& e = entries[sample_index(entries, rs.uniform(detail::outcome))];
      const int guess = rs.uniform(detail::eve_guess) < e.eve_guess0 ? 0 : 1;

      auto& s = part.per_basis[b_basis];
      ++s.sent;
      ++part.pairs[{a_basis, b_basis}][e.outcome];
      const bool matched = a_basis == b_basis;
      switch (e.outcome) {
        case Outcome::loss: ++s.lost; break;
        case Outcome::invalid:
          ++s.invalid;
          if (matched) ++s.sifted_invalid;
          break;
        case Outcome::bit0:
        case Outcome::bit1: {
          ++s.detected;
          const int bob_bit = e.outcome == Outcome::bit0 ? 0 : 1;
          if (matched) {
            ++s.sifted;
            if (bob_bit != bit) ++s.errors;
            if (guess == bit) ++s.eve_correct;
          } else {
            ++s.mismatched_detected;
            if (bob_bit == 0) ++s.mismatched_bit0;
            if (bob_bit == bit) ++s.mismatched_agree;
            if (guess == bit) ++s.mismatched_eve_correct;
          }
          break;
        }
      }
    }
    return part;
  };

  const unsigned threads = static_cast<unsigned>(std::clamp<std::uint64_t>(cfg.threads, 1, cfg.rounds));
  std::vector<SessionReport> parts(threads);
  if (threads == 1) {
    parts[0] = run_range(0, cfg.rounds);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (cfg.rounds + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t begin = std::min<std::uint64_t>(cfg.rounds, t * chunk);
      const std::uint64_t end = std::min<std::uint64_t>(cfg.rounds, begin + chunk);
      pool.emplace_back([&, t, begin, end] { parts[t] = run_range(begin, end); });
    }
    for (auto& th : pool) th.join();
  }

  SessionReport out;
  out.bases = bases;
  out.rounds = cfg.rounds;
  for (auto b : bases) {
    out.per_basis[b];
    for (auto a : bases) {
      for (auto o : kAllOutcomes) out.pairs[{a, b}][o] = 0;
    }
  }
  for (const auto& p : parts) {
    for (const auto& [b, s] : p.per_basis) out.per_basis[b] += s;
    for (const auto& [k, counts] : p.pairs) {
      for (const auto& [o, n] : counts) out.pairs[k][o] += n;
    }
  }
  return out;
}

}  // namespace iqkd
