// JSON and CSV serialization for states, unitaries, schemes, attacks,
// analysis results and session reports.

#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "iqkd/analysis.hpp"
#include "iqkd/attack.hpp"
#include "iqkd/fock.hpp"
#include "iqkd/interferometer.hpp"
#include "iqkd/linear_optics.hpp"
#include "iqkd/schemes.hpp"
#include "iqkd/session.hpp"

namespace iqkd {

using json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so reports do not carry floating-point dust.
inline double tidy(double x) {
  if (std::abs(x) < 1e-15) return 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double y = std::strtod(buf, nullptr);
  return y == 0.0 ? 0.0 : y;
}

inline json complex_json(cplx z) { return json::array({tidy(z.real()), tidy(z.imag())}); }

/// Full precision, for values that must read back exactly.
inline json exact_complex_json(cplx z) {
  return json::array({z.real() == 0.0 ? 0.0 : z.real(), z.imag() == 0.0 ? 0.0 : z.imag()});
}

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error("expected a complex number as [re, im], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json labels_json(const std::vector<ModeLabel>& modes) {
  json out = json::array();
  for (const auto& m : modes) out.push_back(to_string(m));
  return out;
}

inline json labels_json(const std::set<ModeLabel>& modes) { return labels_json(std::vector<ModeLabel>(modes.begin(), modes.end())); }

inline std::set<ModeLabel> labels_from_json(const json& j) {
  std::set<ModeLabel> out;
  for (const auto& x : j) out.insert(parse_mode_label(x.get<std::string>()));
  return out;
}

inline json state_json(const StateVector& v) {
  json terms = json::array();
  for (const auto& [b, amp] : v.amplitudes()) {
    terms.push_back({{"basis", to_string(b, v.universe())}, {"amplitude", complex_json(amp)}});
  }
  return {{"modes", labels_json(v.universe())}, {"terms", terms}};
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline json unitary_json(const ModeUnitary& u) {
  return {{"inputs", labels_json(u.inputs())}, {"outputs", labels_json(u.outputs())}, {"matrix", matrix_json(u.matrix())}};
}

// ---- scheme records -------------------------------------------------------

inline json scheme_record(const SchemeDefinition& def) {
  json bases = json::array();
  for (const auto& bs : def.bases) {
    bases.push_back({{"basis", to_string(bs.basis)},
                     {"setup", to_string(bs.setup.kind)},
                     {"phi", bs.setup.phi},
                     {"window", json::array({bs.setup.window.first_input_bin, bs.setup.window.last_input_bin})},
                     {"detector", to_string(bs.model.kind())},
                     {"windows", labels_json(bs.model.windows())},
                     {"bit0", labels_json(bs.model.bit0_windows())},
                     {"bit1", labels_json(bs.model.bit1_windows())}});
  }
  return {{"name", to_string(def.name)}, {"bases", bases}};
}

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw Error(where + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace detail

/// Rebuilds a scheme from its record. Setups are rebuilt from kind, phase and
/// window; detector windows and bit assignments are taken as given, which is
/// how variants are expressed.
inline SchemeDefinition scheme_from_record(const json& j) {
  try {
    SchemeDefinition def{parse_scheme_name(detail::field(j, "name", "scheme record").get<std::string>()), {}, {}};
    for (const auto& b : detail::field(j, "bases", "scheme record")) {
      const auto basis = parse_basis(detail::field(b, "basis", "scheme basis").get<std::string>());
      const auto kind = detail::field(b, "setup", "scheme basis").get<std::string>();
      const auto& w = detail::field(b, "window", "scheme basis");
      if (!w.is_array() || w.size() != 2) throw Error("scheme basis: window must be [first, last]");
      const TimeBinWindow window{w[0].get<int>(), w[1].get<int>()};
      BobSetup setup = kind == "mach-zehnder" ? build_mach_zehnder(detail::field(b, "phi", "scheme basis").get<double>(), window)
                       : kind == "native-z"   ? build_native_z(window)
                                              : throw Error("scheme basis: unknown setup '" + kind + "'");
      const auto detector = parse_detector_kind(b.value("detector", std::string("threshold")));
      MeasurementModel model(labels_from_json(detail::field(b, "windows", "scheme basis")), detector,
                             labels_from_json(detail::field(b, "bit0", "scheme basis")),
                             labels_from_json(detail::field(b, "bit1", "scheme basis")));
      for (const auto& m : model.windows()) {
        if (!setup.unitary.output_index(m)) throw Error("scheme basis: window " + to_string(m) + " is not a setup output");
      }
      for (const auto& existing : def.bases) {
        if (existing.basis == basis) throw Error("scheme record lists basis " + to_string(basis) + " twice");
      }
      def.bases.push_back({basis, std::move(setup), std::move(model)});
    }
    if (def.bases.empty()) throw Error("scheme record has no bases");
    for (const auto& bs : def.bases) {
      def.alphabet.push_back(alice_state(bs.basis, 0));
      def.alphabet.push_back(alice_state(bs.basis, 1));
    }
    def.validate();
    return def;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed scheme record: ") + e.what());
  }
}

// ---- attack records ---------------------------------------------------------

inline json attack_record(const AttackIsometry& a) {
  json basis = json::array();
  for (const auto& c : a.channel_basis()) basis.push_back(to_string(c));
  json vectors = json::array();
  for (int i = 0; i < a.input_dim(); ++i) {
    for (std::size_t k = 0; k < a.channel_basis().size(); ++k) {
      json row = json::array();
      for (Eigen::Index e = 0; e < a.eve_dim(); ++e) row.push_back(exact_complex_json(a.stacked()(a.row(i, k), e)));
      vectors.push_back({{"i", i}, {"k", to_string(a.channel_basis()[k])}, {"eve", row}});
    }
  }
  return {{"name", a.name()},
          {"input_dim", a.input_dim()},
          {"channel_basis", basis},
          {"eve_dim", a.eve_dim()},
          {"vectors", vectors}};
}

/// Reads an attack record. Entries of `vectors` not listed are zero.
inline AttackIsometry attack_from_record(const json& j) {
  try {
    const int input_dim = j.value("input_dim", 2);
    const int eve_dim = detail::field(j, "eve_dim", "attack record").get<int>();
    if (eve_dim < 1) throw Error("attack record: eve_dim must be positive");
    std::vector<ChannelState> basis;
    for (const auto& c : detail::field(j, "channel_basis", "attack record")) basis.push_back(parse_channel_state(c.get<std::string>()));
    Matrix v = Matrix::Zero(static_cast<Eigen::Index>(input_dim * basis.size()), eve_dim);
    for (const auto& entry : detail::field(j, "vectors", "attack record")) {
      const int i = detail::field(entry, "i", "attack vector").get<int>();
      const auto k = parse_channel_state(detail::field(entry, "k", "attack vector").get<std::string>());
      const auto& eve = detail::field(entry, "eve", "attack vector");
      if (i < 0 || i >= input_dim) throw Error("attack vector: index i out of range");
      std::optional<std::size_t> kk;
      for (std::size_t q = 0; q < basis.size(); ++q) {
        if (basis[q] == k) kk = q;
      }
      if (!kk) throw Error("attack vector: channel state " + to_string(k) + " is not in channel_basis");
      if (!eve.is_array() || static_cast<int>(eve.size()) != eve_dim) throw Error("attack vector: expected eve_dim components");
      for (int e = 0; e < eve_dim; ++e) {
        v(static_cast<Eigen::Index>(i * basis.size() + *kk), e) = complex_from_json(eve[static_cast<std::size_t>(e)]);
      }
    }
    return AttackIsometry(j.value("name", std::string("file")), basis, v, input_dim);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed attack record: ") + e.what());
  }
}

// ---- analysis ---------------------------------------------------------------

inline json eve_information_json(const EveInformation& e) {
  return {{"basis", to_string(e.basis)},
          {"detection_probability", tidy(e.detection_probability)},
          {"guess_probability", e.guess_probability ? json(tidy(*e.guess_probability)) : json(nullptr)},
          {"bits", tidy(e.bits)}};
}

inline json outcome_rates_json(const std::map<Outcome, double>& rates) {
  json out = json::object();
  for (const auto& [o, p] : rates) out[to_string(o)] = tidy(p);
  return out;
}

inline json attack_profile_json(const AttackProfile& p) {
  json info = json::array();
  for (const auto& e : p.information) info.push_back(eve_information_json(e));
  json rates = json::object();
  for (const auto& [b, r] : p.rates) rates[to_string(b)] = outcome_rates_json(r);
  json err = json::object();
  for (const auto& [b, e] : p.error_probability) err[to_string(b)] = tidy(e);
  return {{"eve_information", info},
          {"outcome_rates", rates},
          {"error_probability", err},
          {"loss_asymmetry", tidy(p.loss_asymmetry)},
          {"loss_asymmetry_flagged", p.loss_asymmetry_flagged}};
}

inline json constraints_json(const ConstraintSystem& cs) {
  json cols = json::array();
  for (const auto& c : cs.columns) cols.push_back(to_string(c));
  json rows = json::array();
  for (std::size_t r = 0; r < cs.rows.size(); ++r) {
    const auto& row = cs.rows[r];
    rows.push_back({{"alice", to_string(row.alice_basis) + std::to_string(row.alice_bit)},
                    {"outcome", to_string(row.outcome)},
                    {"read_as", to_string(row.kind)},
                    {"coefficients", vector_json(cs.matrix.row(static_cast<Eigen::Index>(r)).transpose())}});
  }
  return {{"columns", cols}, {"rows", rows}};
}

inline json robustness_json(const SchemeDefinition& def, const RobustnessReport& r) {
  json pivots = json::array();
  for (const auto& p : r.space.pivots) {
    pivots.push_back({{"row", p.row}, {"column", p.column}, {"value", complex_json(p.value)}});
  }
  json basis = json::array();
  for (const auto& v : r.space.basis) basis.push_back(vector_json(v));
  json nonfwd = json::array();
  for (const auto& v : r.nonforwarding) nonfwd.push_back(vector_json(v));
  json out = {{"scheme", scheme_record(def)},
              {"constraints", constraints_json(r.constraints)},
              {"elimination", {{"pivot_threshold", "1e-9 x largest entry"}, {"pivots", pivots}}},
              {"rank", r.space.rank},
              {"nullity", r.space.nullity},
              {"nullspace_basis", basis},
              {"max_residual", tidy(r.residual)},
              {"structural_check", {{"robust", r.structural_robust}, {"nonforwarding_directions", nonfwd}}},
              {"witness_search", {{"found", r.witness.has_value()}}},
              {"verdict", to_string(r.verdict)}};
  if (r.verdict == Verdict::robust) out["reduction"] = r.reduction;
  if (r.witness) {
    out["witness"] = attack_record(*r.witness);
    out["witness_profile"] = attack_profile_json(*r.witness_profile);
  }
  return out;
}

inline json two_photon_json(const TwoPhotonSolution& s) {
  json rays = json::array();
  for (const auto& r : s.rays) rays.push_back(state_json(r));
  json forbidden = json::array();
  for (const auto& f : s.forbidden) forbidden.push_back(to_string(f));
  return {{"forbidden_outputs", forbidden}, {"constraint_matrix", matrix_json(s.constraints)}, {"allowed_rays", rays}};
}

// ---- sessions ---------------------------------------------------------------

inline json basis_stats_json(Basis b, const BasisStats& s) {
  auto ratio = [](std::uint64_t n, std::uint64_t d) -> json {
    return d ? json(static_cast<double>(n) / static_cast<double>(d)) : json(nullptr);
  };
  return {{"basis", to_string(b)},
          {"sent", s.sent},
          {"detected", s.detected},
          {"lost", s.lost},
          {"invalid", s.invalid},
          {"loss_rate", optional_json(s.loss_rate())},
          {"sifted", s.sifted},
          {"errors", s.errors},
          {"qber", optional_json(s.qber())},
          {"sifted_invalid", s.sifted_invalid},
          {"effective_errors", s.effective_errors()},
          {"effective_qber", optional_json(s.effective_qber())},
          {"eve_correct", s.eve_correct},
          {"eve_guess_accuracy", optional_json(s.eve_accuracy())},
          {"mismatched",
           {{"detected", s.mismatched_detected},
            {"bit0", s.mismatched_bit0},
            {"bit0_fraction", ratio(s.mismatched_bit0, s.mismatched_detected)},
            {"agree", s.mismatched_agree},
            {"agree_fraction", ratio(s.mismatched_agree, s.mismatched_detected)},
            {"eve_correct", s.mismatched_eve_correct}}}};
}

inline json session_json(const SessionReport& r) {
  json per = json::array();
  for (auto b : r.bases) per.push_back(basis_stats_json(b, r.per_basis.at(b)));
  json pairs = json::array();
  for (const auto& [k, counts] : r.pairs) {
    json row = {{"alice", to_string(k.first)}, {"bob", to_string(k.second)}};
    for (const auto& [o, n] : counts) row[to_string(o)] = n;
    pairs.push_back(row);
  }
  return {{"per_basis", per},
          {"pairs", pairs},
          {"overall", {{"rounds", r.rounds}, {"sifted", r.sifted()}, {"sift_fraction", r.sift_fraction()}}},
          {"notes",
           json::array({"bases are Bob's; counts in per_basis are over rounds where Bob used that basis",
                        "eve_guess_accuracy counts only sifted rounds (matching bases, conclusive outcome)",
                        "effective_errors adds matching-basis invalid outcomes to errors"})}};
}

/// One row per basis, for plotting.
inline std::string session_csv(const SessionReport& r) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& x) { return x ? format_real(*x) : std::string(); };
  out << "basis,sent,detected,lost,invalid,loss_rate,sifted,errors,qber,effective_errors,effective_qber,eve_correct,"
         "eve_guess_accuracy\n";
  for (auto b : r.bases) {
    const auto& s = r.per_basis.at(b);
    out << to_string(b) << ',' << s.sent << ',' << s.detected << ',' << s.lost << ',' << s.invalid << ','
        << opt(s.loss_rate()) << ',' << s.sifted << ',' << s.errors << ',' << opt(s.qber()) << ','
        << s.effective_errors() << ',' << opt(s.effective_qber()) << ',' << s.eve_correct << ','
        << opt(s.eve_accuracy()) << '\n';
  }
  return out.str();
}

}  // namespace iqkd
