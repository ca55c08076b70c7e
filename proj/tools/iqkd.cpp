// iqkd: command-line front end for scheme analysis, session simulation and
// the fixture check.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "iqkd/iqkd.hpp"

namespace {

using iqkd::json;

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kError = 1, kFixtureFailure = 2, kNonrobust = 3 };

struct Options {
  std::string scheme;
  std::string scheme_file;
  std::string out;
  std::string format = "doc";
  int photon_cap = 1;
  std::string detector = "threshold";
  // simulate
  std::string attack = "identity";
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string csv;
  std::string basis_weights;
  // verify
  double reflection_phase = iqkd::kReflectionPhase;
  // replay
  std::string report;
  json overrides;      // scheme record taken from a manifest
  json attack_record;  // file-backed attack taken from a manifest
};

std::string timestamp_now() {
  std::time_t t{};
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw iqkd::Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw iqkd::Error(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw iqkd::Error("cannot write " + path);
  out << text;
}

/// --out wins; otherwise IQKD_OUTPUT_DIR/<stem>.json; otherwise none (stdout).
std::optional<std::string> output_path(const Options& o, const std::string& stem) {
  if (!o.out.empty()) return o.out;
  if (const char* dir = std::getenv("IQKD_OUTPUT_DIR"); dir && *dir) {
    return (std::filesystem::path(dir) / (stem + ".json")).string();
  }
  return std::nullopt;
}

void emit(const Options& o, const std::string& stem, const json& doc, const std::string& table) {
  const std::string text = doc.dump(2) + "\n";
  const auto path = output_path(o, stem);
  if (path) write_file(*path, text);
  if (o.format == "table") {
    std::cout << table;
  } else if (!path) {
    std::cout << text;
  }
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string fmt(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string join(const std::set<iqkd::ModeLabel>& modes) {
  std::string out;
  for (const auto& m : modes) out += (out.empty() ? "" : ",") + iqkd::to_string(m);
  return out;
}

iqkd::SchemeOptions scheme_options(const Options& o) {
  iqkd::SchemeOptions so;
  so.detector = iqkd::parse_detector_kind(o.detector);
  return so;
}

/// The scheme to use plus the override record to echo in the manifest.
std::pair<iqkd::SchemeDefinition, json> resolve_scheme(const Options& o) {
  if (!o.overrides.is_null() || !o.scheme_file.empty()) {
    auto def = iqkd::scheme_from_record(o.overrides.is_null() ? read_json_file(o.scheme_file) : o.overrides);
    if (!o.scheme.empty() && iqkd::parse_scheme_name(o.scheme) != def.name) {
      throw iqkd::Error("scheme file describes " + iqkd::to_string(def.name) + ", not " + o.scheme);
    }
    json record = iqkd::scheme_record(def);
    return {std::move(def), std::move(record)};
  }
  if (o.scheme.empty()) throw iqkd::Error("a scheme name is required (see list-schemes)");
  return {iqkd::scheme(iqkd::parse_scheme_name(o.scheme), scheme_options(o)), nullptr};
}

void check_common(const Options& o) {
  if (o.format != "doc" && o.format != "table") throw iqkd::Error("--format must be doc or table");
  if (o.photon_cap != 1 && o.photon_cap != 2) throw iqkd::Error("--photon-cap must be 1 or 2");
  iqkd::parse_detector_kind(o.detector);
}

// ---- list-schemes -----------------------------------------------------------

int cmd_list_schemes(const Options& o) {
  check_common(o);
  json list = json::array();
  std::ostringstream table;
  table << pad("scheme", 20) << pad("basis", 7) << pad("setup", 22) << pad("windows", 28) << pad("bit 0", 10)
        << pad("bit 1", 10) << "constraint columns\n";
  for (auto n : iqkd::kAllSchemes) {
    const auto def = iqkd::scheme(n, scheme_options(o));
    const auto cs = iqkd::build_constraints(def);
    json entry = iqkd::scheme_record(def);
    json cols = json::array();
    for (const auto& c : cs.columns) cols.push_back(iqkd::to_string(c));
    entry["constraint_columns"] = cols;
    entry["constraint_rows"] = cs.rows.size();
    list.push_back(entry);
    bool first = true;
    for (const auto& bs : def.bases) {
      std::string setup = iqkd::to_string(bs.setup.kind);
      if (bs.setup.kind == iqkd::SetupKind::mach_zehnder) setup += bs.setup.phi == 0.0 ? " phi=0" : " phi=pi/2";
      table << pad(first ? iqkd::to_string(n) : "", 20) << pad(iqkd::to_string(bs.basis), 7) << pad(setup, 22)
            << pad(join(bs.model.windows()), 28) << pad(join(bs.model.bit0_windows()), 10)
            << pad(join(bs.model.bit1_windows()), 10) << (first ? std::to_string(cs.columns.size()) : "") << "\n";
      first = false;
    }
  }
  json doc = {{"manifest",
               {{"tool", "iqkd"},
                {"version", kVersion},
                {"command", "list-schemes"},
                {"detector", o.detector},
                {"timestamp", timestamp_now()}}},
              {"schemes", list}};
  emit(o, "list-schemes", doc, table.str());
  return kOk;
}

// ---- analyze ----------------------------------------------------------------

json analysis_document(const Options& o, const json& manifest) {
  const auto [def, overrides] = resolve_scheme(o);
  const auto r = iqkd::robustness_verdict(def);
  json doc = {{"manifest", manifest}, {"analysis", iqkd::robustness_json(def, r)}};

  // Canned attacks that fit the scheme's channel basis.
  const auto channel = iqkd::scheme_channel_basis(def);
  std::vector<std::string> specs{"identity", "blocking:0.5"};
  for (auto b : def.basis_list()) specs.push_back("measure-resend:" + iqkd::to_string(b));
  specs.push_back("fake-time-bin");
  json attacks = json::array();
  for (const auto& spec : specs) {
    const auto a = iqkd::canned_attack(spec);
    json entry = {{"attack", spec}};
    try {
      const auto embedded = a.embedded(channel);
      entry["profile"] = iqkd::attack_profile_json(iqkd::profile_attack(embedded, def));
    } catch (const iqkd::Error& e) {
      entry["skipped"] = e.what();
    }
    attacks.push_back(entry);
  }
  doc["attacks"] = attacks;

  if (o.photon_cap == 2) {
    json tp = json::object();
    if (def.name == iqkd::SchemeName::xy_bb84 && overrides.is_null()) {
      for (const auto& a : def.alphabet) {
        tp[iqkd::to_string(a.basis) + std::to_string(a.bit)] =
            iqkd::two_photon_json(iqkd::two_photon_zero_error_states(a, def));
      }
    } else {
      tp["skipped"] = "two-photon analysis is available for the built-in xy-BB84 scheme only";
    }
    doc["two_photon"] = tp;
  }
  doc["notes"] = json::array({"Eve information is counted on rounds Bob detects conclusively; blocked rounds are "
                              "excluded because they never enter the key",
                              "loss-rate spread across bases above 0.05 is flagged, no abort policy is applied"});
  return doc;
}

json analyze_manifest(const Options& o, const std::string& timestamp) {
  const auto [def, overrides] = resolve_scheme(o);
  return {{"tool", "iqkd"},
          {"version", kVersion},
          {"command", "analyze"},
          {"scheme", iqkd::to_string(def.name)},
          {"photon_cap", o.photon_cap},
          {"detector", o.detector},
          {"timestamp", timestamp},
          {"overrides", overrides}};
}

std::string analysis_table(const json& doc) {
  const auto& a = doc.at("analysis");
  std::ostringstream t;
  t << "scheme   " << a.at("scheme").at("name").get<std::string>() << "\n";
  t << "rows     " << a.at("constraints").at("rows").size() << "\n";
  t << "columns  " << a.at("constraints").at("columns").size() << "\n";
  t << "rank     " << a.at("rank").get<int>() << "\n";
  t << "nullity  " << a.at("nullity").get<int>() << "\n";
  t << "verdict  " << a.at("verdict").get<std::string>() << "\n";
  if (a.contains("witness")) {
    t << "witness eve information:\n";
    for (const auto& e : a.at("witness_profile").at("eve_information")) {
      t << "  " << e.at("basis").get<std::string>() << "  detection " << fmt(e.at("detection_probability").get<double>())
        << "  guess " << (e.at("guess_probability").is_null() ? std::string("-") : fmt(e.at("guess_probability").get<double>()))
        << "  bits " << fmt(e.at("bits").get<double>()) << "\n";
    }
  }
  return t.str();
}

int finish_analysis(const Options& o, const json& doc) {
  const auto stem = "analyze-" + doc.at("manifest").at("scheme").get<std::string>();
  emit(o, stem, doc, analysis_table(doc));
  const auto verdict = doc.at("analysis").at("verdict").get<std::string>();
  if (verdict == "robust") return kOk;
  if (verdict == "nonrobust") return kNonrobust;
  std::cerr << "iqkd: structural and witness checks disagree; verdict inconclusive\n";
  return kError;
}

int cmd_analyze(const Options& o) {
  check_common(o);
  const json manifest = analyze_manifest(o, timestamp_now());
  return finish_analysis(o, analysis_document(o, manifest));
}

// ---- simulate ---------------------------------------------------------------

std::map<iqkd::Basis, double> parse_weights(const std::string& text) {
  std::map<iqkd::Basis, double> out;
  if (text.empty()) return out;
  for (auto part : iqkd::detail::split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw iqkd::Error("basis weight must be <basis>=<weight>");
    const std::string value(part.substr(eq + 1));
    char* end = nullptr;
    const double w = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) throw iqkd::Error("malformed basis weight '" + value + "'");
    out[iqkd::parse_basis(part.substr(0, eq))] = w;
  }
  return out;
}

json weights_json(const std::map<iqkd::Basis, double>& w) {
  if (w.empty()) return nullptr;
  json out = json::object();
  for (const auto& [b, x] : w) out[iqkd::to_string(b)] = x;
  return out;
}

/// Resolves the attack spec; file-backed attacks are embedded in the manifest.
std::pair<iqkd::AttackIsometry, json> resolve_attack(const std::string& spec, const json& embedded) {
  if (spec.starts_with("file:")) {
    const json record = embedded.is_null() ? read_json_file(spec.substr(5)) : embedded;
    return {iqkd::attack_from_record(record), record};
  }
  return {iqkd::canned_attack(spec), nullptr};
}

json simulate_manifest(const Options& o, const std::string& timestamp) {
  const auto [def, overrides] = resolve_scheme(o);
  const auto [attack, record] = resolve_attack(o.attack, o.attack_record);
  json m = {{"tool", "iqkd"},
            {"version", kVersion},
            {"command", "simulate"},
            {"scheme", iqkd::to_string(def.name)},
            {"attack", o.attack}};
  if (!record.is_null()) m["attack_record"] = record;
  m["rounds"] = o.rounds;
  m["seed"] = o.seed;
  m["photon_cap"] = o.photon_cap;
  m["detector"] = o.detector;
  m["basis_weights"] = weights_json(parse_weights(o.basis_weights));
  m["timestamp"] = timestamp;
  m["overrides"] = overrides;
  return m;
}

std::string session_table(const json& doc) {
  std::ostringstream t;
  t << pad("basis", 7) << pad("sent", 9) << pad("detected", 10) << pad("loss", 9) << pad("sifted", 9) << pad("errors", 8)
    << pad("qber", 9) << "eve accuracy\n";
  for (const auto& b : doc.at("session").at("per_basis")) {
    auto opt = [&](const char* key) {
      return b.at(key).is_null() ? std::string("-") : fmt(b.at(key).get<double>());
    };
    t << pad(b.at("basis").get<std::string>(), 7) << pad(std::to_string(b.at("sent").get<std::uint64_t>()), 9)
      << pad(std::to_string(b.at("detected").get<std::uint64_t>()), 10) << pad(opt("loss_rate"), 9)
      << pad(std::to_string(b.at("sifted").get<std::uint64_t>()), 9)
      << pad(std::to_string(b.at("errors").get<std::uint64_t>()), 8) << pad(opt("qber"), 9) << opt("eve_guess_accuracy")
      << "\n";
  }
  return t.str();
}

int run_simulation(const Options& o, const json& manifest) {
  if (o.rounds == 0) throw iqkd::Error("--rounds must be positive");
  auto [def, overrides] = resolve_scheme(o);
  auto [attack, record] = resolve_attack(o.attack, manifest.value("attack_record", json(nullptr)));
  iqkd::SessionConfig cfg{std::move(def), std::move(attack), o.rounds, o.seed, parse_weights(o.basis_weights),
                          o.photon_cap, o.threads};
  const auto report = iqkd::run_session(cfg);
  json doc = {{"manifest", manifest}, {"session", iqkd::session_json(report)}};
  const auto stem = "simulate-" + manifest.at("scheme").get<std::string>() + "-seed" + std::to_string(o.seed);
  emit(o, stem, doc, session_table(doc));
  if (!o.csv.empty()) write_file(o.csv, iqkd::session_csv(report));
  return kOk;
}

int cmd_simulate(const Options& o) {
  check_common(o);
  return run_simulation(o, simulate_manifest(o, timestamp_now()));
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const Options& o) {
  const auto results = iqkd::run_fixtures({o.reflection_phase});
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.anchor << "  (max deviation " << r.deviation << ")";
    if (!r.passed && !r.detail.empty()) std::cout << "  " << r.detail;
    std::cout << "\n";
    if (!r.passed) ++failed;
  }
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " fixtures passed\n";
  if (failed) {
    std::cerr << "iqkd: failing fixtures:";
    for (const auto& r : results) {
      if (!r.passed) std::cerr << " [" << r.anchor << "]";
    }
    std::cerr << "\n";
    return kFixtureFailure;
  }
  return kOk;
}

// ---- replay -----------------------------------------------------------------

/// Re-runs the command recorded in a report's manifest.
int cmd_replay(const Options& cli) {
  const json doc = read_json_file(cli.report);
  if (!doc.contains("manifest")) throw iqkd::Error(cli.report + " has no manifest");
  const json& m = doc.at("manifest");
  Options o;
  o.out = cli.out;
  o.format = cli.format;
  o.threads = cli.threads;
  const auto command = m.at("command").get<std::string>();
  o.scheme = m.at("scheme").get<std::string>();
  o.photon_cap = m.at("photon_cap").get<int>();
  o.detector = m.at("detector").get<std::string>();
  o.overrides = m.at("overrides");
  const auto timestamp = m.at("timestamp").get<std::string>();
  if (command == "analyze") {
    return finish_analysis(o, analysis_document(o, analyze_manifest(o, timestamp)));
  }
  if (command == "simulate") {
    o.attack = m.at("attack").get<std::string>();
    o.rounds = m.at("rounds").get<std::uint64_t>();
    o.seed = m.at("seed").get<std::uint64_t>();
    if (!m.at("basis_weights").is_null()) {
      std::string w;
      for (const auto& [k, v] : m.at("basis_weights").items()) w += (w.empty() ? "" : ",") + k + "=" + iqkd::format_real(v.get<double>());
      o.basis_weights = w;
    }
    o.attack_record = m.value("attack_record", json(nullptr));
    return run_simulation(o, simulate_manifest(o, timestamp));
  }
  throw iqkd::Error("cannot replay command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bin QKD interferometer analyzer and session simulator"};
  app.set_version_flag("--version", kVersion);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write the report document here (default: $IQKD_OUTPUT_DIR or stdout)");
    sub->add_option("--format", o.format, "doc: JSON document; table: human-readable table on stdout")
        ->check(CLI::IsMember({"doc", "table"}));
  };
  auto add_physics = [&](CLI::App* sub) {
    sub->add_option("--photon-cap", o.photon_cap, "Photon-number cap for Fock evolution")->check(CLI::IsMember({1, 2}));
    sub->add_option("--detector", o.detector, "Detector kind")->check(CLI::IsMember({"threshold", "counter"}));
    sub->add_option("--scheme-file", o.scheme_file, "Scheme record overriding the built-in definition");
  };

  auto* list = app.add_subcommand("list-schemes", "List the built-in schemes");
  add_common(list);
  list->add_option("--detector", o.detector, "Detector kind")->check(CLI::IsMember({"threshold", "counter"}));

  auto* analyze = app.add_subcommand("analyze", "Solve the zero-error constraints and classify a scheme");
  analyze->add_option("scheme", o.scheme, "Scheme name");
  add_common(analyze);
  add_physics(analyze);

  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo session");
  simulate->add_option("scheme", o.scheme, "Scheme name");
  simulate->add_option("--attack", o.attack,
                       "identity | blocking:<p> | measure-resend:<x|y|z> | fake-time-bin | file:<attack.json>");
  simulate->add_option("--rounds", o.rounds, "Number of rounds")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "64-bit seed");
  simulate->add_option("--threads", o.threads, "Worker threads (does not change results)")->check(CLI::PositiveNumber);
  simulate->add_option("--csv", o.csv, "Also write one CSV row per basis here");
  simulate->add_option("--basis-weights", o.basis_weights, "Basis probabilities, e.g. x=0.5,z=0.5 (default uniform)");
  add_common(simulate);
  add_physics(simulate);

  auto* verify = app.add_subcommand("verify", "Check the built-in reference fixtures");
  verify->add_option("--reflection-phase", o.reflection_phase, "Beam-splitter reflection phase in radians (default pi/2)");

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a report's manifest");
  replay->add_option("report", o.report, "Report document")->required();
  replay->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_common(replay);

  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kError;
  }

  try {
    if (*analyze) return cmd_analyze(o);
    if (*simulate) return cmd_simulate(o);
    if (*verify) return cmd_verify(o);
    if (*replay) return cmd_replay(o);
    if (*list) return cmd_list_schemes(o);
    o.format = "table";
    return cmd_list_schemes(o);
  } catch (const std::exception& e) {
    std::cerr << "iqkd: " << e.what() << "\n";
    return kError;
  }
}
