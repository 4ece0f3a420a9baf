#include "scatterguard/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scatterguard/error.hpp"
#include "scatterguard/harness.hpp"
#include "scatterguard/series_io.hpp"
#include "scatterguard/synth.hpp"

namespace scatterguard::cli {

namespace {

using Apply = std::function<void(RunConfig&, const std::string&)>;

struct Setting {
  std::string name;
  std::string help;
  std::string default_value;
  Apply apply;
  bool flag = false;
};

double to_double(const std::string& name, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw UsageError("--" + name + ": expected a number, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& name, const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || end != s.c_str() + s.size())
    throw UsageError("--" + name + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& name, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError("--" + name + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError("--values: empty list item");
    out.push_back(item);
  }
  return out;
}

template <typename F>
auto guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageError("--" + name + ": " + e.what());
  }
}

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<Setting> settings() {
  const RunConfig d;
  const auto& s = d.scenario;
  const auto& p = d.params;
  auto num = [](double v) { return fmt(v, "%.10g"); };
  std::vector<Setting> v = {
      {"in", "input series or report file", "", [](RunConfig& c, const std::string& x) { c.in = x; }},
      {"out", "output file", "", [](RunConfig& c, const std::string& x) { c.out = x; }},
      {"seed", "master seed (falls back to SCATTERGUARD_SEED)", std::to_string(d.seed),
       [](RunConfig& c, const std::string& x) { c.seed = to_u64("seed", x); }},
      {"trials", "trials per sweep point", std::to_string(d.trials),
       [](RunConfig& c, const std::string& x) {
         c.trials = to_u64("trials", x);
         if (c.trials < 1) throw UsageError("--trials must be >= 1");
       }},
      {"threads", "worker threads for trials (0 = all cores)", "0",
       [](RunConfig& c, const std::string& x) { c.threads = static_cast<unsigned>(to_u64("threads", x)); }},
      {"axis", "sweep axis: distance|direction|movements|dynamics|position|band|traffic|angle|latency", "",
       [](RunConfig& c, const std::string& x) {
         guarded("axis", [&] { return sweep_axis_from_string(x); });
         c.axis = x;
       }},
      {"values", "comma-separated sweep values (latency: segment lengths in ms)", "",
       [](RunConfig& c, const std::string& x) { c.values = split_list(x); }},
      {"band", "carrier band: 900|2400", to_string(s.band),
       [](RunConfig& c, const std::string& x) { c.scenario.band = guarded("band", [&] { return band_from_string(x); }); }},
      {"attacker", "attacker: none|constant|powerful|tag", to_string(s.attacker.kind),
       [](RunConfig& c, const std::string& x) {
         c.scenario.attacker.kind = guarded("attacker", [&] { return attacker_kind_from_string(x); });
       }},
      {"distance", "attacker distance (m)", num(s.attacker.distance_m),
       [](RunConfig& c, const std::string& x) { c.scenario.attacker.distance_m = to_double("distance", x); }},
      {"direction", "attacker placement 1..5", std::to_string(s.attacker.direction),
       [](RunConfig& c, const std::string& x) {
         c.scenario.attacker.direction = static_cast<int>(to_u64("direction", x));
       }},
      {"latency", "powerful attacker reaction latency (s)", num(s.attacker.reaction_latency_s),
       [](RunConfig& c, const std::string& x) { c.scenario.attacker.reaction_latency_s = to_double("latency", x); }},
      {"movements", "transmitter movements", std::to_string(s.movement_count),
       [](RunConfig& c, const std::string& x) { c.scenario.movement_count = static_cast<int>(to_u64("movements", x)); }},
      {"pkt-rate", "packets per second (0 = continuous)", num(s.traffic_rate_pkt_s),
       [](RunConfig& c, const std::string& x) { c.scenario.traffic_rate_pkt_s = to_double("pkt-rate", x); }},
      {"pkt-duration", "packet duration (s)", num(s.packet_duration_s),
       [](RunConfig& c, const std::string& x) { c.scenario.packet_duration_s = to_double("pkt-duration", x); }},
      {"tag-angle", "tag antenna angle (deg)", num(s.tag_angle_deg),
       [](RunConfig& c, const std::string& x) { c.scenario.tag_angle_deg = to_double("tag-angle", x); }},
      {"position", "tag position: chest|waist|wrist|neck", to_string(s.tag_position),
       [](RunConfig& c, const std::string& x) {
         c.scenario.tag_position = guarded("position", [&] { return tag_position_from_string(x); });
       }},
      {"dynamics", "body dynamics: static|slight|walkers", to_string(s.dynamics.profile),
       [](RunConfig& c, const std::string& x) {
         c.scenario.dynamics.profile = guarded("dynamics", [&] { return dynamics_from_string(x); });
       }},
      {"walker-distance", "distance of nearby walkers (m)", num(s.dynamics.walker_distance_m),
       [](RunConfig& c, const std::string& x) {
         c.scenario.dynamics.walker_distance_m = to_double("walker-distance", x);
       }},
      {"duration", "series duration (s, 0 = fit the movements)", num(s.duration_s),
       [](RunConfig& c, const std::string& x) { c.scenario.duration_s = to_double("duration", x); }},
      {"drift", "slow circuit drift (dB/s)", num(s.drift_db_per_s),
       [](RunConfig& c, const std::string& x) { c.scenario.drift_db_per_s = to_double("drift", x); }},
      {"smooth-window", "smoothing window (samples)", std::to_string(p.smooth_window),
       [](RunConfig& c, const std::string& x) { c.params.smooth_window = to_u64("smooth-window", x); }},
      {"w", "slope interval coefficient w", num(p.w_coeff),
       [](RunConfig& c, const std::string& x) { c.params.w_coeff = to_double("w", x); }},
      {"slope-threshold", "movement slope threshold (dB/s)", num(p.slope_threshold_db),
       [](RunConfig& c, const std::string& x) { c.params.slope_threshold_db = to_double("slope-threshold", x); }},
      {"state-threshold", "stable-state difference threshold (dB)", num(p.state_diff_threshold_db),
       [](RunConfig& c, const std::string& x) {
         c.params.state_diff_threshold_db = to_double("state-threshold", x);
       }},
      {"var-threshold", "fast-variation threshold on sqrt(variance) (dB)", num(p.variance_threshold_db),
       [](RunConfig& c, const std::string& x) { c.params.variance_threshold_db = to_double("var-threshold", x); }},
      {"auth-threshold", "segment mean difference threshold (dB)", num(p.auth_threshold_db),
       [](RunConfig& c, const std::string& x) { c.params.auth_threshold_db = to_double("auth-threshold", x); }},
      {"min-stable", "sub-threshold intervals that make a stable state", std::to_string(p.min_stable_intervals),
       [](RunConfig& c, const std::string& x) { c.params.min_stable_intervals = to_u64("min-stable", x); }},
      {"trace-window", "trace window (samples, 0 = one bit)", std::to_string(p.trace_window),
       [](RunConfig& c, const std::string& x) { c.params.trace_window = to_u64("trace-window", x); }},
      {"segment-limit", "truncate stable segments to this many samples (0 = off)",
       std::to_string(p.segment_limit_samples),
       [](RunConfig& c, const std::string& x) { c.params.segment_limit_samples = to_u64("segment-limit", x); }},
      {"format", "output format: human|csv", "human",
       [](RunConfig& c, const std::string& x) {
         if (x == "human") c.format = OutputFormat::Human;
         else if (x == "csv") c.format = OutputFormat::Csv;
         else throw UsageError("--format must be human or csv");
       }},
      {"binary", "write series in the binary format", "false",
       [](RunConfig& c, const std::string& x) { c.binary = to_bool("binary", x); }, true},
  };
  return v;
}

std::string type_name(const std::string& name) {
  if (name == "in" || name == "out") return "PATH";
  if (name == "values") return "LIST";
  for (const char* n : {"axis", "band", "attacker", "position", "dynamics", "format"})
    if (name == n) return "NAME";
  return "NUM";
}

std::string json_to_setting(const std::string& key, const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number_unsigned()) return std::to_string(value.get<std::uint64_t>());
  if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
  if (value.is_number_float()) return fmt(value.get<double>());
  if (value.is_array()) {
    std::string out;
    for (const auto& item : value) {
      if (!out.empty()) out += ',';
      out += json_to_setting(key, item);
    }
    return out;
  }
  throw UsageError("config key '" + key + "': unsupported value type");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

std::string report_table(const std::vector<MetricsReport>& reports) {
  auto rate = [](const std::optional<double>& v) { return v ? fmt(*v, "%.3f") : std::string("-"); };
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-12s %7s %7s %7s %8s %8s %8s\n", "axis", "value", "trials", "tp",
                "fp", "vote_tp", "vote_fp", "groups");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-10s %-12s %7zu %7s %7s %8s %8s %8.2f\n",
                  r.axis.empty() ? "-" : r.axis.c_str(), r.value.empty() ? "-" : r.value.c_str(), r.n_trials,
                  rate(r.tp_rate).c_str(), rate(r.fp_rate).c_str(), rate(r.vote_tp_rate).c_str(),
                  rate(r.vote_fp_rate).c_str(), r.mean_groups_per_trial);
    out += line;
  }
  return out;
}

void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) out << text;
  else io::write_file(c.out, text);
}

void emit_reports(const RunConfig& c, std::ostream& out, const std::vector<MetricsReport>& reports) {
  if (!c.out.empty()) {
    export_report(reports, c.out);
    if (c.format == OutputFormat::Human) out << report_table(reports);
    return;
  }
  out << (c.format == OutputFormat::Csv ? format_report_csv(reports) : report_table(reports));
}

}  // namespace

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out,
                                    const char* env_seed) {
  CLI::App app{"Simulates and authenticates on-body backscatter tags from RSS series.", "scatterguard"};
  app.set_help_flag("-h,--help", "print this help and exit");
  std::string command, config_path;
  app.add_option("command", command, "synth | auth | sweep | latency | report")
      ->required()
      ->check(CLI::IsMember({"synth", "auth", "sweep", "latency", "report"}));
  app.add_option("--config", config_path, "JSON file of option values (keys are flag names)")
      ->type_name("PATH");

  const auto table = settings();
  std::vector<std::string> raw(table.size());
  std::vector<CLI::Option*> opts(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& s = table[i];
    if (s.flag) {
      opts[i] = app.add_flag("--" + s.name, s.help);
    } else {
      opts[i] = app.add_option("--" + s.name, raw[i], s.help)->type_name(type_name(s.name));
      if (!s.default_value.empty()) opts[i]->default_str(s.default_value);
    }
  }

  std::vector<const char*> argv{"scatterguard"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig c;
  c.command = command;
  if (env_seed && *env_seed) c.seed = to_u64("seed", env_seed);

  if (!config_path.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("--config " + config_path + ": " + e.what());
    } catch (const Error& e) {
      throw UsageError(std::string("--config: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("--config " + config_path + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
      const auto it = std::find_if(table.begin(), table.end(), [&](const Setting& s) { return s.name == key; });
      if (it == table.end()) throw UsageError("--config " + config_path + ": unknown key '" + key + "'");
      it->apply(c, json_to_setting(key, value));
    }
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (opts[i]->count() == 0) continue;
    table[i].apply(c, table[i].flag ? std::string("true") : raw[i]);
  }
  c.scenario.seed = c.seed;

  try {
    c.scenario.validate();
    c.params.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (c.command == "auth" || c.command == "report") require(!c.in.empty(), c.command + " requires --in");
  if (c.command == "synth") require(!c.out.empty(), "synth requires --out");
  if (c.command == "sweep") {
    require(!c.axis.empty(), "sweep requires --axis");
    require(!c.values.empty(), "sweep requires --values");
  }
  if (c.command == "latency") {
    require(!c.values.empty(), "latency requires --values (segment lengths in ms)");
    for (const auto& v : c.values) to_double("values", v);
  }
  return c;
}

int exit_code(FinalVerdict verdict) {
  switch (verdict) {
    case FinalVerdict::OnBody: return kExitOnBody;
    case FinalVerdict::Attacker: return kExitAttacker;
    case FinalVerdict::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

std::string emit_verdict(const Verdict& v, OutputFormat format) {
  std::string out;
  if (format == OutputFormat::Csv) {
    out += "group_index,group_verdict,pre_mean_db,post_mean_db,pre_var,post_var\n";
    for (std::size_t g = 0; g < v.groups.size(); ++g) {
      const auto& grp = v.groups[g];
      out += std::to_string(g) + "," + to_string(v.per_group[g]) + "," + fmt(grp.pre_mean_db, "%.9g") + "," +
             fmt(grp.post_mean_db, "%.9g") + "," + fmt(grp.pre_var, "%.9g") + "," + fmt(grp.post_var, "%.9g") + "\n";
    }
    out += std::string("FINAL,") + to_string(v.final) + "," + std::to_string(v.groups_used) + ",,,\n";
    return out;
  }
  char line[256];
  for (std::size_t g = 0; g < v.groups.size(); ++g) {
    const auto& grp = v.groups[g];
    std::snprintf(line, sizeof line,
                  "group %zu: %-16s pre %7.2f dB  post %7.2f dB  diff %6.2f dB  sd %.2f/%.2f dB\n", g,
                  to_string(v.per_group[g]), grp.pre_mean_db, grp.post_mean_db,
                  std::abs(grp.pre_mean_db - grp.post_mean_db), std::sqrt(grp.pre_var), std::sqrt(grp.post_var));
    out += line;
  }
  out += std::string("verdict: ") + to_string(v.final) + " (" + std::to_string(v.groups_used) + " groups)\n";
  return out;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  HarnessOptions options;
  options.params = c.params;
  options.threads = c.threads;

  if (c.command == "synth") {
    const LabeledSeries ls = synth::synthesize(c.scenario, c.seed);
    io::write_labeled(ls, c.out, c.binary);
    out << "wrote " << ls.series.size() << " samples, " << ls.movement_intervals.size() << " movements to "
        << c.out << " (labels: " << io::labels_path(c.out) << ")\n";
    return 0;
  }
  if (c.command == "auth") {
    const io::SeriesFile file = io::read_series(c.in);
    const Verdict v = authenticate(file.series, file.bitrate_bps, c.params);
    if (c.format == OutputFormat::Human)
      for (const auto& d : v.diagnostics) err << "note: " << d << "\n";
    emit(c, out, emit_verdict(v, c.format));
    return exit_code(v.final);
  }
  if (c.command == "sweep") {
    std::vector<MetricsReport> reports;
    for (auto& [value, r] : sweep(c.scenario, sweep_axis_from_string(c.axis), c.values, c.trials, c.seed, options))
      reports.push_back(r);
    emit_reports(c, out, reports);
    return 0;
  }
  if (c.command == "latency") {
    std::vector<double> ms;
    for (const auto& v : c.values) ms.push_back(to_double("values", v));
    std::vector<MetricsReport> reports;
    for (auto& [len, r] : latency_study(c.scenario, ms, c.trials, c.seed, options)) reports.push_back(r);
    emit_reports(c, out, reports);
    return 0;
  }
  if (c.command == "report") {
    const auto reports = read_report(c.in);
    if (!c.out.empty()) export_report(reports, c.out);
    out << (c.format == OutputFormat::Csv ? format_report_csv(reports) : report_table(reports));
    return 0;
  }
  throw UsageError("unknown command '" + c.command + "'");
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const auto config = parse_args(args, out, std::getenv("SCATTERGUARD_SEED"));
    if (!config) return 0;
    return run(*config, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun with --help for the list of options\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace scatterguard::cli
