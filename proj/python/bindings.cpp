#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scatterguard/error.hpp"
#include "scatterguard/harness.hpp"
#include "scatterguard/pipeline.hpp"
#include "scatterguard/series_io.hpp"
#include "scatterguard/synth.hpp"

namespace py = pybind11;
using namespace scatterguard;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SampleSeries to_series(py::array_t<double, py::array::c_style | py::array::forcecast> samples,
                       std::uint64_t sample_rate_hz) {
  if (samples.ndim() != 1) throw PreconditionError("samples must be one-dimensional");
  SampleSeries s;
  s.sample_rate_hz = sample_rate_hz;
  s.samples.assign(samples.data(), samples.data() + samples.size());
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> spans(const std::vector<Interval>& v) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& iv : v) out.emplace_back(iv.begin, iv.end);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "On-body backscatter tag authentication: simulator, pipeline and evaluation harness";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NoBackscatterDetected>(m, "NoBackscatterDetected", base.ptr());

  py::enum_<propagation::Band>(m, "Band")
      .value("MHz900", propagation::Band::MHz900)
      .value("GHz2400", propagation::Band::GHz2400);
  py::enum_<AttackerKind>(m, "AttackerKind")
      .value("NoAttacker", AttackerKind::None)
      .value("ConstantPowerActive", AttackerKind::ConstantPowerActive)
      .value("PowerfulActive", AttackerKind::PowerfulActive)
      .value("TagAttacker", AttackerKind::TagAttacker);
  py::enum_<TagPosition>(m, "TagPosition")
      .value("Chest", TagPosition::Chest)
      .value("Waist", TagPosition::Waist)
      .value("Wrist", TagPosition::Wrist)
      .value("Neck", TagPosition::Neck);
  py::enum_<DynamicsProfile>(m, "DynamicsProfile")
      .value("Static", DynamicsProfile::Static)
      .value("SlightMotion", DynamicsProfile::SlightMotion)
      .value("WalkersNearby", DynamicsProfile::WalkersNearby);
  py::enum_<GroupVerdict>(m, "GroupVerdict")
      .value("OnBody", GroupVerdict::OnBody)
      .value("Attacker", GroupVerdict::Attacker)
      .value("PowerfulAttacker", GroupVerdict::PowerfulAttacker);
  py::enum_<FinalVerdict>(m, "FinalVerdict")
      .value("OnBody", FinalVerdict::OnBody)
      .value("Attacker", FinalVerdict::Attacker)
      .value("Inconclusive", FinalVerdict::Inconclusive);

  py::class_<AttackerConfig>(m, "AttackerConfig")
      .def(py::init<>())
      .def_readwrite("kind", &AttackerConfig::kind)
      .def_readwrite("distance_m", &AttackerConfig::distance_m)
      .def_readwrite("direction", &AttackerConfig::direction)
      .def_readwrite("reaction_latency_s", &AttackerConfig::reaction_latency_s)
      .def_readwrite("monitor_threshold_db", &AttackerConfig::monitor_threshold_db)
      .def_readwrite("power_step_noise_db", &AttackerConfig::power_step_noise_db)
      .def_readwrite("power_update_interval_s", &AttackerConfig::power_update_interval_s);

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def(py::init<>())
      .def_readwrite("band", &ScenarioSpec::band)
      .def_readwrite("tag_position", &ScenarioSpec::tag_position)
      .def_readwrite("attacker", &ScenarioSpec::attacker)
      .def_property(
          "dynamics", [](const ScenarioSpec& s) { return s.dynamics.profile; },
          [](ScenarioSpec& s, DynamicsProfile p) { s.dynamics.profile = p; })
      .def_property(
          "walker_distance_m", [](const ScenarioSpec& s) { return s.dynamics.walker_distance_m; },
          [](ScenarioSpec& s, double d) { s.dynamics.walker_distance_m = d; })
      .def_readwrite("movement_count", &ScenarioSpec::movement_count)
      .def_readwrite("traffic_rate_pkt_s", &ScenarioSpec::traffic_rate_pkt_s)
      .def_readwrite("packet_duration_s", &ScenarioSpec::packet_duration_s)
      .def_readwrite("tag_angle_deg", &ScenarioSpec::tag_angle_deg)
      .def_readwrite("duration_s", &ScenarioSpec::duration_s)
      .def_readwrite("sample_rate_hz", &ScenarioSpec::sample_rate_hz)
      .def_readwrite("noise_std_db", &ScenarioSpec::noise_std_db)
      .def_readwrite("ripple_db", &ScenarioSpec::ripple_db)
      .def_readwrite("tag_noise_db", &ScenarioSpec::tag_noise_db)
      .def_readwrite("drift_db_per_s", &ScenarioSpec::drift_db_per_s)
      .def_property(
          "reflection_depth_db", [](const ScenarioSpec& s) { return s.backscatter.reflection_depth_db; },
          [](ScenarioSpec& s, double d) { s.backscatter.reflection_depth_db = d; })
      .def_property(
          "fixed_bits", [](const ScenarioSpec& s) { return s.backscatter.fixed_bits; },
          [](ScenarioSpec& s, std::vector<std::uint8_t> b) { s.backscatter.fixed_bits = std::move(b); })
      .def("effective_duration_s", &ScenarioSpec::effective_duration_s)
      .def("validate", &ScenarioSpec::validate);

  py::class_<PipelineParams>(m, "PipelineParams")
      .def(py::init<>())
      .def_readwrite("smooth_window", &PipelineParams::smooth_window)
      .def_readwrite("w_coeff", &PipelineParams::w_coeff)
      .def_readwrite("slope_threshold_db", &PipelineParams::slope_threshold_db)
      .def_readwrite("state_diff_threshold_db", &PipelineParams::state_diff_threshold_db)
      .def_readwrite("variance_threshold_db", &PipelineParams::variance_threshold_db)
      .def_readwrite("auth_threshold_db", &PipelineParams::auth_threshold_db)
      .def_readwrite("min_stable_intervals", &PipelineParams::min_stable_intervals)
      .def_readwrite("trace_window", &PipelineParams::trace_window)
      .def_readwrite("segment_limit_samples", &PipelineParams::segment_limit_samples)
      .def("validate", &PipelineParams::validate);

  py::class_<LabeledSeries>(m, "LabeledSeries")
      .def_property_readonly("samples", [](const LabeledSeries& l) { return to_array(l.series.samples); })
      .def_property_readonly("sample_rate_hz", [](const LabeledSeries& l) { return l.series.sample_rate_hz; })
      .def_readonly("bitrate_bps", &LabeledSeries::bitrate_bps)
      .def_readonly("seed", &LabeledSeries::seed)
      .def_readonly("bits", &LabeledSeries::bits)
      .def_readonly("genuine", &LabeledSeries::genuine)
      .def_property_readonly("movement_intervals",
                             [](const LabeledSeries& l) { return spans(l.movement_intervals); });

  py::class_<SegmentGroup>(m, "SegmentGroup")
      .def_property_readonly("pre", [](const SegmentGroup& g) { return std::make_pair(g.pre.begin, g.pre.end); })
      .def_property_readonly("movement",
                             [](const SegmentGroup& g) { return std::make_pair(g.movement.begin, g.movement.end); })
      .def_property_readonly("post",
                             [](const SegmentGroup& g) { return std::make_pair(g.post.begin, g.post.end); })
      .def_readonly("pre_mean_db", &SegmentGroup::pre_mean_db)
      .def_readonly("post_mean_db", &SegmentGroup::post_mean_db)
      .def_readonly("pre_var", &SegmentGroup::pre_var)
      .def_readonly("post_var", &SegmentGroup::post_var);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("groups", &Verdict::groups)
      .def_readonly("per_group", &Verdict::per_group)
      .def_readonly("final", &Verdict::final)
      .def_readonly("groups_used", &Verdict::groups_used)
      .def_readonly("diagnostics", &Verdict::diagnostics);

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("axis", &MetricsReport::axis)
      .def_readonly("value", &MetricsReport::value)
      .def_readonly("n_trials", &MetricsReport::n_trials)
      .def_readonly("genuine_trials", &MetricsReport::genuine_trials)
      .def_readonly("attacker_trials", &MetricsReport::attacker_trials)
      .def_readonly("tp_rate", &MetricsReport::tp_rate)
      .def_readonly("fp_rate", &MetricsReport::fp_rate)
      .def_readonly("vote_tp_rate", &MetricsReport::vote_tp_rate)
      .def_readonly("vote_fp_rate", &MetricsReport::vote_fp_rate)
      .def_readonly("mean_groups_per_trial", &MetricsReport::mean_groups_per_trial)
      .def_readonly("latency_samples_used", &MetricsReport::latency_samples_used)
      .def(py::self == py::self);

  m.def("synthesize", &synth::synthesize, py::arg("scenario"), py::arg("seed"));
  m.def(
      "authenticate",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> samples, std::uint64_t sample_rate_hz,
         std::uint64_t bitrate_bps, const PipelineParams& params) {
        const SampleSeries s = to_series(samples, sample_rate_hz);
        py::gil_scoped_release release;
        return authenticate(s, bitrate_bps, params);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("bitrate_bps"), py::arg("params") = PipelineParams{});
  m.def(
      "slopes",
      [](const std::vector<double>& trace, const PipelineParams& params, std::uint64_t sample_rate_hz,
         std::uint64_t bitrate_bps) {
        return to_array(slopes(MainPathTrace{trace, 1}, params, sample_rate_hz, bitrate_bps).raw);
      },
      py::arg("trace"), py::arg("params") = PipelineParams{}, py::arg("sample_rate_hz") = 1000000,
      py::arg("bitrate_bps") = 10000);
  m.def(
      "segment_variance", [](const std::vector<double>& segment) { return segment_variance(segment).raw; },
      py::arg("segment"));
  m.def(
      "run_trials",
      [](const ScenarioSpec& spec, std::size_t n_trials, std::uint64_t seed, const PipelineParams& params,
         unsigned threads) {
        py::gil_scoped_release release;
        return run_trials(spec, n_trials, seed, HarnessOptions{params, threads});
      },
      py::arg("scenario"), py::arg("n_trials"), py::arg("seed"), py::arg("params") = PipelineParams{},
      py::arg("threads") = 0);
  m.def(
      "sweep",
      [](const ScenarioSpec& spec, const std::string& axis, const std::vector<std::string>& values,
         std::size_t n_trials, std::uint64_t seed, const PipelineParams& params, unsigned threads) {
        const SweepAxis a = sweep_axis_from_string(axis);
        py::gil_scoped_release release;
        return sweep(spec, a, values, n_trials, seed, HarnessOptions{params, threads});
      },
      py::arg("scenario"), py::arg("axis"), py::arg("values"), py::arg("n_trials"), py::arg("seed"),
      py::arg("params") = PipelineParams{}, py::arg("threads") = 0);
  m.def(
      "latency_study",
      [](const ScenarioSpec& spec, const std::vector<double>& lengths_ms, std::size_t n_trials, std::uint64_t seed,
         const PipelineParams& params, unsigned threads) {
        py::gil_scoped_release release;
        return latency_study(spec, lengths_ms, n_trials, seed, HarnessOptions{params, threads});
      },
      py::arg("scenario"), py::arg("segment_lengths_ms"), py::arg("n_trials"), py::arg("seed"),
      py::arg("params") = PipelineParams{}, py::arg("threads") = 0);
  m.def("format_report_csv", &format_report_csv, py::arg("reports"));
  m.def("parse_report_csv", &parse_report_csv, py::arg("text"));

  m.def(
      "read_series",
      [](const std::string& path) {
        const auto f = io::read_series(path);
        return py::make_tuple(to_array(f.series.samples), f.series.sample_rate_hz, f.bitrate_bps);
      },
      py::arg("path"));
  m.def(
      "write_series",
      [](const std::string& path, py::array_t<double, py::array::c_style | py::array::forcecast> samples,
         std::uint64_t sample_rate_hz, std::uint64_t bitrate_bps, bool binary) {
        io::SeriesFile f;
        f.series = to_series(samples, sample_rate_hz);
        f.bitrate_bps = bitrate_bps;
        io::write_series(f, path, binary);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz"), py::arg("bitrate_bps"),
      py::arg("binary") = false);
}
