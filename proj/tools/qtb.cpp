// qtb: command-line front end for the time-bin entanglement toolkit.
// Subcommands map one-to-one onto library operations; every run writes a
// self-contained JSON report with input digests next to its data outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "qtb/analysis.hpp"
#include "qtb/coincidence.hpp"
#include "qtb/errors.hpp"
#include "qtb/pairsource.hpp"
#include "qtb/quantities.hpp"
#include "qtb/resonator.hpp"
#include "qtb/simulator.hpp"
#include "qtb/tagstream.hpp"
#include "qtb/timebin.hpp"
#include "qtb/tomography.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qtb::ConfigError(path, "cannot open input file");
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
  return std::string("fnv1a:") + hex;
}

/// Time value with optional SI suffix: `ps`, `ns`, `us`, `ms`; bare numbers
/// are seconds.
double parse_time_s(const std::string& text) {
  double scale = 1.0;
  std::string number = text;
  const auto ends_with = [&](const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    return text.size() > n && text.compare(text.size() - n, n, suffix) == 0;
  };
  if (ends_with("ps")) {
    scale = 1e-12;
    number = text.substr(0, text.size() - 2);
  } else if (ends_with("ns")) {
    scale = 1e-9;
    number = text.substr(0, text.size() - 2);
  } else if (ends_with("us")) {
    scale = 1e-6;
    number = text.substr(0, text.size() - 2);
  } else if (ends_with("ms")) {
    scale = 1e-3;
    number = text.substr(0, text.size() - 2);
  } else if (ends_with("s")) {
    number = text.substr(0, text.size() - 1);
  }
  std::size_t pos = 0;
  double value;
  try {
    value = std::stod(number, &pos);
  } catch (const std::exception&) {
    throw qtb::ConfigError(text, "not a valid time value");
  }
  if (pos != number.size()) throw qtb::ConfigError(text, "not a valid time value");
  return value * scale;
}

qtb::Gate parse_gate(const std::string& text) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos) {
    throw qtb::ConfigError(text, "expected gate as offset,width");
  }
  qtb::Gate g;
  g.offset_ps = qtb::ps_from_seconds(parse_time_s(text.substr(0, comma)));
  g.width_ps = qtb::ps_from_seconds(parse_time_s(text.substr(comma + 1)));
  return g;
}

class Report {
 public:
  explicit Report(const std::string& command) {
    doc_["command"] = command;
    doc_["inputs"] = json::object();
    doc_["parameters"] = json::object();
    doc_["results"] = json::object();
    doc_["warnings"] = json::array();
  }

  void input(const std::string& path) { doc_["inputs"][path] = file_digest(path); }
  template <typename T>
  void param(const std::string& name, const T& value) {
    doc_["parameters"][name] = value;
  }
  void result(const std::string& name, double value, const std::string& unit) {
    doc_["results"][name] = {{"value", value}, {"unit", unit}};
    std::cout << name << " = " << std::setprecision(10) << value;
    if (!unit.empty()) std::cout << " " << unit;
    std::cout << "\n";
  }
  void warn(const std::string& message) {
    doc_["warnings"].push_back(message);
    std::cerr << "warning: " << message << "\n";
  }
  json& raw() { return doc_; }

  void write(const fs::path& out_dir) const {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "report.json");
    out << doc_.dump(2) << "\n";
  }

 private:
  json doc_;
};

double stream_span_s(const qtb::TagStream& stream) {
  if (stream.records.size() < 2) return 0.0;
  return (stream.records.back().time_ps - stream.records.front().time_ps) * qtb::kPicosecond;
}

Eigen::Vector4cd phi_plus_vector() {
  return qtb::bell_phi_plus().amplitudes;
}

void write_fringe_fit_csv(const fs::path& path,
                          const std::map<std::string, qtb::FringeScan>& scans,
                          const std::map<std::string, qtb::VisibilityResult>& fits) {
  std::ofstream out(path);
  out << "port,phase_rad,rate_hz,fit_rate_hz\n";
  for (const auto& [port, scan] : scans) {
    const qtb::VisibilityResult& fit = fits.at(port);
    for (const qtb::FringeSample& s : scan.samples) {
      const double model =
          fit.amplitude *
          (1.0 + fit.visibility * std::cos(s.phase_rad + scan.alpha_rad + fit.phase_offset_rad));
      out << port << "," << s.phase_rad << "," << s.count / s.dwell_s << "," << model << "\n";
    }
  }
}

void write_density_json(const fs::path& path, const qtb::DensityMatrix& rho) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < 4; ++i) {
    json row_re = json::array(), row_im = json::array();
    for (int j = 0; j < 4; ++j) {
      row_re.push_back(rho.m(i, j).real());
      row_im.push_back(rho.m(i, j).imag());
    }
    re.push_back(row_re);
    im.push_back(row_im);
  }
  json doc = {{"basis", {"ee", "el", "le", "ll"}}, {"rho_re", re}, {"rho_im", im}};
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::int64_t seed_override, const std::string& duration_override,
                 bool correlation) {
  Report report("simulate");
  report.input(config_path);

  qtb::ExperimentConfig cfg = qtb::load_experiment_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (!duration_override.empty()) cfg.duration_s = parse_time_s(duration_override);
  report.param("seed", cfg.seed);
  report.param("duration_s", cfg.duration_s);
  report.param("mean_pairs_per_double_pulse", cfg.pump.mean_pairs_per_double_pulse);
  report.param("correlation", correlation);

  const qtb::SimulationResult sim =
      correlation ? qtb::simulate_correlation_run(cfg) : qtb::simulate_experiment(cfg);
  for (const std::string& w : sim.warnings) report.warn(w);

  fs::create_directories(out_dir);
  const fs::path tag_path = fs::path(out_dir) / "tags.ttag";
  qtb::write_ttag(sim.stream, tag_path.string());

  report.result("pairs_emitted", static_cast<double>(sim.pairs_emitted), "");
  report.result("photon_tags", static_cast<double>(sim.photon_tags), "");
  report.result("dark_tags", static_cast<double>(sim.dark_tags), "");
  report.result("tags_removed_dead_time", static_cast<double>(sim.tags_removed_dead_time), "");
  report.result("total_records", static_cast<double>(sim.stream.records.size()), "");
  report.raw()["results"]["tag_file"] = tag_path.string();
  report.raw()["results"]["tag_digest"] = file_digest(tag_path.string());
  report.write(out_dir);
  return 0;
}

int cmd_hist(const std::string& input, const std::string& ch_a, const std::string& ch_b,
             const std::string& bin_width, const std::string& range,
             const std::string& peak_separation, double min_prominence, bool fit_tau,
             const std::string& out_dir) {
  Report report("hist");
  report.input(input);
  report.param("channel_a", ch_a);
  report.param("channel_b", ch_b);
  report.param("bin_width", bin_width);
  report.param("range", range);

  const qtb::TagStream stream = qtb::read_tagstream(input);
  const auto a = stream.channel_times(ch_a);
  const auto b = stream.channel_times(ch_b);
  const qtb::Histogram h = qtb::delay_histogram(
      a, b, qtb::ps_from_seconds(parse_time_s(bin_width)),
      qtb::ps_from_seconds(parse_time_s(range)));

  fs::create_directories(out_dir);
  qtb::write_histogram_csv(h, (fs::path(out_dir) / "histogram.csv").string());
  report.result("total_counts", static_cast<double>(h.total()), "");
  report.result("bins", static_cast<double>(h.counts.size()), "");

  const std::vector<qtb::Peak> peaks =
      qtb::find_peaks(h, parse_time_s(peak_separation), min_prominence);
  json peak_list = json::array();
  for (const qtb::Peak& p : peaks) {
    peak_list.push_back({{"center_s", p.center_s}, {"area", p.area}});
  }
  report.raw()["results"]["peaks"] = peak_list;
  report.result("peak_count", static_cast<double>(peaks.size()), "");
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    std::cout << "peak[" << i << "] center = " << peaks[i].center_s
              << " s, area = " << peaks[i].area << "\n";
  }

  if (fit_tau) {
    const qtb::DoubleExponentialFit fit = qtb::fit_double_exponential(h);
    report.result("tau_s", fit.tau_s, "s");
    report.result("tau_sigma_s", fit.std_errors[0], "s");
    report.result("bandwidth_hz", fit.bandwidth.hertz, "Hz");
  }
  report.write(out_dir);
  return 0;
}

int cmd_coinc(const std::string& input, const std::string& ch_a, const std::string& ch_b,
              const std::string& window, const std::string& offset, const std::string& period,
              const std::string& duration, const std::string& out_dir) {
  Report report("coinc");
  report.input(input);
  report.param("channel_a", ch_a);
  report.param("channel_b", ch_b);
  report.param("window", window);

  const qtb::TagStream stream = qtb::read_tagstream(input);
  const auto a = stream.channel_times(ch_a);
  const auto b = stream.channel_times(ch_b);
  const double dur = duration.empty() ? stream_span_s(stream) : parse_time_s(duration);
  const qtb::TimeStamp window_ps = qtb::ps_from_seconds(parse_time_s(window));
  const qtb::TimeStamp offset_ps = qtb::ps_from_seconds(parse_time_s(offset));

  const qtb::CoincidenceResult cc = qtb::count_coincidences(a, b, window_ps, offset_ps, dur);
  report.result("coincidences", static_cast<double>(cc.count), "");
  report.result("coincidence_rate", cc.rate_hz, "Hz");

  if (!period.empty()) {
    const qtb::TimeStamp period_ps = qtb::ps_from_seconds(parse_time_s(period));
    const qtb::CoincidenceResult acc =
        qtb::accidental_coincidences(a, b, window_ps, offset_ps, period_ps, dur);
    report.result("accidentals", static_cast<double>(acc.count), "");
    report.result("accidental_rate", acc.rate_hz, "Hz");
    const qtb::CarResult car = qtb::car({cc.rate_hz, acc.rate_hz, cc.window_s});
    if (car.finite) {
      report.result("car", car.value, "");
    } else {
      report.warn("zero accidentals: CAR is unbounded");
      report.raw()["results"]["car"] = {{"value", "inf"}, {"unit", ""}};
    }
  }
  report.write(out_dir);
  return 0;
}

int cmd_triple(const std::string& input, const std::string& clock, const std::string& ch_a,
               const std::string& ch_b, const std::string& gate_a, const std::string& gate_b,
               const std::string& period, const std::string& duration,
               const std::string& out_dir) {
  Report report("triple");
  report.input(input);
  report.param("clock", clock);
  report.param("channel_a", ch_a);
  report.param("channel_b", ch_b);
  report.param("gate_a", gate_a);
  report.param("gate_b", gate_b);

  const qtb::TagStream stream = qtb::read_tagstream(input);
  const auto c = stream.channel_times(clock);
  const auto a = stream.channel_times(ch_a);
  const auto b = stream.channel_times(ch_b);
  const double dur = duration.empty() ? stream_span_s(stream) : parse_time_s(duration);
  const qtb::CoincidenceResult r =
      qtb::triple_coincidences(c, a, b, parse_gate(gate_a), parse_gate(gate_b),
                               qtb::ps_from_seconds(parse_time_s(period)), dur);
  report.result("triples", static_cast<double>(r.count), "");
  report.result("triple_rate", r.rate_hz, "Hz");
  report.result("clock_count", static_cast<double>(c.size()), "");
  report.write(out_dir);
  return 0;
}

int cmd_fringe(const std::string& input, double alpha, const std::string& out_dir) {
  Report report("fringe");
  report.input(input);
  report.param("alpha_rad", alpha);

  std::map<std::string, qtb::FringeScan> scans = qtb::read_fringe_csv(input);
  std::map<std::string, qtb::VisibilityResult> fits;
  for (auto& [port, scan] : scans) {
    scan.alpha_rad = alpha;
    fits[port] = qtb::fit_fringe(scan);
    const std::string tag = port.empty() ? "scan" : port;
    report.result("visibility_" + tag, fits[port].visibility, "");
    report.result("visibility_sigma_" + tag, fits[port].sigma, "");
    if (fits[port].unphysical) report.warn("fitted visibility above 1 for " + tag);
  }

  fs::create_directories(out_dir);
  write_fringe_fit_csv(fs::path(out_dir) / "fringe_fit.csv", scans, fits);

  if (fits.size() == 4) {
    std::array<qtb::VisibilityResult, 4> per_port;
    std::size_t i = 0;
    for (const auto& [port, fit] : fits) per_port[i++] = fit;
    const qtb::RawVisibilityResult raw = qtb::raw_visibility(per_port);
    if (!raw.weighted) report.warn("zero sigma present: unweighted mean used");
    report.result("raw_visibility", raw.visibility, "");
    report.result("raw_visibility_sigma", raw.sigma, "");
    const qtb::ChshResult chsh = qtb::chsh_from_visibility(raw.visibility, raw.sigma);
    report.result("chsh_s", chsh.s, "");
    report.result("chsh_n_sigma_violation", chsh.n_sigma_violation, "");
  }
  report.write(out_dir);
  return 0;
}

int cmd_chsh(double visibility, double sigma, const std::string& out_dir) {
  Report report("chsh");
  report.param("visibility", visibility);
  report.param("sigma", sigma);
  const qtb::ChshResult r = qtb::chsh_from_visibility(visibility, sigma);
  report.result("chsh_s", r.s, "");
  report.result("chsh_n_sigma_violation", r.n_sigma_violation, "");
  report.write(out_dir);
  return 0;
}

int cmd_tomo(const std::string& counts_path, int trials, bool full, std::int64_t seed,
             int threads, const std::string& out_dir) {
  Report report("tomo");
  report.input(counts_path);
  if (full) trials = 1000;
  report.param("trials", trials);
  report.param("seed", seed);

  const std::vector<qtb::MeasurementRecord> records = qtb::read_counts_json(counts_path);
  const Eigen::Vector4cd target = phi_plus_vector();

  const qtb::LinearInversionResult li = qtb::linear_inversion(records);
  report.result("linear_inversion_min_eigenvalue", li.min_eigenvalue, "");

  const qtb::MleResult mle = qtb::mle_reconstruct(records);
  if (!mle.converged) report.warn("MLE hit the iteration cap; best iterate reported");
  report.result("log_likelihood", mle.log_likelihood, "");
  report.result("mle_iterations", mle.iterations, "");
  report.result("fidelity", qtb::fidelity(mle.rho, target), "");
  report.result("purity", qtb::purity(mle.rho), "");
  qtb::DensityMatrix target_rho;
  target_rho.m = target * target.adjoint();
  report.result("trace_distance_to_target", qtb::trace_distance(mle.rho, target_rho), "");

  if (trials > 0) {
    const qtb::MonteCarloResult mc = qtb::monte_carlo_uncertainty(
        records, trials, target, static_cast<std::uint64_t>(seed), threads);
    report.result("fidelity_mc_mean", mc.fidelity_mean, "");
    report.result("fidelity_mc_std", mc.fidelity_std, "");
    report.result("mc_trials_used", static_cast<double>(mc.per_trial.size()), "");
    if (mc.dropped > 0) {
      report.warn(std::to_string(mc.dropped) + " Monte Carlo trials dropped");
    }
  }

  fs::create_directories(out_dir);
  write_density_json(fs::path(out_dir) / "rho.json", mle.rho);
  report.write(out_dir);
  return 0;
}

int cmd_fit_resonance(const std::string& input, double radius_um, double group_index,
                      const std::string& out_dir) {
  Report report("fit-resonance");
  report.input(input);

  const std::vector<qtb::TracePoint> trace = qtb::read_transmission_csv(input);
  const qtb::ResonanceFit fit = qtb::fit_resonance(trace);
  report.result("center_hz", fit.resonance.center.hertz, "Hz");
  report.result("center_sigma_hz", fit.std_errors[0], "Hz");
  report.result("linewidth_hz", fit.resonance.linewidth_fwhm.hertz, "Hz");
  report.result("linewidth_sigma_hz", fit.std_errors[1], "Hz");
  report.result("t_min", fit.resonance.t_min, "");
  report.result("q_factor", qtb::q_factor(fit.resonance), "");
  report.result("residual_rms", fit.residual_rms, "");

  if (radius_um > 0 && group_index > 0) {
    const qtb::Frequency fsr =
        qtb::free_spectral_range({radius_um * 1e-6, group_index});
    report.result("free_spectral_range_hz", fsr.hertz, "Hz");
  }
  report.write(out_dir);
  return 0;
}

int cmd_fit_singles(const std::string& input, double eval_power_mw, const std::string& out_dir) {
  Report report("fit-singles");
  report.input(input);

  const auto sweep = qtb::read_power_sweep_csv(input);
  const qtb::SinglesFit fit = qtb::fit_singles(sweep);
  if (fit.negative_c_flag) report.warn("fitted dark-count term is negative");
  report.result("a_per_s_mw2", fit.model.a, "1/(s mW^2)");
  report.result("a_sigma", fit.std_errors[0], "1/(s mW^2)");
  report.result("b_per_s_mw", fit.model.b, "1/(s mW)");
  report.result("b_sigma", fit.std_errors[1], "1/(s mW)");
  report.result("c_per_s", fit.model.c, "1/s");
  report.result("c_sigma", fit.std_errors[2], "1/s");
  if (eval_power_mw > 0) {
    report.result("rate_at_power", qtb::eval_singles(fit.model, qtb::Power::mw(eval_power_mw)),
                  "1/s");
  }
  report.write(out_dir);
  return 0;
}

int cmd_brightness(double n2, double a_eff_um2, double pump_nm, double radius_um,
                   double linewidth_ghz, double ref_n2, double ref_a_eff_um2,
                   double ref_radius_um, double ref_linewidth_ghz, const std::string& out_dir) {
  Report report("brightness");
  qtb::MaterialWaveguide mw{n2, a_eff_um2 * 1e-12, qtb::Wavelength::nm(pump_nm)};
  report.result("gamma_per_w_m", qtb::nonlinear_coefficient(mw), "1/(W m)");
  const double fom =
      qtb::brightness_figure_of_merit(mw, radius_um * 1e-6, qtb::Frequency::ghz(linewidth_ghz));
  report.result("figure_of_merit", fom, "");

  if (ref_n2 > 0 && ref_a_eff_um2 > 0 && ref_radius_um > 0 && ref_linewidth_ghz > 0) {
    qtb::MaterialWaveguide ref{ref_n2, ref_a_eff_um2 * 1e-12, qtb::Wavelength::nm(pump_nm)};
    const double ref_fom = qtb::brightness_figure_of_merit(ref, ref_radius_um * 1e-6,
                                                           qtb::Frequency::ghz(ref_linewidth_ghz));
    report.result("reference_figure_of_merit", ref_fom, "");
    report.result("brightness_ratio", fom / ref_fom, "");
  }
  report.write(out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtb: time-bin entangled photon-pair simulation and analysis"};
  app.require_subcommand(1);

  int exit_code = 0;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run the tag-stream Monte Carlo");
  std::string sim_config, sim_out = ".", sim_duration;
  std::int64_t sim_seed = -1;
  bool sim_correlation = false;
  simulate->add_option("--config", sim_config, "Experiment config JSON")->required();
  simulate->add_option("--out", sim_out, "Output directory");
  simulate->add_option("--seed", sim_seed, "Override the config seed");
  simulate->add_option("--duration", sim_duration, "Override the run duration (s|ms|us|ns|ps)");
  simulate->add_flag("--correlation", sim_correlation,
                     "Source correlation run without analyzers (channels SIG/IDL)");
  simulate->callback([&] {
    exit_code = cmd_simulate(sim_config, sim_out, sim_seed, sim_duration, sim_correlation);
  });

  // hist
  auto* hist = app.add_subcommand("hist", "Signal-idler delay histogram");
  std::string h_input, h_a = "SIG", h_b = "IDL", h_bin = "1ps", h_range = "5ns";
  std::string h_sep = "500ps", h_out = ".";
  double h_prom = 10.0;
  bool h_fit_tau = false;
  hist->add_option("--input", h_input, "Tag stream (TTAG or TSV)")->required();
  hist->add_option("--ch-a", h_a, "First channel name");
  hist->add_option("--ch-b", h_b, "Second channel name");
  hist->add_option("--bin-width", h_bin, "Histogram bin width");
  hist->add_option("--range", h_range, "Maximum |delay|");
  hist->add_option("--peak-separation", h_sep, "Minimum peak separation");
  hist->add_option("--min-prominence", h_prom, "Minimum peak prominence (counts)");
  hist->add_flag("--fit-tau", h_fit_tau, "Fit a double-sided exponential to the histogram");
  hist->add_option("--out", h_out, "Output directory");
  hist->callback([&] {
    exit_code = cmd_hist(h_input, h_a, h_b, h_bin, h_range, h_sep, h_prom, h_fit_tau, h_out);
  });

  // coinc
  auto* coinc = app.add_subcommand("coinc", "Two-fold coincidences, accidentals and CAR");
  std::string c_input, c_a = "SIG", c_b = "IDL", c_window = "100ps", c_offset = "0";
  std::string c_period, c_duration, c_out = ".";
  coinc->add_option("--input", c_input, "Tag stream")->required();
  coinc->add_option("--ch-a", c_a, "First channel name");
  coinc->add_option("--ch-b", c_b, "Second channel name");
  coinc->add_option("--window", c_window, "Coincidence window (full width)");
  coinc->add_option("--offset", c_offset, "Window center offset");
  coinc->add_option("--period", c_period, "Pump period, enables the accidental estimate");
  coinc->add_option("--duration", c_duration, "Acquisition time (default: stream span)");
  coinc->add_option("--out", c_out, "Output directory");
  coinc->callback([&] {
    exit_code = cmd_coinc(c_input, c_a, c_b, c_window, c_offset, c_period, c_duration, c_out);
  });

  // triple
  auto* triple = app.add_subcommand("triple", "Clock-gated three-fold coincidences");
  std::string t_input, t_clock = "CLOCK", t_a = "A1", t_b = "B1";
  std::string t_gate_a, t_gate_b, t_period = "6.25ns", t_duration, t_out = ".";
  triple->add_option("--input", t_input, "Tag stream")->required();
  triple->add_option("--clock", t_clock, "Clock channel name");
  triple->add_option("--ch-a", t_a, "Signal channel name");
  triple->add_option("--ch-b", t_b, "Idler channel name");
  triple->add_option("--gate-a", t_gate_a, "Signal gate as offset,width")->required();
  triple->add_option("--gate-b", t_gate_b, "Idler gate as offset,width")->required();
  triple->add_option("--period", t_period, "Pump period");
  triple->add_option("--duration", t_duration, "Acquisition time (default: stream span)");
  triple->add_option("--out", t_out, "Output directory");
  triple->callback([&] {
    exit_code = cmd_triple(t_input, t_clock, t_a, t_b, t_gate_a, t_gate_b, t_period, t_duration,
                           t_out);
  });

  // fringe
  auto* fringe = app.add_subcommand("fringe", "Fit interference fringes and raw visibility");
  std::string f_input, f_out = ".";
  double f_alpha = 0.0;
  fringe->add_option("--input", f_input, "Fringe scan CSV")->required();
  fringe->add_option("--alpha", f_alpha, "Fixed analyzer phase alpha (rad)");
  fringe->add_option("--out", f_out, "Output directory");
  fringe->callback([&] { exit_code = cmd_fringe(f_input, f_alpha, f_out); });

  // chsh
  auto* chsh = app.add_subcommand("chsh", "CHSH S and violation significance from visibility");
  double s_vis = 0.0, s_sigma = 0.0;
  std::string s_out = ".";
  chsh->add_option("--visibility", s_vis, "Raw visibility")->required();
  chsh->add_option("--sigma", s_sigma, "1-sigma visibility error")->required();
  chsh->add_option("--out", s_out, "Output directory");
  chsh->callback([&] { exit_code = cmd_chsh(s_vis, s_sigma, s_out); });

  // tomo
  auto* tomo = app.add_subcommand("tomo", "Density-matrix reconstruction from counts");
  std::string m_counts, m_out = ".";
  int m_trials = 100, m_threads = 1;
  std::int64_t m_seed = 0;
  bool m_full = false;
  tomo->add_option("--counts", m_counts, "Counts JSON (16 settings)")->required();
  tomo->add_option("--trials", m_trials, "Monte Carlo trials (0 disables)");
  tomo->add_flag("--full", m_full, "Run the full 1000-trial Monte Carlo");
  tomo->add_option("--seed", m_seed, "Monte Carlo seed");
  tomo->add_option("--threads", m_threads, "Worker threads for the Monte Carlo");
  tomo->add_option("--out", m_out, "Output directory");
  tomo->callback([&] {
    exit_code = cmd_tomo(m_counts, m_trials, m_full, m_seed, m_threads, m_out);
  });

  // fit-resonance
  auto* fitres = app.add_subcommand("fit-resonance", "Lorentzian dip fit of a transmission trace");
  std::string r_input, r_out = ".";
  double r_radius_um = 0.0, r_group_index = 0.0;
  fitres->add_option("--input", r_input, "Transmission trace CSV")->required();
  fitres->add_option("--radius-um", r_radius_um, "Ring radius for the FSR estimate (um)");
  fitres->add_option("--group-index", r_group_index, "Group index for the FSR estimate");
  fitres->add_option("--out", r_out, "Output directory");
  fitres->callback(
      [&] { exit_code = cmd_fit_resonance(r_input, r_radius_um, r_group_index, r_out); });

  // fit-singles
  auto* fitsingles = app.add_subcommand("fit-singles", "Quadratic singles-rate power-law fit");
  std::string g_input, g_out = ".";
  double g_eval_mw = 0.0;
  fitsingles->add_option("--input", g_input, "Power sweep CSV")->required();
  fitsingles->add_option("--eval-power-mw", g_eval_mw, "Evaluate the fitted model at P (mW)");
  fitsingles->add_option("--out", g_out, "Output directory");
  fitsingles->callback([&] { exit_code = cmd_fit_singles(g_input, g_eval_mw, g_out); });

  // brightness
  auto* brightness = app.add_subcommand("brightness", "Source brightness figure of merit");
  double b_n2 = 8e-19, b_a_eff = 0.39, b_pump_nm = 1550.0, b_radius = 17.0, b_linewidth = 1.0;
  double b_ref_n2 = 0.0, b_ref_a_eff = 0.0, b_ref_radius = 0.0, b_ref_linewidth = 0.0;
  std::string b_out = ".";
  brightness->add_option("--n2", b_n2, "Nonlinear index n2 (m^2/W)");
  brightness->add_option("--a-eff-um2", b_a_eff, "Effective mode area (um^2)");
  brightness->add_option("--pump-nm", b_pump_nm, "Pump wavelength (nm)");
  brightness->add_option("--radius-um", b_radius, "Ring radius (um)");
  brightness->add_option("--linewidth-ghz", b_linewidth, "Resonance linewidth (GHz)");
  brightness->add_option("--ref-n2", b_ref_n2, "Reference design n2");
  brightness->add_option("--ref-a-eff-um2", b_ref_a_eff, "Reference mode area (um^2)");
  brightness->add_option("--ref-radius-um", b_ref_radius, "Reference ring radius (um)");
  brightness->add_option("--ref-linewidth-ghz", b_ref_linewidth, "Reference linewidth (GHz)");
  brightness->add_option("--out", b_out, "Output directory");
  brightness->callback([&] {
    exit_code = cmd_brightness(b_n2, b_a_eff, b_pump_nm, b_radius, b_linewidth, b_ref_n2,
                               b_ref_a_eff, b_ref_radius, b_ref_linewidth, b_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const qtb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qtb::FitError& e) {
    std::cerr << "analysis error (fit): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 3;
  }
  return exit_code;
}
