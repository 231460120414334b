#include "qtb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

constexpr double kFwhmToSigma = 2.354820045030949;  // 2 sqrt(2 ln 2)

struct PortAmplitudes {
  // amplitude coefficients for the short and long arm into each port
  std::complex<double> short_arm[2];
  std::complex<double> long_arm[2];
};

PortAmplitudes coupler_amplitudes(double splitting_ratio) {
  const double k = splitting_ratio;
  if (!(k > 0.0) || !(k < 1.0)) throw DomainError("splitting_ratio must be in (0,1)");
  const std::complex<double> i_unit(0.0, 1.0);
  PortAmplitudes pa;
  const double root = std::sqrt(k * (1.0 - k));
  pa.short_arm[0] = i_unit * root;  // port 1 (cross output)
  pa.long_arm[0] = i_unit * root;
  pa.short_arm[1] = 1.0 - k;  // port 2 (bar output)
  pa.long_arm[1] = -k;
  return pa;
}

std::uint8_t kClockId = 0;

TagStream make_entangled_channel_map() {
  TagStream s;
  s.channel_map = {{"CLOCK", 0}, {"A1", 1}, {"A2", 2}, {"B1", 3}, {"B2", 4}};
  return s;
}

TagStream make_correlation_channel_map() {
  TagStream s;
  s.channel_map = {{"SIG", 5}, {"IDL", 6}};
  return s;
}

const DetectorConfig& detector_for(const ExperimentConfig& cfg, const std::string& name) {
  auto it = cfg.detectors.find(name);
  if (it == cfg.detectors.end()) throw ConfigError("detectors." + name, "missing detector config");
  return it->second;
}

void validate_common(const ExperimentConfig& cfg) {
  if (cfg.duration_s < 0) throw ConfigError("duration_s", "must be non-negative");
  if (!(cfg.pump.repetition_rate_hz > 0)) throw ConfigError("pump.repetition_rate_hz", "must be positive");
  if (cfg.pump.mean_pairs_per_double_pulse < 0) {
    throw ConfigError("pump.mean_pairs_per_double_pulse", "must be non-negative");
  }
  if (!(cfg.source.coherence_time_s > 0)) throw ConfigError("source.coherence_time_s", "must be positive");
  cfg.state.validate();
}

void validate_entangled(const ExperimentConfig& cfg) {
  validate_common(cfg);
  if (!(cfg.pump.bin_separation_s > cfg.pump.pulse_fwhm_s)) {
    throw ConfigError("pump.bin_separation_s", "must exceed the pulse FWHM");
  }
  if (1.0 / cfg.pump.repetition_rate_hz <= 2.0 * cfg.pump.bin_separation_s) {
    throw ConfigError("pump.repetition_rate_hz", "period must exceed twice the bin separation");
  }
  for (const auto* umzi : {&cfg.umzi_signal, &cfg.umzi_idler}) {
    const double rel = std::abs(umzi->delay_s - cfg.pump.bin_separation_s) / cfg.pump.bin_separation_s;
    if (rel > 1e-9) {
      throw ConfigError(umzi == &cfg.umzi_signal ? "umzi_signal.delay_s" : "umzi_idler.delay_s",
                        "path imbalance must equal the pump bin separation");
    }
  }
  for (const char* name : {"A1", "A2", "B1", "B2"}) detector_for(cfg, name);
}

/// CDF of Exp(tau) + N(0, sigma) at x (exponentially modified Gaussian).
double emg_cdf(double x, double sigma, double tau) {
  if (sigma <= 0) return x > 0 ? -std::expm1(-x / tau) : 0.0;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const double phi_x = 0.5 * std::erfc(-x / sigma * inv_sqrt2);
  const double b = x / sigma - sigma / tau;
  const double a = sigma * sigma / (2.0 * tau * tau) - x / tau;
  double term;
  if (b < -6.0) {
    // log-domain tail to avoid exp overflow for x far below the gate
    const double log_phi_b = -0.5 * b * b - std::log(-b * std::sqrt(2.0 * std::numbers::pi));
    term = std::exp(a + log_phi_b);
  } else {
    term = std::exp(a) * 0.5 * std::erfc(-b * inv_sqrt2);
  }
  return std::clamp(phi_x - term, 0.0, 1.0);
}

/// P(slot photon lands in [g0,g1] relative to the clock), given the shared
/// emission offset u.
double gate_probability(double u, int slot, double bin_sep, double g0, double g1, double sigma_j,
                        double tau) {
  const double base = slot * bin_sep + u;
  return emg_cdf(g1 - base, sigma_j, tau) - emg_cdf(g0 - base, sigma_j, tau);
}

}  // namespace

std::array<UmziOutcome, 6> apply_umzi(std::complex<double> amp_early,
                                      std::complex<double> amp_late, const UmziConfig& cfg) {
  const double norm = std::norm(amp_early) + std::norm(amp_late);
  if (norm > 1.0 + 1e-9) throw DomainError("apply_umzi: input amplitudes exceed unit norm");
  const PortAmplitudes pa = coupler_amplitudes(cfg.splitting_ratio);
  const std::complex<double> phase = std::polar(1.0, cfg.phase_rad);

  std::array<UmziOutcome, 6> out;
  for (int p = 0; p < 2; ++p) {
    out[p * 3 + 0] = {p + 1, Slot::kEarly, amp_early * pa.short_arm[p]};
    out[p * 3 + 1] = {p + 1, Slot::kMiddle,
                      amp_early * phase * pa.long_arm[p] + amp_late * pa.short_arm[p]};
    out[p * 3 + 2] = {p + 1, Slot::kLate, amp_late * phase * pa.long_arm[p]};
  }
  return out;
}

std::array<JointOutcome, 36> joint_outcome_distribution(const TimeBinState& state,
                                                        const UmziConfig& signal,
                                                        const UmziConfig& idler) {
  state.validate();
  const auto sig_e = apply_umzi(1.0, 0.0, signal);
  const auto sig_l = apply_umzi(0.0, 1.0, signal);
  const auto idl_e = apply_umzi(1.0, 0.0, idler);
  const auto idl_l = apply_umzi(0.0, 1.0, idler);

  std::array<JointOutcome, 36> joint;
  for (int s = 0; s < 6; ++s) {
    for (int i = 0; i < 6; ++i) {
      std::complex<double> amp = 0.0;
      // basis order {ee, el, le, ll}: signal label is the slow index
      amp += state.amplitudes[kEE] * sig_e[s].amplitude * idl_e[i].amplitude;
      amp += state.amplitudes[kEL] * sig_e[s].amplitude * idl_l[i].amplitude;
      amp += state.amplitudes[kLE] * sig_l[s].amplitude * idl_e[i].amplitude;
      amp += state.amplitudes[kLL] * sig_l[s].amplitude * idl_l[i].amplitude;
      JointOutcome& o = joint[s * 6 + i];
      o.port_signal = sig_e[s].port;
      o.slot_signal = sig_e[s].slot;
      o.port_idler = idl_e[i].port;
      o.slot_idler = idl_e[i].slot;
      o.probability = std::norm(amp);
    }
  }
  return joint;
}

namespace {

/// Samples n >= 1 from Poisson(mu) conditioned on n >= 1.
int truncated_poisson(std::mt19937_64& rng, double mu) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double norm = -std::expm1(-mu);  // P(n >= 1)
  double u = uni(rng) * norm;
  double pmf = mu * std::exp(-mu);
  int n = 1;
  while (u > pmf && n < 64) {
    u -= pmf;
    ++n;
    pmf *= mu / n;
  }
  return n;
}

void append_dark_counts(std::vector<TagRecord>& events, std::mt19937_64& rng, std::uint8_t channel,
                        double rate_hz, double duration_s, std::uint64_t* dark_tags) {
  if (rate_hz <= 0 || duration_s <= 0) return;
  std::poisson_distribution<std::uint64_t> pois(rate_hz * duration_s);
  std::uniform_real_distribution<double> uni(0.0, duration_s);
  const std::uint64_t n = pois(rng);
  for (std::uint64_t i = 0; i < n; ++i) {
    events.push_back({static_cast<std::uint64_t>(uni(rng) * 1e12), channel});
  }
  *dark_tags += n;
}

/// Merges unsorted photon/dark events with an implicit in-order clock train
/// and applies per-channel dead time. Clock tags are electrical and exempt.
void assemble_stream(SimulationResult& result, std::vector<TagRecord>& events,
                     std::uint64_t n_pulses, double period_ps, bool emit_clock,
                     const std::array<double, 256>& dead_ps) {
  std::sort(events.begin(), events.end());
  auto& records = result.stream.records;
  records.reserve(events.size() + (emit_clock ? n_pulses : 0));
  std::size_t ie = 0;
  if (emit_clock) {
    for (std::uint64_t k = 0; k < n_pulses; ++k) {
      const auto t_clk = static_cast<std::uint64_t>(std::llround(k * period_ps));
      const TagRecord clk{t_clk, kClockId};
      while (ie < events.size() && events[ie] < clk) records.push_back(events[ie++]);
      records.push_back(clk);
    }
  }
  records.insert(records.end(), events.begin() + ie, events.end());
  events.clear();
  events.shrink_to_fit();

  // Dead-time pass (records are sorted; per-channel last accepted time).
  std::array<std::int64_t, 256> last;
  last.fill(std::numeric_limits<std::int64_t>::min());
  std::size_t w = 0;
  std::uint64_t removed = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto ch = records[r].channel;
    const auto t = static_cast<std::int64_t>(records[r].time_ps);
    if (dead_ps[ch] > 0 && t - last[ch] < dead_ps[ch]) {
      ++removed;
      continue;
    }
    last[ch] = t;
    records[w++] = records[r];
  }
  records.resize(w);
  result.tags_removed_dead_time = removed;
}

}  // namespace

SimulationResult simulate_experiment(const ExperimentConfig& cfg) {
  validate_entangled(cfg);
  SimulationResult result;
  result.stream = make_entangled_channel_map();

  const double period_s = 1.0 / cfg.pump.repetition_rate_hz;
  const double period_ps = period_s * 1e12;
  const auto n_pulses = static_cast<std::uint64_t>(cfg.duration_s / period_s + 1e-9);
  const double mu = cfg.pump.mean_pairs_per_double_pulse;
  const double bin_sep_ps = cfg.pump.bin_separation_s * 1e12;
  const double smear_sigma =
      cfg.source.pulse_smear ? cfg.pump.pulse_fwhm_s / kFwhmToSigma : 0.0;

  // Per-(side, port) channel ids and detector settings.
  struct ChannelInfo {
    std::uint8_t id;
    double survival;  // transmittance x efficiency
    double jitter_s;
  };
  ChannelInfo sig_chan[2] = {
      {1, cfg.umzi_signal.transmittance * detector_for(cfg, "A1").efficiency,
       detector_for(cfg, "A1").jitter_sigma_s},
      {2, cfg.umzi_signal.transmittance * detector_for(cfg, "A2").efficiency,
       detector_for(cfg, "A2").jitter_sigma_s}};
  ChannelInfo idl_chan[2] = {
      {3, cfg.umzi_idler.transmittance * detector_for(cfg, "B1").efficiency,
       detector_for(cfg, "B1").jitter_sigma_s},
      {4, cfg.umzi_idler.transmittance * detector_for(cfg, "B2").efficiency,
       detector_for(cfg, "B2").jitter_sigma_s}};

  const auto joint = joint_outcome_distribution(cfg.state, cfg.umzi_signal, cfg.umzi_idler);
  std::array<double, 36> cumulative{};
  double acc = 0.0;
  for (int i = 0; i < 36; ++i) {
    acc += joint[i].probability;
    cumulative[i] = acc;
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> decay(1.0 / cfg.source.coherence_time_s);

  std::vector<TagRecord> events;
  if (mu > 0 && n_pulses > 0) {
    const double p_emit = -std::expm1(-mu);
    std::geometric_distribution<std::uint64_t> skip(p_emit);
    for (std::uint64_t k = skip(rng); k < n_pulses; k += 1 + skip(rng)) {
      const double clock_ps = k * period_ps;
      const int n_pairs = truncated_poisson(rng, mu);
      for (int pair = 0; pair < n_pairs; ++pair) {
        ++result.pairs_emitted;
        const double u_ps = smear_sigma > 0 ? gauss(rng) * smear_sigma * 1e12 : 0.0;
        const double pick = uni(rng) * acc;
        const int idx = static_cast<int>(
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        const JointOutcome& o = joint[std::min(idx, 35)];

        const ChannelInfo& cs = sig_chan[o.port_signal - 1];
        if (uni(rng) < cs.survival) {
          double t = clock_ps + static_cast<int>(o.slot_signal) * bin_sep_ps + u_ps +
                     decay(rng) * 1e12;
          if (cs.jitter_s > 0) t += gauss(rng) * cs.jitter_s * 1e12;
          events.push_back({static_cast<std::uint64_t>(std::max(0.0, t)), cs.id});
        }
        const ChannelInfo& ci = idl_chan[o.port_idler - 1];
        if (uni(rng) < ci.survival) {
          double t = clock_ps + static_cast<int>(o.slot_idler) * bin_sep_ps + u_ps +
                     decay(rng) * 1e12;
          if (ci.jitter_s > 0) t += gauss(rng) * ci.jitter_s * 1e12;
          events.push_back({static_cast<std::uint64_t>(std::max(0.0, t)), ci.id});
        }
      }
    }
  }
  result.photon_tags = events.size();

  for (const char* name : {"A1", "A2", "B1", "B2"}) {
    append_dark_counts(events, rng, result.stream.channel_id(name),
                       detector_for(cfg, name).dark_rate_hz, cfg.duration_s, &result.dark_tags);
  }

  std::array<double, 256> dead_ps{};
  for (const auto& [name, det] : cfg.detectors) {
    auto it = result.stream.channel_map.find(name);
    if (it != result.stream.channel_map.end()) dead_ps[it->second] = det.dead_time_s * 1e12;
  }
  const std::uint64_t detector_tags = events.size();
  assemble_stream(result, events, n_pulses, period_ps, /*emit_clock=*/true, dead_ps);
  if (detector_tags > 0 && result.tags_removed_dead_time * 10 > detector_tags) {
    result.warnings.push_back("dead time removed more than 10% of detector tags");
  }
  return result;
}

SimulationResult simulate_correlation_run(const ExperimentConfig& cfg) {
  validate_common(cfg);
  for (const char* name : {"SIG", "IDL"}) detector_for(cfg, name);

  SimulationResult result;
  result.stream = make_correlation_channel_map();

  const double period_s = 1.0 / cfg.pump.repetition_rate_hz;
  const double period_ps = period_s * 1e12;
  const auto n_pulses = static_cast<std::uint64_t>(cfg.duration_s / period_s + 1e-9);
  const double mu = cfg.pump.mean_pairs_per_double_pulse;
  const double smear_sigma =
      cfg.source.pulse_smear ? cfg.pump.pulse_fwhm_s / kFwhmToSigma : 0.0;

  const DetectorConfig& det_sig = detector_for(cfg, "SIG");
  const DetectorConfig& det_idl = detector_for(cfg, "IDL");
  const std::uint8_t id_sig = result.stream.channel_id("SIG");
  const std::uint8_t id_idl = result.stream.channel_id("IDL");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> decay(1.0 / cfg.source.coherence_time_s);

  std::vector<TagRecord> events;
  if (mu > 0 && n_pulses > 0) {
    const double p_emit = -std::expm1(-mu);
    std::geometric_distribution<std::uint64_t> skip(p_emit);
    for (std::uint64_t k = skip(rng); k < n_pulses; k += 1 + skip(rng)) {
      const double clock_ps = k * period_ps;
      const int n_pairs = truncated_poisson(rng, mu);
      for (int pair = 0; pair < n_pairs; ++pair) {
        ++result.pairs_emitted;
        const double u_ps = smear_sigma > 0 ? gauss(rng) * smear_sigma * 1e12 : 0.0;
        if (uni(rng) < det_sig.efficiency) {
          double t = clock_ps + u_ps + decay(rng) * 1e12;
          if (det_sig.jitter_sigma_s > 0) t += gauss(rng) * det_sig.jitter_sigma_s * 1e12;
          events.push_back({static_cast<std::uint64_t>(std::max(0.0, t)), id_sig});
        }
        if (uni(rng) < det_idl.efficiency) {
          double t = clock_ps + u_ps + decay(rng) * 1e12;
          if (det_idl.jitter_sigma_s > 0) t += gauss(rng) * det_idl.jitter_sigma_s * 1e12;
          events.push_back({static_cast<std::uint64_t>(std::max(0.0, t)), id_idl});
        }
      }
    }
  }
  result.photon_tags = events.size();
  append_dark_counts(events, rng, id_sig, det_sig.dark_rate_hz, cfg.duration_s, &result.dark_tags);
  append_dark_counts(events, rng, id_idl, det_idl.dark_rate_hz, cfg.duration_s, &result.dark_tags);

  std::array<double, 256> dead_ps{};
  dead_ps[id_sig] = det_sig.dead_time_s * 1e12;
  dead_ps[id_idl] = det_idl.dead_time_s * 1e12;
  const std::uint64_t detector_tags = events.size();
  assemble_stream(result, events, 0, period_ps, /*emit_clock=*/false, dead_ps);
  if (detector_tags > 0 && result.tags_removed_dead_time * 10 > detector_tags) {
    result.warnings.push_back("dead time removed more than 10% of detector tags");
  }
  return result;
}

double expected_triple_probability(const ExperimentConfig& cfg, int port_signal, int port_idler,
                                   double gate_a_offset_s, double gate_a_width_s,
                                   double gate_b_offset_s, double gate_b_width_s) {
  validate_entangled(cfg);
  if (port_signal < 1 || port_signal > 2 || port_idler < 1 || port_idler > 2) {
    throw DomainError("expected_triple_probability: ports are 1 or 2");
  }
  const double mu = cfg.pump.mean_pairs_per_double_pulse;
  const double tau = cfg.source.coherence_time_s;
  const double bin_sep = cfg.pump.bin_separation_s;
  const double smear_sigma = cfg.source.pulse_smear ? cfg.pump.pulse_fwhm_s / kFwhmToSigma : 0.0;

  const char* sig_name = port_signal == 1 ? "A1" : "A2";
  const char* idl_name = port_idler == 1 ? "B1" : "B2";
  const DetectorConfig& det_a = detector_for(cfg, sig_name);
  const DetectorConfig& det_b = detector_for(cfg, idl_name);
  const double eta_a = cfg.umzi_signal.transmittance * det_a.efficiency;
  const double eta_b = cfg.umzi_idler.transmittance * det_b.efficiency;
  const double a0 = gate_a_offset_s, a1 = gate_a_offset_s + gate_a_width_s;
  const double b0 = gate_b_offset_s, b1 = gate_b_offset_s + gate_b_width_s;

  const auto joint = joint_outcome_distribution(cfg.state, cfg.umzi_signal, cfg.umzi_idler);

  // Quadrature over the shared emission offset u (Gaussian weight).
  std::vector<std::pair<double, double>> u_nodes;  // (u, weight)
  if (smear_sigma > 0) {
    const int n = 400;
    const double span = 8.0 * smear_sigma;
    const double h = 2.0 * span / n;
    double wsum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double u = -span + i * h;
      double w = std::exp(-u * u / (2.0 * smear_sigma * smear_sigma));
      w *= (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);  // Simpson
      u_nodes.emplace_back(u, w);
      wsum += w;
    }
    for (auto& [u, w] : u_nodes) w /= wsum;
  } else {
    u_nodes.emplace_back(0.0, 1.0);
  }

  // z: per-pair marginal click probabilities in each gate.
  // w: per-pair probability of clicks in both gates (shared emission offset).
  double z_a = 0.0, z_b = 0.0, w_ab = 0.0;
  for (const auto& [u, wq] : u_nodes) {
    double pa = 0.0, pb = 0.0, pab = 0.0;
    for (const JointOutcome& o : joint) {
      const double ga = o.port_signal == port_signal
                            ? gate_probability(u, static_cast<int>(o.slot_signal), bin_sep, a0, a1,
                                               det_a.jitter_sigma_s, tau)
                            : 0.0;
      const double gb = o.port_idler == port_idler
                            ? gate_probability(u, static_cast<int>(o.slot_idler), bin_sep, b0, b1,
                                               det_b.jitter_sigma_s, tau)
                            : 0.0;
      pa += o.probability * ga;
      pb += o.probability * gb;
      pab += o.probability * ga * gb;
    }
    z_a += wq * pa;
    z_b += wq * pb;
    w_ab += wq * pab;
  }
  z_a *= eta_a;
  z_b *= eta_b;
  w_ab *= eta_a * eta_b;

  const double dark_a = det_a.dark_rate_hz * gate_a_width_s;
  const double dark_b = det_b.dark_rate_hz * gate_b_width_s;
  return 1.0 - std::exp(-(mu * z_a + dark_a)) - std::exp(-(mu * z_b + dark_b)) +
         std::exp(-(mu * (z_a + z_b - w_ab) + dark_a + dark_b));
}

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(path + "." + key, "missing or non-numeric field");
  }
  return j[key].get<double>();
}

UmziConfig parse_umzi(const json& j, const std::string& path) {
  UmziConfig u;
  u.delay_s = require_number(j, path, "delay_s");
  u.phase_rad = require_number(j, path, "phase_rad");
  u.phase_rad = std::fmod(u.phase_rad, 2.0 * std::numbers::pi);
  if (u.phase_rad < 0) u.phase_rad += 2.0 * std::numbers::pi;
  if (j.contains("transmittance")) u.transmittance = j["transmittance"].get<double>();
  if (j.contains("splitting_ratio")) u.splitting_ratio = j["splitting_ratio"].get<double>();
  if (!(u.delay_s > 0)) throw ConfigError(path + ".delay_s", "must be positive");
  if (!(u.transmittance > 0) || u.transmittance > 1.0) {
    throw ConfigError(path + ".transmittance", "must be in (0,1]");
  }
  return u;
}

DetectorConfig parse_detector(const json& j, const std::string& path) {
  DetectorConfig d;
  d.efficiency = require_number(j, path, "efficiency");
  if (d.efficiency < 0 || d.efficiency > 1) throw ConfigError(path + ".efficiency", "must be in [0,1]");
  if (j.contains("dark_rate_hz")) d.dark_rate_hz = j["dark_rate_hz"].get<double>();
  if (j.contains("jitter_sigma_s")) d.jitter_sigma_s = j["jitter_sigma_s"].get<double>();
  if (j.contains("dead_time_s")) d.dead_time_s = j["dead_time_s"].get<double>();
  if (d.dark_rate_hz < 0) throw ConfigError(path + ".dark_rate_hz", "must be non-negative");
  if (d.dead_time_s < 0) throw ConfigError(path + ".dead_time_s", "must be non-negative");
  return d;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("JSON parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("pump")) throw ConfigError("pump", "missing section");
  const json& jp = j["pump"];
  cfg.pump.pulse_fwhm_s = require_number(jp, "pump", "pulse_fwhm_s");
  cfg.pump.bin_separation_s = require_number(jp, "pump", "bin_separation_s");
  cfg.pump.repetition_rate_hz = require_number(jp, "pump", "repetition_rate_hz");
  cfg.pump.mean_pairs_per_double_pulse = require_number(jp, "pump", "mean_pairs_per_double_pulse");

  if (j.contains("source")) {
    const json& js = j["source"];
    if (js.contains("coherence_time_s")) cfg.source.coherence_time_s = js["coherence_time_s"].get<double>();
    if (js.contains("pulse_smear")) cfg.source.pulse_smear = js["pulse_smear"].get<bool>();
  }

  if (!j.contains("state") || !j["state"].is_array() || j["state"].size() != 8) {
    throw ConfigError("state", "expected 8 real numbers (re/im of 4 amplitudes)");
  }
  for (int i = 0; i < 4; ++i) {
    cfg.state.amplitudes[i] = std::complex<double>(j["state"][2 * i].get<double>(),
                                                   j["state"][2 * i + 1].get<double>());
  }

  if (!j.contains("umzi_signal")) throw ConfigError("umzi_signal", "missing section");
  if (!j.contains("umzi_idler")) throw ConfigError("umzi_idler", "missing section");
  cfg.umzi_signal = parse_umzi(j["umzi_signal"], "umzi_signal");
  cfg.umzi_idler = parse_umzi(j["umzi_idler"], "umzi_idler");

  if (!j.contains("detectors") || !j["detectors"].is_object()) {
    throw ConfigError("detectors", "missing section");
  }
  for (const auto& [name, jd] : j["detectors"].items()) {
    cfg.detectors[name] = parse_detector(jd, "detectors." + name);
  }

  if (!j.contains("duration_s") || !j["duration_s"].is_number()) {
    throw ConfigError("duration_s", "missing or non-numeric field");
  }
  cfg.duration_s = j["duration_s"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  json j;
  j["pump"] = {{"pulse_fwhm_s", cfg.pump.pulse_fwhm_s},
               {"bin_separation_s", cfg.pump.bin_separation_s},
               {"repetition_rate_hz", cfg.pump.repetition_rate_hz},
               {"mean_pairs_per_double_pulse", cfg.pump.mean_pairs_per_double_pulse}};
  j["source"] = {{"coherence_time_s", cfg.source.coherence_time_s},
                 {"pulse_smear", cfg.source.pulse_smear}};
  j["state"] = json::array();
  for (int i = 0; i < 4; ++i) {
    j["state"].push_back(cfg.state.amplitudes[i].real());
    j["state"].push_back(cfg.state.amplitudes[i].imag());
  }
  for (const auto* u : {&cfg.umzi_signal, &cfg.umzi_idler}) {
    json ju = {{"delay_s", u->delay_s},
               {"phase_rad", u->phase_rad},
               {"transmittance", u->transmittance},
               {"splitting_ratio", u->splitting_ratio}};
    j[u == &cfg.umzi_signal ? "umzi_signal" : "umzi_idler"] = ju;
  }
  j["detectors"] = json::object();
  for (const auto& [name, d] : cfg.detectors) {
    j["detectors"][name] = {{"efficiency", d.efficiency},
                            {"dark_rate_hz", d.dark_rate_hz},
                            {"jitter_sigma_s", d.jitter_sigma_s},
                            {"dead_time_s", d.dead_time_s}};
  }
  j["duration_s"] = cfg.duration_s;
  j["seed"] = cfg.seed;
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot open config output");
  out << j.dump(2) << '\n';
}

}  // namespace qtb
