// fato_cli: bang-bang synthesis, FATO waveforms, fidelities, sweeps and the
// two-qubit SWAP study. Exit codes: 0 ok, 2 usage, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fato/fato.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace fato;

constexpr int kSchemaVersion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const CLI::Validator kFinite(
    [](std::string& s) -> std::string {
      try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) return "value must be a finite number";
      } catch (const std::exception&) {
        return "value must be a finite number";
      }
      return {};
    },
    "FINITE");

const CLI::Validator kFinitePositive(
    [](std::string& s) -> std::string {
      if (auto err = kFinite(s); !err.empty()) return err;
      if (!(std::stod(s) > 0.0)) return "value must be positive";
      return {};
    },
    "POSITIVE");

// ---------------------------------------------------------------- options

struct ParamOpts {
  double omega0 = 1.0;
  std::optional<double> omega_bar;
  std::optional<double> theta;
  std::optional<int> theta_frac;
};

void add_param_opts(CLI::App* sub, ParamOpts& o) {
  sub->add_option("--omega0", o.omega0, "Drift frequency w0 in rad/time (default 1)")->check(kFinitePositive);
  auto* ob = sub->add_option("--omega-bar", o.omega_bar, "Drive amplitude bound in rad/time")->check(kFinitePositive);
  auto* th = sub->add_option("--theta", o.theta, "Driving angle atan(omega_bar/omega0) in radians")->check(kFinite);
  auto* tf = sub->add_option("--theta-frac", o.theta_frac, "Shorthand for theta = pi/(2n)")
                 ->check(CLI::Range(1, 1000000));
  ob->excludes(th)->excludes(tf);
  th->excludes(tf);
}

DriveParams resolve(const ParamOpts& o) {
  const int given = o.omega_bar.has_value() + o.theta.has_value() + o.theta_frac.has_value();
  if (given != 1) throw UsageError("exactly one of --omega-bar, --theta, --theta-frac is required");
  if (o.omega_bar) return derive_params(o.omega0, *o.omega_bar);
  const double theta = o.theta ? *o.theta : kPi / (2.0 * *o.theta_frac);
  if (!(theta > 0.0 && theta < kPi / 2)) throw UsageError("--theta must lie in (0, pi/2)");
  return params_from_theta(o.omega0, theta);
}

Gate parse_gate(const std::string& s) {
  if (s == "x" || s == "X") return Gate::X;
  if (s == "y" || s == "Y") return Gate::Y;
  throw UsageError("--gate must be x or y");
}

const char* gate_name(Gate g) { return g == Gate::X ? "X" : "Y"; }

json params_json(const DriveParams& p) {
  return {{"omega0", p.omega0}, {"omega_bar", p.omega_bar}, {"theta", p.theta}, {"omega", p.omega}};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file " + path);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// K from --order or --bandwidth. A bandwidth below omega draws a warning;
// K is raised to 1 when the bandwidth admits no harmonic.
struct OrderChoice {
  int order = 0;
  std::optional<double> bandwidth;
};

OrderChoice choose_order(const std::optional<int>& order, const std::optional<double>& bandwidth,
                         const DriveParams& p, double period) {
  if (order.has_value() == bandwidth.has_value())
    throw UsageError("exactly one of --order, --bandwidth is required");
  if (order) return {*order, std::nullopt};
  if (*bandwidth < p.omega)
    std::cerr << "warning: --bandwidth " << format_double(*bandwidth) << " is below the minimum omega = "
              << format_double(p.omega) << "\n";
  int k = order_for_bandwidth(*bandwidth, period);
  if (k < 1) {
    std::cerr << "warning: --bandwidth admits no harmonic over T = " << format_double(period)
              << "; using K = 1\n";
    k = 1;
  }
  return {k, *bandwidth};
}

// "a:b:n" (linear, inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string& s) {
  auto number = [](const std::string& t) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw UsageError("--grid: cannot parse '" + t + "'");
    }
    if (pos != t.size() || !std::isfinite(v)) throw UsageError("--grid: cannot parse '" + t + "'");
    return v;
  };
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto i = s.find(':');
    const auto j = s.find(':', i + 1);
    const double a = number(s.substr(0, i));
    const double b = number(s.substr(i + 1, j - i - 1));
    const double n = number(s.substr(j + 1));
    if (n < 1 || n != std::floor(n) || n > 1e6) throw UsageError("--grid: point count must be a positive integer");
    if (n > 1 && !(b > a)) throw UsageError("--grid: need a < b");
    return linear_grid(a, b, static_cast<int>(n));
  }
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string t; std::getline(ss, t, ',');) out.push_back(number(t));
  if (out.empty()) throw UsageError("--grid is empty");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw UsageError("--grid must be strictly increasing");
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
  ParamOpts p;
  std::string gate;
  std::string output;
  int workers = 1;
};

int cmd_synth(const SynthOpts& o) {
  const DriveParams p = resolve(o.p);
  const Gate g = parse_gate(o.gate);
  SearchOptions so;
  so.workers = o.workers;
  const BangSequence seq = synthesize_pi(g, p, so);
  json bangs = json::array();
  for (const auto& b : seq.bangs()) bangs.push_back({{"level", b.level}, {"duration", b.duration}});
  const auto& meta = seq.metadata();
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "synth";
  j["gate"] = gate_name(g);
  j["params"] = params_json(p);
  j["solution"] = meta.count("solution") ? json(meta.at("solution")) : json(nullptr);
  j["bangs"] = bangs;
  j["total_time"] = seq.total_time();
  j["t2x_parsing"] = meta.count("t2x_parsing") ? json(meta.at("t2x_parsing")) : json(nullptr);
  j["gate_fidelity_check"] = trace_fidelity(gate_target(g), sequence_unitary(seq));
  emit(o.output, dump(j));
  return 0;
}

// ---------------------------------------------------------------- waveform

struct WaveformOpts {
  ParamOpts p;
  std::string gate;
  std::optional<int> order;
  std::optional<double> bandwidth;
  int samples = 2048;
  bool clamp = false;
  std::string output;
  std::string sidecar;
};

int cmd_waveform(const WaveformOpts& o) {
  const DriveParams p = resolve(o.p);
  const Gate g = parse_gate(o.gate);
  if (o.samples < 1) throw UsageError("--samples must be >= 1");
  const BangSequence seq = synthesize_pi(g, p);
  const OrderChoice k = choose_order(o.order, o.bandwidth, p, seq.total_time());
  FourierWaveform w = series_of(seq, k.order);
  if (k.bandwidth) w.bandwidth = *k.bandwidth;
  w.clamp = o.clamp;

  std::ostringstream csv;
  write_waveform_csv(csv, w, o.samples);
  emit(o.output, csv.str());

  if (!o.sidecar.empty()) {
    const double peak = peak_amplitude(w, 65536);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "waveform";
    j["gate"] = gate_name(g);
    j["params"] = params_json(p);
    j["period"] = w.period;
    j["order"] = w.order;
    j["bandwidth"] = w.bandwidth;
    j["c0"] = w.c0;
    j["tail_error"] = w.tail_error;
    j["samples"] = o.samples;
    j["clamp"] = o.clamp;
    j["peak_amplitude"] = peak;
    j["exceeds_bound"] = peak > 1.0;
    j["gibbs_reference"] = 2.0 * sine_integral(kPi) / kPi;
    emit(o.sidecar, dump(j));
  }
  return 0;
}

// ---------------------------------------------------------------- fidelity

struct FidelityOpts {
  ParamOpts p;
  std::string gate;
  std::optional<int> order;
  std::optional<double> bandwidth;
  double eps_omega0 = 0.0;
  double eps_amp = 0.0;
  std::string output;
};

int cmd_fidelity(const FidelityOpts& o) {
  const DriveParams p = resolve(o.p);
  const Gate g = parse_gate(o.gate);
  if (!(std::abs(o.eps_omega0) <= 0.2) || !(std::abs(o.eps_amp) <= 0.2))
    throw UsageError("--eps-omega0 and --eps-amp must satisfy |eps| <= 0.2");
  const BangSequence seq = synthesize_pi(g, p);
  const OrderChoice k = choose_order(o.order, o.bandwidth, p, seq.total_time());
  const FourierWaveform w = series_of(seq, k.order);
  const PropagationResult r = propagate_waveform(w, perturbed(p, o.eps_omega0, o.eps_amp), sequence_unitary(seq));
  const Regime regime = regime_of(p.theta);
  const bool weak = p.theta <= kPi / 4 + 1e-12;

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "fidelity";
  j["gate"] = gate_name(g);
  j["params"] = params_json(p);
  j["regime"] = regime == Regime::weak ? "weak" : "strong";
  j["T"] = seq.total_time();
  j["K"] = k.order;
  j["bandwidth"] = k.bandwidth ? json(*k.bandwidth) : json(nullptr);
  j["E_K"] = w.tail_error;
  j["tail_integral"] = 2.0 * w.tail_error;
  j["eps_omega0"] = o.eps_omega0;
  j["eps_amp"] = o.eps_amp;
  j["F_sim"] = r.fidelity;
  j["F_analytic_main"] = analytic_fidelity(regime, g, p.theta, w.tail_error, CoeffVariant::main_text);
  j["F_analytic_appendix"] = analytic_fidelity(regime, g, p.theta, w.tail_error, CoeffVariant::appendix);
  j["F_rwa"] = weak ? json(1.0 - rwa_infidelity(g, p, o.eps_omega0, o.eps_amp)) : json(nullptr);
  j["steps"] = r.steps;
  j["richardson_defect"] = r.richardson_defect;
  emit(o.output, dump(j));
  return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepOpts {
  ParamOpts p;
  std::string kind = "bandwidth";
  std::string gate = "x";
  std::string grid;
  std::string normalize = "omega0";
  std::string variant = "main";
  std::optional<int> order;
  std::optional<double> bandwidth;
  double amp = 100.0;
  double coupling = 1.0;
  int workers = 1;
  std::string output;
  std::string sidecar;
};

int cmd_sweep(const SweepOpts& o) {
  SweepSpec spec;
  const auto kind = parse_sweep_kind(o.kind);
  if (!kind) throw UsageError("--kind: unknown sweep kind '" + o.kind + "'");
  spec.kind = *kind;
  spec.workers = o.workers;
  spec.coupling = o.coupling;

  if (o.gate == "swap" || o.gate == "SWAP") spec.gate = SweepGate::SWAP;
  else spec.gate = parse_gate(o.gate) == Gate::X ? SweepGate::X : SweepGate::Y;
  if (is_swap_kind(spec.kind) != (spec.gate == SweepGate::SWAP))
    throw UsageError("--gate swap goes with --kind swap_bandwidth or swap_amp only");

  if (o.normalize == "omega0") spec.normalize = Normalization::omega0;
  else if (o.normalize == "omega_bar") spec.normalize = Normalization::omega_bar;
  else throw UsageError("--normalize must be omega0 or omega_bar");
  if (o.variant == "main") spec.variant = CoeffVariant::main_text;
  else if (o.variant == "appendix") spec.variant = CoeffVariant::appendix;
  else throw UsageError("--variant must be main or appendix");

  const bool needs_theta = spec.kind == SweepKind::bandwidth || spec.kind == SweepKind::detune_omega0 ||
                           spec.kind == SweepKind::detune_amp;
  if (needs_theta) {
    spec.base = resolve(o.p);
  } else {
    if (o.p.omega_bar || o.p.theta || o.p.theta_frac)
      throw UsageError("--kind " + o.kind + " sweeps theta itself; drop --omega-bar/--theta/--theta-frac");
    spec.base = derive_params(o.p.omega0, o.p.omega0);
  }

  if (spec.kind == SweepKind::theta || spec.kind == SweepKind::detune_omega0 || spec.kind == SweepKind::detune_amp) {
    if (o.order.has_value() == o.bandwidth.has_value())
      throw UsageError("--kind " + o.kind + " needs exactly one of --order, --bandwidth");
    if (o.order) spec.fixed["order"] = *o.order;
    else spec.fixed["bandwidth"] = *o.bandwidth;
  } else if (spec.kind == SweepKind::swap_bandwidth) {
    spec.fixed["amp"] = o.amp;
  } else if (spec.kind == SweepKind::swap_amp && o.bandwidth) {
    spec.fixed["bandwidth"] = *o.bandwidth;
  }

  if (!o.grid.empty()) {
    spec.grid = parse_grid(o.grid);
  } else if (spec.kind == SweepKind::theta) {
    // theta = pi/(2n), n = 2..16, parity matching the gate
    for (int n = 16; n >= 2; --n)
      if ((n % 2 == 1) == (spec.gate == SweepGate::X)) spec.grid.push_back(kPi / (2.0 * n));
  } else {
    throw UsageError("--grid is required for --kind " + o.kind);
  }

  const auto rows = run_sweep(spec);
  for (const auto& r : rows)
    if (!r.error.empty()) std::cerr << "warning: x=" << format_double(r.x) << ": " << r.error << "\n";
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  emit(o.output, csv.str());

  if (!o.sidecar.empty()) {
    json fixed = json::object();
    for (const auto& [k, v] : spec.fixed) fixed[k] = v;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "sweep";
    j["kind"] = o.kind;
    j["gate"] = spec.gate == SweepGate::SWAP ? "SWAP" : gate_name(spec.gate == SweepGate::X ? Gate::X : Gate::Y);
    j["normalize"] = o.normalize;
    j["variant"] = o.variant;
    j["params"] = needs_theta ? params_json(spec.base) : json{{"omega0", spec.base.omega0}};
    if (is_swap_kind(spec.kind)) j["coupling"] = spec.coupling;
    j["fixed"] = fixed;
    j["points"] = rows.size();
    emit(o.sidecar, dump(j));
  }
  return 0;
}

// ---------------------------------------------------------------- swap2q

struct SwapOpts {
  std::string mode = "schedule";
  double coupling = 1.0;
  double amp = 100.0;
  std::optional<double> bandwidth;
  std::string grid;
  int samples = 2048;
  int workers = 1;
  std::string output;
};

int cmd_swap2q(const SwapOpts& o) {
  const double j = o.coupling;
  if (o.mode == "bandwidth" || o.mode == "amp") {
    SweepOpts s;
    s.kind = o.mode == "bandwidth" ? "swap_bandwidth" : "swap_amp";
    s.gate = "swap";
    if (o.grid.empty()) throw UsageError("--grid is required for --mode " + o.mode);
    s.grid = o.grid;
    s.amp = o.amp;
    s.coupling = j;
    s.bandwidth = o.bandwidth;
    s.workers = o.workers;
    s.output = o.output;
    return cmd_sweep(s);
  }
  const TwoQubitDrive d = build_swap_schedule(j, o.amp * j);
  const double bw = o.bandwidth.value_or(400.0 * j);
  if (o.mode == "schedule") {
    const SwapFidelity f = fato_swap_fidelity(d, bw);
    json segs = json::array();
    for (const auto& s : d.segments)
      segs.push_back({{"x_level", s.x_level}, {"y_level", s.y_level}, {"duration", s.duration}});
    json out;
    out["schema_version"] = kSchemaVersion;
    out["command"] = "swap2q";
    out["coupling"] = j;
    out["drive_amp"] = d.drive_amp;
    out["assignment"] = d.assignment;
    out["segments"] = segs;
    out["total_time"] = d.total_time;
    out["zz_time"] = d.zz_time;
    out["bandwidth"] = bw;
    out["K"] = f.order;
    out["F_delta"] = trace_fidelity(swap_gate(), swap_delta_unitary(d));
    out["F_rect"] = f.f_rect;
    out["F_fato"] = f.f_fato;
    emit(o.output, dump(out));
    return 0;
  }
  if (o.mode == "profiles") {
    if (o.samples < 2) throw UsageError("--samples must be >= 2");
    if (!(bw >= 2.0 * kPi / d.total_time)) throw UsageError("--bandwidth below 2 pi / T admits no harmonic");
    const auto xs = d.x_profile();
    const auto ys = d.y_profile();
    const FourierWaveform wx = series_for_bandwidth(std::span<const Segment>(xs), bw);
    const FourierWaveform wy = series_for_bandwidth(std::span<const Segment>(ys), bw);
    auto level_at = [](const std::vector<Segment>& segs, double t) {
      double start = 0.0;
      for (const auto& s : segs) {
        if (t < start + s.duration) return s.level;
        start += s.duration;
      }
      return segs.back().level;
    };
    std::ostringstream csv;
    csv << "t,x_bb,y_bb,x_fato,y_fato\n";
    for (int i = 0; i < o.samples; ++i) {
      const double t = d.total_time * i / (o.samples - 1);
      csv << format_double(t) << ',' << format_double(level_at(xs, t)) << ',' << format_double(level_at(ys, t))
          << ',' << format_double(eval_unchecked(wx, t)) << ',' << format_double(eval_unchecked(wy, t)) << '\n';
    }
    emit(o.output, csv.str());
    return 0;
  }
  throw UsageError("--mode must be schedule, profiles, bandwidth or amp");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-optimal bang-bang and Fourier-approximated (FATO) qubit control"};
  app.require_subcommand(1);

  SynthOpts synth;
  auto* s = app.add_subcommand("synth", "Synthesize a time-optimal pi pulse (JSON)");
  add_param_opts(s, synth.p);
  s->add_option("--gate", synth.gate, "Target rotation: x or y")->required();
  s->add_option("--workers", synth.workers, "Threads for the numerical search")->check(CLI::Range(1, 256));
  s->add_option("--output", synth.output, "Output path (default stdout)");

  WaveformOpts wave;
  auto* w = app.add_subcommand("waveform", "Sample the truncated Fourier waveform (CSV t,f)");
  add_param_opts(w, wave.p);
  w->add_option("--gate", wave.gate, "Target rotation: x or y")->required();
  auto* wo = w->add_option("--order", wave.order, "Truncation order K")->check(CLI::NonNegativeNumber);
  auto* wb = w->add_option("--bandwidth", wave.bandwidth, "Bandwidth in rad/time; K = floor(bw T / 2pi)")
                 ->check(kFinitePositive);
  wo->excludes(wb);
  w->add_option("--samples", wave.samples, "Number of samples over [0, T] inclusive (default 2048)");
  w->add_flag("--clamp", wave.clamp, "Hard-limit |f| <= 1 (outside the FATO construction)");
  w->add_option("--output", wave.output, "CSV path (default stdout)");
  w->add_option("--sidecar", wave.sidecar, "JSON path for series metadata and peak amplitude");

  FidelityOpts fid;
  auto* f = app.add_subcommand("fidelity", "Simulated and closed-form FATO fidelity (JSON)");
  add_param_opts(f, fid.p);
  f->add_option("--gate", fid.gate, "Target rotation: x or y")->required();
  auto* fo = f->add_option("--order", fid.order, "Truncation order K")->check(CLI::NonNegativeNumber);
  auto* fb = f->add_option("--bandwidth", fid.bandwidth, "Bandwidth in rad/time")->check(kFinitePositive);
  fo->excludes(fb);
  f->add_option("--eps-omega0", fid.eps_omega0, "Fractional error on w0 in the physics")->check(kFinite);
  f->add_option("--eps-amp", fid.eps_amp, "Fractional error on the drive amplitude")->check(kFinite);
  f->add_option("--output", fid.output, "Output path (default stdout)");

  SweepOpts sw;
  auto* sp = app.add_subcommand("sweep", "Parameter sweep (CSV)");
  add_param_opts(sp, sw.p);
  sp->add_option("--kind", sw.kind,
                 "bandwidth | theta | detune_omega0 | detune_amp | time_ratio | swap_bandwidth | swap_amp");
  sp->add_option("--gate", sw.gate, "x, y or swap (default x)");
  sp->add_option("--grid", sw.grid, "a:b:n (linear, inclusive) or comma list; strictly increasing");
  sp->add_option("--normalize", sw.normalize, "Unit of the bandwidth axis: omega0 or omega_bar (default omega0)");
  sp->add_option("--variant", sw.variant, "Weak-regime closed form: main (pi/4) or appendix (pi/2)");
  auto* so = sp->add_option("--order", sw.order, "Fixed K for theta and detune sweeps")->check(CLI::NonNegativeNumber);
  auto* sb = sp->add_option("--bandwidth", sw.bandwidth, "Fixed bandwidth (rad/time) for theta, detune, swap_amp")
                 ->check(kFinitePositive);
  so->excludes(sb);
  sp->add_option("--amp", sw.amp, "SWAP pulse amplitude in units of J (default 100)")->check(kFinitePositive);
  sp->add_option("--coupling", sw.coupling, "ZZ coupling J (default 1)")->check(kFinitePositive);
  sp->add_option("--workers", sw.workers, "Worker threads (output does not depend on it)")->check(CLI::Range(1, 256));
  sp->add_option("--output", sw.output, "CSV path (default stdout)");
  sp->add_option("--sidecar", sw.sidecar, "JSON path recording the sweep settings");

  SwapOpts sq;
  auto* q = app.add_subcommand("swap2q", "SWAP from ZZ coupling and collective pi/2 pulses");
  q->add_option("--mode", sq.mode, "schedule (JSON) | profiles (CSV) | bandwidth (CSV) | amp (CSV)");
  q->add_option("--coupling", sq.coupling, "ZZ coupling J (default 1)")->check(kFinitePositive);
  q->add_option("--amp", sq.amp, "Pulse amplitude in units of J (default 100)")->check(kFinitePositive);
  q->add_option("--bandwidth", sq.bandwidth, "FATO bandwidth in rad/time (default 400 J)")->check(kFinitePositive);
  q->add_option("--grid", sq.grid, "Sweep grid in units of J: a:b:n or comma list");
  q->add_option("--samples", sq.samples, "Profile samples (default 2048)");
  q->add_option("--workers", sq.workers, "Worker threads")->check(CLI::Range(1, 256));
  q->add_option("--output", sq.output, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (w->parsed()) return cmd_waveform(wave);
    if (f->parsed()) return cmd_fidelity(fid);
    if (sp->parsed()) return cmd_sweep(sw);
    if (q->parsed()) return cmd_swap2q(sq);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_numerical() ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
