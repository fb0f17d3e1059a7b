#pragma once

// Parameter sweeps over bandwidth, driving strength, parameter offsets and
// the two-qubit SWAP schedule. Grid points are independent; results come
// back in grid order whatever the worker count.

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fato/bangbang.hpp"
#include "fato/dynamics.hpp"
#include "fato/format.hpp"
#include "fato/fourier.hpp"
#include "fato/twoqubit.hpp"

namespace fato {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class SweepKind { bandwidth, theta, detune_omega0, detune_amp, time_ratio, swap_bandwidth, swap_amp };
enum class SweepGate { X, Y, SWAP };

// Unit for the x column of bandwidth sweeps.
enum class Normalization { omega0, omega_bar };

struct SweepSpec {
  SweepKind kind = SweepKind::bandwidth;
  SweepGate gate = SweepGate::X;
  std::vector<double> grid;
  DriveParams base{};
  double coupling = 1.0;  // J for the SWAP kinds
  // Held-constant values, by kind:
  //   theta:            "order" (K) or "bandwidth" (absolute)
  //   detune_*:         "order" or "bandwidth"
  //   swap_bandwidth:   "amp" (Omega / J, default 100)
  //   swap_amp:         "bandwidth" (absolute, optional)
  std::map<std::string, double> fixed;
  Normalization normalize = Normalization::omega0;
  CoeffVariant variant = CoeffVariant::main_text;
  int workers = 1;
};

struct SweepRecord {
  double x = kNaN;
  double fidelity_sim = kNaN;
  double fidelity_analytic = kNaN;
  double fidelity_rwa = kNaN;
  double total_time = kNaN;
  std::optional<int> order_K;
  double e_k = kNaN;
  std::string error;  // Errc name of a failed point, empty otherwise
};

inline std::string_view sweep_kind_name(SweepKind k) {
  switch (k) {
    case SweepKind::bandwidth: return "bandwidth";
    case SweepKind::theta: return "theta";
    case SweepKind::detune_omega0: return "detune_omega0";
    case SweepKind::detune_amp: return "detune_amp";
    case SweepKind::time_ratio: return "time_ratio";
    case SweepKind::swap_bandwidth: return "swap_bandwidth";
    case SweepKind::swap_amp: return "swap_amp";
  }
  return "unknown";
}

inline std::optional<SweepKind> parse_sweep_kind(std::string_view s) {
  for (auto k : {SweepKind::bandwidth, SweepKind::theta, SweepKind::detune_omega0, SweepKind::detune_amp,
                 SweepKind::time_ratio, SweepKind::swap_bandwidth, SweepKind::swap_amp})
    if (sweep_kind_name(k) == s) return k;
  return std::nullopt;
}

inline bool is_swap_kind(SweepKind k) { return k == SweepKind::swap_bandwidth || k == SweepKind::swap_amp; }

// ---------------------------------------------------------------- RWA drive

// On-resonance drive Omega_bar cos(w0 t) (X) or sin(w0 t) (Y) for
// T = 2 pi / Omega_bar, nominal carrier and frame, physics offset by the
// given fractions. Returns 1 - fidelity against the target pi rotation.
inline double rwa_infidelity(Gate gate, const DriveParams& p, double eps_omega0 = 0.0, double eps_amp = 0.0) {
  if (p.theta > kPi / 4 + 1e-12)
    throw Error(Errc::strong_regime, "on-resonance reference only defined for theta <= pi/4");
  const DriveParams actual = perturbed(p, eps_omega0, eps_amp);
  const double total = 2.0 * kPi / p.omega_bar;
  const double w0 = p.omega0;
  // actual Omega_bar enters through `actual`; the drive shape is unit-amplitude
  auto drive = [&](double t) { return gate == Gate::X ? std::cos(w0 * t) : std::sin(w0 * t); };
  // lab-frame target: free precession at the nominal w0, then the rotation
  const CMat target = su2_evolution({0.0, 0.0, 0.5 * w0}, total) * gate_target(gate);
  const double h0 = std::min(total, 2.0 * kPi / w0) / 64.0;
  const PropagationResult r = propagate_drive(actual, drive, total, target, h0);
  return 1.0 - r.fidelity;
}

// ---------------------------------------------------------------- points

namespace detail {

inline int order_from_fixed(const std::map<std::string, double>& fixed, double period) {
  if (auto it = fixed.find("order"); it != fixed.end()) {
    if (!(it->second >= 0.0) || it->second != std::floor(it->second))
      throw Error(Errc::invalid_argument, "fixed order must be a non-negative integer");
    return static_cast<int>(it->second);
  }
  if (auto it = fixed.find("bandwidth"); it != fixed.end()) return order_for_bandwidth(it->second, period);
  throw Error(Errc::invalid_argument, "sweep needs a fixed order or bandwidth");
}

}  // namespace detail

// FATO fidelity at order K, optionally with physics offsets; the analytic
// and on-resonance columns are filled where they apply.
inline SweepRecord fato_point(Gate gate, const DriveParams& p, const BangSequence& seq, int order,
                              double eps_omega0, double eps_amp, CoeffVariant variant) {
  SweepRecord r;
  const FourierWaveform w = series_of(seq, order);
  const PropagationResult prop = propagate_waveform(w, perturbed(p, eps_omega0, eps_amp), sequence_unitary(seq));
  r.fidelity_sim = prop.fidelity;
  r.total_time = seq.total_time();
  r.order_K = order;
  r.e_k = w.tail_error;
  if (eps_omega0 == 0.0 && eps_amp == 0.0)
    r.fidelity_analytic = analytic_fidelity(regime_of(p.theta), gate, p.theta, w.tail_error, variant);
  if (p.theta <= kPi / 4 + 1e-12) r.fidelity_rwa = 1.0 - rwa_infidelity(gate, p, eps_omega0, eps_amp);
  return r;
}

inline SweepRecord robustness_point(Gate gate, const DriveParams& p, int order, double eps_omega0, double eps_amp,
                                    const SearchOptions& opt = {}) {
  if (!(std::abs(eps_omega0) <= 0.2) || !(std::abs(eps_amp) <= 0.2))
    throw Error(Errc::invalid_argument, "fractional errors must satisfy |eps| <= 0.2");
  const BangSequence seq = synthesize_pi(gate, p, opt);
  SweepRecord r = fato_point(gate, p, seq, order, eps_omega0, eps_amp, CoeffVariant::main_text);
  r.x = eps_omega0 != 0.0 ? eps_omega0 : eps_amp;
  return r;
}

namespace detail {

inline Gate single_gate(SweepGate g) {
  if (g == SweepGate::SWAP) throw Error(Errc::invalid_argument, "single-qubit sweep needs gate X or Y");
  return g == SweepGate::X ? Gate::X : Gate::Y;
}

inline SweepRecord compute_point(const SweepSpec& spec, double x) {
  switch (spec.kind) {
    case SweepKind::bandwidth: {
      const Gate gate = single_gate(spec.gate);
      const BangSequence seq = synthesize_pi(gate, spec.base);
      const double unit = spec.normalize == Normalization::omega0 ? spec.base.omega0 : spec.base.omega_bar;
      const int order = order_for_bandwidth(x * unit, seq.total_time());
      return fato_point(gate, spec.base, seq, order, 0.0, 0.0, spec.variant);
    }
    case SweepKind::theta: {
      const Gate gate = single_gate(spec.gate);
      const DriveParams p = params_from_theta(spec.base.omega0, x);
      const BangSequence seq = synthesize_pi(gate, p);
      return fato_point(gate, p, seq, order_from_fixed(spec.fixed, seq.total_time()), 0.0, 0.0, spec.variant);
    }
    case SweepKind::detune_omega0:
    case SweepKind::detune_amp: {
      const Gate gate = single_gate(spec.gate);
      if (!(std::abs(x) <= 0.2)) throw Error(Errc::invalid_argument, "fractional errors must satisfy |eps| <= 0.2");
      const BangSequence seq = synthesize_pi(gate, spec.base);
      const int order = order_from_fixed(spec.fixed, seq.total_time());
      const bool w0 = spec.kind == SweepKind::detune_omega0;
      return fato_point(gate, spec.base, seq, order, w0 ? x : 0.0, w0 ? 0.0 : x, spec.variant);
    }
    case SweepKind::time_ratio: {
      // total_time carries T_opt / T_RWA here
      SweepRecord r;
      r.total_time = rwa_reference(params_from_theta(spec.base.omega0, x)).ratio;
      return r;
    }
    case SweepKind::swap_bandwidth:
    case SweepKind::swap_amp: {
      if (spec.gate != SweepGate::SWAP) throw Error(Errc::invalid_argument, "SWAP sweeps need gate SWAP");
      const double j = spec.coupling;
      SweepRecord r;
      if (spec.kind == SweepKind::swap_bandwidth) {
        const auto it = spec.fixed.find("amp");
        const TwoQubitDrive d = build_swap_schedule(j, (it == spec.fixed.end() ? 100.0 : it->second) * j);
        const SwapFidelity f = fato_swap_fidelity(d, x * j);
        r.fidelity_sim = f.f_fato;
        r.fidelity_rwa = f.f_rect;  // rectangular-pulse reference
        r.total_time = d.total_time;
        r.order_K = f.order;
        const auto xs = d.x_profile();
        r.e_k = series_of(std::span<const Segment>(xs), f.order).tail_error;
      } else {
        const TwoQubitDrive d = build_swap_schedule(j, x * j);
        r.total_time = d.total_time;
        if (auto it = spec.fixed.find("bandwidth"); it != spec.fixed.end()) {
          const SwapFidelity f = fato_swap_fidelity(d, it->second);
          r.fidelity_sim = f.f_fato;
          r.fidelity_rwa = f.f_rect;
          r.order_K = f.order;
        } else {
          r.fidelity_sim = trace_fidelity(swap_gate(), swap_rect_unitary(d));
        }
      }
      return r;
    }
  }
  throw Error(Errc::invalid_argument, "unknown sweep kind");
}

}  // namespace detail

inline void validate(const SweepSpec& spec) {
  if (spec.grid.empty()) throw Error(Errc::invalid_argument, "sweep grid is empty");
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    if (!std::isfinite(spec.grid[i])) throw Error(Errc::invalid_argument, "sweep grid has a non-finite value");
    if (i > 0 && !(spec.grid[i] > spec.grid[i - 1]))
      throw Error(Errc::invalid_argument, "sweep grid must be strictly increasing");
  }
  if (spec.workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");
  if (is_swap_kind(spec.kind) != (spec.gate == SweepGate::SWAP))
    throw Error(Errc::invalid_argument, "gate does not match sweep kind");
}

// One record per grid point. A failing point keeps its x, gets NaN values
// and the error name; the other points are unaffected.
inline std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<SweepRecord> out(spec.grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < out.size();) {
      SweepRecord r;
      try {
        r = detail::compute_point(spec, spec.grid[i]);
      } catch (const Error& e) {
        r = SweepRecord{};
        r.error = std::string(errc_name(e.code()));
      } catch (const std::exception&) {
        r = SweepRecord{};
        r.error = "Internal";
      }
      r.x = spec.grid[i];
      out[i] = std::move(r);
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(spec.workers), out.size());
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "x,fidelity_sim,fidelity_analytic,fidelity_rwa,total_time,order_K,e_k\n";
  for (const auto& r : records) {
    os << format_double(r.x) << ',' << format_double(r.fidelity_sim) << ',' << format_double(r.fidelity_analytic)
       << ',' << format_double(r.fidelity_rwa) << ',' << format_double(r.total_time) << ','
       << (r.order_K ? std::to_string(*r.order_K) : std::string("nan")) << ',' << format_double(r.e_k) << '\n';
  }
}

// Linear inclusive grid of n points.
inline std::vector<double> linear_grid(double a, double b, int n) {
  if (n < 1) throw Error(Errc::invalid_argument, "grid needs at least one point");
  if (n == 1) return {a};
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = i == n - 1 ? b : a + (b - a) * i / (n - 1);
  return g;
}

}  // namespace fato
