#pragma once

// Two-qubit uses of the bang-bang/FATO construction: simultaneous control
// of two qubits with opposite drifts, and a SWAP gate built from ZZ
// evolutions interleaved with collective pi/2 pulses.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fato/bangbang.hpp"
#include "fato/dynamics.hpp"
#include "fato/fourier.hpp"

namespace fato {

namespace detail {

inline CMat collective(Axis a) {
  const CMat s = pauli(a);
  const CMat id = CMat::identity(2);
  return kron(s, id) + kron(id, s);
}

inline CMat zz() { return kron(pauli(Axis::z), pauli(Axis::z)); }

}  // namespace detail

inline CMat swap_gate() {
  return CMat::from_rows({{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}});
}

struct OppositeDriftFidelity {
  double f2q = 0.0;
  double f1q = 0.0;
  long steps = 0;
};

// H(t) = (w0/2)(sz1 - sz2) + (Omega(t)/2)(sx1 + sx2), Omega(t) the FATO
// waveform of `seq` at order K. Target is the ideal bang-bang product on
// each qubit. The single-qubit run fixes the step count; the two-qubit run
// reuses it.
inline OppositeDriftFidelity opposite_drift_fidelity(const BangSequence& seq, int order,
                                                     const StepControl& control = {}) {
  const DriveParams& p = seq.params();
  const FourierWaveform w = series_of(seq, order);
  const CMat u1_id = sequence_unitary(seq, 1.0);
  const PropagationResult single = propagate_waveform(w, p, u1_id, std::numeric_limits<double>::infinity(), control);

  const CMat u2_id = sequence_unitary(seq, -1.0);
  const CMat target = kron(u1_id, u2_id);
  const CMat drift = (kron(pauli(Axis::z), CMat::identity(2)) - kron(CMat::identity(2), pauli(Axis::z))) *
                     (0.5 * p.omega0);
  const CMat drive = detail::collective(Axis::x) * (0.5 * p.omega_bar);
  auto ham = [&](double t) { return drift + drive * eval_unchecked(w, t); };
  StepControl fixed;
  fixed.refine = false;
  const PropagationResult pair = propagate_dense(ham, w.period, target, single.step_size * 1.0000001, fixed);
  return {pair.fidelity, single.fidelity, pair.steps};
}

// One piece of the SWAP schedule: collective drive levels (in units of
// Omega) along x and y, held for `duration`.
struct SwapSegment {
  int x_level = 0;
  int y_level = 0;
  double duration = 0.0;
};

struct TwoQubitDrive {
  double coupling = 1.0;    // J, H_zz = J sz1 sz2 / 2
  double drive_amp = 1.0;   // Omega
  std::vector<SwapSegment> segments;
  double total_time = 0.0;
  double zz_time = 0.0;     // time spent in free evolution, 3 pi / (2J)
  std::string assignment;   // which conjugation pattern the oracle locked
  bool coupling_during_pulses = true;

  std::vector<Segment> x_profile() const { return profile(true); }
  std::vector<Segment> y_profile() const { return profile(false); }

 private:
  std::vector<Segment> profile(bool x) const {
    std::vector<Segment> out;
    for (const auto& s : segments) {
      const double level = x ? s.x_level : s.y_level;
      if (!out.empty() && out.back().level == level) out.back().duration += s.duration;
      else out.push_back({level, s.duration});
    }
    return out;
  }
};

namespace detail {

struct Conjugator {
  Axis axis = Axis::x;
  int sign = 0;  // 0: identity
};

inline CMat pulse_unitary(Axis axis, int sign) {
  // collective pi/2 rotation exp(-i (pi/4) sign (s1 + s2))
  return expm_hermitian(collective(axis) * static_cast<double>(sign), kPi / 4);
}

inline std::string describe(const std::array<Conjugator, 3>& c) {
  std::string s;
  for (const auto& k : c) {
    if (!s.empty()) s += ' ';
    if (k.sign == 0) s += "I";
    else s += std::string(k.sign > 0 ? "+" : "-") + (k.axis == Axis::x ? "x" : "y");
  }
  return s;
}

// Delta-pulse product C3^dag Z C3 C2^dag Z C2 C1^dag Z C1 with
// Z = exp(-i (pi/4) sz sz).
inline CMat delta_product(const std::array<Conjugator, 3>& c) {
  const CMat z = expm_hermitian(zz(), kPi / 4);
  CMat u = CMat::identity(4);
  for (const auto& k : c) {
    if (k.sign != 0) u = pulse_unitary(k.axis, k.sign) * u;
    u = z * u;
    if (k.sign != 0) u = pulse_unitary(k.axis, -k.sign) * u;
  }
  return u;
}

}  // namespace detail

// Three ZZ evolutions of angle pi/4 (duration pi/(2J) each) turned into
// ZZ, XX and YY by collective pi/2 pulses of amplitude omega and duration
// pi/(2 omega). The conjugation pattern is the first in a fixed
// enumeration whose delta-pulse product equals SWAP up to phase.
inline TwoQubitDrive build_swap_schedule(double coupling, double omega) {
  if (!(coupling > 0.0) || !(omega > 0.0))
    throw Error(Errc::non_positive_input, "coupling and pulse amplitude must be positive");

  using detail::Conjugator;
  std::vector<std::array<Conjugator, 3>> family;
  for (int identity_slot = 0; identity_slot < 3; ++identity_slot)
    for (bool xx_first : {true, false})
      for (int s1 : {1, -1})
        for (int s2 : {1, -1}) {
          // rotation about y maps sz sz to sx sx, about x to sy sy
          std::array<Conjugator, 2> moving{Conjugator{Axis::y, s1}, Conjugator{Axis::x, s2}};
          if (!xx_first) std::swap(moving[0], moving[1]);
          std::array<Conjugator, 3> c{};
          int m = 0;
          for (int slot = 0; slot < 3; ++slot) c[static_cast<std::size_t>(slot)] = slot == identity_slot ? Conjugator{} : moving[static_cast<std::size_t>(m++)];
          family.push_back(c);
        }

  const CMat target = swap_gate();
  for (const auto& c : family) {
    if (phase_aligned_distance(target, detail::delta_product(c)) >= 1e-9) continue;
    TwoQubitDrive d;
    d.coupling = coupling;
    d.drive_amp = omega;
    d.assignment = detail::describe(c);
    const double t_zz = kPi / (2.0 * coupling);
    const double t_pulse = kPi / (2.0 * omega);
    auto add_pulse = [&](Axis a, int sign) {
      d.segments.push_back({a == Axis::x ? sign : 0, a == Axis::y ? sign : 0, t_pulse});
    };
    for (const auto& k : c) {
      if (k.sign != 0) add_pulse(k.axis, k.sign);
      d.segments.push_back({0, 0, t_zz});
      if (k.sign != 0) add_pulse(k.axis, -k.sign);
    }
    for (const auto& s : d.segments) d.total_time += s.duration;
    d.zz_time = 3.0 * t_zz;
    return d;
  }
  throw Error(Errc::construction_failed, "no conjugation pattern reproduces SWAP");
}

namespace detail {

inline CMat swap_hamiltonian(const TwoQubitDrive& d, double fx, double fy, bool zz_on) {
  CMat h = collective(Axis::x) * (0.5 * d.drive_amp * fx) + collective(Axis::y) * (0.5 * d.drive_amp * fy);
  if (zz_on) h += zz() * (0.5 * d.coupling);
  return h;
}

}  // namespace detail

// Rectangular finite-amplitude pulses, piece by piece exactly.
inline CMat swap_rect_unitary(const TwoQubitDrive& d) {
  CMat u = CMat::identity(4);
  for (const auto& s : d.segments) {
    const bool pulse = s.x_level != 0 || s.y_level != 0;
    const bool zz_on = !pulse || d.coupling_during_pulses;
    u = expm_hermitian(detail::swap_hamiltonian(d, s.x_level, s.y_level, zz_on), s.duration) * u;
  }
  return u;
}

// Same schedule with instantaneous pulses.
inline CMat swap_delta_unitary(const TwoQubitDrive& d) {
  CMat u = CMat::identity(4);
  for (const auto& s : d.segments) {
    if (s.x_level != 0) u = detail::pulse_unitary(Axis::x, s.x_level) * u;
    else if (s.y_level != 0) u = detail::pulse_unitary(Axis::y, s.y_level) * u;
    else u = expm_hermitian(detail::zz(), 0.5 * d.coupling * s.duration) * u;
  }
  return u;
}

struct SwapFidelity {
  double f_fato = 0.0;
  double f_rect = 0.0;
  int order = 0;
  long steps = 0;
};

// x and y profiles expanded to the order the bandwidth allows, coupling on
// throughout.
inline SwapFidelity fato_swap_fidelity(const TwoQubitDrive& d, double bandwidth, const StepControl& control = {}) {
  if (!(bandwidth >= 2.0 * kPi / d.total_time))
    throw Error(Errc::invalid_argument, "bandwidth below 2 pi / T admits no harmonic");
  const auto xs = d.x_profile();
  const auto ys = d.y_profile();
  const FourierWaveform wx = series_for_bandwidth(std::span<const Segment>(xs), bandwidth);
  const FourierWaveform wy = series_for_bandwidth(std::span<const Segment>(ys), bandwidth);
  const CMat target = swap_gate();

  SwapFidelity out;
  out.order = wx.order;
  out.f_rect = trace_fidelity(target, swap_rect_unitary(d));
  auto ham = [&](double t) {
    return detail::swap_hamiltonian(d, eval_unchecked(wx, t), eval_unchecked(wy, t), true);
  };
  const PropagationResult r = propagate_dense(ham, d.total_time, target, waveform_step(wx, d.total_time), control);
  out.f_fato = r.fidelity;
  out.steps = r.steps;
  return out;
}

}  // namespace fato
