#pragma once

// Fourier series of piecewise-constant switching functions over one
// period [0, T]:
//   f(t) = c0/2 + sum_k [ s_k sin(2 pi k t / T) + c_k cos(2 pi k t / T) ]
// Coefficients are computed in closed form segment by segment.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "fato/bangbang.hpp"
#include "fato/error.hpp"
#include "fato/format.hpp"

namespace fato {

// One constant piece of a switching function, level in units of the bound.
struct Segment {
  double level = 0.0;
  double duration = 0.0;
};

inline std::vector<Segment> segments_of(const BangSequence& seq) {
  std::vector<Segment> out;
  out.reserve(seq.size());
  for (const auto& b : seq.bangs()) out.push_back({static_cast<double>(b.level), b.duration});
  return out;
}

struct FourierWaveform {
  double period = 0.0;
  double c0 = 0.0;
  std::vector<double> cos_coeffs;  // c_1 .. c_K
  std::vector<double> sin_coeffs;  // s_1 .. s_K
  int order = 0;
  double bandwidth = 0.0;   // rad/time, 2 pi K / T <= bandwidth < 2 pi (K+1) / T
  double tail_error = 0.0;  // (1/2) sum_{k>K} (c_k^2 + s_k^2)
  // Hard-limit |f| <= 1 on evaluation. Not part of the FATO construction,
  // which lets the truncated series overshoot.
  bool clamp = false;
};

// K = floor(bandwidth * T / 2pi), exact at multiples of 2pi/T.
inline int order_for_bandwidth(double bandwidth, double period) {
  if (!(bandwidth > 0.0) || !(period > 0.0))
    throw Error(Errc::non_positive_input, "bandwidth and period must be positive");
  const double x = bandwidth * period / (2.0 * kPi);
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<int>(r);
  return static_cast<int>(std::floor(x));
}

namespace detail {

inline double period_of(std::span<const Segment> segs) {
  double t = 0.0;
  for (const auto& s : segs) t += s.duration;
  return t;
}

// (2/T) int_0^T f(t)^2 dt
inline double mean_square_power(std::span<const Segment> segs, double period) {
  double acc = 0.0;
  for (const auto& s : segs) acc += s.level * s.level * s.duration;
  return 2.0 * acc / period;
}

}  // namespace detail

// Coefficients up to order K; tail_error from the exact Parseval total.
inline FourierWaveform series_of(std::span<const Segment> segs, int order) {
  if (order < 0) throw Error(Errc::invalid_argument, "order must be >= 0");
  const double period = detail::period_of(segs);
  if (segs.empty() || !(period > 0.0)) throw Error(Errc::empty_sequence, "switching function is empty");

  FourierWaveform w;
  w.period = period;
  w.order = order;
  w.cos_coeffs.assign(static_cast<std::size_t>(order), 0.0);
  w.sin_coeffs.assign(static_cast<std::size_t>(order), 0.0);
  double start = 0.0;
  for (const auto& s : segs) {
    const double end = start + s.duration;
    w.c0 += 2.0 * s.level * s.duration / period;
    if (s.level != 0.0) {
      const double mid = 0.5 * (start + end);
      const double half = 0.5 * s.duration;
      for (int k = 1; k <= order; ++k) {
        const double wk = 2.0 * kPi * k / period;
        // sin(wb) - sin(wa) = 2 cos(w mid) sin(w half), likewise for cos
        const double amp = 2.0 * s.level * 2.0 * std::sin(wk * half) / (wk * period);
        w.cos_coeffs[static_cast<std::size_t>(k - 1)] += amp * std::cos(wk * mid);
        w.sin_coeffs[static_cast<std::size_t>(k - 1)] += amp * std::sin(wk * mid);
      }
    }
    start = end;
  }
  w.bandwidth = 2.0 * kPi * order / period;
  double partial = 0.0;
  for (int k = 0; k < order; ++k)
    partial += w.cos_coeffs[static_cast<std::size_t>(k)] * w.cos_coeffs[static_cast<std::size_t>(k)] +
               w.sin_coeffs[static_cast<std::size_t>(k)] * w.sin_coeffs[static_cast<std::size_t>(k)];
  const double total = detail::mean_square_power(segs, period) - 0.5 * w.c0 * w.c0;
  w.tail_error = std::max(0.0, 0.5 * (total - partial));
  return w;
}

inline FourierWaveform series_of(const BangSequence& seq, int order) {
  const auto segs = segments_of(seq);
  return series_of(std::span<const Segment>(segs), order);
}

// Truncates at the largest order the bandwidth admits.
inline FourierWaveform series_for_bandwidth(std::span<const Segment> segs, double bandwidth) {
  FourierWaveform w = series_of(segs, order_for_bandwidth(bandwidth, detail::period_of(segs)));
  w.bandwidth = bandwidth;
  return w;
}

inline FourierWaveform series_for_bandwidth(const BangSequence& seq, double bandwidth) {
  const auto segs = segments_of(seq);
  return series_for_bandwidth(std::span<const Segment>(segs), bandwidth);
}

// Sum of k = first..last harmonics (1-based), by angle-addition recurrence.
inline double harmonic_sum(const std::vector<double>& cos_coeffs, const std::vector<double>& sin_coeffs,
                           int first, int last, double phase) {
  if (last < first) return 0.0;
  const double c1 = std::cos(phase), s1 = std::sin(phase);
  double ck = std::cos(first * phase), sk = std::sin(first * phase);
  double acc = 0.0;
  for (int k = first; k <= last; ++k) {
    acc += cos_coeffs[static_cast<std::size_t>(k - 1)] * ck + sin_coeffs[static_cast<std::size_t>(k - 1)] * sk;
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
  return acc;
}

// Unchecked evaluation of the truncated series; t need not lie in [0, T].
inline double eval_unchecked(const FourierWaveform& w, double t) {
  const double v = 0.5 * w.c0 + harmonic_sum(w.cos_coeffs, w.sin_coeffs, 1, w.order, 2.0 * kPi * t / w.period);
  return w.clamp ? std::clamp(v, -1.0, 1.0) : v;
}

inline double eval(const FourierWaveform& w, double t) {
  const double slack = 1e-12 * w.period;
  if (!(t >= -slack && t <= w.period + slack))
    throw Error(Errc::out_of_domain, "evaluation time outside [0, T]");
  return eval_unchecked(w, t);
}

// (1/2) sum_{k>K} (c_k^2 + s_k^2), via Parseval; no infinite sum.
inline double tail_error(const BangSequence& seq, int order) {
  if (seq.empty()) return 0.0;
  return series_of(seq, order).tail_error;
}

// (2/T) int_0^T R_K(t)^2 dt; equals sum_{k>K} (c_k^2 + s_k^2), i.e. twice
// tail_error.
inline double tail_integral(const BangSequence& seq, int order) { return 2.0 * tail_error(seq, order); }

// Largest |f| over a uniform sample of [0, T].
inline double peak_amplitude(const FourierWaveform& w, int samples = 8192) {
  double m = 0.0;
  for (int i = 0; i < samples; ++i)
    m = std::max(m, std::abs(eval_unchecked(w, w.period * i / (samples - 1))));
  return m;
}

// CSV "t,f" with `samples` points spanning [0, T] inclusive.
inline void write_waveform_csv(std::ostream& os, const FourierWaveform& w, int samples) {
  if (samples < 1) throw Error(Errc::invalid_argument, "sample count must be >= 1");
  os << "t,f\n";
  for (int i = 0; i < samples; ++i) {
    const double t = samples == 1 ? 0.0 : w.period * i / (samples - 1);
    os << format_double(t) << ',' << format_double(eval_unchecked(w, t)) << '\n';
  }
}

}  // namespace fato
