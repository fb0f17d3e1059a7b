#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fato/fourier.hpp"
#include "oracle.hpp"

using namespace fato;

namespace {

const DriveParams kUnit = derive_params(1.0, 1.0);

BangSequence square_wave(double period) { return BangSequence({{1, period / 2}, {-1, period / 2}}, kUnit); }

BangSequence random_sequence(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 9);
  std::uniform_int_distribution<int> level(-1, 1);
  std::uniform_real_distribution<double> dur(0.05, 3.0);
  std::vector<Bang> bangs;
  const int n = count(rng);
  while (static_cast<int>(bangs.size()) < n) {
    const int l = level(rng);
    if (!bangs.empty() && bangs.back().level == l) continue;
    bangs.push_back({l, dur(rng)});
  }
  return BangSequence(std::move(bangs), kUnit);
}

std::vector<oracle::Piece> pieces(const BangSequence& s) {
  std::vector<oracle::Piece> out;
  for (const auto& b : s.bangs()) out.push_back({static_cast<double>(b.level), b.duration});
  return out;
}

}  // namespace

TEST(Series, SquareWave) {
  const FourierWaveform w = series_of(square_wave(2.0), 40);
  EXPECT_NEAR(w.c0, 0.0, 1e-15);
  for (int k = 1; k <= 40; ++k) {
    EXPECT_NEAR(w.cos_coeffs[k - 1], 0.0, 1e-14) << k;
    EXPECT_NEAR(w.sin_coeffs[k - 1], k % 2 ? 4.0 / (kPi * k) : 0.0, 1e-14) << k;
  }
}

TEST(Series, SingularAndConstant) {
  const FourierWaveform zero = series_of(BangSequence({{0, 3.0}}, kUnit), 10);
  EXPECT_EQ(zero.c0, 0.0);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(zero.cos_coeffs[k] + zero.sin_coeffs[k], 0.0);
  const FourierWaveform one = series_of(BangSequence({{1, 3.0}}, kUnit), 10);
  EXPECT_NEAR(one.c0, 2.0, 1e-15);
  for (int k = 0; k < 10; ++k) {
    EXPECT_NEAR(one.cos_coeffs[k], 0.0, 1e-14);
    EXPECT_NEAR(one.sin_coeffs[k], 0.0, 1e-14);
  }
}

TEST(Series, MatchesQuadrature) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const BangSequence s = random_sequence(rng);
    const FourierWaveform w = series_of(s, 30);
    for (int k = 1; k <= 30; ++k) {
      const auto [c, sn] = oracle::fourier_pair(pieces(s), k);
      EXPECT_NEAR(w.cos_coeffs[k - 1], c, 1e-12);
      EXPECT_NEAR(w.sin_coeffs[k - 1], sn, 1e-12);
    }
  }
}

TEST(Series, EmptyRejected) {
  try {
    series_of(BangSequence({}, kUnit), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_sequence);
  }
}

TEST(OrderForBandwidth, Examples) {
  const double t = 14.93849;
  EXPECT_EQ(order_for_bandwidth(2 * kPi / t, t), 1);
  EXPECT_EQ(order_for_bandwidth(10.0, t), 23);
  EXPECT_EQ(order_for_bandwidth(0.99 * 2 * kPi / t, t), 0);
  for (int k = 1; k < 200; ++k) EXPECT_EQ(order_for_bandwidth(2 * kPi * k / t, t), k);
  try {
    order_for_bandwidth(0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_positive_input);
  }
}

TEST(OrderForBandwidth, Monotone) {
  int last = 0;
  for (double bw = 0.01; bw < 50; bw += 0.013) {
    const int k = order_for_bandwidth(bw, 7.3);
    EXPECT_GE(k, last);
    last = k;
  }
}

TEST(SeriesForBandwidth, RespectsTruncationRule) {
  const DriveParams p = params_from_theta(1.0, kPi / 10);
  const BangSequence s({{1, 1.0}, {-1, 2.0}, {1, 1.5}}, p);
  for (double bw : {0.5, 1.0, 3.3, 10.0}) {
    const FourierWaveform w = series_for_bandwidth(s, bw);
    EXPECT_LE(2 * kPi * w.order / w.period, bw + 1e-12);
    EXPECT_LT(bw, 2 * kPi * (w.order + 1) / w.period);
  }
}

TEST(Eval, Examples) {
  const FourierWaveform zero = series_of(BangSequence({{0, 3.0}}, kUnit), 5);
  EXPECT_EQ(eval(zero, 1.3), 0.0);
  const FourierWaveform sq = series_of(square_wave(2.0), 25);
  EXPECT_NEAR(eval(sq, 0.0), 0.0, 1e-14);
  try {
    eval(sq, 2.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_domain);
  }
}

TEST(Eval, GibbsOvershoot) {
  const FourierWaveform sq = series_of(square_wave(1.0), 4001);
  double peak = 0.0;
  // the first maximum sits at about T / (2 (K + 1))
  for (int i = 0; i <= 4000; ++i) peak = std::max(peak, eval(sq, 2e-3 * i / 4000.0));
  EXPECT_NEAR(peak, 2 * sine_integral(kPi) / kPi, 1e-3);
  EXPECT_NEAR(peak, 1.17898, 1e-3);
}

TEST(Eval, ConvergesAtMidpoints) {
  const DriveParams p = params_from_theta(kPi, kPi / 10);
  const BangSequence s = weak_pi_sequence(Gate::X, 5, p);
  const FourierWaveform w = series_of(s, 200);
  double t = 0.0;
  for (const auto& b : s.bangs()) {
    EXPECT_LT(std::abs(eval(w, t + b.duration / 2) - b.level), 0.01);
    t += b.duration;
  }
}

TEST(Eval, ClampLimitsAmplitude) {
  FourierWaveform sq = series_of(square_wave(1.0), 101);
  EXPECT_GT(peak_amplitude(sq), 1.1);
  sq.clamp = true;
  EXPECT_LE(peak_amplitude(sq), 1.0);
}

TEST(TailError, Examples) {
  EXPECT_NEAR(tail_error(square_wave(3.0), 0), 1.0, 1e-14);
  EXPECT_EQ(tail_error(BangSequence({{0, 2.0}}, kUnit), 7), 0.0);
  EXPECT_NEAR(tail_integral(square_wave(3.0), 0), 2.0, 1e-14);
}

TEST(TailError, SquareWaveAgainstDirectSum) {
  // (1/2) sum over odd k > K of (4 / pi k)^2, summed far out plus the
  // integral remainder
  for (int K : {0, 1, 4, 17, 100}) {
    double direct = 0.0;
    const int last = 2'000'001;
    for (int k = K + 1; k <= last; ++k)
      if (k % 2) direct += 0.5 * 16.0 / (kPi * kPi * double(k) * k);
    direct += 0.5 * 16.0 / (kPi * kPi) / (2.0 * last);
    EXPECT_NEAR(tail_error(square_wave(1.0), K), direct, 1e-11) << K;
  }
}

TEST(TailError, NonIncreasingAndNonNegative) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const BangSequence s = random_sequence(rng);
    double last = tail_error(s, 0);
    for (int k = 1; k <= 60; ++k) {
      const double e = tail_error(s, k);
      EXPECT_GE(e, 0.0);
      EXPECT_LE(e, last + 1e-15);
      last = e;
    }
  }
}

TEST(TailError, ParsevalClosure) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const BangSequence s = random_sequence(rng);
    const int K = 1 + trial % 40;
    const FourierWaveform w = series_of(s, K);
    double spectral = 0.5 * w.c0 * w.c0;
    for (int k = 0; k < K; ++k) spectral += w.cos_coeffs[k] * w.cos_coeffs[k] + w.sin_coeffs[k] * w.sin_coeffs[k];
    double power = 0.0;
    for (const auto& b : s.bangs()) power += b.level * b.level * b.duration;
    power *= 2.0 / s.total_time();
    EXPECT_LT(std::abs(spectral + 2 * w.tail_error - power), 1e-9);
  }
}

TEST(WaveformCsv, Format) {
  const FourierWaveform w = series_of(square_wave(2.0), 3);
  std::ostringstream os;
  write_waveform_csv(os, w, 5);
  const std::string out = os.str();
  EXPECT_EQ(out.rfind("t,f\n0,", 0), 0u);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 6);
  EXPECT_EQ(out.find('\r'), std::string::npos);
  EXPECT_NE(out.find("\n2,"), std::string::npos);
  std::ostringstream bad;
  try {
    write_waveform_csv(bad, w, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(FormatDouble, RoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 20 - 10);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(0.1), "0.1");
}
