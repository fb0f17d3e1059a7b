// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fato/fato.hpp"

using namespace fato;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int n, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

void info(const std::string& s) { std::printf("INFO %s\n", s.c_str()); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<double> kBandwidthGrid = {1, 1.5, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50, 60};
const std::array<double, 5> kStrongFracs = {0.26, 0.30, 1.0 / 3, 0.40, 0.45};

BangSequence random_sequence(std::mt19937_64& rng, const DriveParams& p, int min_bangs = 1) {
  std::uniform_int_distribution<int> count(min_bangs, 6);
  std::uniform_int_distribution<int> level(-1, 1);
  std::uniform_real_distribution<double> dur(0.2, 3.0);
  std::vector<Bang> bangs;
  const int n = count(rng);
  while (static_cast<int>(bangs.size()) < n) {
    const int l = level(rng);
    if (!bangs.empty() && bangs.back().level == l) continue;
    bangs.push_back({l, dur(rng)});
  }
  return BangSequence(std::move(bangs), p);
}

std::vector<SweepRecord> bandwidth_rows(Gate g, double theta) {
  SweepSpec spec;
  spec.gate = g == Gate::X ? SweepGate::X : SweepGate::Y;
  spec.base = params_from_theta(1.0, theta);
  spec.grid = kBandwidthGrid;
  return run_sweep(spec);
}

// --- CLI helpers for the determinism check ---

struct Command {
  std::string name;
  std::string args;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<Command> manifest() {
  std::ifstream in(std::string(FATO_GOLDEN_DIR) + "/manifest.txt");
  std::vector<Command> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto bar = line.find('|');
    out.push_back({trim(line.substr(0, bar)), trim(line.substr(bar + 1))});
  }
  return out;
}

std::string run_cli(const std::string& args, int& status) {
  const std::string cmd = std::string(FATO_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  std::array<char, 4096> buf;
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) out.append(buf.data(), n);
  status = pclose(pipe);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool takes_workers(const std::string& args) {
  return args.rfind("sweep", 0) == 0 || args.rfind("synth", 0) == 0 || args.find("--mode bandwidth") != std::string::npos ||
         args.find("--mode amp") != std::string::npos;
}

}  // namespace

int main() {
  report(1, [] {
    double worst = 0.0;
    for (int n = 2; n <= 11; ++n) {
      const DriveParams p = params_from_theta(1.0, kPi / (2 * n));
      const Gate g = n % 2 ? Gate::X : Gate::Y;
      const BangSequence s = weak_pi_sequence(g, n, p);
      worst = std::max(worst, phase_aligned_distance(gate_target(g), sequence_unitary(s)));
    }
    return Outcome{worst < 1e-9, fmt("weak n=2..11, worst distance %.3g", worst)};
  });

  report(2, [] {
    double worst = 0.0;
    std::string parsing;
    bool same = true;
    for (double frac : kStrongFracs) {
      const DriveParams p = params_from_theta(1.0, frac * kPi);
      for (Gate g : {Gate::X, Gate::Y}) {
        const BangSequence s = strong_pi_sequence(g, p);
        worst = std::max(worst, phase_aligned_distance(gate_target(g), sequence_unitary(s)));
        if (g == Gate::X) {
          const std::string here = s.metadata().at("t2x_parsing");
          if (parsing.empty()) parsing = here;
          same = same && here == parsing;
        }
      }
    }
    return Outcome{worst < 1e-9 && same,
                   fmt("worst distance %.3g, parsing '%s'%s", worst, parsing.c_str(), same ? "" : " (not unique)")};
  });

  report(3, [] {
    const auto t0 = Clock::now();
    const DriveParams p = params_from_theta(1.0, kPi / 10);
    const BangSequence s = search_to_sequence(pauli(Axis::x), p, 6, 1e-10);
    const double expect = 5 * kPi / p.omega;
    const double rel = std::abs(s.total_time() - expect) / expect;
    const BangSequence id = search_to_sequence(CMat::identity(2), p, 6, 1e-10);
    const double dt = seconds_since(t0);
    return Outcome{rel < 1e-6 && id.total_time() == 0.0 && dt < 30,
                   fmt("T rel error %.3g, identity T=%g, %.2f s", rel, id.total_time(), dt)};
  });

  report(4, [] {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> order(1, 60);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const BangSequence s = random_sequence(rng, params_from_theta(1.0, 0.4));
      const int K = order(rng);
      const FourierWaveform w = series_of(s, K);
      double spectral = 0.5 * w.c0 * w.c0;
      for (int k = 0; k < K; ++k) spectral += w.cos_coeffs[k] * w.cos_coeffs[k] + w.sin_coeffs[k] * w.sin_coeffs[k];
      double power = 0.0;
      for (const auto& b : s.bangs()) power += b.level * b.level * b.duration;
      power *= 2.0 / s.total_time();
      worst = std::max(worst, std::abs(spectral + 2 * w.tail_error - power));
    }
    return Outcome{worst < 1e-9, fmt("100 sequences, worst closure %.3g", worst)};
  });

  report(5, [] {
    std::mt19937_64 rng(5);
    double min_factor = 1e300, max_defect = 0.0;
    int compared = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const DriveParams p = params_from_theta(1.0, 0.15 + 0.12 * trial);
      const BangSequence s = random_sequence(rng, p, 2);  // one bang is a constant drive
      const FourierWaveform w = series_of(s, 2 + 3 * trial);
      auto ham = [&](double t) { return PauliVec{0.5 * p.omega_bar * eval_unchecked(w, t), 0.0, 0.5 * p.omega0}; };
      // start 16x coarser than the production step so truncation dominates rounding
      const long n = std::max(4L, detail::steps_for(w.period, waveform_step(w, 1e300)) / 16);
      const CMat u1 = detail::magnus4_su2(ham, w.period, n);
      const CMat u2 = detail::magnus4_su2(ham, w.period, 2 * n);
      const CMat u4 = detail::magnus4_su2(ham, w.period, 4 * n);
      const double d1 = (u1 - u2).max_abs(), d2 = (u2 - u4).max_abs();
      // below this the defects are rounding noise
      if (d1 > 1e-11) {
        min_factor = std::min(min_factor, d1 / d2);
        ++compared;
      }
      const PropagationResult r = propagate_waveform(w, p, sequence_unitary(s));
      max_defect = std::max(max_defect, r.max_unitarity_defect);
    }
    return Outcome{min_factor >= 3 && max_defect < 1e-9,
                   fmt("min halving factor %.3g over %d waveforms, max unitarity defect %.3g", min_factor, compared,
                       max_defect)};
  });

  report(6, [] {
    const auto t0 = Clock::now();
    const auto rows = bandwidth_rows(Gate::X, kPi / 10);
    int ok = 0, strict = 0, pairs = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double a = 1 - rows[i - 1].fidelity_sim, b = 1 - rows[i].fidelity_sim;
      ++pairs;
      if (b <= a + 1e-6) ++ok;
      if (b <= a) ++strict;
    }
    const double first = 1 - rows.front().fidelity_sim, last = 1 - rows.back().fidelity_sim;
    const bool golden = !slurp(std::string(FATO_GOLDEN_DIR) + "/bandwidth_x_pi10.csv").empty();
    const double dt = seconds_since(t0);
    info(fmt("criterion 6: strictly decreasing on %d/%d pairs (the rest sit below 1e-9)", strict, pairs));
    return Outcome{first >= 1e-2 && first < 1 && last < 1e-4 && ok >= 0.9 * pairs && golden && dt < 120,
                   fmt("infidelity %.3g -> %.3g, monotone within 1e-6 on %d/%d pairs, golden %s", first, last, ok,
                       pairs, golden ? "present" : "missing")};
  });

  report(7, [] {
    auto within2 = [](double pred, double sim) { return pred > 0 && pred <= 2 * sim && sim <= 2 * pred; };
    // weak regime, both coefficient variants, spectral E_K and the integral 2 E_K
    int weak_n = 0, main_hit = 0, app_hit = 0, main_hit2 = 0, app_hit2 = 0;
    for (int n = 2; n <= 11; ++n) {
      const double theta = kPi / (2 * n);
      const Gate g = n % 2 ? Gate::X : Gate::Y;
      int here = 0, here_main = 0, here_app = 0;
      for (const auto& r : bandwidth_rows(g, theta)) {
        const double sim = 1 - r.fidelity_sim;
        if (!r.error.empty() || !(sim >= 1e-5 && sim <= 1e-2)) continue;
        ++weak_n;
        ++here;
        const bool m = within2(1 - analytic_fidelity(Regime::weak, g, theta, r.e_k, CoeffVariant::main_text), sim);
        const bool a = within2(1 - analytic_fidelity(Regime::weak, g, theta, r.e_k, CoeffVariant::appendix), sim);
        main_hit += m;
        app_hit += a;
        here_main += m;
        here_app += a;
        main_hit2 += within2(1 - analytic_fidelity(Regime::weak, g, theta, 2 * r.e_k, CoeffVariant::main_text), sim);
        app_hit2 += within2(1 - analytic_fidelity(Regime::weak, g, theta, 2 * r.e_k, CoeffVariant::appendix), sim);
      }
      info(fmt("criterion 7: n=%d %s, %d points, main %d, appendix %d", n, g == Gate::X ? "X" : "Y", here, here_main,
               here_app));
    }
    const bool main_wins = main_hit >= app_hit;
    const int best = std::max(main_hit, app_hit);
    info(fmt("criterion 7: with E_K doubled, main %d/%d, appendix %d/%d", main_hit2, weak_n, app_hit2, weak_n));

    int strong_n = 0, strong_hit = 0, strong_hit2 = 0;
    for (double frac : kStrongFracs)
      for (Gate g : {Gate::X, Gate::Y}) {
        int here = 0, hit = 0;
        for (const auto& r : bandwidth_rows(g, frac * kPi)) {
          const double sim = 1 - r.fidelity_sim;
          if (!r.error.empty() || !(sim >= 1e-5 && sim <= 1e-2)) continue;
          ++strong_n;
          ++here;
          const bool h = within2(1 - analytic_fidelity(Regime::strong, g, frac * kPi, r.e_k), sim);
          strong_hit += h;
          hit += h;
          strong_hit2 += within2(1 - analytic_fidelity(Regime::strong, g, frac * kPi, 2 * r.e_k), sim);
        }
        info(fmt("criterion 7: theta=%.4g pi %s, %d points, %d within 2x", frac, g == Gate::X ? "X" : "Y", here, hit));
      }
    info(fmt("criterion 7: strong with E_K doubled, %d/%d", strong_hit2, strong_n));
    const bool weak_ok = weak_n > 0 && best >= 0.8 * weak_n;
    const bool strong_ok = strong_n > 0 && strong_hit >= 0.8 * strong_n;
    return Outcome{weak_ok && strong_ok,
                   fmt("weak: %s variant %d/%d within 2x (main %d, appendix %d); strong: %d/%d",
                       main_wins ? "main_text" : "appendix", best, weak_n, main_hit, app_hit, strong_hit, strong_n)};
  });

  report(8, [] {
    bool below = true;
    for (double th : linear_grid(1e-3, kPi / 4, 200)) below = below && rwa_reference(params_from_theta(1.0, th)).ratio < 1;
    const DriveParams p = params_from_theta(1.0, kPi / 4);
    const RwaReference r = rwa_reference(p);
    const bool exact = r.t_rwa == 2 * kPi / p.omega_bar;
    return Outcome{below && std::abs(r.ratio - 0.83368) <= 5e-4 && exact,
                   fmt("ratio < 1 on (0, pi/4]: %s, ratio(pi/4) = %.6f, T_RWA exact: %s", below ? "yes" : "no", r.ratio,
                       exact ? "yes" : "no")};
  });

  report(9, [] {
    const DriveParams p = params_from_theta(1.0, kPi / 10);
    const double rwa = rwa_infidelity(Gate::X, p);
    const BangSequence s = synthesize_pi(Gate::X, p);
    bool all = true;
    std::string parts;
    for (double dw : {1.0, 1.5, 2.0}) {
      const int K = std::max(1, order_for_bandwidth(dw * p.omega0, s.total_time()));
      const double inf = 1 - propagate_waveform(series_of(s, K), p, sequence_unitary(s)).fidelity;
      all = all && inf < rwa;
      parts += fmt(" dw=%.1f K=%d inf=%.3g%s;", dw, K, inf, inf < rwa ? "" : " (above RWA)");
    }
    return Outcome{all, fmt("RWA infidelity %.3g;%s", rwa, parts.c_str())};
  });

  report(10, [] {
    bool beats = true, smooth = true;
    std::string parts;
    const double bandwidth = 2.0;  // in units of omega0
    for (int n : {5, 2}) {
      const DriveParams p = params_from_theta(1.0, kPi / (2 * n));
      const Gate g = n % 2 ? Gate::X : Gate::Y;
      const int K = order_for_bandwidth(bandwidth * p.omega0, synthesize_pi(g, p).total_time());
      for (double eps : {0.01, 0.02, -0.01, -0.02}) {
        const double f = 1 - robustness_point(g, p, K, eps, 0.0).fidelity_sim;
        const double r = rwa_infidelity(g, p, eps, 0.0);
        beats = beats && f < r;
        parts += fmt(" pi/%d eps=%+.2f %.3g vs %.3g;", 2 * n, eps, f, r);
      }
      double jump = 1.0;
      for (double k0 : {bandwidth, 5.0}) {
        const int Kscan = order_for_bandwidth(k0 * p.omega0, synthesize_pi(g, p).total_time());
        double prev = -1, worst = 1.0;
        for (double eps : linear_grid(-0.02, 0.02, 41)) {
          const double f = 1 - robustness_point(g, p, Kscan, eps, 0.0).fidelity_sim;
          if (prev > 0) worst = std::max(worst, std::max(f / prev, prev / f));
          prev = f;
        }
        if (k0 == bandwidth) {
          jump = worst;
        } else {
          info(fmt("criterion 10: pi/%d at bandwidth 5 omega0, largest neighbour ratio %.3g", 2 * n, worst));
        }
      }
      smooth = smooth && jump <= 10;
      parts += fmt(" scan ratio %.3g;", jump);
    }
    return Outcome{beats && smooth, fmt("bandwidth 2 omega0:%s", parts.c_str())};
  });

  report(11, [] {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> order(1, 12), weak_n(2, 8), coin(0, 1);
    std::uniform_real_distribution<double> strong(0.27 * kPi, 0.47 * kPi);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      BangSequence s = [&] {
        if (coin(rng)) {
          const int n = weak_n(rng);
          return weak_pi_sequence(n % 2 ? Gate::X : Gate::Y, n, params_from_theta(1.0, kPi / (2 * n)));
        }
        return strong_pi_sequence(coin(rng) ? Gate::X : Gate::Y, params_from_theta(1.0, strong(rng)));
      }();
      const OppositeDriftFidelity f = opposite_drift_fidelity(s, order(rng));
      worst = std::max(worst, std::abs(f.f2q - f.f1q * f.f1q));
    }
    return Outcome{worst < 1e-10, fmt("20 configurations, worst |f2q - f1q^2| %.3g", worst)};
  });

  report(12, [] {
    const auto t0 = Clock::now();
    const TwoQubitDrive d = build_swap_schedule(1.0, 100.0);
    const double f_delta = trace_fidelity(swap_gate(), swap_delta_unitary(d));
    const SwapFidelity f = fato_swap_fidelity(d, 400.0);
    const double inf_f = 1 - f.f_fato, inf_r = 1 - f.f_rect;
    const double dt = seconds_since(t0);
    return Outcome{f_delta > 1 - 1e-6 && std::abs(inf_f - inf_r) < 0.1 * inf_r && dt < 120,
                   fmt("delta-limit F %.16g; at 400J K=%d Inf_fato %.5g, Inf_rect %.5g", f_delta, f.order, inf_f,
                       inf_r)};
  });

  report(13, [] {
    int files = 0, mismatches = 0;
    std::string bad;
    for (const auto& c : manifest()) {
      const std::string golden = slurp(std::string(FATO_GOLDEN_DIR) + "/" + c.name);
      std::vector<std::string> variants = {c.args, c.args};
      if (takes_workers(c.args)) {
        variants = {c.args + " --workers 1", c.args + " --workers 4"};
      }
      for (const auto& args : variants) {
        int status = 0;
        const std::string out = run_cli(args, status);
        if (status != 0 || out != golden) {
          ++mismatches;
          bad += " " + c.name;
        }
      }
      ++files;
    }
    return Outcome{files > 0 && mismatches == 0,
                   fmt("%d golden files, two runs each, %d mismatches%s", files, mismatches, bad.c_str())};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
