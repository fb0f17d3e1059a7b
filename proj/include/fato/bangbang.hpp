#pragma once

// Time-optimal bang-bang synthesis for a qubit with drift w0 sz/2 and a
// bounded single-axis control Omega(t) sx/2, |Omega| <= Omega_bar.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fato/detail/simplex.hpp"
#include "fato/error.hpp"
#include "fato/qmat.hpp"

namespace fato {

enum class Gate { X, Y };

inline CMat gate_target(Gate g) { return pauli(g == Gate::X ? Axis::x : Axis::y); }

struct DriveParams {
  double omega0 = 1.0;
  double omega_bar = 1.0;
  double theta = kPi / 4;  // arctan(omega_bar / omega0)
  double omega = std::sqrt(2.0);
};

inline DriveParams derive_params(double omega0, double omega_bar) {
  if (!(omega0 > 0.0) || !(omega_bar > 0.0) || !std::isfinite(omega0) || !std::isfinite(omega_bar))
    throw Error(Errc::non_positive_input, "omega0 and omega_bar must be positive");
  return {omega0, omega_bar, std::atan2(omega_bar, omega0), std::hypot(omega0, omega_bar)};
}

inline DriveParams params_from_theta(double omega0, double theta) {
  if (!(theta > 0.0) || !(theta < kPi / 2))
    throw Error(Errc::invalid_argument, "theta must lie in (0, pi/2)");
  return derive_params(omega0, omega0 * std::tan(theta));
}

// Drive strength multiplied by (1 + eps_amp), drift by (1 + eps_omega0).
inline DriveParams perturbed(const DriveParams& p, double eps_omega0, double eps_amp) {
  return derive_params(p.omega0 * (1.0 + eps_omega0), p.omega_bar * (1.0 + eps_amp));
}

struct Bang {
  int level = 0;  // +1, 0 (singular) or -1, in units of Omega_bar
  double duration = 0.0;

  friend bool operator==(const Bang&, const Bang&) = default;
};

class BangSequence {
 public:
  using Metadata = std::map<std::string, std::string>;

  BangSequence() = default;

  BangSequence(std::vector<Bang> bangs, DriveParams params) : bangs_(std::move(bangs)), params_(params) {
    for (std::size_t i = 0; i < bangs_.size(); ++i) {
      const Bang& b = bangs_[i];
      if (b.level < -1 || b.level > 1)
        throw Error(Errc::invalid_argument, "bang level must be -1, 0 or +1");
      if (!(b.duration > 0.0) || !std::isfinite(b.duration))
        throw Error(Errc::invalid_argument, "bang durations must be positive and finite");
      if (i > 0 && bangs_[i - 1].level == b.level)
        throw Error(Errc::invalid_argument, "consecutive bangs share a level");
      total_time_ += b.duration;
    }
  }

  const std::vector<Bang>& bangs() const noexcept { return bangs_; }
  const DriveParams& params() const noexcept { return params_; }
  double total_time() const noexcept { return total_time_; }
  std::size_t size() const noexcept { return bangs_.size(); }
  bool empty() const noexcept { return bangs_.empty(); }

  const Metadata& metadata() const noexcept { return meta_; }
  void annotate(const std::string& key, std::string value) { meta_[key] = std::move(value); }

  // Interior nonzero bangs share one duration, and that duration is at
  // least pi/omega.
  bool satisfies_time_optimal_constraints() const {
    std::optional<double> middle;
    for (std::size_t i = 1; i + 1 < bangs_.size(); ++i) {
      if (bangs_[i].level == 0) continue;
      const double d = bangs_[i].duration;
      if (d < kPi / params_.omega - 1e-10) return false;
      if (middle && std::abs(*middle - d) > 1e-10) return false;
      middle = d;
    }
    return true;
  }

 private:
  std::vector<Bang> bangs_;
  DriveParams params_;
  double total_time_ = 0.0;
  Metadata meta_;
};

// Pauli vector of H = (w0 sz + level Omega_bar sx) / 2. drift_sign = -1
// gives the partner qubit with opposite drift.
inline PauliVec bang_hamiltonian(int level, const DriveParams& p, double drift_sign = 1.0) {
  return {0.5 * level * p.omega_bar, 0.0, 0.5 * drift_sign * p.omega0};
}

inline CMat bang_unitary(const Bang& b, const DriveParams& p, double drift_sign = 1.0) {
  return su2_evolution(bang_hamiltonian(b.level, p, drift_sign), b.duration);
}

// Time-ordered product of the exact bang propagators.
inline CMat sequence_unitary(const std::vector<Bang>& bangs, const DriveParams& p,
                             double drift_sign = 1.0) {
  CMat u = CMat::identity(2);
  for (const auto& b : bangs) u = bang_unitary(b, p, drift_sign) * u;
  return u;
}

inline CMat sequence_unitary(const BangSequence& seq, double drift_sign = 1.0) {
  return sequence_unitary(seq.bangs(), seq.params(), drift_sign);
}

inline constexpr double kReachTol = 1e-9;

inline bool reaches(const BangSequence& seq, const CMat& target) {
  return phase_aligned_distance(target, sequence_unitary(seq)) < kReachTol;
}

// ---------------------------------------------------------------- analytic

// Weak driving, theta = pi/(2n): n alternating bangs of length pi/omega.
// Odd n gives sigma_x, even n gives sigma_y.
inline BangSequence weak_pi_sequence(Gate gate, int n, const DriveParams& p) {
  if (n < 2) throw Error(Errc::invalid_argument, "weak solution needs n >= 2");
  if (std::abs(p.theta - kPi / (2.0 * n)) > 1e-9)
    throw Error(Errc::theta_mismatch, "theta must equal pi/(2n)");
  const bool odd = n % 2 == 1;
  if ((gate == Gate::X) != odd)
    throw Error(Errc::parity_mismatch, gate == Gate::X ? "X needs odd n" : "Y needs even n");
  std::vector<Bang> bangs;
  bangs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bangs.push_back({i % 2 == 0 ? 1 : -1, kPi / p.omega});
  BangSequence seq(std::move(bangs), p);
  seq.annotate("solution", "weak");
  seq.annotate("n", std::to_string(n));
  return seq;
}

inline constexpr const char* kT2xParsingOuter = "(2pi - 2 arccsc[2 sin theta]) / omega";
inline constexpr const char* kT2xParsingInner = "2pi - 2 arccsc[2 sin theta] / omega";

// Ultrastrong driving (theta > pi/4): three bangs.
//   X: (+1, -1, +1), t1 = t3 = 2 arccsc(2 sin theta) / omega
//   Y: (+1,  0, -1), t1 = t3 = 2 arccot(sqrt(-cos 2theta)) / omega,
//      t2 = 2 arctan(sqrt(tan^2 theta - 1)) / omega0
// The X middle time has two readings; both are tried against the exact
// product and the first that reaches sigma_x is kept.
inline BangSequence strong_pi_sequence(Gate gate, const DriveParams& p) {
  if (p.theta <= kPi / 4) throw Error(Errc::weak_regime, "strong solution needs theta > pi/4");
  const double th = p.theta;
  if (gate == Gate::Y) {
    const double t1 = 2.0 * std::atan(1.0 / std::sqrt(-std::cos(2.0 * th))) / p.omega;
    const double t2 = 2.0 * std::atan(std::sqrt(std::tan(th) * std::tan(th) - 1.0)) / p.omega0;
    BangSequence seq({{1, t1}, {0, t2}, {-1, t1}}, p);
    if (!reaches(seq, gate_target(Gate::Y)))
      throw Error(Errc::construction_failed, "strong Y times do not reach sigma_y");
    seq.annotate("solution", "strong");
    return seq;
  }
  const double arccsc = std::asin(1.0 / (2.0 * std::sin(th)));
  const double t1 = 2.0 * arccsc / p.omega;
  const std::pair<const char*, double> parsings[] = {
      {kT2xParsingOuter, (2.0 * kPi - 2.0 * arccsc) / p.omega},
      {kT2xParsingInner, 2.0 * kPi - 2.0 * arccsc / p.omega},
  };
  for (const auto& [label, t2] : parsings) {
    if (!(t2 > 0.0)) continue;
    BangSequence seq({{1, t1}, {-1, t2}, {1, t1}}, p);
    if (reaches(seq, gate_target(Gate::X))) {
      seq.annotate("solution", "strong");
      seq.annotate("t2x_parsing", label);
      return seq;
    }
  }
  throw Error(Errc::construction_failed, "no parsing of the X middle time reaches sigma_x");
}

// ---------------------------------------------------------------- search

struct SearchOptions {
  int grid = 8;          // starts per parameter axis
  int max_evals = 4000;  // per simplex run
  double ftol = 1e-12;
  int workers = 1;
};

namespace detail {

struct Pattern {
  std::vector<int> levels;
};

// Alternating patterns for every n, plus the singular single bang and the
// three-bang patterns with a singular middle.
inline std::vector<Pattern> search_patterns(int n) {
  std::vector<Pattern> out;
  for (int s : {1, -1}) {
    Pattern p;
    for (int i = 0; i < n; ++i) p.levels.push_back(i % 2 == 0 ? s : -s);
    out.push_back(std::move(p));
  }
  if (n == 1) out.push_back({{0}});
  if (n == 3)
    for (int s : {1, -1}) {
      out.push_back({{s, 0, s}});
      out.push_back({{s, 0, -s}});
    }
  return out;
}

// Parameters are (t_i [, t_m] [, t_f]); durations are |p| and nonzero
// middle bangs are pinned to >= pi/omega.
inline std::vector<Bang> pattern_bangs(const Pattern& pat, const std::vector<double>& x,
                                       const DriveParams& p) {
  const auto n = pat.levels.size();
  std::vector<Bang> bangs(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d;
    if (i == 0) d = std::abs(x[0]);
    else if (i + 1 == n) d = std::abs(x.back());
    else d = pat.levels[i] == 0 ? std::abs(x[1]) : kPi / p.omega + std::abs(x[1]);
    bangs[i] = {pat.levels[i], d};
  }
  return bangs;
}

struct Candidate {
  std::vector<Bang> bangs;
  double total = 0.0;
  double residual = 0.0;
  bool valid = false;
};

// Strict "better than" in the deterministic tie-break order: shorter T,
// then fewer bangs, then lexicographically smaller durations.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.total < b.total - 1e-9) return true;
  if (a.total > b.total + 1e-9) return false;
  if (a.bangs.size() != b.bangs.size()) return a.bangs.size() < b.bangs.size();
  for (std::size_t i = 0; i < a.bangs.size(); ++i) {
    if (a.bangs[i].duration < b.bangs[i].duration - 1e-12) return true;
    if (a.bangs[i].duration > b.bangs[i].duration + 1e-12) return false;
  }
  return false;
}

}  // namespace detail

// Shortest bang sequence (up to n_max bangs) whose product matches target
// up to phase with 1 - F < tol. Multi-start simplex over (t_i, t_m, t_f).
inline BangSequence search_to_sequence(const CMat& target, const DriveParams& p, int n_max,
                                       double tol, const SearchOptions& opt = {}) {
  if (target.dim() != 2) throw Error(Errc::dim_mismatch, "search target must be 2x2");
  if (unitarity_defect(target) > kUnitaryTol) throw Error(Errc::non_unitary, "target must be unitary");
  if (n_max < 1 || !(tol > 0.0)) throw Error(Errc::invalid_argument, "need n_max >= 1 and tol > 0");

  if (1.0 - trace_fidelity(target, CMat::identity(2)) < tol) {
    BangSequence seq({}, p);
    seq.annotate("solution", "search");
    return seq;
  }

  const double span_drive = 2.0 * kPi / p.omega;
  const double span_drift = 2.0 * kPi / p.omega0;
  const int g = std::max(opt.grid, 1);

  detail::Candidate best;
  double best_residual = 1e300;

  for (int n = 1; n <= n_max; ++n) {
    // Nonzero interior bangs are >= pi/omega each.
    if (best.valid && std::max(0, n - 2) * kPi / p.omega >= best.total - 1e-9) break;
    for (const auto& pat : detail::search_patterns(n)) {
      const int dims = std::min(n, 3);
      std::vector<double> ranges(static_cast<std::size_t>(dims));
      for (int d = 0; d < dims; ++d) {
        const std::size_t bang_index = d == 0 ? 0 : (d == dims - 1 ? pat.levels.size() - 1 : 1);
        ranges[static_cast<std::size_t>(d)] = pat.levels[bang_index] == 0 ? span_drift : span_drive;
      }
      int starts = 1;
      for (int d = 0; d < dims; ++d) starts *= g;

      std::vector<detail::Candidate> found(static_cast<std::size_t>(starts));
      auto run_start = [&](int s) {
        std::vector<double> x0(static_cast<std::size_t>(dims));
        int rem = s;
        for (int d = 0; d < dims; ++d) {
          x0[static_cast<std::size_t>(d)] = (rem % g + 0.5) / g * ranges[static_cast<std::size_t>(d)];
          rem /= g;
        }
        auto objective = [&](const std::vector<double>& x) {
          return phase_aligned_frobenius(target, sequence_unitary(detail::pattern_bangs(pat, x, p), p));
        };
        auto r = fato::detail::nelder_mead(objective, x0, 0.1 * span_drive, opt.ftol, opt.max_evals);
        // one restart to escape a collapsed simplex
        r = fato::detail::nelder_mead(objective, r.x, 1e-3 * span_drive, opt.ftol * 1e-2, opt.max_evals);
        detail::Candidate c;
        c.bangs = detail::pattern_bangs(pat, r.x, p);
        c.residual = r.fx;
        for (const auto& b : c.bangs) c.total += b.duration;
        c.valid = std::all_of(c.bangs.begin(), c.bangs.end(), [](const Bang& b) { return b.duration > 1e-9; });
        found[static_cast<std::size_t>(s)] = std::move(c);
      };

      const int workers = std::clamp(opt.workers, 1, starts);
      if (workers == 1) {
        for (int s = 0; s < starts; ++s) run_start(s);
      } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
          pool.emplace_back([&, w] {
            for (int s = w; s < starts; s += workers) run_start(s);
          });
        for (auto& t : pool) t.join();
      }

      for (auto& c : found) {
        best_residual = std::min(best_residual, c.residual);
        if (!c.valid) continue;
        const double infid = 1.0 - trace_fidelity(target, sequence_unitary(c.bangs, p));
        if (!(infid < tol)) {
          c.valid = false;
          continue;
        }
        if (!best.valid || detail::better(c, best)) best = std::move(c);
      }
    }
  }
  if (!best.valid)
    throw Error(Errc::not_found, "no bang pattern reached the target", best_residual);
  BangSequence seq(std::move(best.bangs), p);
  seq.annotate("solution", "search");
  return seq;
}

// ---------------------------------------------------------------- RWA

// Si(x) = integral_0^x sin(u)/u du, adaptive Gauss-Kronrod.
inline double sine_integral(double x) {
  auto sinc = [](double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(sinc, 0.0, x, 15, 1e-12);
}

struct RwaReference {
  double t_rwa = 0.0;  // 2 pi / Omega_bar
  double ratio = 0.0;  // Si(pi) sin(theta) / (2 theta)
};

inline RwaReference rwa_reference(const DriveParams& p) {
  if (p.theta > kPi / 4 + 1e-12)
    throw Error(Errc::strong_regime, "RWA comparison only defined for theta <= pi/4");
  return {2.0 * kPi / p.omega_bar, sine_integral(kPi) * std::sin(p.theta) / (2.0 * p.theta)};
}

// ---------------------------------------------------------------- dispatch

// Returns n when theta = pi/(2n) for integer n >= 2.
inline std::optional<int> weak_order(double theta) {
  const double n = kPi / (2.0 * theta);
  const double r = std::round(n);
  if (r >= 2 && std::abs(theta - kPi / (2.0 * r)) <= 1e-9) return static_cast<int>(r);
  return std::nullopt;
}

// pi rotation about X or Y: analytic weak or strong solution where one
// exists, numerical search otherwise.
inline BangSequence synthesize_pi(Gate gate, const DriveParams& p, const SearchOptions& opt = {}) {
  if (const auto n = weak_order(p.theta)) {
    if ((*n % 2 == 1) == (gate == Gate::X)) return weak_pi_sequence(gate, *n, p);
  }
  if (p.theta > kPi / 4) return strong_pi_sequence(gate, p);
  // cap on the bang count, with alpha taken as 2 theta
  const int n_max = static_cast<int>(std::floor(kPi / (2.0 * p.theta))) + 1;
  return search_to_sequence(gate_target(gate), p, n_max, 1e-10, opt);
}

}  // namespace fato
