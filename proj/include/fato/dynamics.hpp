#pragma once

// Propagation of bang-bang sequences and of band-limited (FATO) drives,
// toggling-frame average Hamiltonian and closed-form fidelity estimates.

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fato/bangbang.hpp"
#include "fato/error.hpp"
#include "fato/fourier.hpp"
#include "fato/qmat.hpp"

namespace fato {

struct PropagationResult {
  CMat final_unitary = CMat::identity(2);
  double fidelity = 1.0;  // trace_fidelity(target, final_unitary)
  long steps = 0;
  double max_unitarity_defect = 0.0;
  double step_size = 0.0;
  double richardson_defect = 0.0;  // max-entry distance between the last two step sizes
  int refinements = 0;
};

struct StepControl {
  double tolerance = 1e-8;  // Richardson acceptance on the final unitary
  int max_refinements = 3;
  bool refine = true;  // false: single run at the initial step, no check
};

inline constexpr double kUnitarityBudget = 1e-9;

namespace detail {

inline constexpr double kGaussOffset = 0.28867513459481288225;  // sqrt(3)/6

// Fourth-order Magnus step with two Gauss nodes; each step is an exact
// SU(2) exponential. `ham(t)` returns the Pauli vector of H(t).
template <class Ham>
CMat magnus4_su2(Ham&& ham, double total, long steps) {
  const double h = total / static_cast<double>(steps);
  CMat u = CMat::identity(2);
  for (long i = 0; i < steps; ++i) {
    const double t = h * static_cast<double>(i);
    const PauliVec a = ham(t + h * (0.5 - kGaussOffset));
    const PauliVec b = ham(t + h * (0.5 + kGaussOffset));
    const PauliVec c = cross(b, a);
    const double k = h * h * kGaussOffset;  // sqrt(3) h^2 / 6
    const PauliVec m{0.5 * h * (a[0] + b[0]) + k * c[0], 0.5 * h * (a[1] + b[1]) + k * c[1],
                     0.5 * h * (a[2] + b[2]) + k * c[2]};
    u = su2_evolution(m, 1.0) * u;
  }
  return u;
}

// Same scheme for a 4x4 Hamiltonian `ham(t) -> CMat`.
template <class Ham>
CMat magnus4_dense(Ham&& ham, double total, long steps) {
  using namespace std::complex_literals;
  const double h = total / static_cast<double>(steps);
  CMat u = CMat::identity(4);
  for (long i = 0; i < steps; ++i) {
    const double t = h * static_cast<double>(i);
    const CMat a = ham(t + h * (0.5 - kGaussOffset));
    const CMat b = ham(t + h * (0.5 + kGaussOffset));
    CMat m = (a + b) * (0.5 * h) - commutator(b, a) * (0.5i * h * h * kGaussOffset);
    // remove rounding anti-Hermitian residue before the eigensolver
    m = (m + m.adjoint()) * 0.5;
    u = expm_hermitian(m, 1.0) * u;
  }
  return u;
}

inline long steps_for(double total, double h0) {
  return std::max<long>(1, static_cast<long>(std::ceil(total / h0 - 1e-9)));
}

// Runs `stepper(n)` at n and 2n steps, doubling until the two final
// unitaries agree to control.tolerance.
template <class Stepper>
PropagationResult refine_and_check(Stepper&& stepper, double total, double h0, const CMat& target,
                                   const StepControl& control) {
  PropagationResult res;
  long n = steps_for(total, h0);
  CMat coarse = stepper(n);
  if (control.refine) {
    for (int r = 0;; ++r) {
      CMat fine = stepper(2 * n);
      res.richardson_defect = (coarse - fine).max_abs();
      n *= 2;
      coarse = fine;
      res.refinements = r;
      if (res.richardson_defect < control.tolerance) break;
      if (r == control.max_refinements)
        throw Error(Errc::no_convergence, "Richardson check did not reach tolerance",
                    res.richardson_defect);
    }
  }
  res.final_unitary = coarse;
  res.steps = n;
  res.step_size = total / static_cast<double>(n);
  res.max_unitarity_defect = unitarity_defect(res.final_unitary);
  if (res.max_unitarity_defect > kUnitarityBudget)
    throw Error(Errc::no_convergence, "propagator lost unitarity", res.max_unitarity_defect);
  res.fidelity = trace_fidelity(target, res.final_unitary);
  return res;
}

}  // namespace detail

// Exact product of bang propagators.
inline PropagationResult propagate_bb(const BangSequence& seq, const CMat& target) {
  PropagationResult res;
  res.final_unitary = sequence_unitary(seq);
  res.steps = static_cast<long>(seq.size());
  res.max_unitarity_defect = unitarity_defect(res.final_unitary);
  res.fidelity = trace_fidelity(target, res.final_unitary);
  return res;
}

// i dU/dt = (1/2)[w0 sz + Omega_bar drive(t) sx] U over [0, total].
template <class Drive>
PropagationResult propagate_drive(const DriveParams& p, Drive&& drive, double total, const CMat& target,
                                  double h0, const StepControl& control = {}) {
  if (!(total > 0.0)) throw Error(Errc::invalid_argument, "propagation time must be positive");
  auto ham = [&](double t) { return PauliVec{0.5 * p.omega_bar * drive(t), 0.0, 0.5 * p.omega0}; };
  return detail::refine_and_check([&](long n) { return detail::magnus4_su2(ham, total, n); }, total, h0,
                                  target, control);
}

// i dU/dt = H(t) U for a 4x4 Hamiltonian callable.
template <class Ham>
PropagationResult propagate_dense(Ham&& ham, double total, const CMat& target, double h0,
                                  const StepControl& control = {}) {
  if (!(total > 0.0)) throw Error(Errc::invalid_argument, "propagation time must be positive");
  return detail::refine_and_check([&](long n) { return detail::magnus4_dense(ham, total, n); }, total, h0,
                                  target, control);
}

// Initial step for a waveform: the fastest retained harmonic gets >= 64
// steps per cycle.
inline double waveform_step(const FourierWaveform& w, double step_hint) {
  return std::min(step_hint, w.period / (64.0 * std::max(w.order, 1)));
}

inline PropagationResult propagate_waveform(const FourierWaveform& w, const DriveParams& p, const CMat& target,
                                            double step_hint = std::numeric_limits<double>::infinity(),
                                            const StepControl& control = {}) {
  if (!(w.period > 0.0)) throw Error(Errc::invalid_argument, "waveform period must be positive");
  return propagate_drive(
      p, [&](double t) { return eval_unchecked(w, t); }, w.period, target, waveform_step(w, step_hint), control);
}

// ---------------------------------------------------------------- Magnus

struct EffectiveHamiltonian {
  CMat matrix = CMat(2);
  PauliVec components{};  // matrix = components . sigma
  double norm = 0.0;      // |components|, rad/time
  double truncation_tail = 0.0;  // (1/2) sum_{k > reference_order} of the neglected remainder
  int reference_order = 0;
  long nodes = 0;
};

inline constexpr long kQuadratureBudget = 8'000'000;

// First-order Magnus (time-averaged) Hamiltonian of the truncation error
// in the toggling frame of the ideal bang-bang evolution:
//   Hbar = (1/T) int_0^T U_id^dag(t) H_err(t) U_id(t) dt,
//   H_err(t) = -(Omega_bar/2) R_K(t) sx,
// the truncated drive being f - R_K. R_K is summed up to k = 8K + 64.
inline EffectiveHamiltonian magnus_effective(const BangSequence& seq, int order) {
  if (order < 0) throw Error(Errc::invalid_argument, "order must be >= 0");
  if (seq.empty()) throw Error(Errc::empty_sequence, "sequence has no bangs");
  const DriveParams& p = seq.params();
  const double period = seq.total_time();
  const int k_ref = 8 * order + 64;
  const FourierWaveform ref = series_of(seq, k_ref);

  constexpr int kNodes = 8;
  using Rule = boost::math::quadrature::gauss<double, kNodes>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();

  std::vector<long> panels;
  long total_nodes = 0;
  for (const auto& b : seq.bangs()) {
    panels.push_back(static_cast<long>(std::ceil(b.duration / period * k_ref * 4.0)) + 1);
    total_nodes += panels.back() * kNodes;
  }
  const long min_nodes = 256L * (k_ref / std::max(order, 1) + 1);
  if (total_nodes < min_nodes) {
    const long scale = (min_nodes + total_nodes - 1) / total_nodes;
    for (auto& n : panels) n *= scale;
    total_nodes *= scale;
  }
  if (total_nodes > kQuadratureBudget)
    throw Error(Errc::quadrature_budget_exceeded, "too many quadrature nodes", static_cast<double>(total_nodes));

  auto remainder = [&](double t) {
    return harmonic_sum(ref.cos_coeffs, ref.sin_coeffs, order + 1, k_ref, 2.0 * kPi * t / period);
  };
  const CMat sx = pauli(Axis::x);

  CMat acc(2);
  CMat u_start = CMat::identity(2);
  double start = 0.0;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const Bang& b = seq.bangs()[j];
    const PauliVec hb = bang_hamiltonian(b.level, p);
    const double width = b.duration / static_cast<double>(panels[j]);
    for (long q = 0; q < panels[j]; ++q) {
      const double mid = (static_cast<double>(q) + 0.5) * width;
      for (int i = 0; i < static_cast<int>(abscissa.size()); ++i) {
        // symmetric rule: abscissa[0] is the centre node for odd counts only
        for (int sgn : {-1, 1}) {
          if (sgn < 0 && abscissa[static_cast<std::size_t>(i)] == 0.0) continue;
          const double tau = mid + sgn * 0.5 * width * abscissa[static_cast<std::size_t>(i)];
          const CMat u = su2_evolution(hb, tau) * u_start;
          const double wgt = 0.5 * width * weights[static_cast<std::size_t>(i)];
          acc += (u.adjoint() * sx * u) * (-0.5 * p.omega_bar * remainder(start + tau) * wgt);
        }
      }
    }
    u_start = bang_unitary(b, p) * u_start;
    start += b.duration;
  }

  EffectiveHamiltonian eff;
  eff.matrix = acc * (1.0 / period);
  eff.matrix = (eff.matrix + eff.matrix.adjoint()) * 0.5;
  eff.components = pauli_components(eff.matrix);
  eff.norm = norm3(eff.components);
  eff.truncation_tail = ref.tail_error;
  eff.reference_order = k_ref;
  eff.nodes = total_nodes;
  return eff;
}

// U_id(T) exp(-i Hbar T)
inline CMat first_order_unitary(const BangSequence& seq, const EffectiveHamiltonian& eff) {
  return sequence_unitary(seq) * su2_evolution(eff.components, seq.total_time());
}

// ---------------------------------------------------------------- closed forms

enum class Regime { weak, strong };

// The weak-driving constant appears as pi/4 in one derivation and pi/2 in
// another; both are selectable.
enum class CoeffVariant { main_text, appendix };

inline Regime regime_of(double theta) { return theta > kPi / 4 ? Regime::strong : Regime::weak; }

inline double analytic_fidelity(Regime regime, Gate gate, double theta, double e_k,
                                CoeffVariant variant = CoeffVariant::main_text) {
  if (!(e_k >= 0.0)) throw Error(Errc::invalid_argument, "E_K must be non-negative");
  double angle;
  if (regime == Regime::weak) {
    angle = std::tan(theta) * e_k * (variant == CoeffVariant::main_text ? kPi / 4 : kPi / 2);
  } else {
    angle = 2.0 / kPi * (gate == Gate::X ? std::sin(theta) : std::tan(theta)) * e_k;
  }
  return std::abs(std::cos(angle));
}

}  // namespace fato
