#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fato {

enum class Errc {
  non_unit_axis,
  dim_mismatch,
  non_unitary,
  non_hermitian,
  non_positive_input,
  invalid_argument,
  theta_mismatch,
  parity_mismatch,
  weak_regime,
  strong_regime,
  not_found,
  empty_sequence,
  out_of_domain,
  no_convergence,
  quadrature_budget_exceeded,
  construction_failed,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::non_unit_axis: return "NonUnitAxis";
    case Errc::dim_mismatch: return "DimMismatch";
    case Errc::non_unitary: return "NonUnitary";
    case Errc::non_hermitian: return "NonHermitian";
    case Errc::non_positive_input: return "NonPositiveInput";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::theta_mismatch: return "ThetaMismatch";
    case Errc::parity_mismatch: return "ParityMismatch";
    case Errc::weak_regime: return "WeakRegime";
    case Errc::strong_regime: return "StrongRegime";
    case Errc::not_found: return "NotFound";
    case Errc::empty_sequence: return "EmptySequence";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::quadrature_budget_exceeded: return "QuadratureBudgetExceeded";
    case Errc::construction_failed: return "ConstructionFailed";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type. `payload`
// carries a numeric diagnostic where one exists (best residual for
// NotFound, last Richardson defect for NoConvergence).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, double payload = 0.0)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        payload_(payload) {}

  Errc code() const noexcept { return code_; }
  double payload() const noexcept { return payload_; }

  // Numerical failures map to CLI exit code 3, everything else to 2.
  bool is_numerical() const noexcept {
    return code_ == Errc::no_convergence || code_ == Errc::not_found ||
           code_ == Errc::quadrature_budget_exceeded ||
           code_ == Errc::construction_failed;
  }

 private:
  Errc code_;
  double payload_;
};

}  // namespace fato
