#pragma once

// Dense complex 2x2 / 4x4 matrices for single- and two-qubit propagators.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>

#include <Eigen/Eigenvalues>

#include "fato/error.hpp"

namespace fato {

using cplx = std::complex<double>;

enum class Axis { x, y, z };

// Real coefficients (hx, hy, hz) of a traceless 2x2 Hermitian h.sigma.
using PauliVec = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitAxisTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-9;

class CMat {
 public:
  CMat() = default;

  explicit CMat(int dim) : dim_(dim) {
    if (dim != 2 && dim != 4)
      throw Error(Errc::dim_mismatch, "matrix dimension must be 2 or 4");
  }

  static CMat identity(int dim) {
    CMat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMat from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    CMat m(static_cast<int>(rows.size()));
    int r = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != m.dim_)
        throw Error(Errc::dim_mismatch, "matrix rows must be square");
      int c = 0;
      for (const auto& v : row) m(r, c++) = v;
      ++r;
    }
    return m;
  }

  int dim() const noexcept { return dim_; }

  cplx& operator()(int r, int c) noexcept { return a_[r * dim_ + c]; }
  const cplx& operator()(int r, int c) const noexcept { return a_[r * dim_ + c]; }

  std::span<const cplx> entries() const noexcept {
    return {a_.data(), static_cast<std::size_t>(dim_ * dim_)};
  }

  CMat adjoint() const {
    CMat out(dim_);
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  cplx trace() const noexcept {
    cplx t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& v : entries()) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius() const noexcept {
    double s = 0.0;
    for (const auto& v : entries()) s += std::norm(v);
    return std::sqrt(s);
  }

  CMat& operator+=(const CMat& o) {
    check_same(o);
    for (int i = 0; i < dim_ * dim_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  CMat& operator-=(const CMat& o) {
    check_same(o);
    for (int i = 0; i < dim_ * dim_; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  CMat& operator*=(cplx s) noexcept {
    for (int i = 0; i < dim_ * dim_; ++i) a_[i] *= s;
    return *this;
  }

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator*(CMat a, cplx s) { return a *= s; }
  friend CMat operator*(cplx s, CMat a) { return a *= s; }

  friend CMat operator*(const CMat& a, const CMat& b) {
    a.check_same(b);
    const int n = a.dim_;
    CMat out(n);
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < n; ++k) {
        const cplx ark = a(r, k);
        for (int c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

 private:
  void check_same(const CMat& o) const {
    if (o.dim_ != dim_) throw Error(Errc::dim_mismatch, "operand dimensions differ");
  }

  int dim_ = 2;
  std::array<cplx, 16> a_{};
};

inline CMat pauli(Axis axis) {
  using namespace std::complex_literals;
  switch (axis) {
    case Axis::x: return CMat::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    case Axis::y: return CMat::from_rows({{0.0, -1i}, {1i, 0.0}});
    case Axis::z: return CMat::from_rows({{1.0, 0.0}, {0.0, -1.0}});
  }
  return CMat::identity(2);
}

inline CMat from_pauli(const PauliVec& h) {
  using namespace std::complex_literals;
  return CMat::from_rows({{h[2], h[0] - 1i * h[1]}, {h[0] + 1i * h[1], -h[2]}});
}

// Coefficients of the traceless part of a 2x2 matrix in the Pauli basis.
inline PauliVec pauli_components(const CMat& m) {
  if (m.dim() != 2) throw Error(Errc::dim_mismatch, "Pauli components need a 2x2 matrix");
  return {0.5 * (m(0, 1) + m(1, 0)).real(), 0.5 * (m(1, 0) - m(0, 1)).imag(),
          0.5 * (m(0, 0) - m(1, 1)).real()};
}

inline double norm3(const PauliVec& v) { return std::hypot(v[0], v[1], v[2]); }

inline PauliVec cross(const PauliVec& a, const PauliVec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// cos(phi) I - i sin(phi) n.sigma, closed form.
inline CMat exp_su2(double nx, double ny, double nz, double phi) {
  const double len = std::hypot(nx, ny, nz);
  if (std::abs(len - 1.0) > kUnitAxisTol)
    throw Error(Errc::non_unit_axis, "rotation axis must have unit norm");
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  CMat u(2);
  u(0, 0) = {c, -s * nz};
  u(0, 1) = {-s * ny, -s * nx};
  u(1, 0) = {s * ny, -s * nx};
  u(1, 1) = {c, s * nz};
  return u;
}

// exp(-i t h.sigma) for an arbitrary (possibly zero) Pauli vector.
inline CMat su2_evolution(const PauliVec& h, double t) {
  const double len = norm3(h);
  if (len == 0.0) return CMat::identity(2);
  return exp_su2(h[0] / len, h[1] / len, h[2] / len, len * t);
}

inline CMat kron(const CMat& a, const CMat& b) {
  if (a.dim() != 2 || b.dim() != 2)
    throw Error(Errc::dim_mismatch, "kron is defined for 2x2 factors");
  CMat out(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

inline CMat commutator(const CMat& a, const CMat& b) { return a * b - b * a; }

// max |U^dag U - I|
inline double unitarity_defect(const CMat& u) {
  return (u.adjoint() * u - CMat::identity(u.dim())).max_abs();
}

inline bool is_hermitian(const CMat& h, double tol = kHermitianTol) {
  return (h - h.adjoint()).max_abs() <= tol;
}

// |Tr(target^dag actual)| / dim
inline double trace_fidelity(const CMat& target, const CMat& actual) {
  if (target.dim() != actual.dim())
    throw Error(Errc::dim_mismatch, "fidelity operands differ in dimension");
  if (unitarity_defect(target) > kUnitaryTol || unitarity_defect(actual) > kUnitaryTol)
    throw Error(Errc::non_unitary, "fidelity operands must be unitary");
  cplx t = 0.0;
  const int n = target.dim();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) t += std::conj(target(r, c)) * actual(r, c);
  return std::min(1.0, std::abs(t) / n);
}

// `m` times the unit phase maximising Re Tr(ref^dag m e^{i phi}).
inline CMat phase_align(const CMat& ref, const CMat& m) {
  cplx t = 0.0;
  for (int r = 0; r < ref.dim(); ++r)
    for (int c = 0; c < ref.dim(); ++c) t += std::conj(ref(r, c)) * m(r, c);
  if (std::abs(t) == 0.0) return m;
  return m * (std::conj(t) / std::abs(t));
}

inline double phase_aligned_distance(const CMat& a, const CMat& b) {
  return (a - phase_align(a, b)).max_abs();
}

inline double phase_aligned_frobenius(const CMat& a, const CMat& b) {
  return (a - phase_align(a, b)).frobenius();
}

// exp(-i t H) for Hermitian H. 2x2 uses the axis-angle form, 4x4 an
// eigendecomposition.
inline CMat expm_hermitian(const CMat& h, double t) {
  if (!is_hermitian(h)) throw Error(Errc::non_hermitian, "generator is not Hermitian");
  if (h.dim() == 2) {
    const double mean = 0.5 * (h(0, 0) + h(1, 1)).real();
    return su2_evolution(pauli_components(h), t) * std::polar(1.0, -mean * t);
  }
  Eigen::Matrix4cd m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = h(r, c);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  const Eigen::Matrix4cd& v = es.eigenvectors();
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  const Eigen::Matrix4cd u = v * phases.asDiagonal() * v.adjoint();
  CMat out(4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = u(r, c);
  return out;
}

}  // namespace fato
