#pragma once

#include "frobjet/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace frobjet {

// Outcome of one identity check. `detail` carries effective accuracy / caps
// or a description of the first failing component.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Frobenius manifold data in flat coordinates: constant metric eta, unit
// coordinate direction e, Euler field E = (lin_a u^a + shift^a) d_a, charges
// p_a with conformal weight r, and the genus-0 potential F0 expanded to caps.
struct FrobeniusModel {
  std::string name;
  int n = 0;
  Caps caps;
  int e_index = 0;
  MultiSeries F0;
  RMat eta, eta_inv;
  std::vector<Rational> p;
  Rational r = 0;
  std::vector<Rational> euler_lin;    // usually 1 - p_a
  std::vector<Rational> euler_shift;  // divisor constants R_e^a
  Rational q_degree = 0;              // Euler degree of the inert variable q
  std::vector<Rational> instanton;    // cp2 only: seeded N_d, d = 1..Dq

  MultiSeries zero() const { return MultiSeries::zero(n, caps); }
  MultiSeries euler_apply(const MultiSeries& f) const;
  std::vector<Rational> mu() const {  // mu_a = p_a - r/2
    std::vector<Rational> m(n);
    for (int a = 0; a < n; ++a) m[a] = p[a] - r / 2;
    return m;
  }
};

// Structure constants of the quantum product, as matrices acting on T*M:
// (A_a)_b^c = eta^{cd} d_a d_b d_d F0, plus the primitive M with
// M_a^b = eta^{bc} d_a d_c F0 (so A_a = d_a M).
struct ProductTensor {
  std::vector<Mat<MultiSeries>> A;
  Mat<MultiSeries> M;
  MultiSeries lowered(const RMat& eta, int a, int b, int c) const {
    MultiSeries s = A[a].zero();
    for (int d = 0; d < int(A.size()); ++d)
      if (eta[d][c] != 0) s += A[a].at(b, d).scaled(eta[d][c]);
    return s;
  }
};

ProductTensor structure_constants(const FrobeniusModel& m);

CheckResult check_wdvv(const FrobeniusModel& m, const ProductTensor& t);
CheckResult check_euler_axiom(const FrobeniusModel& m, const ProductTensor& t);
CheckResult check_frobenius_metric(const FrobeniusModel& m, const ProductTensor& t);

// socle one-form omega_a = Tr(A_a)
VecT<MultiSeries> socle_form(const ProductTensor& t);

// U = A_E = sum_a E^a A_a; also reachable as euler-applied M (tested)
Mat<MultiSeries> u_matrix(const FrobeniusModel& m, const ProductTensor& t);

// Euler components E^a as series
VecT<MultiSeries> euler_components(const FrobeniusModel& m);

// built-in models
FrobeniusModel make_point(Caps caps);
FrobeniusModel make_cp1(Caps caps);
FrobeniusModel make_a2(Caps caps);
FrobeniusModel make_a3(Caps caps);
FrobeniusModel make_cp2(Caps caps);

// degree-by-degree determination of the CP^2 instanton numbers N_d from the
// associativity residual (N_1 = 1 is the geometric seed)
std::vector<Rational> seed_cp2(int dq, int du);

// builtin name -> model, validated (throws on any failing load-time check)
FrobeniusModel load_model(const std::string& name, Caps caps);
std::vector<std::string> builtin_model_names();

}  // namespace frobjet
