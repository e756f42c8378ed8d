#pragma once

#include "frobjet/model.hpp"

namespace frobjet {

enum class ThetaTag { plain, conformal, symmetric };

inline const char* tag_name(ThetaTag t) {
  switch (t) {
    case ThetaTag::plain: return "plain";
    case ThetaTag::conformal: return "conformal";
    default: return "symmetric";
  }
}

// Theta(z) = I + sum_{n>=0} z^{n+1} theta[n], a fundamental solution of
// d_a Theta = z Theta A_a. theta[0] is the primitive M with M_e^a = u^a.
struct FundamentalSolution {
  ThetaTag tag = ThetaTag::plain;
  int nz = 0;  // stored orders theta[0..nz-1], i.e. z-powers through z^nz
  std::vector<Mat<MultiSeries>> theta;
  // flat R-series coefficients (u-constant, possibly Novikov-ring valued)
  std::vector<Mat<MultiSeries>> rk;
  // G_k applied during conformalization (index 0 unused)
  std::vector<Mat<MultiSeries>> gauge;

  // z^m coefficient of Theta(z)
  Mat<MultiSeries> coef(int m) const {
    if (m == 0) return Mat<MultiSeries>::identity(theta[0].n(), theta[0].zero());
    return theta[m - 1];
  }
  // z^m coefficients of Theta^{-1}(z), m = 0..nz
  std::vector<Mat<MultiSeries>> inverse_coefs() const;
};

// two-point tensors Omega_{k,l} for k + l <= stored range
struct TwoPoint {
  int kmax = 0;  // Omega_{k,l} stored for k, l >= 0, k + l <= kmax
  std::vector<std::vector<Mat<MultiSeries>>> omega;
  const Mat<MultiSeries>& at(int k, int l) const { return omega[k][l]; }
};

FundamentalSolution build_theta(const FrobeniusModel& m, const ProductTensor& t, int nz,
                                ThetaTag normalization);

// R(z) = [Theta(mu+1/2) + z Theta U - z dTheta/dz] Theta^{-1}, coefficients of
// z^0..z^{nz-1} as matrices of series (flat iff the gauge is right)
std::vector<Mat<MultiSeries>> r_series(const FundamentalSolution& s, const FrobeniusModel& m,
                                       const ProductTensor& t);

// left-gauge the plain solution so that [mu, R_k] = k R_k; records G_k and R_k
FundamentalSolution conformalize(const FundamentalSolution& s, const FrobeniusModel& m,
                                 const ProductTensor& t);

// right-multiply by rho^{-1/2}, rho = Theta^+ Theta, so Theta^+ Theta = I
FundamentalSolution symmetrize(const FundamentalSolution& s, const FrobeniusModel& m,
                               const ProductTensor& t);

TwoPoint two_point(const FundamentalSolution& s);

// eta-adjoint with z -> -z applied to the z^m coefficient: (-1)^m eta X^T eta^{-1}
Mat<MultiSeries> theta_dagger_coef(const FundamentalSolution& s, const FrobeniusModel& m, int j);

// checks used by suites and tests
CheckResult check_theta_equation(const FundamentalSolution& s, const FrobeniusModel& m,
                                 const ProductTensor& t);
CheckResult check_r_flat(const FundamentalSolution& s, const FrobeniusModel& m,
                         const ProductTensor& t);
CheckResult check_symmetric(const FundamentalSolution& s, const FrobeniusModel& m);
CheckResult check_two_point_symmetry(const TwoPoint& tp, const FundamentalSolution& s,
                                     const FrobeniusModel& m);

}  // namespace frobjet
