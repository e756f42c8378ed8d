#pragma once

#include "frobjet/virasoro.hpp"

namespace frobjet {

// Numeric layer: everything on the semisimple locus is evaluated in complex
// multiprecision arithmetic (eigenvalues of U come in conjugate or rotated
// families even at real points, e.g. cube roots at small Novikov parameter).
using CVec = std::vector<Complex>;
using CMat = std::vector<CVec>;

Complex eval_c(const MultiSeries& f, const CVec& u, const Complex& q);
CMat eval_mat_c(const Mat<MultiSeries>& m, const CVec& u, const Complex& q);

// A point of the tame locus: distinct nonzero eigenvalues of U, with the
// separation margin that certified it.
struct TamePoint {
  CVec u;
  Complex q;
  CVec v;       // eigenvalues, sorted by (Re, Im) unless matched to a neighbor
  Real margin;  // min over |v_i - v_j| and |v_i|, relative to max |v_i|
};

// Canonical chart data at a tame point: spectral projectors of U on T*M,
// the idempotent frame pi_i, and the Jacobians between flat and canonical
// coordinates.
struct CanonicalChart {
  int n = 0;
  TamePoint pt;
  CMat unum;               // U evaluated at the point, (U)_a^b
  std::vector<CMat> proj;  // P_i = prod_{j != i} (U - v^j)/(v^i - v^j)
  std::vector<CVec> idem;  // pi_i^a, transposed projector applied to e
  CMat jac;                // jac[i][a] = J_i^a = du^a/dv^i = pi_i^a
  CMat jac_inv;            // jac_inv[i][a] = J_a^i = dv^i/du^a = Tr(P_i d_a U)
  std::vector<CMat> du;    // du[a] = d U/du^a evaluated at the point
};

// throws TameLocusViolation when the separation margin drops below tau_sep
CanonicalChart canonical_coordinates(const FrobeniusModel& m, const ProductTensor& t,
                                     const CVec& u, const Complex& q, const Real& tau_sep);
// same chart with eigenvalues ordered by proximity to a reference chart
// (used for finite differencing, where sorting may flip branches)
CanonicalChart chart_near(const FrobeniusModel& m, const ProductTensor& t, const CVec& u,
                          const Complex& q, const CanonicalChart& ref, const Real& tau_sep);

CheckResult check_idempotents(const FrobeniusModel& m, const ProductTensor& t,
                              const CanonicalChart& ch, const Real& tol);

// Egoroff data of the diagonalized metric: eta_i = eta(pi_i, pi_i) and its
// canonical-frame derivatives, the rotation tensor, and the one-form alpha
// whose potential is the isomonodromic tau-function.
struct DiagonalMetric {
  CVec eta_i;
  CMat deta;                  // deta[i][a] = d eta_i / du^a (analytic route)
  CMat eta_ij;                // pi_j(eta_i)
  std::vector<CMat> eta_ijk;  // pi_k(eta_ij), by finite differences
  CMat gamma;                 // frame components, gamma dv^i = sum_j gamma[i][j] dv^j
  CMat gamma_flat;            // same tensor on T*M in flat coordinates
  CVec alpha;                 // frame coefficients: alpha = sum_i alpha[i] dv^i
  CVec alpha_flat;            // flat components alpha_a
};

// analytic eigen-perturbation derivatives, cross-checked against central
// finite differences (throws DerivativeMismatch on disagreement > fd_tol)
DiagonalMetric diagonal_metric(const FrobeniusModel& m, const ProductTensor& t,
                               const CanonicalChart& ch, const Real& fd_tol);

// Darboux-Egoroff relations: symmetry, the distinct-triple second-derivative
// relation (vacuous for n = 2, recorded as such), e(eta_i) = 0 and
// E(eta_i) = -r eta_i
CheckResult check_darboux_egoroff(const FrobeniusModel& m, const CanonicalChart& ch,
                                  const DiagonalMetric& dm, const Real& tol);

// mu = [gamma, U]: residual in the canonical frame, zero diagonal of mu, and
// agreement of the division-by-(v^i - v^j) route with the d log eta_i route
CheckResult check_gamma(const FrobeniusModel& m, const CanonicalChart& ch,
                        const DiagonalMetric& dm, const Real& tol);

// log tau_I = integral of alpha along the straight segment from u0 to u1
// (composite Gauss-Legendre); q held fixed
Complex log_tau_segment(const FrobeniusModel& m, const ProductTensor& t, const CVec& u0,
                        const CVec& u1, const Complex& q, int panels, const Real& tau_sep);
// closedness of alpha at a point: max_{a<b} |d_a alpha_b - d_b alpha_a| by
// central finite differences
Real alpha_closedness(const FrobeniusModel& m, const ProductTensor& t, const CVec& u,
                      const Complex& q, const Real& tau_sep);

// genus-1 potential at a tame point from the closed form
// G = log tau_I - 1/48 sum_i log eta_i, with log tau_I(uref) = 0
struct GenusOneValue {
  Complex g;
  Complex log_tau;
  CVec grad;  // dG/du^a, analytic (alpha_a - 1/48 sum_i d_a eta_i / eta_i)
};
GenusOneValue genus1_closed_form(const FrobeniusModel& m, const ProductTensor& t,
                                 const CVec& u, const Complex& q, const CVec& uref,
                                 int panels, const Real& tau_sep);

// numeric residual of L_k G = v1_rhs(k) at a tame point, k = 0..kmax
CheckResult check_v1_numeric(const FrobeniusModel& m, const ProductTensor& t, const CVec& u,
                             const Complex& q, int kmax, const Real& tol,
                             const Real& tau_sep);

// Symbolic layer: the genus-1 potential as a series in the flat coordinates.
// Solved from the k = -1, 0 constraints plus the genus-1 divisor relation;
// coefficients the grading leaves free are pinned by the k = 1 constraint
// order by order in the Novikov degree. Normalized by G(0) = 0.
MultiSeries genus1_solve(const FrobeniusModel& m, const ProductTensor& t);

// residual series of L_k G - v1_rhs(k) for k = -1..kmax
CheckResult check_v1_series(const FrobeniusModel& m, const ProductTensor& t,
                            const MultiSeries& g, int kmax);

// F_1 = G + 1/24 log det X on the jet space
JetPoly genus1_F1(const JetContext& c, const MultiSeries& g);
// sigma_{1,a} F_1 = 1/24 sigma_{0,a} Tr(M), sigma_{k,a} F_1 = 0 for 1 < k <= kmax
CheckResult check_trr1(const JetContext& c, const JetPoly& f1, int kmax);
// Q F_1 = chi/24 with chi = n for the built-in models
CheckResult check_f1_dilaton(const JetContext& c, const JetPoly& f1);

// The symmetrized second-order operator Psi(X1,X2,X3,X4) applied to f; the
// arguments are vector fields with series components.
MultiSeries psi_apply(const FrobeniusModel& m, const ProductTensor& t,
                      const std::array<VecT<MultiSeries>, 4>& x, const MultiSeries& f);
// Psi G = 0 on constant argument fields (unit, coordinate directions, and a
// fixed pseudo-random combination)
CheckResult check_psi_g(const FrobeniusModel& m, const ProductTensor& t,
                        const MultiSeries& g);

// E_d = (3d)! [q^d (u^pt)^{3d}] G, the genus-1 instanton numbers read off the
// solved series; pt_index names the coordinate dual to the point class
std::vector<Rational> elliptic_invariants(const FrobeniusModel& m, const MultiSeries& g,
                                          int pt_index, int dmax);

}  // namespace frobjet
