#pragma once

#include "frobjet/jetspace.hpp"

namespace frobjet {

// residual of one constraint identity at fixed genus and index
struct ConstraintResidual {
  std::string identity;
  int genus = 0;
  int k = 0;
  JetPoly residual;
  bool pass = false;
  std::string detail;
};

// the conformal operator d/dz + z^{-1}(mu + 1/2) + U, acting by left
// multiplication on matrix- or covector-valued Laurent series
Laurent<Mat<JetPoly>> delta_z(const JetContext& c, const Laurent<Mat<JetPoly>>& f);
Laurent<VecT<JetPoly>> delta_z(const JetContext& c, const Laurent<VecT<JetPoly>>& f);

// Euler powers: components <e, U^k du^a> = (U^k)_e^a
VecT<MultiSeries> euler_power(const FrobeniusModel& m, const ProductTensor& t, int k);
CheckResult check_euler_bracket(const FrobeniusModel& m, const ProductTensor& t, int jmax,
                                int kmax);

// the Virasoro field as a first-order operator table, k >= -1
JetOp virasoro_op(const JetContext& c, int k);
JetPoly virasoro_apply(const JetContext& c, int k, const JetPoly& f);

CheckResult check_virasoro_relations(const JetContext& c, int kmax);
CheckResult check_lk_on_x(const JetContext& c, int kmax);
ConstraintResidual lk_logdet_check(const JetContext& c, int k);

// trace term H_k = -1/4 sum_l Tr((mu-1/2) U^l (mu+1/2) U^{k-l})
MultiSeries h_k(const FrobeniusModel& m, const ProductTensor& t, int k);
CheckResult liu_hk_identity(const JetContext& c, int jmax, int kmax);

CheckResult check_delta_self_adjoint(const FrobeniusModel& m, const ProductTensor& t, int nz);
ConstraintResidual genus0_virasoro_check(const JetContext& c, int k);

// quadratic term: second-order operator on one argument, or bilinear pairing
JetPoly delta_k_apply(const JetContext& c, int k, const JetPoly& f);
JetPoly delta_k_bilinear(const JetContext& c, int k, const JetPoly& f, const JetPoly& g);

// genus-1 constraint right side sum_l (1/4 Tr(mu U^l mu U^{k-l})
//                                      + 1/24 <e, U^l mu U^{k-l} omega>)
MultiSeries v1_rhs(const FrobeniusModel& m, const ProductTensor& t, int k);

// L_k restricted to functions on the manifold: -<e, U^{k+1} du^a> d_a
MultiSeries lk_small(const FrobeniusModel& m, const ProductTensor& t, int k,
                     const MultiSeries& f);

// genus-g constraint residual; potentials[i] is the genus-(i+1) potential as a
// jet polynomial (g = 1 needs potentials[0] = G, the reduced potential)
ConstraintResidual assemble_constraint(const JetContext& c, int g, int k,
                                       const std::vector<JetPoly>& potentials);

}  // namespace frobjet
