#pragma once

#include "frobjet/fundsol.hpp"
#include "frobjet/jetpoly.hpp"

namespace frobjet {

// series functions on the jet ring; argument must have positive jet weight
// everywhere (nilpotent under the weight cap)
JetPoly jet_log1p(const JetPoly& x);

// first-order derivation sum_{l,b} c[l][b] d_{l,b} with d_{0,b} = d/du^b and
// d_{l,b} = d/dw^b_l for l >= 1
struct JetOp {
  int n = 0;
  JetCaps caps{};
  std::vector<std::vector<JetPoly>> c;  // c[l][b]

  static JetOp zero(int n, JetCaps caps, int lmax);
  int lmax() const { return int(c.size()) - 1; }
  JetPoly apply(const JetPoly& f) const;
  JetOp& add_scaled(const JetOp& o, const JetPoly& factor);
  friend JetOp operator+(JetOp a, const JetOp& b);
  friend JetOp operator-(JetOp a, const JetOp& b);
  JetOp scaled(const Rational& r) const;
  static JetOp commutator(const JetOp& x, const JetOp& y);
  bool zero_to_acc() const;
};

// all frame data over the jet ring for one model
struct JetContext {
  FrobeniusModel m;
  ProductTensor t;
  FundamentalSolution sol;
  JetCaps jc;      // working caps (weight cap carries headroom)
  int jet_order = 0;   // corpus / frame order
  int report_w = 0;    // reporting weight cap
  int pmax = 0;        // P_n built for n = 1..pmax

  std::vector<Mat<JetPoly>> A;  // lifted structure constants
  Mat<JetPoly> X, Xinv;
  JetPoly detX, logdetX;
  std::vector<std::vector<Mat<JetPoly>>> P;  // P[n][j], z^j of P_n (n>=1)
  std::vector<Mat<JetPoly>> Wt;              // W_a = X A_a
  std::vector<Mat<JetPoly>> thetaJ;          // lifted Theta z-coefficients
  std::vector<VecT<JetPoly>> s;              // raised s_k rows, k = 1..smax

  JetPoly jzero() const { return JetPoly::zero(m.n, jc); }
  JetPoly lift(const MultiSeries& f) const { return JetPoly::from_base(m.n, jc, f); }
  Mat<JetPoly> lift_mat(const Mat<MultiSeries>& x) const;
  JetPoly dtot(const JetPoly& f) const { return f.total_derivative(m.e_index); }
  Mat<JetPoly> dtot(const Mat<JetPoly>& x) const;
};

JetContext make_jet_context(const FrobeniusModel& m, const ProductTensor& t,
                            const FundamentalSolution& sol, int jet_order, int report_w,
                            int weight_cap);

// coefficient tables agree (to recorded accuracy) through level mtop
bool ops_agree(const JetOp& a, const JetOp& b, int mtop);

JetOp sigma_op(const JetContext& c, int k, int a);
JetOp dee_op(const JetContext& c, int k, int a);
JetOp dtot_op(const JetContext& c);     // the total derivative as an operator
JetOp grading_op(const JetContext& c);  // the dilaton grading field

JetPoly sigma_apply(const JetContext& c, int k, int a, const JetPoly& f);
JetPoly dee_apply(const JetContext& c, int k, int a, const JetPoly& f);

// largest k with sigma_k f != 0 (equals the jet order of f)
int filtration_degree(const JetContext& c, const JetPoly& f);

// intrinsic formulas Q = -sum <s_k, sigma_k>, e = -sum <s_{k+1}, sigma_k>
std::pair<JetPoly, JetPoly> q_e_intrinsic(const JetContext& c, const JetPoly& f);

// identity checks (operator-coefficient level plus sampled applications)
CheckResult check_x_identities(const JetContext& c);
CheckResult sigma_commutators(const JetContext& c, int kmax);
CheckResult dee_commutators(const JetContext& c, int kmax);
CheckResult check_gg_recursion(const JetContext& c);
CheckResult check_grading_relations(const JetContext& c, int kmax);
CheckResult check_dee_basepoint(const JetContext& c);

// corpus of jet monomials with weight <= wmax, u-degree <= dumax,
// q-degree <= dqmax, plus 16 fixed-seed random combinations
std::vector<JetPoly> jet_corpus(const JetContext& c, int wmax, int dumax, int dqmax);

}  // namespace frobjet
