#pragma once

#include "frobjet/virasoro.hpp"

#include <map>

namespace frobjet {

// Correlator layer: descendent n-point functions realized as jet-space
// functions, in two frames. The tau frame differentiates a potential by the
// flat-coordinate fields d_{k,a}; the sigma frame uses the intrinsic fields.

enum class Frame { tau, sigma };

// insertion list ((k_1,a_1),...,(k_n,a_n)), level k_i >= 0
using InsList = std::vector<std::pair<int, int>>;

struct CorrelatorTable {
  int genus = 0;
  Frame frame = Frame::tau;
  InsList ins;
  JetPoly value;
  // the tuple itself plus every componentwise-lower tuple over all index
  // labels, keyed in canonical (sorted) order; needed by frame_transform
  std::map<InsList, JetPoly> entries;
  std::string note;
};

// shared data for the correlator evaluators: the two-point tensors, the
// intrinsic coefficient rows extended beyond the context's stored range, the
// lifted coefficients of the inverse solution, and the connection matrices
// entering the level-zero commutation shift
struct CorrelatorContext {
  const JetContext* c = nullptr;
  TwoPoint tp;
  int mmax = 0;                      // intrinsic rows stored for 1..mmax
  std::vector<VecT<JetPoly>> srow;
  std::vector<Mat<JetPoly>> thinv;   // lifted z^j coefficients of Theta^{-1}
  std::vector<Mat<JetPoly>> amat;    // amat[a] = sum_b X_a^b A_b
};

CorrelatorContext make_correlator_context(const JetContext& c);

// pullback of the shifted time row t_k to the jet space, k <= 0; the
// w-accuracy records how far the inverse-solution weighting is trusted
VecT<JetPoly> negative_time_row(const CorrelatorContext& g, int k);

// genus-0 one-point functions <<tau_{k,a}>>_0 (index a lowered)
VecT<JetPoly> genus0_one_point(const CorrelatorContext& g, int k);

// oracle checks for the one-point layer: the total derivative of the k = 0
// row reproduces the flat coordinates, and d_{j,c}-derivatives reproduce the
// two-point tensors with the alternating sign
CheckResult check_one_point(const CorrelatorContext& g, int kmax);

// n >= 2 insertions: two-point base plus d-frame differentiation; throws
// UnsupportedArity for n < 2
CorrelatorTable genus0_correlator(const CorrelatorContext& g, const InsList& ins,
                                  bool with_lower = false);

// correlators of a supplied genus-g potential
CorrelatorTable tau_correlator(const CorrelatorContext& g, int genus, const JetPoly& fg,
                               const InsList& ins, bool with_lower = false);
CorrelatorTable sigma_correlator(const CorrelatorContext& g, int genus, const JetPoly& fg,
                                 const InsList& ins);

// triangular interconversion of the two frames by solution-coefficient
// weighting; needs the companion entries, round trip is the identity
CorrelatorTable frame_transform(const CorrelatorContext& g, const CorrelatorTable& ct,
                                Frame to);

// genus-0 descendent recursion: the level (k1,k2,k3) three-point functions
// against the contracted product of a two-point and a three-point, k1 >= 1
CheckResult trr0_residual(const CorrelatorContext& g, int k1, int k2, int k3);

// associativity at the correlator level, all four outer indices
CheckResult wdvv_residual(const CorrelatorContext& g);

enum class GwAxiom { puncture, dilaton, divisor };

// residuals of the puncture / dilaton / divisor equations on the available
// potentials: genus-0 one- and two-point functions always, genus 1 when f1
// is supplied; the divisor case checks the Euler action on the solution
// coefficients and reports the degree-0 genus-1 anchor
ConstraintResidual axiom_residuals(const CorrelatorContext& g, GwAxiom which,
                                   const JetPoly* f1);

// the five-term genus-2 level-2 one-point relation: labeled coefficients,
// labeled assembled terms at outer index a, and the residual evaluator
// (throws MissingPotential when a potential is absent; never asserts
// solvability for the candidate)
std::vector<std::pair<std::string, Rational>> trr2_coefficients();
std::vector<std::pair<std::string, JetPoly>> trr2_terms(const CorrelatorContext& g,
                                                        const JetPoly& f1, int a);
ConstraintResidual trr2_residual(const CorrelatorContext& g, const JetPoly* f1,
                                 const JetPoly* f2);

// vanishing of sigma-frame derivatives beyond the dimension bound
// k_1+...+k_n > 3g-3+n, enumerated for n = 1, 2 within the context's caps
ConstraintResidual theorem_fg_vanishing(const CorrelatorContext& g, int genus,
                                        const JetPoly& fg);

// two-point functions are pullbacks: their d_{m,c}-derivatives satisfy the
// contracted recursion through the level (m-1, 0) two-point, m <= mmax
CheckResult dw_pullback_check(const CorrelatorContext& g, int mmax);

}  // namespace frobjet
