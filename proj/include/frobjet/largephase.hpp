#pragma once

#include "frobjet/jetspace.hpp"

namespace frobjet {

// The genus-0 potential on a truncated large phase space. Functions of the
// retained coordinates t_k^a (k <= kt) are stored as JetPoly values in a
// separate ring: base slots hold t_0, jet slot (a,k) holds t_k^a (weight k),
// q is the Novikov variable. The origin t = 0 matches the jet-space basepoint.
struct LargePhase0 {
  int n = 0;
  int e_index = 0;
  int kt = 0;       // descendant levels retained
  JetCaps tcaps{};  // t_0-degree cap, Novikov cap, weighted t_k cap
  std::vector<JetPoly> u_of_t;                     // pullback of the flat coordinates
  std::vector<std::vector<Mat<JetPoly>>> omega_t;  // Omega_{l,m} pulled back, l,m <= kt
  JetPoly f0;

  JetPoly tzero() const { return JetPoly::zero(n, tcaps); }
  // the coordinate t_k^a and the shifted variable t_k^a - delta_{k,1} delta_e^a
  JetPoly tvar(int k, int a) const;
  JetPoly tshift(int k, int a) const;
};

LargePhase0 large_phase_genus0(const JetContext& c, const TwoPoint& tp, int kt, JetCaps tcaps);

// dilaton field on the truncated phase space: d/dt_1^e - sum_{k<=kt} t_k d/dt_k
JetPoly t_dilaton(const LargePhase0& lp, const JetPoly& f);

CheckResult check_f0_dilaton(const LargePhase0& lp);
// second derivatives of f0 against the pulled-back two-point function
CheckResult check_f0_second_derivatives(const LargePhase0& lp, const RMat& eta);

}  // namespace frobjet
