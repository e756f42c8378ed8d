#include "frobjet/virasoro.hpp"

#include <random>
#include <sstream>

namespace frobjet {

namespace {

Mat<JetPoly> mu_shift_mat(const JetContext& c, const Rational& shift) {
  auto mu = c.m.mu();
  RMat d(c.m.n, std::vector<Rational>(c.m.n, Rational(0)));
  for (int a = 0; a < c.m.n; ++a) d[a][a] = mu[a] + shift;
  return Mat<JetPoly>::from_rational(c.m.n, c.jzero(), d);
}

Mat<JetPoly> lifted_u(const JetContext& c) { return c.lift_mat(u_matrix(c.m, c.t)); }

Laurent<Mat<JetPoly>> delta_z_impl(const Laurent<Mat<JetPoly>>& f, const Mat<JetPoly>& muh,
                                   const Mat<JetPoly>& u) {
  Laurent<Mat<JetPoly>> out(f.zero_elem());
  for (int j = f.zmin(); j <= f.zmax(); ++j) {
    const auto& fj = f.at(j);
    if (fj.is_zero()) continue;
    out.add_at(j - 1, fj.scaled(j) + muh * fj);
    out.add_at(j, u * fj);
  }
  return out;
}

template <class T>
Laurent<VecT<T>> delta_z_vec(const Laurent<VecT<T>>& f, const std::vector<Rational>& mu,
                             const Mat<T>& u) {
  Laurent<VecT<T>> out(f.zero_elem());
  int n = f.zero_elem().n;
  for (int j = f.zmin(); j <= f.zmax(); ++j) {
    const auto& fj = f.at(j);
    if (fj.is_zero()) continue;
    VecT<T> lower(n, f.zero_elem().zero);
    for (int a = 0; a < n; ++a) lower[a] = fj[a].scaled(Rational(j) + mu[a] + Rational(1, 2));
    out.add_at(j - 1, lower);
    out.add_at(j, col_mul(u, fj));
  }
  return out;
}

std::vector<Mat<MultiSeries>> u_powers(const FrobeniusModel& m, const ProductTensor& t,
                                       int kmax) {
  std::vector<Mat<MultiSeries>> p{Mat<MultiSeries>::identity(m.n, m.zero())};
  auto u = u_matrix(m, t);
  for (int k = 1; k <= kmax; ++k) p.push_back(p.back() * u);
  return p;
}

Mat<MultiSeries> mu_base_mat(const FrobeniusModel& m, const Rational& shift) {
  auto mu = m.mu();
  RMat d(m.n, std::vector<Rational>(m.n, Rational(0)));
  for (int a = 0; a < m.n; ++a) d[a][a] = mu[a] + shift;
  return Mat<MultiSeries>::from_rational(m.n, m.zero(), d);
}

}  // namespace

Laurent<Mat<JetPoly>> delta_z(const JetContext& c, const Laurent<Mat<JetPoly>>& f) {
  return delta_z_impl(f, mu_shift_mat(c, Rational(1, 2)), lifted_u(c));
}

Laurent<VecT<JetPoly>> delta_z(const JetContext& c, const Laurent<VecT<JetPoly>>& f) {
  return delta_z_vec(f, c.m.mu(), lifted_u(c));
}

VecT<MultiSeries> euler_power(const FrobeniusModel& m, const ProductTensor& t, int k) {
  auto up = u_powers(m, t, k);
  VecT<MultiSeries> v(m.n, m.zero());
  for (int a = 0; a < m.n; ++a) v[a] = up[k].at(m.e_index, a);
  return v;
}

CheckResult check_euler_bracket(const FrobeniusModel& m, const ProductTensor& t, int jmax,
                                int kmax) {
  CheckResult r{"Euler power bracket", false, ""};
  std::vector<VecT<MultiSeries>> e;
  for (int k = 0; k <= jmax + kmax - 1; ++k) e.push_back(euler_power(m, t, k));
  for (int j = 0; j <= jmax; ++j)
    for (int k = j; k <= kmax; ++k) {
      if (j + k < 1) continue;
      for (int a = 0; a < m.n; ++a) {
        MultiSeries br = m.zero();
        for (int b = 0; b < m.n; ++b)
          br += e[j][b] * e[k][a].partial_u(b) - e[k][b] * e[j][a].partial_u(b);
        if (!(br - e[j + k - 1][a].scaled(k - j)).zero_to_acc()) {
          r.detail = "bracket fails at (j,k) = (" + std::to_string(j) + "," +
                     std::to_string(k) + ")";
          return r;
        }
      }
    }
  r.pass = true;
  r.detail = "powers through " + std::to_string(jmax + kmax - 1);
  return r;
}

JetOp virasoro_op(const JetContext& c, int k) {
  if (k < -1) throw FrobjetError("BadIndex", "Virasoro index below -1");
  int n = c.m.n;
  auto muh = mu_shift_mat(c, Rational(1, 2));
  auto u = lifted_u(c);
  // residues of delta_z^{k+1} P_m(z), m = 0..pmax-1, with P_0 = z^{-1} I
  std::vector<Mat<JetPoly>> res;
  for (int m = 0; m <= c.pmax - 1; ++m) {
    Laurent<Mat<JetPoly>> pm(Mat<JetPoly>(n, c.jzero()));
    if (m == 0) {
      pm.set(-1, Mat<JetPoly>::identity(n, c.jzero()));
    } else {
      for (int j = 0; j < m; ++j) pm.set(j, c.P[m][j]);
    }
    for (int i = 0; i <= k; ++i) pm = delta_z_impl(pm, muh, u);
    res.push_back(pm.residue());
  }
  JetOp o = JetOp::zero(n, c.jc, c.pmax - 1);
  for (int m = 0; m <= c.pmax - 1; ++m)
    for (int a = 0; a < n; ++a) {
      JetPoly v = res[m].at(c.m.e_index, a);
      for (int j = 0; m + j <= c.pmax - 1; ++j) {
        o.c[m + j][a] -= v;
        if (m + j < c.pmax - 1) v = c.dtot(v);
      }
    }
  return o;
}

JetPoly virasoro_apply(const JetContext& c, int k, const JetPoly& f) {
  return virasoro_op(c, k).apply(f);
}

CheckResult check_virasoro_relations(const JetContext& c, int kmax) {
  CheckResult r{"Virasoro relations", false, ""};
  int mtop = c.pmax - 2;
  std::vector<JetOp> lk;
  for (int k = -1; k <= 2 * kmax; ++k) lk.push_back(virasoro_op(c, k));
  auto op = [&](int k) -> const JetOp& { return lk[k + 1]; };
  for (int j = -1; j <= kmax; ++j)
    for (int k = j + 1; k <= kmax; ++k) {
      if (j + k < -1) continue;
      JetOp comm = JetOp::commutator(op(j), op(k));
      if (!ops_agree(comm, op(j + k).scaled(j - k), mtop)) {
        r.detail = "[L_j, L_k] != (j-k) L_{j+k} at (j,k) = (" + std::to_string(j) + "," +
                   std::to_string(k) + ")";
        return r;
      }
    }
  r.pass = true;
  r.detail = "operator-coefficient level, indices -1.." + std::to_string(kmax);
  return r;
}

CheckResult check_lk_on_x(const JetContext& c, int kmax) {
  CheckResult r{"L_k on the frame matrix", false, ""};
  int n = c.m.n;
  auto u = lifted_u(c);
  auto mud = mu_shift_mat(c, Rational(0));
  std::vector<Mat<JetPoly>> up{Mat<JetPoly>::identity(n, c.jzero())};
  for (int k = 1; k <= kmax; ++k) up.push_back(up.back() * u);
  for (int k = 0; k <= kmax; ++k) {
    JetOp lk = virasoro_op(c, k);
    Mat<JetPoly> lhs = c.X.map([&](const JetPoly& f) { return lk.apply(f); });
    Mat<JetPoly> rhs(n, c.jzero());
    for (int l = 0; l <= k; ++l) {
      Mat<JetPoly> b = up[l] * mud * up[k - l];
      rhs += c.X * b - b * c.X;
      for (int a = 0; a < n; ++a) rhs -= (c.A[a] * c.X).scaled_by(b.at(c.m.e_index, a));
    }
    rhs -= (c.X * up[k]).scaled(Rational(3 * (k + 1), 2));
    if (!(lhs - rhs).zero_to_acc()) {
      r.detail = "matrix identity fails at k = " + std::to_string(k);
      return r;
    }
  }
  r.pass = true;
  r.detail = "k through " + std::to_string(kmax);
  return r;
}

ConstraintResidual lk_logdet_check(const JetContext& c, int k) {
  ConstraintResidual r{"L_k log det X", 0, k, c.jzero(), false, ""};
  JetOp lk = virasoro_op(c, k);
  JetPoly lhs = lk.apply(c.logdetX);
  auto up = u_powers(c.m, c.t, std::max(k, 0));
  auto mu32 = mu_base_mat(c.m, Rational(3, 2));
  auto omega = socle_form(c.t);
  MultiSeries rhs = c.m.zero();
  for (int l = 0; l <= k; ++l) {
    auto b = up[l] * mu32 * up[k - l];
    for (int a = 0; a < c.m.n; ++a) rhs -= b.at(c.m.e_index, a) * omega[a];
  }
  r.residual = lhs - c.lift(rhs);
  r.pass = r.residual.zero_to_acc();
  r.detail = r.pass ? "socle contraction matches" : "mismatch";
  return r;
}

MultiSeries h_k(const FrobeniusModel& m, const ProductTensor& t, int k) {
  if (k < 0) return m.zero();
  auto up = u_powers(m, t, k);
  auto mminus = mu_base_mat(m, Rational(-1, 2));
  auto mplus = mu_base_mat(m, Rational(1, 2));
  MultiSeries s = m.zero();
  for (int l = 0; l <= k; ++l) s += (mminus * up[l] * mplus * up[k - l]).trace();
  return s.scaled(Rational(-1, 4));
}

CheckResult liu_hk_identity(const JetContext& c, int jmax, int kmax) {
  CheckResult r{"transfer trace identity", false, ""};
  std::vector<JetOp> lk;
  for (int k = -1; k <= jmax + kmax; ++k) lk.push_back(virasoro_op(c, k));
  std::vector<JetPoly> h;
  for (int k = -1; k <= jmax + kmax; ++k) h.push_back(c.lift(h_k(c.m, c.t, k)));
  auto op = [&](int k) -> const JetOp& { return lk[k + 1]; };
  auto hh = [&](int k) -> const JetPoly& { return h[k + 1]; };
  for (int j = -1; j <= jmax; ++j)
    for (int k = j; k <= kmax; ++k) {
      if (j + k < -1) continue;
      JetPoly res = op(j).apply(hh(k)) - op(k).apply(hh(j)) - hh(j + k).scaled(j - k);
      if (!res.zero_to_acc()) {
        r.detail = "fails at (j,k) = (" + std::to_string(j) + "," + std::to_string(k) + ")";
        return r;
      }
    }
  r.pass = true;
  r.detail = "indices -1..(" + std::to_string(jmax) + "," + std::to_string(kmax) + ")";
  return r;
}

CheckResult check_delta_self_adjoint(const FrobeniusModel& m, const ProductTensor& t, int nz) {
  CheckResult r{"conformal operator self-adjoint", false, ""};
  auto u = u_matrix(m, t);
  auto mu = m.mu();
  // twisted pairing on covector-valued Laurent series: the residue picks the
  // total z-degree -2 slice of eta(x(-z), y(z)); this is the alignment under
  // which d/dz has adjoint d/dz + z^{-1} and the conformal operator is fixed
  auto pair = [&](const Laurent<VecT<MultiSeries>>& x, const Laurent<VecT<MultiSeries>>& y) {
    MultiSeries s = m.zero();
    for (int j = x.zmin(); j <= x.zmax(); ++j) {
      const auto& xj = x.at(j);
      const auto& yj = y.at(-2 - j);
      if (xj.is_zero() || yj.is_zero()) continue;
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b)
          if (m.eta_inv[a][b] != 0) {
            auto term = (xj[a] * yj[b]).scaled(m.eta_inv[a][b]);
            s += (j % 2 == 0) ? term : -term;
          }
    }
    return s;
  };
  std::mt19937_64 rng(20240817u);
  std::uniform_int_distribution<int> coeff(-6, 6);
  std::uniform_int_distribution<int> zpow(-nz, nz);
  std::uniform_int_distribution<int> uvar(0, m.n - 1);
  auto sample = [&] {
    Laurent<VecT<MultiSeries>> x(VecT<MultiSeries>(m.n, m.zero()));
    for (int i = 0; i < 6; ++i) {
      int j = zpow(rng), a = uvar(rng);
      VecT<MultiSeries> v(m.n, m.zero());
      v[a] = MultiSeries::constant(m.n, m.caps, coeff(rng)) +
             MultiSeries::var(m.n, m.caps, uvar(rng)).scaled(coeff(rng));
      x.add_at(j, v);
    }
    return x;
  };
  for (int trial = 0; trial < 8; ++trial) {
    auto x = sample(), y = sample();
    auto res = pair(delta_z_vec(x, mu, u), y) - pair(x, delta_z_vec(y, mu, u));
    if (!res.zero_to_acc()) {
      r.detail = "pairing residual nonzero on trial " + std::to_string(trial);
      return r;
    }
  }
  r.pass = true;
  r.detail = "8 sampled Laurent pairs, z-range " + std::to_string(nz);
  return r;
}

ConstraintResidual genus0_virasoro_check(const JetContext& c, int k) {
  ConstraintResidual r{"genus-0 constraint pairing", 0, k, c.jzero(), false, ""};
  int n = c.m.n;
  int smax = int(c.s.size()) - 1;
  auto u = lifted_u(c);
  auto mu = c.m.mu();
  Laurent<VecT<JetPoly>> s(VecT<JetPoly>(n, c.jzero()));
  Laurent<VecT<JetPoly>> sneg(VecT<JetPoly>(n, c.jzero()));
  for (int kk = 1; kk <= smax; ++kk) {
    s.set(-kk - 1, c.s[kk]);
    sneg.set(-kk - 1, (kk % 2 == 0) ? c.s[kk] : -c.s[kk]);
  }
  auto h = sneg;
  for (int i = 0; i <= k; ++i) h = delta_z_vec(h, mu, u);
  h = h.shifted(1);
  // eta(s(z), z delta^{k+1} s(-z)) coefficients at z^j, j >= -2
  for (int j = -2; j <= 0; ++j) {
    JetPoly cj = c.jzero();
    for (int mzz = s.zmin(); mzz <= s.zmax(); ++mzz) {
      const auto& sm = s.at(mzz);
      const auto& hl = h.at(j - mzz);
      if (sm.is_zero() || hl.is_zero()) continue;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (c.m.eta[a][b] != 0) cj += (sm[a] * hl[b]).scaled(c.m.eta[a][b]);
    }
    if (!cj.zero_to_acc()) {
      r.residual = cj;
      r.detail = "coefficient at z^" + std::to_string(j) + " nonzero";
      return r;
    }
  }
  r.pass = true;
  std::ostringstream os;
  os << "pairing is O(z^-3): coefficients z^-2..z^0 vanish (stored orders s_1..s_" << smax
     << ", contributing range empty)";
  r.detail = os.str();
  return r;
}

namespace {

// sigma(z) applied to f: component a at z^m is sigma_{m,a} f
Laurent<VecT<JetPoly>> sigma_z_apply(const JetContext& c, const JetPoly& f) {
  Laurent<VecT<JetPoly>> out(VecT<JetPoly>(c.m.n, c.jzero()));
  for (int m = 0; m <= c.pmax - 1; ++m) {
    VecT<JetPoly> v(c.m.n, c.jzero());
    for (int a = 0; a < c.m.n; ++a) v[a] = sigma_apply(c, m, a, f);
    if (!v.is_zero()) out.add_at(m, v);
  }
  return out;
}

Laurent<VecT<JetPoly>> z_delta_pow(const JetContext& c, Laurent<VecT<JetPoly>> g, int k) {
  auto u = lifted_u(c);
  auto mu = c.m.mu();
  for (int i = 0; i <= k; ++i) g = delta_z_vec(g, mu, u);
  return g.shifted(1);
}

}  // namespace

JetPoly delta_k_apply(const JetContext& c, int k, const JetPoly& f) {
  auto h = z_delta_pow(c, sigma_z_apply(c, f), k);
  JetPoly out = c.jzero();
  for (int m = 0; m <= c.pmax - 1; ++m) {
    const auto& hl = h.at(-1 - m);
    if (hl.is_zero()) continue;
    for (int a = 0; a < c.m.n; ++a)
      for (int b = 0; b < c.m.n; ++b) {
        if (c.m.eta_inv[a][b] == 0 || hl[b].is_zero()) continue;
        auto term = sigma_apply(c, m, a, hl[b]).scaled(c.m.eta_inv[a][b]);
        out += (m % 2 == 0) ? term : -term;
      }
  }
  return out.scaled(Rational(1, 2));
}

JetPoly delta_k_bilinear(const JetContext& c, int k, const JetPoly& f, const JetPoly& g) {
  auto sf = sigma_z_apply(c, f);
  auto h = z_delta_pow(c, sigma_z_apply(c, g), k);
  JetPoly out = c.jzero();
  for (int m = sf.zmin(); m <= sf.zmax(); ++m) {
    const auto& sm = sf.at(m);
    const auto& hl = h.at(-1 - m);
    if (sm.is_zero() || hl.is_zero()) continue;
    for (int a = 0; a < c.m.n; ++a)
      for (int b = 0; b < c.m.n; ++b) {
        if (c.m.eta_inv[a][b] == 0) continue;
        auto term = (sm[a] * hl[b]).scaled(c.m.eta_inv[a][b]);
        out += (m % 2 == 0) ? term : -term;
      }
  }
  return out.scaled(Rational(1, 2));
}

MultiSeries v1_rhs(const FrobeniusModel& m, const ProductTensor& t, int k) {
  auto up = u_powers(m, t, std::max(k, 0));
  auto mud = mu_base_mat(m, Rational(0));
  auto omega = socle_form(t);
  MultiSeries rhs = m.zero();
  for (int l = 0; l <= k; ++l) {
    auto b = up[l] * mud * up[k - l];
    rhs += (mud * b).trace().scaled(Rational(1, 4));
    for (int a = 0; a < m.n; ++a)
      rhs += (b.at(m.e_index, a) * omega[a]).scaled(Rational(1, 24));
  }
  return rhs;
}

MultiSeries lk_small(const FrobeniusModel& m, const ProductTensor& t, int k,
                     const MultiSeries& f) {
  auto ek = euler_power(m, t, k + 1);
  MultiSeries out = m.zero();
  for (int a = 0; a < m.n; ++a) out -= ek[a] * f.partial_u(a);
  return out;
}

ConstraintResidual assemble_constraint(const JetContext& c, int g, int k,
                                       const std::vector<JetPoly>& potentials) {
  if (int(potentials.size()) < g)
    throw FrobjetError("MissingPotential", "need potentials for all genera <= g");
  ConstraintResidual r{"genus constraint", g, k, c.jzero(), false, ""};
  JetOp lk = virasoro_op(c, k);
  if (g == 1) {
    // reduced form: L_k G = sum_l (1/4 Tr(mu U^l mu U^{k-l})
    //                              + 1/24 <e, U^l mu U^{k-l} omega>)
    const JetPoly& gpot = potentials[0];
    r.residual = lk.apply(gpot) - c.lift(v1_rhs(c.m, c.t, k));
    r.pass = r.residual.zero_to_acc();
    // the unreduced form L_k F_1 = -H_k must give the same residual
    JetPoly f1 = gpot + c.logdetX.scaled(Rational(1, 24));
    JetPoly res_f1 = lk.apply(f1) + c.lift(h_k(c.m, c.t, k));
    r.detail = (res_f1 - r.residual).zero_to_acc() ? "reduced and full forms agree"
                                                   : "forms disagree";
    return r;
  }
  r.residual = lk.apply(potentials[g - 1]) + delta_k_apply(c, k, potentials[g - 2]);
  for (int i = 1; i <= g - 1; ++i)
    r.residual += delta_k_bilinear(c, k, potentials[i - 1], potentials[g - 1 - i]);
  r.pass = r.residual.zero_to_acc();
  r.detail = r.pass ? "residual vanishes to caps" : "residual nonzero";
  return r;
}

}  // namespace frobjet
