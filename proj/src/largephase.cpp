#include "frobjet/largephase.hpp"

#include <string>
#include <vector>

namespace frobjet {

namespace {

// q-series value at the jet-space basepoint (u = w = 0, q kept)
MultiSeries basepoint_qseries(const JetPoly& f) {
  if (!f.exact_u() && f.acc_u() < 0)
    throw cap_exhausted("large-phase Taylor coefficient lost u-trust");
  if (!f.exact_w() && f.acc_w() < 0)
    throw cap_exhausted("large-phase Taylor coefficient lost w-trust");
  return f.base_part().u_constant_part().with_acc(kAccExact);
}

JetPoly embed_q(int n, JetCaps tcaps, const MultiSeries& s) {
  return JetPoly::from_base(n, tcaps, s.truncated(tcaps.base()));
}

struct Taylor {
  const JetContext& c;
  int kt;
  JetCaps tcaps;
  std::vector<std::vector<JetOp>> ops;  // ops[k][a] = dee_{k,a}
  std::vector<JetPoly> out;

  Taylor(const JetContext& cc, int kt_, JetCaps tc) : c(cc), kt(kt_), tcaps(tc) {
    ops.resize(kt + 1);
    for (int k = 0; k <= kt; ++k)
      for (int a = 0; a < c.m.n; ++a) ops[k].push_back(dee_op(c, k, a));
  }

  JetPoly tvar(int k, int a) const {
    if (k == 0)
      return JetPoly::from_base(c.m.n, tcaps, MultiSeries::var(c.m.n, tcaps.base(), a));
    return JetPoly::wvar(c.m.n, tcaps, a, k);
  }

  void emit(const std::vector<JetPoly>& d, const JetPoly& tmono, const Rational& inv_fact) {
    for (std::size_t i = 0; i < d.size(); ++i)
      out[i] += (embed_q(c.m.n, tcaps, basepoint_qseries(d[i])) * tmono).scaled(inv_fact);
  }

  JetPoly differentiated(const JetOp& op, const JetPoly& f) const {
    if (f.jet_order() > op.lmax())
      throw FrobjetError("CapTooSmall",
                         "jet order " + std::to_string(c.jet_order) +
                             " too small for the requested t-caps");
    return op.apply(f);
  }

  // enumerate exponents of variable vi = k*n + a, accumulating the derivative
  void rec(int vi, int rem_du, int rem_w, std::vector<JetPoly> d, const JetPoly& tmono,
           const Rational& inv_fact) {
    int n = c.m.n;
    if (vi == (kt + 1) * n) {
      emit(d, tmono, inv_fact);
      return;
    }
    int k = vi / n, a = vi % n;
    int emax = (k == 0) ? rem_du : rem_w / k;
    JetPoly tm = tmono;
    Rational invf = inv_fact;
    for (int e = 0; e <= emax; ++e) {
      rec(vi + 1, rem_du - (k == 0 ? e : 0), rem_w - (k == 0 ? 0 : k * e), d, tm, invf);
      if (e == emax) break;
      for (auto& f : d) f = differentiated(ops[k][a], f);
      tm = tm * tvar(k, a);
      invf /= (e + 1);
    }
  }

  std::vector<JetPoly> run(const std::vector<JetPoly>& fs) {
    out.assign(fs.size(), JetPoly::zero(c.m.n, tcaps));
    rec(0, tcaps.du, tcaps.w, fs, JetPoly::constant(c.m.n, tcaps, 1), Rational(1));
    for (auto& f : out)
      f = f.with_acc(std::min(f.acc_u(), tcaps.du), std::min(f.acc_w(), tcaps.w));
    return out;
  }
};

// substitute the pulled-back flat coordinates into a function on the manifold
JetPoly compose(const MultiSeries& f, const std::vector<JetPoly>& u_of_t, int n,
                JetCaps tcaps) {
  JetPoly r = JetPoly::zero(n, tcaps);
  int reach = tcaps.du + tcaps.w;  // each u-factor has t-order >= 1
  std::vector<std::vector<JetPoly>> pw(n);
  for (int a = 0; a < n; ++a) pw[a].push_back(JetPoly::constant(n, tcaps, 1));
  auto power = [&](int a, int e) -> const JetPoly& {
    while (int(pw[a].size()) <= e) pw[a].push_back(pw[a].back() * u_of_t[a]);
    return pw[a][e];
  };
  for (auto& t : f.terms()) {
    int ud = mono::udeg(t.first);
    if (ud > reach) continue;
    std::array<int, kMaxDim> ue{};
    JetPoly term = JetPoly::from_base(
        n, tcaps, MultiSeries::monomial(n, tcaps.base(), ue, mono::qdeg(t.first), t.second));
    for (int a = 0; a < n; ++a)
      if (int e = mono::uexp(t.first, a); e > 0) term = term * power(a, e);
    r += term;
  }
  int au = tcaps.du, aw = tcaps.w;
  if (!f.exact()) au = std::min(au, f.acc() - tcaps.w);
  return r.with_acc(std::min(r.acc_u(), au), std::min(r.acc_w(), aw));
}

}  // namespace

JetPoly LargePhase0::tvar(int k, int a) const {
  if (k == 0) return JetPoly::from_base(n, tcaps, MultiSeries::var(n, tcaps.base(), a));
  return JetPoly::wvar(n, tcaps, a, k);
}

JetPoly LargePhase0::tshift(int k, int a) const {
  JetPoly v = tvar(k, a);
  if (k == 1 && a == e_index) v -= JetPoly::constant(n, tcaps, 1);
  return v;
}

LargePhase0 large_phase_genus0(const JetContext& c, const TwoPoint& tp, int kt, JetCaps tcaps) {
  int n = c.m.n;
  if (kt < 1) throw FrobjetError("BadArgument", "the dilaton level t_1 must be retained");
  if (kt > kMaxJetOrder) throw FrobjetError("BadArgument", "descendant level beyond jet order 8");
  if (2 * kt > tp.kmax) throw FrobjetError("CapTooSmall", "two-point range below 2*kt");

  LargePhase0 lp;
  lp.n = n;
  lp.e_index = c.m.e_index;
  lp.kt = kt;
  lp.tcaps = tcaps;

  Taylor ty(c, kt, tcaps);
  std::vector<JetPoly> coords;
  for (int a = 0; a < n; ++a) coords.push_back(c.lift(MultiSeries::var(n, c.m.caps, a)));
  lp.u_of_t = ty.run(coords);

  lp.omega_t.assign(kt + 1, std::vector<Mat<JetPoly>>(kt + 1, Mat<JetPoly>(n, lp.tzero())));
  for (int l = 0; l <= kt; ++l)
    for (int m = 0; m <= kt; ++m)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          lp.omega_t[l][m].at(p, q) = compose(tp.at(l, m).at(p, q), lp.u_of_t, n, tcaps);

  JetPoly f0 = lp.tzero();
  for (int l = 0; l <= kt; ++l)
    for (int m = 0; m <= kt; ++m)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          JetPoly low = lp.tzero();  // Omega_{l,m|p,q} = eta_{qc} Omega_{l,m|p}^c
          for (int cc = 0; cc < n; ++cc)
            if (c.m.eta[cc][q] != 0) low += lp.omega_t[l][m].at(p, cc).scaled(c.m.eta[cc][q]);
          if (low.is_zero()) continue;
          JetPoly term = lp.tshift(l, p) * lp.tshift(m, q) * low;
          f0 += (m % 2 == 0) ? term : -term;
        }
  lp.f0 = f0.scaled(Rational(1, 2));
  return lp;
}

JetPoly t_dilaton(const LargePhase0& lp, const JetPoly& f) {
  JetPoly r = f.partial_jet(lp.e_index, 1);
  for (int a = 0; a < lp.n; ++a) r -= lp.tvar(0, a) * f.partial_base(a);
  for (int k = 1; k <= lp.kt; ++k)
    for (int a = 0; a < lp.n; ++a) r -= lp.tvar(k, a) * f.partial_jet(a, k);
  return r;
}

CheckResult check_f0_dilaton(const LargePhase0& lp) {
  JetPoly res = t_dilaton(lp, lp.f0) + lp.f0.scaled(2);
  CheckResult r;
  r.name = "genus-0 dilaton equation";
  r.pass = res.zero_to_acc();
  r.detail = "t-caps du=" + std::to_string(lp.tcaps.du) + " w=" + std::to_string(lp.tcaps.w) +
             " kt=" + std::to_string(lp.kt);
  return r;
}

CheckResult check_f0_second_derivatives(const LargePhase0& lp, const RMat& eta) {
  CheckResult r;
  r.name = "second derivatives against the two-point function";
  r.pass = true;
  for (int j = 0; j <= lp.kt && r.pass; ++j)
    for (int k = 0; k <= lp.kt && r.pass; ++k)
      for (int a = 0; a < lp.n && r.pass; ++a)
        for (int b = 0; b < lp.n && r.pass; ++b) {
          JetPoly dj = (j == 0) ? lp.f0.partial_base(a) : lp.f0.partial_jet(a, j);
          JetPoly dd = (k == 0) ? dj.partial_base(b) : dj.partial_jet(b, k);
          JetPoly rhs = lp.tzero();
          for (int cc = 0; cc < lp.n; ++cc)
            if (eta[cc][b] != 0) rhs += lp.omega_t[j][k].at(a, cc).scaled(eta[cc][b]);
          if (k % 2 == 1) rhs = -rhs;
          if (!(dd - rhs).zero_to_acc()) {
            r.pass = false;
            r.detail = "mismatch at (j,a,k,b) = (" + std::to_string(j) + "," +
                       std::to_string(a) + "," + std::to_string(k) + "," + std::to_string(b) +
                       ")";
          }
        }
  if (r.pass)
    r.detail = "all (j,a),(k,b) with j,k <= " + std::to_string(lp.kt);
  return r;
}

}  // namespace frobjet
