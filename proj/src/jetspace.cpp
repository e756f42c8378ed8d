#include "frobjet/jetspace.hpp"

#include <random>
#include <sstream>

namespace frobjet {

JetPoly jet_log1p(const JetPoly& x) {
  if (!x.is_zero() && x.ord_w() < 1)
    throw FrobjetError("JetLogDomain", "jet log1p needs positive weight");
  JetPoly acc = JetPoly::zero(x.dim(), x.caps());
  JetPoly pw = x;
  for (int j = 1; j <= x.caps().w && !pw.is_zero(); ++j) {
    acc += pw.scaled(Rational((j % 2 == 1) ? 1 : -1, j));
    pw *= x;
  }
  // the log series never terminates, so the result is only trusted through
  // the weight cap even when the power tail truncates to zero
  if (!x.is_zero()) acc = acc.with_acc(acc.acc_u(), std::min(acc.acc_w(), x.caps().w));
  return acc;
}

// ---- JetOp ----

JetOp JetOp::zero(int n, JetCaps caps, int lmax) {
  JetOp o;
  o.n = n;
  o.caps = caps;
  o.c.assign(lmax + 1, std::vector<JetPoly>(n, JetPoly::zero(n, caps)));
  return o;
}

JetPoly JetOp::apply(const JetPoly& f) const {
  JetPoly r = JetPoly::zero(n, caps);
  for (int l = 0; l <= lmax(); ++l)
    for (int b = 0; b < n; ++b) {
      if (c[l][b].is_zero()) continue;
      JetPoly df = (l == 0) ? f.partial_base(b) : f.partial_jet(b, l);
      if (df.is_zero()) continue;
      r += c[l][b] * df;
    }
  return r;
}

JetOp& JetOp::add_scaled(const JetOp& o, const JetPoly& factor) {
  if (o.lmax() > lmax()) c.resize(o.c.size(), std::vector<JetPoly>(n, JetPoly::zero(n, caps)));
  for (int l = 0; l <= o.lmax(); ++l)
    for (int b = 0; b < n; ++b)
      if (!o.c[l][b].is_zero()) c[l][b] += factor * o.c[l][b];
  return *this;
}

JetOp operator+(JetOp a, const JetOp& b) {
  return a.add_scaled(b, JetPoly::constant(a.n, a.caps, 1));
}
JetOp operator-(JetOp a, const JetOp& b) {
  return a.add_scaled(b, JetPoly::constant(a.n, a.caps, -1));
}

JetOp JetOp::scaled(const Rational& r) const {
  JetOp o = *this;
  for (auto& row : o.c)
    for (auto& p : row) p = p.scaled(r);
  return o;
}

JetOp JetOp::commutator(const JetOp& x, const JetOp& y) {
  // [X, Y] = sum_{m,d} (X(Y_c[m][d]) - Y(X_c[m][d])) d_{m,d}; correct through
  // coefficient level min(x.lmax, y.lmax) - 1 when the tables are truncations
  JetOp r = JetOp::zero(x.n, x.caps, std::max(x.lmax(), y.lmax()));
  for (int m = 0; m <= r.lmax(); ++m)
    for (int d = 0; d < x.n; ++d) {
      if (m <= y.lmax() && !y.c[m][d].is_zero()) r.c[m][d] += x.apply(y.c[m][d]);
      if (m <= x.lmax() && !x.c[m][d].is_zero()) r.c[m][d] -= y.apply(x.c[m][d]);
    }
  return r;
}

bool JetOp::zero_to_acc() const {
  for (auto& row : c)
    for (auto& p : row)
      if (!p.zero_to_acc()) return false;
  return true;
}

bool ops_agree(const JetOp& a, const JetOp& b, int mmax) {
  JetPoly z = JetPoly::zero(a.n, a.caps);
  for (int m = 0; m <= mmax; ++m)
    for (int d = 0; d < a.n; ++d) {
      JetPoly diff = (m <= a.lmax() ? a.c[m][d] : z) - (m <= b.lmax() ? b.c[m][d] : z);
      if (!diff.zero_to_acc()) return false;
    }
  return true;
}

// ---- context construction ----

Mat<JetPoly> JetContext::lift_mat(const Mat<MultiSeries>& x) const {
  Mat<JetPoly> r(x.n(), jzero());
  for (int i = 0; i < x.n(); ++i)
    for (int j = 0; j < x.n(); ++j) r.at(i, j) = lift(x.at(i, j));
  return r;
}

Mat<JetPoly> JetContext::dtot(const Mat<JetPoly>& x) const {
  return x.map([&](const JetPoly& f) { return dtot(f); });
}

JetContext make_jet_context(const FrobeniusModel& m, const ProductTensor& t,
                            const FundamentalSolution& sol, int jet_order, int report_w,
                            int weight_cap) {
  if (weight_cap < 2 * jet_order + 2)
    throw FrobjetError("CapTooSmall", "jet ring weight cap below 2*order+2");
  if (jet_order + 2 > kMaxJetOrder)
    throw FrobjetError("JetOrderOverflow", "context order beyond the jet ring");
  JetContext c;
  c.m = m;
  c.t = t;
  c.sol = sol;
  c.jc = JetCaps{m.caps.du, m.caps.dq, weight_cap};
  c.jet_order = jet_order;
  c.report_w = report_w;
  c.pmax = jet_order + 1;

  for (int a = 0; a < m.n; ++a) c.A.push_back(c.lift_mat(t.A[a]));
  c.X = Mat<JetPoly>::identity(m.n, c.jzero());
  for (int a = 0; a < m.n; ++a)
    c.X += c.A[a].scaled_by(JetPoly::wvar(m.n, c.jc, a, 1));
  c.Xinv = c.X.inverse();
  c.detX = c.X.det();
  c.logdetX = jet_log1p(c.detX - JetPoly::constant(m.n, c.jc, 1));

  c.P.assign(c.pmax + 1, {});
  c.P[1] = {c.X};
  for (int n = 2; n <= c.pmax; ++n) {
    c.P[n].assign(n, Mat<JetPoly>(m.n, c.jzero()));
    for (int j = 0; j < n; ++j) {
      if (j < n - 1) c.P[n][j] += c.dtot(c.P[n - 1][j]);
      if (j >= 1) c.P[n][j] += c.X * c.P[n - 1][j - 1];
    }
  }

  for (int a = 0; a < m.n; ++a) c.Wt.push_back(c.X * c.A[a]);
  for (int j = 0; j <= sol.nz; ++j) c.thetaJ.push_back(c.lift_mat(sol.coef(j)));

  // raised s_k rows: s_1 X = -e_row, s_{k+1} = d(s_k) X^{-1}
  int smax = c.pmax + 1;
  c.s.assign(smax + 1, VecT<JetPoly>(m.n, c.jzero()));
  VecT<JetPoly> erow(m.n, c.jzero());
  erow[m.e_index] = JetPoly::constant(m.n, c.jc, -1);
  c.s[1] = row_mul(erow, c.Xinv);
  for (int k = 1; k < smax; ++k) {
    VecT<JetPoly> d(m.n, c.jzero());
    for (int a = 0; a < m.n; ++a) d[a] = c.dtot(c.s[k][a]);
    c.s[k + 1] = row_mul(d, c.Xinv);
  }
  return c;
}

// ---- frame operators ----

JetOp sigma_op(const JetContext& c, int k, int a) {
  JetOp o = JetOp::zero(c.m.n, c.jc, c.pmax - 1);
  for (int l = k; l <= c.pmax - 1; ++l)
    for (int b = 0; b < c.m.n; ++b) o.c[l][b] = c.P[l + 1][k].at(a, b);
  return o;
}

JetOp dee_op(const JetContext& c, int k, int a) {
  JetOp o = JetOp::zero(c.m.n, c.jc, c.pmax - 1);
  for (int j = 0; j <= k && j < int(c.thetaJ.size()); ++j)
    for (int b = 0; b < c.m.n; ++b) {
      if (c.thetaJ[j].at(a, b).is_zero()) continue;
      o.add_scaled(sigma_op(c, k - j, b), c.thetaJ[j].at(a, b));
    }
  return o;
}

JetOp dtot_op(const JetContext& c) {
  JetOp o = JetOp::zero(c.m.n, c.jc, kMaxJetOrder - 1);
  for (int a = 0; a < c.m.n; ++a) {
    o.c[0][a] = JetPoly::wvar(c.m.n, c.jc, a, 1) +
                JetPoly::constant(c.m.n, c.jc, a == c.m.e_index ? 1 : 0);
    for (int l = 1; l < kMaxJetOrder; ++l) o.c[l][a] = JetPoly::wvar(c.m.n, c.jc, a, l + 1);
  }
  return o;
}

JetOp grading_op(const JetContext& c) {
  JetOp o = JetOp::zero(c.m.n, c.jc, kMaxJetOrder);
  for (int a = 0; a < c.m.n; ++a)
    for (int l = 1; l <= kMaxJetOrder; ++l) {
      o.c[l][a] = JetPoly::wvar(c.m.n, c.jc, a, l).scaled(l);
      if (l == 1 && a == c.m.e_index) o.c[l][a] += JetPoly::constant(c.m.n, c.jc, 1);
    }
  return o;
}

JetPoly sigma_apply(const JetContext& c, int k, int a, const JetPoly& f) {
  return sigma_op(c, k, a).apply(f);
}

JetPoly dee_apply(const JetContext& c, int k, int a, const JetPoly& f) {
  return dee_op(c, k, a).apply(f);
}

int filtration_degree(const JetContext& c, const JetPoly& f) {
  for (int k = c.pmax - 1; k >= 1; --k)
    for (int a = 0; a < c.m.n; ++a)
      if (!sigma_apply(c, k, a, f).is_zero()) return k;
  return 0;
}

std::pair<JetPoly, JetPoly> q_e_intrinsic(const JetContext& c, const JetPoly& f) {
  JetPoly q = c.jzero(), e = c.jzero();
  for (int k = 0; k <= c.pmax - 1; ++k)
    for (int a = 0; a < c.m.n; ++a) {
      JetPoly sf = sigma_apply(c, k, a, f);
      if (sf.is_zero()) continue;
      if (k >= 1) q -= c.s[k][a] * sf;
      e -= c.s[k + 1][a] * sf;
    }
  return {q, e};
}

// ---- identity checks ----

CheckResult check_x_identities(const JetContext& c) {
  CheckResult r{"jet frame matrix", false, ""};
  // dM = X
  if (!(c.dtot(c.lift_mat(c.t.M)) - c.X).zero_to_acc()) {
    r.detail = "total derivative of the primitive Hessian differs from X";
    return r;
  }
  // dU = X + [mu, X]
  auto mu = c.m.mu();
  Mat<JetPoly> mux(c.m.n, c.jzero());
  for (int a = 0; a < c.m.n; ++a)
    for (int b = 0; b < c.m.n; ++b) mux.at(a, b) = c.X.at(a, b).scaled(mu[a] - mu[b]);
  if (!(c.dtot(c.lift_mat(u_matrix(c.m, c.t))) - c.X - mux).zero_to_acc()) {
    r.detail = "total derivative of U differs from X + [mu, X]";
    return r;
  }
  // grading of log det X equals Tr(X^{-1} grading(X))
  auto grade = [&](const JetPoly& f) { return f.dilaton_apply(c.m.e_index); };
  JetPoly lhs = grade(c.logdetX);
  JetPoly rhs = (c.Xinv * c.X.map(grade)).trace();
  if (!(lhs - rhs).zero_to_acc()) {
    r.detail = "grading of log det X vs trace formula";
    return r;
  }
  r.pass = true;
  std::ostringstream os;
  os << "caps du=" << c.jc.du << " dq=" << c.jc.dq << " w=" << c.jc.w;
  r.detail = os.str();
  return r;
}

CheckResult sigma_commutators(const JetContext& c, int kmax) {
  CheckResult r{"sigma commutators", false, ""};
  int mtop = c.pmax - 2;  // trusted coefficient levels of a commutator table
  kmax = std::min(kmax, c.pmax - 1);
  for (int a = 0; a < c.m.n; ++a)
    for (int b = 0; b < c.m.n; ++b) {
      JetOp s0a = sigma_op(c, 0, a);
      for (int k = 1; k <= kmax; ++k) {
        JetOp lhs = JetOp::commutator(s0a, sigma_op(c, k, b));
        JetOp rhs = JetOp::zero(c.m.n, c.jc, c.pmax - 1);
        for (int d = 0; d < c.m.n; ++d)
          rhs.add_scaled(sigma_op(c, k - 1, d), c.Wt[a].at(b, d).scaled(-1));
        if (!ops_agree(lhs, rhs, mtop)) {
          r.detail = "[sigma_0, sigma_k] term (a=" + std::to_string(a) +
                     ", b=" + std::to_string(b) + ", k=" + std::to_string(k) + ")";
          return r;
        }
      }
      for (int j = 1; j <= kmax; ++j)
        for (int k = j; k <= kmax; ++k) {
          JetOp comm = JetOp::commutator(sigma_op(c, j, a), sigma_op(c, k, b));
          if (!ops_agree(comm, JetOp::zero(c.m.n, c.jc, 0), mtop)) {
            r.detail = "[sigma_j, sigma_k] != 0 (j=" + std::to_string(j) +
                       ", k=" + std::to_string(k) + ")";
            return r;
          }
        }
    }
  // W-tensor symmetric in its lower indices
  for (int a = 0; a < c.m.n; ++a)
    for (int b = 0; b < c.m.n; ++b)
      for (int d = 0; d < c.m.n; ++d)
        if (!(c.Wt[a].at(b, d) - c.Wt[b].at(a, d)).zero_to_acc()) {
          r.detail = "W tensor not symmetric";
          return r;
        }
  r.pass = true;
  r.detail = "operator-coefficient level through k=" + std::to_string(kmax);
  return r;
}

CheckResult dee_commutators(const JetContext& c, int kmax) {
  CheckResult r{"dee commutators", false, ""};
  int mtop = c.pmax - 2;
  kmax = std::min(kmax, c.pmax - 1);
  JetOp dop = dtot_op(c);
  std::vector<std::vector<JetOp>> dee(kmax + 1);
  for (int k = 0; k <= kmax; ++k)
    for (int a = 0; a < c.m.n; ++a) dee[k].push_back(dee_op(c, k, a));
  // the flat frame fields are evolutionary: [d, dee_{k,a}] = 0
  for (int k = 0; k <= kmax; ++k)
    for (int a = 0; a < c.m.n; ++a) {
      JetOp comm = JetOp::commutator(dop, dee[k][a]);
      if (!ops_agree(comm, JetOp::zero(c.m.n, c.jc, 0), mtop)) {
        r.detail = "[d, dee_{k,a}] != 0 (k=" + std::to_string(k) + ", a=" + std::to_string(a) + ")";
        return r;
      }
    }
  // and they commute among themselves
  for (int j = 0; j <= kmax; ++j)
    for (int k = j; k <= kmax; ++k)
      for (int a = 0; a < c.m.n; ++a)
        for (int b = (j == k ? a : 0); b < c.m.n; ++b) {
          JetOp comm = JetOp::commutator(dee[j][a], dee[k][b]);
          if (!ops_agree(comm, JetOp::zero(c.m.n, c.jc, 0), mtop)) {
            r.detail = "[dee_j, dee_k] != 0 (j=" + std::to_string(j) +
                       ", k=" + std::to_string(k) + ")";
            return r;
          }
        }
  r.pass = true;
  r.detail = "operator-coefficient level through k=" + std::to_string(kmax);
  return r;
}

CheckResult check_gg_recursion(const JetContext& c) {
  CheckResult r{"s-series recursion", false, ""};
  int n = c.m.n;
  // lowered covector components (s_k)_a = eta_{ab} s_k^b
  auto lowered = [&](int k) {
    VecT<JetPoly> v(n, c.jzero());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (c.m.eta[a][b] != 0) v[a] += c.s[k][b].scaled(c.m.eta[a][b]);
    return v;
  };
  // X* s_1 = -e_flat, componentwise (X* s)_a = eta_{ac} X_d^c s^d
  auto xstar = [&](int k) {
    VecT<JetPoly> v(n, c.jzero());
    for (int a = 0; a < n; ++a)
      for (int cc = 0; cc < n; ++cc) {
        if (c.m.eta[a][cc] == 0) continue;
        for (int d = 0; d < n; ++d) v[a] += (c.X.at(d, cc) * c.s[k][d]).scaled(c.m.eta[a][cc]);
      }
    return v;
  };
  VecT<JetPoly> lhs = xstar(1);
  for (int a = 0; a < n; ++a) {
    JetPoly want = JetPoly::constant(n, c.jc, -c.m.eta[a][c.m.e_index]);
    if (!(lhs[a] - want).zero_to_acc()) {
      r.detail = "X* s_1 != -e_flat at component " + std::to_string(a);
      return r;
    }
  }
  for (int k = 1; k + 1 < int(c.s.size()); ++k) {
    VecT<JetPoly> low = lowered(k);
    VecT<JetPoly> next = xstar(k + 1);
    for (int a = 0; a < n; ++a)
      if (!(c.dtot(low[a]) - next[a]).zero_to_acc()) {
        r.detail = "d s_k != X* s_{k+1} at k=" + std::to_string(k);
        return r;
      }
  }
  r.pass = true;
  r.detail = "k through " + std::to_string(int(c.s.size()) - 2);
  return r;
}

CheckResult check_grading_relations(const JetContext& c, int kmax) {
  CheckResult r{"grading and shift relations", false, ""};
  int mtop = c.pmax - 2;
  kmax = std::min(kmax, c.pmax - 1);
  JetOp q = grading_op(c);
  JetOp dop = dtot_op(c);
  for (int a = 0; a < c.m.n; ++a)
    for (int k = 0; k <= kmax; ++k) {
      JetOp sk = sigma_op(c, k, a);
      // [Q, sigma_k] = sigma_k
      if (!ops_agree(JetOp::commutator(q, sk), sk, mtop)) {
        r.detail = "[Q, sigma] != sigma (k=" + std::to_string(k) + ", a=" + std::to_string(a) + ")";
        return r;
      }
      // [d, sigma_k] = -X sigma_{k-1} for k >= 1, zero for k = 0
      JetOp comm = JetOp::commutator(dop, sk);
      JetOp want = JetOp::zero(c.m.n, c.jc, c.pmax - 1);
      if (k >= 1)
        for (int d = 0; d < c.m.n; ++d)
          want.add_scaled(sigma_op(c, k - 1, d), c.X.at(a, d).scaled(-1));
      if (!ops_agree(comm, want, mtop)) {
        r.detail = "[d, sigma_k] shift fails (k=" + std::to_string(k) +
                   ", a=" + std::to_string(a) + ")";
        return r;
      }
    }
  r.pass = true;
  r.detail = "operator-coefficient level through k=" + std::to_string(kmax);
  return r;
}

CheckResult check_dee_basepoint(const JetContext& c) {
  CheckResult r{"dee basepoint normalization", false, ""};
  int n = c.m.n;
  // jet coordinate d^n u^a as a polynomial
  auto jet_coord = [&](int a, int nn) {
    if (nn == 0) {
      auto u = MultiSeries::var(n, c.m.caps, a);
      return c.lift(u);
    }
    JetPoly p = JetPoly::wvar(n, c.jc, a, nn);
    if (nn == 1 && a == c.m.e_index) p += JetPoly::constant(n, c.jc, 1);
    return p;
  };
  for (int nn = 0; nn <= c.jet_order; ++nn)
    for (int a = 0; a < n; ++a) {
      JetPoly f = jet_coord(a, nn);
      for (int k = 0; k <= c.pmax - 1; ++k)
        for (int b = 0; b < n; ++b) {
          Rational got = dee_apply(c, k, b, f).at_basepoint();
          Rational want = (k == nn && a == b) ? 1 : 0;
          if (got != want) {
            r.detail = "dee_{k,b} d^n u^a at the basepoint (k=" + std::to_string(k) +
                       ", n=" + std::to_string(nn) + ")";
            return r;
          }
          // closed form (Theta_{k-n} X^{n+1})_b^a at the basepoint
          if (k >= nn && k - nn < int(c.thetaJ.size())) {
            Mat<JetPoly> xn = Mat<JetPoly>::identity(n, c.jzero());
            for (int i = 0; i <= nn; ++i) xn = xn * c.X;
            Rational closed = (c.thetaJ[k - nn] * xn).at(b, a).at_basepoint();
            if (closed != got) {
              r.detail = "closed form disagrees at the basepoint (k=" + std::to_string(k) +
                         ", n=" + std::to_string(nn) + ")";
              return r;
            }
          }
        }
    }
  r.pass = true;
  r.detail = "orders n <= " + std::to_string(c.jet_order);
  return r;
}

std::vector<JetPoly> jet_corpus(const JetContext& c, int wmax, int dumax, int dqmax) {
  int n = c.m.n;
  // all jet monomials of weight <= wmax
  std::vector<JMono> jets{JMono{}};
  // stay within the frame's jet order so the sigma tables are complete on it
  for (int k = 1; k <= std::min(wmax, c.jet_order); ++k)
    for (int a = 0; a < n; ++a) {
      std::vector<JMono> grown;
      for (auto& m : jets) {
        JMono g = m;
        while (true) {
          jmono::set_exp(g, a, k, jmono::exp_at(g, a, k) + 1);
          if (jmono::weight(g) > wmax) break;
          grown.push_back(g);
        }
      }
      jets.insert(jets.end(), grown.begin(), grown.end());
    }
  // base monomials u^alpha q^d
  std::vector<mono::M> bases;
  std::array<int, kMaxDim> ue{};
  std::function<void(int, int)> rec = [&](int a, int left) {
    if (a == n) {
      for (int d = 0; d <= dqmax; ++d) bases.push_back(mono::make(ue, d));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      ue[a] = e;
      rec(a + 1, left - e);
    }
    ue[a] = 0;
  };
  rec(0, dumax);

  std::vector<JetPoly> out;
  for (auto& jm : jets)
    for (auto& bm : bases) {
      if (jm == JMono{} && bm == 0) continue;
      // assemble the monomial by multiplication to stay within caps honestly
      JetPoly q = JetPoly::constant(n, c.jc, 1);
      for (int k = 1; k <= kMaxJetOrder; ++k)
        for (int a = 0; a < n; ++a)
          for (int e = 0; e < jmono::exp_at(jm, a, k); ++e) q *= JetPoly::wvar(n, c.jc, a, k);
      for (int a = 0; a < n; ++a) {
        auto uv = c.lift(MultiSeries::var(n, c.m.caps, a));
        for (int e = 0; e < mono::uexp(bm, a); ++e) q *= uv;
      }
      auto qv = c.lift(MultiSeries::qvar(n, c.m.caps));
      for (int d = 0; d < mono::qdeg(bm); ++d) q *= qv;
      if (!q.is_zero()) out.push_back(q);
    }

  // 16 fixed-seed random combinations of corpus monomials
  std::mt19937_64 rng(20240817u);
  std::uniform_int_distribution<int> pick(0, int(out.size()) - 1);
  std::uniform_int_distribution<int> num(-9, 9);
  std::uniform_int_distribution<int> den(1, 4);
  std::vector<JetPoly> combos;
  for (int i = 0; i < 16; ++i) {
    JetPoly f = JetPoly::zero(n, c.jc);
    for (int j = 0; j < 5; ++j) f += out[pick(rng)].scaled(Rational(num(rng), den(rng)));
    combos.push_back(f);
  }
  out.insert(out.end(), combos.begin(), combos.end());
  return out;
}

}  // namespace frobjet
