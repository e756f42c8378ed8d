#include "frobjet/semisimple.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

namespace frobjet {

namespace {

Complex cone() { return Complex(1.0); }

CMat cmat_zero(int n) { return CMat(n, CVec(n)); }

CMat cmat_identity(int n) {
  CMat m = cmat_zero(n);
  for (int i = 0; i < n; ++i) m[i][i] = cone();
  return m;
}

CMat cmat_mul(const CMat& a, const CMat& b) {
  int n = int(a.size());
  CMat r = cmat_zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Complex cmat_trace(const CMat& a) {
  Complex s;
  for (size_t i = 0; i < a.size(); ++i) s += a[i][i];
  return s;
}

CMat cmat_sub(const CMat& a, const CMat& b) {
  CMat r = a;
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = 0; j < r.size(); ++j) r[i][j] -= b[i][j];
  return r;
}

CMat cmat_scale(const CMat& a, const Complex& c) {
  CMat r = a;
  for (auto& row : r)
    for (auto& x : row) x *= c;
  return r;
}

// characteristic polynomial z^n + c[0] z^{n-1} + ... + c[n-1] (Faddeev-LeVerrier)
CVec char_poly(const CMat& a) {
  int n = int(a.size());
  CVec c(n);
  CMat m = a;
  c[0] = -cmat_trace(m);
  for (int k = 2; k <= n; ++k) {
    CMat shifted = m;
    for (int i = 0; i < n; ++i) shifted[i][i] += c[k - 2];
    m = cmat_mul(a, shifted);
    c[k - 1] = -cmat_trace(m) / Complex(double(k));
  }
  return c;
}

Complex poly_eval(const CVec& c, const Complex& z) {
  Complex p = cone();
  for (auto& ck : c) p = p * z + ck;
  return p;
}

CVec eigenvalues(const CMat& a) {
  int n = int(a.size());
  if (n == 1) return {a[0][0]};
  if (n == 2) {
    Complex tr = a[0][0] + a[1][1];
    Complex det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Complex s = csqrt(tr * tr - det * Complex(4.0));
    Complex half(Real(1) / 2);
    return {(tr + s) * half, (tr - s) * half};
  }
  CVec c = char_poly(a);
  // Durand-Kerner from a non-real geometric seed
  Real scale(0);
  for (auto& ck : c) scale = std::max(scale, cabs(ck));
  scale = std::max(scale, Real(1));
  CVec z(n);
  Complex seed(Real("0.4"), Real("0.9"));
  Complex p = Complex(scale);
  for (int i = 0; i < n; ++i) {
    p *= seed;
    z[i] = p;
  }
  Real tol = scale * pow(Real(10), -45);
  for (int it = 0; it < 500; ++it) {
    Real worst(0);
    for (int i = 0; i < n; ++i) {
      Complex denom = cone();
      for (int j = 0; j < n; ++j)
        if (j != i) denom *= z[i] - z[j];
      Complex step = poly_eval(c, z[i]) / denom;
      z[i] -= step;
      worst = std::max(worst, cabs(step));
    }
    if (worst < tol) return z;
  }
  throw FrobjetError("EigenSolveFailure", "root iteration did not converge");
}

// series data reused by every chart along a computation
struct UCache {
  const FrobeniusModel& m;
  const ProductTensor& t;
  Mat<MultiSeries> useries;
  std::vector<Mat<MultiSeries>> duseries;

  UCache(const FrobeniusModel& mm, const ProductTensor& tt)
      : m(mm), t(tt), useries(u_matrix(mm, tt)) {
    for (int a = 0; a < m.n; ++a)
      duseries.push_back(useries.map([a](const MultiSeries& s) { return s.partial_u(a); }));
  }
};

CanonicalChart build_chart(const UCache& c, const CVec& u, const Complex& q,
                           const CanonicalChart* ref, const Real& tau_sep) {
  int n = c.m.n;
  CanonicalChart ch;
  ch.n = n;
  ch.pt.u = u;
  ch.pt.q = q;
  ch.unum = eval_mat_c(c.useries, u, q);
  CVec v = eigenvalues(ch.unum);
  if (ref) {
    // order by proximity to the reference chart, greedily
    CVec out(n);
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
      int best = -1;
      Real bd(0);
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        Real d = cabs(v[j] - ref->pt.v[i]);
        if (best < 0 || d < bd) {
          best = j;
          bd = d;
        }
      }
      used[best] = true;
      out[i] = v[best];
    }
    v = out;
  } else {
    std::sort(v.begin(), v.end(), [](const Complex& a, const Complex& b) {
      if (a.re != b.re) return a.re < b.re;
      return a.im < b.im;
    });
  }
  ch.pt.v = v;
  Real scale(0);
  for (auto& vi : v) scale = std::max(scale, cabs(vi));
  Real margin = scale;
  for (int i = 0; i < n; ++i) {
    margin = std::min(margin, cabs(v[i]));
    for (int j = i + 1; j < n; ++j) margin = std::min(margin, cabs(v[i] - v[j]));
  }
  if (scale == 0)
    throw FrobjetError("TameLocusViolation", "U vanishes at the requested point");
  ch.pt.margin = margin / scale;
  if (ch.pt.margin < tau_sep)
    throw FrobjetError("TameLocusViolation",
                       "eigenvalue separation below tau_sep at the requested point");

  for (int i = 0; i < n; ++i) {
    CMat p = cmat_identity(n);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      CMat f = ch.unum;
      for (int d = 0; d < n; ++d) f[d][d] -= v[j];
      p = cmat_scale(cmat_mul(p, f), cone() / (v[i] - v[j]));
    }
    ch.proj.push_back(p);
    ch.idem.push_back(p[c.m.e_index]);  // pi_i^a = (P_i)_e^a
  }
  ch.jac = CMat(n, CVec(n));
  for (int i = 0; i < n; ++i) ch.jac[i] = ch.idem[i];
  for (int a = 0; a < n; ++a) ch.du.push_back(eval_mat_c(c.duseries[a], u, q));
  ch.jac_inv = cmat_zero(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) ch.jac_inv[i][a] = cmat_trace(cmat_mul(ch.proj[i], ch.du[a]));
  return ch;
}

// analytic first-order data at a chart: idempotent derivatives and eta data
struct EtaData {
  CVec eta_i;
  CMat deta;    // [i][a]
  CMat eta_ij;  // [i][j]
};

EtaData eta_data(const UCache& c, const CanonicalChart& ch) {
  int n = ch.n;
  EtaData d;
  d.eta_i = CVec(n);
  d.deta = cmat_zero(n);
  d.eta_ij = cmat_zero(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (c.m.eta[a][b] != 0)
          d.eta_i[i] += ch.idem[i][a] * ch.idem[i][b] * Complex(c.m.eta[a][b]);
  // d_a P_i by eigenvector perturbation, then d_a pi_i = row e of it
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) {
      CMat dp = cmat_zero(n);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        CMat t1 = cmat_mul(ch.proj[j], cmat_mul(ch.du[a], ch.proj[i]));
        CMat t2 = cmat_mul(ch.proj[i], cmat_mul(ch.du[a], ch.proj[j]));
        Complex f = cone() / (ch.pt.v[i] - ch.pt.v[j]);
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) dp[r][s] += (t1[r][s] + t2[r][s]) * f;
      }
      const CVec& dpi = dp[c.m.e_index];
      Complex s;
      for (int r = 0; r < n; ++r)
        for (int b = 0; b < n; ++b)
          if (c.m.eta[r][b] != 0) s += dpi[r] * ch.idem[i][b] * Complex(c.m.eta[r][b]);
      d.deta[i][a] = s + s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex s;
      for (int a = 0; a < n; ++a) s += ch.idem[j][a] * d.deta[i][a];
      d.eta_ij[i][j] = s;
    }
  return d;
}

DiagonalMetric metric_from_eta(const UCache& c, const CanonicalChart& ch, const EtaData& ed) {
  int n = ch.n;
  DiagonalMetric dm;
  dm.eta_i = ed.eta_i;
  dm.deta = ed.deta;
  dm.eta_ij = ed.eta_ij;
  dm.gamma = cmat_zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dm.gamma[i][j] = ed.eta_ij[i][j] / (ed.eta_i[i] + ed.eta_i[i]);
  // flat-coordinate matrix: gamma du-components solved from gamma dv^i = 1/2 dlog eta_i
  dm.gamma_flat = cmat_zero(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Complex s;
      for (int i = 0; i < n; ++i)
        s += ch.jac[i][a] * ed.deta[i][b] / (ed.eta_i[i] + ed.eta_i[i]);
      dm.gamma_flat[a][b] = s;
    }
  dm.alpha = CVec(n);
  for (int i = 0; i < n; ++i) {
    Complex s;
    for (int j = 0; j < n; ++j)
      s += (ch.pt.v[i] - ch.pt.v[j]) * dm.gamma[i][j] * dm.gamma[j][i];
    dm.alpha[i] = s * Complex(Real(1) / 2);
  }
  dm.alpha_flat = CVec(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) dm.alpha_flat[a] += dm.alpha[i] * ch.jac_inv[i][a];
  return dm;
}

CVec shifted_point(const CVec& u, int a, const Real& h) {
  CVec r = u;
  r[a] += Complex(h);
  return r;
}

// central difference with one Richardson step
template <class F>
auto richardson(F f, const Real& h) {
  auto d1 = f(h);
  auto d2 = f(h / 2);
  for (size_t i = 0; i < d1.size(); ++i) d2[i] = (d2[i] * Complex(4.0) - d1[i]) / Complex(3.0);
  return d2;
}

const Real& fd_step() {
  static Real h = pow(Real(10), -6);
  return h;
}

}  // namespace

Complex eval_c(const MultiSeries& f, const CVec& u, const Complex& q) {
  int n = f.dim();
  std::vector<CVec> pw(n, CVec{cone()});
  CVec qpw{cone()};
  Complex s;
  for (auto& t : f.terms()) {
    Complex c{Real(t.second)};
    for (int a = 0; a < n; ++a) {
      int e = mono::uexp(t.first, a);
      while (int(pw[a].size()) <= e) pw[a].push_back(pw[a].back() * u[a]);
      c *= pw[a][e];
    }
    int d = mono::qdeg(t.first);
    while (int(qpw.size()) <= d) qpw.push_back(qpw.back() * q);
    s += c * qpw[d];
  }
  return s;
}

CMat eval_mat_c(const Mat<MultiSeries>& m, const CVec& u, const Complex& q) {
  CMat r = cmat_zero(m.n());
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j < m.n(); ++j) r[i][j] = eval_c(m.at(i, j), u, q);
  return r;
}

CanonicalChart canonical_coordinates(const FrobeniusModel& m, const ProductTensor& t,
                                     const CVec& u, const Complex& q, const Real& tau_sep) {
  UCache c(m, t);
  return build_chart(c, u, q, nullptr, tau_sep);
}

CanonicalChart chart_near(const FrobeniusModel& m, const ProductTensor& t, const CVec& u,
                          const Complex& q, const CanonicalChart& ref, const Real& tau_sep) {
  UCache c(m, t);
  return build_chart(c, u, q, &ref, tau_sep);
}

CheckResult check_idempotents(const FrobeniusModel& m, const ProductTensor& t,
                              const CanonicalChart& ch, const Real& tol) {
  int n = ch.n;
  CheckResult r{"idempotent frame", false, ""};
  std::vector<CMat> av;
  for (int a = 0; a < n; ++a) av.push_back(eval_mat_c(t.A[a], ch.pt.u, ch.pt.q));
  Real worst(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int cc = 0; cc < n; ++cc) {
        Complex prod;  // (pi_i o pi_j)^c
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) prod += ch.idem[i][a] * ch.idem[j][b] * av[a][b][cc];
        if (i == j) prod -= ch.idem[i][cc];
        worst = std::max(worst, cabs(prod));
      }
  for (int a = 0; a < n; ++a) {
    Complex s;
    for (int i = 0; i < n; ++i) s += ch.idem[i][a];
    s -= Complex(a == m.e_index ? 1.0 : 0.0);
    worst = std::max(worst, cabs(s));
  }
  {
    Complex s = -cmat_trace(ch.unum);
    for (auto& v : ch.pt.v) s += v;
    worst = std::max(worst, cabs(s));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex s;
      for (int a = 0; a < n; ++a) s += ch.jac_inv[i][a] * ch.jac[j][a];
      s -= Complex(i == j ? 1.0 : 0.0);
      worst = std::max(worst, cabs(s));
    }
  r.pass = worst < tol;
  std::ostringstream os;
  os << "max residual " << worst;
  r.detail = os.str();
  return r;
}

DiagonalMetric diagonal_metric(const FrobeniusModel& m, const ProductTensor& t,
                               const CanonicalChart& ch, const Real& fd_tol) {
  UCache c(m, t);
  int n = ch.n;
  EtaData ed = eta_data(c, ch);
  DiagonalMetric dm = metric_from_eta(c, ch, ed);
  if (fd_tol <= 0) return dm;  // light mode: no cross-checks, no second derivatives

  Real sep = ch.pt.margin / 2;
  for (int a = 0; a < n; ++a) {
    // finite-difference v^i and eta_i against the analytic eigen-perturbation route
    auto fd = richardson(
        [&](const Real& h) {
          auto cp = build_chart(c, shifted_point(ch.pt.u, a, h), ch.pt.q, &ch, sep);
          auto cm = build_chart(c, shifted_point(ch.pt.u, a, -h), ch.pt.q, &ch, sep);
          auto ep = eta_data(c, cp), em = eta_data(c, cm);
          CVec d(2 * n);
          Complex inv = cone() / Complex(h + h);
          for (int i = 0; i < n; ++i) {
            d[i] = (cp.pt.v[i] - cm.pt.v[i]) * inv;
            d[n + i] = (ep.eta_i[i] - em.eta_i[i]) * inv;
          }
          return d;
        },
        fd_step());
    for (int i = 0; i < n; ++i) {
      Real e1 = cabs(fd[i] - ch.jac_inv[i][a]) / std::max(Real(1), cabs(ch.jac_inv[i][a]));
      Real e2 = cabs(fd[n + i] - ed.deta[i][a]) / std::max(Real(1), cabs(ed.deta[i][a]));
      if (e1 > fd_tol || e2 > fd_tol)
        throw FrobjetError("DerivativeMismatch",
                           "analytic and finite-difference eigenvalue data disagree");
    }
  }
  // eta_ijk from finite differences of the analytic eta_ij
  std::vector<CMat> deij;  // [a][i][j]
  for (int a = 0; a < n; ++a) {
    auto fd = richardson(
        [&](const Real& h) {
          auto cp = build_chart(c, shifted_point(ch.pt.u, a, h), ch.pt.q, &ch, sep);
          auto cm = build_chart(c, shifted_point(ch.pt.u, a, -h), ch.pt.q, &ch, sep);
          auto ep = eta_data(c, cp), em = eta_data(c, cm);
          CVec d(n * n);
          Complex inv = cone() / Complex(h + h);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d[i * n + j] = (ep.eta_ij[i][j] - em.eta_ij[i][j]) * inv;
          return d;
        },
        fd_step());
    CMat slice = cmat_zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) slice[i][j] = fd[i * n + j];
    deij.push_back(slice);
  }
  dm.eta_ijk.assign(n, cmat_zero(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Complex s;
        for (int a = 0; a < n; ++a) s += ch.idem[k][a] * deij[a][i][j];
        dm.eta_ijk[i][j][k] = s;
      }
  return dm;
}

CheckResult check_darboux_egoroff(const FrobeniusModel& m, const CanonicalChart& ch,
                                  const DiagonalMetric& dm, const Real& tol) {
  int n = ch.n;
  CheckResult r{"Darboux-Egoroff relations", false, ""};
  Real worst(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) worst = std::max(worst, cabs(dm.eta_ij[i][j] - dm.eta_ij[j][i]));
  std::string triple = "triple relation vacuous for n = 2";
  if (n >= 3) {
    if (dm.eta_ijk.empty()) {
      r.detail = "second-derivative data unavailable";
      return r;
    }
    triple = "triple relation checked on all distinct triples";
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (i == j || j == k || i == k) continue;
          Complex rhs = dm.eta_ij[k][i] * dm.eta_ij[i][j] / dm.eta_i[i] +
                        dm.eta_ij[i][j] * dm.eta_ij[j][k] / dm.eta_i[j] +
                        dm.eta_ij[j][k] * dm.eta_ij[k][i] / dm.eta_i[k];
          worst = std::max(worst, cabs(dm.eta_ijk[i][j][k] - rhs * Complex(Real(1) / 2)));
        }
  }
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, cabs(dm.deta[i][m.e_index]));  // e(eta_i) = 0
    Complex eu;
    for (int a = 0; a < n; ++a)
      eu += (Complex(m.euler_lin[a]) * ch.pt.u[a] + Complex(m.euler_shift[a])) * dm.deta[i][a];
    worst = std::max(worst, cabs(eu + Complex(m.r) * dm.eta_i[i]));  // E(eta_i) = -r eta_i
  }
  r.pass = worst < tol;
  std::ostringstream os;
  os << "max residual " << worst << "; " << triple;
  r.detail = os.str();
  return r;
}

CheckResult check_gamma(const FrobeniusModel& m, const CanonicalChart& ch,
                        const DiagonalMetric& dm, const Real& tol) {
  int n = ch.n;
  CheckResult r{"rotation tensor mu = [gamma, U]", false, ""};
  auto mu = m.mu();
  CMat muf = cmat_zero(n);  // mu in the canonical frame
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        muf[i][j] += ch.jac_inv[i][a] * Complex(mu[a]) * ch.jac[j][a];
  Real worst(0);
  // with covectors written as rows, mu dv^i = sum_j (v^j - v^i) gamma[i][j] dv^j;
  // this orientation is the eta-antisymmetric one
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, cabs(muf[i][i]));  // diagonal of mu vanishes in this frame
    for (int j = 0; j < n; ++j) {
      Complex comm = (ch.pt.v[j] - ch.pt.v[i]) * dm.gamma[i][j];
      worst = std::max(worst, cabs(muf[i][j] - comm));
      if (i != j) {
        // division route against the d log eta route
        Complex alt = muf[i][j] / (ch.pt.v[j] - ch.pt.v[i]);
        worst = std::max(worst, cabs(alt - dm.gamma[i][j]));
      }
    }
  }
  // the flat-coordinate matrix expresses the same tensor
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex s;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          s += ch.jac_inv[i][a] * dm.gamma_flat[a][b] * ch.jac[j][b];
      worst = std::max(worst, cabs(s - dm.gamma[i][j]));
    }
  r.pass = worst < tol;
  std::ostringstream os;
  os << "max residual " << worst;
  r.detail = os.str();
  return r;
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1]
std::vector<std::pair<Real, Real>> gl_rule(int n) {
  std::vector<std::pair<Real, Real>> r;
  Real pi = 4 * atan(Real(1));
  for (int k = 1; k <= n; ++k) {
    Real x = cos(pi * (Real(k) - Real(1) / 4) / (Real(n) + Real(1) / 2));
    for (int it = 0; it < 200; ++it) {
      // evaluate P_n and P_n' by recurrence
      Real p0(1), p1 = x;
      for (int j = 2; j <= n; ++j) {
        Real p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      Real dp = Real(n) * (x * p1 - p0) / (x * x - 1);
      Real step = p1 / dp;
      x -= step;
      if (abs(step) < pow(Real(10), -45)) break;
    }
    Real p0(1), p1 = x;
    for (int j = 2; j <= n; ++j) {
      Real p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    Real dp = Real(n) * (x * p1 - p0) / (x * x - 1);
    r.push_back({x, 2 / ((1 - x * x) * dp * dp)});
  }
  return r;
}

}  // namespace

Complex log_tau_segment(const FrobeniusModel& m, const ProductTensor& t, const CVec& u0,
                        const CVec& u1, const Complex& q, int panels, const Real& tau_sep) {
  UCache c(m, t);
  int n = m.n;
  auto rule = gl_rule(16);
  Complex acc;
  try {
    for (int p = 0; p < panels; ++p) {
      for (auto& [x, w] : rule) {
        // s in [p/panels, (p+1)/panels]
        Real s = (Real(p) + (x + 1) / 2) / panels;
        CVec u(n);
        for (int a = 0; a < n; ++a) u[a] = u0[a] + (u1[a] - u0[a]) * Complex(s);
        auto ch = build_chart(c, u, q, nullptr, tau_sep);
        auto dm = metric_from_eta(c, ch, eta_data(c, ch));
        Complex integrand;
        for (int a = 0; a < n; ++a) integrand += dm.alpha_flat[a] * (u1[a] - u0[a]);
        acc += integrand * Complex(w / (2 * panels));
      }
    }
  } catch (const FrobjetError& e) {
    if (e.kind == "TameLocusViolation")
      throw FrobjetError("PathLeavesTameChart", "integration path crossed the tame boundary");
    throw;
  }
  return acc;
}

Real alpha_closedness(const FrobeniusModel& m, const ProductTensor& t, const CVec& u,
                      const Complex& q, const Real& tau_sep) {
  UCache c(m, t);
  int n = m.n;
  auto base = build_chart(c, u, q, nullptr, tau_sep);
  Real sep = base.pt.margin / 2;
  std::vector<CVec> dalpha;  // dalpha[a][b] = d_a alpha_b
  for (int a = 0; a < n; ++a)
    dalpha.push_back(richardson(
        [&](const Real& h) {
          auto cp = build_chart(c, shifted_point(u, a, h), q, &base, sep);
          auto cm = build_chart(c, shifted_point(u, a, -h), q, &base, sep);
          auto dp = metric_from_eta(c, cp, eta_data(c, cp));
          auto dmm = metric_from_eta(c, cm, eta_data(c, cm));
          CVec d(n);
          Complex inv = cone() / Complex(h + h);
          for (int b = 0; b < n; ++b) d[b] = (dp.alpha_flat[b] - dmm.alpha_flat[b]) * inv;
          return d;
        },
        fd_step()));
  Real worst(0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) worst = std::max(worst, cabs(dalpha[a][b] - dalpha[b][a]));
  return worst;
}

GenusOneValue genus1_closed_form(const FrobeniusModel& m, const ProductTensor& t,
                                 const CVec& u, const Complex& q, const CVec& uref,
                                 int panels, const Real& tau_sep) {
  UCache c(m, t);
  auto ch = build_chart(c, u, q, nullptr, tau_sep);
  auto ed = eta_data(c, ch);
  auto dm = metric_from_eta(c, ch, ed);
  GenusOneValue g;
  g.log_tau = log_tau_segment(m, t, uref, u, q, panels, tau_sep);
  g.g = g.log_tau;
  Real f48 = Real(1) / 48;
  for (int i = 0; i < m.n; ++i) g.g -= clog(ed.eta_i[i]) * Complex(f48);
  g.grad = CVec(m.n);
  for (int a = 0; a < m.n; ++a) {
    g.grad[a] = dm.alpha_flat[a];
    for (int i = 0; i < m.n; ++i) g.grad[a] -= ed.deta[i][a] / ed.eta_i[i] * Complex(f48);
  }
  return g;
}

CheckResult check_v1_numeric(const FrobeniusModel& m, const ProductTensor& t, const CVec& u,
                             const Complex& q, int kmax, const Real& tol,
                             const Real& tau_sep) {
  UCache c(m, t);
  int n = m.n;
  auto ch = build_chart(c, u, q, nullptr, tau_sep);
  auto ed = eta_data(c, ch);
  auto dm = metric_from_eta(c, ch, ed);
  CVec grad(n);
  Real f48 = Real(1) / 48;
  for (int a = 0; a < n; ++a) {
    grad[a] = dm.alpha_flat[a];
    for (int i = 0; i < n; ++i) grad[a] -= ed.deta[i][a] / ed.eta_i[i] * Complex(f48);
  }
  std::vector<CMat> up{cmat_identity(n)};
  for (int k = 1; k <= kmax + 1; ++k) up.push_back(cmat_mul(up.back(), ch.unum));
  auto muv = m.mu();
  auto omega = socle_form(t);
  CVec om(n);
  for (int a = 0; a < n; ++a) om[a] = eval_c(omega[a], u, q);
  CheckResult r{"genus-1 constraints at a tame point", false, ""};
  Real worst(0);
  for (int k = 0; k <= kmax; ++k) {
    Complex lhs;
    for (int a = 0; a < n; ++a) lhs -= up[k + 1][m.e_index][a] * grad[a];
    Complex rhs;
    for (int l = 0; l <= k; ++l) {
      CMat b = up[l];  // U^l mu U^{k-l}
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b[i][j] *= Complex(muv[j]);
      b = cmat_mul(b, up[k - l]);
      Complex tr;
      for (int i = 0; i < n; ++i) tr += Complex(muv[i]) * b[i][i];
      rhs += tr * Complex(Real(1) / 4);
      Complex socle;
      for (int a = 0; a < n; ++a) socle += b[m.e_index][a] * om[a];
      rhs += socle * Complex(Real(1) / 24);
    }
    worst = std::max(worst, cabs(lhs - rhs));
  }
  r.pass = worst < tol;
  std::ostringstream os;
  os << "max residual " << worst << " for k <= " << kmax;
  r.detail = os.str();
  return r;
}

// ---------------- symbolic genus-1 potential ----------------

namespace {

struct KernelChain {
  int d = 0;           // Novikov degree
  MultiSeries shape;   // unit-coefficient chain, divisor-compatible
};

// exponent enumeration over the listed coordinates with a u-degree budget
void enumerate_rest(const std::vector<int>& coords, int budget, std::array<int, kMaxDim>& cur,
                    size_t pos, const std::function<void(const std::array<int, kMaxDim>&)>& f) {
  if (pos == coords.size()) {
    f(cur);
    return;
  }
  for (int e = 0; e <= budget; ++e) {
    cur[coords[pos]] = e;
    enumerate_rest(coords, budget - e, cur, pos + 1, f);
  }
  cur[coords[pos]] = 0;
}

}  // namespace

MultiSeries genus1_solve(const FrobeniusModel& m, const ProductTensor& t) {
  Caps caps = m.caps;
  int n = m.n, e = m.e_index;
  if (m.euler_lin[e] != 1 || m.euler_shift[e] != 0)
    throw FrobjetError("LinearSolveSingular", "unit direction is not a plain grading direction");
  int s = -1;
  for (int a = 0; a < n; ++a) {
    if (a == e) continue;
    if (m.euler_shift[a] != 0) {
      if (m.euler_lin[a] != 0 || s >= 0)
        throw FrobjetError("LinearSolveSingular", "unsupported Euler shift layout");
      s = a;
    }
  }
  MultiSeries rhs0 = v1_rhs(m, t, 0);
  Rational r0 = rhs0.constant_term();
  if (!(rhs0 - MultiSeries::constant(n, caps, r0)).zero_to_acc())
    throw FrobjetError("LinearSolveSingular", "index-zero right side is not constant");

  MultiSeries g = m.zero();
  std::vector<KernelChain> kernels;
  std::vector<int> rest;
  for (int a = 0; a < n; ++a)
    if (a != e && a != s) rest.push_back(a);
  int dqmax = (s >= 0) ? caps.dq : 0;  // without Novikov grading data, q stays inert

  std::array<int, kMaxDim> cur{};
  enumerate_rest(rest, caps.du, cur, 0, [&](const std::array<int, kMaxDim>& rho) {
    Rational lam = 0;
    int rdeg = 0;
    for (int a : rest) {
      lam += m.euler_lin[a] * rho[a];
      rdeg += rho[a];
    }
    for (int d = 0; d <= dqmax; ++d) {
      if (s < 0) {
        // diagonal grading: every coefficient is forced
        if (lam != 0 || (rdeg == 0 && d == 0)) continue;  // zero, or the normalized constant
        if (d == 0 && rdeg > 0)
          throw FrobjetError("LinearSolveSingular", "grading kernel without divisor structure");
        continue;  // q-carrying monomial of a q-free model: zero
      }
      Rational dd = lam + Rational(d) * m.euler_shift[s];
      if (rdeg == 0 && d == 0) {
        // base chain: G(0) = 0, first shift slot from the constant right side
        if (caps.du >= 1) {
          std::array<int, kMaxDim> ue = {};
          ue[s] = 1;
          g += MultiSeries::monomial(n, caps, ue, 0, -r0 / m.euler_shift[s]);
        }
        continue;
      }
      if (dd != 0) continue;  // chain forced to zero
      if (d == 0)
        throw FrobjetError("LinearSolveSingular", "grading kernel without divisor structure");
      // divisor-compatible kernel chain: sum_x d^x/x! u_s^x rho q^d
      MultiSeries shape = m.zero();
      Rational coef = 1;
      for (int x = 0; rdeg + x <= caps.du; ++x) {
        std::array<int, kMaxDim> ue = rho;
        ue[s] = x;
        shape += MultiSeries::monomial(n, caps, ue, d, coef);
        coef = coef * d / (x + 1);
      }
      kernels.push_back({d, shape.with_acc(caps.du)});
    }
  });

  g = g.with_acc(caps.du);
  if (kernels.empty()) return g;

  // pin the kernel coefficients with the index-one constraint, order by order
  // in the Novikov degree
  MultiSeries rhs1 = v1_rhs(m, t, 1);
  auto slice = [](const MultiSeries& f, int d) {
    std::map<mono::M, Rational> out;
    int trust = f.exact() ? 1 << 19 : f.acc();
    for (auto& tm : f.terms())
      if (mono::qdeg(tm.first) == d && mono::udeg(tm.first) <= trust) out[tm.first] = tm.second;
    return out;
  };
  for (int d = 1; d <= caps.dq; ++d) {
    std::vector<int> unk;
    for (size_t i = 0; i < kernels.size(); ++i)
      if (kernels[i].d == d) unk.push_back(int(i));
    if (unk.empty()) continue;
    MultiSeries res = lk_small(m, t, 1, g) - rhs1;
    auto rslice = slice(res, d);
    std::vector<std::map<mono::M, Rational>> cols;
    int trust = res.exact() ? 1 << 19 : res.acc();
    for (int i : unk) {
      MultiSeries col = lk_small(m, t, 1, kernels[i].shape);
      if (!col.exact()) trust = std::min(trust, col.acc());
      cols.push_back(slice(col, d));
    }
    std::vector<mono::M> rows;
    for (auto& [k, v] : rslice)
      if (mono::udeg(k) <= trust) rows.push_back(k);
    for (auto& cs : cols)
      for (auto& [k, v] : cs)
        if (mono::udeg(k) <= trust &&
            std::find(rows.begin(), rows.end(), k) == rows.end())
          rows.push_back(k);
    size_t nk = unk.size();
    // exact elimination over the slice rows
    std::vector<std::vector<Rational>> mat;
    for (auto& row : rows) {
      std::vector<Rational> line(nk + 1, Rational(0));
      for (size_t j = 0; j < nk; ++j)
        if (auto it = cols[j].find(row); it != cols[j].end()) line[j] = it->second;
      if (auto it = rslice.find(row); it != rslice.end()) line[nk] = -it->second;
      mat.push_back(line);
    }
    std::vector<Rational> sol(nk, Rational(0));
    size_t rank = 0;
    for (size_t c = 0; c < nk; ++c) {
      size_t p = rank;
      while (p < mat.size() && mat[p][c] == 0) ++p;
      if (p == mat.size())
        throw FrobjetError("LinearSolveSingular",
                           "kernel coefficient not visible at Novikov degree " +
                               std::to_string(d));
      std::swap(mat[p], mat[rank]);
      for (size_t r2 = 0; r2 < mat.size(); ++r2) {
        if (r2 == rank || mat[r2][c] == 0) continue;
        Rational f = mat[r2][c] / mat[rank][c];
        for (size_t j = c; j <= nk; ++j) mat[r2][j] -= f * mat[rank][j];
      }
      ++rank;
    }
    for (size_t c = nk; c-- > 0;) sol[c] = mat[c][nk] / mat[c][c];
    for (size_t r2 = rank; r2 < mat.size(); ++r2)
      if (mat[r2][nk] != 0)
        throw FrobjetError("LinearSolveSingular",
                           "inconsistent constraint slice at Novikov degree " +
                               std::to_string(d));
    for (size_t j = 0; j < nk; ++j) g += kernels[unk[j]].shape.scaled(sol[j]);
  }
  return g;
}

CheckResult check_v1_series(const FrobeniusModel& m, const ProductTensor& t,
                            const MultiSeries& g, int kmax) {
  CheckResult r{"genus-1 constraint series", true, ""};
  for (int k = -1; k <= kmax; ++k) {
    MultiSeries res = lk_small(m, t, k, g) - v1_rhs(m, t, k);
    if (!res.zero_to_acc()) {
      r.pass = false;
      r.detail = "residual nonzero at k = " + std::to_string(k);
      return r;
    }
  }
  r.detail = "k = -1.." + std::to_string(kmax) + " to recorded accuracy";
  return r;
}

JetPoly genus1_F1(const JetContext& c, const MultiSeries& g) {
  return c.lift(g) + c.logdetX.scaled(Rational(1, 24));
}

CheckResult check_trr1(const JetContext& c, const JetPoly& f1, int kmax) {
  CheckResult r{"genus-1 topological recursion", false, ""};
  JetPoly trm = c.thetaJ[1].trace();  // thetaJ[0] is the identity coefficient
  for (int a = 0; a < c.m.n; ++a) {
    JetPoly res =
        sigma_apply(c, 1, a, f1) - sigma_apply(c, 0, a, trm).scaled(Rational(1, 24));
    if (!res.zero_to_acc()) {
      r.detail = "k = 1 residual nonzero at a = " + std::to_string(a);
      return r;
    }
  }
  for (int k = 2; k <= kmax; ++k)
    for (int a = 0; a < c.m.n; ++a)
      if (!sigma_apply(c, k, a, f1).zero_to_acc()) {
        r.detail = "vanishing fails at (k,a) = (" + std::to_string(k) + "," +
                   std::to_string(a) + ")";
        return r;
      }
  r.pass = true;
  r.detail = "k = 1.." + std::to_string(kmax);
  return r;
}

CheckResult check_f1_dilaton(const JetContext& c, const JetPoly& f1) {
  CheckResult r{"genus-1 dilaton equation", false, ""};
  JetPoly res =
      f1.dilaton_apply(c.m.e_index) - JetPoly::constant(c.m.n, c.jc, Rational(c.m.n, 24));
  r.pass = res.zero_to_acc();
  r.detail = r.pass ? "Q F1 = n/24" : "residual nonzero";
  return r;
}

// ---------------- the symmetrized second-order operator ----------------

MultiSeries psi_apply(const FrobeniusModel& m, const ProductTensor& t,
                      const std::array<VecT<MultiSeries>, 4>& x, const MultiSeries& f) {
  int n = m.n;
  auto zero = m.zero();
  // derivative tables
  std::vector<MultiSeries> df;
  std::vector<std::vector<MultiSeries>> d2f(n, std::vector<MultiSeries>(n, zero));
  for (int a = 0; a < n; ++a) df.push_back(f.partial_u(a));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) d2f[a][b] = d2f[b][a] = df[a].partial_u(b);
  std::vector<std::vector<Mat<MultiSeries>>> dA;  // dA[e][a] = d_e A_a
  for (int ee = 0; ee < n; ++ee) {
    std::vector<Mat<MultiSeries>> row;
    for (int a = 0; a < n; ++a)
      row.push_back(t.A[a].map([ee](const MultiSeries& s) { return s.partial_u(ee); }));
    dA.push_back(row);
  }
  auto omega = socle_form(t);
  std::vector<VecT<MultiSeries>> domega;  // domega[e][mu]
  for (int ee = 0; ee < n; ++ee) {
    VecT<MultiSeries> row(n, zero);
    for (int mu = 0; mu < n; ++mu) row[mu] = omega[mu].partial_u(ee);
    domega.push_back(row);
  }

  // contractions, memoized per argument tuple
  std::map<int, Mat<MultiSeries>> cmemo;
  auto C = [&](int i) -> const Mat<MultiSeries>& {
    auto it = cmemo.find(i);
    if (it != cmemo.end()) return it->second;
    Mat<MultiSeries> acc(n, zero);
    for (int a = 0; a < n; ++a)
      if (!x[i][a].is_zero()) acc += t.A[a].scaled_by(x[i][a]);
    return cmemo.emplace(i, std::move(acc)).first->second;
  };
  auto pairkey = [](int i, int j) { return std::make_pair(std::min(i, j), std::max(i, j)); };
  std::map<std::pair<int, int>, VecT<MultiSeries>> bmemo;
  auto B = [&](int i, int j) -> const VecT<MultiSeries>& {
    auto key = pairkey(i, j);
    auto it = bmemo.find(key);
    if (it != bmemo.end()) return it->second;
    VecT<MultiSeries> acc(n, zero);
    const Mat<MultiSeries>& ci = C(i);
    for (int mu = 0; mu < n; ++mu)
      for (int b = 0; b < n; ++b)
        if (!x[j][b].is_zero()) acc[mu] += x[j][b] * ci.at(b, mu);
    return bmemo.emplace(key, std::move(acc)).first->second;
  };
  std::map<std::pair<int, int>, Mat<MultiSeries>> ememo;
  auto E = [&](int i, int j) -> const Mat<MultiSeries>& {  // E[mu][nu] = x x d_mu A_{ab}^nu
    auto key = pairkey(i, j);
    auto it = ememo.find(key);
    if (it != ememo.end()) return it->second;
    Mat<MultiSeries> acc(n, zero);
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) {
        MultiSeries sum = zero;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            if (!x[i][a].is_zero() && !x[j][b].is_zero())
              sum += x[i][a] * x[j][b] * dA[mu][a].at(b, nu);
        acc.at(mu, nu) = sum;
      }
    return ememo.emplace(key, std::move(acc)).first->second;
  };
  std::map<std::tuple<int, int, int>, VecT<MultiSeries>> dbmemo;
  auto dB = [&](int i, int j, int k) -> const VecT<MultiSeries>& {
    auto [lo, hi] = pairkey(i, j);
    auto key = std::make_tuple(lo, hi, k);
    auto it = dbmemo.find(key);
    if (it != dbmemo.end()) return it->second;
    VecT<MultiSeries> acc(n, zero);
    for (int mu = 0; mu < n; ++mu) {
      MultiSeries sum = zero;
      for (int c = 0; c < n; ++c) {
        if (x[k][c].is_zero()) continue;
        MultiSeries inner = zero;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            if (!x[i][a].is_zero() && !x[j][b].is_zero())
              inner += x[i][a] * x[j][b] * dA[c][a].at(b, mu);
        sum += x[k][c] * inner;
      }
      acc[mu] = sum;
    }
    return dbmemo.emplace(key, std::move(acc)).first->second;
  };
  std::map<std::tuple<int, int, int, int>, VecT<MultiSeries>> ddbmemo;
  auto ddB = [&](int i, int j, int k, int l) -> const VecT<MultiSeries>& {
    auto [a1, a2] = pairkey(i, j);
    auto [b1, b2] = pairkey(k, l);
    auto key = std::make_tuple(a1, a2, b1, b2);
    auto it = ddbmemo.find(key);
    if (it != ddbmemo.end()) return it->second;
    VecT<MultiSeries> acc(n, zero);
    for (int mu = 0; mu < n; ++mu) {
      MultiSeries sum = zero;
      for (int c = 0; c < n; ++c) {
        if (x[k][c].is_zero()) continue;
        for (int d = 0; d < n; ++d) {
          if (x[l][d].is_zero()) continue;
          MultiSeries inner = zero;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              if (!x[i][a].is_zero() && !x[j][b].is_zero())
                inner += x[i][a] * x[j][b] * dA[c][a].at(b, mu).partial_u(d);
          sum += x[k][c] * x[l][d] * inner;
        }
      }
      acc[mu] = sum;
    }
    return ddbmemo.emplace(key, std::move(acc)).first->second;
  };
  std::map<int, VecT<MultiSeries>> dmemo, domemo;
  auto D = [&](int i) -> const VecT<MultiSeries>& {  // second derivatives of f along x_i
    auto it = dmemo.find(i);
    if (it != dmemo.end()) return it->second;
    VecT<MultiSeries> acc(n, zero);
    for (int nu = 0; nu < n; ++nu)
      for (int a = 0; a < n; ++a)
        if (!x[i][a].is_zero()) acc[nu] += x[i][a] * d2f[a][nu];
    return dmemo.emplace(i, std::move(acc)).first->second;
  };
  auto dOm = [&](int i) -> const VecT<MultiSeries>& {
    auto it = domemo.find(i);
    if (it != domemo.end()) return it->second;
    VecT<MultiSeries> acc(n, zero);
    for (int mu = 0; mu < n; ++mu)
      for (int a = 0; a < n; ++a)
        if (!x[i][a].is_zero()) acc[mu] += x[i][a] * domega[a][mu];
    return domemo.emplace(i, std::move(acc)).first->second;
  };

  MultiSeries total = zero;
  int perm[4] = {0, 1, 2, 3};
  std::sort(perm, perm + 4);
  do {
    int p0 = perm[0], p1 = perm[1], p2 = perm[2], p3 = perm[3];
    const auto& b01 = B(p0, p1);
    const auto& b23 = B(p2, p3);
    for (int mu = 0; mu < n; ++mu) {
      if (b01[mu].is_zero()) continue;
      for (int nu = 0; nu < n; ++nu) {
        if (!b23[nu].is_zero()) total += (b01[mu] * b23[nu] * d2f[mu][nu]).scaled(3);
        total -= (b01[mu] * C(p2).at(mu, nu) * D(p3)[nu]).scaled(4);
        total -= b01[mu] * E(p2, p3).at(mu, nu) * df[nu];
      }
    }
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) {
        total += (dB(p1, p2, p3)[mu] * C(p0).at(mu, nu) * df[nu]).scaled(2);
        total -= (E(p0, p1).at(nu, mu) * E(p2, p3).at(mu, nu)).scaled(Rational(1, 4));
      }
      total += (dB(p0, p1, p2)[mu] * dOm(p3)[mu]).scaled(Rational(1, 6));
      total += (ddB(p0, p1, p2, p3)[mu] * omega[mu]).scaled(Rational(1, 24));
    }
  } while (std::next_permutation(perm, perm + 4));
  return total.scaled(Rational(1, 24));
}

CheckResult check_psi_g(const FrobeniusModel& m, const ProductTensor& t,
                        const MultiSeries& g) {
  CheckResult r{"elliptic equation on the solved potential", false, ""};
  int n = m.n;
  auto cvec = [&](const std::vector<Rational>& v) {
    VecT<MultiSeries> out(n, m.zero());
    for (int a = 0; a < n; ++a) out[a] = MultiSeries::constant(n, m.caps, v[a]);
    return out;
  };
  std::vector<std::vector<Rational>> dirs;
  for (int a = 0; a < n; ++a) {
    std::vector<Rational> u(n, Rational(0));
    u[a] = 1;
    dirs.push_back(u);
  }
  std::vector<Rational> mixed(n);
  for (int a = 0; a < n; ++a) mixed[a] = Rational(2 * a + 1, a + 2);  // fixed skew direction
  dirs.push_back(mixed);
  for (auto& dvec : dirs) {
    auto xx = cvec(dvec);
    std::array<VecT<MultiSeries>, 4> args{xx, xx, xx, xx};
    if (!psi_apply(m, t, args, g).zero_to_acc()) {
      r.detail = "residual nonzero on a constant direction";
      return r;
    }
  }
  r.pass = true;
  r.detail = std::to_string(dirs.size()) + " constant directions";
  return r;
}

std::vector<Rational> elliptic_invariants(const FrobeniusModel& m, const MultiSeries& g,
                                          int pt_index, int dmax) {
  std::vector<Rational> out;
  int trust = g.exact() ? m.caps.du : std::min(g.acc(), m.caps.du);
  for (int d = 1; d <= dmax; ++d) {
    if (3 * d > trust || d > m.caps.dq)
      throw FrobjetError("CapTooSmall", "series caps below the requested degree");
    std::array<int, kMaxDim> ue{};
    ue[pt_index] = 3 * d;
    Rational c = g.coeff(ue, d);
    Rational fact = 1;
    for (int i = 2; i <= 3 * d; ++i) fact *= i;
    out.push_back(c * fact);
  }
  return out;
}

}  // namespace frobjet
