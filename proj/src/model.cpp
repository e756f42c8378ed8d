#include "frobjet/model.hpp"

#include <sstream>

namespace frobjet {

namespace {

MultiSeries var(const FrobeniusModel& m, int a) { return MultiSeries::var(m.n, m.caps, a); }

std::string caps_note(const Caps& c) {
  std::ostringstream os;
  os << "du=" << c.du << " dq=" << c.dq;
  return os.str();
}

Rational factorial(int k) {
  Rational f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// quantum tail of the CP^2 potential: sum_d N_d q^d e^{d u1} (u2)^{3d-1}/(3d-1)!
MultiSeries cp2_quantum(const std::vector<Rational>& nd, Caps caps) {
  MultiSeries f = MultiSeries::zero(3, caps);
  for (int d = 1; d <= int(nd.size()) && d <= caps.dq; ++d) {
    if (3 * d - 1 > caps.du) break;
    std::array<int, kMaxDim> ue{};
    ue[2] = 3 * d - 1;
    MultiSeries term = MultiSeries::monomial(3, caps, ue, d, nd[d - 1] / factorial(3 * d - 1));
    term *= series_exp0(MultiSeries::var(3, caps, 1).scaled(d));
    f += term;
  }
  return f;
}

MultiSeries cp2_classical(Caps caps) {
  auto u0 = MultiSeries::var(3, caps, 0), u1 = MultiSeries::var(3, caps, 1),
       u2 = MultiSeries::var(3, caps, 2);
  return (u0 * u0 * u2).scaled(Rational(1, 2)) + (u0 * u1 * u1).scaled(Rational(1, 2));
}

// all pairwise commutators [A_a, A_b]; associativity of the product
std::vector<Mat<MultiSeries>> wdvv_residuals(const ProductTensor& t) {
  std::vector<Mat<MultiSeries>> out;
  int n = int(t.A.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) out.push_back(t.A[a] * t.A[b] - t.A[b] * t.A[a]);
  return out;
}

}  // namespace

MultiSeries FrobeniusModel::euler_apply(const MultiSeries& f) const {
  MultiSeries r = zero();
  for (int a = 0; a < n; ++a) {
    MultiSeries d = f.partial_u(a);
    if (euler_lin[a] != 0) r += MultiSeries::var(n, caps, a) * d.scaled(euler_lin[a]);
    if (euler_shift[a] != 0) r += d.scaled(euler_shift[a]);
  }
  return r;
}

ProductTensor structure_constants(const FrobeniusModel& m) {
  if (m.caps.du < 3) throw FrobjetError("BadArgument", "need du >= 3 for third derivatives");
  ProductTensor t;
  // M_a^b = eta^{bc} d_a d_c F0
  t.M = Mat<MultiSeries>(m.n, m.zero());
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b) {
      MultiSeries s = m.zero();
      for (int c = 0; c < m.n; ++c)
        if (m.eta_inv[c][b] != 0) s += m.F0.partial_u(a).partial_u(c).scaled(m.eta_inv[c][b]);
      t.M.at(a, b) = s;
    }
  t.A.reserve(m.n);
  for (int a = 0; a < m.n; ++a) t.A.push_back(t.M.map([a](const MultiSeries& s) { return s.partial_u(a); }));
  return t;
}

CheckResult check_wdvv(const FrobeniusModel& m, const ProductTensor& t) {
  CheckResult r{"wdvv", true, ""};
  for (auto& c : wdvv_residuals(t))
    if (!c.zero_to_acc()) { r.pass = false; r.detail = "nonzero commutator"; return r; }
  r.detail = "all [A_a,A_b] vanish to " + caps_note(m.caps);
  return r;
}

CheckResult check_euler_axiom(const FrobeniusModel& m, const ProductTensor& t) {
  CheckResult r{"euler_axiom", true, ""};
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b)
      for (int c = 0; c < m.n; ++c) {
        MultiSeries res =
            m.euler_apply(t.A[a].at(b, c)) - t.A[a].at(b, c).scaled(m.p[a] + m.p[b] - m.p[c]);
        if (!res.zero_to_acc()) {
          std::ostringstream os;
          os << "component (" << a << "," << b << "," << c << ") fails";
          return {"euler_axiom", false, os.str()};
        }
      }
  r.detail = "E(A_ab^c) = (p_a+p_b-p_c) A_ab^c to " + caps_note(m.caps);
  return r;
}

CheckResult check_frobenius_metric(const FrobeniusModel& m, const ProductTensor& t) {
  // total symmetry of the lowered structure constants
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b)
      for (int c = 0; c < m.n; ++c) {
        MultiSeries abc = t.lowered(m.eta, a, b, c);
        if (!(abc - t.lowered(m.eta, b, a, c)).zero_to_acc() ||
            !(abc - t.lowered(m.eta, a, c, b)).zero_to_acc())
          return {"frobenius_metric", false, "lowered structure constants not symmetric"};
      }
  // unit row: A_e = I
  for (int b = 0; b < m.n; ++b)
    for (int c = 0; c < m.n; ++c) {
      MultiSeries want = MultiSeries::constant(m.n, m.caps, b == c ? 1 : 0);
      if (!(t.A[m.e_index].at(b, c) - want).zero_to_acc())
        return {"frobenius_metric", false, "A_e is not the identity"};
    }
  // charge condition and mu-skewness: (p_a + p_b - r) eta_ab = 0
  auto mu = m.mu();
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b) {
      if ((m.p[a] + m.p[b] - m.r) * m.eta[a][b] != 0)
        return {"frobenius_metric", false, "charge condition on eta fails"};
      if ((mu[a] + mu[b]) * m.eta[a][b] != 0)
        return {"frobenius_metric", false, "mu not eta-skew"};
    }
  if (m.p[m.e_index] != 0) return {"frobenius_metric", false, "p_e nonzero"};
  return {"frobenius_metric", true, "symmetry, unit, charge and mu-skew residuals zero"};
}

VecT<MultiSeries> socle_form(const ProductTensor& t) {
  int n = int(t.A.size());
  VecT<MultiSeries> w(n, t.M.zero());
  for (int a = 0; a < n; ++a) w[a] = t.A[a].trace();
  return w;
}

VecT<MultiSeries> euler_components(const FrobeniusModel& m) {
  VecT<MultiSeries> e(m.n, m.zero());
  for (int a = 0; a < m.n; ++a)
    e[a] = var(m, a).scaled(m.euler_lin[a]) +
           MultiSeries::constant(m.n, m.caps, m.euler_shift[a]);
  return e;
}

Mat<MultiSeries> u_matrix(const FrobeniusModel& m, const ProductTensor& t) {
  auto e = euler_components(m);
  Mat<MultiSeries> u(m.n, m.zero());
  for (int a = 0; a < m.n; ++a) u += t.A[a].scaled_by(e[a]);
  return u;
}

FrobeniusModel make_point(Caps caps) {
  FrobeniusModel m;
  m.name = "point";
  m.n = 1;
  m.caps = caps;
  auto u0 = MultiSeries::var(1, caps, 0);
  m.F0 = (u0 * u0 * u0).scaled(Rational(1, 6));
  m.eta = {{Rational(1)}};
  m.eta_inv = m.eta;
  m.p = {0};
  m.r = 0;
  m.euler_lin = {1};
  m.euler_shift = {0};
  return m;
}

FrobeniusModel make_cp1(Caps caps) {
  FrobeniusModel m;
  m.name = "cp1";
  m.n = 2;
  m.caps = caps;
  auto u0 = MultiSeries::var(2, caps, 0), u1 = MultiSeries::var(2, caps, 1);
  m.F0 = (u0 * u0 * u1).scaled(Rational(1, 2)) +
         MultiSeries::qvar(2, caps) * series_exp0(u1);
  m.eta = {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
  m.eta_inv = m.eta;
  m.p = {0, 1};
  m.r = 1;
  m.euler_lin = {1, 0};
  m.euler_shift = {0, 2};
  m.q_degree = 2;
  return m;
}

FrobeniusModel make_a2(Caps caps) {
  FrobeniusModel m;
  m.name = "a2";
  m.n = 2;
  m.caps = caps;
  auto u0 = MultiSeries::var(2, caps, 0), u1 = MultiSeries::var(2, caps, 1);
  m.F0 = (u0 * u0 * u1).scaled(Rational(1, 2)) + (u1 * u1 * u1 * u1).scaled(Rational(1, 72));
  m.eta = {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
  m.eta_inv = m.eta;
  m.p = {0, Rational(1, 3)};
  m.r = Rational(1, 3);
  m.euler_lin = {1, Rational(2, 3)};
  m.euler_shift = {0, 0};
  return m;
}

FrobeniusModel make_a3(Caps caps) {
  FrobeniusModel m;
  m.name = "a3";
  m.n = 3;
  m.caps = caps;
  auto u0 = MultiSeries::var(3, caps, 0), u1 = MultiSeries::var(3, caps, 1),
       u2 = MultiSeries::var(3, caps, 2);
  m.F0 = (u0 * u0 * u2).scaled(Rational(1, 2)) + (u0 * u1 * u1).scaled(Rational(1, 2)) +
         (u1 * u1 * u2 * u2).scaled(Rational(1, 4)) +
         (u2 * u2 * u2 * u2 * u2).scaled(Rational(1, 60));
  m.eta = {{Rational(0), Rational(0), Rational(1)},
           {Rational(0), Rational(1), Rational(0)},
           {Rational(1), Rational(0), Rational(0)}};
  m.eta_inv = m.eta;
  m.p = {0, Rational(1, 4), Rational(1, 2)};
  m.r = Rational(1, 2);
  m.euler_lin = {1, Rational(3, 4), Rational(1, 2)};
  m.euler_shift = {0, 0, 0};
  return m;
}

std::vector<Rational> seed_cp2(int dq, int du) {
  Caps caps{du, dq};
  std::vector<Rational> nd;
  nd.push_back(1);  // one line through two generic points
  FrobeniusModel probe;
  probe.n = 3;
  probe.caps = caps;
  probe.eta = {{Rational(0), Rational(0), Rational(1)},
               {Rational(0), Rational(1), Rational(0)},
               {Rational(1), Rational(0), Rational(0)}};
  probe.eta_inv = probe.eta;
  for (int d = 2; d <= dq; ++d) {
    // the associativity residual at order q^d is affine in N_d: evaluate at
    // N_d = 0 and N_d = 1 and solve; the q-cap is d so every stored order is
    // fully determined by N_1..N_d
    Caps cd{caps.du, d};
    probe.caps = cd;
    auto build = [&](const Rational& x) {
      std::vector<Rational> trial = nd;
      trial.push_back(x);
      probe.F0 = cp2_classical(cd) + cp2_quantum(trial, cd);
      return wdvv_residuals(structure_constants(probe));
    };
    auto r0 = build(0), r1 = build(1);
    bool solved = false;
    Rational x;
    for (size_t i = 0; i < r0.size() && !solved; ++i)
      for (int a = 0; a < 3 && !solved; ++a)
        for (int b = 0; b < 3 && !solved; ++b) {
          MultiSeries diff = r1[i].at(a, b) - r0[i].at(a, b);
          int trust = std::min(diff.acc(), r0[i].at(a, b).acc());
          for (auto& t : diff.terms()) {
            // only coefficients inside the trusted u-range are meaningful
            if (mono::qdeg(t.first) != d || mono::udeg(t.first) > trust) continue;
            x = -r0[i].at(a, b).coeff(t.first) / t.second;
            solved = true;
            break;
          }
        }
    if (!solved)
      throw FrobjetError("SeedFailure", "associativity residual does not see N_" + std::to_string(d));
    nd.push_back(x);
    // verify the residual vanishes through the trusted orders with that value
    for (auto& mres : build(x))
      if (!mres.zero_to_acc())
        throw FrobjetError("SeedFailure", "residual not affine at degree " + std::to_string(d));
  }
  return nd;
}

FrobeniusModel make_cp2(Caps caps) {
  FrobeniusModel m;
  m.name = "cp2";
  m.n = 3;
  m.caps = caps;
  int du_seed = std::max(caps.du, 3 * caps.dq - 1);
  m.instanton = seed_cp2(caps.dq, du_seed);
  Caps seed_caps{du_seed, caps.dq};
  m.F0 = (cp2_classical(seed_caps) + cp2_quantum(m.instanton, seed_caps)).truncated(caps);
  m.eta = {{Rational(0), Rational(0), Rational(1)},
           {Rational(0), Rational(1), Rational(0)},
           {Rational(1), Rational(0), Rational(0)}};
  m.eta_inv = m.eta;
  m.p = {0, 1, 2};
  m.r = 2;
  m.euler_lin = {1, 0, -1};
  m.euler_shift = {0, 3, 0};
  m.q_degree = 3;
  return m;
}

std::vector<std::string> builtin_model_names() { return {"point", "cp1", "a2", "a3", "cp2"}; }

FrobeniusModel load_model(const std::string& name, Caps caps) {
  FrobeniusModel m;
  if (name == "point") m = make_point(caps);
  else if (name == "cp1") m = make_cp1(caps);
  else if (name == "a2") m = make_a2(caps);
  else if (name == "a3") m = make_a3(caps);
  else if (name == "cp2") m = make_cp2(caps);
  else throw FrobjetError("UnknownModel", name);
  auto t = structure_constants(m);
  for (auto& c : {check_wdvv(m, t), check_euler_axiom(m, t), check_frobenius_metric(m, t)})
    if (!c.pass) throw FrobjetError("ModelValidation", m.name + ": " + c.name + ": " + c.detail);
  return m;
}

}  // namespace frobjet
