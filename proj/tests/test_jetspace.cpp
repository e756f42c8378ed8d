#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frobjet/jetspace.hpp"

using namespace frobjet;

namespace {
const Caps C{9, 3};
const int ORDER = 4;
const int WR = 2 * ORDER + 2;

JetContext make(const std::string& name, ThetaTag tag = ThetaTag::symmetric) {
  auto m = load_model(name, C);
  auto t = structure_constants(m);
  auto sol = build_theta(m, t, 5, tag);
  return make_jet_context(m, t, sol, ORDER, 4, WR);
}

// coefficient tables agree through level mtop
bool agree(const JetOp& a, const JetOp& b, int mtop) {
  JetPoly z = JetPoly::zero(a.n, a.caps);
  for (int m = 0; m <= mtop; ++m)
    for (int d = 0; d < a.n; ++d) {
      JetPoly diff = (m <= a.lmax() ? a.c[m][d] : z) - (m <= b.lmax() ? b.c[m][d] : z);
      if (!diff.zero_to_acc()) return false;
    }
  return true;
}
}  // namespace

TEST_CASE("X = I + w^c_1 A_c and its derived identities") {
  auto c = make("cp1");
  // row e of X recovers the unshifted first jets
  for (int b = 0; b < 2; ++b) {
    JetPoly want = JetPoly::wvar(2, c.jc, b, 1) +
                   JetPoly::constant(2, c.jc, b == c.m.e_index ? 1 : 0);
    CHECK((c.X.at(c.m.e_index, b) - want).zero_to_acc());
  }
  CHECK((c.X * c.Xinv - Mat<JetPoly>::identity(2, c.jzero())).zero_to_acc());
  auto r = check_x_identities(c);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("P_1 = X, P_2 = dX + z X^2, P_0 handled as z^{-1}") {
  auto c = make("cp1");
  CHECK((c.P[2][0] - c.dtot(c.X)).zero_to_acc());
  CHECK((c.P[2][1] - c.X * c.X).zero_to_acc());
  // P_{l+1} at z^0 is the l-th total derivative of X
  Mat<JetPoly> dx = c.X;
  for (int l = 1; l < c.pmax; ++l) {
    dx = c.dtot(dx);
    CHECK((c.P[l + 1][0] - dx).zero_to_acc());
  }
}

TEST_CASE("sigma on coordinates and the evolutionary identification") {
  auto c = make("cp1");
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      JetPoly ub = c.lift(MultiSeries::var(2, C, b));
      CHECK((sigma_apply(c, 0, a, ub) - c.X.at(a, b)).zero_to_acc());
      for (int k = 1; k < c.pmax; ++k) CHECK(sigma_apply(c, k, a, ub).is_zero());
    }
  // sigma_{0,e} is the total derivative
  CHECK(agree(sigma_op(c, 0, c.m.e_index), dtot_op(c), c.pmax - 1));
  // sigma_j X = 0 for j > 1
  for (int j = 2; j < c.pmax; ++j)
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 2; ++i)
        for (int b = 0; b < 2; ++b) CHECK(sigma_apply(c, j, a, c.X.at(i, b)).zero_to_acc());
  // sigma_{1,a} log det X = sigma_{0,a} Tr M
  JetPoly trm = c.lift_mat(c.t.M).trace();
  for (int a = 0; a < 2; ++a)
    CHECK((sigma_apply(c, 1, a, c.logdetX) - sigma_apply(c, 0, a, trm)).zero_to_acc());
}

TEST_CASE("sigma commutators, operator level plus double application samples") {
  auto c = make("cp1");
  CHECK(sigma_commutators(c, 3).pass);
  // double application on low-order corpus members (jet order <= ORDER - 1 so
  // the truncated operator tables stay complete on both passes)
  auto corpus = jet_corpus(c, 3, 2, 1);
  int checked = 0;
  for (auto& f : corpus) {
    if (f.jet_order() > ORDER - 1) continue;
    if (++checked > 24) break;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        JetPoly lhs = sigma_apply(c, 0, a, sigma_apply(c, 1, b, f)) -
                      sigma_apply(c, 1, b, sigma_apply(c, 0, a, f));
        JetPoly rhs = c.jzero();
        for (int d = 0; d < 2; ++d) rhs -= c.Wt[a].at(b, d) * sigma_apply(c, 0, d, f);
        CHECK((lhs - rhs).zero_to_acc());
      }
  }
  CHECK(checked > 10);
}

TEST_CASE("grading and shift relations") {
  auto c = make("cp1");
  CHECK(check_grading_relations(c, 3).pass);
}

TEST_CASE("dee frame: basepoint triangularity and commutativity") {
  auto c = make("cp1");
  CHECK(check_dee_basepoint(c).pass);
  CHECK(dee_commutators(c, 2).pass);
  // frame change: Theta^{-1}-weighted dee recovers sigma
  auto ti = c.sol.inverse_coefs();
  for (int k = 0; k <= 2; ++k)
    for (int a = 0; a < 2; ++a) {
      JetOp acc = JetOp::zero(2, c.jc, c.pmax - 1);
      for (int j = 0; j <= k; ++j)
        for (int b = 0; b < 2; ++b) acc.add_scaled(dee_op(c, k - j, b), c.lift(ti[j].at(a, b)));
      CHECK(agree(acc, sigma_op(c, k, a), c.pmax - 1));
    }
}

TEST_CASE("s-series and the intrinsic Q and e") {
  auto c = make("cp1");
  CHECK(check_gg_recursion(c).pass);
  for (int a = 0; a < 2; ++a)
    CHECK(c.s[1][a].at_basepoint() == (a == c.m.e_index ? Rational(-1) : Rational(0)));
  // Q and e recovered from the frame agree with their coordinate forms
  auto corpus = jet_corpus(c, 3, 2, 1);
  int checked = 0;
  for (size_t i = corpus.size() - 16; i < corpus.size(); ++i) {
    auto& f = corpus[i];
    ++checked;
    auto [q, e] = q_e_intrinsic(c, f);
    CHECK((q - f.dilaton_apply(c.m.e_index)).zero_to_acc());
    CHECK((e - f.partial_base(c.m.e_index)).zero_to_acc());
  }
  CHECK(checked == 16);
}

TEST_CASE("filtration degrees") {
  auto c = make("cp1");
  for (int a = 0; a < 2; ++a) {
    CHECK(filtration_degree(c, c.lift(MultiSeries::var(2, C, a))) == 0);
    CHECK(filtration_degree(c, JetPoly::wvar(2, c.jc, a, 2)) == 2);
  }
  CHECK(filtration_degree(c, c.logdetX) == 1);
  CHECK(filtration_degree(c, c.X.at(0, 1)) == 1);
}

TEST_CASE("second model: a2 frame passes the same battery") {
  auto c = make("a2");
  CHECK(check_x_identities(c).pass);
  CHECK(sigma_commutators(c, 2).pass);
  CHECK(check_grading_relations(c, 2).pass);
  CHECK(check_gg_recursion(c).pass);
  CHECK(check_dee_basepoint(c).pass);
}
