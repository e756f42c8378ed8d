#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frobjet/jetpoly.hpp"
#include "frobjet/tensor.hpp"

using namespace frobjet;

namespace {
const JetCaps JC{5, 3, 10};
const int E = 0;  // identity direction in these tests
JetPoly W(int a, int k) { return JetPoly::wvar(2, JC, a, k); }
JetPoly U(int a) { return JetPoly::from_base(2, JC, MultiSeries::var(2, JC.base(), a)); }
JetPoly Q() { return JetPoly::from_base(2, JC, MultiSeries::qvar(2, JC.base())); }
JetPoly K(long p, long q = 1) { return JetPoly::constant(2, JC, Rational(p, q)); }
}  // namespace

TEST_CASE("jet monomial packing round-trips") {
  JMono m;
  jmono::set_exp(m, 2, 7, 3);
  jmono::set_exp(m, 0, 1, 2);
  CHECK(jmono::exp_at(m, 2, 7) == 3);
  CHECK(jmono::exp_at(m, 0, 1) == 2);
  CHECK(jmono::weight(m) == 7 * 3 + 1 * 2);
  CHECK(jmono::jet_order(m) == 7);
  jmono::set_exp(m, 2, 7, 0);
  CHECK(jmono::jet_order(m) == 1);
}

TEST_CASE("total derivative of a base function") {
  // D(u^a) = w^a_1 + delta_{a,e}
  CHECK((U(0).total_derivative(E) - W(0, 1) - K(1)).is_zero());
  CHECK((U(1).total_derivative(E) - W(1, 1)).is_zero());
  // D(q) = 0: the Novikov variable is a constant of the flow
  CHECK(Q().total_derivative(E).is_zero());
  // D(w^a_k) = w^a_{k+1}
  CHECK((W(1, 2).total_derivative(E) - W(1, 3)).is_zero());
}

TEST_CASE("iterated derivatives of flat coordinates at the basepoint") {
  // (D^n u^a)(P) = delta_{n,1} delta^a_e in the shifted variables
  for (int a = 0; a < 2; ++a) {
    JetPoly f = U(a);
    CHECK(f.at_basepoint() == 0);
    f = f.total_derivative(E);
    CHECK(f.at_basepoint() == (a == E ? 1 : 0));
    for (int n = 2; n <= 4; ++n) {
      f = f.total_derivative(E);
      CHECK(f.at_basepoint() == 0);
    }
  }
}

TEST_CASE("total derivative is a derivation") {
  auto f = U(0) * W(1, 1) + Q() * U(1) * U(1);
  auto g = W(0, 2) + U(1) * W(1, 1);
  auto lhs = (f * g).total_derivative(E);
  auto rhs = f.total_derivative(E) * g + f * g.total_derivative(E);
  CHECK((lhs - rhs).zero_to_acc());
}

TEST_CASE("grading derivation counts jet weight") {
  auto m = W(0, 2) * W(1, 1) * W(1, 1);  // weight 4
  CHECK((m.dilaton_grading() - m.scaled(4)).is_zero());
  CHECK(U(0).dilaton_grading().is_zero());
  // additivity on products: Q(fg) = Q(f)g + fQ(g)
  auto f = U(0) * W(1, 3);
  auto g = W(0, 1) * W(0, 1);
  CHECK((((f * g).dilaton_grading()) - (f.dilaton_grading() * g + f * g.dilaton_grading()))
            .is_zero());
}

TEST_CASE("unshifted grading field") {
  // Q(u^a_2 u^b_1) = 3 u^a_2 u^b_1 in the unshifted coordinates; here with
  // a = 1, b = e = 0 so u^b_1 = w^b_1 + 1
  auto f = W(1, 2) * (W(0, 1) + K(1));
  CHECK((f.dilaton_apply(E) - f.scaled(3)).is_zero());
  CHECK(U(0).dilaton_apply(E).is_zero());
  // [Q, D] = D in the unshifted coordinates
  auto g = U(0) * U(0) * W(1, 2) + Q() * W(0, 1) + U(1);
  auto dg = g.total_derivative(E);
  CHECK((dg.dilaton_apply(E) - g.dilaton_apply(E).total_derivative(E) - dg).zero_to_acc());
}

TEST_CASE("commutator of grading and total derivative") {
  // [Q, D] = D - d/du^e: every piece of D raises weight by one except the
  // translation part delta_{a,e} d/du^a, which has weight zero
  auto f = U(0) * U(0) * W(1, 2) + Q() * W(0, 1) + U(1);
  auto lhs = f.total_derivative(E).dilaton_grading() - f.dilaton_grading().total_derivative(E);
  CHECK((lhs - f.total_derivative(E) + f.partial_base(E)).zero_to_acc());
}

TEST_CASE("jet partials and their commutation") {
  auto f = U(0) * W(0, 1) * W(0, 1) * W(1, 2);
  CHECK((f.partial_jet(0, 1) - U(0) * W(0, 1).scaled(2) * W(1, 2)).is_zero());
  CHECK((f.partial_jet(1, 2) - U(0) * W(0, 1) * W(0, 1)).is_zero());
  CHECK((f.partial_base(0) - W(0, 1) * W(0, 1) * W(1, 2)).is_zero());
  auto ab = f.partial_jet(0, 1).partial_base(0);
  auto ba = f.partial_base(0).partial_jet(0, 1);
  CHECK((ab - ba).is_zero());
}

TEST_CASE("base part and basepoint evaluation") {
  auto f = U(0) * U(1) + W(0, 1) * U(0) + K(7) + Q().scaled(2);
  auto b = f.base_part();
  CHECK(b.constant_term() == 7);
  std::array<int, kMaxDim> ue{};
  ue[0] = 1;
  ue[1] = 1;
  CHECK(b.coeff(ue, 0) == 1);
  CHECK(f.at_basepoint() == 7);  // q = 0 at the basepoint as well
}

TEST_CASE("weight cap drops are recorded in the w-accuracy") {
  JetCaps tight{5, 3, 2};
  auto w1 = JetPoly::wvar(2, tight, 0, 1);
  auto w2 = JetPoly::wvar(2, tight, 0, 2);
  auto p = w1 * w2;  // weight 3 > cap: dropped
  CHECK(p.is_zero());
  CHECK(p.acc_w() == 2);
  CHECK(!w1.exact_w() == false);  // factors themselves stay exact
  // partial_jet lowers acc_w by the weight of the removed variable
  auto g = (w1 * w1).with_acc(kAccExact, 2).partial_jet(0, 1);
  CHECK(g.acc_w() == 1);
}

TEST_CASE("jet order overflow throws rather than silently truncating") {
  auto top = JetPoly::wvar(2, JetCaps{5, 3, 9}, 0, 8);
  CHECK_THROWS_WITH_AS(top.total_derivative(E), doctest::Contains("JetOrderOverflow"),
                       FrobjetError);
}

TEST_CASE("matrix inverse over the jet ring") {
  // X = I + w^c_1 A_c with constant A: invert and check both sides
  Mat<JetPoly> x(2, JetPoly::zero(2, JC));
  x.at(0, 0) = K(1) + W(0, 1);
  x.at(0, 1) = W(1, 1).scaled(2);
  x.at(1, 0) = W(1, 1) * Q();
  x.at(1, 1) = K(1) + W(0, 1).scaled(-1);
  auto xi = x.inverse();
  auto id = Mat<JetPoly>::identity(2, x.zero());
  CHECK((x * xi - id).zero_to_acc());
  CHECK((xi * x - id).zero_to_acc());
}
