#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frobjet/series.hpp"
#include "frobjet/tensor.hpp"

#include <random>

using namespace frobjet;

namespace {
const Caps C{6, 4};
MultiSeries U(int a) { return MultiSeries::var(2, C, a); }
MultiSeries Q() { return MultiSeries::qvar(2, C); }
MultiSeries K(long p, long q = 1) { return MultiSeries::constant(2, C, Rational(p, q)); }

// small deterministic random series for ring-axiom fuzzing
MultiSeries random_series(std::mt19937_64& rng, bool unit = false) {
  MultiSeries s = K(unit ? 1 : 0);
  std::uniform_int_distribution<int> e(0, 2), c(-4, 4);
  for (int t = 0; t < 6; ++t) {
    std::array<int, kMaxDim> ue{};
    ue[0] = e(rng);
    ue[1] = e(rng);
    int qd = e(rng) % 2;
    int cc = c(rng);
    if (unit && ue[0] + ue[1] + qd == 0) continue;
    s += MultiSeries::monomial(2, C, ue, qd, Rational(cc));
  }
  return s;
}
}  // namespace

TEST_CASE("monomial order is graded lex") {
  auto a = mono::uvar(0), b = mono::uvar(1), q = mono::qvar();
  CHECK(mono::less(mono::M(0), a));
  CHECK(mono::less(q, a));           // q-degree sorts before u-exponents at equal u-degree? no:
  CHECK(mono::udeg(q) == 0);         // q has u-degree 0, so it precedes any u variable
  CHECK(mono::less(b, a));  // at equal degree, smaller u0-exponent first
  CHECK(mono::less(a, a + b));
  CHECK(!mono::less(a, a));
}

TEST_CASE("product of (1+u0)(1-u0)") {
  auto p = (K(1) + U(0)) * (K(1) - U(0));
  CHECK(p == K(1) - U(0) * U(0));
  CHECK(p.exact());
}

TEST_CASE("multiplicative inverse of 1+u0") {
  auto inv = series_inverse(K(1) + U(0));
  // alternating geometric series through the cap
  Rational sign = 1;
  for (int k = 0; k <= C.du; ++k) {
    std::array<int, kMaxDim> ue{};
    ue[0] = k;
    CHECK(inv.coeff(ue, 0) == sign);
    sign = -sign;
  }
  auto prod = inv * (K(1) + U(0));
  CHECK((prod - K(1)).zero_to_acc());
  CHECK(prod.acc() == C.du);  // the inverse is only a quotient-ring identity
}

TEST_CASE("truncation to a smaller q-cap kills q^2 u0") {
  std::array<int, kMaxDim> ue{};
  ue[0] = 1;
  auto s = MultiSeries::monomial(2, C, ue, 2, Rational(1));
  auto t = s.truncated(Caps{C.du, 1});
  CHECK(t.is_zero());
}

TEST_CASE("sqrt1p of a perfect square") {
  // (1 + u0 + 3 q u1)^2 = 1 + x
  auto g = K(1) + U(0) + Q() * U(1).scaled(3);
  auto x = g * g - K(1);
  auto r = series_sqrt1p(x);
  CHECK((r - g).zero_to_acc());
}

TEST_CASE("log1p inverts exp0") {
  auto x = U(0) + U(1) * Q() - U(1) * U(1).scaled(Rational(1, 3));
  auto e = series_exp0(x) - K(1);
  CHECK((series_log1p(e) - x).zero_to_acc());
  auto l = series_log1p(x);
  CHECK((series_exp0(l) - K(1) - x).zero_to_acc());
}

TEST_CASE("partial_u and divide_by_udeg invert each other on pure terms") {
  auto f = U(0) * U(0) * U(1) + Q() * U(1);
  // Euler: sum_a u^a d_a f has each term scaled by its u-degree
  auto euler = U(0) * f.partial_u(0) + U(1) * f.partial_u(1);
  CHECK((euler.divide_by_udeg() - f).zero_to_acc());
}

TEST_CASE("divide_by_udeg rejects u-degree-0 terms") {
  CHECK_THROWS_WITH_AS(Q().divide_by_udeg(), doctest::Contains("IntegrabilityFailure"),
                       FrobjetError);
}

TEST_CASE("accuracy ledger") {
  auto inv = series_inverse(K(1) + U(0));  // acc = du
  CHECK(inv.acc() == C.du);
  auto d = inv.partial_u(0);
  CHECK(d.acc() == C.du - 1);
  // multiplying by something of positive order restores headroom up to cap
  auto e = d * (U(1) * U(1));
  CHECK(e.acc() == C.du);  // min(acc(d) + ord(u1^2), du) = min(5 + 2, 6)
  // exact values never lose accuracy under differentiation
  CHECK(U(0).partial_u(0).exact());
}

TEST_CASE("zero_to_acc distinguishes trusted from junk orders") {
  auto s = U(0).with_acc(2) * U(0) * U(0) * U(0);  // u0^4 with acc min(2+3, du)
  CHECK(s.acc() == 5);
  std::array<int, kMaxDim> ue{};
  ue[0] = 6;
  auto junk = MultiSeries::monomial(2, C, ue, 0, Rational(7)).with_acc(5);
  CHECK(junk.zero_to_acc());   // the u0^6 term sits above acc 5
  CHECK(!s.zero_to_acc());     // u0^4 is within acc 5
}

TEST_CASE("ring axioms on deterministic random inputs") {
  std::mt19937_64 rng(20240817);
  for (int it = 0; it < 25; ++it) {
    auto a = random_series(rng), b = random_series(rng), c = random_series(rng);
    CHECK((a * b) == (b * a));
    CHECK(((a + b) * c) == (a * c + b * c));
    CHECK(((a * b) * c) == (a * (b * c)));
    auto u = random_series(rng, true);
    auto ui = series_inverse(u);
    CHECK((u * ui - K(1)).zero_to_acc());
  }
}

TEST_CASE("truncation is monotone and idempotent") {
  std::mt19937_64 rng(99);
  auto a = random_series(rng), b = random_series(rng);
  Caps small{3, 1};
  auto lhs = (a * b).truncated(small);
  auto rhs = a.truncated(small) * b.truncated(small);
  CHECK(lhs.caps() == rhs.caps());
  // products agree through the smaller cap
  CHECK((lhs - rhs).zero_to_acc());
  CHECK(a.truncated(small).truncated(small) == a.truncated(small));
}

TEST_CASE("rational matrix inverse") {
  RMat m = {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
  auto mi = rmat_inverse(m);
  CHECK(rmat_mul(m, mi) == rmat_identity(2));
  RMat s = {{Rational(2), Rational(1)}, {Rational(7), Rational(4)}};
  CHECK(rmat_mul(s, rmat_inverse(s)) == rmat_identity(2));
}

TEST_CASE("series matrix inverse by Neumann tail") {
  Mat<MultiSeries> m(2, MultiSeries::zero(2, C));
  m.at(0, 0) = K(1);
  m.at(0, 1) = Q() * series_exp0(U(1));
  m.at(1, 0) = U(0);
  m.at(1, 1) = K(1);
  auto mi = m.inverse();
  auto id = Mat<MultiSeries>::identity(2, m.zero());
  CHECK((m * mi - id).zero_to_acc());
  CHECK((mi * m - id).zero_to_acc());

  // det of the same matrix: 1 - q u0 e^{u1}
  auto d = m.det();
  auto expect = K(1) - Q() * U(0) * series_exp0(U(1));
  CHECK((d - expect).zero_to_acc());
}

TEST_CASE("eta adjoint is an involution and an anti-homomorphism") {
  RMat eta = {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
  RMat etainv = rmat_inverse(eta);
  Mat<MultiSeries> p(2, MultiSeries::zero(2, C)), r(2, MultiSeries::zero(2, C));
  p.at(0, 0) = U(0);
  p.at(0, 1) = K(2);
  p.at(1, 0) = Q();
  p.at(1, 1) = U(1) * U(0);
  r.at(0, 0) = K(1) + U(1);
  r.at(1, 0) = U(0).scaled(-3);
  r.at(1, 1) = Q() * Q();
  CHECK((p.adjoint(eta, etainv).adjoint(eta, etainv) - p).is_zero());
  auto lhs = (p * r).adjoint(eta, etainv);
  auto rhs = r.adjoint(eta, etainv) * p.adjoint(eta, etainv);
  CHECK((lhs - rhs).zero_to_acc());
}

TEST_CASE("Laurent series calculus in z") {
  Laurent<MultiSeries> f(MultiSeries::zero(2, C));
  f.set(-2, K(3));
  f.set(0, U(0));
  f.set(1, K(5));
  auto g = f.dz();
  CHECK((g.at(-3) - K(-6)).is_zero());
  CHECK(g.at(-1).is_zero());
  CHECK((g.at(0) - K(5)).is_zero());
  CHECK((f.shifted(1).residue() - K(3)).is_zero());
}
