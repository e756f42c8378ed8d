#pragma once

#include "frobjet/scalar.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

namespace frobjet {

// Truncated multivariate power series over Q in flat coordinates u^0..u^{N-1}
// and the Novikov variable q. Sparse, canonically ordered (graded lex), with
// per-value accuracy tracking: acc() is the u-degree through which the stored
// coefficients are trustworthy. kAccExact means no truncation event ever
// happened (the value is globally exact, not merely exact in the quotient).

constexpr int kMaxDim = 6;
constexpr int kAccExact = 1 << 20;

struct Caps {
  int du = 0;
  int dq = 0;
  friend bool operator==(const Caps&, const Caps&) = default;
};

namespace mono {
using M = std::uint64_t;

inline int uexp(M m, int a) { return int((m >> (8 * a)) & 0xff); }
inline int qdeg(M m) { return int((m >> 48) & 0xff); }
inline int udeg(M m) {
  int s = 0;
  for (int a = 0; a < kMaxDim; ++a) s += uexp(m, a);
  return s;
}
inline M make(const std::array<int, kMaxDim>& ue, int qd) {
  M m = 0;
  for (int a = 0; a < kMaxDim; ++a) m |= M(ue[a] & 0xff) << (8 * a);
  m |= M(qd & 0xff) << 48;
  return m;
}
inline M uvar(int a) { return M(1) << (8 * a); }
inline M qvar() { return M(1) << 48; }
// graded lex: u-degree, then q-degree, then exponents u^0..u^{N-1}
inline bool less(M x, M y) {
  int dx = udeg(x), dy = udeg(y);
  if (dx != dy) return dx < dy;
  int qx = qdeg(x), qy = qdeg(y);
  if (qx != qy) return qx < qy;
  for (int a = 0; a < kMaxDim; ++a) {
    int ex = uexp(x, a), ey = uexp(y, a);
    if (ex != ey) return ex < ey;
  }
  return false;
}
}  // namespace mono

class MultiSeries {
 public:
  using Term = std::pair<mono::M, Rational>;

  MultiSeries() = default;
  MultiSeries(int n, Caps caps) : n_(n), caps_(caps) {}

  static MultiSeries zero(int n, Caps caps) { return {n, caps}; }
  static MultiSeries constant(int n, Caps caps, const Rational& c) {
    MultiSeries s(n, caps);
    if (c != 0) s.terms_.push_back({0, c});
    return s;
  }
  static MultiSeries var(int n, Caps caps, int a) {
    MultiSeries s(n, caps);
    if (caps.du >= 1) s.terms_.push_back({mono::uvar(a), Rational(1)});
    return s;
  }
  static MultiSeries qvar(int n, Caps caps) {
    MultiSeries s(n, caps);
    if (caps.dq >= 1) s.terms_.push_back({mono::qvar(), Rational(1)});
    return s;
  }
  static MultiSeries monomial(int n, Caps caps, const std::array<int, kMaxDim>& ue,
                              int qd, const Rational& c) {
    MultiSeries s(n, caps);
    mono::M m = mono::make(ue, qd);
    if (c != 0 && mono::udeg(m) <= caps.du && qd <= caps.dq) s.terms_.push_back({m, c});
    return s;
  }

  int dim() const { return n_; }
  const Caps& caps() const { return caps_; }
  int acc() const { return acc_; }
  bool exact() const { return acc_ == kAccExact; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  MultiSeries with_acc(int acc) const {
    MultiSeries r = *this;
    r.acc_ = acc;
    return r;
  }

  void check_compat(const MultiSeries& o) const {
    if (n_ != o.n_) throw dim_mismatch("series dimension");
    if (!(caps_ == o.caps_)) throw cap_mismatch("series caps");
  }

  Rational coeff(mono::M m) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, mono::M k) { return mono::less(t.first, k); });
    if (it != terms_.end() && it->first == m) return it->second;
    return Rational(0);
  }
  Rational coeff(const std::array<int, kMaxDim>& ue, int qd) const {
    return coeff(mono::make(ue, qd));
  }
  Rational constant_term() const { return coeff(mono::M(0)); }

  // u-degree-0 part: a q-series, constant on the manifold
  MultiSeries u_constant_part() const {
    MultiSeries r(n_, caps_);
    r.acc_ = acc_;
    for (auto& t : terms_)
      if (mono::udeg(t.first) == 0) r.terms_.push_back(t);
    return r;
  }

  int ord_u() const {  // min u-degree of stored terms; large if zero
    int o = kAccExact;
    for (auto& t : terms_) o = std::min(o, mono::udeg(t.first));
    return o;
  }

  friend MultiSeries operator+(const MultiSeries& a, const MultiSeries& b) {
    a.check_compat(b);
    MultiSeries r(a.n_, a.caps_);
    r.acc_ = add_acc(a, b);
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    auto i = a.terms_.begin(), j = b.terms_.begin();
    while (i != a.terms_.end() || j != b.terms_.end()) {
      if (j == b.terms_.end() || (i != a.terms_.end() && mono::less(i->first, j->first))) {
        r.terms_.push_back(*i++);
      } else if (i == a.terms_.end() || mono::less(j->first, i->first)) {
        r.terms_.push_back(*j++);
      } else {
        Rational c = i->second + j->second;
        if (c != 0) r.terms_.push_back({i->first, c});
        ++i, ++j;
      }
    }
    return r;
  }
  friend MultiSeries operator-(const MultiSeries& a, const MultiSeries& b) { return a + (-b); }
  MultiSeries operator-() const {
    MultiSeries r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }
  MultiSeries& operator+=(const MultiSeries& o) { *this = *this + o; return *this; }
  MultiSeries& operator-=(const MultiSeries& o) { *this = *this - o; return *this; }

  MultiSeries scaled(const Rational& c) const {
    MultiSeries r(n_, caps_);
    r.acc_ = acc_;
    if (c == 0) { r.acc_ = kAccExact; return r; }
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.second *= c;
    return r;
  }

  friend MultiSeries operator*(const MultiSeries& a, const MultiSeries& b) {
    a.check_compat(b);
    MultiSeries r(a.n_, a.caps_);
    if (a.is_zero() || b.is_zero()) return r;
    std::unordered_map<mono::M, Rational> acc_map;
    acc_map.reserve(a.terms_.size() * 2);
    bool dropped = false;
    for (auto& ta : a.terms_) {
      int dua = mono::udeg(ta.first), dqa = mono::qdeg(ta.first);
      for (auto& tb : b.terms_) {
        if (dua + mono::udeg(tb.first) > a.caps_.du ||
            dqa + mono::qdeg(tb.first) > a.caps_.dq) {
          dropped = true;
          continue;
        }
        acc_map[ta.first + tb.first] += ta.second * tb.second;
      }
    }
    r.terms_.reserve(acc_map.size());
    for (auto& kv : acc_map)
      if (kv.second != 0) r.terms_.push_back({kv.first, std::move(kv.second)});
    r.sort_terms();
    r.acc_ = mul_acc(a, b, dropped);
    return r;
  }
  MultiSeries& operator*=(const MultiSeries& o) { *this = *this * o; return *this; }

  // d/du^a; loses one u-order of accuracy unless globally exact.
  MultiSeries partial_u(int a) const {
    MultiSeries r(n_, caps_);
    for (auto& t : terms_) {
      int e = mono::uexp(t.first, a);
      if (e == 0) continue;
      r.terms_.push_back({t.first - mono::uvar(a), t.second * e});
    }
    r.sort_terms();
    r.acc_ = exact() ? kAccExact : acc_ - 1;
    return r;
  }

  // termwise division by the total u-degree (Poincare/Euler integration step);
  // requires every term to have u-degree >= 1.
  MultiSeries divide_by_udeg() const {
    MultiSeries r(n_, caps_);
    r.terms_ = terms_;
    for (auto& t : r.terms_) {
      int d = mono::udeg(t.first);
      if (d == 0) throw FrobjetError("IntegrabilityFailure", "u-degree-0 term in exact one-form");
      t.second /= d;
    }
    r.acc_ = exact() ? kAccExact : std::min(acc_ + 1, caps_.du);
    return r;
  }

  MultiSeries truncated(Caps nc) const {
    MultiSeries r(n_, nc);
    bool dropped = false;
    for (auto& t : terms_) {
      if (mono::udeg(t.first) <= nc.du && mono::qdeg(t.first) <= nc.dq)
        r.terms_.push_back(t);
      else
        dropped = true;
    }
    // dropping real terms is a truncation event even for a globally exact
    // input: the result is exact only as a quotient-ring element
    r.acc_ = (exact() && !dropped) ? kAccExact : std::min(acc_, nc.du);
    return r;
  }

  MultiSeries with_dim(int n) const {  // reinterpret in a wider/narrower variable set
    for (auto& t : terms_)
      for (int a = n; a < kMaxDim; ++a)
        if (mono::uexp(t.first, a) != 0) throw dim_mismatch("nonzero exponent beyond new dim");
    MultiSeries r = *this;
    r.n_ = n;
    return r;
  }

  // truncate to the trusted region: keep only terms with udeg <= min(acc, du)
  MultiSeries trusted_part() const {
    if (exact()) return *this;
    MultiSeries r(n_, caps_);
    r.acc_ = acc_;
    for (auto& t : terms_)
      if (mono::udeg(t.first) <= acc_) r.terms_.push_back(t);
    return r;
  }

  bool zero_to_acc() const {
    if (exact()) return terms_.empty();
    if (acc_ < 0) throw cap_exhausted("residual accuracy below zero");
    for (auto& t : terms_)
      if (mono::udeg(t.first) <= acc_) return false;
    return true;
  }

  Rational eval(const std::vector<Rational>& u, const Rational& q) const {
    Rational s = 0;
    for (auto& t : terms_) {
      Rational v = t.second;
      for (int a = 0; a < n_; ++a)
        for (int e = 0; e < mono::uexp(t.first, a); ++e) v *= u[a];
      for (int e = 0; e < mono::qdeg(t.first); ++e) v *= q;
      s += v;
    }
    return s;
  }

  std::string str() const;

  friend bool operator==(const MultiSeries& a, const MultiSeries& b) {
    return a.n_ == b.n_ && a.caps_ == b.caps_ && a.terms_ == b.terms_;
  }

  void sort_terms() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& x, const Term& y) { return mono::less(x.first, y.first); });
  }

 private:
  static int eff(const MultiSeries& s) { return s.acc_; }
  static int add_acc(const MultiSeries& a, const MultiSeries& b) {
    if (a.exact() && b.exact()) return kAccExact;
    return std::min(std::min(eff(a), eff(b)), a.caps_.du);
  }
  static int mul_acc(const MultiSeries& a, const MultiSeries& b, bool dropped) {
    if (a.exact() && b.exact() && !dropped) return kAccExact;
    long r = a.caps_.du;
    if (!a.exact()) r = std::min(r, long(a.acc_) + b.ord_u());
    if (!b.exact()) r = std::min(r, long(b.acc_) + a.ord_u());
    return int(std::min(r, long(a.caps_.du)));
  }

  int n_ = 0;
  Caps caps_{};
  int acc_ = kAccExact;
  std::vector<Term> terms_;
};

// --- series functions (argument must have zero constant term) ---

namespace detail {
// evaluate sum_k c_k x^k by Horner with L = du+dq+1 coefficients (x nilpotent)
inline MultiSeries horner(const MultiSeries& x, const std::vector<Rational>& c) {
  MultiSeries r = MultiSeries::constant(x.dim(), x.caps(), c.back());
  for (int k = int(c.size()) - 2; k >= 0; --k)
    r = r * x + MultiSeries::constant(x.dim(), x.caps(), c[k]);
  // composition's coefficient at degree d depends on x only through degree d,
  // so the argument's accuracy is the result's accuracy
  return x.exact() ? r : r.with_acc(x.acc());
}
inline int comp_len(const MultiSeries& x) { return x.caps().du + x.caps().dq + 2; }
}  // namespace detail

inline MultiSeries series_exp0(const MultiSeries& x) {
  if (x.constant_term() != 0) throw FrobjetError("BadArgument", "exp0 needs zero constant term");
  int L = detail::comp_len(x);
  std::vector<Rational> c(L, Rational(1));
  for (int k = 1; k < L; ++k) c[k] = c[k - 1] / k;
  return detail::horner(x, c);
}

inline MultiSeries series_log1p(const MultiSeries& x) {
  if (x.constant_term() != 0) throw FrobjetError("BadArgument", "log1p needs zero constant term");
  int L = detail::comp_len(x);
  std::vector<Rational> c(L, Rational(0));
  for (int k = 1; k < L; ++k) c[k] = Rational(k % 2 ? 1 : -1, k);
  return detail::horner(x, c);
}

inline MultiSeries series_sqrt1p(const MultiSeries& x) {
  if (x.constant_term() != 0) throw FrobjetError("BadArgument", "sqrt1p needs zero constant term");
  int L = detail::comp_len(x);
  std::vector<Rational> c(L);
  c[0] = 1;
  for (int k = 1; k < L; ++k) c[k] = c[k - 1] * (Rational(1, 2) - (k - 1)) / k;
  return detail::horner(x, c);
}

inline MultiSeries series_inverse(const MultiSeries& s) {
  Rational c0 = s.constant_term();
  if (c0 == 0) throw FrobjetError("BadArgument", "inverse needs invertible constant term");
  MultiSeries x = s.scaled(1 / c0) - MultiSeries::constant(s.dim(), s.caps(), Rational(1));
  int L = detail::comp_len(x);
  std::vector<Rational> c(L);
  for (int k = 0; k < L; ++k) c[k] = (k % 2 ? -1 : 1);
  return detail::horner(x, c).scaled(1 / c0);
}

inline std::string MultiSeries::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto& t : terms_) {
    if (!out.empty()) out += " + ";
    out += "(" + t.second.str() + ")";
    for (int a = 0; a < n_; ++a)
      if (int e = mono::uexp(t.first, a); e > 0)
        out += "*u" + std::to_string(a) + (e > 1 ? "^" + std::to_string(e) : "");
    if (int d = mono::qdeg(t.first); d > 0)
      out += "*q" + (d > 1 ? "^" + std::to_string(d) : "");
  }
  return out;
}

}  // namespace frobjet
