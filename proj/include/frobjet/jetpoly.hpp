#pragma once

#include "frobjet/series.hpp"

#include <cstdint>
#include <functional>

namespace frobjet {

// Differential polynomials on the jet space: base coefficients are functions
// of u (MultiSeries monomials) times monomials in the shifted jet variables
// w^a_k = u^a_k - delta_{k,1} delta^a_e, 1 <= k <= 8, a < 3.
// Weight of w^a_k is k; the ring truncates at a weight cap (the context's
// working cap, chosen with headroom above the reporting cap).

constexpr int kMaxJetDim = 3;
constexpr int kMaxJetOrder = 8;

struct JetCaps {
  int du = 0;
  int dq = 0;
  int w = 0;
  friend bool operator==(const JetCaps&, const JetCaps&) = default;
  Caps base() const { return {du, dq}; }
};

struct JMono {
  std::uint64_t j0 = 0, j1 = 0;  // nibble exponents for slots 0..15 / 16..23
  mono::M base = 0;
  friend bool operator==(const JMono&, const JMono&) = default;
};

namespace jmono {
inline int slot(int a, int k) { return (k - 1) * kMaxJetDim + a; }
inline int exp_at(const JMono& m, int a, int k) {
  int s = slot(a, k);
  return int(((s < 16 ? m.j0 >> (4 * s) : m.j1 >> (4 * (s - 16)))) & 0xf);
}
inline void set_exp(JMono& m, int a, int k, int e) {
  int s = slot(a, k);
  if (s < 16) {
    m.j0 = (m.j0 & ~(std::uint64_t(0xf) << (4 * s))) | (std::uint64_t(e & 0xf) << (4 * s));
  } else {
    int t = s - 16;
    m.j1 = (m.j1 & ~(std::uint64_t(0xf) << (4 * t))) | (std::uint64_t(e & 0xf) << (4 * t));
  }
}
inline int weight(const JMono& m) {
  int w = 0;
  for (int k = 1; k <= kMaxJetOrder; ++k)
    for (int a = 0; a < kMaxJetDim; ++a) w += k * exp_at(m, a, k);
  return w;
}
inline int jet_order(const JMono& m) {
  for (int k = kMaxJetOrder; k >= 1; --k)
    for (int a = 0; a < kMaxJetDim; ++a)
      if (exp_at(m, a, k)) return k;
  return 0;
}
inline JMono mul(const JMono& x, const JMono& y) {
  // nibble-wise addition is safe while exponents stay small (weight caps keep
  // every exponent <= weight cap <= 15)
  return {x.j0 + y.j0, x.j1 + y.j1, x.base + y.base};
}
inline bool less(const JMono& x, const JMono& y) {
  int wx = weight(x), wy = weight(y);
  if (wx != wy) return wx < wy;
  if (x.j0 != y.j0) return x.j0 < y.j0;
  if (x.j1 != y.j1) return x.j1 < y.j1;
  return mono::less(x.base, y.base);
}
struct Hash {
  std::size_t operator()(const JMono& m) const {
    std::uint64_t h = m.j0 * 0x9e3779b97f4a7c15ull;
    h ^= m.j1 + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= m.base + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return std::size_t(h);
  }
};
}  // namespace jmono

class JetPoly {
 public:
  using Term = std::pair<JMono, Rational>;

  JetPoly() = default;
  JetPoly(int n, JetCaps caps) : n_(n), caps_(caps) {
    if (n > kMaxJetDim) throw dim_mismatch("jet ring supports dimension <= 3");
  }

  static JetPoly zero(int n, JetCaps caps) { return {n, caps}; }
  static JetPoly constant(int n, JetCaps caps, const Rational& c) {
    JetPoly p(n, caps);
    if (c != 0) p.terms_.push_back({JMono{}, c});
    return p;
  }
  static JetPoly wvar(int n, JetCaps caps, int a, int k) {
    JetPoly p(n, caps);
    JMono m;
    jmono::set_exp(m, a, k, 1);
    if (k <= caps.w) p.terms_.push_back({m, Rational(1)});
    return p;
  }
  static JetPoly from_base(int n, JetCaps caps, const MultiSeries& s) {
    if (s.dim() != n || s.caps().du != caps.du || s.caps().dq != caps.dq)
      throw cap_mismatch("base series caps vs jet caps");
    JetPoly p(n, caps);
    for (auto& t : s.terms()) p.terms_.push_back({JMono{0, 0, t.first}, t.second});
    p.acc_u_ = s.acc();
    return p;
  }

  int dim() const { return n_; }
  const JetCaps& caps() const { return caps_; }
  int acc_u() const { return acc_u_; }
  int acc_w() const { return acc_w_; }
  bool exact_u() const { return acc_u_ == kAccExact; }
  bool exact_w() const { return acc_w_ == kAccExact; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  JetPoly with_acc(int au, int aw) const {
    JetPoly r = *this;
    r.acc_u_ = au;
    r.acc_w_ = aw;
    return r;
  }

  int jet_order() const {
    int k = 0;
    for (auto& t : terms_) k = std::max(k, jmono::jet_order(t.first));
    return k;
  }
  int ord_u() const {
    int o = kAccExact;
    for (auto& t : terms_) o = std::min(o, mono::udeg(t.first.base));
    return o;
  }
  int ord_w() const {
    int o = kAccExact;
    for (auto& t : terms_) o = std::min(o, jmono::weight(t.first));
    return o;
  }

  void check_compat(const JetPoly& o) const {
    if (n_ != o.n_) throw dim_mismatch("jet dimension");
    if (!(caps_ == o.caps_)) throw cap_mismatch("jet caps");
  }

  friend JetPoly operator+(const JetPoly& a, const JetPoly& b) {
    a.check_compat(b);
    JetPoly r(a.n_, a.caps_);
    r.acc_u_ = acc_min(a.acc_u_, b.acc_u_, a.caps_.du, a.exact_u() && b.exact_u());
    r.acc_w_ = acc_min(a.acc_w_, b.acc_w_, a.caps_.w, a.exact_w() && b.exact_w());
    auto i = a.terms_.begin(), j = b.terms_.begin();
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    while (i != a.terms_.end() || j != b.terms_.end()) {
      if (j == b.terms_.end() || (i != a.terms_.end() && jmono::less(i->first, j->first))) {
        r.terms_.push_back(*i++);
      } else if (i == a.terms_.end() || jmono::less(j->first, i->first)) {
        r.terms_.push_back(*j++);
      } else {
        Rational c = i->second + j->second;
        if (c != 0) r.terms_.push_back({i->first, c});
        ++i, ++j;
      }
    }
    return r;
  }
  friend JetPoly operator-(const JetPoly& a, const JetPoly& b) { return a + (-b); }
  JetPoly operator-() const {
    JetPoly r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }
  JetPoly& operator+=(const JetPoly& o) { *this = *this + o; return *this; }
  JetPoly& operator-=(const JetPoly& o) { *this = *this - o; return *this; }

  JetPoly scaled(const Rational& c) const {
    JetPoly r = *this;
    if (c == 0) return zero(n_, caps_);
    for (auto& t : r.terms_) t.second *= c;
    return r;
  }

  friend JetPoly operator*(const JetPoly& a, const JetPoly& b) {
    a.check_compat(b);
    JetPoly r(a.n_, a.caps_);
    if (a.is_zero() || b.is_zero()) return r;
    std::unordered_map<JMono, Rational, jmono::Hash> m;
    m.reserve(2 * a.terms_.size());
    bool drop_u = false, drop_w = false;
    for (auto& ta : a.terms_) {
      int dua = mono::udeg(ta.first.base), dqa = mono::qdeg(ta.first.base);
      int wa = jmono::weight(ta.first);
      for (auto& tb : b.terms_) {
        if (dua + mono::udeg(tb.first.base) > a.caps_.du ||
            dqa + mono::qdeg(tb.first.base) > a.caps_.dq) {
          drop_u = true;
          continue;
        }
        if (wa + jmono::weight(tb.first) > a.caps_.w) {
          drop_w = true;
          continue;
        }
        m[jmono::mul(ta.first, tb.first)] += ta.second * tb.second;
      }
    }
    r.terms_.reserve(m.size());
    for (auto& kv : m)
      if (kv.second != 0) r.terms_.push_back({kv.first, std::move(kv.second)});
    r.sort_terms();
    r.acc_u_ = mul_acc(a.acc_u_, b.acc_u_, a.ord_u(), b.ord_u(), a.caps_.du, drop_u);
    r.acc_w_ = mul_acc(a.acc_w_, b.acc_w_, a.ord_w(), b.ord_w(), a.caps_.w, drop_w);
    return r;
  }
  JetPoly& operator*=(const JetPoly& o) { *this = *this * o; return *this; }

  // d/du^a on base coefficients (the operator ∂_{0,a})
  JetPoly partial_base(int a) const {
    JetPoly r(n_, caps_);
    for (auto& t : terms_) {
      int e = mono::uexp(t.first.base, a);
      if (e == 0) continue;
      JMono m = t.first;
      m.base -= mono::uvar(a);
      r.terms_.push_back({m, t.second * e});
    }
    r.sort_terms();
    r.acc_u_ = exact_u() ? kAccExact : acc_u_ - 1;
    r.acc_w_ = acc_w_;
    return r;
  }

  // d/dw^a_k (the operator ∂_{k,a}, k >= 1)
  JetPoly partial_jet(int a, int k) const {
    JetPoly r(n_, caps_);
    for (auto& t : terms_) {
      int e = jmono::exp_at(t.first, a, k);
      if (e == 0) continue;
      JMono m = t.first;
      jmono::set_exp(m, a, k, e - 1);
      r.terms_.push_back({m, t.second * e});
    }
    r.sort_terms();
    r.acc_u_ = acc_u_;
    r.acc_w_ = exact_w() ? kAccExact : acc_w_ - k;
    return r;
  }

  // total derivative: ∂f = Σ_a (w^a_1 + δ_{a,e}) ∂f/∂u^a + Σ w^a_{k+1} ∂f/∂w^a_k
  JetPoly total_derivative(int e_index) const {
    JetPoly r(n_, caps_);
    std::unordered_map<JMono, Rational, jmono::Hash> m;
    bool drop_w = false;
    bool base_touched = false;
    auto put = [&](const JMono& k, Rational c) {
      if (jmono::weight(k) > caps_.w) { drop_w = true; return; }
      m[k] += std::move(c);
    };
    for (auto& t : terms_) {
      for (int a = 0; a < n_; ++a) {
        int e = mono::uexp(t.first.base, a);
        if (e == 0) continue;
        base_touched = true;
        JMono d = t.first;
        d.base -= mono::uvar(a);
        if (a == e_index) put(d, t.second * e);
        JMono dw = d;
        jmono::set_exp(dw, a, 1, jmono::exp_at(dw, a, 1) + 1);
        put(dw, t.second * e);
      }
      for (int k = 1; k <= kMaxJetOrder; ++k) {
        for (int a = 0; a < n_; ++a) {
          int e = jmono::exp_at(t.first, a, k);
          if (e == 0) continue;
          if (k + 1 > kMaxJetOrder)
            throw FrobjetError("JetOrderOverflow", "total derivative beyond jet order 8");
          JMono d = t.first;
          jmono::set_exp(d, a, k, e - 1);
          jmono::set_exp(d, a, k + 1, jmono::exp_at(d, a, k + 1) + 1);
          put(d, t.second * e);
        }
      }
    }
    r.terms_.reserve(m.size());
    for (auto& kv : m)
      if (kv.second != 0) r.terms_.push_back({kv.first, std::move(kv.second)});
    r.sort_terms();
    r.acc_u_ = (exact_u() || !base_touched) ? acc_u_ : acc_u_ - 1;
    r.acc_w_ = exact_w() ? (drop_w ? caps_.w : kAccExact) : acc_w_;
    return r;
  }

  // the grading derivation: multiply each monomial by its jet weight
  JetPoly dilaton_grading() const {
    JetPoly r(n_, caps_);
    for (auto& t : terms_) {
      int w = jmono::weight(t.first);
      if (w != 0) r.terms_.push_back({t.first, t.second * w});
    }
    r.acc_u_ = acc_u_;
    r.acc_w_ = acc_w_;
    return r;
  }

  // the grading vector field in the unshifted coordinates u^a_k: on shifted
  // variables it is the weight count plus a d/dw^e_1 correction
  JetPoly dilaton_apply(int e_index) const {
    return dilaton_grading() + partial_jet(e_index, 1);
  }

  // substitute all w = 0: base part as a MultiSeries
  MultiSeries base_part() const {
    MultiSeries s(n_, caps_.base());
    std::vector<MultiSeries::Term> ts;
    for (auto& t : terms_)
      if (t.first.j0 == 0 && t.first.j1 == 0) ts.push_back({t.first.base, t.second});
    s = MultiSeries::zero(n_, caps_.base());
    for (auto& t : ts) {
      std::array<int, kMaxDim> ue{};
      for (int a = 0; a < kMaxDim; ++a) ue[a] = mono::uexp(t.first, a);
      s += MultiSeries::monomial(n_, caps_.base(), ue, mono::qdeg(t.first), t.second);
    }
    return s.with_acc(acc_u_ == kAccExact ? kAccExact : acc_u_);
  }

  // value at the basepoint P: u = 0, w = 0, q = 0
  Rational at_basepoint() const {
    for (auto& t : terms_)
      if (t.first.j0 == 0 && t.first.j1 == 0 && t.first.base == 0) return t.second;
    return Rational(0);
  }

  bool zero_to_acc() const {
    if (acc_u_ != kAccExact && acc_u_ < 0) throw cap_exhausted("jet residual u-accuracy below zero");
    if (acc_w_ != kAccExact && acc_w_ < 0) throw cap_exhausted("jet residual w-accuracy below zero");
    for (auto& t : terms_)
      if (mono::udeg(t.first.base) <= acc_u_ && jmono::weight(t.first) <= acc_w_) return false;
    return true;
  }

  std::string str() const;

  friend bool operator==(const JetPoly& a, const JetPoly& b) {
    return a.n_ == b.n_ && a.caps_ == b.caps_ && a.terms_ == b.terms_;
  }

  void sort_terms() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& x, const Term& y) { return jmono::less(x.first, y.first); });
  }

 private:
  static int acc_min(int a, int b, int cap, bool both_exact) {
    if (both_exact) return kAccExact;
    return std::min(std::min(a, b), cap);
  }
  static int mul_acc(int aa, int ab, int orda, int ordb, int cap, bool dropped) {
    if (aa == kAccExact && ab == kAccExact && !dropped) return kAccExact;
    long r = cap;
    if (aa != kAccExact) r = std::min(r, long(aa) + ordb);
    if (ab != kAccExact) r = std::min(r, long(ab) + orda);
    return int(r);
  }

  int n_ = 0;
  JetCaps caps_{};
  int acc_u_ = kAccExact;
  int acc_w_ = kAccExact;
  std::vector<Term> terms_;
};

inline std::string JetPoly::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto& t : terms_) {
    if (!out.empty()) out += " + ";
    out += "(" + t.second.str() + ")";
    for (int a = 0; a < n_; ++a)
      if (int e = mono::uexp(t.first.base, a); e > 0)
        out += "*u" + std::to_string(a) + (e > 1 ? "^" + std::to_string(e) : "");
    if (int d = mono::qdeg(t.first.base); d > 0)
      out += "*q" + (d > 1 ? "^" + std::to_string(d) : "");
    for (int k = 1; k <= kMaxJetOrder; ++k)
      for (int a = 0; a < n_; ++a)
        if (int e = jmono::exp_at(t.first, a, k); e > 0)
          out += "*w" + std::to_string(a) + "_" + std::to_string(k) +
                 (e > 1 ? "^" + std::to_string(e) : "");
  }
  return out;
}

}  // namespace frobjet
