#pragma once

#include "frobjet/jetpoly.hpp"
#include "frobjet/series.hpp"

#include <vector>

namespace frobjet {

// ---- dense rational matrices (constant tensors: eta, mu, R_k blocks) ----

using RMat = std::vector<std::vector<Rational>>;

inline RMat rmat_identity(int n) {
  RMat m(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline RMat rmat_mul(const RMat& a, const RMat& b) {
  int n = int(a.size());
  RMat r(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (a[i][k] != 0)
        for (int j = 0; j < n; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline RMat rmat_inverse(const RMat& a) {
  int n = int(a.size());
  RMat m = a, inv = rmat_identity(n);
  for (int c = 0; c < n; ++c) {
    int p = -1;
    for (int r = c; r < n; ++r)
      if (m[r][c] != 0) { p = r; break; }
    if (p < 0) throw FrobjetError("MetricSingular", "singular rational matrix");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    Rational d = m[c][c];
    for (int j = 0; j < n; ++j) { m[c][j] /= d; inv[c][j] /= d; }
    for (int r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      Rational f = m[r][c];
      for (int j = 0; j < n; ++j) { m[r][j] -= f * m[c][j]; inv[r][j] -= f * inv[c][j]; }
    }
  }
  return inv;
}

// ---- adapters shared by MultiSeries and JetPoly entries ----

inline Rational const_part(const MultiSeries& s) { return s.coeff(mono::M(0)); }
inline Rational const_part(const JetPoly& p) { return p.at_basepoint(); }
inline MultiSeries make_const(const MultiSeries& proto, const Rational& c) {
  return MultiSeries::constant(proto.dim(), proto.caps(), c);
}
inline JetPoly make_const(const JetPoly& proto, const Rational& c) {
  return JetPoly::constant(proto.dim(), proto.caps(), c);
}
inline int nilpotency_bound(const MultiSeries& proto) {
  return proto.caps().du + proto.caps().dq + 1;
}
inline int nilpotency_bound(const JetPoly& proto) {
  return proto.caps().du + proto.caps().dq + proto.caps().w + 1;
}

// ---- square matrices with series entries (endomorphisms of T*M) ----
// Convention: (P alpha)_a = P_a^b alpha_b; entry(a, b) = P_a^b (row a, col b).

template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(int n, T zero) : n_(n), zero_(std::move(zero)), e_(n * n, zero_) {}
  static Mat identity(int n, const T& zero) {
    Mat m(n, zero);
    for (int i = 0; i < n; ++i) m.at(i, i) = make_const(zero, Rational(1));
    return m;
  }
  static Mat from_rational(int n, const T& zero, const RMat& r) {
    Mat m(n, zero);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.at(i, j) = make_const(zero, r[i][j]);
    return m;
  }

  int n() const { return n_; }
  const T& zero() const { return zero_; }
  T& at(int i, int j) { return e_[i * n_ + j]; }
  const T& at(int i, int j) const { return e_[i * n_ + j]; }

  friend Mat operator+(const Mat& a, const Mat& b) {
    Mat r(a.n_, a.zero_);
    for (size_t i = 0; i < r.e_.size(); ++i) r.e_[i] = a.e_[i] + b.e_[i];
    return r;
  }
  friend Mat operator-(const Mat& a, const Mat& b) {
    Mat r(a.n_, a.zero_);
    for (size_t i = 0; i < r.e_.size(); ++i) r.e_[i] = a.e_[i] - b.e_[i];
    return r;
  }
  Mat operator-() const {
    Mat r(n_, zero_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = -e_[i];
    return r;
  }
  friend Mat operator*(const Mat& a, const Mat& b) {
    Mat r(a.n_, a.zero_);
    for (int i = 0; i < a.n_; ++i)
      for (int k = 0; k < a.n_; ++k) {
        if (a.at(i, k).is_zero()) continue;
        for (int j = 0; j < a.n_; ++j) {
          if (b.at(k, j).is_zero()) continue;
          r.at(i, j) += a.at(i, k) * b.at(k, j);
        }
      }
    return r;
  }
  Mat scaled(const Rational& c) const {
    Mat r(n_, zero_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].scaled(c);
    return r;
  }
  Mat scaled_by(const T& s) const {
    Mat r(n_, zero_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] * s;
    return r;
  }
  Mat& operator+=(const Mat& o) { *this = *this + o; return *this; }
  Mat& operator-=(const Mat& o) { *this = *this - o; return *this; }

  T trace() const {
    T s = zero_;
    for (int i = 0; i < n_; ++i) s += at(i, i);
    return s;
  }

  bool is_zero() const {
    for (auto& x : e_) if (!x.is_zero()) return false;
    return true;
  }
  bool zero_to_acc() const {
    for (auto& x : e_) if (!x.zero_to_acc()) return false;
    return true;
  }

  template <class F>
  Mat map(F f) const {
    Mat r(n_, zero_);
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = f(e_[i]);
    return r;
  }

  // eta-adjoint: P* = eta P^T eta^{-1}
  Mat adjoint(const RMat& eta, const RMat& eta_inv) const {
    Mat r(n_, zero_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        T s = zero_;
        for (int c = 0; c < n_; ++c)
          for (int d = 0; d < n_; ++d)
            if (eta[a][c] != 0 && eta_inv[d][b] != 0)
              s += at(d, c).scaled(eta[a][c] * eta_inv[d][b]);
        r.at(a, b) = s;
      }
    return r;
  }

  RMat rational_constant_part() const {
    RMat r(n_, std::vector<Rational>(n_, Rational(0)));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r[i][j] = const_part(at(i, j));
    return r;
  }

  // inverse via exact inversion of the scalar constant part plus a Neumann
  // series in the nilpotent remainder
  Mat inverse() const {
    RMat c = rational_constant_part();
    RMat cinv = rmat_inverse(c);  // throws if the basepoint value is singular
    Mat b = from_rational(n_, zero_, cinv) * (*this);  // I + K, K nilpotent
    Mat k = b - identity(n_, zero_);
    Mat acc = identity(n_, zero_);
    Mat pw = identity(n_, zero_);
    int bound = nilpotency_bound(zero_);
    for (int i = 1; i <= bound; ++i) {
      pw = pw * (-k);
      if (pw.is_zero()) break;
      acc += pw;
    }
    return acc * from_rational(n_, zero_, cinv);
  }

  T det() const {
    if (n_ == 1) return at(0, 0);
    T s = zero_;
    // cofactor expansion along row 0
    for (int j = 0; j < n_; ++j) {
      if (at(0, j).is_zero()) continue;
      Mat sub(n_ - 1, zero_);
      for (int r = 1; r < n_; ++r) {
        int cc = 0;
        for (int col = 0; col < n_; ++col) {
          if (col == j) continue;
          sub.at(r - 1, cc++) = at(r, col);
        }
      }
      T term = at(0, j) * sub.det();
      s += (j % 2 == 0) ? term : -term;
    }
    return s;
  }

 private:
  int n_ = 0;
  T zero_;
  std::vector<T> e_;
};

template <class T>
struct VecT {
  int n = 0;
  T zero;
  std::vector<T> e;
  VecT() = default;
  VecT(int nn, T z) : n(nn), zero(std::move(z)), e(nn, zero) {}
  T& operator[](int i) { return e[i]; }
  const T& operator[](int i) const { return e[i]; }
  friend VecT operator+(const VecT& a, const VecT& b) {
    VecT r(a.n, a.zero);
    for (int i = 0; i < a.n; ++i) r.e[i] = a.e[i] + b.e[i];
    return r;
  }
  friend VecT operator-(const VecT& a, const VecT& b) {
    VecT r(a.n, a.zero);
    for (int i = 0; i < a.n; ++i) r.e[i] = a.e[i] - b.e[i];
    return r;
  }
  VecT operator-() const {
    VecT r(n, zero);
    for (int i = 0; i < n; ++i) r.e[i] = -e[i];
    return r;
  }
  bool is_zero() const {
    for (auto& x : e) if (!x.is_zero()) return false;
    return true;
  }
  bool zero_to_acc() const {
    for (auto& x : e) if (!x.zero_to_acc()) return false;
    return true;
  }
};

// row-vector times matrix: (vM)^b = v^a M_a^b
template <class T>
VecT<T> row_mul(const VecT<T>& v, const Mat<T>& m) {
  VecT<T> r(v.n, v.zero);
  for (int b = 0; b < v.n; ++b) {
    T s = v.zero;
    for (int a = 0; a < v.n; ++a) {
      if (v[a].is_zero() || m.at(a, b).is_zero()) continue;
      s += v[a] * m.at(a, b);
    }
    r[b] = s;
  }
  return r;
}

// matrix times column vector: (Mv)_a = M_a^b v_b
template <class T>
VecT<T> col_mul(const Mat<T>& m, const VecT<T>& v) {
  VecT<T> r(v.n, v.zero);
  for (int a = 0; a < v.n; ++a) {
    T s = v.zero;
    for (int b = 0; b < v.n; ++b) {
      if (m.at(a, b).is_zero() || v[b].is_zero()) continue;
      s += m.at(a, b) * v[b];
    }
    r[a] = s;
  }
  return r;
}

// ---- Laurent series in the spectral variable z ----

template <class T>
class Laurent {
 public:
  Laurent() = default;
  explicit Laurent(T zero) : zero_(std::move(zero)) {}

  const T& zero_elem() const { return zero_; }
  int zmin() const { return zmin_; }
  int zmax() const { return zmin_ + int(c_.size()) - 1; }
  bool empty() const { return c_.empty(); }

  const T& at(int j) const {
    if (j < zmin_ || j > zmax()) return zero_;
    return c_[j - zmin_];
  }
  void set(int j, T v) {
    ensure(j);
    c_[j - zmin_] = std::move(v);
  }
  void add_at(int j, const T& v) {
    ensure(j);
    c_[j - zmin_] = c_[j - zmin_] + v;
  }

  friend Laurent operator+(const Laurent& a, const Laurent& b) {
    Laurent r = a;
    for (int j = b.zmin_; j <= b.zmax(); ++j) r.add_at(j, b.at(j));
    return r;
  }
  friend Laurent operator-(const Laurent& a, const Laurent& b) {
    Laurent r = a;
    for (int j = b.zmin_; j <= b.zmax(); ++j) r.add_at(j, -b.at(j));
    return r;
  }
  Laurent operator-() const {
    Laurent r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }

  Laurent shifted(int k) const {  // multiply by z^k
    Laurent r = *this;
    r.zmin_ += k;
    return r;
  }
  Laurent dz() const {  // d/dz
    Laurent r(zero_);
    for (int j = zmin_; j <= zmax(); ++j) {
      if (j == 0) continue;
      r.add_at(j - 1, at(j).scaled(Rational(j)));
    }
    return r;
  }
  T residue() const { return at(-1); }

  template <class F>
  Laurent map(F f) const {
    Laurent r(zero_);
    for (int j = zmin_; j <= zmax(); ++j) r.set(j, f(at(j)));
    return r;
  }

 private:
  void ensure(int j) {
    if (c_.empty()) {
      zmin_ = j;
      c_.push_back(zero_);
      return;
    }
    while (j < zmin_) {
      c_.insert(c_.begin(), zero_);
      --zmin_;
    }
    while (j > zmax()) c_.push_back(zero_);
  }

  T zero_;
  int zmin_ = 0;
  std::vector<T> c_;
};

}  // namespace frobjet
