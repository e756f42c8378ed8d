#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <stdexcept>
#include <string>

namespace frobjet {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using Real = boost::multiprecision::mpfr_float;

struct FrobjetError : std::runtime_error {
  std::string kind;
  FrobjetError(std::string k, const std::string& msg)
      : std::runtime_error(k + ": " + msg), kind(std::move(k)) {}
};

inline FrobjetError cap_mismatch(const std::string& m) { return {"CapMismatch", m}; }
inline FrobjetError cap_exhausted(const std::string& m) { return {"CapExhausted", m}; }
inline FrobjetError dim_mismatch(const std::string& m) { return {"DimensionMismatch", m}; }

// Minimal complex type over Real. std::complex<Real> is not guaranteed to
// work with a multiprecision backend, so we carry our own.
struct Complex {
  Real re, im;
  Complex() : re(0), im(0) {}
  Complex(Real r) : re(std::move(r)), im(0) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  Complex(double r) : re(r), im(0) {}
  Complex(const Rational& r) : re(r), im(0) {}

  Complex operator-() const { return {-re, -im}; }
  Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
  Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  Complex& operator*=(const Complex& o) { *this = *this * o; return *this; }
  friend Complex operator/(const Complex& a, const Complex& b) {
    Real d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  Complex& operator/=(const Complex& o) { *this = *this / o; return *this; }
};

inline Real cabs(const Complex& z) { return sqrt(z.re * z.re + z.im * z.im); }

inline Complex csqrt(const Complex& z) {
  Real r = cabs(z);
  if (r == 0) return Complex(Real(0));
  // principal branch
  Real a = sqrt((r + z.re) / 2);
  Real b = sqrt((r - z.re) / 2);
  if (z.im < 0) b = -b;
  return {a, b};
}

inline Complex clog(const Complex& z) { return {log(cabs(z)), atan2(z.im, z.re)}; }

inline Complex cexp(const Complex& z) {
  Real m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

inline Complex cpow(const Complex& z, const Rational& p) {
  if (cabs(z) == 0) return Complex(Real(0));
  return cexp(Complex(Real(p)) * clog(z));
}

inline std::string rat_str(const Rational& r) { return r.str(); }

}  // namespace frobjet
