#pragma once

// Scalar-field traits and small shared helpers.
//
// The library is templated on the coordinate scalar T, which is either
// `double` (real field) or `std::complex<double>` (complex field).  The
// runtime `Field` tag exists only at serialization boundaries; inside the
// numeric kernels the field is a compile-time property, which makes
// "arithmetic stays in the declared field" a type-level invariant.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace opdef {

enum class Field { real, complex };

inline const char* field_name(Field f) { return f == Field::real ? "real" : "complex"; }

using cplx = std::complex<double>;

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr Field field = Field::real;
  static constexpr bool is_complex = false;
  static double conj(double x) { return x; }
  static double re(double x) { return x; }
  static double im(double) { return 0.0; }
  // Builds a scalar from a (re, im) pair; the real field rejects im != 0.
  static double make(double re, double im) {
    if (im != 0.0) throw std::invalid_argument("real-field scalar with nonzero imaginary part");
    return re;
  }
};

template <>
struct scalar_traits<cplx> {
  static constexpr Field field = Field::complex;
  static constexpr bool is_complex = true;
  static cplx conj(const cplx& x) { return std::conj(x); }
  static double re(const cplx& x) { return x.real(); }
  static double im(const cplx& x) { return x.imag(); }
  static cplx make(double re, double im) { return cplx(re, im); }
};

template <class T>
inline constexpr bool is_complex_v = scalar_traits<T>::is_complex;

template <class T>
inline constexpr Field field_of_v = scalar_traits<T>::field;

template <class T>
T conj_of(const T& x) { return scalar_traits<T>::conj(x); }

template <class T>
double re_of(const T& x) { return scalar_traits<T>::re(x); }

template <class T>
double im_of(const T& x) { return scalar_traits<T>::im(x); }

template <class T>
double abs_of(const T& x) { return std::abs(x); }

template <class T>
double abs2_of(const T& x) {
  if constexpr (is_complex_v<T>) return std::norm(x);
  else return x * x;
}

// Thrown when a predicate argument lies outside its declared sort B_n.
struct SortViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when an operation needs a decaying truncation-tail bound and the
// operator's structure does not provide one (shift-like trees).
struct NoTailBound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ===== deterministic randomness =====
//
// All randomized probes in the library draw from mt19937_64 through the
// helpers below, so identical seeds give identical streams on every
// platform (std::uniform_real_distribution is implementation-defined and
// deliberately avoided).

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Uniform in the box [-radius, radius] (both components for the complex field).
template <class T>
T random_scalar(std::mt19937_64& g, double radius) {
  if constexpr (is_complex_v<T>) {
    double re = uniform_range(g, -radius, radius);
    double im = uniform_range(g, -radius, radius);
    return T(re, im);
  } else {
    return uniform_range(g, -radius, radius);
  }
}

// Sentinel for "unbounded support"; see operator support propagation.
inline constexpr std::size_t unbounded_support = std::numeric_limits<std::size_t>::max();

inline std::size_t add_support(std::size_t a, std::size_t b) {
  if (a == unbounded_support || b == unbounded_support) return unbounded_support;
  return a + b;
}

}  // namespace opdef
