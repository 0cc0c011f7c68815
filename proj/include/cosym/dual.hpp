#pragma once

#include <cmath>
#include <type_traits>

namespace cosym {

/// Forward-mode dual number over a scalar T.
///
/// Nesting (Dual<Dual<double>>, ...) yields higher derivative levels; the
/// library instantiates levels 0..3, which covers every operator chain used
/// here (e.g. closedness of a 2-form whose coefficients already carry one
/// derivative of a Hamiltonian).
template <class T>
struct Dual {
    T v{}; ///< value part
    T d{}; ///< derivative part

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value), d() {} // NOLINT: implicit by design
    constexpr Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}
};

using S0 = double;
using S1 = Dual<S0>;
using S2 = Dual<S1>;
using S3 = Dual<S2>;

/// Strip all derivative parts down to the underlying double value.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
    return value_of(x.v);
}

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return {a.v + b.v, a.d + b.d};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return {a.v - b.v, a.d - b.d};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a) {
    return {-a.v, -a.d};
}
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, double b) {
    return {a.v + b, a.d};
}
template <class T>
constexpr Dual<T> operator+(double a, const Dual<T>& b) {
    return {a + b.v, b.d};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, double b) {
    return {a.v - b, a.d};
}
template <class T>
constexpr Dual<T> operator-(double a, const Dual<T>& b) {
    return {a - b.v, -b.d};
}
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, double b) {
    return {a.v * b, a.d * b};
}
template <class T>
constexpr Dual<T> operator*(double a, const Dual<T>& b) {
    return {b.v * a, b.d * a};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, double b) {
    return {a.v / b, a.d / b};
}
template <class T>
constexpr Dual<T> operator/(double a, const Dual<T>& b) {
    return Dual<T>(a) / b;
}

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
    a = a + b;
    return a;
}
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) {
    a = a - b;
    return a;
}
template <class T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) {
    a = a * b;
    return a;
}
template <class T>
Dual<T>& operator/=(Dual<T>& a, const Dual<T>& b) {
    a = a / b;
    return a;
}

// Comparisons act on value parts only (used for pivoting and guards).
template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) {
    return value_of(a) < value_of(b);
}
template <class T>
bool operator>(const Dual<T>& a, const Dual<T>& b) {
    return value_of(a) > value_of(b);
}

using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> sin(const Dual<T>& a) {
    return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
    return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
    T e = exp(a.v);
    return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
    return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    T r = sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}
/// |x| with derivative sign(x); the subgradient at 0 is taken as 0.
template <class T>
Dual<T> abs(const Dual<T>& a) {
    double s = value_of(a) > 0.0 ? 1.0 : (value_of(a) < 0.0 ? -1.0 : 0.0);
    return {abs(a.v), s * a.d};
}

inline double powi(double base, long long n) {
    if (n < 0) return 1.0 / powi(base, -n);
    double r = 1.0, b = base;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

/// Integer power by repeated squaring; valid for any base sign.
template <class T>
Dual<T> powi(const Dual<T>& base, long long n) {
    if (n < 0) return 1.0 / powi(base, -n);
    Dual<T> r(1.0), b = base;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

inline double pow_real(double base, double e) { return std::pow(base, e); }
/// Real power via exp(e*log(base)); requires base > 0.
template <class T>
Dual<T> pow_real(const Dual<T>& base, double e) {
    return exp(e * log(base));
}

template <class S>
constexpr int dual_level() {
    if constexpr (std::is_same_v<S, S0>)
        return 0;
    else if constexpr (std::is_same_v<S, S1>)
        return 1;
    else if constexpr (std::is_same_v<S, S2>)
        return 2;
    else
        return 3;
}

} // namespace cosym
