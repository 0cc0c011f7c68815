#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cosym/dual.hpp"
#include "cosym/linalg.hpp"

using namespace cosym;

namespace {

// f(x, y) = sin(x)*exp(y) + x^3/y, smooth away from y = 0
template <class S>
S sample_fn(S x, S y) {
    return sin(x) * exp(y) + powi(x, 3) / y;
}

} // namespace

TEST_CASE("first derivatives match hand-computed partials") {
    const double x = 0.7, y = 1.3;
    S1 dx = sample_fn(S1{x, 1.0}, S1{y, 0.0});
    S1 dy = sample_fn(S1{x, 0.0}, S1{y, 1.0});
    const double fx = std::cos(x) * std::exp(y) + 3.0 * x * x / y;
    const double fy = std::sin(x) * std::exp(y) - x * x * x / (y * y);
    CHECK(dx.v == doctest::Approx(sample_fn(x, y)).epsilon(1e-15));
    CHECK(dx.d == doctest::Approx(fx).epsilon(1e-14));
    CHECK(dy.d == doctest::Approx(fy).epsilon(1e-14));
}

TEST_CASE("nested duals give exact second derivatives") {
    const double x = 0.4;
    // g(x) = sin(x)*x^2; g'' = 2 sin x + 4 x cos x - x^2 sin x
    auto g = [](auto t) { return sin(t) * t * t; };
    S2 r = g(S2{S1{x, 1.0}, S1{1.0, 0.0}});
    const double g2 = 2.0 * std::sin(x) + 4.0 * x * std::cos(x) - x * x * std::sin(x);
    CHECK(r.d.d == doctest::Approx(g2).epsilon(1e-14));
}

TEST_CASE("dual derivatives agree with central differences on a random grid") {
    std::mt19937_64 rng(411);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int c = 0; c < 100; ++c) {
        const double x = u(rng), y = u(rng);
        const double h = 1e-6;
        const double fd = (sample_fn(x + h, y) - sample_fn(x - h, y)) / (2 * h);
        S1 d = sample_fn(S1{x, 1.0}, S1{y, 0.0});
        CHECK(d.d == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("integer and real powers") {
    CHECK(powi(S1{-2.0, 1.0}, 3).v == doctest::Approx(-8.0));
    CHECK(powi(S1{-2.0, 1.0}, 3).d == doctest::Approx(12.0));
    CHECK(powi(2.0, -2) == doctest::Approx(0.25));
    S1 p = pow_real(S1{2.0, 1.0}, 0.5);
    CHECK(p.v == doctest::Approx(std::sqrt(2.0)));
    CHECK(p.d == doctest::Approx(0.5 / std::sqrt(2.0)));
}

TEST_CASE("generic square solve works at dual level") {
    // A x = b with A = [[2, 1], [1, 3]], b depending on a parameter s.
    auto solve_at = [](auto s) {
        using S = decltype(s);
        Mat<S> a(2, 2);
        a(0, 0) = S(2.0);
        a(0, 1) = S(1.0);
        a(1, 0) = S(1.0);
        a(1, 1) = S(3.0);
        Vec<S> b{s, s * s};
        return solve_square(a, b);
    };
    auto x = solve_at(S1{2.0, 1.0});
    // Closed form: x0 = (3s - s^2)/5, x1 = (2s^2 - s)/5
    CHECK(x[0].v == doctest::Approx((6.0 - 4.0) / 5.0));
    CHECK(x[0].d == doctest::Approx((3.0 - 2.0 * 2.0) / 5.0));
    CHECK(x[1].d == doctest::Approx((4.0 * 2.0 - 1.0) / 5.0));
}

TEST_CASE("least squares solves an overdetermined consistent system") {
    Mat<double> a(3, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    a(2, 0) = 1.0;
    a(2, 1) = 1.0;
    Vec<double> b{1.0, 2.0, 3.0};
    auto x = solve_least_squares(a, b);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
}
