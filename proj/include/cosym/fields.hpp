#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cosym/chart.hpp"
#include "cosym/linalg.hpp"
#include "cosym/pointwise.hpp"
#include "cosym/report.hpp"

namespace cosym {

namespace detail {

template <class S>
using ScalarRet = S;
template <class S>
using VecRet = std::vector<S>;
template <class S>
using MatRet = Mat<S>;

/// Type-erased evaluators at the four supported derivative levels. Fields
/// produced by differential operators consume one level: their deepest slot
/// throws DepthExceeded instead of silently recursing out of range.
template <template <class> class Ret>
struct Evals {
    std::function<Ret<S0>(std::span<const S0>)> e0;
    std::function<Ret<S1>(std::span<const S1>)> e1;
    std::function<Ret<S2>(std::span<const S2>)> e2;
    std::function<Ret<S3>(std::span<const S3>)> e3;

    template <class F>
    static Evals full(F f) {
        Evals ev;
        ev.e0 = [f](std::span<const S0> x) { return f(x); };
        ev.e1 = [f](std::span<const S1> x) { return f(x); };
        ev.e2 = [f](std::span<const S2> x) { return f(x); };
        ev.e3 = [f](std::span<const S3> x) { return f(x); };
        return ev;
    }

    template <class F>
    static Evals depth_limited(F f) {
        Evals ev;
        ev.e0 = [f](std::span<const S0> x) { return f(x); };
        ev.e1 = [f](std::span<const S1> x) { return f(x); };
        ev.e2 = [f](std::span<const S2> x) { return f(x); };
        ev.e3 = [](std::span<const S3>) -> Ret<S3> {
            throw DepthExceeded("field evaluated beyond its supported derivative depth");
        };
        return ev;
    }

    template <class S>
    Ret<S> operator()(std::span<const S> x) const {
        if constexpr (std::is_same_v<S, S0>)
            return e0(x);
        else if constexpr (std::is_same_v<S, S1>)
            return e1(x);
        else if constexpr (std::is_same_v<S, S2>)
            return e2(x);
        else
            return e3(x);
    }
};

} // namespace detail

/// Real-valued function on a chart, differentiable through dual numbers.
class ScalarField {
public:
    ScalarField() = default;

    template <class F>
    static ScalarField from_closure(CoordinateChart chart, F f, std::string formula = "") {
        ScalarField r;
        r.chart_ = std::move(chart);
        r.formula_ = std::move(formula);
        r.ev_ = detail::Evals<detail::ScalarRet>::full(std::move(f));
        return r;
    }

    template <class F>
    static ScalarField derived(CoordinateChart chart, F f, std::string formula = "") {
        ScalarField r;
        r.chart_ = std::move(chart);
        r.formula_ = std::move(formula);
        r.ev_ = detail::Evals<detail::ScalarRet>::depth_limited(std::move(f));
        return r;
    }

    static ScalarField constant(CoordinateChart chart, double c) {
        return from_closure(std::move(chart), [c](auto x) {
            using S = typename decltype(x)::value_type;
            (void)x;
            return S(c);
        });
    }

    /// The i-th coordinate as a scalar field.
    static ScalarField coordinate(CoordinateChart chart, int i) {
        std::string nm = chart.name(i);
        return from_closure(std::move(chart), [i](auto x) { return x[static_cast<size_t>(i)]; },
                            nm);
    }

    template <class S>
    S eval(std::span<const S> x) const {
        chart_.require_inside(values_of(x));
        return ev_(x);
    }

    double operator()(std::span<const double> x) const { return eval<double>(x); }

    const CoordinateChart& chart() const { return chart_; }
    const std::string& formula() const { return formula_; }

private:
    CoordinateChart chart_;
    std::string formula_;
    detail::Evals<detail::ScalarRet> ev_;
};

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return ScalarField::from_closure(a.chart(), [a, b](auto x) {
        using S = typename decltype(x)::value_type;
        return S(a.eval(x) + b.eval(x));
    });
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return ScalarField::from_closure(a.chart(), [a, b](auto x) {
        using S = typename decltype(x)::value_type;
        return S(a.eval(x) - b.eval(x));
    });
}

inline ScalarField operator*(double c, const ScalarField& a) {
    return ScalarField::from_closure(a.chart(), [a, c](auto x) {
        using S = typename decltype(x)::value_type;
        return S(c * a.eval(x));
    });
}

/// Vector field X = X^i d/dx^i.
class VectorField {
public:
    VectorField() = default;

    template <class F>
    static VectorField from_closure(CoordinateChart chart, F f) {
        VectorField r;
        r.chart_ = std::move(chart);
        r.ev_ = detail::Evals<detail::VecRet>::full(std::move(f));
        return r;
    }

    template <class F>
    static VectorField derived(CoordinateChart chart, F f) {
        VectorField r;
        r.chart_ = std::move(chart);
        r.ev_ = detail::Evals<detail::VecRet>::depth_limited(std::move(f));
        return r;
    }

    /// The coordinate field d/dx^i.
    static VectorField coordinate_direction(CoordinateChart chart, int i) {
        const int dim = chart.dim();
        return from_closure(std::move(chart), [i, dim](auto x) {
            using S = typename decltype(x)::value_type;
            (void)x;
            std::vector<S> v(static_cast<size_t>(dim), S(0.0));
            v[static_cast<size_t>(i)] = S(1.0);
            return v;
        });
    }

    template <class S>
    std::vector<S> eval(std::span<const S> x) const {
        chart_.require_inside(values_of(x));
        return ev_(x);
    }

    TangentVector at(std::span<const double> x) const {
        return to_eigen(std::span<const double>(eval<double>(x)));
    }

    const CoordinateChart& chart() const { return chart_; }

private:
    CoordinateChart chart_;
    detail::Evals<detail::VecRet> ev_;
};

/// 1-form alpha = alpha_i dx^i.
class OneFormField {
public:
    OneFormField() = default;

    template <class F>
    static OneFormField from_closure(CoordinateChart chart, F f) {
        OneFormField r;
        r.chart_ = std::move(chart);
        r.ev_ = detail::Evals<detail::VecRet>::full(std::move(f));
        return r;
    }

    template <class F>
    static OneFormField derived(CoordinateChart chart, F f) {
        OneFormField r;
        r.chart_ = std::move(chart);
        r.ev_ = detail::Evals<detail::VecRet>::depth_limited(std::move(f));
        return r;
    }

    /// The coordinate differential dx^i.
    static OneFormField coordinate_differential(CoordinateChart chart, int i) {
        const int dim = chart.dim();
        return from_closure(std::move(chart), [i, dim](auto x) {
            using S = typename decltype(x)::value_type;
            (void)x;
            std::vector<S> v(static_cast<size_t>(dim), S(0.0));
            v[static_cast<size_t>(i)] = S(1.0);
            return v;
        });
    }

    template <class S>
    std::vector<S> eval(std::span<const S> x) const {
        chart_.require_inside(values_of(x));
        return ev_(x);
    }

    Eigen::VectorXd at(std::span<const double> x) const {
        return to_eigen(std::span<const double>(eval<double>(x)));
    }

    const CoordinateChart& chart() const { return chart_; }

private:
    CoordinateChart chart_;
    detail::Evals<detail::VecRet> ev_;
};

/// 2-form omega with coefficient matrix omega_ij = omega(e_i, e_j).
class TwoFormField {
public:
    TwoFormField() = default;

    template <class F>
    static TwoFormField from_closure(CoordinateChart chart, F f) {
        TwoFormField r;
        r.chart_ = std::move(chart);
        r.ev_ = detail::Evals<detail::MatRet>::full(std::move(f));
        return r;
    }

    template <class F>
    static TwoFormField derived(CoordinateChart chart, F f) {
        TwoFormField r;
        r.chart_ = std::move(chart);
        r.ev_ = detail::Evals<detail::MatRet>::depth_limited(std::move(f));
        return r;
    }

    /// Constant-coefficient form.
    static TwoFormField constant(CoordinateChart chart, const Eigen::MatrixXd& m) {
        const int dim = chart.dim();
        std::vector<double> entries(static_cast<size_t>(dim) * dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) entries[static_cast<size_t>(i) * dim + j] = m(i, j);
        return from_closure(std::move(chart), [entries, dim](auto x) {
            using S = typename decltype(x)::value_type;
            (void)x;
            Mat<S> r(dim, dim);
            for (size_t k = 0; k < entries.size(); ++k) r.a[k] = S(entries[k]);
            return r;
        });
    }

    template <class S>
    Mat<S> eval(std::span<const S> x) const {
        chart_.require_inside(values_of(x));
        return ev_(x);
    }

    /// Validated pointwise value; antisymmetry is rechecked here.
    AntisymmetricForm form_at(std::span<const double> x, double asym_tol = 1e-9) const {
        return AntisymmetricForm(to_eigen(eval<double>(x)), asym_tol);
    }

    const CoordinateChart& chart() const { return chart_; }

private:
    CoordinateChart chart_;
    detail::Evals<detail::MatRet> ev_;
};

inline TwoFormField operator+(const TwoFormField& a, const TwoFormField& b) {
    return TwoFormField::from_closure(a.chart(), [a, b](auto x) {
        auto ma = a.eval(x);
        auto mb = b.eval(x);
        for (size_t k = 0; k < ma.a.size(); ++k) ma.a[k] += mb.a[k];
        return ma;
    });
}

inline TwoFormField operator-(const TwoFormField& a, const TwoFormField& b) {
    return TwoFormField::from_closure(a.chart(), [a, b](auto x) {
        auto ma = a.eval(x);
        auto mb = b.eval(x);
        for (size_t k = 0; k < ma.a.size(); ++k) ma.a[k] -= mb.a[k];
        return ma;
    });
}

/// Differentiable map between charts.
class SmoothMap {
public:
    SmoothMap() = default;

    template <class F>
    static SmoothMap from_closure(CoordinateChart from, CoordinateChart to, F f) {
        SmoothMap r;
        r.from_ = std::move(from);
        r.to_ = std::move(to);
        r.ev_ = detail::Evals<detail::VecRet>::full(std::move(f));
        return r;
    }

    static SmoothMap identity(const CoordinateChart& chart) {
        return from_closure(chart, chart, [](auto x) {
            using S = typename decltype(x)::value_type;
            return std::vector<S>(x.begin(), x.end());
        });
    }

    template <class S>
    std::vector<S> eval(std::span<const S> x) const {
        from_.require_inside(values_of(x));
        return ev_(x);
    }

    Point operator()(std::span<const double> x) const { return eval<double>(x); }

    const CoordinateChart& from() const { return from_; }
    const CoordinateChart& to() const { return to_; }

private:
    CoordinateChart from_, to_;
    detail::Evals<detail::VecRet> ev_;
};

inline SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
    return SmoothMap::from_closure(inner.from(), outer.to(), [outer, inner](auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> mid = inner.eval(x);
        return outer.eval(std::span<const S>(mid));
    });
}

/// Jacobian of a map at dual level S; rows index target coordinates.
template <class S>
Mat<S> jacobian(const SmoothMap& map, std::span<const S> x) {
    const int n = map.from().dim();
    const int m = map.to().dim();
    Mat<S> j(m, n);
    for (int col = 0; col < n; ++col) {
        auto seeded = lift_with_seed(x, col);
        auto img = map.eval(std::span<const Dual<S>>(seeded));
        for (int row = 0; row < m; ++row) j(row, col) = img[static_cast<size_t>(row)].d;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Exterior calculus
// ---------------------------------------------------------------------------

/// df, with components computed by forward-mode dual seeding.
inline OneFormField differential(const ScalarField& f) {
    const int dim = f.chart().dim();
    return OneFormField::derived(f.chart(), [f, dim](auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            auto seeded = lift_with_seed(std::span<const S>(x), i);
            r[static_cast<size_t>(i)] = f.eval(std::span<const Dual<S>>(seeded)).d;
        }
        return r;
    });
}

/// (d alpha)_ij = d_i alpha_j - d_j alpha_i.
inline TwoFormField exterior_derivative(const OneFormField& alpha) {
    const int dim = alpha.chart().dim();
    return TwoFormField::derived(alpha.chart(), [alpha, dim](auto x) {
        using S = typename decltype(x)::value_type;
        // grad(i, j) = d_i alpha_j
        Mat<S> grad(dim, dim);
        for (int i = 0; i < dim; ++i) {
            auto seeded = lift_with_seed(std::span<const S>(x), i);
            auto comps = alpha.eval(std::span<const Dual<S>>(seeded));
            for (int j = 0; j < dim; ++j) grad(i, j) = comps[static_cast<size_t>(j)].d;
        }
        Mat<S> r(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = grad(i, j) - grad(j, i);
        return r;
    });
}

/// (alpha ^ beta)(u, v) = alpha(u) beta(v) - alpha(v) beta(u).
inline TwoFormField wedge_1_1(const OneFormField& alpha, const OneFormField& beta) {
    if (!(alpha.chart() == beta.chart()))
        throw PreconditionViolation("wedge_1_1: charts differ");
    const int dim = alpha.chart().dim();
    return TwoFormField::from_closure(alpha.chart(), [alpha, beta, dim](auto x) {
        auto a = alpha.eval(x);
        auto b = beta.eval(x);
        using S = typename decltype(a)::value_type;
        Mat<S> r(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                r(i, j) = a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)] -
                          a[static_cast<size_t>(j)] * b[static_cast<size_t>(i)];
        return r;
    });
}

/// (i_X omega)_j = X^i omega_ij.
inline OneFormField interior_product_2(const VectorField& x_field, const TwoFormField& omega) {
    if (!(x_field.chart() == omega.chart()))
        throw PreconditionViolation("interior_product_2: charts differ");
    const int dim = omega.chart().dim();
    return OneFormField::from_closure(omega.chart(), [x_field, omega, dim](auto x) {
        auto xv = x_field.eval(x);
        auto w = omega.eval(x);
        using S = typename decltype(xv)::value_type;
        std::vector<S> r(static_cast<size_t>(dim), S(0.0));
        for (int j = 0; j < dim; ++j) {
            S s(0.0);
            for (int i = 0; i < dim; ++i) s += xv[static_cast<size_t>(i)] * w(i, j);
            r[static_cast<size_t>(j)] = s;
        }
        return r;
    });
}

/// alpha(X) as a scalar field.
inline ScalarField interior_product_1(const VectorField& x_field, const OneFormField& alpha) {
    if (!(x_field.chart() == alpha.chart()))
        throw PreconditionViolation("interior_product_1: charts differ");
    return ScalarField::from_closure(alpha.chart(), [x_field, alpha](auto x) {
        auto xv = x_field.eval(x);
        auto a = alpha.eval(x);
        using S = typename decltype(xv)::value_type;
        S s(0.0);
        for (size_t i = 0; i < xv.size(); ++i) s += xv[i] * a[i];
        return s;
    });
}

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i.
inline VectorField lie_bracket(const VectorField& xf, const VectorField& yf) {
    if (!(xf.chart() == yf.chart()))
        throw PreconditionViolation("lie_bracket: charts differ");
    const int dim = xf.chart().dim();
    return VectorField::derived(xf.chart(), [xf, yf, dim](auto x) {
        using S = typename decltype(x)::value_type;
        auto xv = xf.eval(std::span<const S>(x));
        auto yv = yf.eval(std::span<const S>(x));
        std::vector<S> r(static_cast<size_t>(dim), S(0.0));
        for (int j = 0; j < dim; ++j) {
            auto seeded = lift_with_seed(std::span<const S>(x), j);
            auto dy = yf.eval(std::span<const Dual<S>>(seeded));
            auto dx = xf.eval(std::span<const Dual<S>>(seeded));
            for (int i = 0; i < dim; ++i)
                r[static_cast<size_t>(i)] += xv[static_cast<size_t>(j)] * dy[static_cast<size_t>(i)].d -
                                             yv[static_cast<size_t>(j)] * dx[static_cast<size_t>(i)].d;
        }
        return r;
    });
}

/// (phi^* omega)(x) = J^T omega(phi(x)) J with J the dual-number Jacobian.
inline TwoFormField pullback_2form(const SmoothMap& phi, const TwoFormField& omega) {
    if (!(phi.to() == omega.chart()))
        throw PreconditionViolation("pullback_2form: omega does not live on the target chart");
    const int n = phi.from().dim();
    return TwoFormField::derived(phi.from(), [phi, omega, n](auto x) {
        using S = typename decltype(x)::value_type;
        Mat<S> j = jacobian(phi, std::span<const S>(x));
        std::vector<S> img = phi.eval(std::span<const S>(x));
        Mat<S> w = omega.eval(std::span<const S>(img));
        const int m = phi.to().dim();
        Mat<S> r(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                S s(0.0);
                for (int i = 0; i < m; ++i)
                    for (int k = 0; k < m; ++k) s += j(i, a) * w(i, k) * j(k, b);
                r(a, b) = s;
            }
        return r;
    });
}

/// (phi^* alpha)_j = alpha_i(phi(x)) dphi^i/dx^j.
inline OneFormField pullback_1form(const SmoothMap& phi, const OneFormField& alpha) {
    if (!(phi.to() == alpha.chart()))
        throw PreconditionViolation("pullback_1form: alpha does not live on the target chart");
    const int n = phi.from().dim();
    return OneFormField::derived(phi.from(), [phi, alpha, n](auto x) {
        using S = typename decltype(x)::value_type;
        Mat<S> j = jacobian(phi, std::span<const S>(x));
        std::vector<S> img = phi.eval(std::span<const S>(x));
        auto a = alpha.eval(std::span<const S>(img));
        const int m = phi.to().dim();
        std::vector<S> r(static_cast<size_t>(n), S(0.0));
        for (int col = 0; col < n; ++col) {
            S s(0.0);
            for (int i = 0; i < m; ++i) s += a[static_cast<size_t>(i)] * j(i, col);
            r[static_cast<size_t>(col)] = s;
        }
        return r;
    });
}

/// Components (d omega)_{ijk} = d_i w_jk + d_j w_ki + d_k w_ij at a point,
/// for i<j<k. This is the only 3-form machinery the library needs.
template <class S>
std::vector<S> three_form_components(const TwoFormField& omega, std::span<const S> x) {
    const int dim = omega.chart().dim();
    // grads[i] = d_i omega
    std::vector<Mat<S>> grads;
    grads.reserve(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        auto seeded = lift_with_seed(x, i);
        Mat<Dual<S>> w = omega.eval(std::span<const Dual<S>>(seeded));
        Mat<S> g(dim, dim);
        for (size_t k = 0; k < w.a.size(); ++k) g.a[k] = w.a[k].d;
        grads.push_back(std::move(g));
    }
    std::vector<S> comps;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            for (int k = j + 1; k < dim; ++k)
                comps.push_back(grads[static_cast<size_t>(i)](j, k) +
                                grads[static_cast<size_t>(j)](k, i) +
                                grads[static_cast<size_t>(k)](i, j));
    return comps;
}

/// i_X of the 3-form d(omega), needed for Cartan-formula Lie derivatives:
/// (i_X d omega)_{jk} = sum_i X^i (d omega)_{ijk}.
template <class S>
Mat<S> contract_d2form(const TwoFormField& omega, const VectorField& xf, std::span<const S> x) {
    const int dim = omega.chart().dim();
    std::vector<Mat<S>> grads;
    grads.reserve(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        auto seeded = lift_with_seed(x, i);
        Mat<Dual<S>> w = omega.eval(std::span<const Dual<S>>(seeded));
        Mat<S> g(dim, dim);
        for (size_t k = 0; k < w.a.size(); ++k) g.a[k] = w.a[k].d;
        grads.push_back(std::move(g));
    }
    auto xv = xf.eval(x);
    Mat<S> r(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
            S s(0.0);
            for (int i = 0; i < dim; ++i) {
                // (d omega)_{ijk} with full antisymmetrization
                S dijk = grads[static_cast<size_t>(i)](j, k) + grads[static_cast<size_t>(j)](k, i) +
                         grads[static_cast<size_t>(k)](i, j);
                s += xv[static_cast<size_t>(i)] * dijk;
            }
            r(j, k) = s;
        }
    return r;
}

/// Max |(d omega)_{ijk}| over the sample set.
inline Report closedness_check(const TwoFormField& omega, const std::vector<Point>& points,
                               double tol = 1e-9) {
    Report rep("closedness of 2-form");
    double worst = 0.0;
    for (const auto& p : points) {
        auto comps = three_form_components<double>(omega, std::span<const double>(p));
        for (double c : comps) worst = std::max(worst, std::abs(c));
    }
    rep.check_below("max |d(omega)| component", worst, tol);
    rep.info("sample count", static_cast<double>(points.size()));
    return rep;
}

} // namespace cosym
