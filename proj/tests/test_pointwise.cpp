#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cosym/pointwise.hpp"
#include "oracles.hpp"

using namespace cosym;

namespace {

AntisymmetricForm e12_on_r3() {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 1) = 1.0;
    m(1, 0) = -1.0;
    return AntisymmetricForm(m);
}

Eigen::MatrixXd darboux_matrix(int n) {
    // omega = sum dq^i ^ dp_i on coordinates (q..., p..., t)
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
    for (int i = 0; i < n; ++i) {
        m(i, n + i) = 1.0;
        m(n + i, i) = -1.0;
    }
    return m;
}

} // namespace

TEST_CASE("antisymmetry is enforced, not projected") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 1) = 1.0;
    m(1, 0) = -0.9; // visibly asymmetric
    CHECK_THROWS_AS(AntisymmetricForm{m}, PreconditionViolation);
}

TEST_CASE("kernel of e1^e2 on R^3 is span{e3}") {
    const Subspace k = kernel(e12_on_r3());
    REQUIRE(k.dim() == 1);
    CHECK(k.contains(TangentVector::Unit(3, 2)));
    CHECK(std::abs(k.basis().col(0).norm() - 1.0) < 1e-14);
}

TEST_CASE("kernel of the Darboux form is the t-direction") {
    for (int n : {1, 2, 3}) {
        const int dim = 2 * n + 1;
        const Subspace k = kernel(AntisymmetricForm(darboux_matrix(n)));
        REQUIRE(k.dim() == 1);
        CHECK(k.contains(TangentVector::Unit(dim, dim - 1)));
    }
}

TEST_CASE("kernel agrees with the elimination-based nullspace oracle") {
    std::mt19937_64 rng(7101);
    for (int c = 0; c < 200; ++c) {
        auto inst = random_corank1_form(5, rng);
        const Subspace k = kernel(inst.form);
        REQUIRE(k.dim() == 1);
        const Eigen::MatrixXd ref = oracle::nullspace(inst.form.matrix());
        REQUIRE(ref.cols() == 1);
        CHECK(oracle::same_span(k.basis(), ref));
        CHECK(k.contains(inst.reeb, 1e-7));
    }
}

TEST_CASE("perp dimensions on R^3 match the constraint-system oracle") {
    const auto form = e12_on_r3();

    SUBCASE("A = span{e1}") {
        const Subspace a = Subspace::span_of(TangentVector::Unit(3, 0));
        const Subspace ap = perp(form, a);
        CHECK(ap.dim() == 2); // dim V - dim A
        CHECK(ap.contains(TangentVector::Unit(3, 0)));
        CHECK(ap.contains(TangentVector::Unit(3, 2)));
    }

    SUBCASE("A = span{R} gives the whole space") {
        const Subspace a = Subspace::span_of(TangentVector::Unit(3, 2));
        const Subspace ap = perp(form, a);
        CHECK(ap.dim() == 3); // dim V - dim A + 1
    }
}

TEST_CASE("perp of a random subspace not containing R has complementary dimension") {
    std::mt19937_64 rng(7102);
    std::uniform_int_distribution<int> dim_a(1, 6);
    int checked = 0;
    for (int c = 0; c < 1000; ++c) {
        auto inst = random_corank1_form(7, rng);
        const Subspace a = random_subspace(7, dim_a(rng), rng);
        if (a.contains(inst.reeb, 1e-8)) continue; // vanishing probability
        const Subspace ap = perp(inst.form, a);
        CHECK(ap.dim() == 7 - a.dim());

        // Oracle: nullspace of the stacked constraint rows (omega a_i)^T.
        Eigen::MatrixXd constraints = (inst.form.matrix() * a.basis()).transpose();
        CHECK(oracle::same_span(ap.basis(), oracle::nullspace(constraints)));
        ++checked;
    }
    CHECK(checked >= 990);
}

TEST_CASE("perp of the kernel span is the whole space") {
    std::mt19937_64 rng(7103);
    auto inst = random_corank1_form(5, rng);
    const Subspace ap = perp(inst.form, kernel(inst.form));
    CHECK(ap.dim() == 5);
}

TEST_CASE("subspace_sum spans the union") {
    const Subspace a = Subspace::span_of(TangentVector::Unit(3, 0));
    const Subspace b = Subspace::span_of(TangentVector::Unit(3, 2));
    CHECK(subspace_sum(a, b).dim() == 2);
    CHECK(subspace_sum(a, a).dim() == 1); // idempotent

    std::mt19937_64 rng(7104);
    for (int c = 0; c < 100; ++c) {
        const Subspace x = random_subspace(7, 2, rng);
        const Subspace y = random_subspace(7, 3, rng);
        Eigen::MatrixXd stacked(7, x.dim() + y.dim());
        stacked << x.basis(), y.basis();
        CHECK(subspace_sum(x, y).dim() == oracle::rank(stacked));
    }
}

TEST_CASE("lemma45_check: both branches on the block example") {
    const auto form = e12_on_r3();
    const TangentVector reeb = TangentVector::Unit(3, 2);

    SUBCASE("R not in A") {
        const auto rep = lemma45_check(form, reeb, Subspace::span_of(TangentVector::Unit(3, 0)));
        CHECK(!rep.reeb_in_a);
        CHECK(rep.dim_perp == 2);
        CHECK(rep.pass());
        Eigen::MatrixXd expected(3, 2);
        expected.col(0) = TangentVector::Unit(3, 0);
        expected.col(1) = TangentVector::Unit(3, 2);
        CHECK(oracle::same_span(rep.biperp.basis(), expected));
    }

    SUBCASE("A = span{R}") {
        const auto rep = lemma45_check(form, reeb, Subspace::span_of(reeb));
        CHECK(rep.reeb_in_a);
        CHECK(rep.dim_perp == 3);
        CHECK(rep.pass());
        CHECK(rep.biperp.equals(Subspace::span_of(reeb)));
    }
}

TEST_CASE("lemma45_check rejects a wrong Reeb direction") {
    const auto form = e12_on_r3();
    CHECK_THROWS_AS(lemma45_check(form, TangentVector::Unit(3, 0), Subspace::span_of(TangentVector::Unit(3, 1))),
                    PreconditionViolation);
}

TEST_CASE("perp-dimension fuzz: 1000 cases per dimension, all pass") {
    std::mt19937_64 rng(20240917);
    for (int dim : {3, 5, 7}) {
        const auto res = fuzz_lemma45(dim, 1000, rng);
        CHECK(res.cases == 1000);
        CHECK(res.passed == 1000);
        CHECK(res.reeb_in_a_cases > 300); // both branches genuinely exercised
        CHECK(res.reeb_in_a_cases < 700);
    }
}

TEST_CASE("lemma45 results are invariant under change of subspace basis") {
    std::mt19937_64 rng(7106);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int c = 0; c < 50; ++c) {
        auto inst = random_corank1_form(5, rng);
        const Subspace a = random_subspace(5, 2, rng);
        const auto rep1 = lemma45_check(inst.form, inst.reeb, a);

        // Re-span A with a random invertible 2x2 recombination of its basis.
        Eigen::MatrixXd mix(2, 2);
        do {
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) mix(i, j) = u(rng);
        } while (std::abs(mix.determinant()) < 0.1);
        const Subspace a2 = Subspace::span_of(Eigen::MatrixXd(a.basis() * mix));

        const auto rep2 = lemma45_check(inst.form, inst.reeb, a2);
        CHECK(rep1.reeb_in_a == rep2.reeb_in_a);
        CHECK(rep1.dim_perp == rep2.dim_perp);
        CHECK(rep1.pass() == rep2.pass());
        CHECK(rep1.biperp.equals(rep2.biperp));
    }
}

TEST_CASE("restricted kernel: Darboux form on a coordinate hyperplane") {
    // Restrict sum dq^i^dp_i (n=2) to span{q1,p1,t}: kernel within is span{t}.
    const AntisymmetricForm form{darboux_matrix(2)};
    Eigen::MatrixXd w(5, 3);
    w.col(0) = TangentVector::Unit(5, 0);
    w.col(1) = TangentVector::Unit(5, 2);
    w.col(2) = TangentVector::Unit(5, 4);
    const Subspace rk = restricted_kernel(form, Subspace::span_of(w));
    REQUIRE(rk.dim() == 1);
    CHECK(rk.contains(TangentVector::Unit(5, 4)));
}

TEST_CASE("rank ambiguity band raises instead of guessing") {
    // Singular values straddling the threshold band: sigma_max=1 puts the
    // band at [1e-11, 1e-9]; plant a singular value at 1e-10.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 1) = 1.0;
    m(1, 0) = -1.0;
    m(2, 3) = 1e-10;
    m(3, 2) = -1e-10;
    CHECK_THROWS_AS(kernel(AntisymmetricForm{m}), ToleranceAmbiguity);
}
