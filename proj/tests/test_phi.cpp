#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "percont/errors.hpp"
#include "percont/phi.hpp"

using namespace percont;
using namespace percont::phi;
using oracle::kPi;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

expr::Expression t_expr(const char* s) { return expr::Expression::parse(s, {"t"}); }

std::vector<PhiOperator> catalog() {
    return {identity(1, 1.0),
            identity(2, 1.0),
            p_laplacian(3.0, 1, 1.0),
            p_laplacian(1.5, 2, 1.0),
            pt_laplacian(t_expr("3 + sin(2*pi*t)"), 1, 1.0),
            mean_curvature(1, 1.0),
            mean_curvature(2, 1.0),
            minkowski(1, 1.0),
            minkowski(2, 1.0),
            rotation(1.0),
            swap_negate(1.0),
            scaled(t_expr("2 + cos(2*pi*t)"), minkowski(1, 1.0))};
}

}  // namespace

TEST_CASE("closed-form values") {
    CHECK(phi_eval(minkowski(1, 1.0), 0.0, v1(0.6))[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(phi_eval(mean_curvature(1, 1.0), 0.0, v1(0.75))[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(phi_inverse(minkowski(1, 1.0), 0.0, v1(0.75))[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(phi_inverse(p_laplacian(3.0, 1, 1.0), 0.0, v1(4.0))[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(oracle::minkowski(0.6) == doctest::Approx(0.75));
}

TEST_CASE("zero is fixed by every catalog operator") {
    for (const PhiOperator& op : catalog()) {
        for (double t : {0.0, 0.3, 0.77}) {
            CHECK(phi_eval(op, t, Vec::Zero(op.m)).norm() == 0.0);
            CHECK(phi_inverse(op, t, Vec::Zero(op.m)).norm() <= 1e-14);
        }
    }
}

TEST_CASE("round trip on a 32 x 32 grid") {
    for (const PhiOperator& op : catalog()) {
        const CheckReport r = check_phi_axioms(op);
        INFO(op.name);
        CHECK(r.pass());
        CHECK(r.at("phi4").evidence.at("max_roundtrip_forward") <= 1e-9);
        CHECK(r.at("phi4").evidence.at("max_roundtrip_backward") <= 1e-9);
    }
}

TEST_CASE("oddness and periodicity") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (const PhiOperator& op : catalog()) {
        if (!op.radial) continue;
        for (int k = 0; k < 20; ++k) {
            Vec s(op.m);
            for (int i = 0; i < op.m; ++i) s[i] = u(rng) / std::sqrt(op.m);
            const double t = 0.5 * (u(rng) + 1.0);
            CHECK((phi_eval(op, t, -s) + phi_eval(op, t, s)).norm() == 0.0);
            CHECK((phi_eval(op, 0.0, s) - phi_eval(op, op.T, s)).norm() <= 1e-12);
        }
    }
}

TEST_CASE("domain and range violations") {
    CHECK_THROWS_AS(phi_eval(minkowski(1, 1.0), 0.0, v1(1.0)), DomainViolation);
    CHECK_THROWS_AS(phi_inverse(mean_curvature(1, 1.0), 0.0, v1(1.5)), RangeViolation);
    CHECK(phi_inverse(minkowski(1, 1.0), 0.0, v1(1e6))[0] < 1.0);
}

TEST_CASE("a deliberate phi2 violation") {
    const auto f = {expr::Expression::parse("s + t", forward_variables(1))};
    const auto g = {expr::Expression::parse("z - t", inverse_variables(1))};
    const PhiOperator bad = custom(f, g, 1.0);
    const CheckReport r = check_phi_axioms(bad);
    CHECK(r.at("phi2").verdict == Verdict::fail);
    CHECK(r.at("phi2").evidence.at("max_violation") == doctest::Approx(1.0));
}

TEST_CASE("custom operator without inverse uses Newton") {
    const auto f = {expr::Expression::parse("s + s^3", forward_variables(1))};
    const PhiOperator op = custom(f, {}, 1.0);
    CHECK(phi_inverse(op, 0.2, v1(10.0))[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(check_phi_axioms(op).pass());
}

TEST_CASE("phi_star verdicts") {
    const QuadratureRule q{};
    const CheckReport rot = check_phi_star(rotation(1.0), q);
    CHECK(rot.at("phi_star").verdict == Verdict::fail);
    CHECK(rot.at("phi_star").evidence.at("max_abs_psi") <= 1e-10);
    CHECK(check_phi_star(pt_laplacian(t_expr("3 + sin(2*pi*t)"), 1, 1.0), q).pass());
    CHECK(check_phi_star(minkowski(1, 1.0), q).pass());
    CHECK(check_phi_star(minkowski(2, 1.0), q).pass());
    CHECK(check_phi_star(swap_negate(1.0), q).pass());
}

TEST_CASE("phi_sharp factorizations") {
    const CheckReport pt = check_phi_sharp(pt_laplacian(t_expr("3 + sin(2*pi*t)"), 1, 1.0));
    CHECK(pt.at("phi_sharp").verdict == Verdict::pass);
    CHECK(check_phi_sharp(scaled(t_expr("2 + cos(2*pi*t)"), identity(2, 1.0))).pass());
    CHECK(check_phi_sharp(swap_negate(1.0)).pass());
    CHECK_THROWS_AS(check_phi_sharp(rotation(1.0)), MissingFactorization);
}

TEST_CASE("legacy monotonicity and coercivity") {
    const CheckReport sw = check_legacy_monotone_coercive(swap_negate(1.0));
    const CheckEntry& h1 = sw.at("H1");
    CHECK(h1.verdict == Verdict::fail);
    CHECK(h1.evidence.at("min_inner_product") < 0.0);
    const Vec a = v2(h1.evidence.at("witness_a1"), h1.evidence.at("witness_a2"));
    const Vec b = v2(h1.evidence.at("witness_b1"), h1.evidence.at("witness_b2"));
    const Vec d = a - b;
    const Vec pd = v2(-d[1], -d[0]);  // swap_negate is linear
    CHECK(pd.dot(d) < 0.0);
    CHECK((phi_eval(swap_negate(1.0), 0.0, v2(1, 1)) - phi_eval(swap_negate(1.0), 0.0, v2(0, 0))).dot(v2(1, 1)) ==
          -2.0);

    const CheckReport pl = check_legacy_monotone_coercive(p_laplacian(3.0, 1, 1.0));
    CHECK(pl.at("H1").verdict == Verdict::pass);
    CHECK(pl.at("H2").verdict == Verdict::pass);

    const CheckReport mk = check_legacy_monotone_coercive(minkowski(1, 1.0));
    CHECK_FALSE(passes(mk.at("H2").verdict));
    const CheckReport mc = check_legacy_monotone_coercive(mean_curvature(1, 1.0));
    CHECK(mc.at("H2").verdict == Verdict::fail);
}

TEST_CASE("serial and parallel checks agree") {
    PhiCheckOptions a, b;
    a.exec = Exec::serial;
    b.exec = Exec::parallel;
    const PhiOperator op = pt_laplacian(t_expr("3 + sin(2*pi*t)"), 1, 1.0);
    const CheckReport ra = check_phi_axioms(op, a), rb = check_phi_axioms(op, b);
    for (std::size_t i = 0; i < ra.entries.size(); ++i) CHECK(ra.entries[i].evidence == rb.entries[i].evidence);
}

TEST_CASE("ball samples are deterministic and start at zero") {
    const auto a = ball_samples(2, 1.0, 16, 3), b = ball_samples(2, 1.0, 16, 3);
    REQUIRE(a.size() == 16);
    CHECK(a.front().norm() == 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i].norm() < 1.0);
    }
}
