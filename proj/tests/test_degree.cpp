#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "percont/degree.hpp"
#include "percont/errors.hpp"

using namespace percont;
using namespace percont::degree;

namespace {

Region unit_box(int d) { return Region::box(std::vector<double>(d, -1.0), std::vector<double>(d, 1.0)); }

Eigen::MatrixXd random_nonsingular(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Eigen::MatrixXd a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = u(rng);
        if (std::abs(oracle::det(a)) > 0.05) return a;
    }
}

Map linear(const Eigen::MatrixXd& a) {
    return [a](const Vec& x) { return Vec(a * x); };
}

}  // namespace

TEST_CASE("one-dimensional sign rule") {
    CHECK(degree_1d([](double x) { return x; }, Region::interval(-1, 1)).value == 1);
    CHECK(degree_1d([](double x) { return 4 * x * x - 1; }, Region::interval(-1, 1)).value == 0);
    CHECK(degree_1d([](double x) { return x - 2; }, Region::interval(-1, 1)).value == 0);
    CHECK(degree_1d([](double x) { return 0.3 - x; }, Region::interval(-1, 1)).value == -1);
    const DegreeResult r = degree_1d([](double x) { return x; }, Region::interval(-1, 1));
    CHECK(r.certified);
    CHECK(r.method == Method::sign_1d);
}

TEST_CASE("boundary zeros are reported") {
    CHECK_THROWS_AS(degree_1d([](double x) { return x - 1; }, Region::interval(-1, 1)), ZeroOnBoundary);
    const Map f = [](const Vec& s) { return Vec(s - Vec::Constant(2, 1.0)); };
    CHECK_THROWS_AS(brouwer_degree(f, unit_box(2)), ZeroOnBoundary);
}

TEST_CASE("planar winding") {
    CHECK(degree_winding_2d([](const Vec& s) { return s; }, unit_box(2)).value == 1);
    CHECK(degree_winding_2d([](const Vec& s) { return Vec((Vec(2) << -s[1], -s[0]).finished()); }, unit_box(2))
              .value == -1);
    const Map square = [](const Vec& s) { return Vec((Vec(2) << s[0] * s[0] - s[1] * s[1], 2 * s[0] * s[1]).finished()); };
    const int expected = oracle::winding_dense(square, -1, 1, -1, 1);
    CHECK(expected == 2);
    CHECK(degree_winding_2d(square, unit_box(2)).value == expected);
    const Map cubic = [](const Vec& s) { return Vec((Vec(2) << -s[1] * s[1] * s[1], s[0]).finished()); };
    const Region big = Region::box({-2, -2}, {2, 2});
    CHECK(degree_winding_2d(cubic, big).value == 1);
    CHECK(oracle::winding_dense(cubic, -2, 2, -2, 2) == 1);
}

TEST_CASE("dispatch by dimension") {
    CHECK(brouwer_degree(lift([](double x) { return x; }), unit_box(1)).method == Method::sign_1d);
    CHECK(brouwer_degree([](const Vec& s) { return s; }, unit_box(2)).method == Method::winding_2d);
    const DegreeResult r3 = brouwer_degree([](const Vec& s) { return s; }, unit_box(3));
    CHECK(r3.method == Method::sign_sum);
    CHECK(r3.value == 1);
    CHECK_FALSE(r3.certified);
    CHECK(brouwer_degree(lift([](double x) { return 4 * x * x - 1; }), unit_box(1)).value == 0);
}

TEST_CASE("polygon regions") {
    const Region tri = Region::polygon({{-1.0, -1.0}, {2.0, -1.0}, {-1.0, 2.0}});
    CHECK(degree_winding_2d([](const Vec& s) { return s; }, tri).value == 1);
    const Region away = Region::polygon({{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}});
    CHECK(degree_winding_2d([](const Vec& s) { return s; }, away).value == 0);
}

TEST_CASE("linear-map law on 20 random 2x2 maps") {
    std::mt19937_64 rng(101);
    for (int k = 0; k < 20; ++k) {
        const Eigen::MatrixXd a = random_nonsingular(rng, 2);
        CHECK(degree_winding_2d(linear(a), unit_box(2)).value == oracle::sign(oracle::det(a)));
    }
}

TEST_CASE("antipodal rule in dimensions 1 and 2") {
    std::mt19937_64 rng(202);
    for (int d = 1; d <= 2; ++d) {
        for (int k = 0; k < 20; ++k) {
            const Eigen::MatrixXd a = random_nonsingular(rng, d);
            const Map f = linear(a);
            const Map g = [f](const Vec& x) { return Vec(-f(x)); };
            const int df = brouwer_degree(f, unit_box(d)).value;
            const int dg = brouwer_degree(g, unit_box(d)).value;
            CHECK(dg == (d % 2 == 0 ? df : -df));
        }
    }
}

TEST_CASE("excision on shrinking boxes") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const Map f = [](const Vec& s) {
        return Vec((Vec(2) << s[0] * s[0] * s[0] - s[1], s[0] + 2 * s[1] + 0.2 * s[1] * s[1]).finished());
    };
    const int full = degree_winding_2d(f, Region::box({-2, -2}, {2, 2})).value;
    CHECK(full == oracle::winding_dense(f, -2, 2, -2, 2));
    for (int k = 0; k < 10; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        CHECK(degree_winding_2d(f, Region::box({-2 * a, -2 * b}, {2 * c, 2 * d})).value == full);
    }
}

TEST_CASE("sign-sum agrees with winding on random polynomial maps") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int k = 0; k < 10; ++k) {
        const double c0 = u(rng), c1 = u(rng), e = u(rng);
        const Map f = [=](const Vec& s) {
            return Vec((Vec(2) << (s[0] - c0) * (s[0] + c1) + e * s[1], s[1] - 0.5 * s[0] * s[0] + c1).finished());
        };
        const Region box = Region::box({-1.7, -1.3}, {1.9, 1.6});
        DegreeResult w;
        try {
            w = degree_winding_2d(f, box);
        } catch (const ZeroOnBoundary&) {
            continue;
        }
        CHECK(degree_sign_sum(f, box).value == w.value);
    }
}

TEST_CASE("find_zeros clusters and sorts") {
    const Map f = lift([](double x) { return (x * x - 0.25) * (x - 0.7); });
    const auto zs = find_zeros(f, Box{{-1.0}, {1.0}});
    REQUIRE(zs.size() == 3);
    CHECK(zs[0][0] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(zs[1][0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(zs[2][0] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("near-boundary results are not certified") {
    const DegreeResult r = degree_1d([](double x) { return x - (1.0 - 1e-7); }, Region::interval(-1, 1));
    CHECK(r.value == 1);
    CHECK_FALSE(r.certified);
}

TEST_CASE("serial and parallel winding agree") {
    const Map f = [](const Vec& s) { return Vec((Vec(2) << std::sin(3 * s[0]) + s[1], s[0] - s[1] * s[1] * s[1]).finished()); };
    WindingOptions a, b;
    a.exec = Exec::serial;
    b.exec = Exec::parallel;
    CHECK(degree_winding_2d(f, unit_box(2), a).value == degree_winding_2d(f, unit_box(2), b).value);
}
