#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "percont/bvp.hpp"
#include "percont/errors.hpp"
#include "percont/kernels.hpp"

using namespace percont;
using oracle::kPi;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

HomotopyFamily scaling(const std::vector<std::vector<std::string>>& g, const std::vector<std::string>& h, double T) {
    return make_homotopy(build_cyclic(static_cast<int>(g.size()) + 1, 1, T, g, h, {}), HomotopyKind::scaling);
}

Vec sample(int M, double T, const std::function<Vec(double)>& f) {
    const Vec first = f(0.0);
    const Eigen::Index k = first.size();
    Vec X(M * k);
    for (int j = 0; j < M; ++j) X.segment(j * k, k) = f(T * j / M);
    return X;
}

// x'' = -x - 3 cos 2t on T = 2 pi has the unique periodic solution x = cos 2t.
HomotopyFamily forced_harmonic() { return scaling({{"x2"}}, {"-x1 - 3*cos(2*t)"}, 2 * kPi); }

Vec forced_exact(int M) {
    return sample(M, 2 * kPi, [](double t) { return Vec((Vec(2) << std::cos(2 * t), -2 * std::sin(2 * t)).finished()); });
}

HomotopyFamily manufactured() {
    const SecondOrderField f = parse_second_order_field(
        {"-0.4*pi^2*sin(2*pi*t)/(1 - (0.2*pi*cos(2*pi*t))^2)^1.5 + x - 0.1*sin(2*pi*t)"}, 1);
    return make_homotopy(reduce_second_order(phi::minkowski(1, 1.0), f), HomotopyKind::scaling);
}

double manufactured_error(int M) {
    const HomotopyFamily fam = manufactured();
    const Vec X0 = sample(M, 1.0, [](double t) {
        return Vec((Vec(2) << oracle::xstar(t), oracle::minkowski(oracle::dxstar(t))).finished());
    });
    const PeriodicSolution s = newton_correct(fam, X0, M, 1.0);
    double err = 0.0;
    for (int j = 0; j < M; ++j) err = std::max(err, std::abs(s.values[2 * j] - oracle::xstar(static_cast<double>(j) / M)));
    return err;
}

}  // namespace

TEST_CASE("constant kernel points have zero residual") {
    const HomotopyFamily fam = scaling({{"x2^3"}}, {"x1 - 0.4"}, 1.0);
    const Vec X = constant_mesh((Vec(2) << 0.7, 0.0).finished(), 16);
    CHECK(residual(fam, X, 16, 0.0).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("residual of the forced oscillator at the exact solution") {
    const int M = 128;
    CHECK(residual(forced_harmonic(), forced_exact(M), M, 1.0).lpNorm<Eigen::Infinity>() <= 1e-2);
    const HomotopyFamily harmonic = scaling({{"x2"}}, {"-x1"}, 2 * kPi);
    const Vec X = sample(M, 2 * kPi, [](double t) { return Vec((Vec(2) << std::sin(t), std::cos(t)).finished()); });
    CHECK(residual(harmonic, X, M, 1.0).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("nodes outside D") {
    const CyclicSystem s = build_cyclic(2, 1, 1.0, {{"x2"}}, {"x1"}, {BlockDomain::ball(1, 1.0), BlockDomain::whole(1)});
    const HomotopyFamily fam = make_homotopy(s, HomotopyKind::scaling);
    Vec X = constant_mesh((Vec(2) << 0.0, 0.0).finished(), 8);
    X[6] = 2.0;
    CHECK_THROWS_AS(residual(fam, X, 8, 1.0), DomainViolation);
}

TEST_CASE("Jacobian of a linear system matches the analytic stencil") {
    const HomotopyFamily fam = scaling({{"2*x2"}}, {"-x1 + 0.5*x2"}, 1.0);
    const int M = 8;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    Vec X(2 * M);
    for (Eigen::Index i = 0; i < X.size(); ++i) X[i] = u(rng);
    const CyclicBlockJacobian J = jacobian_fd(fam, X, M, 1.0);
    Eigen::Matrix2d F;
    F << 0, 2, -1, 0.5;
    const double dt = 1.0 / M;
    const Eigen::Matrix2d A = -Eigen::Matrix2d::Identity() / dt - 0.5 * F;
    const Eigen::Matrix2d B = Eigen::Matrix2d::Identity() / dt - 0.5 * F;
    for (int j = 0; j < M; ++j) {
        CHECK((J.A[j] - A).lpNorm<Eigen::Infinity>() <= 1e-6);
        CHECK((J.B[j] - B).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
}

TEST_CASE("stencil structure at M = 4") {
    const HomotopyFamily fam = scaling({{"x2"}}, {"-x1^3"}, 1.0);
    const int M = 4;
    const Vec X = sample(M, 1.0, [](double t) { return Vec((Vec(2) << 0.3 + t, -0.2 * t).finished()); });
    const Eigen::MatrixXd D = jacobian_fd(fam, X, M, 1.0).to_dense();
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) {
            const bool allowed = c == r || c == (r + 1) % M;
            const double blk = D.block(2 * r, 2 * c, 2, 2).lpNorm<Eigen::Infinity>();
            if (!allowed) CHECK(blk == 0.0);
            if (allowed) CHECK(blk > 0.0);
        }
    const SpMat S = jacobian_fd(fam, X, M, 1.0).to_sparse();
    CHECK((Eigen::MatrixXd(S) - D).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("unused variables give zero columns") {
    const HomotopyFamily fam = scaling({{"x2"}}, {"sin(x1)"}, 1.0);
    const int M = 6;
    const Vec X = sample(M, 1.0, [](double t) { return Vec((Vec(2) << t, 1 - t).finished()); });
    const CyclicBlockJacobian J = jacobian_fd(fam, X, M, 1.0);
    const double dt = 1.0 / M;
    for (int j = 0; j < M; ++j) {
        CHECK(std::abs(J.A[j](0, 0) + 1 / dt) <= 1e-8);  // g1 ignores x1
        CHECK(std::abs(J.A[j](1, 1) + 1 / dt) <= 1e-8);  // h ignores x2
    }
}

TEST_CASE("Newton at an exact discrete solution") {
    const int M = 64;
    const HomotopyFamily fam = forced_harmonic();
    const PeriodicSolution s = newton_correct(fam, forced_exact(M), M, 1.0);
    const PeriodicSolution again = newton_correct(fam, s.values, M, 1.0);
    CHECK(again.iterations <= 1);
    CHECK(again.residual_norm <= 1e-10);
}

TEST_CASE("Newton recovers the forced oscillator from a noisy start") {
    const int M = 128;
    const HomotopyFamily fam = forced_harmonic();
    Vec X0 = forced_exact(M);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 0.01);
    for (Eigen::Index i = 0; i < X0.size(); ++i) X0[i] += n(rng);
    const PeriodicSolution s = newton_correct(fam, X0, M, 1.0);
    CHECK(s.residual_norm <= 1e-10);
    CHECK(residual(fam, s.values, M, 1.0).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((s.values - forced_exact(M)).lpNorm<Eigen::Infinity>() <= 2e-3);
}

TEST_CASE("no periodic solution beyond the fold") {
    // x'' = -(4 x^2 + 2 lambda - 1) at lambda = 0.75 forces x' to decrease.
    const HomotopyFamily fam = scaling({{"x2"}}, {"-(4*x1^2 + 0.5)"}, 1.0);
    const Vec X0 = constant_mesh((Vec(2) << 0.0, 0.0).finished(), 32);
    CHECK_THROWS_AS(newton_correct(fam, X0, 32, 1.0), ConvergenceFailure);
}

TEST_CASE("starting points from the averaged map") {
    Window w;
    w.rho = {3.0, 3.0};
    w.omega1_lo = {-2.0};
    w.omega1_hi = {2.0};
    const CyclicSystem a = build_cyclic(2, 1, 1.0, {{"x2"}}, {"x1 - 0.3"}, {});
    const auto sa = solve_averaged_start(a, w, QuadratureRule{}, 16);
    REQUIRE(sa.size() == 1);
    CHECK(sa[0].w[0] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(sa[0].X0.size() == 32);

    const CyclicSystem b = build_cyclic(2, 1, 1.0, {{"x2"}}, {"x1^2 - 1"}, {});
    const auto sb = solve_averaged_start(b, w, QuadratureRule{}, 16);
    REQUIRE(sb.size() == 2);
    CHECK(sb[0].w[0] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(sb[1].w[0] == doctest::Approx(1.0).epsilon(1e-10));

    const CyclicSystem c = build_cyclic(2, 1, 1.0, {{"x2"}}, {"x1^2 + 1"}, {});
    CHECK_THROWS_AS(solve_averaged_start(c, w, QuadratureRule{}, 16), NoStartingZero);
}

TEST_CASE("second-order accuracy on the manufactured problem") {
    const double e1 = manufactured_error(64), e2 = manufactured_error(128), e3 = manufactured_error(256);
    CHECK(e3 <= 1e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("translation consistency for autonomous systems") {
    const HomotopyFamily fam = scaling({{"x2"}}, {"-x1 - x1^3 + 0.2*x2"}, 1.0);
    const int M = 32, k = 5;
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1, 1);
    Vec X(2 * M);
    for (Eigen::Index i = 0; i < X.size(); ++i) X[i] = u(rng);
    Vec S(2 * M);
    for (int j = 0; j < M; ++j) S.segment(2 * j, 2) = X.segment(2 * ((j + k) % M), 2);
    const Vec r = residual(fam, X, M, 0.6), rs = residual(fam, S, M, 0.6);
    for (int j = 0; j < M; ++j) CHECK(rs.segment(2 * j, 2) == r.segment(2 * ((j + k) % M), 2));
}

TEST_CASE("serial and parallel kernels are bit-identical") {
    const HomotopyFamily fam = manufactured();
    const int M = 96;
    const Vec X = sample(M, 1.0, [](double t) { return Vec((Vec(2) << 0.2 * std::cos(2 * kPi * t), 0.1 * t).finished()); });
    CHECK(midpoint_residual(fam, X, M, 0.4, Exec::serial) == midpoint_residual(fam, X, M, 0.4, Exec::parallel));
    const CyclicBlockJacobian a = midpoint_jacobian(fam, X, M, 0.4, Exec::serial);
    const CyclicBlockJacobian b = midpoint_jacobian(fam, X, M, 0.4, Exec::parallel);
    for (int j = 0; j < M; ++j) {
        CHECK(a.A[j] == b.A[j]);
        CHECK(a.B[j] == b.B[j]);
    }
    CHECK(midpoint_lambda_derivative(fam, X, M, 0.4, Exec::serial) ==
          midpoint_lambda_derivative(fam, X, M, 0.4, Exec::parallel));
}

TEST_CASE("lambda derivative of the scaling family") {
    const HomotopyFamily fam = scaling({{"x2"}}, {"x1^2 - 0.5"}, 1.0);
    const int M = 8;
    const Vec X = sample(M, 1.0, [](double t) { return Vec((Vec(2) << t, 0.3).finished()); });
    const Vec d = midpoint_lambda_derivative(fam, X, M, 0.5, Exec::serial);
    const Vec fd = (residual(fam, X, M, 0.5 + 1e-6) - residual(fam, X, M, 0.5 - 1e-6)) / 2e-6;
    CHECK((d - fd).lpNorm<Eigen::Infinity>() <= 1e-6);
}
