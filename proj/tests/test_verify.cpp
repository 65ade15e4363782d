#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "percont/errors.hpp"
#include "percont/verify.hpp"
#include "product_systems.hpp"

using namespace percont;
using namespace percont::verify;
using oracle::kPi;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Window window2(double rho0, double rho1, double lo, double hi) {
    Window w;
    w.rho = {rho0, rho1};
    w.omega1_lo = {lo};
    w.omega1_hi = {hi};
    return w;
}

CyclicSystem two_block(const std::string& g, const std::string& h) { return build_cyclic(2, 1, 1.0, {{g}}, {h}, {}); }

const QuadratureRule coarse{QuadratureKind::composite_simpson, 16};

RunOptions quick(int M) {
    RunOptions o;
    o.M = M;
    return o;
}

SecondOrderField manufactured_f() {
    return parse_second_order_field({"-0.4*pi^2*sin(2*pi*t)/(1 - (0.2*pi*cos(2*pi*t))^2)^1.5 + x - 0.1*sin(2*pi*t)"},
                                    1);
}

Window minkowski_window() {
    Window w = window2(1.0, 5.0, -0.5, 0.5);
    w.derivative_bound = 0.99;
    return w;
}

}  // namespace

TEST_CASE("h2 on a Minkowski reduction") {
    const CyclicSystem s = reduce_second_order(phi::minkowski(1, 1.0), parse_second_order_field({"-x"}, 1));
    const CheckReport r = check_h2(s, window2(2.0, 0.9, -1.0, 1.0), QuadratureRule{});
    CHECK(r.at("h2_origin").verdict == Verdict::pass);
    CHECK(r.at("h2_zero").verdict == Verdict::pass);
    CHECK(r.at("h2_injective").verdict == Verdict::pass);
}

TEST_CASE("h2 failures") {
    const CheckReport sn = check_h2(two_block("sin(x2)", "x1"), window2(2.0, 4.0, -1.0, 1.0), QuadratureRule{});
    CHECK(sn.at("h2_zero").verdict == Verdict::fail);
    CHECK(std::abs(std::abs(sn.at("h2_zero").evidence.at("witness_w_1")) - kPi) <= 1e-6);
    CHECK(check_h2(two_block("sin(x2)", "x1"), window2(2.0, 1.5, -1.0, 1.0), QuadratureRule{}).pass());

    const CheckReport sq = check_h2(two_block("x2^2", "x1"), window2(2.0, 2.0, -1.0, 1.0), QuadratureRule{});
    CHECK(sq.at("h2_injective").verdict == Verdict::fail);

    // zero only near t = 0.37, off the quadrature nodes
    const CheckReport loc =
        check_h2(two_block("x2*(1 + 0.5*x2^2) - 0.9*exp(-200*(t - 0.37)^2)*x2", "x1"), window2(2.0, 2.0, -1, 1),
                 QuadratureRule{});
    CHECK(loc.at("h2_zero").verdict == Verdict::pass);
}

TEST_CASE("h3 and h4") {
    const CheckReport a = check_h3_h4(two_block("x2", "x1 - 0.3"), window2(3.0, 3.0, -1.0, 1.0), QuadratureRule{});
    CHECK(a.pass());
    CHECK(a.at("h4").evidence.at("degree") == 1.0);
    CHECK(a.at("h4").evidence.at("certified") == 1.0);

    std::vector<Vec> zeros;
    const Window w = window2(3.0, 3.0, -2.0, 2.0);
    const CheckReport b = check_h3_h4(h_hat(two_block("x2", "x1^2 - 1"), QuadratureRule{}), w, {}, &zeros);
    CHECK(b.at("h4").verdict == Verdict::fail);
    CHECK(b.at("h4").evidence.at("degree") == 0.0);
    REQUIRE(zeros.size() == 2);
    CHECK(zeros[0][0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(zeros[1][0] == doctest::Approx(1.0).epsilon(1e-9));

    const CheckReport c = check_h3_h4(two_block("x2", "x1 - 1"), window2(3.0, 3.0, -1.0, 1.0), QuadratureRule{});
    CHECK(c.at("h3").verdict == Verdict::fail);
    CHECK_FALSE(c.pass());
}

TEST_CASE("h4 degree is stable under excision") {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CyclicSystem s = two_block("x2", "(x1 - 0.2)*(x1 + 0.3)*(x1 - 0.5)");
    const int base = static_cast<int>(check_h3_h4(s, window2(3, 3, -0.4, 0.6), QuadratureRule{}).at("h4").evidence.at("degree"));
    CHECK(base == 1);
    for (int k = 0; k < 5; ++k) {
        const double lo = -0.4 - 2.0 * u(rng), hi = 0.6 + 2.0 * u(rng);
        const CheckReport r = check_h3_h4(s, window2(3, 3, lo, hi), QuadratureRule{});
        CHECK(r.at("h4").evidence.at("degree") == base);
    }
}

TEST_CASE("product formula worked cases") {
    const Window w = window2(2.0, 2.0, -1.0, 1.0);
    const ProductFormula a = product_formula_check(two_block("x2", "x1"), w, QuadratureRule{});
    CHECK(a.direct == -1);
    CHECK(a.eta_product == -1);
    CHECK(a.theorem_product == -1);
    CHECK(a.certified);
    CHECK(oracle::winding_dense([](const Vec& s) { return Vec((Vec(2) << -s[1], -s[0]).finished()); }, -1, 1, -2, 2) ==
          -1);

    const ProductFormula b = product_formula_check(two_block("x2^3", "-x1"), w, QuadratureRule{});
    CHECK(b.direct == 1);
    CHECK(b.eta_product == 1);
    CHECK(b.theorem_product == 1);
    CHECK(oracle::winding_dense([](const Vec& s) { return Vec((Vec(2) << -s[1] * s[1] * s[1], s[0]).finished()); }, -1,
                                1, -2, 2) == 1);

    const ProductFormula c = product_formula_check(two_block("x2", "x1^2 - 1"), window2(2, 2, -2, 2), QuadratureRule{});
    CHECK(c.direct == 0);
    CHECK(c.eta_product == 0);
    CHECK(c.theorem_product == 0);
    CHECK(product_formula_entry(c).verdict == Verdict::pass);
}

TEST_CASE("product formula on random systems") {
    std::mt19937_64 rng(20240521);
    const std::vector<std::pair<int, int>> shapes = {{2, 1}, {3, 1}, {2, 2}, {3, 2}, {2, 1}, {3, 1}};
    for (const auto& [n, m] : shapes) {
        const oracle::ProductCase pc = oracle::random_product_case(rng, n, m);
        const ProductFormula pf = product_formula_check(pc.system(), pc.window(), coarse);
        INFO("n = " << n << ", m = " << m);
        CHECK(pf.direct == pc.direct_degree());
        CHECK(pf.eta_product == pf.direct);
        CHECK(pf.theorem_product == pf.direct);
    }
}

TEST_CASE("scaling pipeline on a forced linear system") {
    const HomotopyFamily fam = make_homotopy(two_block("x2", "x1 - 0.3 + 0.2*sin(2*pi*t)"), HomotopyKind::scaling);
    const RunResult r = run_theorem31(fam, window2(1.0, 1.0, -0.9, 0.9), quick(64));
    CHECK(r.pass());
    CHECK(r.theorem == "cyclic_scaling");
    REQUIRE(r.solutions.size() == 1);
    REQUIRE(r.product);
    CHECK(r.product->direct == -1);
    const Vec& X = r.solutions[0].values;
    const double a = -0.2 / (4 * kPi * kPi + 1);
    for (int j = 0; j < 64; ++j) CHECK(std::abs(X[2 * j] - 0.3 - a * std::sin(2 * kPi * j / 64.0)) <= 1e-4);
}

TEST_CASE("shrunken window stops with a boundary exit") {
    const HomotopyFamily fam = make_homotopy(two_block("x2", "x1 - 0.3 + 0.2*sin(2*pi*t)"), HomotopyKind::scaling);
    const RunResult r = run_theorem31(fam, window2(0.303, 1.0, -0.302, 0.302), quick(64));
    CHECK_FALSE(r.pass());
    REQUIRE(r.traces.size() == 1);
    CHECK(r.traces[0].status == TraceStatus::boundary_exit);
    CHECK(r.hypotheses.at("h1").verdict == Verdict::fail);
    CHECK_FALSE(r.stop_reason.empty());
}

TEST_CASE("no starting zero") {
    const HomotopyFamily fam = make_homotopy(two_block("x2", "x1^2 + 1"), HomotopyKind::scaling);
    const RunResult r = run_theorem31(fam, window2(2.0, 2.0, -1.0, 1.0), quick(32));
    CHECK_FALSE(r.pass());
    CHECK(r.traces.empty());
    CHECK(r.hypotheses.at("starts").verdict == Verdict::fail);
    CHECK(r.hypotheses.at("h4").verdict == Verdict::fail);
    CHECK_FALSE(r.stop_reason.empty());
}

TEST_CASE("deformation pipeline") {
    const CyclicSystem s = two_block("x2", "x1 - 0.3 + 0.2*sin(2*pi*t)");
    const HomotopyFamily fam =
        make_homotopy_from_exprs(s, HomotopyKind::deformation, {"x1 - 0.3 + lambda*0.2*sin(2*pi*t)"}, {"x1 - 0.3"});
    const RunResult r = run_theorem32(fam, window2(1.0, 1.0, -0.9, 0.9), quick(64));
    CHECK(r.pass());
    CHECK(r.theorem == "cyclic_deformation");
    const RunResult sc = run_theorem31(make_homotopy(s, HomotopyKind::scaling), window2(1.0, 1.0, -0.9, 0.9), quick(64));
    REQUIRE(r.solutions.size() == 1);
    REQUIRE(sc.solutions.size() == 1);
    CHECK((r.solutions[0].values - sc.solutions[0].values).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(r.traces[0].points.front().residual_norm <= 1e-10);
    CHECK_THROWS_AS(make_homotopy_from_exprs(s, HomotopyKind::deformation, {"x1 + lambda"}, {"x1 - 0.3"}),
                    EndpointMismatch);
}

TEST_CASE("Minkowski manufactured problem") {
    const RunResult r = run_theorem41(phi::minkowski(1, 1.0), manufactured_f(), minkowski_window(), quick(128));
    CHECK(r.pass());
    CHECK(r.theorem == "second_order_scaling");
    REQUIRE(r.recovered.size() == 1);
    const SecondOrderSolution& s = r.recovered[0];
    double err = 0.0, dmax = 0.0;
    for (int j = 0; j < 128; ++j) {
        err = std::max(err, std::abs(s.x.at(j, 0) - oracle::xstar(j / 128.0)));
        dmax = std::max(dmax, std::abs(s.dx.at(j, 0)));
    }
    CHECK(err <= 1e-3);
    CHECK(dmax < 1.0);
    CHECK(s.residual <= 1e-9);

    // independent recomputation of the second-order residual
    const PeriodicSolution& sol = r.solutions[0];
    const auto f = manufactured_f();
    const double dt = 1.0 / 128;
    double worst = 0.0;
    for (int j = 0; j < 128; ++j) {
        const int k = (j + 1) % 128;
        const double za = sol.values[2 * j + 1], zb = sol.values[2 * k + 1];
        const double ym = oracle::minkowski_inv(0.5 * (za + zb));
        const double xm = 0.5 * (sol.values[2 * j] + sol.values[2 * k]);
        worst = std::max(worst, std::abs((zb - za) / dt - f((j + 0.5) * dt, v1(xm), v1(ym))[0]));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("rotation is blocked before any run") {
    const SecondOrderField f = parse_second_order_field({"-x1", "-x2"}, 2);
    Window w;
    w.rho = {1.0, 1.0};
    w.omega1_lo = {-0.5, -0.5};
    w.omega1_hi = {0.5, 0.5};
    CHECK_THROWS_AS(run_theorem41(phi::rotation(1.0), f, w, quick(32)), PhiChecksFailed);
    try {
        run_theorem41(phi::rotation(1.0), f, w, quick(32));
    } catch (const PhiChecksFailed& e) {
        CHECK(std::string(e.what()).find("phi_star") != std::string::npos);
    }
}

TEST_CASE("classic forced oscillator") {
    const SecondOrderField f = parse_second_order_field({"-x + cos(2*pi*t)"}, 1);
    const RunResult r = run_theorem41(phi::identity(1, 1.0), f, window2(1.0, 1.0, -0.5, 0.5), quick(128));
    CHECK(r.pass());
    REQUIRE(r.traces.size() == 1);
    CHECK(r.traces[0].status == TraceStatus::reached_target);
    const double a = 1.0 / (1.0 - 4 * kPi * kPi);
    double err = 0.0;
    for (int j = 0; j < 128; ++j) err = std::max(err, std::abs(r.recovered[0].x.at(j, 0) - a * std::cos(2 * kPi * j / 128.0)));
    CHECK(err <= 1e-4);
}

TEST_CASE("f hat equals h hat") {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<phi::PhiOperator> ops = {phi::minkowski(1, 1.0), phi::p_laplacian(3.0, 1, 1.0),
                                               phi::identity(1, 1.0), phi::mean_curvature(1, 1.0)};
    for (int k = 0; k < 10; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const std::string fs = oracle::num(a) + "*x^3 + " + oracle::num(b) + "*sin(2*pi*t)*x + " + oracle::num(c) +
                               "*y + " + oracle::num(d) + "*cos(4*pi*t) + x*y^2";
        const SecondOrderField f = parse_second_order_field({fs}, 1);
        const AveragedMap hh = h_hat(reduce_second_order(ops[static_cast<std::size_t>(k % 4)], f), QuadratureRule{});
        double worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const double w = -1.0 + 0.1 * i;
            const double fhat = oracle::periodic_mean([&](double t) { return f(t, v1(w), v1(0.0))[0]; }, 1.0, 64);
            worst = std::max(worst, std::abs(hh(v1(w))[0] - fhat));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("phi hypotheses make star optional when sharp holds") {
    const CheckReport pt = phi_hypotheses(phi::pt_laplacian(expr::Expression::parse("3 + sin(2*pi*t)", {"t"}), 1, 1.0),
                                          QuadratureRule{}, {});
    CHECK(pt.pass());
    CHECK_FALSE(pt.at("phi_sharp").mandatory);
    CHECK_FALSE(pt.at("phi_star").mandatory);
    const CheckReport rot = phi_hypotheses(phi::rotation(1.0), QuadratureRule{}, {});
    CHECK_FALSE(rot.pass());
    CHECK(rot.at("phi_star").mandatory);
}
