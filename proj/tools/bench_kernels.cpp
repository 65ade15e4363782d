// Serial reference vs OpenMP kernels on a reduced Minkowski problem.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "percont/averaging.hpp"
#include "percont/kernels.hpp"
#include "percont/phi.hpp"
#include "percont/systems.hpp"

using namespace percont;

namespace {

double seconds(const std::function<void()>& f, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const int M = argc > 1 ? std::atoi(argv[1]) : 2048;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    const phi::PhiOperator op = phi::minkowski(1, 1.0);
    const SecondOrderField f = parse_second_order_field({"sin(2*pi*t) - x + 0.1*y"}, 1);
    const HomotopyFamily fam = make_homotopy(reduce_second_order(op, f), HomotopyKind::scaling);

    Vec X(2 * M);
    for (int j = 0; j < M; ++j) {
        const double t = static_cast<double>(j) / M;
        X[2 * j] = 0.1 * std::sin(2 * M_PI * t);
        X[2 * j + 1] = 0.3 * std::cos(2 * M_PI * t);
    }

    std::printf("threads %d, M %d, reps %d\n", max_threads(), M, reps);
    std::printf("%-12s %12s %12s %8s %s\n", "kernel", "serial_s", "parallel_s", "speedup", "identical");

    Vec rs, rp;
    const double ts = seconds([&] { rs = midpoint_residual(fam, X, M, 0.7, Exec::serial); }, reps);
    const double tp = seconds([&] { rp = midpoint_residual(fam, X, M, 0.7, Exec::parallel); }, reps);
    std::printf("%-12s %12.6f %12.6f %8.2f %s\n", "residual", ts, tp, ts / tp, rs == rp ? "yes" : "no");

    CyclicBlockJacobian js, jp;
    const double tjs = seconds([&] { js = midpoint_jacobian(fam, X, M, 0.7, Exec::serial); }, reps);
    const double tjp = seconds([&] { jp = midpoint_jacobian(fam, X, M, 0.7, Exec::parallel); }, reps);
    bool same = js.A.size() == jp.A.size();
    for (std::size_t j = 0; same && j < js.A.size(); ++j) same = js.A[j] == jp.A[j] && js.B[j] == jp.B[j];
    std::printf("%-12s %12.6f %12.6f %8.2f %s\n", "jacobian", tjs, tjp, tjs / tjp, same ? "yes" : "no");

    MeshFunction x(M, 1.0, 2);
    x.values.assign(X.data(), X.data() + X.size());
    MeshFunction ns(M, 1.0, 2), np(M, 1.0, 2);
    const double tns = seconds([&] { ns = mawhin_operator(fam, x, 0.7, Exec::serial); }, reps);
    const double tnp = seconds([&] { np = mawhin_operator(fam, x, 0.7, Exec::parallel); }, reps);
    std::printf("%-12s %12.6f %12.6f %8.2f %s\n", "mawhin", tns, tnp, tns / tnp, ns.values == np.values ? "yes" : "no");
    return 0;
}
