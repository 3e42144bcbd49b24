// Serial reference vs OpenMP kernels at the sizes the solvers actually hit
// (the Newton Jacobian assembly dominates; it is O(N^4)).

#include "qmaxwell/kernels.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

namespace {

struct Inputs {
    Eigen::MatrixXd v;
    Eigen::VectorXd w;
    Eigen::MatrixXd g;
};

Inputs make_inputs(int n) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    Inputs in;
    in.v.resize(n, n);
    in.w.resize(n);
    in.g.resize(n, n);
    for (int i = 0; i < n; ++i) {
        in.w[i] = normal(rng);
        for (int j = 0; j < n; ++j) {
            in.v(i, j) = normal(rng);
            in.g(i, j) = normal(rng);
        }
    }
    in.g = (0.5 * (in.g + in.g.transpose())).eval();
    return in;
}

void bm_square_sum_serial(benchmark::State& state) {
    const Inputs in = make_inputs(static_cast<int>(state.range(0)));
    Eigen::VectorXd out;
    for (auto _ : state) {
        qmax::kernels::weighted_square_sum_serial(in.v, in.w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_square_sum_parallel(benchmark::State& state) {
    const Inputs in = make_inputs(static_cast<int>(state.range(0)));
    Eigen::VectorXd out;
    for (auto _ : state) {
        qmax::kernels::weighted_square_sum_parallel(in.v, in.w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_outer_sum_serial(benchmark::State& state) {
    const Inputs in = make_inputs(static_cast<int>(state.range(0)));
    Eigen::MatrixXd out;
    for (auto _ : state) {
        qmax::kernels::weighted_outer_sum_serial(in.v, in.w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_outer_sum_parallel(benchmark::State& state) {
    const Inputs in = make_inputs(static_cast<int>(state.range(0)));
    Eigen::MatrixXd out;
    for (auto _ : state) {
        qmax::kernels::weighted_outer_sum_parallel(in.v, in.w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_jacobian_serial(benchmark::State& state) {
    const Inputs in = make_inputs(static_cast<int>(state.range(0)));
    Eigen::MatrixXd out;
    for (auto _ : state) {
        qmax::kernels::divided_difference_response_serial(in.v, in.g, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void bm_jacobian_parallel(benchmark::State& state) {
    const Inputs in = make_inputs(static_cast<int>(state.range(0)));
    Eigen::MatrixXd out;
    for (auto _ : state) {
        qmax::kernels::divided_difference_response_parallel(in.v, in.g, out);
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(bm_square_sum_serial)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(bm_square_sum_parallel)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(bm_outer_sum_serial)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_outer_sum_parallel)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_jacobian_serial)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(bm_jacobian_parallel)->Arg(32)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
