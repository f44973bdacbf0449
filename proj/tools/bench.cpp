// benchmark comparing the OpenMP kernels with their serial reference paths
#include <chrono>
#include <cstdio>

#include "cusp/dyson.hpp"
#include "cusp/ensemble.hpp"
#include "cusp/flow.hpp"
#include "cusp/parallel.hpp"
#include "cusp/pearcey.hpp"
#include "cusp/tuning.hpp"

using namespace cusp;

namespace {

template <typename F>
double time_it(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", max_threads());
    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");

    {
        const auto model = two_block_model(32, 32, 1, 1, 1, -1.02, 1.02);
        double ts = 0, tp = 0;
        ts = time_it([&] { density_grid_serial(model, -3.0, 3.0, 0.002, 1e-7); });
        tp = time_it([&] { density_grid(model, -3.0, 3.0, 0.002, 1e-7); });
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "density grid (adaptive)", ts, tp, ts / tp);
    }
    {
        double ts = 0, tp = 0;
        ts = time_it([&] {
            for (double x = -2.0; x <= 2.0; x += 0.25) pearcey_kernel_serial(x, -x, 1.0);
        });
        tp = time_it([&] {
            for (double x = -2.0; x <= 2.0; x += 0.25) pearcey_kernel(x, -x, 1.0);
        });
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "limiting kernel quadrature", ts, tp,
                    ts / tp);
    }
    {
        EnsembleConfig cfg;
        cfg.model = flat_model(512);
        cfg.trials = 8;
        double ts = 0, tp = 0;
        ts = time_it([&] { run_trials_serial(cfg); });
        tp = time_it([&] { run_trials(cfg); });
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "ensemble trials (N=512 x 8)", ts, tp,
                    ts / tp);
    }
    {
        const auto tuning = tune_two_block_gap(64, 8e-3);
        DysonEvaluator eval(tuning.model);
        std::vector<double> times;
        for (int i = 1; i <= 8; ++i) times.push_back(0.005 * i);
        double ts = 0, tp = 0;
        ts = time_it([&] { flow_trajectory_serial(eval, times, -0.3, 0.3); });
        tp = time_it([&] { flow_trajectory(eval, times, -0.3, 0.3); });
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "flow trajectory (8 times)", ts, tp,
                    ts / tp);
    }
    return 0;
}
