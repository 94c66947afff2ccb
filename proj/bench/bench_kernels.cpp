// Serial vs OpenMP timings for the grid kernels.
// Usage: bench_kernels [repetitions]

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "tracklab/kernels.hpp"

using namespace tracklab;
namespace k = tracklab::kernels;

namespace {

double best_ms(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, int size, double serial, double omp, bool same) {
    std::printf("%-12s %9d %10.3f %10.3f %8.2fx  %s\n", name, size, serial, omp, serial / omp, same ? "ok" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 20;
    std::printf("openmp %s, %d threads, best of %d\n", k::openmp_available() ? "on" : "off", k::max_threads(), reps);
    std::printf("%-12s %9s %10s %10s %9s\n", "kernel", "size", "serial ms", "omp ms", "speedup");

    std::mt19937_64 rng(1);
    for (int side : {120, 480, 1200}) {
        const int w = side, h = side * 3 / 5;
        std::uniform_int_distribution<int> gx(0, w - 1), gy(0, h - 1);
        std::uniform_real_distribution<double> sig(1.0, 6.0);
        std::vector<k::HeatBlob> blobs(std::max(4, side / 10));
        for (auto& b : blobs) b = {gx(rng), gy(rng), sig(rng)};

        DenseGrid a(w, h, 1), b(w, h, 1);
        const double ts = best_ms(reps, [&] { k::render_heat_serial(blobs, a); });
        const double to = best_ms(reps, [&] { k::render_heat_omp(blobs, b); });
        row("render_heat", w * h, ts, to, a == b);

        std::vector<int> pa, pb;
        const double ps = best_ms(reps, [&] { pa = k::find_peaks_serial(a, 0.4); });
        const double po = best_ms(reps, [&] { pb = k::find_peaks_omp(a, 0.4); });
        row("find_peaks", w * h, ps, po, pa == pb);
    }

    for (int n : {1 << 12, 1 << 16, 1 << 20, 1 << 23}) {
        std::normal_distribution<double> nd(0.0, 1.0);
        std::vector<double> x(n), y(n, 0.0), z(n, 0.0);
        for (double& v : x) v = nd(rng);
        double s1 = 0.0, s2 = 0.0;
        const double ss = best_ms(reps, [&] { s1 = k::sum_squares_serial(x); });
        const double so = best_ms(reps, [&] { s2 = k::sum_squares_omp(x); });
        row("sum_squares", n, ss, so, std::abs(s1 - s2) <= 1e-9 * s1);

        const double as = best_ms(reps, [&] { k::axpy_serial(0.5, x, y); });
        const double ao = best_ms(reps, [&] { k::axpy_omp(0.5, x, z); });
        row("axpy", n, as, ao, y == z);
    }
    return 0;
}
