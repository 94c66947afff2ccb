#include "tracklab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tracklab::kernels {

namespace {

constexpr std::size_t kParallelMinWork = 1 << 15;

bool use_parallel(std::size_t work) {
#ifdef _OPENMP
    return work >= kParallelMinWork && omp_get_max_threads() > 1 && !omp_in_parallel();
#else
    (void)work;
    return false;
#endif
}

void render_row(std::span<const HeatBlob> blobs, DenseGrid& heat, int gy) {
    for (const HeatBlob& b : blobs) {
        const int radius = static_cast<int>(std::ceil(3.0 * b.sigma));
        const int dy = gy - b.gy;
        if (dy < -radius || dy > radius) continue;
        const double denom = 2.0 * b.sigma * b.sigma;
        const int x0 = std::max(0, b.gx - radius);
        const int x1 = std::min(heat.width() - 1, b.gx + radius);
        for (int gx = x0; gx <= x1; ++gx) {
            const int dx = gx - b.gx;
            const double v = std::exp(-(dx * dx + dy * dy) / denom);
            double& cell = heat.at(gx, gy);
            if (v > cell) cell = v;
        }
    }
}

bool is_peak(const DenseGrid& heat, int gx, int gy, double threshold) {
    const double v = heat.at(gx, gy);
    if (!(v >= threshold)) return false;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = gx + dx;
            const int ny = gy + dy;
            if (nx < 0 || ny < 0 || nx >= heat.width() || ny >= heat.height()) continue;
            const double n = heat.at(nx, ny);
            const bool before = dy < 0 || (dy == 0 && dx < 0);
            if (n > v || (before && n == v)) return false;
        }
    }
    return true;
}

void check_same_size(std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
}

}  // namespace

void render_heat_serial(std::span<const HeatBlob> blobs, DenseGrid& heat) {
    for (int gy = 0; gy < heat.height(); ++gy) render_row(blobs, heat, gy);
}

void render_heat_omp(std::span<const HeatBlob> blobs, DenseGrid& heat) {
    const int rows = heat.height();
#pragma omp parallel for schedule(static)
    for (int gy = 0; gy < rows; ++gy) render_row(blobs, heat, gy);
}

void render_heat(std::span<const HeatBlob> blobs, DenseGrid& heat) {
    const std::size_t work = static_cast<std::size_t>(heat.width()) * heat.height() * blobs.size();
    if (use_parallel(work)) {
        render_heat_omp(blobs, heat);
    } else {
        render_heat_serial(blobs, heat);
    }
}

std::vector<int> find_peaks_serial(const DenseGrid& heat, double threshold) {
    std::vector<int> out;
    for (int gy = 0; gy < heat.height(); ++gy) {
        for (int gx = 0; gx < heat.width(); ++gx) {
            if (is_peak(heat, gx, gy, threshold)) out.push_back(gy * heat.width() + gx);
        }
    }
    return out;
}

std::vector<int> find_peaks_omp(const DenseGrid& heat, double threshold) {
    const int rows = heat.height();
    std::vector<std::vector<int>> per_row(static_cast<std::size_t>(rows));
#pragma omp parallel for schedule(static)
    for (int gy = 0; gy < rows; ++gy) {
        for (int gx = 0; gx < heat.width(); ++gx) {
            if (is_peak(heat, gx, gy, threshold)) per_row[gy].push_back(gy * heat.width() + gx);
        }
    }
    std::vector<int> out;
    for (const auto& r : per_row) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<int> find_peaks(const DenseGrid& heat, double threshold) {
    const std::size_t work = static_cast<std::size_t>(heat.width()) * heat.height() * 9;
    return use_parallel(work) ? find_peaks_omp(heat, threshold) : find_peaks_serial(heat, threshold);
}

double sum_squares_serial(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double sum_squares_omp(std::span<const double> x) {
    const long n = static_cast<long>(x.size());
    const double* p = x.data();
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (long i = 0; i < n; ++i) s += p[i] * p[i];
    return s;
}

double sum_squares(std::span<const double> x) {
    return use_parallel(x.size()) ? sum_squares_omp(x) : sum_squares_serial(x);
}

void axpy_serial(double a, std::span<const double> x, std::span<double> y) {
    check_same_size(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void axpy_omp(double a, std::span<const double> x, std::span<double> y) {
    check_same_size(x, y);
    const long n = static_cast<long>(x.size());
    const double* px = x.data();
    double* py = y.data();
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) py[i] += a * px[i];
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (use_parallel(x.size())) {
        axpy_omp(a, x, y);
    } else {
        axpy_serial(a, x, y);
    }
}

bool openmp_available() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace tracklab::kernels
