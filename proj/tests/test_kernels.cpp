#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tracklab/kernels.hpp"

using namespace tracklab;
using namespace tracklab::kernels;

namespace {

std::vector<HeatBlob> random_blobs(std::mt19937_64& rng, int w, int h, int n) {
    std::uniform_int_distribution<int> gx(0, w - 1), gy(0, h - 1);
    std::uniform_real_distribution<double> s(1.0, 4.0);
    std::vector<HeatBlob> blobs;
    for (int i = 0; i < n; ++i) blobs.push_back({gx(rng), gy(rng), s(rng)});
    return blobs;
}

}  // namespace

TEST_CASE("render_heat serial and OpenMP agree") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
        const auto blobs = random_blobs(rng, 120, 72, 1 + k);
        DenseGrid a(120, 72, 1), b(120, 72, 1), c(120, 72, 1);
        render_heat_serial(blobs, a);
        render_heat_omp(blobs, b);
        render_heat(blobs, c);
        CHECK(a == b);
        CHECK(a == c);
    }
}

TEST_CASE("render_heat is a max of Gaussians") {
    const std::vector<HeatBlob> blobs{{5, 5, 1.5}, {6, 5, 1.5}};
    DenseGrid heat(12, 12, 1);
    render_heat_serial(blobs, heat);
    CHECK(heat.at(5, 5) == doctest::Approx(1.0));
    CHECK(heat.at(6, 5) == doctest::Approx(1.0));
    const double g = std::exp(-1.0 / (2 * 1.5 * 1.5));
    CHECK(heat.at(7, 5) == doctest::Approx(g));
    CHECK(heat.at(4, 5) == doctest::Approx(g));
}

TEST_CASE("find_peaks serial and OpenMP agree") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        DenseGrid heat(90, 60, 1);
        for (double& v : heat.data()) v = u(rng);
        CHECK(find_peaks_serial(heat, 0.4) == find_peaks_omp(heat, 0.4));
        CHECK(find_peaks_serial(heat, 0.4) == find_peaks(heat, 0.4));
    }
}

TEST_CASE("find_peaks plateau keeps the first cell") {
    DenseGrid heat(6, 6, 1);
    heat.at(2, 2) = 0.8;
    heat.at(3, 2) = 0.8;
    const auto p = find_peaks_serial(heat, 0.4);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == 2 * 6 + 2);
    CHECK(find_peaks_serial(heat, 0.9).empty());
}

TEST_CASE("sum_squares and axpy") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(100000), y(100000);
    for (double& v : x) v = n(rng);
    for (double& v : y) v = n(rng);
    CHECK(sum_squares_omp(x) == doctest::Approx(sum_squares_serial(x)).epsilon(1e-12));
    CHECK(sum_squares(x) == doctest::Approx(sum_squares_serial(x)).epsilon(1e-12));

    std::vector<double> y1 = y, y2 = y;
    axpy_serial(-0.25, x, y1);
    axpy_omp(-0.25, x, y2);
    CHECK(y1 == y2);
    CHECK(y1[17] == doctest::Approx(y[17] - 0.25 * x[17]));

    const std::vector<double> three{3.0, 4.0};
    CHECK(sum_squares_serial(three) == 25.0);
}
