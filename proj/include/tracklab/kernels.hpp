#pragma once

#include <span>
#include <vector>

#include "tracklab/grid.hpp"

// Data-parallel inner loops. Each kernel has a serial reference used by the
// tests and an OpenMP version; the dispatching entry points pick OpenMP only
// for large inputs outside an enclosing parallel region.
namespace tracklab::kernels {

/// Isotropic Gaussian bump centered on an integer heatmap cell.
struct HeatBlob {
    int gx = 0;
    int gy = 0;
    double sigma = 1.0;
};

void render_heat_serial(std::span<const HeatBlob> blobs, DenseGrid& heat);
void render_heat_omp(std::span<const HeatBlob> blobs, DenseGrid& heat);
void render_heat(std::span<const HeatBlob> blobs, DenseGrid& heat);

// Cells that dominate their 3x3 neighborhood with value >= threshold, in raster
// order. On plateaus only the first cell in raster order qualifies.
std::vector<int> find_peaks_serial(const DenseGrid& heat, double threshold);
std::vector<int> find_peaks_omp(const DenseGrid& heat, double threshold);
std::vector<int> find_peaks(const DenseGrid& heat, double threshold);

double sum_squares_serial(std::span<const double> x);
double sum_squares_omp(std::span<const double> x);
double sum_squares(std::span<const double> x);

/// y += a * x
void axpy_serial(double a, std::span<const double> x, std::span<double> y);
void axpy_omp(double a, std::span<const double> x, std::span<double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);

bool openmp_available();
int max_threads();

}  // namespace tracklab::kernels
