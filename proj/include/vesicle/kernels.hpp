#pragma once

#include <span>

#include <Eigen/Core>

#include "vesicle/harmonics.hpp"

// Transform kernels on orthonormal coefficient vectors (layout harmonic_offset).
// The plain names are ring-factored and OpenMP-parallel; the *_reference versions
// are direct per-node sums kept for testing and benchmarking.
namespace vesicle::kernels {

void synthesize(const QuadratureGrid& grid, int band, std::span<const double> coeffs,
                std::span<double> values);
void synthesize_reference(const QuadratureGrid& grid, int band,
                          std::span<const double> coeffs, std::span<double> values);

void analyze(const QuadratureGrid& grid, int band, std::span<const double> values,
             std::span<double> coeffs);
void analyze_reference(const QuadratureGrid& grid, int band,
                       std::span<const double> values, std::span<double> coeffs);

/// Cartesian surface gradient on S^2 of the band-limited field.
void synthesize_gradient(const QuadratureGrid& grid, int band,
                         std::span<const double> coeffs,
                         std::span<Eigen::Vector3d> grad);
void synthesize_gradient_reference(const QuadratureGrid& grid, int band,
                                   std::span<const double> coeffs,
                                   std::span<Eigen::Vector3d> grad);

}  // namespace vesicle::kernels
