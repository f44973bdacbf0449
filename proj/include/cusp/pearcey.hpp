#pragma once

#include <vector>

#include "cusp/common.hpp"

namespace cusp {

/// Double-contour discretisation. The V-shaped branches of the z-contour are
/// shifted horizontally by +-deformation_offset so they clear the w-contour
/// (the imaginary axis); the integrand is analytic in between, so the value
/// is unchanged while the 1/(w-z) factor stays bounded.
struct ContourSpec {
    double truncation_radius = 8.0;  // integrand ~ exp(-R^4/4) along the rays
    int panels_per_unit = 4;         // 12-node Gauss-Legendre panels per unit length
    double deformation_offset = 0.5;
};

struct KernelEvaluation {
    double value = 0.0;
    double abs_error_estimate = 0.0;  // difference between quadrature refinements
    double imag_defect = 0.0;         // |Im| of the assembled value; should vanish
    ContourSpec config;
};

/// Extended Pearcey kernel K_alpha(x,y) by Gauss-Legendre quadrature on the
/// deformed contours. OpenMP-parallel across quadrature nodes;
/// `pearcey_kernel_serial` is the reference path on the identical nodes.
KernelEvaluation pearcey_kernel(double x, double y, double alpha,
                                const ContourSpec& contour = {});
KernelEvaluation pearcey_kernel_serial(double x, double y, double alpha,
                                       const ContourSpec& contour = {});

/// det(K_alpha(x_i, x_j)) for up to 8 distinct points.
double pearcey_correlation(const std::vector<double>& points, double alpha,
                           const ContourSpec& contour = {});

/// Inputs for the finite-N correlation kernel of H_t + sqrt(ct) U, written as
/// a double contour integral over the spectrum of H_t. `xi` must sit inside
/// a spectral gap of the eigenvalue list.
struct FiniteKernelInput {
    std::vector<double> eigenvalues;  // sorted spectrum of H_t
    double ct = 0.0;                  // Gaussian time
    double xi = 0.0;                  // crossing point of the vertical contour
    double base_point = 0.0;
    double gamma = 1.0;
    long n = 0;

    double margin_spacings = 2.0;  // required clearance between xi and the spectrum
};

/// Evaluator caching the quadrature nodes and the per-node log-products
/// sum_i log(. - lambda_i); evaluations at different (u,v) reuse them.
class FiniteKernelEvaluator {
  public:
    FiniteKernelEvaluator(FiniteKernelInput input, ContourSpec contour = {});

    KernelEvaluation evaluate(double u, double v) const;
    /// Variant without the determinant-preserving conjugation; same
    /// determinants, different pointwise values.
    KernelEvaluation evaluate_unconjugated(double u, double v) const;
    /// N^{-3/4} gamma^{-1} K(b + x/(gamma N^{3/4}), b + y/(gamma N^{3/4}))
    double rescaled(double x, double y) const;

    const FiniteKernelInput& input() const { return input_; }

  private:
    struct Node {
        cxd pos;
        cxd weight;   // quadrature weight with the contour orientation folded in
        cxd logprod;  // sum_i log(pos - lambda_i)
    };

    double eval_on(const std::vector<Node>& zs, const std::vector<Node>& ws, double u,
                   double v, bool conjugated, double* imag_defect,
                   double* roundoff = nullptr) const;

    FiniteKernelInput input_;
    ContourSpec contour_;
    std::vector<Node> z_nodes_, w_nodes_;            // full resolution
    std::vector<Node> z_nodes_half_, w_nodes_half_;  // halved node density
};

KernelEvaluation finite_kernel(const FiniteKernelInput& input, double u, double v,
                               const ContourSpec& contour = {});
double rescale_kernel(const FiniteKernelInput& input, double x, double y,
                      const ContourSpec& contour = {});

/// Diagonal K(u,u) anywhere in the spectrum: the vertical contour is
/// re-anchored at the spectral-gap midpoint nearest to u, where the
/// exponents stay representable. The diagonal is conjugation-invariant, so
/// this agrees with `finite_kernel(in, u, u)` where both are defined.
KernelEvaluation finite_kernel_diagonal(const FiniteKernelInput& input, double u,
                                        const ContourSpec& contour = {});

}  // namespace cusp
