#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cusp/model.hpp"

namespace cusp {

struct SpectralPoint {
    double tau = 0.0;
    double eta = 0.0;
    cxd z() const { return {tau, eta}; }
};

struct SolverOptions {
    double tolerance = 1e-10;   // sup-norm of the self-consistency defect
    long max_iterations = 100000;
    double theta0 = 0.5;        // initial damping
    bool block_reduction = true;
};

/// Solution vector m(z) of -1/m_i = z - a_i + (S m)_i with Im m_i > 0.
struct StieltjesSolution {
    Eigen::VectorXcd m;
    SpectralPoint z;
    double residual = 0.0;
    long iterations = 0;
    std::optional<Eigen::VectorXcd> m_prime;

    cxd avg() const { return m.mean(); }
    double rho() const { return avg().imag() / kPi; }  // harmonic extension of the density
};

StieltjesSolution solve_point(const ModelSpec& model, SpectralPoint z,
                              const SolverOptions& opts = {},
                              const Eigen::VectorXcd* warm_start = nullptr);

/// m'(z) from the linearised equation (1 - diag(m^2) S) m' = m^2.
Eigen::VectorXcd solve_derivative(const ModelSpec& model, const StieltjesSolution& sol,
                                  const SolverOptions& opts = {});

struct DensityProfile {
    std::vector<double> grid;  // strictly increasing energies
    std::vector<double> rho;   // extrapolated density values
    double eta_eval = 0.0;

    double integral() const;                    // trapezoid over the grid
    double second_moment() const;
    double cumulative(double tau) const;        // trapezoid of rho over (-inf, tau]
    double interp(double tau) const;            // linear interpolation
};

/// Density at a single energy with the two-point eta -> 0 extrapolation
/// rho = 2*rho(eta) - rho(2*eta).
double rho_at(const ModelSpec& model, double tau, double eta_floor,
              const SolverOptions& opts = {});

/// Adaptive density profile over [lo,hi]: the grid is refined wherever the
/// jump between neighbours exceeds `resolution`. OpenMP-parallel over
/// energies; `density_grid_serial` is the reference implementation.
DensityProfile density_grid(const ModelSpec& model, double lo, double hi,
                            double resolution, double eta_floor,
                            const SolverOptions& opts = {});
DensityProfile density_grid_serial(const ModelSpec& model, double lo, double hi,
                                   double resolution, double eta_floor,
                                   const SolverOptions& opts = {});

/// max_b | sum_a |G_ab|^2 - Im G_bb / eta | for a resolvent at Im z = eta.
double ward_check(const Eigen::MatrixXcd& g_matrix, double eta);

}  // namespace cusp
