#pragma once

#include "cusp/shape.hpp"

namespace cusp {

/// Two-block family along a one-parameter ray of diagonal shifts
/// delta * (dir1, dir2). As delta grows the central band splits; the family
/// passes through an exact cusp at a critical delta.
struct TwoBlockRay {
    int n1 = 0, n2 = 0;
    double s11 = 1.0, s12 = 1.0, s22 = 1.0;
    double dir1 = -1.0, dir2 = 1.0;
    double delta_lo = 0.5, delta_hi = 2.5;  // bracket for the critical shift
    double tau_lo = -0.8, tau_hi = 0.8;     // window containing the minimum

    static TwoBlockRay symmetric(int n) {
        TwoBlockRay r;
        r.n1 = n / 2;
        r.n2 = n - n / 2;
        r.delta_hi = 1.5;
        return r;
    }
    ModelSpec at(double delta) const;
};

struct TwoBlockTuning {
    double delta = 0.0;
    double location = 0.0;  // energy of the density minimum / cusp / gap centre
    ModelSpec model;
};

/// Critical shift: the density minimum driven to zero. The returned model
/// has rho at the minimum below `zero_tol` (resolution-limited by eta_floor).
TwoBlockTuning tune_two_block_cusp(const TwoBlockRay& ray, double zero_tol = 1e-7,
                                   double eta_floor = 1e-9);
TwoBlockTuning tune_two_block_cusp(int n, double zero_tol = 1e-7, double eta_floor = 1e-9);

/// Shift tuned so the central gap has the requested length.
TwoBlockTuning tune_two_block_gap(const TwoBlockRay& ray, double target_gap,
                                  double eta_floor = 1e-9);
TwoBlockTuning tune_two_block_gap(int n, double target_gap, double eta_floor = 1e-9);

/// Shift tuned so the density has a non-zero minimum of the requested height.
TwoBlockTuning tune_two_block_minimum(const TwoBlockRay& ray, double target_rho_min,
                                      double eta_floor = 1e-9);
TwoBlockTuning tune_two_block_minimum(int n, double target_rho_min, double eta_floor = 1e-9);

}  // namespace cusp
