#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cusp/dyson.hpp"
#include "cusp/pearcey.hpp"
#include "cusp/shape.hpp"

namespace cusp {

enum class EntryLaw { Gaussian, RademacherLike };

struct EnsembleConfig {
    ModelSpec model;
    int trials = 20;
    std::uint64_t base_seed = 1;
    EntryLaw entry_law = EntryLaw::Gaussian;
    double gue_time = 0.0;     // ct: adds sqrt(ct) U after sampling the model
    double epsilon_exp = 0.1;  // records the exponent behind t = N^{-1/2+eps}
    bool keep_vectors = false;
};

/// H = A + W with independent upper-triangular entries matching the model's
/// first and second moments; deterministic in (base_seed, trial).
Eigen::MatrixXcd sample_matrix(const EnsembleConfig& config, int trial);

/// H + sqrt(ct) U with U a standard GUE draw (E|u_ij|^2 = 1/N).
Eigen::MatrixXcd add_gue(const Eigen::MatrixXcd& h, double ct, std::uint64_t seed);

struct SpectrumSample {
    Eigen::VectorXd eigenvalues;  // ascending
    std::optional<Eigen::MatrixXcd> eigenvectors;
    std::uint64_t trial_seed = 0;
};

/// Full Hermitian eigendecomposition (LAPACK divide and conquer), with a
/// residual spot-check when vectors are kept.
SpectrumSample decompose(const Eigen::MatrixXcd& h, bool keep_vectors);

/// All trials of the configured ensemble; OpenMP-parallel across trials with
/// a serial reference. Results are identical for any thread count.
std::vector<SpectrumSample> run_trials(const EnsembleConfig& config);
std::vector<SpectrumSample> run_trials_serial(const EnsembleConfig& config);

/// gamma_k with N rho((-inf, gamma_k]) = k, by monotone inversion of the
/// cumulative density.
std::vector<double> quantiles(const DensityProfile& profile, int n);
/// k(tau) = ceil(N rho((-inf, tau]))
long quantile_index(const DensityProfile& profile, double tau, int n);

struct VerificationCheck {
    std::string name;
    double pass_fraction = 0.0;
    double threshold = 0.0;
    double max_stat = 0.0;
    double mean_stat = 0.0;
    long count = 0;
};

struct VerificationStats {
    std::vector<VerificationCheck> checks;
    // cusp statistics payload
    std::vector<double> hist_centers;
    std::vector<double> hist_density;      // empirical rescaled 1-point density
    std::vector<double> kernel_reference;  // K_alpha(x,x) at the centres
    double l1_distance = 0.0;  // window-averaged absolute deviation
    double sup_distance = 0.0;
    double alpha = 0.0;
    double tail_exponent = 0.0;

    const VerificationCheck* find(const std::string& name) const;
};

struct RigidityOptions {
    double bulk_exponent = 0.25;   // threshold form N^0.25 on the eta_f-normalised deviation
    double bulk_margin = 1.25;     // frozen calibration constant on the reference run
    double cusp_exponent = 0.2;    // threshold N^0.2 on the cusp-weighted deviation
    double window_fraction = 0.1;  // |k - k_c| <= fraction * N
    bool shuffle_control = false;  // derange eigenvalues per trial first
};

VerificationStats verify_rigidity(const std::vector<SpectrumSample>& samples,
                                  const DensityProfile& profile,
                                  const SingularityReport* singularity = nullptr,
                                  const RigidityOptions& opts = {});

struct LocalLawOptions {
    double threshold_exponent = 0.2;
    double eta_boost = 0.1;    // eta >= N^boost * eta_f
    int iso_pairs = 10;
    std::uint64_t probe_seed = 7;
    int ward_trials = 4;       // resolvents assembled in full for the Ward check
};

VerificationStats verify_local_law(const std::vector<SpectrumSample>& samples,
                                   const ModelSpec& model, const DensityProfile& profile,
                                   const SupportMap& support,
                                   const LocalLawOptions& opts = {});

struct DelocalizationOptions {
    double pair_exponent = 0.25;  // N |u(i)|^2 <= N^0.25 pooled over (i, vector)
    double max_exponent = 0.5;   // frozen calibration bound for the max statistic
    double window_center = 0.0;
    double window_halfwidth = 1e300;  // default: all eigenvectors
};

VerificationStats verify_delocalization(const std::vector<SpectrumSample>& samples,
                                        const DelocalizationOptions& opts = {});

struct CuspStatisticsOptions {
    double window = 4.0;   // rescaled half-window
    int bins = 16;
    double min_mean_count = 5.0;
    ContourSpec contour;
};

/// Rescaled eigenvalue histogram near the physical cusp against the
/// determinantal reference with the matching gap/minimum parameter.
VerificationStats cusp_statistics(const std::vector<SpectrumSample>& samples,
                                  const SingularityReport& singularity, double gue_time,
                                  const CuspStatisticsOptions& opts = {});

/// Parameter of the limiting kernel for a physical cusp: 0 at an exact cusp,
/// 3 (gamma Delta / 4)^{2/3} sqrt(N) for a gap, -(pi rho_min / gamma)^2
/// sqrt(N) for a minimum.
double pearcey_alpha(const SingularityReport& singularity, long n);

}  // namespace cusp
