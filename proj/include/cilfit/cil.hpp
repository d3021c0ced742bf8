#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cilfit/metrics.hpp"
#include "cilfit/simulate.hpp"
#include "cilfit/types.hpp"

namespace cilfit {

struct DegenerateSampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewSamplesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewPatternsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Threshold values R_1 < ... < R_M for one distance family.
struct BinSet {
    std::vector<double> thresholds;
    double r_max = 0.0;  // empirical maximum of the pooled sample
};

// Thresholds at equally spaced quantile levels of the pooled sample between
// the 2.5% and 97.5% quantiles (tail bins excluded). Requires at least
// 10*m_bins samples that are not all equal.
BinSet select_bins(std::vector<double> distances, int m_bins);

// Component k = fraction of distances strictly below R_k.
Eigen::VectorXd ecdf_vector(std::span<const double> distances, const BinSet& bins);

// Concatenation over families of the eCDF of all |a| x |b| cross distances.
Eigen::VectorXd feature_vector(const std::vector<Pattern>& a,
                               const std::vector<Pattern>& b,
                               const std::vector<DistanceFamily>& families,
                               const std::vector<BinSet>& bins_per_family);

struct GaussianSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;   // sample covariance, before jitter
    double jitter = 0.0;          // diagonal regularisation actually applied
    Eigen::LLT<Eigen::MatrixXd> chol;  // factor of covariance + jitter*I
};

// Sample mean/covariance with the smallest jitter from {0, 1e-10, 1e-8, ...}
// that admits a Cholesky factorisation. Requires sample count >= dim + 2.
GaussianSummary estimate_gaussian(const std::vector<Eigen::VectorXd>& samples);

// Quadratic form (y - mu)^T (Sigma + jitter I)^{-1} (y - mu).
double nll(const Eigen::VectorXd& y, const GaussianSummary& summary);

// Goodness of fit of the samples' Mahalanobis distances (to their own
// summary) against the chi^2_M law: Pearson statistic over equal-probability
// bins, pass at the 5% level.
struct Chi2Result {
    double statistic = 0.0;
    double p_value = 0.0;
    bool pass = false;
};
Chi2Result chi2_gaussianity(const std::vector<Eigen::VectorXd>& samples);

// ---- cost functions -------------------------------------------------------

// Deterministic pattern source indexed by run; nullopt = rejected run.
using PatternGenerator = std::function<std::optional<Pattern>(std::uint64_t run_index)>;

struct SimulatorConfig {
    GridConfig grid;
    SolverConfig solver;
    double delta = 1e-3;
};

// Generator backed by the model operator with per-run derived seeds.
PatternGenerator make_model_generator(const ModelParams& params, const SimulatorConfig& sim,
                                      std::uint64_t base_seed);

// Simulate `count` patterns; nullopt if any run is rejected.
std::optional<std::vector<Pattern>> simulate_ensemble(const PatternGenerator& gen,
                                                      int count, int workers = 0);

struct FeatureConfig {
    std::vector<DistanceFamily> families = {{DistanceKind::L2},
                                            {DistanceKind::SobolevFull},
                                            {DistanceKind::SobolevSemi}};
    int m_bins = 12;  // bins per family
};

// Basic CIL: Gaussian summary built from the data alone. Subdivides the data
// into n_ens subsets of size N' >= 50 and forms one feature vector per
// unordered subset pair; bins are fixed from the pooled cross-subset
// distances.
struct BasicCil {
    GaussianSummary summary;
    std::vector<BinSet> bins;                  // per family
    std::vector<Eigen::VectorXd> realizations; // C(n_ens, 2) vectors
};
BasicCil build_basic_cil(const std::vector<Pattern>& data, int n_ens,
                         const FeatureConfig& features, int workers = 1);

// Synthetic CIL: summary rebuilt from model simulations at each theta, the
// data contributes a single feature vector against a held-out synthetic
// subset. Returns +inf when any required simulation is rejected.
struct ScilConfig {
    int n_syn = 800;
    int n_ens = 8;
    int n_tilde = 0;  // 0 = largest size with (n_data+n_tilde)*n_ens + n_tilde <= n_syn
    FeatureConfig features;
    std::uint64_t seed = 0;
    int workers = 0;
};
double scil_cost(const PatternGenerator& gen, const std::vector<Pattern>& data,
                 const ScilConfig& config);
// The theta overloads re-tag the data patterns with patch_len = theta.L: the
// observed patch is identified with the model patch at the proposed theta, so
// distances stay well defined while L varies.
double scil_cost(const ModelParams& theta, const std::vector<Pattern>& data,
                 const SimulatorConfig& sim, const ScilConfig& config);

// Mixed-mode SCIL evaluated by bootstrapping: N_trial fixed synthetic subsets
// of N_data patterns, each with n_CIL resampled feature vectors, aggregated
// by the summary statistic G (min by default).
struct MixedModeConfig {
    int n_syn = 800;
    int n_trial = 100;
    int n_cil = 1000;
    FeatureConfig features;
    std::function<double(std::span<const double>)> aggregate;  // default: min
    std::uint64_t seed = 0;
    int workers = 0;
};

struct MixedModeDiagnostics {
    std::vector<double> trial_costs;  // f^k, k = 1..n_trial
    std::vector<BinSet> bins;         // per family
    std::vector<double> jitters;      // per trial
};

double mixed_mode_cost(const PatternGenerator& gen, const std::vector<Pattern>& data,
                       const MixedModeConfig& config,
                       MixedModeDiagnostics* diagnostics = nullptr);
double mixed_mode_cost(const ModelParams& theta, const std::vector<Pattern>& data,
                       const SimulatorConfig& sim, const MixedModeConfig& config,
                       MixedModeDiagnostics* diagnostics = nullptr);

}  // namespace cilfit
