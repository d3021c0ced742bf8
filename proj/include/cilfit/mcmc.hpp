#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cilfit/de.hpp"

namespace cilfit {

struct StartRejectedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyChainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooShortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadIndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct AmConfig {
    long n_samples = 10000;
    long burn_in = 1000;
    long t0 = 500;              // adaptation start (accepted+rejected steps)
    double s_d = 0.0;           // proposal scaling; 0 => 2.4^2 / dim
    double eps_floor = 1e-10;   // covariance regularization floor
    Eigen::VectorXd init_proposal_std;  // per-dim; empty => 5% of bounds range
    Eigen::VectorXd lower;      // uniform prior box (shared with DeConfig bounds)
    Eigen::VectorXd upper;
    std::uint64_t seed = 0;

    void validate() const;
    Eigen::Index dim() const { return lower.size(); }
};

struct ChainRow {
    Eigen::VectorXd theta;
    double cost = 0.0;
    bool accepted = false;  // whether this row's proposal was accepted
};

struct Chain {
    std::vector<ChainRow> rows;
    long accepted_count = 0;

    long size() const { return static_cast<long>(rows.size()); }
    double acceptance_rate() const {
        return rows.empty() ? 0.0 : static_cast<double>(accepted_count) / rows.size();
    }
};

// Random-walk Metropolis with the adaptive-covariance proposal
// C_t = s_d Cov(theta_0..theta_{t-1}) + s_d eps_floor I after t0 steps.
// Cost is treated as -2 log density: acceptance min(1, exp(-(f' - f)/2)).
// Each proposal's cost is evaluated once with a fresh derived seed
// (pseudo-marginal style); the incumbent's cost is never refreshed.
// When `resume` is nonempty, its rows seed the running moments and its last
// row is the starting state; new rows are appended to a copy of it.
Chain am_run(const CostFn& cost_fn, const Eigen::VectorXd& start, const AmConfig& config,
             const Chain& resume = {});

// Lowest-cost stored sample (ties: earliest), skipping `burn_in` leading rows.
ChainRow map_estimate(const Chain& chain, long burn_in = 0);

// Equal-tail empirical interval at quantile levels (1 -/+ level)/2, linear
// interpolation between order statistics.
std::pair<double, double> credible_interval(const Chain& chain, double level,
                                            Eigen::Index dim_index, long burn_in = 0);

// Coordinate projection (empirical marginalization).
Chain marginalize(const Chain& chain, const std::vector<Eigen::Index>& keep);

void write_chain_csv(const std::string& path, const Chain& chain);
Chain read_chain_csv(const std::string& path);

// Linear-interpolation empirical quantile (shared convention of this module).
double empirical_quantile(std::vector<double> values, double p);

}  // namespace cilfit
