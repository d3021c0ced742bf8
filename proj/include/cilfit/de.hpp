#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cilfit/types.hpp"

namespace cilfit {

// Scalar cost over a parameter vector. The second argument is an evaluation
// seed derived deterministically by the driver so stochastic costs stay
// reproducible; deterministic costs may ignore it. +infinity marks rejection.
using CostFn = std::function<double(const Eigen::VectorXd&, std::uint64_t)>;

struct AllRejectedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DeConfig {
    int np = 39;              // population size
    double f = 0.8;           // differential weight
    double cr = 0.9;          // crossover probability
    Eigen::VectorXd lower;    // per-dimension closed bounds
    Eigen::VectorXd upper;
    int max_generations = 200;
    int stall_generations = 20;    // stop when best cost stops improving
    double stall_rel_tol = 1e-3;   // relative improvement threshold
    int init_redraws = 10;         // re-draw attempts before AllRejected
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;
    Eigen::Index dim() const { return lower.size(); }
};

struct Population {
    std::vector<Eigen::VectorXd> members;
    std::vector<double> costs;
    int generation = 0;

    int best_index() const;
};

struct DeGenRecord {
    int generation = 0;
    double best_cost = 0.0;
    Eigen::VectorXd best;
};

struct DeResult {
    Eigen::VectorXd best;
    double best_cost = 0.0;
    std::vector<DeGenRecord> history;
    int generations = 0;
};

// Uniform initial population in the bounds box; costs not yet evaluated
// (filled with +infinity).
Population de_init(const DeConfig& config);

// One DE/rand/1/bin generation: mutation x_{r1} + F (x_{r2} - x_{r3}) with
// distinct r1,r2,r3 != i, binomial crossover with one forced coordinate,
// out-of-bounds coordinates re-drawn uniformly, greedy selection (ties keep
// the trial; +inf trials never replace finite incumbents).
Population de_step(const Population& pop, const CostFn& cost_fn, const DeConfig& config);

DeResult de_run(const CostFn& cost_fn, const DeConfig& config);

void write_de_history_csv(const std::string& path, const std::vector<DeGenRecord>& history);

// The standard parameter box of the four-parameter fit (L, a, b, sigma).
DeConfig default_model_bounds();

Eigen::VectorXd to_vector(const ModelParams& p);
ModelParams to_model_params(const Eigen::VectorXd& x, double d = 1.07);

}  // namespace cilfit
