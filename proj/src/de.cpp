#include "cilfit/de.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "cilfit/parallel.hpp"
#include "cilfit/rng.hpp"

namespace cilfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distinct seed domains for population initialization, per-generation trial
// construction, and cost evaluations.
constexpr std::uint64_t kInitTag = 0x6465696e69740000ULL;
constexpr std::uint64_t kGenTag = 0x646567656e000000ULL;

}  // namespace

void DeConfig::validate() const {
    if (np < 4) throw std::invalid_argument("DeConfig: np must be >= 4");
    if (!(f > 0.0) || f > 2.0) throw std::invalid_argument("DeConfig: f must be in (0, 2]");
    if (cr < 0.0 || cr > 1.0) throw std::invalid_argument("DeConfig: cr must be in [0, 1]");
    if (lower.size() == 0 || lower.size() != upper.size())
        throw std::invalid_argument("DeConfig: bounds missing or mismatched");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw std::invalid_argument("DeConfig: lower bound exceeds upper bound");
    if (max_generations < 0) throw std::invalid_argument("DeConfig: max_generations < 0");
    if (stall_generations < 1) throw std::invalid_argument("DeConfig: stall_generations < 1");
}

int Population::best_index() const {
    int best = 0;
    for (int i = 1; i < static_cast<int>(costs.size()); ++i)
        if (costs[i] < costs[best]) best = i;
    return best;
}

Population de_init(const DeConfig& config) {
    config.validate();
    Population pop;
    pop.members.resize(config.np);
    pop.costs.assign(config.np, kInf);
    auto rng = make_rng(derive_seed(config.seed ^ kInitTag, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < config.np; ++i) {
        Eigen::VectorXd x(config.dim());
        for (Eigen::Index k = 0; k < config.dim(); ++k)
            x[k] = config.lower[k] + (config.upper[k] - config.lower[k]) * unit(rng);
        pop.members[i] = std::move(x);
    }
    return pop;
}

namespace {

void evaluate_costs(const std::vector<Eigen::VectorXd>& members, std::vector<double>& costs,
                    const CostFn& cost_fn, const DeConfig& config, std::uint64_t eval_base) {
    parallel_for(
        members.size(),
        [&](std::size_t i) {
            double c;
            try {
                c = cost_fn(members[i], derive_seed(eval_base, i));
            } catch (...) {
                c = kInf;
            }
            costs[i] = std::isnan(c) ? kInf : c;
        },
        config.workers);
}

}  // namespace

Population de_step(const Population& pop, const CostFn& cost_fn, const DeConfig& config) {
    config.validate();
    const int np = config.np;
    const Eigen::Index dim = config.dim();
    auto rng = make_rng(derive_seed(config.seed ^ kGenTag, static_cast<std::uint64_t>(pop.generation)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, np - 1);
    std::uniform_int_distribution<Eigen::Index> pick_dim(0, dim - 1);

    std::vector<Eigen::VectorXd> trials(np);
    for (int i = 0; i < np; ++i) {
        int r1, r2, r3;
        do r1 = pick(rng); while (r1 == i);
        do r2 = pick(rng); while (r2 == i || r2 == r1);
        do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
        Eigen::VectorXd trial = pop.members[i];
        const Eigen::Index forced = pick_dim(rng);
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (k == forced || unit(rng) < config.cr) {
                double v = pop.members[r1][k] +
                           config.f * (pop.members[r2][k] - pop.members[r3][k]);
                if (v < config.lower[k] || v > config.upper[k])
                    v = config.lower[k] + (config.upper[k] - config.lower[k]) * unit(rng);
                trial[k] = v;
            }
        }
        trials[i] = std::move(trial);
    }

    std::vector<double> trial_costs(np, kInf);
    const std::uint64_t eval_base =
        derive_seed(config.seed, 1 + static_cast<std::uint64_t>(pop.generation));
    evaluate_costs(trials, trial_costs, cost_fn, config, eval_base);

    Population next;
    next.generation = pop.generation + 1;
    next.members.resize(np);
    next.costs.resize(np);
    for (int i = 0; i < np; ++i) {
        const bool keep_trial =
            std::isfinite(trial_costs[i]) && trial_costs[i] <= pop.costs[i];
        next.members[i] = keep_trial ? trials[i] : pop.members[i];
        next.costs[i] = keep_trial ? trial_costs[i] : pop.costs[i];
    }
    return next;
}

DeResult de_run(const CostFn& cost_fn, const DeConfig& config) {
    config.validate();
    Population pop;
    bool any_finite = false;
    for (int attempt = 0; attempt <= config.init_redraws && !any_finite; ++attempt) {
        DeConfig attempt_config = config;
        attempt_config.seed = derive_seed(config.seed ^ kInitTag, static_cast<std::uint64_t>(attempt));
        pop = de_init(attempt_config);
        evaluate_costs(pop.members, pop.costs, cost_fn, config, derive_seed(config.seed, 0));
        for (double c : pop.costs) any_finite = any_finite || std::isfinite(c);
    }
    if (!any_finite)
        throw AllRejectedError("de_run: every initial cost evaluation was rejected");

    DeResult result;
    int best = pop.best_index();
    result.history.push_back({0, pop.costs[best], pop.members[best]});
    std::vector<double> best_trace{pop.costs[best]};

    for (int gen = 1; gen <= config.max_generations; ++gen) {
        pop = de_step(pop, cost_fn, config);
        best = pop.best_index();
        result.history.push_back({gen, pop.costs[best], pop.members[best]});
        best_trace.push_back(pop.costs[best]);
        if (gen >= config.stall_generations) {
            const double then = best_trace[gen - config.stall_generations];
            const double now = best_trace[gen];
            const double scale = std::max(std::abs(then), 1e-300);
            if ((then - now) / scale < config.stall_rel_tol) break;
        }
    }
    best = pop.best_index();
    result.best = pop.members[best];
    result.best_cost = pop.costs[best];
    result.generations = pop.generation;
    return result;
}

void write_de_history_csv(const std::string& path, const std::vector<DeGenRecord>& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    out << "generation,best_cost";
    const Eigen::Index dim = history.empty() ? 0 : history.front().best.size();
    for (Eigen::Index k = 0; k < dim; ++k) out << ",x" << k;
    out << '\n';
    for (const auto& rec : history) {
        out << rec.generation << ',' << rec.best_cost;
        for (Eigen::Index k = 0; k < rec.best.size(); ++k) out << ',' << rec.best[k];
        out << '\n';
    }
}

DeConfig default_model_bounds() {
    DeConfig config;
    config.lower.resize(4);
    config.upper.resize(4);
    config.lower << 25.0, 5.0, 0.05, 1.0;    // L, a, b, sigma
    config.upper << 80.0, 15.0, 0.5, 100.0;
    return config;
}

Eigen::VectorXd to_vector(const ModelParams& p) {
    Eigen::VectorXd x(4);
    x << p.L, p.a, p.b, p.sigma;
    return x;
}

ModelParams to_model_params(const Eigen::VectorXd& x, double d) {
    if (x.size() != 4) throw std::invalid_argument("to_model_params: expected 4 coordinates");
    return ModelParams{x[0], x[1], x[2], x[3], d};
}

}  // namespace cilfit
