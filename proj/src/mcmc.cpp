#include "cilfit/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "cilfit/kvfile.hpp"
#include "cilfit/rng.hpp"

namespace cilfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running mean and scatter for the recursive covariance update.
struct RunningMoments {
    long n = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd scatter;  // sum of outer products of deviations

    explicit RunningMoments(Eigen::Index dim)
        : mean(Eigen::VectorXd::Zero(dim)), scatter(Eigen::MatrixXd::Zero(dim, dim)) {}

    void add(const Eigen::VectorXd& x) {
        ++n;
        const Eigen::VectorXd delta = x - mean;
        mean += delta / static_cast<double>(n);
        scatter += delta * (x - mean).transpose();
    }

    Eigen::MatrixXd covariance() const {
        if (n < 2) return Eigen::MatrixXd::Zero(mean.size(), mean.size());
        return scatter / static_cast<double>(n - 1);
    }
};

bool in_box(const Eigen::VectorXd& x, const AmConfig& config) {
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (x[k] < config.lower[k] || x[k] > config.upper[k]) return false;
    return true;
}

}  // namespace

void AmConfig::validate() const {
    if (lower.size() == 0 || lower.size() != upper.size())
        throw std::invalid_argument("AmConfig: bounds missing or mismatched");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw std::invalid_argument("AmConfig: lower bound exceeds upper bound");
    if (n_samples <= burn_in || burn_in < 0)
        throw std::invalid_argument("AmConfig: need n_samples > burn_in >= 0");
    if (!(eps_floor > 0.0)) throw std::invalid_argument("AmConfig: eps_floor must be > 0");
    if (init_proposal_std.size() != 0 && init_proposal_std.size() != lower.size())
        throw std::invalid_argument("AmConfig: init_proposal_std dimension mismatch");
}

Chain am_run(const CostFn& cost_fn, const Eigen::VectorXd& start, const AmConfig& config,
             const Chain& resume) {
    config.validate();
    const Eigen::Index dim = config.dim();
    if (start.size() != dim) throw std::invalid_argument("am_run: start dimension mismatch");
    const double s_d = config.s_d > 0.0 ? config.s_d : 2.4 * 2.4 / static_cast<double>(dim);

    Chain chain = resume;
    RunningMoments moments(dim);
    for (const ChainRow& row : chain.rows) moments.add(row.theta);

    Eigen::VectorXd current = start;
    double current_cost;
    std::uint64_t eval_counter = static_cast<std::uint64_t>(chain.size());
    if (!chain.rows.empty()) {
        current = chain.rows.back().theta;
        current_cost = chain.rows.back().cost;
    } else {
        if (!in_box(current, config))
            throw StartRejectedError("am_run: start is outside the prior box");
        current_cost = cost_fn(current, derive_seed(config.seed, eval_counter++));
        if (!std::isfinite(current_cost))
            throw StartRejectedError("am_run: start has non-finite cost");
        chain.rows.push_back({current, current_cost, true});
        ++chain.accepted_count;
        moments.add(current);
    }

    Eigen::VectorXd init_std = config.init_proposal_std;
    if (init_std.size() == 0) init_std = 0.05 * (config.upper - config.lower);
    for (Eigen::Index k = 0; k < dim; ++k)
        if (!(init_std[k] > 0.0)) init_std[k] = std::sqrt(config.eps_floor);

    auto rng = make_rng(derive_seed(config.seed ^ 0x616d636861696eULL, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Eigen::MatrixXd chol_factor = init_std.asDiagonal();
    long last_adapt = -1;

    while (chain.size() < config.n_samples) {
        const long t = chain.size();
        if (t >= config.t0 && t != last_adapt) {
            Eigen::MatrixXd c = s_d * moments.covariance();
            c.diagonal().array() += s_d * config.eps_floor;
            Eigen::LLT<Eigen::MatrixXd> llt(c);
            if (llt.info() == Eigen::Success) chol_factor = llt.matrixL();
            last_adapt = t;
        }
        Eigen::VectorXd z(dim);
        for (Eigen::Index k = 0; k < dim; ++k) z[k] = gauss(rng);
        const Eigen::VectorXd proposal = current + chol_factor * z;

        bool accept = false;
        double proposal_cost = kInf;
        if (in_box(proposal, config)) {
            proposal_cost = cost_fn(proposal, derive_seed(config.seed, eval_counter++));
            if (std::isnan(proposal_cost)) proposal_cost = kInf;
            if (std::isfinite(proposal_cost)) {
                const double log_ratio = -0.5 * (proposal_cost - current_cost);
                accept = log_ratio >= 0.0 || unit(rng) < std::exp(log_ratio);
            }
        }
        if (accept) {
            current = proposal;
            current_cost = proposal_cost;
            ++chain.accepted_count;
        }
        chain.rows.push_back({current, current_cost, accept});
        moments.add(current);
    }
    return chain;
}

ChainRow map_estimate(const Chain& chain, long burn_in) {
    if (chain.size() <= burn_in) throw EmptyChainError("map_estimate: no post-burn-in samples");
    long best = burn_in;
    for (long i = burn_in + 1; i < chain.size(); ++i)
        if (chain.rows[i].cost < chain.rows[best].cost) best = i;
    return chain.rows[best];
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    p = std::clamp(p, 0.0, 1.0);
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> credible_interval(const Chain& chain, double level,
                                            Eigen::Index dim_index, long burn_in) {
    if (chain.size() - burn_in < 100)
        throw TooShortError("credible_interval: need at least 100 post-burn-in samples");
    if (!(level > 0.0) || level >= 1.0)
        throw std::invalid_argument("credible_interval: level must be in (0, 1)");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(chain.size() - burn_in));
    for (long i = burn_in; i < chain.size(); ++i) {
        if (dim_index < 0 || dim_index >= chain.rows[i].theta.size())
            throw BadIndexError("credible_interval: dimension index out of range");
        values.push_back(chain.rows[i].theta[dim_index]);
    }
    const double tail = (1.0 - level) / 2.0;
    return {empirical_quantile(values, tail), empirical_quantile(values, 1.0 - tail)};
}

Chain marginalize(const Chain& chain, const std::vector<Eigen::Index>& keep) {
    Chain out;
    out.accepted_count = chain.accepted_count;
    out.rows.reserve(chain.rows.size());
    for (const ChainRow& row : chain.rows) {
        Eigen::VectorXd proj(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            if (keep[k] < 0 || keep[k] >= row.theta.size())
                throw BadIndexError("marginalize: dimension index out of range");
            proj[static_cast<Eigen::Index>(k)] = row.theta[keep[k]];
        }
        out.rows.push_back({std::move(proj), row.cost, row.accepted});
    }
    return out;
}

void write_chain_csv(const std::string& path, const Chain& chain) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    const Eigen::Index dim = chain.rows.empty() ? 0 : chain.rows.front().theta.size();
    for (Eigen::Index k = 0; k < dim; ++k) out << 'x' << k << ',';
    out << "cost,accepted\n";
    for (const ChainRow& row : chain.rows) {
        for (Eigen::Index k = 0; k < row.theta.size(); ++k) out << row.theta[k] << ',';
        out << row.cost << ',' << (row.accepted ? 1 : 0) << '\n';
    }
}

Chain read_chain_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    Chain chain;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty chain file: " + path);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> fields;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            try {
                fields.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("invalid chain value '" + cell + "'", lineno);
            }
        }
        if (fields.size() < 3) throw ParseError("chain row too short", lineno);
        ChainRow r;
        r.theta.resize(static_cast<Eigen::Index>(fields.size() - 2));
        for (Eigen::Index k = 0; k < r.theta.size(); ++k) r.theta[k] = fields[k];
        r.cost = fields[fields.size() - 2];
        r.accepted = fields.back() != 0.0;
        if (r.accepted) ++chain.accepted_count;
        chain.rows.push_back(std::move(r));
    }
    return chain;
}

}  // namespace cilfit
