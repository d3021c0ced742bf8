#include "cilfit/cil.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "cilfit/parallel.hpp"
#include "cilfit/rng.hpp"

namespace cilfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear-interpolation quantile on a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// eCDF block over pre-sorted distances.
void ecdf_sorted(const std::vector<double>& sorted, const BinSet& bins,
                 Eigen::VectorXd& out, Eigen::Index offset) {
    const double n = static_cast<double>(sorted.size());
    for (std::size_t k = 0; k < bins.thresholds.size(); ++k) {
        const auto it =
            std::lower_bound(sorted.begin(), sorted.end(), bins.thresholds[k]);
        out[offset + static_cast<Eigen::Index>(k)] =
            static_cast<double>(it - sorted.begin()) / n;
    }
}

}  // namespace

BinSet select_bins(std::vector<double> distances, int m_bins) {
    if (m_bins < 1) throw std::invalid_argument("select_bins: m_bins must be >= 1");
    if (distances.size() < static_cast<std::size_t>(10 * m_bins))
        throw TooFewSamplesError("select_bins: need at least 10*m_bins samples");
    std::sort(distances.begin(), distances.end());
    if (distances.front() == distances.back())
        throw DegenerateSampleError("select_bins: all distances equal");

    BinSet bins;
    bins.r_max = distances.back();
    bins.thresholds.resize(m_bins);
    // Equally spaced quantile levels strictly inside the 2.5%..97.5% trim.
    for (int k = 1; k <= m_bins; ++k) {
        const double level = 0.025 + 0.95 * static_cast<double>(k) / (m_bins + 1);
        bins.thresholds[k - 1] = quantile_sorted(distances, level);
    }
    // Keep thresholds positive and strictly increasing even on coarse samples.
    if (bins.thresholds[0] <= 0.0) {
        const auto pos = std::upper_bound(distances.begin(), distances.end(), 0.0);
        if (pos == distances.end())
            throw DegenerateSampleError("select_bins: no positive distances");
        bins.thresholds[0] = 0.5 * *pos;
    }
    for (int k = 1; k < m_bins; ++k) {
        const double floor =
            bins.thresholds[k - 1] * (1.0 + 1e-12) + 1e-300;
        bins.thresholds[k] = std::max(bins.thresholds[k], floor);
    }
    return bins;
}

Eigen::VectorXd ecdf_vector(std::span<const double> distances, const BinSet& bins) {
    if (distances.empty()) throw std::invalid_argument("ecdf_vector: empty sample");
    std::vector<double> sorted(distances.begin(), distances.end());
    std::sort(sorted.begin(), sorted.end());
    Eigen::VectorXd out(static_cast<Eigen::Index>(bins.thresholds.size()));
    ecdf_sorted(sorted, bins, out, 0);
    return out;
}

Eigen::VectorXd feature_vector(const std::vector<Pattern>& a,
                               const std::vector<Pattern>& b,
                               const std::vector<DistanceFamily>& families,
                               const std::vector<BinSet>& bins_per_family) {
    if (families.size() != bins_per_family.size())
        throw std::invalid_argument("feature_vector: families/bins size mismatch");
    Eigen::Index total = 0;
    for (const auto& bins : bins_per_family)
        total += static_cast<Eigen::Index>(bins.thresholds.size());
    Eigen::VectorXd out(total);

    Eigen::Index offset = 0;
    std::vector<double> flat;
    flat.reserve(a.size() * b.size());
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        flat.clear();
        for (const auto& pa : a)
            for (const auto& pb : b) flat.push_back(distance(pa, pb, families[fi]));
        std::sort(flat.begin(), flat.end());
        ecdf_sorted(flat, bins_per_family[fi], out, offset);
        offset += static_cast<Eigen::Index>(bins_per_family[fi].thresholds.size());
    }
    return out;
}

GaussianSummary estimate_gaussian(const std::vector<Eigen::VectorXd>& samples) {
    if (samples.empty()) throw TooFewSamplesError("estimate_gaussian: no samples");
    const Eigen::Index dim = samples.front().size();
    const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
    if (n < dim + 2)
        throw TooFewSamplesError("estimate_gaussian: need at least dim + 2 samples");

    Eigen::MatrixXd x(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) = samples[i].transpose();

    GaussianSummary summary;
    summary.mean = x.colwise().mean();
    x.rowwise() -= summary.mean.transpose();
    summary.covariance = (x.transpose() * x) / static_cast<double>(n - 1);

    static constexpr double kLadder[] = {0.0,  1e-10, 1e-8, 1e-6, 1e-4,
                                         1e-2, 1.0,   1e2};
    for (double jitter : kLadder) {
        Eigen::MatrixXd reg = summary.covariance;
        reg.diagonal().array() += jitter;
        summary.chol.compute(reg);
        if (summary.chol.info() == Eigen::Success) {
            summary.jitter = jitter;
            return summary;
        }
    }
    throw std::runtime_error("estimate_gaussian: covariance not factorizable");
}

double nll(const Eigen::VectorXd& y, const GaussianSummary& summary) {
    if (y.size() != summary.mean.size())
        throw DimensionMismatchError("nll: dimension mismatch");
    const Eigen::VectorXd diff = y - summary.mean;
    return diff.dot(summary.chol.solve(diff));
}

Chi2Result chi2_gaussianity(const std::vector<Eigen::VectorXd>& samples) {
    const GaussianSummary summary = estimate_gaussian(samples);
    const Eigen::Index dof = summary.mean.size();
    const std::size_t n = samples.size();

    std::vector<double> mahal(n);
    for (std::size_t i = 0; i < n; ++i) mahal[i] = nll(samples[i], summary);

    const int n_bins = std::clamp(static_cast<int>(n / 5), 2, 10);
    const boost::math::chi_squared target(static_cast<double>(dof));
    std::vector<double> edges(n_bins - 1);
    for (int k = 1; k < n_bins; ++k)
        edges[k - 1] = boost::math::quantile(target, static_cast<double>(k) / n_bins);

    std::vector<int> counts(n_bins, 0);
    for (double m : mahal) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), m);
        ++counts[it - edges.begin()];
    }

    const double expected = static_cast<double>(n) / n_bins;
    Chi2Result result;
    for (int c : counts) {
        const double diff = c - expected;
        result.statistic += diff * diff / expected;
    }
    const boost::math::chi_squared pearson(static_cast<double>(n_bins - 1));
    result.p_value = 1.0 - boost::math::cdf(pearson, result.statistic);
    result.pass = result.p_value >= 0.05;
    return result;
}

PatternGenerator make_model_generator(const ModelParams& params, const SimulatorConfig& sim,
                                      std::uint64_t base_seed) {
    return [params, sim, base_seed](std::uint64_t run) -> std::optional<Pattern> {
        InitNoiseConfig noise;
        noise.delta = sim.delta;
        noise.seed = derive_seed(base_seed, run);
        SimOutcome out = model_operator(params, sim.grid, sim.solver, noise);
        if (out.status != SimStatus::Converged) return std::nullopt;
        return std::move(out.pattern);
    };
}

std::optional<std::vector<Pattern>> simulate_ensemble(const PatternGenerator& gen,
                                                      int count, int workers) {
    std::vector<std::optional<Pattern>> runs(count);
    std::atomic<bool> rejected{false};
    parallel_for(
        static_cast<std::size_t>(count),
        [&](std::size_t i) {
            if (rejected.load(std::memory_order_relaxed)) return;
            runs[i] = gen(i);
            if (!runs[i]) rejected.store(true, std::memory_order_relaxed);
        },
        workers);
    if (rejected.load()) return std::nullopt;
    std::vector<Pattern> patterns;
    patterns.reserve(count);
    for (auto& r : runs) patterns.push_back(std::move(*r));
    return patterns;
}

namespace {

std::vector<Pattern> gather(const std::vector<Pattern>& all, std::span<const int> idx) {
    std::vector<Pattern> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(all[i]);
    return out;
}

// Gather submatrix entries D(rows, cols) into a sorted buffer.
void gather_sorted(const Eigen::MatrixXd& d, std::span<const int> rows,
                   std::span<const int> cols, std::vector<double>& buf) {
    buf.clear();
    buf.reserve(rows.size() * cols.size());
    for (int c : cols)
        for (int r : rows) buf.push_back(d(r, c));
    std::sort(buf.begin(), buf.end());
}

}  // namespace

BasicCil build_basic_cil(const std::vector<Pattern>& data, int n_ens,
                         const FeatureConfig& features, int workers) {
    if (n_ens < 3) throw std::invalid_argument("build_basic_cil: n_ens must be >= 3");
    if (data.size() % static_cast<std::size_t>(n_ens) != 0)
        throw std::invalid_argument("build_basic_cil: |data| must be divisible by n_ens");
    const int subset_size = static_cast<int>(data.size()) / n_ens;
    if (subset_size < 50)
        throw TooFewPatternsError("build_basic_cil: subset size N' must be >= 50");

    const std::size_t n_fam = features.families.size();
    std::vector<Eigen::MatrixXd> dist(n_fam);
    for (std::size_t fi = 0; fi < n_fam; ++fi)
        dist[fi] = symmetric_distance_matrix(data, features.families[fi], workers);

    // Subsets are consecutive blocks of the input order.
    auto subset_indices = [&](int k) {
        std::vector<int> idx(subset_size);
        std::iota(idx.begin(), idx.end(), k * subset_size);
        return idx;
    };

    BasicCil result;
    result.bins.resize(n_fam);
    for (std::size_t fi = 0; fi < n_fam; ++fi) {
        std::vector<double> pooled;
        for (int k = 0; k < n_ens; ++k)
            for (int l = k + 1; l < n_ens; ++l)
                for (int i = 0; i < subset_size; ++i)
                    for (int j = 0; j < subset_size; ++j)
                        pooled.push_back(
                            dist[fi](k * subset_size + i, l * subset_size + j));
        result.bins[fi] = select_bins(std::move(pooled), features.m_bins);
    }

    const Eigen::Index m_total =
        static_cast<Eigen::Index>(n_fam) * features.m_bins;
    std::vector<double> buf;
    for (int k = 0; k < n_ens; ++k) {
        const auto rows = subset_indices(k);
        for (int l = k + 1; l < n_ens; ++l) {
            const auto cols = subset_indices(l);
            Eigen::VectorXd y(m_total);
            Eigen::Index offset = 0;
            for (std::size_t fi = 0; fi < n_fam; ++fi) {
                gather_sorted(dist[fi], rows, cols, buf);
                ecdf_sorted(buf, result.bins[fi], y, offset);
                offset += features.m_bins;
            }
            result.realizations.push_back(std::move(y));
        }
    }
    result.summary = estimate_gaussian(result.realizations);
    return result;
}

double scil_cost(const PatternGenerator& gen, const std::vector<Pattern>& data,
                 const ScilConfig& config) {
    if (data.empty()) throw std::invalid_argument("scil_cost: empty data set");
    const int n_data = static_cast<int>(data.size());
    const int n_ens = config.n_ens;
    if (n_ens < 2) throw std::invalid_argument("scil_cost: n_ens must be >= 2");
    int n_tilde = config.n_tilde;
    if (n_tilde == 0)
        n_tilde = (config.n_syn - n_data * n_ens) / (n_ens + 1);
    if (n_tilde < 1 || (n_data + n_tilde) * n_ens + n_tilde > config.n_syn)
        throw std::invalid_argument("scil_cost: subset sizes exceed n_syn");

    const auto patterns = simulate_ensemble(gen, config.n_syn, config.workers);
    if (!patterns) return kInf;

    auto rng = make_rng(config.seed);
    std::vector<int> perm(config.n_syn);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    // Disjoint subsets: n_ens pairs (S^{k,1}, S^{k,2}) plus one held-out
    // synthetic subset for the data-side feature vector.
    std::vector<std::vector<int>> s1(n_ens), s2(n_ens);
    int pos = 0;
    for (int k = 0; k < n_ens; ++k) {
        s1[k].assign(perm.begin() + pos, perm.begin() + pos + n_data);
        pos += n_data;
        s2[k].assign(perm.begin() + pos, perm.begin() + pos + n_tilde);
        pos += n_tilde;
    }
    const std::vector<int> fresh(perm.begin() + pos, perm.begin() + pos + n_tilde);

    const std::size_t n_fam = config.features.families.size();
    const Eigen::Index m_total =
        static_cast<Eigen::Index>(n_fam) * config.features.m_bins;

    // Distances between all S^{k,1} rows and all S^{k,2} columns, per family.
    std::vector<int> all_rows, all_cols;
    for (const auto& s : s1) all_rows.insert(all_rows.end(), s.begin(), s.end());
    for (const auto& s : s2) all_cols.insert(all_cols.end(), s.begin(), s.end());

    std::vector<Eigen::MatrixXd> dsyn(n_fam), ddata(n_fam);
    const std::vector<Pattern> row_pats = gather(*patterns, all_rows);
    const std::vector<Pattern> col_pats = gather(*patterns, all_cols);
    const std::vector<Pattern> fresh_pats = gather(*patterns, fresh);
    for (std::size_t fi = 0; fi < n_fam; ++fi) {
        dsyn[fi] = distance_matrix(row_pats, col_pats, config.features.families[fi],
                                   config.workers);
        ddata[fi] = distance_matrix(data, fresh_pats, config.features.families[fi],
                                    config.workers);
    }

    // Bins from the pooled synthetic cross distances at this theta.
    std::vector<BinSet> bins(n_fam);
    for (std::size_t fi = 0; fi < n_fam; ++fi) {
        std::vector<double> pooled(dsyn[fi].data(), dsyn[fi].data() + dsyn[fi].size());
        bins[fi] = select_bins(std::move(pooled), config.features.m_bins);
    }

    // n_ens^2 realizations y^{k,l}.
    std::vector<Eigen::VectorXd> realizations;
    realizations.reserve(static_cast<std::size_t>(n_ens) * n_ens);
    std::vector<int> rows(n_data), cols(n_tilde);
    std::vector<double> buf;
    for (int k = 0; k < n_ens; ++k) {
        std::iota(rows.begin(), rows.end(), k * n_data);
        for (int l = 0; l < n_ens; ++l) {
            std::iota(cols.begin(), cols.end(), l * n_tilde);
            Eigen::VectorXd y(m_total);
            Eigen::Index offset = 0;
            for (std::size_t fi = 0; fi < n_fam; ++fi) {
                gather_sorted(dsyn[fi], rows, cols, buf);
                ecdf_sorted(buf, bins[fi], y, offset);
                offset += config.features.m_bins;
            }
            realizations.push_back(std::move(y));
        }
    }
    const GaussianSummary summary = estimate_gaussian(realizations);

    // Data feature vector against the held-out synthetic subset.
    Eigen::VectorXd y_data(m_total);
    Eigen::Index offset = 0;
    std::vector<int> data_rows(data.size());
    std::iota(data_rows.begin(), data_rows.end(), 0);
    std::vector<int> fresh_cols(n_tilde);
    std::iota(fresh_cols.begin(), fresh_cols.end(), 0);
    for (std::size_t fi = 0; fi < n_fam; ++fi) {
        gather_sorted(ddata[fi], data_rows, fresh_cols, buf);
        ecdf_sorted(buf, bins[fi], y_data, offset);
        offset += config.features.m_bins;
    }
    return nll(y_data, summary);
}

static std::vector<Pattern> retag_patch_len(const std::vector<Pattern>& data,
                                            double patch_len) {
    std::vector<Pattern> out = data;
    for (Pattern& p : out) p.patch_len = patch_len;
    return out;
}

double scil_cost(const ModelParams& theta, const std::vector<Pattern>& data,
                 const SimulatorConfig& sim, const ScilConfig& config) {
    return scil_cost(make_model_generator(theta, sim, config.seed),
                     retag_patch_len(data, theta.L), config);
}

double mixed_mode_cost(const PatternGenerator& gen, const std::vector<Pattern>& data,
                       const MixedModeConfig& config, MixedModeDiagnostics* diagnostics) {
    if (data.empty()) throw std::invalid_argument("mixed_mode_cost: empty data set");
    const int n_data = static_cast<int>(data.size());
    if (config.n_syn <= n_data)
        throw std::invalid_argument("mixed_mode_cost: n_syn must exceed n_data");
    if (config.n_trial < 1)
        throw std::invalid_argument("mixed_mode_cost: n_trial must be >= 1");
    const std::size_t n_fam = config.features.families.size();
    const Eigen::Index m_total =
        static_cast<Eigen::Index>(n_fam) * config.features.m_bins;
    if (config.n_cil < m_total + 2)
        throw std::invalid_argument("mixed_mode_cost: n_cil must be >= M + 2");

    const int n_tilde = config.n_syn - n_data;

    const auto patterns = simulate_ensemble(gen, config.n_syn, config.workers);
    if (!patterns) return kInf;

    std::vector<Eigen::MatrixXd> dsyn(n_fam), ddata(n_fam);
    for (std::size_t fi = 0; fi < n_fam; ++fi) {
        dsyn[fi] = symmetric_distance_matrix(*patterns, config.features.families[fi],
                                             config.workers);
        ddata[fi] = distance_matrix(data, *patterns, config.features.families[fi],
                                    config.workers);
    }

    std::vector<BinSet> bins(n_fam);
    for (std::size_t fi = 0; fi < n_fam; ++fi) {
        std::vector<double> pooled;
        pooled.reserve(static_cast<std::size_t>(config.n_syn) * (config.n_syn - 1) / 2);
        for (int i = 0; i < config.n_syn; ++i)
            for (int j = i + 1; j < config.n_syn; ++j) pooled.push_back(dsyn[fi](i, j));
        bins[fi] = select_bins(std::move(pooled), config.features.m_bins);
    }

    // Per-trial RNG streams derived up-front so results do not depend on how
    // trials are scheduled.
    std::vector<std::uint64_t> trial_seeds(config.n_trial);
    for (int k = 0; k < config.n_trial; ++k)
        trial_seeds[k] = derive_seed(config.seed ^ 0x6d69786564ULL, k);

    std::vector<double> trial_costs(config.n_trial);
    std::vector<double> jitters(config.n_trial);

    parallel_for(
        static_cast<std::size_t>(config.n_trial),
        [&](std::size_t k) {
            auto rng = make_rng(trial_seeds[k]);

            // Fixed subset S1 of n_data patterns, drawn without replacement.
            std::vector<int> pool(config.n_syn);
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < n_data; ++i) {
                std::uniform_int_distribution<int> pick(i, config.n_syn - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            const std::vector<int> s1(pool.begin(), pool.begin() + n_data);
            const std::vector<int> remaining(pool.begin() + n_data, pool.end());

            // n_cil bootstrap feature vectors against resampled subsets S2.
            std::uniform_int_distribution<int> pick_rem(0, n_tilde - 1);
            std::vector<Eigen::VectorXd> ys;
            ys.reserve(config.n_cil);
            std::vector<int> s2(n_tilde);
            std::vector<double> buf;
            for (int l = 0; l < config.n_cil; ++l) {
                for (int& idx : s2) idx = remaining[pick_rem(rng)];
                Eigen::VectorXd y(m_total);
                Eigen::Index offset = 0;
                for (std::size_t fi = 0; fi < n_fam; ++fi) {
                    gather_sorted(dsyn[fi], s1, s2, buf);
                    ecdf_sorted(buf, bins[fi], y, offset);
                    offset += config.features.m_bins;
                }
                ys.push_back(std::move(y));
            }
            const GaussianSummary summary = estimate_gaussian(ys);
            jitters[k] = summary.jitter;

            // Fresh subset of n_tilde patterns from the whole synthetic set,
            // without replacement, for the data-side vector.
            std::vector<int> all(config.n_syn);
            std::iota(all.begin(), all.end(), 0);
            for (int i = 0; i < n_tilde; ++i) {
                std::uniform_int_distribution<int> pick(i, config.n_syn - 1);
                std::swap(all[i], all[pick(rng)]);
            }
            const std::vector<int> fresh(all.begin(), all.begin() + n_tilde);

            std::vector<int> data_rows(data.size());
            std::iota(data_rows.begin(), data_rows.end(), 0);
            Eigen::VectorXd y_data(m_total);
            Eigen::Index offset = 0;
            for (std::size_t fi = 0; fi < n_fam; ++fi) {
                gather_sorted(ddata[fi], data_rows, fresh, buf);
                ecdf_sorted(buf, bins[fi], y_data, offset);
                offset += config.features.m_bins;
            }
            trial_costs[k] = nll(y_data, summary);
        },
        config.workers);

    double cost;
    if (config.aggregate) {
        cost = config.aggregate(std::span<const double>(trial_costs));
    } else {
        cost = *std::min_element(trial_costs.begin(), trial_costs.end());
    }

    if (diagnostics) {
        diagnostics->trial_costs = trial_costs;
        diagnostics->bins = bins;
        diagnostics->jitters = jitters;
    }
    return cost;
}

double mixed_mode_cost(const ModelParams& theta, const std::vector<Pattern>& data,
                       const SimulatorConfig& sim, const MixedModeConfig& config,
                       MixedModeDiagnostics* diagnostics) {
    return mixed_mode_cost(make_model_generator(theta, sim, config.seed),
                           retag_patch_len(data, theta.L), config, diagnostics);
}

}  // namespace cilfit
