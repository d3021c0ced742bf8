// Command-line front end for the pattern-identification pipeline:
// preprocess experimental images, simulate pattern ensembles, evaluate the
// correlation-integral cost functions, optimize with differential evolution,
// and sample the posterior with adaptive Metropolis.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cilfit/chem.hpp"
#include "cilfit/cil.hpp"
#include "cilfit/de.hpp"
#include "cilfit/grid.hpp"
#include "cilfit/imageio.hpp"
#include "cilfit/kvfile.hpp"
#include "cilfit/lengyel.hpp"
#include "cilfit/mcmc.hpp"
#include "cilfit/metrics.hpp"
#include "cilfit/parallel.hpp"
#include "cilfit/pattern_io.hpp"
#include "cilfit/plot.hpp"
#include "cilfit/rng.hpp"
#include "cilfit/simulate.hpp"

namespace fs = std::filesystem;
using namespace cilfit;

namespace {

// Exit-code contract: 0 success, 2 input error, 3 degenerate data,
// 4 all-rejected parameter regime.
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitRejected = 4;

struct RunConfig {
    GridConfig grid;
    SolverConfig solver;
    double delta = 1e-3;
    FeatureConfig features;
    MixedModeConfig mixed;
    ScilConfig scil;
    DeConfig de = default_model_bounds();
    AmConfig am;
    PreprocessConfig pre;
    double patch_len = 57.5;  // nominal physical patch in dimensionless units
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_dir = "out";
};

double get_u64(const KvSection& s, const std::string& key, std::uint64_t fallback,
               std::uint64_t& out) {
    out = static_cast<std::uint64_t>(s.get_long(key, static_cast<long>(fallback)));
    return 0;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    cfg.am.lower = cfg.de.lower;
    cfg.am.upper = cfg.de.upper;
    if (path.empty()) return cfg;
    const KvFile file = parse_kv_file(path);
    if (const KvSection* s = file.find("grid")) {
        cfg.grid.m_dim = static_cast<int>(s->get_long("m_dim", cfg.grid.m_dim));
        cfg.grid.domain_factor = s->get_double("domain_factor", cfg.grid.domain_factor);
    }
    if (const KvSection* s = file.find("solver")) {
        cfg.solver.t_end = s->get_double("t_end", cfg.solver.t_end);
        cfg.solver.eps_conv = s->get_double("eps_conv", cfg.solver.eps_conv);
        cfg.solver.n_ma = static_cast<int>(s->get_long("n_ma", cfg.solver.n_ma));
        cfg.solver.rtol = s->get_double("rtol", cfg.solver.rtol);
        cfg.solver.atol = s->get_double("atol", cfg.solver.atol);
        cfg.solver.max_stages =
            static_cast<int>(s->get_long("max_stages", cfg.solver.max_stages));
    }
    if (const KvSection* s = file.find("noise"))
        cfg.delta = s->get_double("delta", cfg.delta);
    if (const KvSection* s = file.find("features"))
        cfg.features.m_bins = static_cast<int>(s->get_long("m_bins", cfg.features.m_bins));
    if (const KvSection* s = file.find("mixed")) {
        cfg.mixed.n_syn = static_cast<int>(s->get_long("n_syn", cfg.mixed.n_syn));
        cfg.mixed.n_trial = static_cast<int>(s->get_long("n_trial", cfg.mixed.n_trial));
        cfg.mixed.n_cil = static_cast<int>(s->get_long("n_cil", cfg.mixed.n_cil));
    }
    if (const KvSection* s = file.find("scil")) {
        cfg.scil.n_syn = static_cast<int>(s->get_long("n_syn", cfg.scil.n_syn));
        cfg.scil.n_ens = static_cast<int>(s->get_long("n_ens", cfg.scil.n_ens));
        cfg.scil.n_tilde = static_cast<int>(s->get_long("n_tilde", cfg.scil.n_tilde));
    }
    if (const KvSection* s = file.find("de")) {
        cfg.de.np = static_cast<int>(s->get_long("np", cfg.de.np));
        cfg.de.f = s->get_double("f", cfg.de.f);
        cfg.de.cr = s->get_double("cr", cfg.de.cr);
        cfg.de.max_generations =
            static_cast<int>(s->get_long("max_generations", cfg.de.max_generations));
        cfg.de.stall_generations =
            static_cast<int>(s->get_long("stall_generations", cfg.de.stall_generations));
        cfg.de.stall_rel_tol = s->get_double("stall_rel_tol", cfg.de.stall_rel_tol);
    }
    if (const KvSection* s = file.find("am")) {
        cfg.am.n_samples = s->get_long("n_samples", cfg.am.n_samples);
        cfg.am.burn_in = s->get_long("burn_in", cfg.am.burn_in);
        cfg.am.t0 = s->get_long("t0", cfg.am.t0);
        cfg.am.s_d = s->get_double("s_d", cfg.am.s_d);
        cfg.am.eps_floor = s->get_double("eps_floor", cfg.am.eps_floor);
    }
    if (const KvSection* s = file.find("bounds")) {
        const char* names[4] = {"L", "a", "b", "sigma"};
        for (int k = 0; k < 4; ++k) {
            cfg.de.lower[k] = s->get_double(std::string(names[k]) + "_lo", cfg.de.lower[k]);
            cfg.de.upper[k] = s->get_double(std::string(names[k]) + "_hi", cfg.de.upper[k]);
        }
    }
    if (const KvSection* s = file.find("preprocess")) {
        cfg.pre.crop_side = static_cast<int>(s->get_long("crop_side", cfg.pre.crop_side));
        cfg.pre.smooth_sigma = s->get_double("smooth_sigma", cfg.pre.smooth_sigma);
        cfg.pre.target_side = static_cast<int>(s->get_long("target_side", cfg.pre.target_side));
        cfg.patch_len = s->get_double("patch_len", cfg.patch_len);
    }
    if (const KvSection* s = file.find("run")) {
        std::uint64_t seed;
        get_u64(*s, "seed", cfg.seed, seed);
        cfg.seed = seed;
        cfg.workers = static_cast<int>(s->get_long("workers", cfg.workers));
        if (s->has("out_dir")) cfg.out_dir = s->get_string("out_dir");
    }
    cfg.am.lower = cfg.de.lower;
    cfg.am.upper = cfg.de.upper;
    return cfg;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "[grid]\nm_dim = " << c.grid.m_dim
        << "\ndomain_factor = " << c.grid.domain_factor << "\n[solver]\nt_end = "
        << c.solver.t_end << "\neps_conv = " << c.solver.eps_conv
        << "\nn_ma = " << c.solver.n_ma << "\nrtol = " << c.solver.rtol
        << "\natol = " << c.solver.atol << "\nmax_stages = " << c.solver.max_stages
        << "\n[noise]\ndelta = " << c.delta << "\n[features]\nm_bins = "
        << c.features.m_bins << "\n[mixed]\nn_syn = " << c.mixed.n_syn
        << "\nn_trial = " << c.mixed.n_trial << "\nn_cil = " << c.mixed.n_cil
        << "\n[scil]\nn_syn = " << c.scil.n_syn << "\nn_ens = " << c.scil.n_ens
        << "\nn_tilde = " << c.scil.n_tilde << "\n[de]\nnp = " << c.de.np
        << "\nf = " << c.de.f << "\ncr = " << c.de.cr
        << "\nmax_generations = " << c.de.max_generations
        << "\nstall_generations = " << c.de.stall_generations
        << "\nstall_rel_tol = " << c.de.stall_rel_tol << "\n[am]\nn_samples = "
        << c.am.n_samples << "\nburn_in = " << c.am.burn_in << "\nt0 = " << c.am.t0
        << "\ns_d = " << c.am.s_d << "\neps_floor = " << c.am.eps_floor << "\n[bounds]\n";
    const char* names[4] = {"L", "a", "b", "sigma"};
    for (int k = 0; k < 4; ++k)
        out << names[k] << "_lo = " << c.de.lower[k] << "\n"
            << names[k] << "_hi = " << c.de.upper[k] << "\n";
    out << "[preprocess]\ncrop_side = " << c.pre.crop_side
        << "\nsmooth_sigma = " << c.pre.smooth_sigma
        << "\ntarget_side = " << c.pre.target_side << "\npatch_len = " << c.patch_len
        << "\n[run]\nseed = " << c.seed << "\nworkers = " << c.workers << "\n";
    return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(serialize_config(cfg))));
    return buf;
}

// Manifest: config hash plus one line per produced file.
struct Manifest {
    std::string hash;
    std::vector<std::string> lines;

    void add(const std::string& file, const std::string& note = "") {
        lines.push_back(note.empty() ? file : file + "  # " + note);
    }
    void write(const fs::path& dir) const {
        std::ofstream out(dir / "manifest.txt");
        out << "config_hash = " << hash << "\n";
        for (const auto& line : lines) out << line << "\n";
    }
};

std::vector<Pattern> load_pattern_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pat")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<Pattern> patterns;
    for (const auto& f : files) patterns.push_back(read_pattern_auto(f));
    return patterns;
}

SimulatorConfig make_sim_config(const RunConfig& cfg) {
    SimulatorConfig sim;
    sim.grid = cfg.grid;
    sim.solver = cfg.solver;
    sim.delta = cfg.delta;
    return sim;
}

void check_data_side(const std::vector<Pattern>& data, const RunConfig& cfg) {
    const Eigen::Index want = cfg.grid.m_dim / 2;
    for (const Pattern& p : data)
        if (p.values.rows() != want || p.values.cols() != want)
            throw std::invalid_argument(
                "data pattern side " + std::to_string(p.values.rows()) +
                " does not match the model patch side m_dim/2 = " + std::to_string(want));
}

CostFn make_mixed_cost(const RunConfig& cfg, const std::vector<Pattern>& data) {
    const SimulatorConfig sim = make_sim_config(cfg);
    MixedModeConfig mixed = cfg.mixed;
    mixed.features = cfg.features;
    mixed.workers = cfg.workers;
    return [sim, mixed, data](const Eigen::VectorXd& x, std::uint64_t eval_seed) {
        MixedModeConfig mc = mixed;
        mc.seed = eval_seed;
        ModelParams theta = to_model_params(x);
        try {
            theta.validate();
            return mixed_mode_cost(theta, data, sim, mc);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };
}

// ---- commands ---------------------------------------------------------------

int cmd_derive_params(const std::string& chem_path) {
    const ChemFile chem = load_chem_file(chem_path);
    if (chem.scenarios.empty()) {
        std::cerr << "no [scenario ...] sections in " << chem_path << "\n";
        return kExitInput;
    }
    std::printf("%-16s %10s %10s %10s %10s %10s %12s\n", "scenario", "L", "a", "b",
                "sigma", "d", "ell_cm");
    for (const FeedScenario& sc : chem.scenarios) {
        const Concentrations conc = concentrations_from_feeds(sc);
        const ModelParams p = derive_dimensionless(chem.kinetics, conc);
        std::printf("%-16s %10.4f %10.4f %10.4f %10.4f %10.6f %12.6f\n",
                    sc.name.c_str(), p.L, p.a, p.b, p.sigma, p.d, conc.ell);
    }
    return kExitOk;
}

int cmd_preprocess(const RunConfig& cfg, const std::vector<std::string>& inputs) {
    fs::create_directories(cfg.out_dir);
    Manifest manifest{config_hash(cfg), {}};
    int failures = 0;
    for (const std::string& input : inputs) {
        try {
            const GrayImage img = load_gray(input);
            const Pattern pattern = preprocess(img, cfg.pre, cfg.patch_len);
            const std::string stem = fs::path(input).stem().string();
            const fs::path out = fs::path(cfg.out_dir) / (stem + ".pat");
            write_pattern(out.string(), pattern);
            write_pattern_sidecar(out.string(), pattern.patch_len);
            render_pattern_png((fs::path(cfg.out_dir) / (stem + ".png")).string(), pattern);
            manifest.add(out.filename().string(), "from " + input);
        } catch (const DegeneratePatternError& e) {
            std::cerr << input << ": " << e.what() << "\n";
            failures = std::max(failures, kExitDegenerate);
        } catch (const std::exception& e) {
            std::cerr << input << ": " << e.what() << "\n";
            failures = std::max(failures, kExitInput);
        }
    }
    manifest.write(cfg.out_dir);
    return failures;
}

int cmd_simulate(const RunConfig& cfg, const ModelParams& theta, int n) {
    fs::create_directories(cfg.out_dir);
    Manifest manifest{config_hash(cfg), {}};
    int converged = 0;
    for (int i = 0; i < n; ++i) {
        InitNoiseConfig noise;
        noise.delta = cfg.delta;
        noise.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        const SimOutcome out = model_operator(theta, cfg.grid, cfg.solver, noise);
        char name[32];
        std::snprintf(name, sizeof(name), "run%04d.pat", i);
        fs::path path = fs::path(cfg.out_dir) / name;
        if (out.status == SimStatus::Converged) {
            ++converged;
            write_pattern(path.string(), *out.pattern);
            render_pattern_png(fs::path(path).replace_extension(".png").string(),
                               *out.pattern);
        }
        write_pattern_sidecar((fs::path(cfg.out_dir) / name).string(), out, noise.seed);
        manifest.add(name, to_string(out.status));
        std::printf("%s: %s (steps %ld, residual %.3e)\n", name,
                    to_string(out.status).c_str(), static_cast<long>(out.steps_taken),
                    out.final_residual);
    }
    manifest.write(cfg.out_dir);
    if (n > 0 && converged == 0) return kExitRejected;
    return kExitOk;
}

int cmd_likelihood(const RunConfig& cfg, const std::string& data_dir,
                   const ModelParams& theta, const std::string& mode) {
    const std::vector<Pattern> data = load_pattern_dir(data_dir);
    if (data.empty()) {
        std::cerr << "no pattern files in " << data_dir << "\n";
        return kExitInput;
    }
    check_data_side(data, cfg);
    fs::create_directories(cfg.out_dir);
    Manifest manifest{config_hash(cfg), {}};
    const SimulatorConfig sim = make_sim_config(cfg);
    double cost;
    if (mode == "scil") {
        ScilConfig sc = cfg.scil;
        sc.features = cfg.features;
        sc.seed = cfg.seed;
        sc.workers = cfg.workers;
        cost = scil_cost(theta, data, sim, sc);
    } else {
        MixedModeConfig mc = cfg.mixed;
        mc.features = cfg.features;
        mc.seed = cfg.seed;
        mc.workers = cfg.workers;
        MixedModeDiagnostics diag;
        cost = mixed_mode_cost(theta, data, sim, mc, &diag);
        if (!diag.trial_costs.empty()) {
            Eigen::MatrixXd trials(static_cast<Eigen::Index>(diag.trial_costs.size()), 2);
            for (std::size_t k = 0; k < diag.trial_costs.size(); ++k) {
                trials(static_cast<Eigen::Index>(k), 0) = diag.trial_costs[k];
                trials(static_cast<Eigen::Index>(k), 1) = diag.jitters[k];
            }
            const fs::path trial_csv = fs::path(cfg.out_dir) / "trial_costs.csv";
            write_matrix_csv(trial_csv.string(), trials);
            manifest.add("trial_costs.csv");
            Eigen::MatrixXd binm(static_cast<Eigen::Index>(cfg.features.m_bins),
                                 static_cast<Eigen::Index>(diag.bins.size()));
            for (std::size_t fi = 0; fi < diag.bins.size(); ++fi)
                for (int k = 0; k < cfg.features.m_bins; ++k)
                    binm(k, static_cast<Eigen::Index>(fi)) = diag.bins[fi].thresholds[k];
            write_matrix_csv((fs::path(cfg.out_dir) / "bins.csv").string(), binm);
            manifest.add("bins.csv");
        }
    }
    manifest.write(cfg.out_dir);
    std::printf("cost = %.17g\n", cost);
    if (std::isinf(cost)) return kExitRejected;
    return kExitOk;
}

int cmd_fit(const RunConfig& cfg, const std::string& data_dir) {
    const std::vector<Pattern> data = load_pattern_dir(data_dir);
    if (data.empty()) {
        std::cerr << "no pattern files in " << data_dir << "\n";
        return kExitInput;
    }
    check_data_side(data, cfg);
    fs::create_directories(cfg.out_dir);
    Manifest manifest{config_hash(cfg), {}};
    DeConfig de = cfg.de;
    de.seed = cfg.seed;
    const DeResult result = de_run(make_mixed_cost(cfg, data), de);

    write_de_history_csv((fs::path(cfg.out_dir) / "de_history.csv").string(),
                         result.history);
    manifest.add("de_history.csv");
    std::vector<double> trace;
    for (const auto& rec : result.history) trace.push_back(rec.best_cost);
    series_png((fs::path(cfg.out_dir) / "de_history.png").string(), trace);
    manifest.add("de_history.png");

    const ModelParams best = to_model_params(result.best);
    write_model_params((fs::path(cfg.out_dir) / "best_theta.txt").string(), best);
    manifest.add("best_theta.txt");
    manifest.write(cfg.out_dir);
    std::printf("best cost %.17g after %d generations\n", result.best_cost,
                result.generations);
    std::printf("L = %.17g\na = %.17g\nb = %.17g\nsigma = %.17g\n", best.L, best.a,
                best.b, best.sigma);
    return kExitOk;
}

int cmd_sample(const RunConfig& cfg, const std::string& data_dir,
               const ModelParams& start, const std::string& resume_path) {
    const std::vector<Pattern> data = load_pattern_dir(data_dir);
    if (data.empty()) {
        std::cerr << "no pattern files in " << data_dir << "\n";
        return kExitInput;
    }
    check_data_side(data, cfg);
    fs::create_directories(cfg.out_dir);
    Manifest manifest{config_hash(cfg), {}};
    AmConfig am = cfg.am;
    am.lower = cfg.de.lower;
    am.upper = cfg.de.upper;
    am.seed = cfg.seed;

    Chain resume;
    if (!resume_path.empty()) resume = read_chain_csv(resume_path);

    const Chain chain = am_run(make_mixed_cost(cfg, data), to_vector(start), am, resume);
    write_chain_csv((fs::path(cfg.out_dir) / "chain.csv").string(), chain);
    manifest.add("chain.csv");

    const ChainRow map = map_estimate(chain, am.burn_in);
    std::ofstream report(fs::path(cfg.out_dir) / "report.txt");
    report.precision(10);
    report << "samples = " << chain.size() << "\nacceptance_rate = "
           << chain.acceptance_rate() << "\nmap_cost = " << map.cost << "\n";
    const char* names[4] = {"L", "a", "b", "sigma"};
    for (Eigen::Index k = 0; k < 4; ++k) {
        const auto [lo, hi] = credible_interval(chain, 0.95, k, am.burn_in);
        report << names[k] << "_map = " << map.theta[k] << "\n"
               << names[k] << "_ci95 = [" << lo << ", " << hi << "]\n";
    }
    report.close();
    manifest.add("report.txt");

    // sigma-marginalized (L, a, b) pair plot
    const Chain restricted = marginalize(chain, {0, 1, 2});
    const long n_post = chain.size() - am.burn_in;
    Eigen::MatrixXd samples(n_post, 3);
    for (long i = 0; i < n_post; ++i)
        samples.row(i) = restricted.rows[static_cast<std::size_t>(am.burn_in + i)]
                             .theta.transpose();
    write_matrix_csv((fs::path(cfg.out_dir) / "posterior_Lab.csv").string(), samples);
    manifest.add("posterior_Lab.csv");
    pair_plot_png((fs::path(cfg.out_dir) / "posterior_pairs.png").string(), samples,
                  {"L", "a", "b"});
    manifest.add("posterior_pairs.png");
    manifest.write(cfg.out_dir);
    std::printf("chain length %ld, acceptance rate %.3f, MAP cost %.6g\n",
                chain.size(), chain.acceptance_rate(), map.cost);
    return kExitOk;
}

int cmd_selftest() {
    int failed = 0;
    auto check = [&](bool ok, const char* what) {
        std::printf("%-48s %s\n", what, ok ? "ok" : "FAIL");
        if (!ok) ++failed;
    };

    {  // Laplacian vs dense operator assembly on a random field
        auto rng = make_rng(7);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const int n = 8;
        Field u(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) u(i, j) = unit(rng);
        Field lap(n, n);
        apply_laplacian(u, 0.5, lap);
        double max_err = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                auto at = [&](int r, int c) {
                    return u(std::clamp(r, 0, n - 1), std::clamp(c, 0, n - 1));
                };
                const double want = (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) +
                                     at(i, j + 1) - 4.0 * u(i, j)) /
                                    0.25;
                max_err = std::max(max_err, std::abs(want - lap(i, j)));
            }
        check(max_err < 1e-12, "laplacian matches clamped 5-point stencil");
    }
    {  // bin placement on the uniform distribution
        std::vector<double> sample(100001);
        for (std::size_t i = 0; i < sample.size(); ++i)
            sample[i] = static_cast<double>(i) / (sample.size() - 1);
        const BinSet bins = select_bins(sample, 3);
        check(std::abs(bins.thresholds[0] - 0.2625) < 1e-3 &&
                  std::abs(bins.thresholds[1] - 0.5) < 1e-3 &&
                  std::abs(bins.thresholds[2] - 0.7375) < 1e-3,
              "bin thresholds on uniform sample");
    }
    {  // chemistry cross-check
        KineticParams kin;
        Concentrations conc{2e-3, 1e-3, 2.25e-3, 1.5e-3, 0.1134};
        const ModelParams p = derive_dimensionless(kin, conc);
        check(std::abs(p.a - 23.34) < 0.1 && std::abs(p.b - 1.616) < 0.01 &&
                  std::abs(p.sigma - 151.0) < 1e-9 && std::abs(p.d - 1.0714) < 1e-3,
              "dimensionless chemistry values");
    }
    {  // differential evolution on the 4-D sphere
        DeConfig de;
        de.lower = Eigen::VectorXd::Constant(4, -5.0);
        de.upper = Eigen::VectorXd::Constant(4, 5.0);
        de.seed = 11;
        de.max_generations = 200;
        de.stall_generations = 200;
        const DeResult r = de_run(
            [](const Eigen::VectorXd& x, std::uint64_t) { return x.squaredNorm(); }, de);
        check(r.best_cost < 1e-6, "differential evolution sphere benchmark");
    }
    {  // empirical quantiles
        std::vector<double> v(100);
        std::iota(v.begin(), v.end(), 1.0);
        check(std::abs(empirical_quantile(v, 0.025) - 3.475) < 1e-12 &&
                  std::abs(empirical_quantile(v, 0.975) - 97.525) < 1e-12,
              "empirical quantile convention");
    }
    {  // distance identities on a tiny pattern pair
        Pattern p1, p2;
        p1.values = Eigen::ArrayXXd::Constant(4, 4, 1.0);
        p2.values = Eigen::ArrayXXd::Zero(4, 4);
        p1.patch_len = p2.patch_len = 3.0;
        const double area = 3.0 * 3.0 / 9.0 * 16.0;  // h^2 * count
        check(std::abs(distance(p1, p2, {DistanceKind::L2}) - std::sqrt(area)) < 1e-12 &&
                  distance(p1, p2, {DistanceKind::SobolevSemi}) == 0.0,
              "distance identities on constant difference");
    }
    std::printf("%d failure(s)\n", failed);
    return failed == 0 ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turing-pattern parameter identification pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, chem_path, resume_path, mode = "mixed";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = -1, n_runs = 4;
    double L = 33.7, a = 12.7, b = 0.45, sigma = 385.0;
    std::vector<std::string> inputs;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value configuration file");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "global seed (overrides the config file)")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
    };
    auto add_theta = [&](CLI::App* cmd) {
        cmd->add_option("--L", L, "domain size parameter");
        cmd->add_option("--a", a, "feed parameter a");
        cmd->add_option("--b", b, "kinetic parameter b");
        cmd->add_option("--sigma", sigma, "complexation parameter sigma");
    };

    CLI::App* pre = app.add_subcommand("preprocess", "images -> pattern files");
    add_common(pre);
    pre->add_option("inputs", inputs, "grayscale images")->required();

    CLI::App* sim = app.add_subcommand("simulate", "run the model operator");
    add_common(sim);
    add_theta(sim);
    sim->add_option("--n", n_runs, "number of seeded runs");

    CLI::App* lik = app.add_subcommand("likelihood", "single cost evaluation");
    add_common(lik);
    add_theta(lik);
    lik->add_option("--data", data_dir, "pattern directory")->required();
    lik->add_option("--mode", mode, "mixed or scil")
        ->check(CLI::IsMember({"mixed", "scil"}));

    CLI::App* fit = app.add_subcommand("fit", "differential-evolution fit");
    add_common(fit);
    fit->add_option("--data", data_dir, "pattern directory")->required();

    CLI::App* smp = app.add_subcommand("sample", "adaptive Metropolis sampling");
    add_common(smp);
    add_theta(smp);
    smp->add_option("--data", data_dir, "pattern directory")->required();
    smp->add_option("--resume", resume_path, "existing chain CSV to extend");

    CLI::App* der = app.add_subcommand("derive-params", "chemistry -> model parameters");
    der->add_option("chemfile", chem_path, "kinetics/scenario file")->required();

    app.add_subcommand("selftest", "run the built-in oracle checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("selftest")) return cmd_selftest();
        if (app.got_subcommand("derive-params")) return cmd_derive_params(chem_path);

        RunConfig cfg = load_run_config(config_path);
        if (seed_set) cfg.seed = seed;
        if (workers >= 0) cfg.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        const ModelParams theta{L, a, b, sigma, 1.07};

        if (app.got_subcommand("preprocess")) return cmd_preprocess(cfg, inputs);
        if (app.got_subcommand("simulate")) return cmd_simulate(cfg, theta, n_runs);
        if (app.got_subcommand("likelihood"))
            return cmd_likelihood(cfg, data_dir, theta, mode);
        if (app.got_subcommand("fit")) return cmd_fit(cfg, data_dir);
        if (app.got_subcommand("sample"))
            return cmd_sample(cfg, data_dir, theta, resume_path);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DegeneratePatternError& e) {
        std::cerr << e.what() << "\n";
        return kExitDegenerate;
    } catch (const AllRejectedError& e) {
        std::cerr << e.what() << "\n";
        return kExitRejected;
    } catch (const StartRejectedError& e) {
        std::cerr << e.what() << "\n";
        return kExitRejected;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
