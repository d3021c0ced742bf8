#include "cilfit/chem.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cilfit {

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

void KineticParams::validate() const {
    require_positive(k1a, "k1a");
    require_positive(k1b, "k1b");
    require_positive(k2, "k2");
    require_positive(k3b, "k3b");
    require_positive(k4, "k4");
    require_positive(k_minus4, "k_minus4");
    require_positive(alpha, "alpha");
    require_positive(d_iminus, "d_iminus");
    require_positive(d_clo2minus, "d_clo2minus");
}

void Concentrations::validate() const {
    require_positive(clo2, "[ClO2]");
    require_positive(i2, "[I2]");
    require_positive(ma, "[MA]");
    // [S] = 0 is allowed: no complexing agent, sigma = 1 exactly
    if (!(s >= 0.0)) throw std::invalid_argument("[S] must be nonnegative");
    require_positive(ell, "ell");
}

Concentrations concentrations_from_feeds(const FeedScenario& feeds) {
    Concentrations c;
    c.clo2 = feeds.naclo2;
    c.i2 = 0.5 * feeds.ki;
    c.ma = feeds.ma;
    c.s = 1e-3 * feeds.pva_g_per_l;
    c.ell = feeds.ell;
    return c;
}

ModelParams derive_dimensionless(const KineticParams& kin, const Concentrations& conc) {
    kin.validate();
    conc.validate();
    const double sqrt_alpha = std::sqrt(kin.alpha);
    const double denom = sqrt_alpha * kin.k2 * conc.clo2;
    ModelParams p;
    p.a = (kin.k1a * conc.ma / denom) * (conc.i2 / (kin.k1b + conc.i2));
    p.b = kin.k3b * conc.i2 / denom;
    p.sigma = 1.0 + (kin.k4 / kin.k_minus4) * conc.s * conc.i2;
    p.d = kin.d_clo2minus / kin.d_iminus;
    p.L = std::sqrt(kin.k2 * conc.clo2 / kin.d_iminus) * conc.ell;
    p.validate();
    return p;
}

double required_ell(double target_l, const KineticParams& kin, const Concentrations& conc) {
    kin.validate();
    require_positive(target_l, "target L");
    require_positive(conc.clo2, "[ClO2]");
    return target_l / std::sqrt(kin.k2 * conc.clo2 / kin.d_iminus);
}

ChemFile load_chem_file(const std::string& path) {
    const KvFile file = parse_kv_file(path);
    ChemFile chem;
    if (const KvSection* kin = file.find("kinetics")) {
        KineticParams& k = chem.kinetics;
        k.k1a = kin->get_double("k1a", k.k1a);
        k.k1b = kin->get_double("k1b", k.k1b);
        k.k2 = kin->get_double("k2", k.k2);
        k.k3a = kin->get_double("k3a", k.k3a);
        k.k3b = kin->get_double("k3b", k.k3b);
        k.k4 = kin->get_double("k4", k.k4);
        k.k_minus4 = kin->get_double("k_minus4", k.k_minus4);
        k.alpha = kin->get_double("alpha", k.alpha);
        k.d_ma = kin->get_double("d_ma", k.d_ma);
        k.d_i2 = kin->get_double("d_i2", k.d_i2);
        k.d_clo2 = kin->get_double("d_clo2", k.d_clo2);
        k.d_iminus = kin->get_double("d_iminus", k.d_iminus);
        k.d_clo2minus = kin->get_double("d_clo2minus", k.d_clo2minus);
    }
    for (const KvSection& section : file.sections) {
        const std::string prefix = "scenario";
        if (section.name.rfind(prefix, 0) != 0) continue;
        FeedScenario sc;
        sc.name = section.name.size() > prefix.size()
                      ? section.name.substr(prefix.size() + 1)
                      : "";
        sc.naclo2 = section.get_double("naclo2");
        sc.ki = section.get_double("ki");
        sc.ma = section.get_double("ma");
        sc.pva_g_per_l = section.get_double("pva_g_per_l");
        sc.ell = section.get_double("ell");
        chem.scenarios.push_back(std::move(sc));
    }
    return chem;
}

void write_model_params(const std::string& path, const ModelParams& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    out << "[model]\n"
        << "L = " << params.L << "\n"
        << "a = " << params.a << "\n"
        << "b = " << params.b << "\n"
        << "sigma = " << params.sigma << "\n"
        << "d = " << params.d << "\n";
}

}  // namespace cilfit
