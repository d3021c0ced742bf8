#pragma once

#include <string>
#include <vector>

#include "cilfit/kvfile.hpp"
#include "cilfit/types.hpp"

namespace cilfit {

// CIMA kinetic constants. Units: s, M (molar), cm. k3a takes part only in the
// full seven-species kinetics and is carried for completeness.
struct KineticParams {
    double k1a = 6.2e-4;       // s^-1
    double k1b = 5e-5;         // M
    double k2 = 900.0;         // M^-1 s^-1
    double k3a = 100.0;        // M^-2 s^-2
    double k3b = 9.2e-5;       // s^-1
    double k4 = 1e8;
    double k_minus4 = 1.0;
    double alpha = 1e-15;      // rate cut-off
    double d_ma = 0.4e-5;      // cm^2 s^-1
    double d_i2 = 0.6e-5;
    double d_clo2 = 0.75e-5;
    double d_iminus = 0.7e-5;
    double d_clo2minus = 0.75e-5;

    void validate() const;
};

// Reservoir/gel concentrations (M) and the physical patch side (cm).
struct Concentrations {
    double clo2 = 0.0;
    double i2 = 0.0;
    double ma = 0.0;
    double s = 0.0;
    double ell = 0.0;

    void validate() const;
};

// Feed-level description of one experimental scenario; converted to gel
// concentrations by the documented estimates: [ClO2] = the sodium chlorite
// feed, [I2] = half the potassium iodide feed, [S] = 1e-3 M per g/L of PVA.
struct FeedScenario {
    std::string name;
    double naclo2 = 0.0;    // M
    double ki = 0.0;        // M
    double ma = 0.0;        // M
    double pva_g_per_l = 0.0;
    double ell = 0.0;       // cm
};

Concentrations concentrations_from_feeds(const FeedScenario& feeds);

// Dimensionless Lengyel-Epstein parameters from kinetics and concentrations:
//   a = (k1a [MA] / (sqrt(alpha) k2 [ClO2])) * ([I2] / (k1b + [I2]))
//   b = k3b [I2] / (sqrt(alpha) k2 [ClO2])
//   sigma = 1 + (k4/k_minus4) [S] [I2]
//   d = D_ClO2- / D_I-
//   L = sqrt(k2 [ClO2] / D_I-) * ell
ModelParams derive_dimensionless(const KineticParams& kin, const Concentrations& conc);

// Physical patch side giving the target dimensionless L; inverse of the L map.
double required_ell(double target_l, const KineticParams& kin, const Concentrations& conc);

// Structured chemistry file: a [kinetics] section (all keys optional, defaults
// above) and one [scenario <name>] section per experiment.
struct ChemFile {
    KineticParams kinetics;
    std::vector<FeedScenario> scenarios;
};

ChemFile load_chem_file(const std::string& path);
void write_model_params(const std::string& path, const ModelParams& params);

}  // namespace cilfit
