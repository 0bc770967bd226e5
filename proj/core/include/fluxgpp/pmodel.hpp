#pragma once

#include <cstddef>

namespace fluxgpp {

/// Photosynthesis constants for the optimality-based light-use-efficiency
/// model. Defaults are the standard parameterization; everything is
/// overridable through the run configuration.
struct PModelParams {
    double gamma_star_25 = 4.332;   // Pa, photorespiratory compensation point at 25 degC, p0
    double dh_gamma = 37830.0;      // J/mol, activation energy for gamma_star
    double kc_25 = 39.97;           // Pa, Michaelis constant for CO2 at 25 degC
    double dh_kc = 79430.0;         // J/mol
    double ko_25 = 27480.0;         // Pa, Michaelis constant for O2 at 25 degC
    double dh_ko = 36380.0;         // J/mol
    double beta_cost = 146.0;       // carboxylation:transpiration unit-cost ratio
    double c_star = 0.41;           // Jmax-limitation cost factor in m'
    double o2_fraction = 0.209476;  // atmospheric O2 mole fraction
    double p0 = 101325.0;           // Pa, reference sea-level pressure
    double molar_mass_c = 12.0107;  // g/mol
    double soil_theta_star = 0.6;   // m3/m3, stress-free soil moisture knee
    double soil_theta_0 = 0.0;      // m3/m3, full-stress knee
    double soil_beta_0 = 0.0;       // stress multiplier at/below theta_0

    /// Throws InputError when any invariant is broken (non-positive
    /// pressures/energies, knee ordering, c_star outside (0,1), ...).
    void validate() const;
};

/// One point-in-time environment driving the photosynthesis model.
struct PhotoEnv {
    double tc = 25.0;       // degC, daily mean air temperature
    double vpd = 0.0;       // Pa, vapour pressure deficit (>= 0)
    double patm = 101325.0; // Pa, surface pressure
    double co2_ppm = 400.0; // micromol/mol ambient CO2
    double theta = 1.0;     // m3/m3 volumetric soil water content in [0,1]
    double par = 0.0;       // mol photons m-2 d-1 (>= 0)
    double fapar = 0.0;     // absorbed fraction of PAR in [0,1]

    void validate() const;
};

struct OptimalChi {
    double chi;    // leaf-internal : ambient CO2 ratio, in (gamma_star/ca, 1]
    double xi;     // Pa^0.5, VPD sensitivity of chi
    double ca_pa;  // Pa, ambient CO2 partial pressure
    double gstar;  // Pa, photorespiratory compensation point
};

/// Photorespiratory compensation point (Pa). Arrhenius in temperature,
/// linear in pressure through patm/p0.
double gamma_star(double tc, double patm, const PModelParams& params);

/// Effective Michaelis-Menten coefficient K = Kc(T) * (1 + pO2/Ko(T)) in Pa.
/// The 25 degC Kc/Ko are not pressure-scaled; pO2 = o2_fraction * patm.
double kmm(double tc, double patm, const PModelParams& params);

/// Viscosity of water relative to 25 degC (Vogel equation).
/// eta_star(25) == 1 exactly; throws InputError for T_K <= 140.
double eta_star(double tc);

/// Optimal chi from the carbon-water cost trade-off:
///   xi  = sqrt(beta (K + gamma_star) / (1.6 eta_star))
///   chi = gstar/ca + (1 - gstar/ca) * xi / (xi + sqrt(D))
/// with the D = 0 fraction taken as 1. Throws InputError when ca <= gstar
/// (degenerate environment).
OptimalChi optimal_chi(const PhotoEnv& env, const PModelParams& params);

/// Temperature-dependent intrinsic quantum yield,
/// max(0, (0.352 + 0.022 tc - 3.4e-4 tc^2) / 8), mol C / mol photons.
double phi0_temp(double tc);

/// Soil-moisture stress multiplier in [soil_beta_0, 1]: 1 above theta_star,
/// beta_0 below theta_0, quadratic ramp between.
double soil_beta(double theta, const PModelParams& params);

/// Light-use efficiency in g C / mol photons:
///   m  = (ca chi - gstar) / (ca chi + 2 gstar)
///   m' = m sqrt(1 - (c*/m)^(2/3)),  m' = 0 for m <= c*
///   LUE = phi0(tc) * soil_beta(theta) * m' * M_C
double lue(const PhotoEnv& env, const PModelParams& params);

/// Gross primary productivity, g C m-2 d-1: PAR * fAPAR * LUE.
double gpp(const PhotoEnv& env, const PModelParams& params);

} // namespace fluxgpp
