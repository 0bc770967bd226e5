#include "fluxgpp/pmodel.hpp"

#include <cmath>
#include <string>

#include "fluxgpp/errors.hpp"

namespace fluxgpp {

namespace {

constexpr double kGasConstant = 8.314; // J mol-1 K-1
constexpr double kTRef = 298.15;       // K
constexpr double kKelvin = 273.15;

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw InputError(std::string("non-finite ") + name);
    }
}

void require_temp_range(double tc) {
    if (tc < -50.0 || tc > 60.0) {
        throw InputError("temperature out of supported range [-50, 60] degC: " +
                         std::to_string(tc));
    }
}

// Arrhenius scaling of a 25 degC reference value.
double arrhenius(double ref25, double dh, double tk) {
    return ref25 * std::exp(dh * (tk - kTRef) / (kTRef * kGasConstant * tk));
}

// Vogel equation for the dynamic viscosity of water, Pa s.
double water_viscosity(double tk) {
    return 2.414e-5 * std::pow(10.0, 247.8 / (tk - 140.0));
}

} // namespace

void PModelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InputError(std::string("PModelParams: ") + name +
                             " must be strictly positive");
        }
    };
    positive(gamma_star_25, "gamma_star_25");
    positive(dh_gamma, "dh_gamma");
    positive(kc_25, "kc_25");
    positive(dh_kc, "dh_kc");
    positive(ko_25, "ko_25");
    positive(dh_ko, "dh_ko");
    positive(beta_cost, "beta_cost");
    positive(o2_fraction, "o2_fraction");
    positive(p0, "p0");
    positive(molar_mass_c, "molar_mass_c");
    if (!(c_star > 0.0 && c_star < 1.0)) {
        throw InputError("PModelParams: c_star must lie in (0, 1)");
    }
    if (!(soil_beta_0 >= 0.0 && soil_beta_0 <= 1.0)) {
        throw InputError("PModelParams: soil_beta_0 must lie in [0, 1]");
    }
    if (!(soil_theta_0 < soil_theta_star)) {
        throw InputError("PModelParams: soil_theta_0 must be < soil_theta_star");
    }
}

void PhotoEnv::validate() const {
    require_finite(tc, "tc");
    require_finite(vpd, "vpd");
    require_finite(patm, "patm");
    require_finite(co2_ppm, "co2_ppm");
    require_finite(theta, "theta");
    require_finite(par, "par");
    require_finite(fapar, "fapar");
    if (vpd < 0.0) throw InputError("PhotoEnv: vpd must be >= 0");
    if (par < 0.0) throw InputError("PhotoEnv: par must be >= 0");
    if (fapar < 0.0 || fapar > 1.0) throw InputError("PhotoEnv: fapar must lie in [0, 1]");
    if (theta < 0.0 || theta > 1.0) throw InputError("PhotoEnv: theta must lie in [0, 1]");
    if (!(patm > 0.0)) throw InputError("PhotoEnv: patm must be > 0");
    if (!(co2_ppm > 0.0)) throw InputError("PhotoEnv: co2_ppm must be > 0");
}

double gamma_star(double tc, double patm, const PModelParams& params) {
    require_finite(tc, "tc");
    require_finite(patm, "patm");
    require_temp_range(tc);
    if (!(patm > 0.0)) throw InputError("gamma_star: patm must be > 0");
    return params.gamma_star_25 * (patm / params.p0) *
           std::exp(params.dh_gamma * ((tc + kKelvin) - kTRef) /
                    (kTRef * kGasConstant * (tc + kKelvin)));
}

double kmm(double tc, double patm, const PModelParams& params) {
    require_finite(tc, "tc");
    require_finite(patm, "patm");
    require_temp_range(tc);
    if (!(patm > 0.0)) throw InputError("kmm: patm must be > 0");
    const double tk = tc + kKelvin;
    const double kc = arrhenius(params.kc_25, params.dh_kc, tk);
    const double ko = arrhenius(params.ko_25, params.dh_ko, tk);
    const double po2 = params.o2_fraction * patm;
    return kc * (1.0 + po2 / ko);
}

double eta_star(double tc) {
    require_finite(tc, "tc");
    const double tk = tc + kKelvin;
    if (tk <= 140.0) {
        throw InputError("eta_star: temperature below Vogel-equation domain");
    }
    return water_viscosity(tk) / water_viscosity(25.0 + kKelvin);
}

OptimalChi optimal_chi(const PhotoEnv& env, const PModelParams& params) {
    env.validate();
    const double ca = env.co2_ppm * 1e-6 * env.patm;
    const double gstar = gamma_star(env.tc, env.patm, params);
    if (ca <= gstar) {
        throw InputError("optimal_chi: ambient CO2 partial pressure (" +
                         std::to_string(ca) +
                         " Pa) does not exceed the compensation point (" +
                         std::to_string(gstar) + " Pa)");
    }
    const double k = kmm(env.tc, env.patm, params);
    const double eta = eta_star(env.tc);
    const double xi = std::sqrt(params.beta_cost * (k + gstar) / (1.6 * eta));
    const double frac = env.vpd == 0.0 ? 1.0 : xi / (xi + std::sqrt(env.vpd));
    const double g_over_ca = gstar / ca;
    const double chi = g_over_ca + (1.0 - g_over_ca) * frac;
    return OptimalChi{chi, xi, ca, gstar};
}

double phi0_temp(double tc) {
    require_finite(tc, "tc");
    const double poly = (0.352 + 0.022 * tc - 3.4e-4 * tc * tc) / 8.0;
    return poly > 0.0 ? poly : 0.0;
}

double soil_beta(double theta, const PModelParams& params) {
    require_finite(theta, "theta");
    if (theta < 0.0 || theta > 1.0) {
        throw InputError("soil_beta: theta must lie in [0, 1]");
    }
    if (theta >= params.soil_theta_star) return 1.0;
    if (theta <= params.soil_theta_0) return params.soil_beta_0;
    const double ramp = (params.soil_theta_star - theta) /
                        (params.soil_theta_star - params.soil_theta_0);
    return 1.0 - (1.0 - params.soil_beta_0) * ramp * ramp;
}

double lue(const PhotoEnv& env, const PModelParams& params) {
    const OptimalChi oc = optimal_chi(env, params);
    const double m = (oc.ca_pa * oc.chi - oc.gstar) /
                     (oc.ca_pa * oc.chi + 2.0 * oc.gstar);
    double m_prime = 0.0;
    if (m > params.c_star) {
        m_prime = m * std::sqrt(1.0 - std::pow(params.c_star / m, 2.0 / 3.0));
    }
    return phi0_temp(env.tc) * soil_beta(env.theta, params) * m_prime *
           params.molar_mass_c;
}

double gpp(const PhotoEnv& env, const PModelParams& params) {
    env.validate();
    if (env.par == 0.0 || env.fapar == 0.0) return 0.0;
    return env.par * env.fapar * lue(env, params);
}

} // namespace fluxgpp
