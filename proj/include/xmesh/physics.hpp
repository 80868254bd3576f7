#pragma once

#include <cmath>

#include "xmesh/error.hpp"

namespace xmesh {

/// Phase-change material data. The solid branch applies for T <= T0.
struct MaterialProperties {
    double rho;  // density [kg/m3], equal in both phases
    double c_s;  // specific heat, solid [J/(K kg)]
    double c_l;  // specific heat, liquid [J/(K kg)]
    double k_s;  // conductivity, solid [W/(m K)]
    double k_l;  // conductivity, liquid [W/(m K)]
    double l;    // latent heat [J/kg]
    double T0;   // transition temperature [K]

    /// Offset making the energy jump at T0 equal the latent heat:
    /// l = (c_l - c_s) T0 + l_bar.
    double l_bar() const { return l - (c_l - c_s) * T0; }

    double alpha_s() const { return k_s / (rho * c_s); }
    double alpha_l() const { return k_l / (rho * c_l); }

    static MaterialProperties ice_water(double latent = 3.3e5) {
        return {1000.0, 2090.0, 4185.0, 2.1, 0.6, latent, 273.15};
    }
};

struct RegularizationParams {
    double delta; // half-ramp width [K], > 0
};

struct DimensionlessGroups {
    double kappa;   // k_s / k_l
    double alpha;   // alpha_s / alpha_l
    double gamma;   // Stefan number l / (c_l (T_l - T0))
    double t_r;     // reference time L_r^2 / alpha_l [s]
    double alpha_s; // [m2/s]
    double alpha_l; // [m2/s]
};

/// Specific internal energy, discontinuous at T0 (jump = latent heat).
inline double internal_energy(double T, const MaterialProperties& p) {
    return T <= p.T0 ? p.c_s * T : p.c_l * T + p.l_bar();
}

inline double conductivity(double T, const MaterialProperties& p) {
    return T <= p.T0 ? p.k_s : p.k_l;
}

/// Piecewise-linear smooth step: 0 below T0-delta/2, 1 above T0+delta/2.
inline double step_regularized(double T, double T0, double delta) {
    if (T < T0 - 0.5 * delta) return 0.0;
    if (T > T0 + 0.5 * delta) return 1.0;
    return (T - (T0 - 0.5 * delta)) / delta;
}

struct RegularizedLaws {
    double e;     // regularized energy [J/kg]
    double k;     // regularized conductivity
    double de_dT; // [J/(kg K)]
    double dk_dT;
};

/// Ramp-smoothed energy/conductivity and their temperature derivatives.
/// At the ramp endpoints the one-sided derivative from inside the band is used.
inline RegularizedLaws regularized_laws(double T, const MaterialProperties& p,
                                        const RegularizationParams& reg) {
    double H = step_regularized(T, p.T0, reg.delta);
    bool in_band = T >= p.T0 - 0.5 * reg.delta && T <= p.T0 + 0.5 * reg.delta;
    double dH = in_band ? 1.0 / reg.delta : 0.0;
    RegularizedLaws out;
    out.e = ((1.0 - H) * p.c_s + H * p.c_l) * T + H * p.l_bar();
    out.k = (1.0 - H) * p.k_s + H * p.k_l;
    out.de_dT = (1.0 - H) * p.c_s + H * p.c_l + dH * ((p.c_l - p.c_s) * T + p.l_bar());
    out.dk_dT = dH * (p.k_l - p.k_s);
    return out;
}

inline DimensionlessGroups dimensionless_groups(const MaterialProperties& p, double T_l,
                                                double L_r) {
    DimensionlessGroups g;
    g.alpha_s = p.alpha_s();
    g.alpha_l = p.alpha_l();
    g.kappa = p.k_s / p.k_l;
    g.alpha = g.alpha_s / g.alpha_l;
    if (p.l > 0.0 && T_l == p.T0)
        throw InvalidInput("dimensionless_groups: Stefan number undefined for T_l == T0 with l > 0");
    g.gamma = p.l > 0.0 ? p.l / (p.c_l * (T_l - p.T0)) : 0.0;
    g.t_r = L_r * L_r / g.alpha_l;
    return g;
}

} // namespace xmesh
