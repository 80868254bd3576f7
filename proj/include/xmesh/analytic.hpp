#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "xmesh/error.hpp"
#include "xmesh/physics.hpp"

namespace xmesh {

inline double erf(double x) { return std::erf(x); }

/// Exponential integral Ei(x); x = 0 is a logarithmic singularity.
inline double expint_Ei(double x) {
    if (x == 0.0) throw InvalidInput("expint_Ei: x = 0 is singular");
    return boost::math::expint(x);
}

namespace detail {

/// Bisection on a sign-changing bracket followed by secant polish.
inline double find_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw SolverError("find_root: no sign change on bracket");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        double h = std::max(1e-9, 1e-7 * std::abs(x));
        double d = (f(x + h) - f(x - h)) / (2.0 * h);
        if (d == 0.0) break;
        double step = f(x) / d;
        if (!std::isfinite(step)) break;
        x -= step;
        x = std::clamp(x, lo - 1e-6, hi + 1e-6);
    }
    return x;
}

/// Scans (0, 5] for a sign change of f, then solves.
inline double solve_phi(const std::function<double(double)>& f) {
    const double lo_guard = 1e-8;
    double prev_x = lo_guard, prev_f = f(prev_x);
    for (int i = 1; i <= 500; ++i) {
        double x = 5.0 * i / 500.0;
        double fx = f(x);
        if (std::isfinite(fx) && std::isfinite(prev_f) && prev_f * fx <= 0.0)
            return find_root(f, prev_x, x);
        prev_x = x;
        prev_f = fx;
    }
    throw SolverError("solve_phi: no sign change on (0, 5]");
}

} // namespace detail

/// Similarity solution of the planar two-phase freezing problem.
/// Front at x_f(t) = 2 phi sqrt(alpha_s t).
struct PlanarSolution {
    double phi;
    MaterialProperties props;
    double T_s; // wall temperature [K], < T0
    double T_l; // initial liquid temperature [K], > T0
};

/// Transcendental condition for the planar front coefficient, multiplied
/// through by the latent heat so the l = 0 limit stays well posed:
///   c_s (T0 - T_s) e^{-phi^2}/erf(phi)
///   - c_l (T_l - T0)/sqrt(alpha) e^{-alpha phi^2}/(1 - erf(phi sqrt(alpha)))
///   - phi sqrt(pi) l = 0,   alpha = alpha_s/alpha_l.
inline double planar_phi_residual(double phi, const MaterialProperties& p, double T_s, double T_l) {
    double alpha = p.alpha_s() / p.alpha_l();
    double solid = p.c_s * (p.T0 - T_s) * std::exp(-phi * phi) / std::erf(phi);
    double liquid = p.c_l * (T_l - p.T0) / std::sqrt(alpha) * std::exp(-alpha * phi * phi) /
                    std::erfc(phi * std::sqrt(alpha));
    return solid - liquid - phi * std::sqrt(M_PI) * p.l;
}

inline double solve_phi_planar(const MaterialProperties& p, double T_s, double T_l) {
    if (!(T_s < p.T0 && p.T0 < T_l))
        throw InvalidInput("solve_phi_planar: need T_s < T0 < T_l");
    return detail::solve_phi([&](double phi) { return planar_phi_residual(phi, p, T_s, T_l); });
}

inline PlanarSolution make_planar_solution(const MaterialProperties& p, double T_s, double T_l) {
    return {solve_phi_planar(p, T_s, T_l), p, T_s, T_l};
}

inline double planar_front_position(double t, const PlanarSolution& s) {
    return 2.0 * s.phi * std::sqrt(s.props.alpha_s() * t);
}

/// erf-profile branches, continuous at x_f(t).
inline double exact_planar(double x, double t, const PlanarSolution& s) {
    if (!(t > 0.0)) throw InvalidInput("exact_planar: t must be positive");
    const auto& p = s.props;
    double xf = planar_front_position(t, s);
    if (x <= xf) {
        return s.T_s + (p.T0 - s.T_s) / std::erf(s.phi) * std::erf(x / (2.0 * std::sqrt(p.alpha_s() * t)));
    }
    double alpha = p.alpha_s() / p.alpha_l();
    return s.T_l - (s.T_l - p.T0) / std::erfc(s.phi * std::sqrt(alpha)) *
                       std::erfc(x / (2.0 * std::sqrt(p.alpha_l() * t)));
}

/// Similarity solution of the axisymmetric freezing problem driven by a
/// Dirac heat sink Q at r = 0. Front at r_f(t) = 2 phi sqrt(alpha_s t).
struct AxisymSolution {
    double phi;
    MaterialProperties props;
    double Q;   // sink intensity [W/m]
    double T_l; // far-field liquid temperature [K]
};

/// Ei-based condition, multiplied through by l for the l = 0 limit:
///   Q/(4 pi rho alpha_s) e^{-phi^2}
///   + c_l (T_l - T0)/alpha e^{-phi^2 alpha}/Ei(-phi^2 alpha)
///   - phi^2 l = 0.
inline double axisym_phi_residual(double phi, const MaterialProperties& p, double Q, double T_l) {
    double alpha = p.alpha_s() / p.alpha_l();
    double a2 = phi * phi * alpha;
    double sink = Q / (4.0 * M_PI * p.rho * p.alpha_s()) * std::exp(-phi * phi);
    double liquid = p.c_l * (T_l - p.T0) / alpha * std::exp(-a2) / boost::math::expint(-a2);
    return sink + liquid - phi * phi * p.l;
}

inline double solve_phi_axisym(const MaterialProperties& p, double Q, double T_l) {
    if (!(Q > 0.0)) throw InvalidInput("solve_phi_axisym: need Q > 0 (heat sink)");
    if (!(T_l > p.T0)) throw InvalidInput("solve_phi_axisym: need T_l > T0");
    return detail::solve_phi([&](double phi) { return axisym_phi_residual(phi, p, Q, T_l); });
}

inline AxisymSolution make_axisym_solution(const MaterialProperties& p, double Q, double T_l) {
    return {solve_phi_axisym(p, Q, T_l), p, Q, T_l};
}

inline double axisym_front_position(double t, const AxisymSolution& s) {
    return 2.0 * s.phi * std::sqrt(s.props.alpha_s() * t);
}

/// Ei-profile branches; r = 0 hits the log singularity of Ei.
inline double exact_axisym(double r, double t, const AxisymSolution& s) {
    if (!(t > 0.0)) throw InvalidInput("exact_axisym: t must be positive");
    if (!(r > 0.0)) throw InvalidInput("exact_axisym: r = 0 is singular");
    const auto& p = s.props;
    double rf = axisym_front_position(t, s);
    double alpha = p.alpha_s() / p.alpha_l();
    if (r <= rf) {
        return p.T0 + s.Q / (4.0 * M_PI * p.k_s) *
                          (boost::math::expint(-r * r / (4.0 * p.alpha_s() * t)) -
                           boost::math::expint(-s.phi * s.phi));
    }
    return s.T_l - (s.T_l - p.T0) / boost::math::expint(-s.phi * s.phi * alpha) *
                       boost::math::expint(-r * r / (4.0 * p.alpha_l() * t));
}

struct FrontErrorResult {
    std::vector<double> xi; // per-sample relative error
    double xi_bar;          // duration-integrated relative error
};

/// xi(t) = |x_num - x_exact|/x_exact pointwise; xi_bar integrates numerator
/// and denominator by the trapezoid rule on the sample times.
inline FrontErrorResult front_error(const std::vector<double>& times,
                                    const std::vector<double>& measured,
                                    const std::function<double(double)>& exact) {
    if (times.empty() || times.size() != measured.size())
        throw InvalidInput("front_error: empty or mismatched samples");
    FrontErrorResult out;
    std::vector<double> err(times.size()), ex(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        ex[i] = exact(times[i]);
        if (!(ex[i] > 0.0)) throw InvalidInput("front_error: exact position must be positive");
        err[i] = std::abs(measured[i] - ex[i]);
        out.xi.push_back(err[i] / ex[i]);
    }
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i + 1 < times.size(); ++i) {
        double dt = times[i + 1] - times[i];
        num += 0.5 * dt * (err[i] + err[i + 1]);
        den += 0.5 * dt * (ex[i] + ex[i + 1]);
    }
    out.xi_bar = times.size() == 1 ? out.xi[0] : num / den;
    return out;
}

} // namespace xmesh
