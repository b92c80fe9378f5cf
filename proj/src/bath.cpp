#include "ptmps/bath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptmps/quadrature.hpp"

namespace ptmps {

namespace {

double coth_half_beta_omega(const BathSpec& bath, double omega) {
    if (bath.zero_temperature) return 1.0;
    return 1.0 / std::tanh(0.5 * bath.beta * omega);
}

// Integration panels for the frequency integral: a geometric ladder toward
// zero (the integrand behaves like w^{s-1} there at finite temperature)
// refined so that each panel spans at most ~2 radians of the oscillatory
// phase w*t.
std::vector<std::pair<double, double>> frequency_panels(double upper, double t_abs) {
    std::vector<std::pair<double, double>> panels;
    const int ladder = 30;
    double hi = upper;
    for (int k = 0; k < ladder; ++k) {
        const double lo = hi * 0.5;
        panels.emplace_back(lo, hi);
        hi = lo;
    }
    panels.emplace_back(0.0, hi);

    std::vector<std::pair<double, double>> out;
    for (auto [lo, hiw] : panels) {
        const double width = hiw - lo;
        const std::size_t sub =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(width * t_abs / 2.0)));
        for (std::size_t j = 0; j < sub; ++j) {
            const double a = lo + width * static_cast<double>(j) / static_cast<double>(sub);
            const double b = lo + width * static_cast<double>(j + 1) / static_cast<double>(sub);
            out.emplace_back(a, b);
        }
    }
    return out;
}

cd continuum_correlation(const BathSpec& bath, double t) {
    const double upper =
        bath.cutoff == CutoffForm::hard ? bath.omega_c : 50.0 * bath.omega_c;
    const auto panels = frequency_panels(upper, std::abs(t));

    auto integrand = [&](double w) -> cd {
        const double j = bath.spectral_density(w);
        const double c = coth_half_beta_omega(bath, w);
        return cd(j * c * std::cos(w * t), -j * std::sin(w * t));
    };

    static const GaussLegendre gl16(16);
    static const GaussLegendre gl32(32);

    cd coarse(0.0, 0.0), fine(0.0, 0.0);
    double l1 = 0.0;
    for (auto [a, b] : panels) {
        coarse += gl16.integrate(integrand, a, b);
        fine += gl32.integrate(integrand, a, b);
        l1 += gl32.integrate([&](double w) { return std::abs(integrand(w)); }, a, b);
    }
    const double err = std::abs(fine - coarse);
    if (err > 1e-8 * std::max(l1, 1e-300)) {
        std::ostringstream os;
        os << "correlation: frequency integral not converged at t=" << t
           << " (estimate " << err << ")";
        throw numeric_error(os.str());
    }
    return fine;
}

} // namespace

void BathSpec::validate() const {
    if (kind == Kind::discrete) {
        for (const auto& m : modes)
            if (!(m.omega > 0.0)) throw argument_error("BathSpec: mode frequencies must be > 0");
    } else {
        if (amplitude < 0.0) throw argument_error("BathSpec: amplitude must be >= 0");
        if (!(exponent > 0.0)) throw argument_error("BathSpec: exponent s must be > 0");
        if (!(omega_c > 0.0)) throw argument_error("BathSpec: cutoff frequency must be > 0");
    }
    if (!zero_temperature && !(beta > 0.0))
        throw argument_error("BathSpec: beta must be > 0 (or zero-temperature flag set)");
}

double BathSpec::spectral_density(double omega) const {
    if (kind != Kind::continuum)
        throw argument_error("spectral_density: discrete bath has no J(w)");
    if (omega <= 0.0) return 0.0;
    const double body = amplitude * std::pow(omega, exponent);
    if (cutoff == CutoffForm::hard) return omega <= omega_c ? body : 0.0;
    return body * std::exp(-omega / omega_c);
}

cd correlation(const BathSpec& bath, double t) {
    bath.validate();
    if (!std::isfinite(t)) throw argument_error("correlation: t must be finite");

    if (bath.kind == BathSpec::Kind::discrete) {
        cd acc(0.0, 0.0);
        for (const auto& m : bath.modes) {
            const double g2 = std::norm(m.g);
            const double c = coth_half_beta_omega(bath, m.omega);
            acc += cd(g2 * c * std::cos(m.omega * t), -g2 * std::sin(m.omega * t));
        }
        return acc;
    }
    if (bath.amplitude == 0.0) return cd(0.0, 0.0);
    return continuum_correlation(bath, t);
}

EtaTable eta_table(const BathSpec& bath, double dt, std::size_t n_mem,
                   std::size_t quad_order, double rel_tol) {
    bath.validate();
    if (!(dt > 0.0)) throw argument_error("eta_table: dt must be > 0");

    const bool uncoupled =
        (bath.kind == BathSpec::Kind::discrete && bath.modes.empty()) ||
        (bath.kind == BathSpec::Kind::continuum && bath.amplitude == 0.0);

    EtaTable table;
    table.dt = dt;
    table.n_mem = n_mem;
    table.values.assign(n_mem + 1, cd(0.0, 0.0));
    if (uncoupled) return table;

    const GaussLegendre coarse(quad_order);
    const GaussLegendre fine(2 * quad_order);

    // Off-diagonal window pair at separation k:
    //   int_0^dt du int_0^dt dv C(k*dt + u - v)
    auto offdiag = [&](std::size_t k, const GaussLegendre& gl) {
        return gl.integrate(
            [&](double u) {
                return gl.integrate(
                    [&](double v) { return correlation(bath, static_cast<double>(k) * dt + u - v); },
                    0.0, dt);
            },
            0.0, dt);
    };
    // Triangular domain for the same-window entry.
    auto diag = [&](const GaussLegendre& gl) {
        return gl.integrate(
            [&](double u) {
                return gl.integrate([&](double v) { return correlation(bath, u - v); }, 0.0, u);
            },
            0.0, dt);
    };

    std::vector<cd> lo(n_mem + 1), hi(n_mem + 1);
    lo[0] = diag(coarse);
    hi[0] = diag(fine);
    for (std::size_t k = 1; k <= n_mem; ++k) {
        lo[k] = offdiag(k, coarse);
        hi[k] = offdiag(k, fine);
    }

    double scale = 0.0;
    for (const cd& v : hi) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t k = 0; k <= n_mem; ++k) worst = std::max(worst, std::abs(hi[k] - lo[k]));
    if (worst > rel_tol * std::max(scale, 1e-300)) {
        std::ostringstream os;
        os << "eta_table: quadrature estimate " << worst << " above tolerance "
           << rel_tol * scale << " after refinement";
        throw numeric_error(os.str());
    }

    table.values = std::move(hi);
    table.quad_error = worst;
    return table;
}

BathSpec discretize_continuum(const BathSpec& bath, std::size_t n_modes, double omega_max) {
    bath.validate();
    if (bath.kind != BathSpec::Kind::continuum)
        throw argument_error("discretize_continuum: bath is already discrete");
    if (n_modes < 1) throw argument_error("discretize_continuum: n_modes must be >= 1");
    if (!(omega_max > 0.0)) throw argument_error("discretize_continuum: omega_max must be > 0");

    static const GaussLegendre gl(32);

    BathSpec out;
    out.kind = BathSpec::Kind::discrete;
    out.beta = bath.beta;
    out.zero_temperature = bath.zero_temperature;

    const double width = omega_max / static_cast<double>(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double a = width * static_cast<double>(k);
        const double b = a + width;
        const double g2 =
            gl.integrate([&](double w) { return bath.spectral_density(w); }, a, b);
        DiscreteMode m;
        m.omega = 0.5 * (a + b);
        m.g = cd(std::sqrt(std::max(g2, 0.0)), 0.0);
        out.modes.push_back(m);
    }
    return out;
}

} // namespace ptmps
