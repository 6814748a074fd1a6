#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bipcp/scale.hpp"

namespace bipcp {

struct ModelParams {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double a = 1.0;       // lambda2 = lambda^a
    double lambda = 0.1;  // lambda1
    bool allow_subcritical = false;
};

struct DerivedScales {
    double bar_gamma1, bar_gamma2;
    double Delta1, Delta2;  // (2*gamma_i - 1) v 0
    double Delta;           // gamma1 + gamma2 - 1
    double delta;           // gamma1 ^ gamma2 ^ (Delta1 + Delta2)
    double b;               // > 17/delta
    double lambda1, lambda2;
    double u_blue, v_blue;  // lambda^{mu*} log^b, lambda^{nu*} log^b, clamped to <= 1
    bool u_blue_clamped, v_blue_clamped;
    double u0, v0;  // lambda^{mu_S} log^{-2/gamma1}, lambda^{nu_S} log^{-2/gamma2}
    bool u0_clamped, v0_clamped;
};

enum class Strat { S, B, D };

struct StrategyExponents {
    double mu_S, mu_B, mu_D;
    double nu_S, nu_B, nu_D;
    double mu_star, nu_star;
    Strat mu_label, nu_label;  // tie-broken S > B > D
    std::vector<Strat> mu_ties, nu_ties;

    double mu(Strat s) const;
    double nu(Strat s) const;
};

enum class TargetRegion { I, II, III, IV };

struct TargetMinimizers {
    double mu_star, nu_star;
    Strat mu_label, nu_label;
    TargetRegion region;
};

enum class Region { Ia, Ib, II, III, IV };

enum class DominantStrategy { root_is_S, one_step_to_S, one_step_to_B, one_step_to_D };

struct PhaseClassification {
    Region region;
    TargetRegion target_region;
    double a_star_value;
    DominantStrategy dominant_strategy;
    std::map<std::string, double> thresholds;
    bool tie;  // point lies on a case boundary (1e-9)
};

// affine map t -> slope*t + intercept
struct AffineMap {
    double slope, intercept;
    double operator()(double t) const { return slope * t + intercept; }
    AffineMap inverse() const { return {1.0 / slope, -intercept / slope}; }
};

struct TransmissionMaps {
    AffineMap phi, psi, phi_inv, psi_inv;
};

struct ScaleCheck {
    std::string name;
    bool pass;
    double slack;  // p-gap, or q-gap when p ties; numeric margin for the float checks
};

struct ScaleReport {
    std::vector<ScaleCheck> checks;
    bool all_pass;
};

struct PhaseRow {
    double gamma1, gamma2, a;
    std::string region;  // "subcritical" outside the supercritical cone
    std::string target_region;
    double a_star;  // NaN when subcritical
    std::string mu_label, nu_label, strategy;
    bool tie;
};

const char* to_string(Strat s);
const char* to_string(Region r);
const char* to_string(TargetRegion r);
const char* to_string(DominantStrategy s);

DerivedScales validate_and_derive(const ModelParams& params,
                                  std::optional<double> b_override = std::nullopt);

StrategyExponents strategy_exponents(double gamma1, double gamma2, double a);
TargetMinimizers target_minimizers(double gamma1, double gamma2, double a);
double a_star(double gamma1, double gamma2, double a);
PhaseClassification classify(double gamma1, double gamma2, double a);
TransmissionMaps transmission_maps(double gamma1, double gamma2, double a);
ScaleReport verify_scale_inequalities(double gamma1, double gamma2, double a, double b);

struct GridRange {
    double lo, hi;
    int n;  // points, endpoints included (n == 1 -> lo)
};

std::vector<PhaseRow> phase_grid(GridRange g1, GridRange g2, GridRange a);
std::string phase_grid_csv(const std::vector<PhaseRow>& rows);

}  // namespace bipcp
