#include "bipcp/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bipcp/errors.hpp"
#include "bipcp/format.hpp"

namespace bipcp {

namespace {

constexpr double kTieTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_region(double g1, double g2, double a) {
    if (!(g1 > 0.0 && g1 < 1.0) || !(g2 > 0.0 && g2 < 1.0))
        throw GammaOutOfRange("gamma must lie in (0,1), got gamma1=" + fmt_double(g1) +
                              " gamma2=" + fmt_double(g2));
    if (!(g1 + g2 > 1.0))
        throw SubcriticalPair("gamma1 + gamma2 = " + fmt_double(g1 + g2) + " <= 1");
    if (!(a > 0.0)) throw NonpositiveA("a = " + fmt_double(a) + " must be > 0");
}

// thresholds for the minimizer case analysis; degenerate Delta_i handled by
// +inf / 0 so "a <= thr" keeps the limiting meaning
double thr_nu(double g1) {  // Delta1 / bar_gamma1: below it nu_B beats nu_S
    double d1 = std::max(2.0 * g1 - 1.0, 0.0);
    return d1 / (1.0 - g1);
}

double thr_mu(double g2) {  // bar_gamma2 / Delta2: below it mu_S beats mu_B
    double d2 = std::max(2.0 * g2 - 1.0, 0.0);
    return d2 > 0.0 ? (1.0 - g2) / d2 : kInf;
}

}  // namespace

double StrategyExponents::mu(Strat s) const {
    switch (s) {
        case Strat::S: return mu_S;
        case Strat::B: return mu_B;
        default: return mu_D;
    }
}

double StrategyExponents::nu(Strat s) const {
    switch (s) {
        case Strat::S: return nu_S;
        case Strat::B: return nu_B;
        default: return nu_D;
    }
}

const char* to_string(Strat s) {
    switch (s) {
        case Strat::S: return "S";
        case Strat::B: return "B";
        default: return "D";
    }
}

const char* to_string(Region r) {
    switch (r) {
        case Region::Ia: return "Ia";
        case Region::Ib: return "Ib";
        case Region::II: return "II";
        case Region::III: return "III";
        default: return "IV";
    }
}

const char* to_string(TargetRegion r) {
    switch (r) {
        case TargetRegion::I: return "I";
        case TargetRegion::II: return "II";
        case TargetRegion::III: return "III";
        default: return "IV";
    }
}

const char* to_string(DominantStrategy s) {
    switch (s) {
        case DominantStrategy::root_is_S: return "root-is-S";
        case DominantStrategy::one_step_to_S: return "one-step-to-S";
        case DominantStrategy::one_step_to_B: return "one-step-to-B";
        default: return "one-step-to-D";
    }
}

DerivedScales validate_and_derive(const ModelParams& p, std::optional<double> b_override) {
    if (!(p.gamma1 > 0.0 && p.gamma1 < 1.0) || !(p.gamma2 > 0.0 && p.gamma2 < 1.0))
        throw GammaOutOfRange("gamma must lie in (0,1)");
    if (!(p.gamma1 + p.gamma2 > 1.0) && !p.allow_subcritical)
        throw SubcriticalPair("gamma1 + gamma2 <= 1 (set allow_subcritical to override)");
    if (!(p.a > 0.0)) throw NonpositiveA("a must be > 0");
    if (!(p.lambda > 0.0 && p.lambda < 1.0)) throw LambdaOutOfRange("lambda must lie in (0,1)");

    DerivedScales d;
    d.bar_gamma1 = 1.0 - p.gamma1;
    d.bar_gamma2 = 1.0 - p.gamma2;
    d.Delta1 = std::max(2.0 * p.gamma1 - 1.0, 0.0);
    d.Delta2 = std::max(2.0 * p.gamma2 - 1.0, 0.0);
    d.Delta = p.gamma1 + p.gamma2 - 1.0;
    d.delta = std::min({p.gamma1, p.gamma2, d.Delta1 + d.Delta2});
    if (d.delta > 0.0) {
        d.b = b_override ? *b_override : 17.0 / d.delta + 1.0;
        if (!(d.b > 17.0 / d.delta))
            throw BadB("b = " + fmt_double(d.b) + " must exceed 17/delta = " +
                       fmt_double(17.0 / d.delta));
    } else {
        // delta vanishes only for subcritical pairs, where no b is admissible;
        // the log powers are unused there
        d.b = b_override.value_or(0.0);
    }
    d.lambda1 = p.lambda;
    d.lambda2 = std::pow(p.lambda, p.a);

    const double log1l = std::log(1.0 / p.lambda);
    auto clamped = [&](double exponent, double logpow, bool& flag) {
        double v = std::pow(p.lambda, exponent) * std::pow(log1l, logpow);
        flag = v > 1.0;
        return flag ? 1.0 : v;
    };

    if (p.gamma1 + p.gamma2 > 1.0) {
        auto tm = target_minimizers(p.gamma1, p.gamma2, p.a);
        d.u_blue = clamped(tm.mu_star, d.b, d.u_blue_clamped);
        d.v_blue = clamped(tm.nu_star, d.b, d.v_blue_clamped);
        auto se = strategy_exponents(p.gamma1, p.gamma2, p.a);
        d.u0 = clamped(se.mu_S, -2.0 / p.gamma1, d.u0_clamped);
        d.v0 = clamped(se.nu_S, -2.0 / p.gamma2, d.v0_clamped);
    } else {
        d.u_blue = d.v_blue = d.u0 = d.v0 = 1.0;
        d.u_blue_clamped = d.v_blue_clamped = d.u0_clamped = d.v0_clamped = true;
    }
    return d;
}

StrategyExponents strategy_exponents(double g1, double g2, double a) {
    check_region(g1, g2, a);
    const double bg1 = 1.0 - g1, bg2 = 1.0 - g2;
    const double Delta = g1 + g2 - 1.0;

    StrategyExponents e;
    e.mu_S = (1.0 + a) / g1;
    e.mu_B = (1.0 + bg2 * a) / (g1 * g2);
    e.mu_D = (g2 + bg2 * a) / Delta;
    e.nu_S = (1.0 + a) / g2;
    e.nu_B = (bg1 + a) / (g1 * g2);
    e.nu_D = (bg1 + g1 * a) / Delta;

    auto pick = [](double s, double b, double d, Strat& label, std::vector<Strat>& ties) {
        double m = std::min({s, b, d});
        if (s <= m + kTieTol) ties.push_back(Strat::S);
        if (b <= m + kTieTol) ties.push_back(Strat::B);
        if (d <= m + kTieTol) ties.push_back(Strat::D);
        label = ties.front();
        return m;
    };
    e.mu_star = pick(e.mu_S, e.mu_B, e.mu_D, e.mu_label, e.mu_ties);
    e.nu_star = pick(e.nu_S, e.nu_B, e.nu_D, e.nu_label, e.nu_ties);
    return e;
}

TargetMinimizers target_minimizers(double g1, double g2, double a) {
    check_region(g1, g2, a);
    auto e = strategy_exponents(g1, g2, a);

    TargetMinimizers t;
    Strat mu_lab, nu_lab;
    if (g2 <= 0.5) {
        t.region = TargetRegion::I;
        mu_lab = Strat::S;
        nu_lab = a <= thr_nu(g1) ? Strat::B : Strat::S;
    } else if (g1 <= 0.5) {
        t.region = TargetRegion::II;
        nu_lab = Strat::S;
        mu_lab = a <= thr_mu(g2) ? Strat::S : Strat::B;
    } else if (1.0 / g1 + 1.0 / g2 > 3.0) {
        t.region = TargetRegion::III;
        if (a <= thr_nu(g1)) {
            mu_lab = Strat::S;
            nu_lab = Strat::B;
        } else if (a <= thr_mu(g2)) {
            mu_lab = Strat::S;
            nu_lab = Strat::S;
        } else {
            mu_lab = Strat::B;
            nu_lab = Strat::S;
        }
    } else {
        t.region = TargetRegion::IV;
        const double a1 = (1.0 - g1) * (1.0 - g2) / (g2 + g1 * g2 - 1.0);
        const double a2 = (g1 + g1 * g2 - 1.0) / ((1.0 - g1) * (1.0 - g2));
        if (a <= a1) {
            mu_lab = Strat::S;
            nu_lab = Strat::B;
        } else if (a <= a2) {
            mu_lab = Strat::D;
            nu_lab = Strat::D;
        } else {
            mu_lab = Strat::B;
            nu_lab = Strat::S;
        }
    }
    t.mu_label = mu_lab;
    t.nu_label = nu_lab;
    t.mu_star = e.mu(mu_lab);
    t.nu_star = e.nu(nu_lab);
    return t;
}

double a_star(double g1, double g2, double a) {
    auto t = target_minimizers(g1, g2, a);
    const double bg1 = 1.0 - g1, bg2 = 1.0 - g2;
    const double d2 = std::max(2.0 * g2 - 1.0, 0.0);
    const double c1 = t.mu_star;
    const double c2 = 1.0 + bg2 * t.nu_star;
    const double c3 = 1.0 + a - d2 * t.nu_star + bg1 * t.mu_star;
    return std::min({c1, c2, c3});
}

PhaseClassification classify(double g1, double g2, double a) {
    check_region(g1, g2, a);
    auto e = strategy_exponents(g1, g2, a);
    auto tm = target_minimizers(g1, g2, a);
    const double bg2 = 1.0 - g2;

    PhaseClassification c;
    c.target_region = tm.region;
    c.tie = false;
    auto near = [&](double x, double y) { return std::abs(x - y) <= kTieTol; };

    if (g2 <= 0.5) {  // supercriticality forces gamma1 > 1/2 here
        double kink = g1 / (1.0 + g1);
        if (near(g2, kink) || near(g2, 0.5)) c.tie = true;
        if (g2 <= kink) {
            c.region = Region::Ia;
            c.a_star_value = e.mu_S;
            c.dominant_strategy = DominantStrategy::root_is_S;
        } else {
            c.region = Region::Ib;
            double thr = (g1 - g2) / (g2 - g1 + g1 * g2);
            c.thresholds["a_Ib"] = thr;
            if (near(a, thr)) c.tie = true;
            if (a <= thr) {
                c.a_star_value = e.mu_S;
                c.dominant_strategy = DominantStrategy::root_is_S;
            } else {
                c.a_star_value = 1.0 + bg2 * e.nu_S;
                c.dominant_strategy = DominantStrategy::one_step_to_S;
            }
        }
        c.thresholds["gamma2_kink"] = kink;
    } else if (g1 <= 0.5) {
        c.region = Region::II;
        if (near(g1, 0.5)) c.tie = true;
        c.a_star_value = 1.0 + bg2 * e.nu_S;
        c.dominant_strategy = DominantStrategy::one_step_to_S;
    } else {
        double inv_sum = 1.0 / g1 + 1.0 / g2;
        if (near(g1, 0.5) || near(g2, 0.5) || near(inv_sum, 3.0)) c.tie = true;
        if (inv_sum > 3.0) {
            c.region = Region::III;
            double thr = thr_nu(g1);  // Delta1 / bar_gamma1: nu_B vs nu_S crossover
            if (near(a, thr)) c.tie = true;
            if (a <= thr) {
                c.a_star_value = 1.0 + bg2 * e.nu_B;
                c.dominant_strategy = DominantStrategy::one_step_to_B;
            } else {
                c.a_star_value = 1.0 + bg2 * e.nu_S;
                c.dominant_strategy = DominantStrategy::one_step_to_S;
            }
        } else {
            c.region = Region::IV;
            const double a1 = (1.0 - g1) * bg2 / (g2 + g1 * g2 - 1.0);
            const double a2 = (g1 + g1 * g2 - 1.0) / ((1.0 - g1) * bg2);
            c.thresholds["a1_star"] = a1;
            c.thresholds["a2_star"] = a2;
            if (near(a, a1) || near(a, a2)) c.tie = true;
            if (a <= a1) {
                c.a_star_value = 1.0 + bg2 * e.nu_B;
                c.dominant_strategy = DominantStrategy::one_step_to_B;
            } else if (a <= a2) {
                c.a_star_value = 1.0 + bg2 * e.nu_D;
                c.dominant_strategy = DominantStrategy::one_step_to_D;
            } else {
                c.a_star_value = 1.0 + bg2 * e.nu_S;
                c.dominant_strategy = DominantStrategy::one_step_to_S;
            }
        }
    }
    c.thresholds["Delta1_over_bar_gamma1"] = thr_nu(g1);
    c.thresholds["bar_gamma2_over_Delta2"] = thr_mu(g2);
    return c;
}

TransmissionMaps transmission_maps(double g1, double g2, double a) {
    check_region(g1, g2, a);
    const double bg1 = 1.0 - g1, bg2 = 1.0 - g2;
    TransmissionMaps m;
    m.phi = {g1 / bg2, -1.0 / bg2};
    m.psi = {g2 / bg1, -a / bg1};
    m.phi_inv = m.phi.inverse();
    m.psi_inv = m.psi.inverse();
    return m;
}

ScaleReport verify_scale_inequalities(double g1, double g2, double a, double b) {
    check_region(g1, g2, a);
    const double bg1 = 1.0 - g1, bg2 = 1.0 - g2;
    const double d1 = std::max(2.0 * g1 - 1.0, 0.0);
    const double d2 = std::max(2.0 * g2 - 1.0, 0.0);
    const double delta = std::min({g1, g2, d1 + d2});
    if (!(b > 17.0 / delta)) throw BadB("b <= 17/delta");

    auto tm = target_minimizers(g1, g2, a);
    const AsymptoticScale u1{tm.mu_star, b};
    const AsymptoticScale u2{tm.nu_star, b};

    ScaleReport r;
    auto dominates = [&](const std::string& name, AsymptoticScale lhs, AsymptoticScale rhs) {
        // lhs >= rhs eventually
        bool pass = scale_le(rhs, lhs);
        double slack = rhs.p - lhs.p;
        if (slack == 0.0) slack = lhs.q - rhs.q;
        r.checks.push_back({name, pass, slack});
    };

    AsymptoticScale rhs_stars{1.0 + a, delta * b};
    dominates("stars", scale_min(u1.pow(g1), u2.pow(g2)), rhs_stars);
    dominates("one_and_two_a", u1.pow(d1) * u2.pow(g2), {1.0 + 2.0 * a, delta * b});
    dominates("two_and_a", u1.pow(g1) * u2.pow(d2), {2.0 + a, delta * b});
    dominates("directs", u1.pow(d1) * u2.pow(d2), rhs_stars);

    const double Phi = -g1 * tm.mu_star + bg2 * tm.nu_star + 1.0;
    const double Psi = bg1 * tm.mu_star - g2 * tm.nu_star + a;
    r.checks.push_back({"Phi_nonneg", Phi >= -1e-12, Phi});
    r.checks.push_back({"Psi_nonneg", Psi >= -1e-12, Psi});

    const double c1 = tm.mu_star;
    const double c2 = 1.0 + bg2 * tm.nu_star;
    const double c3 = 1.0 + a - d2 * tm.nu_star + bg1 * tm.mu_star;
    double gap = c3 - std::min(c1, c2);
    r.checks.push_back({"third_candidate_redundant", gap >= -1e-12, gap});

    r.all_pass = std::all_of(r.checks.begin(), r.checks.end(),
                             [](const ScaleCheck& c) { return c.pass; });
    return r;
}

std::vector<PhaseRow> phase_grid(GridRange rg1, GridRange rg2, GridRange ra) {
    if (rg1.n < 1 || rg2.n < 1 || ra.n < 1) throw EmptyGrid("grid resolution must be >= 1");
    auto at = [](const GridRange& r, int i) {
        return r.n == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.n - 1);
    };
    std::vector<PhaseRow> rows;
    rows.reserve(static_cast<std::size_t>(rg1.n) * rg2.n * ra.n);
    for (int i = 0; i < rg1.n; ++i)
        for (int j = 0; j < rg2.n; ++j)
            for (int k = 0; k < ra.n; ++k) {
                PhaseRow row;
                row.gamma1 = at(rg1, i);
                row.gamma2 = at(rg2, j);
                row.a = at(ra, k);
                if (row.gamma1 + row.gamma2 > 1.0) {
                    auto c = classify(row.gamma1, row.gamma2, row.a);
                    auto tm = target_minimizers(row.gamma1, row.gamma2, row.a);
                    row.region = to_string(c.region);
                    row.target_region = to_string(c.target_region);
                    row.a_star = c.a_star_value;
                    row.mu_label = to_string(tm.mu_label);
                    row.nu_label = to_string(tm.nu_label);
                    row.strategy = to_string(c.dominant_strategy);
                    row.tie = c.tie;
                } else {
                    row.region = "subcritical";
                    row.target_region = "";
                    row.a_star = std::numeric_limits<double>::quiet_NaN();
                    row.mu_label = row.nu_label = row.strategy = "";
                    row.tie = false;
                }
                rows.push_back(std::move(row));
            }
    return rows;
}

std::string phase_grid_csv(const std::vector<PhaseRow>& rows) {
    std::ostringstream out;
    out << "gamma1,gamma2,a,region,target_region,a_star,mu_label,nu_label,strategy,tie\n";
    for (const auto& r : rows) {
        out << fmt_double(r.gamma1) << ',' << fmt_double(r.gamma2) << ',' << fmt_double(r.a)
            << ',' << r.region << ',' << r.target_region << ','
            << (std::isnan(r.a_star) ? std::string() : fmt_double(r.a_star)) << ','
            << r.mu_label << ',' << r.nu_label << ',' << r.strategy << ','
            << (r.tie ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace bipcp
