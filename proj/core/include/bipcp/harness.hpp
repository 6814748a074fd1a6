#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bipcp/contact.hpp"
#include "bipcp/phase.hpp"
#include "bipcp/stats.hpp"

namespace bipcp {
namespace harness {

struct ExperimentConfig {
    ModelParams params;           // lambda field unused; see lambdas
    std::vector<double> lambdas;  // strictly monotone, each in (0,1)
    Window window{1000.0};
    std::int64_t trials = 100;
    contact::SimConfig sim;
    RootSpec root{RootSpec::uniform_mark, 0.0, 1};
    std::uint64_t master_seed = 1;
    int workers = 1;
};

struct AggregateRow {
    double lambda;
    double theta_hat;  // per configured proxy
    stats::Interval ci;
    std::int64_t trials, survived;
    double theta_alive, theta_target;  // both proxies reported alongside
    std::int64_t event_cap_count, boundary_reach_count;
};

std::vector<AggregateRow> sweep_theta(const ExperimentConfig& config);

std::string aggregate_jsonl(const std::vector<AggregateRow>& rows,
                            const contact::SimConfig& sim);

struct SlopeFit {
    double slope, intercept, stderr_;
    double lambda_lo, lambda_hi;
    std::size_t points;
    std::int64_t zero_rows_excluded;
    double target_a_star;
    bool within_band;
};

SlopeFit fit_slope(const std::vector<AggregateRow>& table, double lambda_lo, double lambda_hi,
                   double target_a_star, double band_tolerance);

enum class DiagramFormat { csv, svg };

std::string emit_phase_diagram(GridRange g1, GridRange g2, GridRange a, DiagramFormat format);

struct VerifyCounts {
    std::int64_t exponent_samples = 10000;
    std::int64_t identity_samples = 2000;
    std::int64_t scale_samples = 2000;
    std::size_t enumeration_max_ell = 8;
    std::int64_t random_trees = 100;
    std::int64_t engine_trials = 4000;
    std::int64_t mecke_graphs = 120;
    std::int64_t martingale_trials = 20000;
};

struct VerifyReport {
    std::string json;
    bool all_pass;
};

VerifyReport verify_all(std::uint64_t master_seed, const VerifyCounts& counts = {});

}  // namespace harness
}  // namespace bipcp
