#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bipcp/hypergraph.hpp"
#include "bipcp/stats.hpp"

namespace bipcp {
namespace contact {

struct Rates {
    double lambda1, lambda2;  // recovery rate is fixed at 1
    // the trace-probability bound needs both rates < 1/4
    bool large_rate_warning() const { return lambda1 >= 0.25 || lambda2 >= 0.25; }
};

enum class SurvivalProxy { alive_at_horizon, target_hit, either };

struct SimConfig {
    double t_max = 1e3;
    std::int64_t max_events = 100'000'000;
    SurvivalProxy proxy = SurvivalProxy::alive_at_horizon;
    double target_u = 1.0, target_v = 1.0;  // mark thresholds for target-hit
    bool record_trace = false;
    std::uint64_t seed = 0;
    std::optional<double> snapshot_time;  // record |infected| at this time
};

struct SimOutcome {
    bool survived;
    double extinction_time;  // == t_max when alive at the horizon
    std::int64_t peak_infected;
    std::int64_t total_transmissions;  // successful infections
    std::optional<std::int64_t> target_hit;
    std::int64_t events_processed;
    bool event_cap_hit;
    std::int64_t snapshot_infected;  // |infected| at snapshot_time, if requested
    std::vector<std::int64_t> trace;
    std::vector<double> trace_times;
};

SimOutcome run(const Hypergraph& graph, Rates rates,
               const std::vector<std::int64_t>& initial_infected, const SimConfig& config);

struct ThetaEstimate {
    double theta_hat;
    stats::Interval ci;
    std::int64_t trials, survived;
    std::int64_t boundary_reach_count;  // trials where infection neared the window edge
    std::int64_t event_cap_count;
};

// one annealed trial (fresh graph + fresh evolution); stream depends only on
// (master_seed, index), so any execution order gives identical results
struct ThetaTrial {
    bool survived;       // per config proxy
    bool alive_at_horizon;
    bool target_was_hit;
    bool event_cap_hit;
    bool boundary_reach;  // infection came within 10% of the window edge
    double extinction_time;
    std::int64_t peak_infected;
};

ThetaTrial theta_trial(const ModelParams& params, Window window, RootSpec root_spec,
                       const SimConfig& config, std::uint64_t master_seed, std::int64_t index);

ThetaEstimate estimate_theta(const ModelParams& params, Window window, RootSpec root_spec,
                             std::int64_t n_trials, const SimConfig& config,
                             std::uint64_t master_seed);

struct StarInitial {
    bool centre_infected = true;
    std::int64_t infected_leaves = 0;
};

// star: type-1 centre, n type-2 leaves; O(1) state (centre flag, leaf count)
SimOutcome run_star(std::int64_t n, Rates rates, StarInitial initial, const SimConfig& config);

struct TraceProbability {
    double p_hat;
    stats::Interval ci;
    double bound;  // (2*l1)^{ceil(len/2)} (2*l2)^{floor(len/2)}, parity by start type
    bool bound_applicable;  // both rates < 1/4
};

TraceProbability trace_probability(const Hypergraph& graph,
                                   const std::vector<std::int64_t>& target_trace,
                                   std::int64_t n_trials, const SimConfig& config);

}  // namespace contact
}  // namespace bipcp
