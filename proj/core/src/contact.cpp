#include "bipcp/contact.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "bipcp/errors.hpp"
#include "bipcp/rng.hpp"

namespace bipcp {
namespace contact {

namespace {

// prefix-sum tree over per-vertex transmission weights
class Fenwick {
   public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0), total_(0.0) {}

    void add(std::size_t i, double delta) {
        total_ += delta;
        for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
    }

    double total() const { return total_; }

    // largest index with prefix sum <= target
    std::size_t sample(double target) const {
        std::size_t idx = 0;
        std::size_t mask = 1;
        while (mask * 2 < tree_.size()) mask *= 2;
        for (; mask > 0; mask /= 2) {
            std::size_t next = idx + mask;
            if (next < tree_.size() && tree_[next] < target) {
                idx = next;
                target -= tree_[next];
            }
        }
        return idx;  // 0-based vertex index
    }

   private:
    std::vector<double> tree_;
    double total_;
};

double exp_sample(Stream& s, double rate) { return -std::log(s.uniform01()) / rate; }

}  // namespace

SimOutcome run(const Hypergraph& graph, Rates rates,
               const std::vector<std::int64_t>& initial_infected, const SimConfig& config) {
    if (initial_infected.empty()) throw EmptyInitialSet("no initially infected vertices");
    const std::size_t n = graph.size();
    for (auto id : initial_infected) graph.vertex(id);  // validates

    Stream s(config.seed);
    std::vector<char> infected(n, 0);
    std::vector<std::int64_t> inf_list;
    std::vector<std::int64_t> pos_in_list(n, -1);
    Fenwick weights(n);
    std::vector<std::vector<std::int64_t>> nbr_cache(n);
    std::vector<char> nbr_cached(n, 0);

    SimOutcome out{};
    out.peak_infected = 0;
    out.total_transmissions = 0;
    out.events_processed = 0;
    out.event_cap_hit = false;
    out.snapshot_infected = 0;

    auto neighbors_of = [&](std::int64_t v) -> const std::vector<std::int64_t>& {
        if (!nbr_cached[v]) {
            nbr_cache[v] = graph.neighbors(v);
            nbr_cached[v] = 1;
        }
        return nbr_cache[v];
    };

    auto infect = [&](std::int64_t v, double t) {
        infected[v] = 1;
        pos_in_list[v] = static_cast<std::int64_t>(inf_list.size());
        inf_list.push_back(v);
        const Vertex& vx = graph.vertex(v);
        double rate = vx.vtype == 1 ? rates.lambda1 : rates.lambda2;
        weights.add(static_cast<std::size_t>(v),
                    rate * static_cast<double>(neighbors_of(v).size()));
        out.peak_infected = std::max<std::int64_t>(out.peak_infected,
                                                   static_cast<std::int64_t>(inf_list.size()));
        double thr = vx.vtype == 1 ? config.target_u : config.target_v;
        if (!out.target_hit && vx.mark <= thr) out.target_hit = v;
        if (config.record_trace) {
            out.trace.push_back(v);
            out.trace_times.push_back(t);
        }
    };

    auto recover = [&](std::int64_t v) {
        infected[v] = 0;
        std::int64_t p = pos_in_list[v];
        std::int64_t last = inf_list.back();
        inf_list[p] = last;
        pos_in_list[last] = p;
        inf_list.pop_back();
        pos_in_list[v] = -1;
        const Vertex& vx = graph.vertex(v);
        double rate = vx.vtype == 1 ? rates.lambda1 : rates.lambda2;
        weights.add(static_cast<std::size_t>(v),
                    -rate * static_cast<double>(nbr_cache[v].size()));
    };

    for (auto id : initial_infected)
        if (!infected[id]) infect(id, 0.0);

    double t = 0.0;
    bool snapshot_done = !config.snapshot_time.has_value();
    while (!inf_list.empty()) {
        const double R = static_cast<double>(inf_list.size());
        const double T = std::max(weights.total(), 0.0);
        const double dt = exp_sample(s, R + T);
        if (!snapshot_done && t + dt > *config.snapshot_time) {
            out.snapshot_infected = static_cast<std::int64_t>(inf_list.size());
            snapshot_done = true;
        }
        if (t + dt > config.t_max) {
            t = config.t_max;
            break;
        }
        t += dt;
        if (out.events_processed >= config.max_events) {
            out.event_cap_hit = true;
            break;
        }
        ++out.events_processed;
        if (s.uniform01() * (R + T) <= R) {
            std::size_t k = static_cast<std::size_t>(s.uniform01() * R);
            if (k >= inf_list.size()) k = inf_list.size() - 1;
            recover(inf_list[k]);
        } else {
            std::int64_t v =
                static_cast<std::int64_t>(weights.sample(s.uniform01() * weights.total()));
            const auto& nbrs = nbr_cache[v];
            if (!nbrs.empty()) {
                std::size_t k = static_cast<std::size_t>(s.uniform01() * nbrs.size());
                if (k >= nbrs.size()) k = nbrs.size() - 1;
                std::int64_t w = nbrs[k];
                if (!infected[w]) {
                    infect(w, t);
                    ++out.total_transmissions;
                }
            }
        }
    }
    if (!snapshot_done && t >= *config.snapshot_time)
        out.snapshot_infected = static_cast<std::int64_t>(inf_list.size());

    const bool alive = !inf_list.empty();
    out.extinction_time = alive ? config.t_max : t;
    switch (config.proxy) {
        case SurvivalProxy::alive_at_horizon: out.survived = alive; break;
        case SurvivalProxy::target_hit: out.survived = out.target_hit.has_value(); break;
        case SurvivalProxy::either: out.survived = alive || out.target_hit.has_value(); break;
    }
    return out;
}

ThetaTrial theta_trial(const ModelParams& params, Window window, RootSpec root_spec,
                       const SimConfig& config, std::uint64_t master_seed, std::int64_t index) {
    std::uint64_t trial_key = rng::derive(master_seed, 1, static_cast<std::uint64_t>(index));
    auto graph = Hypergraph::sample(params, window, rng::derive(trial_key, 1), root_spec);
    if (!graph.root_id()) throw BadRootSpec("sample did not produce a root");
    Rates rates{params.lambda, std::pow(params.lambda, params.a)};
    SimConfig c = config;
    c.seed = rng::derive(trial_key, 2);
    c.record_trace = true;  // needed for the boundary diagnostic
    auto out = run(graph, rates, {*graph.root_id()}, c);

    ThetaTrial t{};
    t.survived = out.survived;
    t.alive_at_horizon = out.extinction_time >= config.t_max || out.event_cap_hit;
    t.target_was_hit = out.target_hit.has_value();
    t.event_cap_hit = out.event_cap_hit;
    t.extinction_time = out.extinction_time;
    t.peak_infected = out.peak_infected;
    double maxpos = 0.0;
    for (auto id : out.trace)
        maxpos = std::max(maxpos, std::abs(graph.vertex(id).position));
    t.boundary_reach = maxpos >= 0.9 * window.half_length;
    return t;
}

ThetaEstimate estimate_theta(const ModelParams& params, Window window, RootSpec root_spec,
                             std::int64_t n_trials, const SimConfig& config,
                             std::uint64_t master_seed) {
    if (n_trials < 1) throw InsufficientData("need at least one trial");
    ThetaEstimate est{};
    est.trials = n_trials;
    if (root_spec.kind == RootSpec::none) {
        est.theta_hat = 0.0;
        est.ci = stats::wilson(0, n_trials);
        return est;
    }
    for (std::int64_t i = 0; i < n_trials; ++i) {
        auto t = theta_trial(params, window, root_spec, config, master_seed, i);
        if (t.survived) ++est.survived;
        if (t.event_cap_hit) ++est.event_cap_count;
        if (t.boundary_reach) ++est.boundary_reach_count;
    }
    est.theta_hat = static_cast<double>(est.survived) / static_cast<double>(n_trials);
    est.ci = stats::wilson(est.survived, n_trials);
    return est;
}

SimOutcome run_star(std::int64_t n, Rates rates, StarInitial initial, const SimConfig& config) {
    if (n < 1) throw BadLeafCount("star needs n >= 1 leaves");
    if (initial.infected_leaves < 0 || initial.infected_leaves > n)
        throw BadLeafCount("initial leaf count outside [0,n]");
    if (!initial.centre_infected && initial.infected_leaves == 0)
        throw EmptyInitialSet("star start has no infected vertices");

    Stream s(config.seed);
    bool c = initial.centre_infected;
    std::int64_t k = initial.infected_leaves;

    SimOutcome out{};
    out.peak_infected = (c ? 1 : 0) + k;
    double t = 0.0;
    bool snapshot_done = !config.snapshot_time.has_value();
    while (c || k > 0) {
        const double rec = (c ? 1.0 : 0.0) + static_cast<double>(k);
        const double inf_leaf = c ? rates.lambda1 * static_cast<double>(n - k) : 0.0;
        const double inf_centre = !c ? rates.lambda2 * static_cast<double>(k) : 0.0;
        const double total = rec + inf_leaf + inf_centre;
        const double dt = exp_sample(s, total);
        if (!snapshot_done && t + dt > *config.snapshot_time) {
            out.snapshot_infected = (c ? 1 : 0) + k;
            snapshot_done = true;
        }
        if (t + dt > config.t_max) {
            t = config.t_max;
            break;
        }
        t += dt;
        if (out.events_processed >= config.max_events) {
            out.event_cap_hit = true;
            break;
        }
        ++out.events_processed;
        double u = s.uniform01() * total;
        if (u <= rec) {
            if (c && u <= 1.0)
                c = false;
            else
                --k;
        } else if (u <= rec + inf_leaf) {
            ++k;
            ++out.total_transmissions;
        } else {
            c = true;
            ++out.total_transmissions;
        }
        out.peak_infected = std::max(out.peak_infected, (c ? 1 : 0) + k);
    }
    if (!snapshot_done && t >= *config.snapshot_time) out.snapshot_infected = (c ? 1 : 0) + k;

    const bool alive = c || k > 0;
    out.extinction_time = alive ? config.t_max : t;
    out.survived = alive;
    return out;
}

TraceProbability trace_probability(const Hypergraph& graph,
                                   const std::vector<std::int64_t>& target_trace,
                                   std::int64_t n_trials, const SimConfig& config) {
    if (target_trace.empty()) throw InvalidTrace("trace must contain the starting vertex");
    for (auto id : target_trace) graph.vertex(id);
    for (std::size_t j = 0; j + 1 < target_trace.size(); ++j) {
        if (target_trace[j] == target_trace[j + 1])
            throw InvalidTrace("consecutive trace entries repeat");
        if (graph.vertex(target_trace[j]).vtype == graph.vertex(target_trace[j + 1]).vtype)
            throw InvalidTrace("consecutive trace entries share a type");
        if (!graph.edge(target_trace[j], target_trace[j + 1]))
            throw InvalidTrace("consecutive trace entries not adjacent");
    }
    if (n_trials < 1) throw InsufficientData("need at least one trial");

    const std::size_t len = target_trace.size() - 1;  // number of steps
    const int start_type = graph.vertex(target_trace[0]).vtype;
    const Rates rates{graph.params().lambda, std::pow(graph.params().lambda, graph.params().a)};
    const double l_first = start_type == 1 ? rates.lambda1 : rates.lambda2;
    const double l_second = start_type == 1 ? rates.lambda2 : rates.lambda1;

    TraceProbability res{};
    res.bound = std::pow(2.0 * l_first, std::ceil(len / 2.0)) *
                std::pow(2.0 * l_second, std::floor(len / 2.0));
    res.bound_applicable = rates.lambda1 < 0.25 && rates.lambda2 < 0.25;

    if (len == 0) {
        res.p_hat = 1.0;
        res.ci = {1.0, 1.0};
        return res;
    }

    // distinct vertices and distinct directed edges along the trace
    std::vector<std::int64_t> verts;
    for (auto id : target_trace)
        if (std::find(verts.begin(), verts.end(), id) == verts.end()) verts.push_back(id);
    struct Edge {
        std::int64_t from, to;
        double rate;
    };
    std::vector<Edge> edges;
    for (std::size_t j = 0; j + 1 < target_trace.size(); ++j) {
        std::int64_t a = target_trace[j], b = target_trace[j + 1];
        bool seen = false;
        for (const auto& e : edges)
            if (e.from == a && e.to == b) seen = true;
        if (!seen) {
            double rate = graph.vertex(a).vtype == 1 ? rates.lambda1 : rates.lambda2;
            edges.push_back({a, b, rate});
        }
    }

    std::int64_t hits = 0;
    for (std::int64_t trial = 0; trial < n_trials; ++trial) {
        Stream s(rng::derive(config.seed, 7, static_cast<std::uint64_t>(trial)));
        std::vector<double> rec_next(verts.size());
        for (auto& r : rec_next) r = exp_sample(s, 1.0);
        std::vector<double> edge_next(edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e)
            edge_next[e] = exp_sample(s, edges[e].rate);

        std::vector<char> alive(len + 1, 0);
        alive[0] = 1;
        bool success = false;
        double t = 0.0;
        while (t <= config.t_max) {
            // next event over all clocks
            double tmin = config.t_max + 1.0;
            bool is_edge = false;
            std::size_t idx = 0;
            for (std::size_t i = 0; i < verts.size(); ++i)
                if (rec_next[i] < tmin) {
                    tmin = rec_next[i];
                    is_edge = false;
                    idx = i;
                }
            for (std::size_t e = 0; e < edges.size(); ++e)
                if (edge_next[e] < tmin) {
                    tmin = edge_next[e];
                    is_edge = true;
                    idx = e;
                }
            if (tmin > config.t_max) break;
            t = tmin;
            if (is_edge) {
                const auto& e = edges[idx];
                std::vector<char> before = alive;
                for (std::size_t j = 0; j + 1 <= len; ++j)
                    if (target_trace[j] == e.from && target_trace[j + 1] == e.to && before[j])
                        alive[j + 1] = 1;
                edge_next[idx] = t + exp_sample(s, e.rate);
            } else {
                for (std::size_t j = 0; j <= len; ++j)
                    if (target_trace[j] == verts[idx]) alive[j] = 0;
                rec_next[idx] = t + exp_sample(s, 1.0);
            }
            if (alive[len]) {
                success = true;
                break;
            }
            if (std::none_of(alive.begin(), alive.end(), [](char x) { return x; })) break;
        }
        if (success) ++hits;
    }
    res.p_hat = static_cast<double>(hits) / static_cast<double>(n_trials);
    res.ci = stats::wilson(hits, n_trials);
    return res;
}

}  // namespace contact
}  // namespace bipcp
