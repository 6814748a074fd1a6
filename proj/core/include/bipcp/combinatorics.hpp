#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bipcp/phase.hpp"
#include "bipcp/scale.hpp"

namespace bipcp {

class Hypergraph;

namespace combi {

// starts 0,1; new values only as previous-max+1; no consecutive repeats
struct CombinatorialPath {
    std::vector<int> entries;
};

void validate(const CombinatorialPath& path);  // throws InvalidPath

constexpr std::size_t kDefaultLengthCap = 14;

std::vector<CombinatorialPath> enumerate_paths(std::size_t ell,
                                               std::optional<int> k = std::nullopt,
                                               std::size_t cap = kDefaultLengthCap);

// binom(ell+1, k) * k^{ell+1-k}
std::uint64_t count_bound(std::size_t ell, int k);

CombinatorialPath to_combinatorial(const std::vector<std::int64_t>& graph_path);

// Tree over integer ids (fresh ids appear under Op3); root-distance parity kept
// per vertex: 0 on the root's side of the bipartition, 1 on the other.
struct DiscoveryTree {
    std::map<int, std::vector<int>> adj;
    std::map<int, int> parity;
    int root = 0;
    std::optional<int> m_star;
    int next_fresh = 0;

    std::size_t size() const { return adj.size(); }
    int degree(int v) const;
    bool is_leaf(int v) const { return degree(v) == 1; }
    bool has_vertex(int v) const { return adj.count(v) != 0; }
    std::vector<int> ids() const;
    // parent/children in the rooting at `root`
    int parent(int v) const;  // -1 for root
    std::vector<int> children(int v) const;
    std::string parent_array() const;  // canonical dump line
};

DiscoveryTree discovery_tree(const CombinatorialPath& path);

// random recursive tree on k vertices with a random non-root leaf distinguished
DiscoveryTree random_tree(std::uint64_t seed, int k);

// numeric + scale context for the mark integrals and tree weights
struct WeightContext {
    double lambda, a;
    double gamma1, gamma2;
    double u1, u2;              // numeric mark thresholds in (0,1)
    double mu_star, nu_star, b; // scale-mode representation of u1, u2
};

WeightContext make_weight_context(const ModelParams& params, const DerivedScales& scales);

// integral of u^{-gamma n} over (thr, 1]; log branch near gamma*n == 1
double mark_integral(int n, double gamma, double thr);
double script_u(int n, const WeightContext& ctx);  // type-1 marks
double script_v(int n, const WeightContext& ctx);  // type-2 marks

// envelope u1^{(1 - gamma n) ^ 0}; one unit of log slack only on the
// degenerate branch gamma*n == 1
AsymptoticScale mark_integral_scale(int n, double gamma, AsymptoticScale u_scale);
AsymptoticScale script_u_scale(int n, const WeightContext& ctx);
AsymptoticScale script_v_scale(int n, const WeightContext& ctx);

struct WeightValue {
    double log_value;      // log F
    AsymptoticScale scale; // envelope form
};

WeightValue tree_weight_F(const DiscoveryTree& tree, const WeightContext& ctx);

enum class ReductionOp { Op1, Op2, Op3 };

// Op1(x,y): trim leaf y, a child but not the only child of x
// Op2(x,y,z): trim leaf z whose parent y is itself a non-only child of x
// Op3(x,y,z): collapse the segment x-y-z (deg(y)=2, x,z non-leaves) into a
//             fresh vertex with the parity of x
DiscoveryTree apply_reduction(const DiscoveryTree& tree, ReductionOp op,
                              const std::vector<int>& site);

struct OpLogEntry {
    ReductionOp op;
    std::vector<int> site;
};

struct ReductionResult {
    DiscoveryTree segment;
    std::vector<OpLogEntry> ops;
};

ReductionResult reduce_to_segment(const DiscoveryTree& tree);

struct MFactor {
    double numeric;
    AsymptoticScale scale;  // combinatorial constants folded out
};

// binom(ell+1,k) k^{ell+1-k} (2 lambda^{a^1})^{(ell-2k)v0} log^{-16 floor((k-3)/2)}
MFactor m_factor(double lambda, double a, int k, std::size_t ell);

struct SumBound {
    double sum;
    double bound;  // (4k)^{3k}
    bool pass;
};

SumBound sum_bound_check(int k, double lambda, double a);

enum class Colouring { all_blue, blue_then_red_last };

// exact expected number of root-started realizations on the infinite line,
// including the 2^{k-1} two-sided interval factor
double mecke_expected_count(const CombinatorialPath& path, Colouring colouring,
                            const WeightContext& ctx);

std::int64_t count_realized_paths(const Hypergraph& graph, const CombinatorialPath& path,
                                  Colouring colouring, double u_threshold, double v_threshold,
                                  std::size_t cap = kDefaultLengthCap);

enum class BoundVariant { P, Q };

AsymptoticScale path_class_bound(int k, std::size_t ell, BoundVariant variant,
                                 const WeightContext& ctx);

std::string path_dump(const CombinatorialPath& path);  // comma-separated

}  // namespace combi
}  // namespace bipcp
