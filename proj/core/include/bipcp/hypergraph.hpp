#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bipcp/phase.hpp"

namespace bipcp {

struct Vertex {
    std::int64_t id;
    int vtype;  // 1 or 2
    double position;
    double mark;  // in (0,1]
};

struct Window {
    double half_length;  // points live on [-L, L]
};

struct RootSpec {
    enum Kind { none, uniform_mark, fixed_mark } kind = none;
    double h = 0.0;  // mark when fixed
    int vtype = 1;
};

enum class RestrictedVariant { G1plus, G2plus };

enum class Colour { blue, red };

bool edge_exists(double gamma1, double gamma2, const Vertex& a, const Vertex& b);

// Immutable sampled bipartite geometric graph. Ids are 0..n-1 and index the
// internal vertex array directly.
class Hypergraph {
   public:
    static Hypergraph sample(const ModelParams& params, Window window, std::uint64_t seed,
                             RootSpec root = {});
    // root planted at (0,h); left half-line emptied; the root type's mark band
    // [u0,2u0] (resp. [v0,2v0]) emptied of same-type vertices except the root
    static Hypergraph sample_restricted(const ModelParams& params, Window window,
                                        std::uint64_t seed, RestrictedVariant variant, double h);
    static Hypergraph from_vertices(const ModelParams& params, Window window,
                                    std::vector<Vertex> verts,
                                    std::optional<std::int64_t> root_id = std::nullopt);

    const ModelParams& params() const { return params_; }
    Window window() const { return window_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return verts_.size(); }
    const Vertex& vertex(std::int64_t id) const;
    const std::vector<Vertex>& vertices() const { return verts_; }
    std::optional<std::int64_t> root_id() const { return root_id_; }

    bool edge(std::int64_t id1, std::int64_t id2) const;
    std::vector<std::int64_t> neighbors(std::int64_t id) const;
    std::size_t degree(std::int64_t id) const { return neighbors(id).size(); }

    // component sizes, largest first
    std::vector<std::size_t> component_sizes() const;

    std::vector<Colour> colour(const DerivedScales& scales) const;
    std::vector<Colour> colour(double u_threshold, double v_threshold) const;

    void dump(std::ostream& out) const;
    static Hypergraph load(std::istream& in);

   private:
    Hypergraph() = default;
    void build_index();

    ModelParams params_;
    Window window_{1.0};
    std::uint64_t seed_ = 0;
    std::vector<Vertex> verts_;
    std::optional<std::int64_t> root_id_;

    // per type, per dyadic mark layer (2^{-j-1}, 2^{-j}]: vertex ids sorted by
    // position, so each layer is answerable by binary search on a closed-form
    // worst-case reach
    struct Layer {
        double min_mark;  // 2^{-j-1}, lower bound (exclusive) of marks stored
        std::vector<std::int64_t> ids;       // sorted by position
        std::vector<double> positions;       // parallel to ids
    };
    std::vector<Layer> layers_[2];  // [0]: type 1, [1]: type 2
};

struct TailStats {
    double slope, slope_stderr;
    std::vector<std::pair<double, double>> tail;  // (m, empirical P(deg > m))
};

// pooled degree-tail regression for one vertex type over several graphs
TailStats degree_tail_stats(const std::vector<const Hypergraph*>& graphs, int vtype,
                            double m_lo = 0.0, double m_hi = 0.0);

}  // namespace bipcp
