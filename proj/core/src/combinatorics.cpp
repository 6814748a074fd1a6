#include "bipcp/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "bipcp/errors.hpp"
#include "bipcp/hypergraph.hpp"
#include "bipcp/rng.hpp"

namespace bipcp {
namespace combi {

namespace {

constexpr double kDegenerateTol = 1e-9;

int path_k(const CombinatorialPath& p) {
    return p.entries.empty() ? 0 : *std::max_element(p.entries.begin(), p.entries.end()) + 1;
}

}  // namespace

void validate(const CombinatorialPath& path) {
    const auto& e = path.entries;
    if (e.empty()) throw InvalidPath("path must contain at least the value 0");
    if (e[0] != 0) throw InvalidPath("path must start with 0");
    if (e.size() >= 2 && e[1] != 1) throw InvalidPath("second entry must be 1");
    int max_seen = 0;
    for (std::size_t i = 1; i < e.size(); ++i) {
        if (e[i] == e[i - 1]) throw InvalidPath("consecutive entries repeat");
        if (e[i] < 0) throw InvalidPath("negative entry");
        if (e[i] > max_seen + 1) throw InvalidPath("new value must be previous max + 1");
        max_seen = std::max(max_seen, e[i]);
    }
}

std::vector<CombinatorialPath> enumerate_paths(std::size_t ell, std::optional<int> k,
                                               std::size_t cap) {
    if (ell > cap) throw LengthTooLarge("path length " + std::to_string(ell) +
                                        " exceeds cap " + std::to_string(cap));
    std::vector<CombinatorialPath> out;
    std::vector<int> cur{0};
    std::function<void(int)> rec = [&](int max_seen) {
        if (cur.size() == ell + 1) {
            if (!k || max_seen + 1 == *k) out.push_back({cur});
            return;
        }
        // next entry: any previous value except the current one, or max+1
        int limit = cur.size() == 1 ? 1 : max_seen + 1;  // forced 1 after 0
        int lo = cur.size() == 1 ? 1 : 0;
        for (int v = lo; v <= limit; ++v) {
            if (v == cur.back()) continue;
            cur.push_back(v);
            rec(std::max(max_seen, v));
            cur.pop_back();
        }
    };
    rec(0);
    return out;  // recursion explores values in increasing order -> lexicographic
}

std::uint64_t count_bound(std::size_t ell, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > ell + 1)
        throw BadRange("need 1 <= k <= ell+1");
    std::uint64_t binom = 1;
    for (int i = 1; i <= k; ++i)
        binom = binom * (ell + 2 - static_cast<std::uint64_t>(i)) / static_cast<std::uint64_t>(i);
    std::uint64_t pw = 1;
    for (std::size_t i = 0; i < ell + 1 - static_cast<std::size_t>(k); ++i)
        pw *= static_cast<std::uint64_t>(k);
    return binom * pw;
}

CombinatorialPath to_combinatorial(const std::vector<std::int64_t>& graph_path) {
    if (graph_path.empty()) throw InvalidPath("empty vertex path");
    std::map<std::int64_t, int> label;
    CombinatorialPath out;
    for (std::size_t i = 0; i < graph_path.size(); ++i) {
        if (i > 0 && graph_path[i] == graph_path[i - 1])
            throw InvalidPath("consecutive vertices repeat");
        auto [it, inserted] = label.try_emplace(graph_path[i], static_cast<int>(label.size()));
        out.entries.push_back(it->second);
    }
    validate(out);
    return out;
}

int DiscoveryTree::degree(int v) const {
    auto it = adj.find(v);
    if (it == adj.end()) throw UnknownId("tree vertex " + std::to_string(v));
    return static_cast<int>(it->second.size());
}

std::vector<int> DiscoveryTree::ids() const {
    std::vector<int> out;
    for (const auto& [v, _] : adj) out.push_back(v);
    return out;
}

int DiscoveryTree::parent(int v) const {
    if (v == root) return -1;
    // BFS from root; trees here are tiny
    std::vector<std::pair<int, int>> stack{{root, -1}};
    while (!stack.empty()) {
        auto [u, p] = stack.back();
        stack.pop_back();
        if (u == v) return p;
        for (int w : adj.at(u))
            if (w != p) stack.emplace_back(w, u);
    }
    throw UnknownId("tree vertex " + std::to_string(v));
}

std::vector<int> DiscoveryTree::children(int v) const {
    int p = parent(v);
    std::vector<int> out;
    for (int w : adj.at(v))
        if (w != p) out.push_back(w);
    return out;
}

std::string DiscoveryTree::parent_array() const {
    std::ostringstream out;
    bool first = true;
    for (int v : ids()) {
        if (!first) out << ' ';
        first = false;
        out << v << ':' << parent(v);
    }
    return out.str();
}

DiscoveryTree discovery_tree(const CombinatorialPath& path) {
    validate(path);
    DiscoveryTree t;
    t.root = 0;
    t.adj[0];
    t.parity[0] = 0;
    int max_seen = 0;
    for (std::size_t i = 1; i < path.entries.size(); ++i) {
        int v = path.entries[i];
        if (v > max_seen) {  // first visit: edge from the previous entry
            int u = path.entries[i - 1];
            t.adj[u].push_back(v);
            t.adj[v].push_back(u);
            t.parity[v] = 1 - t.parity[u];
            max_seen = v;
        }
    }
    t.next_fresh = max_seen + 1;
    return t;
}

DiscoveryTree random_tree(std::uint64_t seed, int k) {
    if (k < 2) throw BadRange("random tree needs k >= 2");
    Stream s(seed);
    DiscoveryTree t;
    t.root = 0;
    t.adj[0];
    t.parity[0] = 0;
    for (int v = 1; v < k; ++v) {
        int p = static_cast<int>(s.uniform01() * v);
        if (p >= v) p = v - 1;
        t.adj[p].push_back(v);
        t.adj[v].push_back(p);
        t.parity[v] = 1 - t.parity[p];
    }
    t.next_fresh = k;
    std::vector<int> leaves;
    for (const auto& [v, nbrs] : t.adj)
        if (v != t.root && nbrs.size() == 1) leaves.push_back(v);
    std::size_t pick = static_cast<std::size_t>(s.uniform01() * leaves.size());
    if (pick >= leaves.size()) pick = leaves.size() - 1;
    t.m_star = leaves[pick];
    return t;
}

WeightContext make_weight_context(const ModelParams& params, const DerivedScales& scales) {
    auto tm = target_minimizers(params.gamma1, params.gamma2, params.a);
    WeightContext ctx;
    ctx.lambda = params.lambda;
    ctx.a = params.a;
    ctx.gamma1 = params.gamma1;
    ctx.gamma2 = params.gamma2;
    ctx.u1 = scales.u_blue;
    ctx.u2 = scales.v_blue;
    ctx.mu_star = tm.mu_star;
    ctx.nu_star = tm.nu_star;
    ctx.b = scales.b;
    return ctx;
}

double mark_integral(int n, double gamma, double thr) {
    if (n < 1) throw BadRange("integral order must be >= 1");
    if (!(thr > 0.0 && thr <= 1.0)) throw BadThreshold("threshold must lie in (0,1]");
    const double e = 1.0 - gamma * static_cast<double>(n);
    if (std::abs(e) < kDegenerateTol) return std::log(1.0 / thr);
    // (1 - thr^e)/e via expm1 for stability near the log branch
    return -std::expm1(e * std::log(thr)) / e;
}

double script_u(int n, const WeightContext& ctx) { return mark_integral(n, ctx.gamma1, ctx.u1); }
double script_v(int n, const WeightContext& ctx) { return mark_integral(n, ctx.gamma2, ctx.u2); }

AsymptoticScale mark_integral_scale(int n, double gamma, AsymptoticScale u_scale) {
    if (n < 1) throw BadRange("integral order must be >= 1");
    const double e = 1.0 - gamma * static_cast<double>(n);
    if (std::abs(e) < kDegenerateTol) return {0.0, 1.0};  // log(1/u) branch
    if (e > 0.0) return {0.0, 0.0};
    return u_scale.pow(e);
}

AsymptoticScale script_u_scale(int n, const WeightContext& ctx) {
    return mark_integral_scale(n, ctx.gamma1, {ctx.mu_star, ctx.b});
}

AsymptoticScale script_v_scale(int n, const WeightContext& ctx) {
    return mark_integral_scale(n, ctx.gamma2, {ctx.nu_star, ctx.b});
}

WeightValue tree_weight_F(const DiscoveryTree& tree, const WeightContext& ctx) {
    if (!tree.m_star) throw BadDistinguishedLeaf("tree has no distinguished leaf");
    int m = *tree.m_star;
    if (!tree.has_vertex(m) || m == tree.root || tree.degree(m) != 1)
        throw BadDistinguishedLeaf("distinguished vertex must be a non-root leaf");

    WeightValue w{0.0, {0.0, 0.0}};
    const double log_2l1 = std::log(2.0 * ctx.lambda);
    const double log_2l2 = std::log(2.0 * std::pow(ctx.lambda, ctx.a));
    for (const auto& [v, nbrs] : tree.adj) {
        if (v == m) continue;
        const int deg = static_cast<int>(nbrs.size());
        const int rate_exp = std::max(deg - 1, 1);
        if (tree.parity.at(v) == 0) {
            w.log_value += rate_exp * log_2l1 + std::log(mark_integral(deg, ctx.gamma1, ctx.u1));
            w.scale *= AsymptoticScale{static_cast<double>(rate_exp), 0.0};
            w.scale *= script_u_scale(deg, ctx);
        } else {
            w.log_value += rate_exp * log_2l2 + std::log(mark_integral(deg, ctx.gamma2, ctx.u2));
            w.scale *= AsymptoticScale{ctx.a * rate_exp, 0.0};
            w.scale *= script_v_scale(deg, ctx);
        }
    }
    return w;
}

namespace {

// leaf in op preconditions: non-root vertex of degree 1
bool op_leaf(const DiscoveryTree& t, int v) { return v != t.root && t.degree(v) == 1; }

bool excluded(const DiscoveryTree& t, int v) { return t.m_star && *t.m_star == v; }

void remove_vertex(DiscoveryTree& t, int v) {
    for (int u : t.adj.at(v)) {
        auto& lst = t.adj.at(u);
        lst.erase(std::remove(lst.begin(), lst.end(), v), lst.end());
    }
    t.adj.erase(v);
    t.parity.erase(v);
}

}  // namespace

DiscoveryTree apply_reduction(const DiscoveryTree& tree, ReductionOp op,
                              const std::vector<int>& site) {
    DiscoveryTree t = tree;
    auto need = [&](bool cond, const char* clause) {
        if (!cond) throw PreconditionViolated(clause);
    };
    switch (op) {
        case ReductionOp::Op1: {
            need(site.size() == 2, "Op1 site is (x,y)");
            int x = site[0], y = site[1];
            need(t.has_vertex(x) && t.has_vertex(y), "site vertices must exist");
            need(!excluded(t, x) && !excluded(t, y), "site must avoid the distinguished leaf");
            need(op_leaf(t, y), "y must be a non-root leaf");
            need(t.parent(y) == x, "y must be a child of x");
            need(t.children(x).size() >= 2, "y must not be the only child of x");
            remove_vertex(t, y);
            break;
        }
        case ReductionOp::Op2: {
            need(site.size() == 3, "Op2 site is (x,y,z)");
            int x = site[0], y = site[1], z = site[2];
            need(t.has_vertex(x) && t.has_vertex(y) && t.has_vertex(z),
                 "site vertices must exist");
            need(!excluded(t, x) && !excluded(t, y) && !excluded(t, z),
                 "site must avoid the distinguished leaf");
            need(op_leaf(t, z), "z must be a non-root leaf");
            need(t.parent(z) == y && t.children(y).size() == 1, "z must be the only child of y");
            need(t.parent(y) == x, "y must be a child of x");
            need(t.children(x).size() >= 2, "y must not be the only child of x");
            remove_vertex(t, z);
            remove_vertex(t, y);
            break;
        }
        case ReductionOp::Op3: {
            need(site.size() == 3, "Op3 site is (x,y,z)");
            int x = site[0], y = site[1], z = site[2];
            need(t.has_vertex(x) && t.has_vertex(y) && t.has_vertex(z),
                 "site vertices must exist");
            need(!excluded(t, x) && !excluded(t, y) && !excluded(t, z),
                 "site must avoid the distinguished leaf");
            need(!op_leaf(t, x) && !op_leaf(t, z), "x and z must not be leaves");
            auto ny = t.adj.at(y);
            std::sort(ny.begin(), ny.end());
            std::vector<int> xz{std::min(x, z), std::max(x, z)};
            need(ny == xz, "x and z must be the only neighbours of y");
            int w = t.next_fresh++;
            int wpar = t.parity.at(x);
            std::vector<int> wn;
            for (int u : t.adj.at(x))
                if (u != y) wn.push_back(u);
            for (int u : t.adj.at(z))
                if (u != y) wn.push_back(u);
            bool w_is_root = x == t.root || z == t.root;
            remove_vertex(t, y);
            remove_vertex(t, x);
            remove_vertex(t, z);
            t.adj[w] = wn;
            t.parity[w] = wpar;
            for (int u : wn) t.adj.at(u).push_back(w);
            if (w_is_root) t.root = w;
            break;
        }
    }
    return t;
}

namespace {

bool is_final_segment(const DiscoveryTree& t) {
    if (!t.m_star) return false;
    int m = *t.m_star;
    if (t.size() == 2) return t.degree(t.root) == 1 && t.degree(m) == 1 && t.root != m;
    if (t.size() == 3) {
        if (t.degree(t.root) != 1 || t.degree(m) != 1) return false;
        for (const auto& [v, nbrs] : t.adj)
            if (v != t.root && v != m && nbrs.size() == 2) return true;
    }
    return false;
}

std::optional<OpLogEntry> find_op(const DiscoveryTree& t) {
    for (const auto& [y, nbrs] : t.adj) {
        if (!op_leaf(t, y) || excluded(t, y)) continue;
        int x = nbrs.front();
        if (excluded(t, x)) continue;
        if (t.children(x).size() >= 2) return OpLogEntry{ReductionOp::Op1, {x, y}};
    }
    for (const auto& [z, nbrs] : t.adj) {
        if (!op_leaf(t, z) || excluded(t, z)) continue;
        int y = nbrs.front();
        if (y == t.root || excluded(t, y)) continue;
        if (t.children(y).size() != 1) continue;
        int x = t.parent(y);
        if (excluded(t, x)) continue;
        if (t.children(x).size() >= 2) return OpLogEntry{ReductionOp::Op2, {x, y, z}};
    }
    for (const auto& [y, nbrs] : t.adj) {
        if (nbrs.size() != 2 || excluded(t, y) || y == t.root) continue;
        int x = nbrs[0], z = nbrs[1];
        if (excluded(t, x) || excluded(t, z)) continue;
        if (op_leaf(t, x) || op_leaf(t, z)) continue;
        return OpLogEntry{ReductionOp::Op3, {x, y, z}};
    }
    return std::nullopt;
}

}  // namespace

ReductionResult reduce_to_segment(const DiscoveryTree& tree) {
    if (!tree.m_star) throw BadDistinguishedLeaf("reduction needs a distinguished leaf");
    ReductionResult res;
    res.segment = tree;
    while (!is_final_segment(res.segment)) {
        auto op = find_op(res.segment);
        if (!op) throw StuckTree("no reduction applies to a non-segment tree");
        res.segment = apply_reduction(res.segment, op->op, op->site);
        res.ops.push_back(*op);
    }
    return res;
}

MFactor m_factor(double lambda, double a, int k, std::size_t ell) {
    if (k < 2 || ell + 1 < static_cast<std::size_t>(k))
        throw BadRange("need k >= 2 and ell >= k-1");
    const double count = static_cast<double>(count_bound(ell, k));
    const double step_exp =
        static_cast<double>(std::max<std::int64_t>(static_cast<std::int64_t>(ell) - 2 * k, 0));
    const double log_pow = -16.0 * std::floor((k - 3) / 2.0);
    const double log1l = std::log(1.0 / lambda);
    MFactor m;
    m.numeric = count * std::pow(2.0 * std::pow(lambda, std::min(a, 1.0)), step_exp) *
                std::pow(log1l, log_pow);
    m.scale = {std::min(a, 1.0) * step_exp, log_pow};
    return m;
}

SumBound sum_bound_check(int k, double lambda, double a) {
    if (k < 3) throw BadRange("sum bound needs k >= 3");
    const double q = 2.0 * std::pow(lambda, std::min(a, 1.0));
    SumBound r{};
    r.bound = std::pow(4.0 * k, 3.0 * k);
    double sum = 0.0;
    for (std::size_t ell = static_cast<std::size_t>(k) - 1;; ++ell) {
        double term = static_cast<double>(count_bound(ell, k)) *
                      std::pow(q, static_cast<double>(std::max<std::int64_t>(
                                      static_cast<std::int64_t>(ell) - 2 * k, 0)));
        sum += term;
        if (ell > static_cast<std::size_t>(3 * k) && term < 1e-300 * sum) break;
        if (ell > 4000) break;  // safety; series must have converged long before
    }
    r.sum = sum;
    r.pass = sum <= r.bound;
    return r;
}

double mecke_expected_count(const CombinatorialPath& path, Colouring colouring,
                            const WeightContext& ctx) {
    validate(path);
    const int k = path_k(path);
    auto tree = discovery_tree(path);
    const int last = path.entries.back();
    if (colouring == Colouring::blue_then_red_last) {
        // the red vertex must be discovered by the final step
        bool first_visit = true;
        for (std::size_t i = 0; i + 1 < path.entries.size(); ++i)
            if (path.entries[i] == last) first_visit = false;
        if (!first_visit)
            throw InvalidColouringForPath("red-last needs the last entry to be a first visit");
    }
    double prod = std::pow(2.0, k - 1);
    for (const auto& [v, nbrs] : tree.adj) {
        const int deg = static_cast<int>(nbrs.size());
        const bool even = tree.parity.at(v) == 0;
        if (colouring == Colouring::blue_then_red_last && v == last) {
            // integral over the red band (0, u]: u^{bar gamma}/bar gamma
            double g = even ? ctx.gamma1 : ctx.gamma2;
            double thr = even ? ctx.u1 : ctx.u2;
            prod *= std::pow(thr, 1.0 - g) / (1.0 - g);
        } else {
            prod *= even ? mark_integral(deg, ctx.gamma1, ctx.u1)
                         : mark_integral(deg, ctx.gamma2, ctx.u2);
        }
    }
    return prod;
}

std::int64_t count_realized_paths(const Hypergraph& graph, const CombinatorialPath& path,
                                  Colouring colouring, double u_threshold, double v_threshold,
                                  std::size_t cap) {
    validate(path);
    if (path.entries.size() > cap + 1) throw LengthTooLarge("path exceeds cap");
    if (!graph.root_id()) throw BadRootSpec("graph has no root");
    if (colouring == Colouring::blue_then_red_last && path.entries.size() > 1) {
        // the red endpoint must be a first visit; a revisit is already pinned blue
        int last = path.entries.back();
        for (std::size_t i = 0; i + 1 < path.entries.size(); ++i)
            if (path.entries[i] == last)
                throw InvalidColouringForPath("red-last needs a first-visit endpoint");
    }
    auto colours = graph.colour(u_threshold, v_threshold);
    const auto& e = path.entries;
    const std::size_t len = e.size();

    auto colour_ok = [&](std::size_t pos, std::int64_t id) {
        bool is_last = pos + 1 == len;
        bool red_wanted = colouring == Colouring::blue_then_red_last && is_last;
        // red-last paths end at a first visit; interior occurrences stay blue
        return red_wanted ? colours[id] == Colour::red : colours[id] == Colour::blue;
    };

    std::int64_t count = 0;
    std::vector<std::int64_t> assigned(len, -1);  // value -> vertex id
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int max_seen) {
        if (pos == len) {
            ++count;
            return;
        }
        std::int64_t cur = assigned[e[pos - 1]];
        for (auto nb : graph.neighbors(cur)) {
            int val = e[pos];
            if (val <= max_seen) {
                if (assigned[val] != nb) continue;
                if (!colour_ok(pos, nb)) continue;
                rec(pos + 1, max_seen);
            } else {
                bool used = false;
                for (int v = 0; v <= max_seen; ++v)
                    if (assigned[v] == nb) used = true;
                if (used) continue;
                if (!colour_ok(pos, nb)) continue;
                assigned[val] = nb;
                rec(pos + 1, val);
                assigned[val] = -1;
            }
        }
    };
    std::int64_t root = *graph.root_id();
    if (!colour_ok(0, root)) return 0;
    assigned[0] = root;
    if (len == 1) return 1;
    rec(1, 0);
    return count;
}

AsymptoticScale path_class_bound(int k, std::size_t ell, BoundVariant variant,
                                 const WeightContext& ctx) {
    if (k < 2 || ell + 1 < static_cast<std::size_t>(k))
        throw BadRange("need k >= 2 and ell >= k-1");
    const bool even = ell % 2 == 0;
    const double bg1 = 1.0 - ctx.gamma1, bg2 = 1.0 - ctx.gamma2;
    const double d2 = std::max(2.0 * ctx.gamma2 - 1.0, 0.0);
    double exponent;
    if (variant == BoundVariant::P)
        exponent = even ? 1.0 + ctx.a - d2 * ctx.nu_star + bg1 * ctx.mu_star
                        : 1.0 + bg2 * ctx.nu_star;
    else
        exponent = even ? 1.0 + ctx.a : 1.0;
    auto m = m_factor(ctx.lambda, ctx.a, k, ell);
    return m.scale * AsymptoticScale{exponent, 0.0};
}

std::string path_dump(const CombinatorialPath& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        if (i) out << ',';
        out << path.entries[i];
    }
    return out.str();
}

}  // namespace combi
}  // namespace bipcp
