#include "bipcp/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "bipcp/errors.hpp"
#include "bipcp/format.hpp"
#include "bipcp/rng.hpp"
#include "bipcp/stats.hpp"

namespace bipcp {

bool edge_exists(double gamma1, double gamma2, const Vertex& a, const Vertex& b) {
    if (a.vtype == b.vtype)
        throw SameTypePair("edge rule only connects opposite types");
    const Vertex& t1 = a.vtype == 1 ? a : b;
    const Vertex& t2 = a.vtype == 1 ? b : a;
    const double dist = std::abs(a.position - b.position);
    const double reach = std::pow(t1.mark, -gamma1) * std::pow(t2.mark, -gamma2);
    if (std::isfinite(reach)) return dist <= reach;
    // tiny marks can overflow the reach; compare in log-space instead
    const double log_reach = -gamma1 * std::log(t1.mark) - gamma2 * std::log(t2.mark);
    return dist <= 0.0 || std::log(dist) <= log_reach;
}

const Vertex& Hypergraph::vertex(std::int64_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= verts_.size())
        throw UnknownId("vertex id " + std::to_string(id));
    return verts_[static_cast<std::size_t>(id)];
}

bool Hypergraph::edge(std::int64_t id1, std::int64_t id2) const {
    return edge_exists(params_.gamma1, params_.gamma2, vertex(id1), vertex(id2));
}

void Hypergraph::build_index() {
    for (auto& side : layers_) side.clear();
    for (const auto& v : verts_) {
        auto& side = layers_[v.vtype == 1 ? 0 : 1];
        int j = 0;
        while (v.mark <= std::ldexp(1.0, -j - 1) && j < 1100) ++j;
        // mark in (2^{-j-1}, 2^{-j}]
        if (side.size() <= static_cast<std::size_t>(j)) side.resize(j + 1);
        side[j].ids.push_back(v.id);
    }
    for (auto& side : layers_) {
        for (std::size_t j = 0; j < side.size(); ++j) {
            auto& layer = side[j];
            layer.min_mark = std::ldexp(1.0, -static_cast<int>(j) - 1);
            std::sort(layer.ids.begin(), layer.ids.end(),
                      [&](std::int64_t a, std::int64_t b) {
                          return verts_[a].position < verts_[b].position;
                      });
            layer.positions.reserve(layer.ids.size());
            for (auto id : layer.ids) layer.positions.push_back(verts_[id].position);
        }
    }
}

std::vector<std::int64_t> Hypergraph::neighbors(std::int64_t id) const {
    const Vertex& v = vertex(id);
    const int other = v.vtype == 1 ? 1 : 0;  // index into layers_
    const double g_self = v.vtype == 1 ? params_.gamma1 : params_.gamma2;
    const double g_other = v.vtype == 1 ? params_.gamma2 : params_.gamma1;
    const double self_factor = std::pow(v.mark, -g_self);

    std::vector<std::int64_t> out;
    for (const auto& layer : layers_[other]) {
        if (layer.ids.empty()) continue;
        // largest reach any vertex in this layer can have towards v
        double reach = self_factor * std::pow(layer.min_mark, -g_other);
        if (!std::isfinite(reach)) {
            reach = window_.half_length * 2.0 + 1.0;  // covers the whole window
        }
        auto lo = std::lower_bound(layer.positions.begin(), layer.positions.end(),
                                   v.position - reach);
        auto hi = std::upper_bound(lo, layer.positions.end(), v.position + reach);
        for (auto it = lo; it != hi; ++it) {
            std::int64_t cand = layer.ids[static_cast<std::size_t>(it - layer.positions.begin())];
            if (edge_exists(params_.gamma1, params_.gamma2, v, verts_[cand]))
                out.push_back(cand);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Hypergraph Hypergraph::from_vertices(const ModelParams& params, Window window,
                                     std::vector<Vertex> verts,
                                     std::optional<std::int64_t> root_id) {
    if (window.half_length <= 0.0) throw WindowTooSmall("window half-length must be > 0");
    Hypergraph g;
    g.params_ = params;
    g.window_ = window;
    g.verts_ = std::move(verts);
    for (std::size_t i = 0; i < g.verts_.size(); ++i) {
        if (g.verts_[i].id != static_cast<std::int64_t>(i))
            throw UnknownId("vertex ids must be 0..n-1 in order");
        if (!(g.verts_[i].mark > 0.0 && g.verts_[i].mark <= 1.0))
            throw BadRootSpec("marks must lie in (0,1]");
    }
    if (root_id) g.vertex(*root_id);  // validates
    g.root_id_ = root_id;
    g.build_index();
    return g;
}

Hypergraph Hypergraph::sample(const ModelParams& params, Window window, std::uint64_t seed,
                              RootSpec root) {
    if (window.half_length <= 0.0) throw WindowTooSmall("window half-length must be > 0");
    if (root.kind == RootSpec::fixed_mark && !(root.h > 0.0 && root.h <= 1.0))
        throw BadRootSpec("fixed root mark must lie in (0,1]");
    if (root.kind != RootSpec::none && root.vtype != 1 && root.vtype != 2)
        throw BadRootSpec("root type must be 1 or 2");
    validate_and_derive(params);  // parameter validation only

    const double L = window.half_length;
    Hypergraph g;
    g.params_ = params;
    g.window_ = window;
    g.seed_ = seed;

    std::vector<Vertex> verts;
    for (int t = 1; t <= 2; ++t) {
        Stream s(rng::derive(seed, 0xA0 + t));
        std::poisson_distribution<std::int64_t> pois(2.0 * L);
        std::int64_t n = pois(s);
        for (std::int64_t i = 0; i < n; ++i) {
            double pos = (2.0 * s.uniform01() - 1.0) * L;
            double mark = s.uniform01();
            verts.push_back({0, t, pos, mark});
        }
    }
    if (root.kind != RootSpec::none) {
        Stream s(rng::derive(seed, 0xB0));
        double mark = root.kind == RootSpec::uniform_mark ? s.uniform01() : root.h;
        verts.push_back({0, root.vtype, 0.0, mark});
    }
    std::stable_sort(verts.begin(), verts.end(), [](const Vertex& a, const Vertex& b) {
        if (a.vtype != b.vtype) return a.vtype < b.vtype;
        return a.position < b.position;
    });
    std::optional<std::int64_t> root_id;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        verts[i].id = static_cast<std::int64_t>(i);
        if (root.kind != RootSpec::none && verts[i].position == 0.0 &&
            verts[i].vtype == root.vtype && !root_id)
            root_id = verts[i].id;
    }
    g.verts_ = std::move(verts);
    g.root_id_ = root_id;
    g.build_index();
    return g;
}

Hypergraph Hypergraph::sample_restricted(const ModelParams& params, Window window,
                                         std::uint64_t seed, RestrictedVariant variant,
                                         double h) {
    auto scales = validate_and_derive(params);
    const double band_lo = variant == RestrictedVariant::G1plus ? scales.u0 : scales.v0;
    const double band_hi = std::min(2.0 * band_lo, 1.0);
    if (!(h >= band_lo && h <= band_hi))
        throw BadBand("root mark " + fmt_double(h) + " outside [" + fmt_double(band_lo) +
                      "," + fmt_double(band_hi) + "]");
    const int root_type = variant == RestrictedVariant::G1plus ? 1 : 2;

    Hypergraph g = sample(params, window, seed, RootSpec{});
    std::vector<Vertex> kept;
    for (const auto& v : g.verts_) {
        if (v.position < 0.0) continue;
        if (v.vtype == root_type && v.mark >= band_lo && v.mark <= band_hi) continue;
        kept.push_back(v);
    }
    kept.push_back({0, root_type, 0.0, h});
    std::stable_sort(kept.begin(), kept.end(), [](const Vertex& a, const Vertex& b) {
        if (a.vtype != b.vtype) return a.vtype < b.vtype;
        return a.position < b.position;
    });
    std::optional<std::int64_t> root_id;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        kept[i].id = static_cast<std::int64_t>(i);
        if (kept[i].vtype == root_type && kept[i].position == 0.0 && kept[i].mark == h &&
            !root_id)
            root_id = kept[i].id;
    }
    Hypergraph out;
    out.params_ = params;
    out.window_ = window;
    out.seed_ = seed;
    out.verts_ = std::move(kept);
    out.root_id_ = root_id;
    out.build_index();
    return out;
}

std::vector<std::size_t> Hypergraph::component_sizes() const {
    std::vector<char> seen(verts_.size(), 0);
    std::vector<std::size_t> sizes;
    std::vector<std::int64_t> stack;
    for (std::size_t start = 0; start < verts_.size(); ++start) {
        if (seen[start]) continue;
        seen[start] = 1;
        stack.push_back(static_cast<std::int64_t>(start));
        std::size_t count = 0;
        while (!stack.empty()) {
            std::int64_t v = stack.back();
            stack.pop_back();
            ++count;
            for (auto w : neighbors(v)) {
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        sizes.push_back(count);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

std::vector<Colour> Hypergraph::colour(const DerivedScales& scales) const {
    return colour(scales.u_blue, scales.v_blue);
}

std::vector<Colour> Hypergraph::colour(double u_threshold, double v_threshold) const {
    std::vector<Colour> out(verts_.size());
    for (std::size_t i = 0; i < verts_.size(); ++i) {
        double thr = verts_[i].vtype == 1 ? u_threshold : v_threshold;
        out[i] = verts_[i].mark > thr ? Colour::blue : Colour::red;
    }
    return out;
}

void Hypergraph::dump(std::ostream& out) const {
    out << "bipcp-graph v1 " << fmt_double(params_.gamma1) << ' ' << fmt_double(params_.gamma2)
        << ' ' << fmt_double(window_.half_length) << ' ' << seed_ << '\n';
    for (const auto& v : verts_)
        out << v.id << ' ' << v.vtype << ' ' << fmt_double(v.position) << ' '
            << fmt_double(v.mark) << '\n';
}

Hypergraph Hypergraph::load(std::istream& in) {
    std::string magic, version;
    double g1, g2, L;
    std::uint64_t seed;
    if (!(in >> magic >> version >> g1 >> g2 >> L >> seed) || magic != "bipcp-graph" ||
        version != "v1")
        throw UnsupportedFormat("bad graph header");
    std::vector<Vertex> verts;
    Vertex v;
    while (in >> v.id >> v.vtype >> v.position >> v.mark) verts.push_back(v);
    ModelParams params;
    params.gamma1 = g1;
    params.gamma2 = g2;
    params.a = 1.0;
    params.lambda = 0.1;
    params.allow_subcritical = true;
    std::optional<std::int64_t> root_id;
    for (const auto& w : verts)
        if (w.position == 0.0 && !root_id) root_id = w.id;
    Hypergraph g = from_vertices(params, Window{L}, std::move(verts), root_id);
    g.seed_ = seed;
    return g;
}

TailStats degree_tail_stats(const std::vector<const Hypergraph*>& graphs, int vtype,
                            double m_lo, double m_hi) {
    std::vector<double> degrees;
    for (const auto* g : graphs)
        for (const auto& v : g->vertices())
            if (v.vtype == vtype) degrees.push_back(static_cast<double>(g->degree(v.id)));
    if (degrees.size() < 1000) throw InsufficientData("need >= 1000 pooled vertices");
    std::sort(degrees.begin(), degrees.end());
    const double n = static_cast<double>(degrees.size());
    if (m_lo <= 0.0) m_lo = 4.0;
    if (m_hi <= 0.0) m_hi = degrees.back() / 4.0;
    if (!(m_hi > m_lo)) throw InsufficientData("degenerate degree range");

    TailStats t;
    std::vector<double> xs, ys;
    const int points = 24;
    for (int i = 0; i < points; ++i) {
        double m = m_lo * std::pow(m_hi / m_lo, static_cast<double>(i) / (points - 1));
        auto it = std::upper_bound(degrees.begin(), degrees.end(), m);
        double tail = static_cast<double>(degrees.end() - it) / n;
        if (tail <= 0.0) continue;
        t.tail.emplace_back(m, tail);
        xs.push_back(std::log(m));
        ys.push_back(std::log(tail));
    }
    // need genuine variation for a slope
    if (xs.size() < 3 || ys.front() == ys.back())
        throw InsufficientData("degenerate degree tail");
    auto fit = stats::least_squares(xs, ys);
    t.slope = fit.slope;
    t.slope_stderr = fit.slope_stderr;
    return t;
}

}  // namespace bipcp
