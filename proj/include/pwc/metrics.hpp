#pragma once

#include "pwc/refinement.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace pwc {

/// A map that is affine on each of finitely many open boxes: either a
/// piecewise contraction or one of its iterates on P(f^n).
struct PiecewiseAffine {
    Box domain;
    std::vector<Box> cells;
    std::vector<DiagonalAffineMap> maps;

    static PiecewiseAffine of(const PiecewiseContraction& f) {
        return {f.domain(), f.partition().elements(), f.pieces()};
    }

    static PiecewiseAffine of(const RefinedPartition& part, const Box& domain) {
        PiecewiseAffine out{domain, {}, {}};
        for (const auto& c : part.cells) {
            out.cells.push_back(c.region);
            out.maps.push_back(c.map);
        }
        return out;
    }
};

namespace detail {

/// Cell of g with the same box as cell i of f, for every i; nullopt when the
/// two partitions differ as sets of boxes.
inline std::optional<std::vector<std::size_t>> same_cells(const PiecewiseAffine& f, const PiecewiseAffine& g) {
    if (!(f.domain == g.domain) || f.cells.size() != g.cells.size()) return std::nullopt;
    std::vector<std::size_t> match;
    for (const auto& c : f.cells) {
        auto it = std::find(g.cells.begin(), g.cells.end(), c);
        if (it == g.cells.end()) return std::nullopt;
        match.push_back(static_cast<std::size_t>(it - g.cells.begin()));
    }
    return match;
}

inline std::vector<Point> corners(const Box& b) {
    const std::size_t d = b.dim();
    std::vector<Point> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Point p(d);
        for (std::size_t a = 0; a < d; ++a) p[a] = (mask >> a) & 1U ? b.hi(a) : b.lo(a);
        out.push_back(std::move(p));
    }
    return out;
}

inline Rat sup_distance(const Point& a, const Point& b) {
    Rat r{0};
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, abs(a[i] - b[i]));
    return r;
}

/// sup over closure(b) of ‖φ - ψ‖, attained at a corner since φ - ψ is affine.
inline Rat sup_on_box(const DiagonalAffineMap& phi, const DiagonalAffineMap& psi, const Box& b) {
    Rat r{0};
    for (const auto& c : corners(b)) r = std::max(r, sup_distance(phi(c), psi(c)));
    return r;
}

}  // namespace detail

/// C² distance on a common partition; nullopt stands for +∞.
inline std::optional<Rat> d2(const PiecewiseAffine& f, const PiecewiseAffine& g) {
    auto match = detail::same_cells(f, g);
    if (!match) return std::nullopt;
    Rat best{0};
    for (std::size_t i = 0; i < f.cells.size(); ++i) {
        const auto& phi = f.maps[i];
        const auto& psi = g.maps[(*match)[i]];
        Rat c0 = detail::sup_on_box(phi, psi, f.cells[i]);
        Rat c1{0};
        for (std::size_t a = 0; a < phi.dim(); ++a) c1 = std::max(c1, abs(phi.scale()[a] - psi.scale()[a]));
        best = std::max(best, c0 + c1);
    }
    return best;
}

inline std::optional<Rat> d2(const PiecewiseContraction& f, const PiecewiseContraction& g) {
    return d2(PiecewiseAffine::of(f), PiecewiseAffine::of(g));
}

struct RhoEstimate {
    enum class Kind { Exact, UpperBound, NoMatch };
    enum class Matcher { Identity, OrderPreserving, OrderReversing, None };

    Rat value;
    Kind kind = Kind::NoMatch;
    Matcher matcher = Matcher::None;
};

inline std::string to_string(RhoEstimate::Kind k) {
    switch (k) {
        case RhoEstimate::Kind::Exact: return "Exact";
        case RhoEstimate::Kind::UpperBound: return "UpperBound";
        case RhoEstimate::Kind::NoMatch: return "NoMatch";
    }
    return "Unknown";
}

inline std::string to_string(RhoEstimate::Matcher m) {
    switch (m) {
        case RhoEstimate::Matcher::Identity: return "identity";
        case RhoEstimate::Matcher::OrderPreserving: return "order-preserving";
        case RhoEstimate::Matcher::OrderReversing: return "order-reversing";
        case RhoEstimate::Matcher::None: return "none";
    }
    return "unknown";
}

namespace detail {

/// Sorted distinct cell coordinates of h along one axis.
inline std::vector<Rat> axis_grid(const PiecewiseAffine& h, std::size_t axis) {
    std::vector<Rat> g;
    for (const auto& c : h.cells) {
        g.push_back(c.lo(axis));
        g.push_back(c.hi(axis));
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

/// ‖ψ - id‖ + ‖f - g∘ψ‖ for the product ψ = (ψ_1, ..., ψ_d), each ψ_a the
/// piecewise-linear map sending the k-th breakpoint of f along axis a to the
/// k-th (or, if axis a is reversed, the k-th from the top) breakpoint of g.
/// nullopt unless ψ carries every cell of f onto a cell of g.
inline std::optional<Rat> product_matcher_cost(const PiecewiseAffine& f, const PiecewiseAffine& g,
                                               std::size_t reversed_axes) {
    const std::size_t d = f.domain.dim();
    if (f.cells.size() != g.cells.size()) return std::nullopt;
    std::vector<std::vector<Rat>> fg(d), gg(d);
    Rat shift{0};
    for (std::size_t a = 0; a < d; ++a) {
        fg[a] = axis_grid(f, a);
        gg[a] = axis_grid(g, a);
        if (fg[a].size() != gg[a].size()) return std::nullopt;
        if ((reversed_axes >> a) & 1U) std::reverse(gg[a].begin(), gg[a].end());
        for (std::size_t k = 0; k < fg[a].size(); ++k) shift = std::max(shift, abs(gg[a][k] - fg[a][k]));
    }
    auto position = [&](std::size_t a, const Rat& x) {
        return static_cast<std::size_t>(std::lower_bound(fg[a].begin(), fg[a].end(), x) - fg[a].begin());
    };

    Rat gap{0};
    for (std::size_t i = 0; i < f.cells.size(); ++i) {
        const Box& P = f.cells[i];
        Point lo(d), hi(d);
        std::vector<std::size_t> first(d), last(d);
        for (std::size_t a = 0; a < d; ++a) {
            first[a] = position(a, P.lo(a));
            last[a] = position(a, P.hi(a));
            lo[a] = std::min(gg[a][first[a]], gg[a][last[a]]);
            hi[a] = std::max(gg[a][first[a]], gg[a][last[a]]);
        }
        auto it = std::find(g.cells.begin(), g.cells.end(), Box(lo, hi));
        if (it == g.cells.end()) return std::nullopt;
        const auto& gm = g.maps[static_cast<std::size_t>(it - g.cells.begin())];
        // f - g∘ψ is affine on each grid sub-box of P: probe the grid points.
        std::vector<std::size_t> k = first;
        Point x(d), y(d);
        for (;;) {
            for (std::size_t a = 0; a < d; ++a) {
                x[a] = fg[a][k[a]];
                y[a] = gg[a][k[a]];
            }
            gap = std::max(gap, sup_distance(f.maps[i](x), gm(y)));
            std::size_t a = 0;
            while (a < d && ++k[a] > last[a]) k[a] = first[a], ++a;
            if (a == d) break;
        }
    }
    return shift + gap;
}

}  // namespace detail

/// Upper bound on ρ(f, g) from canonical partition matchers, capped at
/// A = 2·diam(X).
inline RhoEstimate rho_upper(const PiecewiseAffine& f, const PiecewiseAffine& g) {
    const Rat A = Rat{2} * f.domain.diameter();
    RhoEstimate out{A, RhoEstimate::Kind::NoMatch, RhoEstimate::Matcher::None};
    if (!(f.domain == g.domain)) return out;
    if (auto match = detail::same_cells(f, g)) {
        Rat v{0};
        for (std::size_t i = 0; i < f.cells.size(); ++i)
            v = std::max(v, detail::sup_on_box(f.maps[i], g.maps[(*match)[i]], f.cells[i]));
        v = std::min(v, A);
        return {v, v == 0 ? RhoEstimate::Kind::Exact : RhoEstimate::Kind::UpperBound, RhoEstimate::Matcher::Identity};
    }
    if (f.cells.size() == g.cells.size()) {
        std::optional<Rat> best;
        std::size_t best_mask = 0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << f.domain.dim()); ++mask) {
            auto cost = detail::product_matcher_cost(f, g, mask);
            if (cost && (!best || *cost < *best)) {
                best = cost;
                best_mask = mask;
            }
        }
        if (best) {
            return {std::min(*best, A), RhoEstimate::Kind::UpperBound,
                    best_mask == 0 ? RhoEstimate::Matcher::OrderPreserving : RhoEstimate::Matcher::OrderReversing};
        }
    }
    return out;
}

inline RhoEstimate rho_upper(const PiecewiseContraction& f, const PiecewiseContraction& g) {
    return rho_upper(PiecewiseAffine::of(f), PiecewiseAffine::of(g));
}

struct D1Estimate {
    Rat sigma;
    std::size_t terms = 0;
    std::vector<RhoEstimate> summands;   // ρ estimates for f^n, g^n, n = 1..terms
    Rat partial;
    Rat tail_bound;                      // σ^{terms+1}·A/(1 - σ)
    Rat total;                           // partial + tail_bound
};

/// Σ_{n ≤ terms} σ^n ρ̂(f^n, g^n) plus the geometric tail, with f^n and g^n
/// represented on their refined partitions.
inline D1Estimate d1_upper(const PiecewiseContraction& f, const PiecewiseContraction& g, std::size_t terms,
                           const Rat& sigma = Rat(1, 2)) {
    if (terms == 0) throw std::invalid_argument("d1 needs at least one term");
    if (!(sigma > 0 && sigma < 1)) throw std::invalid_argument("sigma must lie in (0, 1)");
    const Rat A = Rat{2} * f.domain().diameter();
    D1Estimate est;
    est.sigma = sigma;
    est.terms = terms;
    Refiner rf(f), rg(g);
    Rat weight{1};
    for (std::size_t n = 1; n <= terms; ++n) {
        weight *= sigma;
        auto term = rho_upper(PiecewiseAffine::of(rf.at(n), f.domain()), PiecewiseAffine::of(rg.at(n), g.domain()));
        est.partial += weight * term.value;
        est.summands.push_back(std::move(term));
    }
    est.tail_bound = weight * sigma * A / (Rat{1} - sigma);
    est.total = est.partial + est.tail_bound;
    return est;
}

/// min{σ^N A, (σ^N/3)·ε}, ε the least gap between closure(f^N(P)) and the
/// boundary of the cell containing it.
inline Rat stability_margin(const PiecewiseContraction& f, const Rat& sigma = Rat(1, 2), std::size_t n_max = 50) {
    Refiner r(f);
    auto markov = detect_markov(r, n_max);
    if (!markov.is_markov()) throw NotMarkov();
    const auto& part = r.at(markov.time);
    std::optional<Rat> eps;
    for (std::size_t i = 0; i < part.size(); ++i) {
        Rect img = part.cells[i].map.image(Rect::closure(part.cells[i].region));
        auto walls = facets(part.cells[markov.targets[i]].region);
        Rat gap = set_distance(img, walls);
        if (!eps || gap < *eps) eps = gap;
    }
    const Rat sN = pow(sigma, markov.time);
    const Rat A = Rat{2} * f.domain().diameter();
    return std::min(sN * A, sN / 3 * *eps);
}

struct StabilityReport {
    std::optional<Rat> margin;                 // of the first map, when Markov
    std::optional<std::size_t> time_a, time_b;
    bool same_N = false;
    bool conjugate = false;
    std::vector<std::size_t> cycles_a, cycles_b;   // sorted cycle lengths
};

namespace detail {

inline std::vector<std::size_t> cycle_lengths(const SymbolicModel& m) {
    std::vector<std::size_t> out;
    for (const auto& c : m.cycles) out.push_back(c.size());
    std::sort(out.begin(), out.end());
    return out;
}

/// Matches the nonwandering cells of two interval maps by position (or
/// reversed position) and checks that the match conjugates the cell maps.
inline bool interval_conjugacy(const RefinedPartition& pa, const SymbolicModel& ma, const RefinedPartition& pb,
                               const SymbolicModel& mb) {
    auto ordered = [](const RefinedPartition& p, const SymbolicModel& m) {
        auto v = m.nonwandering;
        std::sort(v.begin(), v.end(),
                  [&](std::size_t a, std::size_t b) { return p.cells[a].region.lo(0) < p.cells[b].region.lo(0); });
        return v;
    };
    auto va = ordered(pa, ma), vb = ordered(pb, mb);
    if (va.size() != vb.size()) return false;
    for (bool reversed : {false, true}) {
        std::vector<std::optional<std::size_t>> to_b(pa.size());
        for (std::size_t k = 0; k < va.size(); ++k) to_b[va[k]] = vb[reversed ? vb.size() - 1 - k : k];
        bool ok = true;
        for (auto i : va) ok = ok && to_b[ma.next[i]] == mb.next[*to_b[i]];
        if (ok) return true;
    }
    return false;
}

}  // namespace detail

/// Symbolic shadow of topological stability: equal stabilisation times and
/// conjugate cycle structure on the nonwandering cells.
inline StabilityReport verify_stability(const PiecewiseContraction& f, const PiecewiseContraction& g,
                                        std::size_t n_max = 50) {
    StabilityReport rep;
    Refiner ra(f), rb(g);
    auto a = detect_markov(ra, n_max);
    auto b = detect_markov(rb, n_max);
    if (a.is_markov()) {
        rep.time_a = a.time;
        rep.margin = stability_margin(f, Rat(1, 2), n_max);
    }
    if (b.is_markov()) rep.time_b = b.time;
    if (!a.is_markov() || !b.is_markov()) return rep;
    rep.same_N = a.time == b.time;
    const auto& pa = ra.at(a.time);
    const auto& pb = rb.at(b.time);
    auto ma = symbolic_model(pa, f);
    auto mb = symbolic_model(pb, g);
    rep.cycles_a = detail::cycle_lengths(ma);
    rep.cycles_b = detail::cycle_lengths(mb);
    rep.conjugate = rep.cycles_a == rep.cycles_b;
    if (rep.conjugate && f.dim() == 1 && g.dim() == 1) rep.conjugate = detail::interval_conjugacy(pa, ma, pb, mb);
    return rep;
}

}  // namespace pwc
