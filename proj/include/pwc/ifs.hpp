#pragma once

#include "pwc/refinement.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

namespace pwc {

/// Globally defined contractions extending the pieces of a map, together
/// with a compact box Y that every map sends into itself.
struct IFS {
    std::vector<DiagonalAffineMap> maps;
    Rat lambda;
    Box Y;
    Rat gamma{2};   // parameter of the symbolic metric d_γ

    std::size_t size() const { return maps.size(); }
    std::size_t dim() const { return Y.dim(); }
};

/// Builds the IFS with Y = [-R, R]^d, R = max{K, M / (1 - λ)}, where K bounds
/// the sup-norm on closure(domain) and M = max_i |φ_i(0)|.
inline IFS make_ifs(std::vector<DiagonalAffineMap> maps, const Box& domain) {
    if (maps.empty()) throw std::invalid_argument("an IFS needs at least one map");
    Rat lambda{0};
    for (const auto& m : maps) lambda = std::max(lambda, m.lipschitz());
    if (!(lambda < 1)) throw std::invalid_argument("IFS maps must be contractions");

    Rat K{0};
    for (std::size_t a = 0; a < domain.dim(); ++a) K = std::max({K, abs(domain.lo(a)), abs(domain.hi(a))});
    Rat M{0};
    for (const auto& m : maps)
        for (const auto& o : m.offset()) M = std::max(M, abs(o));
    Rat R = std::max(K, M / (Rat{1} - lambda));

    const std::size_t d = domain.dim();
    Box Y(Point(d, -R), Point(d, R));
    for (const auto& m : maps)
        if (!box_inside(m.image(Y), Y)) throw std::logic_error("Y is not invariant");
    return IFS{std::move(maps), std::move(lambda), std::move(Y)};
}

inline IFS associated_ifs(const PiecewiseContraction& f) { return make_ifs(f.pieces(), f.domain()); }

/// φ_{w[0]} ∘ φ_{w[1]} ∘ ... ∘ φ_{w[q-1]} (the last letter acts first).
inline DiagonalAffineMap word_map(const IFS& ifs, const Word& w) {
    auto m = DiagonalAffineMap::identity(ifs.dim());
    for (auto it = w.rbegin(); it != w.rend(); ++it) m = compose(ifs.maps[*it], m);
    return m;
}

struct ThetaValue {
    Point point;
    Rat error_bound;   // sup-norm distance to the coded point is at most this
};

/// Truncated coding map: the image of the center of Y under the prefix.
inline ThetaValue theta(const IFS& ifs, const Word& prefix) {
    if (prefix.empty()) throw std::invalid_argument("theta needs a nonempty prefix");
    return {word_map(ifs, prefix)(ifs.Y.center()), pow(ifs.lambda, prefix.size()) * ifs.Y.diameter()};
}

/// All boxes φ_σ(Y) for words σ of length n, in lexicographic word order.
inline std::vector<Box> ifs_attractor_cover(const IFS& ifs, std::size_t n) {
    if (n == 0) throw std::invalid_argument("cover depth must be at least 1");
    std::vector<Box> level{ifs.Y};
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<Box> next;
        next.reserve(level.size() * ifs.size());
        // Words grow on the left: level k+1 = { φ_i(B) : B in level k }; the
        // outer loop over letters keeps the result lexicographic.
        for (const auto& phi : ifs.maps)
            for (const auto& b : level) next.push_back(phi.image(b));
        level = std::move(next);
    }
    return level;
}

namespace detail {

inline bool cover_point(const IFS& ifs, const Point& x, std::size_t n) {
    if (!ifs.Y.contains_closed(x)) return false;
    if (n == 0) return true;
    for (const auto& phi : ifs.maps)
        if (cover_point(ifs, phi.inverse(x), n - 1)) return true;
    return false;
}

inline bool cover_single_box(const IFS& ifs, const Rect& r, std::size_t n) {
    if (!box_inside(Box(r.lo, r.hi), ifs.Y)) return false;
    if (n == 0) return true;
    for (const auto& phi : ifs.maps)
        if (cover_single_box(ifs, phi.preimage(r), n - 1)) return true;
    return false;
}

inline void collect_meeting(const IFS& ifs, const DiagonalAffineMap& prefix, std::size_t remaining,
                            const Rect& target, std::vector<Box>& out) {
    Rect here = prefix.image(Rect::closure(ifs.Y));
    if (rect_distance(here, target) > 0) return;
    if (remaining == 0) {
        out.emplace_back(here.lo, here.hi);
        return;
    }
    for (const auto& phi : ifs.maps) collect_meeting(ifs, compose(prefix, phi), remaining - 1, target, out);
}

}  // namespace detail

/// x lies in the closed union of ifs_attractor_cover(ifs, n). Searches
/// words depth-first through inverse images, pruned by Y.
inline bool cover_contains(const IFS& ifs, std::size_t n, const Point& x) {
    return detail::cover_point(ifs, x, n);
}

/// closure(b) lies in the closed union of ifs_attractor_cover(ifs, n).
inline bool cover_contains(const IFS& ifs, std::size_t n, const Box& b) {
    Rect r = Rect::closure(b);
    if (detail::cover_single_box(ifs, r, n)) return true;
    std::vector<Box> meeting;
    detail::collect_meeting(ifs, DiagonalAffineMap::identity(ifs.dim()), n, r, meeting);
    return !meeting.empty() && closed_union_contains(b, meeting);
}

struct InclusionCheck {
    bool ok = true;
    std::optional<Point> uncovered;
};

/// Every attractor point of the Markov map f lies in the depth-n IFS cover.
inline InclusionCheck check_attractor_inclusion(const PiecewiseContraction& f, std::size_t n,
                                                std::size_t n_max = 50) {
    auto att = attractor(f, n_max);
    auto ifs = associated_ifs(f);
    for (const auto& orb : att.orbits)
        for (const auto& x : orb.points)
            if (!cover_contains(ifs, n, x)) return {false, x};
    return {};
}

/// ε-fattened elements clipped to the open domain; ε = 0 gives the elements.
inline std::vector<Box> admissibility_neighbourhoods(const Partition& p, const Rat& eps) {
    std::vector<Box> out;
    for (const auto& e : p.elements()) out.push_back(*box_intersect(fatten(e, eps), p.domain()));
    return out;
}

/// A word σ in composition order (σ[0] is applied last) with its domain D_σ.
struct AdmissibleWord {
    Word word;
    Box domain;

    /// The visiting order of points of D_σ: σ reversed.
    Word itinerary() const { return Word(word.rbegin(), word.rend()); }
};

/// Words of length n with nonempty
/// D_σ = { x ∈ V_{σ_n} : φ_{σ_{k+1}} ∘ ... ∘ φ_{σ_n}(x) ∈ V_{σ_k}, k < n },
/// computed through D_{σ·j} = V_j ∩ φ_j^{-1}(D_σ).
inline std::vector<AdmissibleWord> admissible_words(const IFS& ifs, const Partition& p, std::size_t n,
                                                    const Rat& eps) {
    if (n == 0) throw std::invalid_argument("admissible word length must be at least 1");
    if (eps < 0) throw std::invalid_argument("fattening must be nonnegative");
    auto V = admissibility_neighbourhoods(p, eps);
    std::vector<AdmissibleWord> level;
    for (std::size_t i = 0; i < V.size(); ++i)
        if (auto d = box_intersect(V[i], ifs.Y)) level.push_back({Word{i}, *d});
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<AdmissibleWord> next;
        for (const auto& aw : level)
            for (std::size_t j = 0; j < V.size(); ++j) {
                auto d = box_intersect(V[j], ifs.maps[j].preimage(aw.domain));
                if (!d) continue;
                Word w = aw.word;
                w.push_back(j);
                next.push_back({std::move(w), std::move(*d)});
            }
        level = std::move(next);
    }
    return level;
}

struct BoundaryFacet {
    Word word;   // composition order; empty for the original facets
    Facet facet;
};

struct BoundaryPreimageSet {
    std::size_t depth = 0;
    Rat fattening;                      // δ of the closed δ-neighbourhood view
    std::vector<BoundaryFacet> facets;

    std::vector<Rect> fattened() const {
        std::vector<Rect> out;
        out.reserve(facets.size());
        for (const auto& bf : facets) out.push_back(fatten(bf.facet.closure(), fattening));
        return out;
    }
};

namespace detail {

/// The part of facet f inside the open box D, if their intersection is nonempty.
inline std::optional<Facet> restrict_facet(const Facet& f, const Box& D) {
    if (!(D.lo(f.axis) < f.value && f.value < D.hi(f.axis))) return std::nullopt;
    auto ext = box_intersect(f.extent, cross_section(D, f.axis));
    if (!ext) return std::nullopt;
    return Facet{f.axis, f.value, std::move(*ext)};
}

}  // namespace detail

/// Δ-facets together with their exact pullbacks φ_σ^{-1}(F) ∩ D_σ over
/// admissible words of length 1..N (ε-fattened admissibility).
inline BoundaryPreimageSet boundary_preimages(const IFS& ifs, const Partition& p, std::size_t N,
                                              const Rat& delta, const Rat& eps) {
    if (delta < 0) throw std::invalid_argument("fattening must be nonnegative");
    BoundaryPreimageSet out;
    out.depth = N;
    out.fattening = delta;
    const auto& originals = p.boundary_with_domain();
    for (const auto& f : originals) out.facets.push_back({Word{}, f});
    for (std::size_t n = 1; n <= N; ++n) {
        for (const auto& aw : admissible_words(ifs, p, n, eps)) {
            auto phi = word_map(ifs, aw.word);
            for (const auto& f : originals)
                if (auto r = detail::restrict_facet(phi.preimage(f), aw.domain))
                    out.facets.push_back({aw.word, std::move(*r)});
        }
    }
    return out;
}

/// Exact fixed point of φ_{σ[0]} ∘ ... ∘ φ_{σ[q-1]}.
inline Point word_fixed_point(const IFS& ifs, const Word& w) {
    if (w.empty()) throw std::invalid_argument("fixed point of the empty word");
    return word_map(ifs, w).fixed_point();
}

/// Shortest u with w = u^k, via the longest proper border of w.
inline Word primitive_root(const Word& w) {
    const std::size_t n = w.size();
    if (n == 0) return w;
    std::vector<std::size_t> border(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t k = border[i - 1];
        while (k > 0 && w[i] != w[k]) k = border[k - 1];
        if (w[i] == w[k]) ++k;
        border[i] = k;
    }
    const std::size_t period = n - border[n - 1];
    if (n % period != 0) return w;
    return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(period));
}

struct Collision {
    Word first;
    Word second;
    std::optional<Word> common_root;   // absent: not powers of one word

    bool violation() const { return !common_root.has_value(); }
};

struct FixedPointEntry {
    Word word;
    Point point;
};

struct FixedPointTable {
    std::vector<FixedPointEntry> entries;   // by length, then lexicographic
    std::vector<Collision> collisions;

    std::size_t violation_count() const {
        return static_cast<std::size_t>(
            std::count_if(collisions.begin(), collisions.end(), [](const Collision& c) { return c.violation(); }));
    }
};

/// Fixed points of every word of length 1..max_length, with all exact
/// coincidences classified by primitive roots.
inline FixedPointTable fixed_point_table(const IFS& ifs, std::size_t max_length) {
    FixedPointTable table;
    std::vector<Word> level{Word{}};
    for (std::size_t len = 1; len <= max_length; ++len) {
        std::vector<Word> next;
        for (const auto& w : level)
            for (std::size_t i = 0; i < ifs.size(); ++i) {
                Word x = w;
                x.push_back(i);
                next.push_back(std::move(x));
            }
        for (const auto& w : next) table.entries.push_back({w, word_fixed_point(ifs, w)});
        level = std::move(next);
    }

    std::vector<std::size_t> order(table.entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.entries[a].point < table.entries[b].point;
    });
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < order.size();) {
        std::size_t e = s + 1;
        while (e < order.size() && table.entries[order[e]].point == table.entries[order[s]].point) ++e;
        std::vector<std::size_t> group(order.begin() + static_cast<std::ptrdiff_t>(s),
                                       order.begin() + static_cast<std::ptrdiff_t>(e));
        std::sort(group.begin(), group.end());
        for (std::size_t i = 0; i < group.size(); ++i)
            for (std::size_t j = i + 1; j < group.size(); ++j) pairs.emplace_back(group[i], group[j]);
        s = e;
    }
    std::sort(pairs.begin(), pairs.end());
    for (auto [a, b] : pairs) {
        const Word& wa = table.entries[a].word;
        const Word& wb = table.entries[b].word;
        Word ra = primitive_root(wa);
        Collision c{wa, wb, std::nullopt};
        if (ra == primitive_root(wb)) c.common_root = std::move(ra);
        table.collisions.push_back(std::move(c));
    }
    return table;
}

/// Generic-position check over all words of length up to N + 1.
inline FixedPointTable separation_check(const IFS& ifs, std::size_t N) {
    if (N == 0) throw std::invalid_argument("separation depth must be at least 1");
    return fixed_point_table(ifs, N + 1);
}

struct BallReturn {
    bool hypothesis = false;   // φ_σ(B_δ(y)) ∩ B_δ(y) ≠ ∅
    bool conclusion = true;    // x_σ ∈ closed B_{c*δ}(y); only meaningful with the hypothesis
    Point fixed_point;
    Rat radius;                // c*·δ
};

/// If the word map returns the open sup-ball B_δ(y) onto itself somewhere,
/// its fixed point lies within c*·δ of y, c* = 2 / (1 - λ).
inline BallReturn ball_return_fixed_point_check(const IFS& ifs, const Word& w, const Point& y, const Rat& delta) {
    if (!(delta > 0)) throw std::invalid_argument("ball radius must be positive");
    Point lo = y, hi = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
        lo[i] -= delta;
        hi[i] += delta;
    }
    Box ball(lo, hi);
    auto phi = word_map(ifs, w);
    BallReturn out;
    out.hypothesis = box_intersect(phi.image(ball), ball).has_value();
    out.fixed_point = phi.fixed_point();
    Rat c_star = Rat{2} / (Rat{1} - ifs.lambda);
    out.radius = c_star * delta;
    if (out.hypothesis) out.conclusion = fatten(Rect::point(y), out.radius).contains(out.fixed_point);
    return out;
}

}  // namespace pwc
