#pragma once

#include "pwc/dynamics.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace pwc {

/// Sequence of 0-based element indices. Cells of refined partitions use
/// itinerary order: letter k is the element visited after k steps.
using Word = std::vector<std::size_t>;

class NotMarkov : public Error {
public:
    NotMarkov() : Error("map did not stabilise within the analysis budget") {}
};

/// One cell of P(f^n): the points whose length-n itinerary is `word`,
/// together with f^n restricted to it.
struct Cell {
    Word word;
    Box region;
    DiagonalAffineMap map;   // φ_{word[n-1]} ∘ ... ∘ φ_{word[0]}
};

struct RefinedPartition {
    std::size_t depth = 0;
    std::vector<Cell> cells;   // lexicographic in word

    std::size_t size() const { return cells.size(); }

    std::optional<std::size_t> find(const Word& w) const {
        auto it = std::lower_bound(cells.begin(), cells.end(), w,
                                   [](const Cell& c, const Word& key) { return c.word < key; });
        if (it == cells.end() || it->word != w) return std::nullopt;
        return static_cast<std::size_t>(it - cells.begin());
    }
};

/// Incrementally builds and caches P(f^n) for increasing n.
///
/// P(f^{n+1}) splits each cell C of P(f^n) by the preimages of the
/// elements under f^n|_C, which equals
/// P_{σ0} ∩ f^{-1}(P_{σ1}) ∩ ... ∩ f^{-n}(P_{σn}); empty pieces are dropped.
class Refiner {
public:
    explicit Refiner(const PiecewiseContraction& f) : f_(&f) {}

    const PiecewiseContraction& map() const { return *f_; }

    const RefinedPartition& at(std::size_t n) {
        if (n == 0) throw std::invalid_argument("refinement depth must be at least 1");
        if (levels_.empty()) {
            RefinedPartition first{1, {}};
            for (std::size_t i = 0; i < f_->size(); ++i)
                first.cells.push_back({Word{i}, f_->partition().element(i), f_->piece(i)});
            levels_.push_back(std::move(first));
        }
        while (levels_.size() < n) levels_.push_back(next(levels_.back()));
        return levels_[n - 1];
    }

private:
    RefinedPartition next(const RefinedPartition& prev) const {
        RefinedPartition out{prev.depth + 1, {}};
        for (const auto& cell : prev.cells) {
            Box image = cell.map.image(cell.region);
            for (std::size_t j = 0; j < f_->size(); ++j) {
                const Box& target = f_->partition().element(j);
                if (!box_intersect(image, target)) continue;
                auto sub = box_intersect(cell.region, cell.map.preimage(target));
                if (!sub) continue;
                Word w = cell.word;
                w.push_back(j);
                out.cells.push_back({std::move(w), std::move(*sub), compose(f_->piece(j), cell.map)});
            }
        }
        return out;
    }

    const PiecewiseContraction* f_;
    std::vector<RefinedPartition> levels_;
};

inline RefinedPartition refine(const PiecewiseContraction& f, std::size_t n) {
    Refiner r(f);
    return r.at(n);
}

/// closure(f^n(X)) is covered by the f^n-images of the cells of P(f^n).
inline std::vector<Box> image_cover(const PiecewiseContraction& f, std::size_t n) {
    std::vector<Box> out;
    for (const auto& c : refine(f, n).cells) out.push_back(c.map.image(c.region));
    return out;
}

struct StabilisationFailure {
    std::size_t cell;
    Rect image_closure;
    Facet touched;   // a facet of the first cell the image closure meets
};

struct StabilisationCheck {
    std::vector<std::size_t> targets;   // cell -> cell with closure(f^N(P)) ⊂ Q, when passed
    std::optional<StabilisationFailure> failure;

    bool passed() const { return !failure.has_value(); }
};

inline StabilisationCheck stabilisation_check(const RefinedPartition& part) {
    StabilisationCheck out;
    out.targets.reserve(part.size());
    for (std::size_t i = 0; i < part.size(); ++i) {
        const auto& cell = part.cells[i];
        Rect img = cell.map.image(Rect::closure(cell.region));
        std::optional<std::size_t> target;
        std::optional<std::size_t> first_touch;
        for (std::size_t j = 0; j < part.size(); ++j) {
            const Box& q = part.cells[j].region;
            if (closure_strictly_inside(img, q)) {
                target = j;
                break;
            }
            if (!first_touch && box_intersect(Box(img.lo, img.hi), q)) first_touch = j;
        }
        if (target) {
            out.targets.push_back(*target);
            continue;
        }
        const Box& q = part.cells[first_touch.value_or(0)].region;
        std::optional<Facet> touched;
        for (auto& facet : facets(q)) {
            const Rat& v = facet.value;
            const std::size_t a = facet.axis;
            bool lower = v == q.lo(a);
            if ((lower && img.lo[a] <= v) || (!lower && img.hi[a] >= v)) {
                touched = std::move(facet);
                break;
            }
        }
        out.targets.clear();
        out.failure = StabilisationFailure{i, std::move(img), std::move(*touched)};
        return out;
    }
    return out;
}

inline StabilisationCheck stabilisation_check(const PiecewiseContraction& f, std::size_t n) {
    return stabilisation_check(refine(f, n));
}

/// Result of the bounded stabilisation search.
struct MarkovReport {
    enum class Status { Markov, NotStabilisedWithin };

    Status status = Status::NotStabilisedWithin;
    std::size_t time = 0;                   // N when Markov, N_max otherwise
    std::vector<std::size_t> targets;       // Markov witness over the cells of P(f^N)
    std::optional<StabilisationFailure> failure;   // witness at depth N_max

    bool is_markov() const { return status == Status::Markov; }
};

inline MarkovReport detect_markov(Refiner& refiner, std::size_t n_max) {
    if (n_max == 0) throw std::invalid_argument("N_max must be at least 1");
    MarkovReport report;
    for (std::size_t n = 1; n <= n_max; ++n) {
        auto check = stabilisation_check(refiner.at(n));
        if (check.passed()) {
            report.status = MarkovReport::Status::Markov;
            report.time = n;
            report.targets = std::move(check.targets);
            return report;
        }
        if (n == n_max) report.failure = std::move(check.failure);
    }
    report.time = n_max;
    return report;
}

inline MarkovReport detect_markov(const PiecewiseContraction& f, std::size_t n_max = 50) {
    Refiner r(f);
    return detect_markov(r, n_max);
}

/// Induced cell dynamics on P(f^N) for a stabilised map.
struct SymbolicModel {
    std::size_t depth = 0;
    std::vector<std::size_t> next;
    std::vector<std::size_t> nonwandering;
    std::vector<std::size_t> wandering;
    std::vector<std::vector<std::size_t>> cycles;   // each rotated to start at its smallest index

    std::size_t cell_count() const { return next.size(); }
};

/// Cycles of a total self-map of {0..l-1}, each starting at its minimum,
/// sorted by that minimum.
inline std::vector<std::vector<std::size_t>> functional_graph_cycles(const std::vector<std::size_t>& next) {
    const std::size_t l = next.size();
    std::vector<int> state(l, 0);   // 0 unseen, 1 on current path, 2 done
    std::vector<std::vector<std::size_t>> cycles;
    for (std::size_t s = 0; s < l; ++s) {
        if (state[s] != 0) continue;
        std::vector<std::size_t> path;
        std::size_t v = s;
        while (state[v] == 0) {
            state[v] = 1;
            path.push_back(v);
            v = next[v];
        }
        if (state[v] == 1) {
            auto it = std::find(path.begin(), path.end(), v);
            std::vector<std::size_t> cyc(it, path.end());
            std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
            cycles.push_back(std::move(cyc));
        }
        for (auto u : path) state[u] = 2;
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

/// next(i) = j iff f(cell_i) ⊂ cell_j, verified exactly and required unique.
inline SymbolicModel symbolic_model(const RefinedPartition& part, const PiecewiseContraction& f) {
    SymbolicModel model;
    model.depth = part.depth;
    model.next.resize(part.size());
    for (std::size_t i = 0; i < part.size(); ++i) {
        const auto& cell = part.cells[i];
        Box img = f.piece(cell.word.front()).image(cell.region);
        std::optional<std::size_t> hit;
        for (std::size_t j = 0; j < part.size(); ++j) {
            if (!box_inside(img, part.cells[j].region)) continue;
            if (hit) throw std::logic_error("cell image lies in two cells");
            hit = j;
        }
        if (!hit) throw NotMarkov();
        model.next[i] = *hit;
    }
    model.cycles = functional_graph_cycles(model.next);
    std::vector<bool> on_cycle(part.size(), false);
    for (const auto& c : model.cycles)
        for (auto v : c) on_cycle[v] = true;
    for (std::size_t i = 0; i < part.size(); ++i)
        (on_cycle[i] ? model.nonwandering : model.wandering).push_back(i);
    return model;
}

inline SymbolicModel symbolic_model(const PiecewiseContraction& f, std::size_t n_max = 50) {
    Refiner r(f);
    auto report = detect_markov(r, n_max);
    if (!report.is_markov()) throw NotMarkov();
    return symbolic_model(r.at(report.time), f);
}

struct PeriodicOrbit {
    std::size_t period = 0;
    std::vector<Point> points;
    std::vector<std::size_t> cycle;   // cells of P(f^N), aligned with points
};

struct AttractorReport {
    std::size_t stabilisation_time = 0;
    std::vector<PeriodicOrbit> orbits;
    Rat min_distance_to_delta;
};

/// Periodic attractor of a Markov map: one orbit per cycle of the symbolic
/// model, solved exactly from the composed affine map along the cycle.
inline AttractorReport attractor(const PiecewiseContraction& f, std::size_t n_max = 50) {
    Refiner r(f);
    auto markov = detect_markov(r, n_max);
    if (!markov.is_markov()) throw NotMarkov();
    const auto& part = r.at(markov.time);
    auto model = symbolic_model(part, f);

    AttractorReport report;
    report.stabilisation_time = markov.time;
    std::vector<Rect> delta;
    for (const auto& facet : f.partition().boundary_with_domain()) delta.push_back(facet.closure());

    std::optional<Rat> min_dist;
    for (const auto& cyc : model.cycles) {
        auto composed = DiagonalAffineMap::identity(f.dim());
        for (auto c : cyc) composed = compose(f.piece(part.cells[c].word.front()), composed);
        PeriodicOrbit orb;
        orb.period = cyc.size();
        orb.cycle = cyc;
        Point x = composed.fixed_point();
        for (auto c : cyc) {
            if (!part.cells[c].region.contains_open(x))
                throw std::logic_error("periodic point escaped its cell");
            Rect pt = Rect::point(x);
            Rat d = set_distance(std::span<const Rect>(&pt, 1), delta);
            if (!min_dist || d < *min_dist) min_dist = d;
            orb.points.push_back(x);
            x = f.piece(part.cells[c].word.front())(x);
        }
        if (x != orb.points.front()) throw std::logic_error("periodic orbit does not close");
        report.orbits.push_back(std::move(orb));
    }
    report.min_distance_to_delta = min_dist.value_or(Rat{0});
    return report;
}

/// Largest number of cells of the partition whose closures share a point.
///
/// Any nonempty intersection of closed boxes is a box whose lower corner
/// has coordinates drawn from the cells' lower corners, so it suffices to
/// probe that product grid.
inline std::size_t max_cells_meeting_at_point(const RefinedPartition& part) {
    if (part.cells.empty()) return 0;
    const std::size_t d = part.cells.front().region.dim();
    std::vector<std::vector<Rat>> coords(d);
    for (std::size_t a = 0; a < d; ++a) {
        for (const auto& c : part.cells) {
            coords[a].push_back(c.region.lo(a));
            coords[a].push_back(c.region.hi(a));
        }
        std::sort(coords[a].begin(), coords[a].end());
        coords[a].erase(std::unique(coords[a].begin(), coords[a].end()), coords[a].end());
    }
    std::size_t best = 0;
    std::vector<std::size_t> idx(d, 0);
    Point x(d);
    while (true) {
        for (std::size_t a = 0; a < d; ++a) x[a] = coords[a][idx[a]];
        std::size_t count = 0;
        for (const auto& c : part.cells)
            if (c.region.contains_closed(x)) ++count;
        best = std::max(best, count);
        std::size_t axis = 0;
        while (axis < d && ++idx[axis] >= coords[axis].size()) idx[axis++] = 0;
        if (axis == d) break;
    }
    return best;
}

}  // namespace pwc
