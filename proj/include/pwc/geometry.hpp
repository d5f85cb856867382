#pragma once

#include "pwc/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pwc {

using Point = std::vector<Rat>;

/// Open axis-aligned box (lo, hi) with lo_i < hi_i on every axis.
///
/// The closure [lo, hi] is a derived view; most predicates below state
/// explicitly whether they act on the open box or on its closure.
/// Zero-dimensional boxes exist only as facet cross-sections in d = 1.
class Box {
public:
    Box(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.size() != hi_.size())
            throw std::invalid_argument("box corners have different dimensions");
        for (std::size_t i = 0; i < lo_.size(); ++i)
            if (!(lo_[i] < hi_[i]))
                throw std::invalid_argument("degenerate or inverted box on axis " +
                                            std::to_string(i));
    }

    static Box interval(Rat lo, Rat hi) { return Box(Point{std::move(lo)}, Point{std::move(hi)}); }

    std::size_t dim() const { return lo_.size(); }
    const Point& lo() const { return lo_; }
    const Point& hi() const { return hi_; }
    const Rat& lo(std::size_t axis) const { return lo_[axis]; }
    const Rat& hi(std::size_t axis) const { return hi_[axis]; }

    Rat side(std::size_t axis) const { return hi_[axis] - lo_[axis]; }

    /// Sup-norm diameter of the closure.
    Rat diameter() const {
        Rat d{0};
        for (std::size_t i = 0; i < dim(); ++i) d = std::max(d, side(i));
        return d;
    }

    Rat volume() const {
        Rat v{1};
        for (std::size_t i = 0; i < dim(); ++i) v *= side(i);
        return v;
    }

    Point center() const {
        Point c(dim());
        for (std::size_t i = 0; i < dim(); ++i) c[i] = (lo_[i] + hi_[i]) / 2;
        return c;
    }

    bool contains_open(const Point& x) const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (!(lo_[i] < x[i] && x[i] < hi_[i])) return false;
        return true;
    }

    bool contains_closed(const Point& x) const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (x[i] < lo_[i] || hi_[i] < x[i]) return false;
        return true;
    }

    friend bool operator==(const Box&, const Box&) = default;

    friend bool operator<(const Box& a, const Box& b) {
        if (a.lo_ != b.lo_) return a.lo_ < b.lo_;
        return a.hi_ < b.hi_;
    }

private:
    Point lo_;
    Point hi_;
};

/// Closed axis-aligned rectangle, possibly degenerate on some axes.
/// Carrier for closures of boxes, facets and single points in distance
/// computations.
struct Rect {
    Point lo;
    Point hi;

    static Rect closure(const Box& b) { return {b.lo(), b.hi()}; }
    static Rect point(const Point& x) { return {x, x}; }

    std::size_t dim() const { return lo.size(); }
    bool contains(const Point& x) const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (x[i] < lo[i] || hi[i] < x[i]) return false;
        return true;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Codimension-one axis-aligned rectangle {x_axis = value} x extent, where
/// extent is the open cross-section over the remaining axes (in order).
struct Facet {
    std::size_t axis;
    Rat value;
    Box extent;

    std::size_t dim() const { return extent.dim() + 1; }

    Rect closure() const {
        Rect r;
        r.lo.reserve(dim());
        r.hi.reserve(dim());
        std::size_t k = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            if (i == axis) {
                r.lo.push_back(value);
                r.hi.push_back(value);
            } else {
                r.lo.push_back(extent.lo(k));
                r.hi.push_back(extent.hi(k));
                ++k;
            }
        }
        return r;
    }

    friend bool operator==(const Facet&, const Facet&) = default;

    friend bool operator<(const Facet& a, const Facet& b) {
        if (a.axis != b.axis) return a.axis < b.axis;
        if (a.value != b.value) return a.value < b.value;
        return a.extent < b.extent;
    }
};

inline Box cross_section(const Box& b, std::size_t axis) {
    Point lo, hi;
    for (std::size_t i = 0; i < b.dim(); ++i) {
        if (i == axis) continue;
        lo.push_back(b.lo(i));
        hi.push_back(b.hi(i));
    }
    return Box(std::move(lo), std::move(hi));
}

/// The 2d facets of a box, lower facet before upper facet on each axis.
inline std::vector<Facet> facets(const Box& b) {
    std::vector<Facet> out;
    for (std::size_t axis = 0; axis < b.dim(); ++axis) {
        Box section = cross_section(b, axis);
        out.push_back({axis, b.lo(axis), section});
        out.push_back({axis, b.hi(axis), section});
    }
    return out;
}

inline std::optional<Box> box_intersect(const Box& a, const Box& b) {
    Point lo(a.dim()), hi(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        lo[i] = std::max(a.lo(i), b.lo(i));
        hi[i] = std::min(a.hi(i), b.hi(i));
        if (!(lo[i] < hi[i])) return std::nullopt;
    }
    return Box(std::move(lo), std::move(hi));
}

/// closure(inner) is contained in the open box outer.
inline bool closure_strictly_inside(const Box& inner, const Box& outer) {
    for (std::size_t i = 0; i < inner.dim(); ++i)
        if (!(outer.lo(i) < inner.lo(i) && inner.hi(i) < outer.hi(i))) return false;
    return true;
}

inline bool closure_strictly_inside(const Rect& inner, const Box& outer) {
    for (std::size_t i = 0; i < inner.dim(); ++i)
        if (!(outer.lo(i) < inner.lo[i] && inner.hi[i] < outer.hi(i))) return false;
    return true;
}

/// Non-strict containment of closures; equivalent to open-in-open containment.
inline bool box_inside(const Box& inner, const Box& outer) {
    for (std::size_t i = 0; i < inner.dim(); ++i)
        if (inner.lo(i) < outer.lo(i) || outer.hi(i) < inner.hi(i)) return false;
    return true;
}

/// Sup-norm distance between two closed rectangles.
inline Rat rect_distance(const Rect& a, const Rect& b) {
    Rat d{0};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        Rat gap = std::max(a.lo[i] - b.hi[i], b.lo[i] - a.hi[i]);
        if (gap > d) d = gap;
    }
    return d;
}

/// Sup-norm distance between two finite unions of closed rectangles.
inline Rat set_distance(std::span<const Rect> a, std::span<const Rect> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("set_distance of an empty set");
    std::optional<Rat> best;
    for (const auto& ra : a)
        for (const auto& rb : b) {
            Rat d = rect_distance(ra, rb);
            if (!best || d < *best) best = std::move(d);
        }
    return *best;
}

inline Rat set_distance(const Rect& a, std::span<const Facet> b) {
    std::vector<Rect> rb;
    rb.reserve(b.size());
    for (const auto& f : b) rb.push_back(f.closure());
    return set_distance(std::span<const Rect>(&a, 1), rb);
}

/// Fattens the open box by eps on every side (eps = 0 returns the box).
inline Box fatten(const Box& b, const Rat& eps) {
    Point lo = b.lo(), hi = b.hi();
    for (std::size_t i = 0; i < b.dim(); ++i) {
        lo[i] -= eps;
        hi[i] += eps;
    }
    return Box(std::move(lo), std::move(hi));
}

inline Rect fatten(const Rect& r, const Rat& eps) {
    Rect out = r;
    for (std::size_t i = 0; i < r.dim(); ++i) {
        out.lo[i] -= eps;
        out.hi[i] += eps;
    }
    return out;
}

/// Decides closure(target) ⊂ ∪ closure(cover_i) exactly.
///
/// Compresses coordinates to the breakpoints of the cover inside target;
/// every elementary sub-box is then either inside a cover box or disjoint
/// from its interior, which its midpoint decides.
inline bool closed_union_contains(const Box& target, std::span<const Box> cover) {
    for (const auto& c : cover)
        if (box_inside(target, c)) return true;

    const std::size_t d = target.dim();
    std::vector<std::vector<Rat>> cuts(d);
    for (std::size_t i = 0; i < d; ++i) {
        cuts[i] = {target.lo(i), target.hi(i)};
        for (const auto& c : cover) {
            if (target.lo(i) < c.lo(i) && c.lo(i) < target.hi(i)) cuts[i].push_back(c.lo(i));
            if (target.lo(i) < c.hi(i) && c.hi(i) < target.hi(i)) cuts[i].push_back(c.hi(i));
        }
        std::sort(cuts[i].begin(), cuts[i].end());
        cuts[i].erase(std::unique(cuts[i].begin(), cuts[i].end()), cuts[i].end());
    }
    std::vector<std::size_t> idx(d, 0);
    Point mid(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i) mid[i] = (cuts[i][idx[i]] + cuts[i][idx[i] + 1]) / 2;
        bool hit = std::any_of(cover.begin(), cover.end(),
                               [&](const Box& c) { return c.contains_closed(mid); });
        if (!hit) return false;
        std::size_t axis = 0;
        while (axis < d && ++idx[axis] + 1 >= cuts[axis].size()) idx[axis++] = 0;
        if (axis == d) return true;
    }
}

/// Finite partition of a closed domain box into open boxes.
class Partition {
public:
    Partition(Box domain, std::vector<Box> elements)
        : domain_(std::move(domain)), elements_(std::move(elements)) {
        if (elements_.empty()) throw std::invalid_argument("partition needs at least one element");
        for (const auto& e : elements_)
            if (e.dim() != domain_.dim())
                throw std::invalid_argument("partition element dimension mismatch");
        for (const auto& e : elements_)
            for (auto& f : facets(e)) boundary_.push_back(std::move(f));
        std::sort(boundary_.begin(), boundary_.end());
        boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());
        boundary_with_domain_ = boundary_;
        for (auto& f : facets(domain_)) boundary_with_domain_.push_back(std::move(f));
        std::sort(boundary_with_domain_.begin(), boundary_with_domain_.end());
        boundary_with_domain_.erase(
            std::unique(boundary_with_domain_.begin(), boundary_with_domain_.end()),
            boundary_with_domain_.end());
    }

    const Box& domain() const { return domain_; }
    const std::vector<Box>& elements() const { return elements_; }
    const Box& element(std::size_t i) const { return elements_[i]; }
    std::size_t size() const { return elements_.size(); }
    std::size_t dim() const { return domain_.dim(); }

    /// ∂P(f): union of the element boundaries, as deduplicated facets.
    const std::vector<Facet>& boundary() const { return boundary_; }
    /// Δ(f) = ∂P(f) ∪ ∂X.
    const std::vector<Facet>& boundary_with_domain() const { return boundary_with_domain_; }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.domain_ == b.domain_ && a.elements_ == b.elements_;
    }

private:
    Box domain_;
    std::vector<Box> elements_;
    std::vector<Facet> boundary_;
    std::vector<Facet> boundary_with_domain_;
};

enum class ViolationKind {
    Overlap,
    Uncovered,
    ElementOutsideDomain,
    PieceCountMismatch,
    DimensionMismatch,
    NotContracting,
    NotInjective,
    ImageEscapes,
};

inline std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::Overlap: return "Overlap";
        case ViolationKind::Uncovered: return "Uncovered";
        case ViolationKind::ElementOutsideDomain: return "ElementOutsideDomain";
        case ViolationKind::PieceCountMismatch: return "PieceCountMismatch";
        case ViolationKind::DimensionMismatch: return "DimensionMismatch";
        case ViolationKind::NotContracting: return "NotContracting";
        case ViolationKind::NotInjective: return "NotInjective";
        case ViolationKind::ImageEscapes: return "ImageEscapes";
    }
    return "Unknown";
}

/// One failed validation predicate. Indices are 0-based element/piece indices.
struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> first;
    std::optional<std::size_t> second;
    std::optional<Rect> witness;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
};

/// Exact check of pairwise disjointness and covering of closure(domain).
///
/// Covering is decided by coordinate compression over all element
/// endpoints, so an uncovered witness is the midpoint of an elementary
/// sub-box that no element closure reaches.
inline ValidationReport validate_partition(const Partition& p) {
    ValidationReport report;
    const auto& els = p.elements();
    for (std::size_t i = 0; i < els.size(); ++i)
        if (!box_inside(els[i], p.domain()))
            report.violations.push_back({ViolationKind::ElementOutsideDomain, i, std::nullopt,
                                         Rect::closure(els[i])});
    for (std::size_t i = 0; i < els.size(); ++i)
        for (std::size_t j = i + 1; j < els.size(); ++j)
            if (auto overlap = box_intersect(els[i], els[j]))
                report.violations.push_back(
                    {ViolationKind::Overlap, i, j, Rect::closure(*overlap)});

    const std::size_t d = p.dim();
    std::vector<std::vector<Rat>> cuts(d);
    for (std::size_t a = 0; a < d; ++a) {
        cuts[a] = {p.domain().lo(a), p.domain().hi(a)};
        for (const auto& e : els)
            for (const Rat* v : {&e.lo(a), &e.hi(a)})
                if (p.domain().lo(a) < *v && *v < p.domain().hi(a)) cuts[a].push_back(*v);
        std::sort(cuts[a].begin(), cuts[a].end());
        cuts[a].erase(std::unique(cuts[a].begin(), cuts[a].end()), cuts[a].end());
    }
    std::vector<std::size_t> idx(d, 0);
    Point mid(d);
    while (true) {
        for (std::size_t a = 0; a < d; ++a) mid[a] = (cuts[a][idx[a]] + cuts[a][idx[a] + 1]) / 2;
        bool covered = std::any_of(els.begin(), els.end(),
                                   [&](const Box& e) { return e.contains_open(mid); });
        if (!covered) {
            report.violations.push_back(
                {ViolationKind::Uncovered, std::nullopt, std::nullopt, Rect::point(mid)});
            break;
        }
        std::size_t axis = 0;
        while (axis < d && ++idx[axis] + 1 >= cuts[axis].size()) idx[axis++] = 0;
        if (axis == d) break;
    }
    return report;
}

/// Number of distinct axis-aligned hyperplanes carrying boundary facets.
inline std::size_t boundary_hyperplane_count(const Partition& p) {
    std::vector<std::pair<std::size_t, Rat>> planes;
    for (const auto& f : p.boundary_with_domain()) planes.emplace_back(f.axis, f.value);
    std::sort(planes.begin(), planes.end());
    planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
    return planes.size();
}

}  // namespace pwc
