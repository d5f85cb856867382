#pragma once

#include "pwc/geometry.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace pwc {

class OutsideDomain : public Error {
public:
    OutsideDomain() : Error("point lies outside the closed domain") {}
};

/// x ↦ diag(scale)·x + offset, defined on all of R^d.
///
/// Images and preimages of boxes are boxes; a negative scale swaps the
/// corresponding lo/hi pair.
class DiagonalAffineMap {
public:
    DiagonalAffineMap() = default;
    DiagonalAffineMap(Point scale, Point offset) : scale_(std::move(scale)), offset_(std::move(offset)) {
        if (scale_.size() != offset_.size())
            throw std::invalid_argument("scale and offset have different dimensions");
    }

    static DiagonalAffineMap identity(std::size_t d) {
        return DiagonalAffineMap(Point(d, Rat{1}), Point(d, Rat{0}));
    }

    std::size_t dim() const { return scale_.size(); }
    const Point& scale() const { return scale_; }
    const Point& offset() const { return offset_; }

    /// Contraction coefficient in the sup-norm: max |scale_i|.
    Rat lipschitz() const {
        Rat l{0};
        for (const auto& s : scale_) l = std::max(l, abs(s));
        return l;
    }

    bool injective() const {
        for (const auto& s : scale_)
            if (s == 0) return false;
        return true;
    }

    Point operator()(const Point& x) const {
        Point y(dim());
        for (std::size_t i = 0; i < dim(); ++i) y[i] = scale_[i] * x[i] + offset_[i];
        return y;
    }

    Point inverse(const Point& y) const {
        Point x(dim());
        for (std::size_t i = 0; i < dim(); ++i) x[i] = (y[i] - offset_[i]) / scale_[i];
        return x;
    }

    Rect image(const Rect& r) const {
        Rect out{Point(dim()), Point(dim())};
        for (std::size_t i = 0; i < dim(); ++i) {
            Rat a = scale_[i] * r.lo[i] + offset_[i];
            Rat b = scale_[i] * r.hi[i] + offset_[i];
            if (b < a) std::swap(a, b);
            out.lo[i] = std::move(a);
            out.hi[i] = std::move(b);
        }
        return out;
    }

    /// Image of an open box; requires injectivity.
    Box image(const Box& b) const {
        Rect r = image(Rect::closure(b));
        return Box(std::move(r.lo), std::move(r.hi));
    }

    Rect preimage(const Rect& r) const {
        Rect out{Point(dim()), Point(dim())};
        for (std::size_t i = 0; i < dim(); ++i) {
            Rat a = (r.lo[i] - offset_[i]) / scale_[i];
            Rat b = (r.hi[i] - offset_[i]) / scale_[i];
            if (b < a) std::swap(a, b);
            out.lo[i] = std::move(a);
            out.hi[i] = std::move(b);
        }
        return out;
    }

    Box preimage(const Box& b) const {
        Rect r = preimage(Rect::closure(b));
        return Box(std::move(r.lo), std::move(r.hi));
    }

    /// Preimage of a facet: the axis is preserved, the value and the
    /// cross-section are pulled back componentwise.
    Facet preimage(const Facet& f) const {
        Point lo, hi;
        std::size_t k = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            if (i == f.axis) continue;
            Rat a = (f.extent.lo(k) - offset_[i]) / scale_[i];
            Rat b = (f.extent.hi(k) - offset_[i]) / scale_[i];
            if (b < a) std::swap(a, b);
            lo.push_back(std::move(a));
            hi.push_back(std::move(b));
            ++k;
        }
        Rat v = (f.value - offset_[f.axis]) / scale_[f.axis];
        return Facet{f.axis, std::move(v), Box(std::move(lo), std::move(hi))};
    }

    /// The unique fixed point, componentwise offset_i / (1 - scale_i).
    Point fixed_point() const {
        Point x(dim());
        for (std::size_t i = 0; i < dim(); ++i) x[i] = offset_[i] / (Rat{1} - scale_[i]);
        return x;
    }

    DiagonalAffineMap translated(const Point& delta) const {
        Point off = offset_;
        for (std::size_t i = 0; i < dim(); ++i) off[i] += delta[i];
        return DiagonalAffineMap(scale_, std::move(off));
    }

    friend bool operator==(const DiagonalAffineMap&, const DiagonalAffineMap&) = default;

private:
    Point scale_;
    Point offset_;
};

/// outer ∘ inner.
inline DiagonalAffineMap compose(const DiagonalAffineMap& outer, const DiagonalAffineMap& inner) {
    Point s(outer.dim()), o(outer.dim());
    for (std::size_t i = 0; i < outer.dim(); ++i) {
        s[i] = outer.scale()[i] * inner.scale()[i];
        o[i] = outer.scale()[i] * inner.offset()[i] + outer.offset()[i];
    }
    return DiagonalAffineMap(std::move(s), std::move(o));
}

/// Which adjacent element owns a point on a shared facet.
enum class BoundaryRule {
    LowestIndex,
};

/// f: X → X, affine on each element of its partition.
///
/// Construction only checks shapes; use validate() for the contraction,
/// injectivity and f(X) ⊂ interior(X) conditions.
class PiecewiseContraction {
public:
    PiecewiseContraction(Partition partition, std::vector<DiagonalAffineMap> pieces,
                         BoundaryRule rule = BoundaryRule::LowestIndex)
        : partition_(std::move(partition)), pieces_(std::move(pieces)), rule_(rule) {
        if (pieces_.size() != partition_.size())
            throw std::invalid_argument("one piece map per partition element is required");
        for (const auto& p : pieces_)
            if (p.dim() != partition_.dim())
                throw std::invalid_argument("piece map dimension mismatch");
    }

    const Partition& partition() const { return partition_; }
    const Box& domain() const { return partition_.domain(); }
    const std::vector<DiagonalAffineMap>& pieces() const { return pieces_; }
    const DiagonalAffineMap& piece(std::size_t i) const { return pieces_[i]; }
    BoundaryRule boundary_rule() const { return rule_; }
    std::size_t size() const { return pieces_.size(); }
    std::size_t dim() const { return partition_.dim(); }

    Rat lambda() const {
        Rat l{0};
        for (const auto& p : pieces_) l = std::max(l, p.lipschitz());
        return l;
    }

    /// Element that owns x under the boundary rule, or nullopt outside closure(X).
    std::optional<std::size_t> owner(const Point& x) const {
        if (x.size() != dim() || !domain().contains_closed(x)) return std::nullopt;
        for (std::size_t i = 0; i < size(); ++i)
            if (partition_.element(i).contains_open(x)) return i;
        for (std::size_t i = 0; i < size(); ++i)
            if (partition_.element(i).contains_closed(x)) return i;
        return std::nullopt;
    }

private:
    Partition partition_;
    std::vector<DiagonalAffineMap> pieces_;
    BoundaryRule rule_;
};

/// Validates the partition and then every piece: λ < 1, nonzero scales,
/// and closure(φ_i(P_i)) strictly inside the open domain.
inline ValidationReport validate(const PiecewiseContraction& f) {
    ValidationReport report = validate_partition(f.partition());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& phi = f.piece(i);
        if (!(phi.lipschitz() < 1))
            report.violations.push_back({ViolationKind::NotContracting, i, std::nullopt, std::nullopt});
        if (!phi.injective()) {
            report.violations.push_back({ViolationKind::NotInjective, i, std::nullopt, std::nullopt});
            continue;
        }
        Rect img = phi.image(Rect::closure(f.partition().element(i)));
        if (!closure_strictly_inside(img, f.domain()))
            report.violations.push_back({ViolationKind::ImageEscapes, i, std::nullopt, img});
    }
    return report;
}

/// Smallest sup-norm gap between closure(φ_i(P_i)) and ∂X over all pieces.
/// Translations with |δ| below this value keep f valid.
inline Rat validation_margin(const PiecewiseContraction& f) {
    std::optional<Rat> best;
    for (std::size_t i = 0; i < f.size(); ++i) {
        Rect img = f.piece(i).image(Rect::closure(f.partition().element(i)));
        for (std::size_t a = 0; a < f.dim(); ++a) {
            Rat gap = std::min(img.lo[a] - f.domain().lo(a), f.domain().hi(a) - img.hi[a]);
            if (!best || gap < *best) best = gap;
        }
    }
    return *best;
}

inline Point evaluate(const PiecewiseContraction& f, const Point& x) {
    auto i = f.owner(x);
    if (!i) throw OutsideDomain();
    return f.piece(*i)(x);
}

struct OrbitSegment {
    Point start;
    std::vector<Point> points;            // points[0] == start, n + 1 entries
    std::vector<std::size_t> itinerary;   // owning element of points[k], n entries
};

inline OrbitSegment orbit(const PiecewiseContraction& f, const Point& x, std::size_t n) {
    OrbitSegment seg{x, {x}, {}};
    seg.points.reserve(n + 1);
    seg.itinerary.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto i = f.owner(seg.points.back());
        if (!i) throw OutsideDomain();
        seg.itinerary.push_back(*i);
        seg.points.push_back(f.piece(*i)(seg.points.back()));
    }
    return seg;
}

}  // namespace pwc
