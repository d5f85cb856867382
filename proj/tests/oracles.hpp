#pragma once

// Independent reference computations used to cross-check the library.
// They deliberately avoid the library's box algebra: orbits are sampled
// pointwise, roots are found by trial division, fixed points by iteration.

#include "pwc/pwc.hpp"

#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace pwc::oracle {

/// Length-n itineraries of sample points whose orbits stay in open elements,
/// grouped with the sampled points realizing them.
inline std::map<Word, std::vector<Point>> sampled_itineraries(const PiecewiseContraction& f, std::size_t n,
                                                              long grid) {
    std::map<Word, std::vector<Point>> out;
    const std::size_t d = f.dim();
    std::vector<long> k(d, 1);
    for (;;) {
        Point x(d);
        for (std::size_t a = 0; a < d; ++a)
            x[a] = f.domain().lo(a) + f.domain().side(a) * Rat(2 * k[a] - 1, 2 * grid);
        Word w;
        Point y = x;
        bool clean = true;
        for (std::size_t s = 0; s < n && clean; ++s) {
            std::optional<std::size_t> hit;
            for (std::size_t i = 0; i < f.size(); ++i)
                if (f.partition().element(i).contains_open(y)) hit = i;
            if (!hit) clean = false;
            else {
                w.push_back(*hit);
                y = f.piece(*hit)(y);
            }
        }
        if (clean) out[w].push_back(x);
        std::size_t a = 0;
        while (a < d && ++k[a] > grid) k[a++] = 1;
        if (a == d) break;
    }
    return out;
}

/// Shortest u with w = u^k by trying every period that divides |w|.
inline Word primitive_root(const Word& w) {
    for (std::size_t p = 1; p <= w.size(); ++p) {
        if (w.size() % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < w.size() && ok; ++i) ok = w[i] == w[i - p];
        if (ok) return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
    }
    return w;
}

/// Fixed point of φ_{w[0]} ∘ ... ∘ φ_{w[q-1]} by floating-point iteration.
inline std::vector<double> iterated_fixed_point(const std::vector<DiagonalAffineMap>& maps, const Word& w) {
    const std::size_t d = maps.front().dim();
    std::vector<double> x(d, 0.0);
    for (int it = 0; it < 2000; ++it)
        for (auto l = w.rbegin(); l != w.rend(); ++l)
            for (std::size_t a = 0; a < d; ++a)
                x[a] = to_double(maps[*l].scale()[a]) * x[a] + to_double(maps[*l].offset()[a]);
    return x;
}

/// Sup-norm of f - g sampled on a grid over the shared domain (d = 1).
inline double sampled_sup_distance(const PiecewiseContraction& f, const PiecewiseContraction& g, long grid) {
    double best = 0;
    for (long k = 0; k <= grid; ++k) {
        Point x{f.domain().lo(0) + f.domain().side(0) * Rat(k, grid)};
        best = std::max(best, std::fabs(to_double(evaluate(f, x)[0] - evaluate(g, x)[0])));
    }
    return best;
}

}  // namespace pwc::oracle
