#pragma once

#include "pwc/ifs.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace pwc {

class InvalidMap : public Error {
public:
    explicit InvalidMap(ValidationReport report)
        : Error("map fails validation: " + to_string(report.violations.front().kind)),
          report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

class RadiusTooLarge : public Error {
public:
    RadiusTooLarge() : Error("bump radius must satisfy a*delta^2 < 1") {}
};

class NotContracting : public Error {
public:
    NotContracting() : Error("word map has no contraction certificate below 1") {}
};

/// f^δ: every piece offset shifted by δ, partition unchanged.
inline PiecewiseContraction translate(const PiecewiseContraction& f, const Point& delta) {
    if (delta.size() != f.dim()) throw std::invalid_argument("translation dimension mismatch");
    std::vector<DiagonalAffineMap> pieces;
    pieces.reserve(f.size());
    for (const auto& p : f.pieces()) pieces.push_back(p.translated(delta));
    PiecewiseContraction g(f.partition(), std::move(pieces), f.boundary_rule());
    auto report = validate(g);
    if (!report.ok()) throw InvalidMap(std::move(report));
    return g;
}

/// Least p ≤ p_max with λ^p · #P(f^p) < 1/2.
inline std::optional<std::size_t> strong_contraction_exponent(const PiecewiseContraction& f, std::size_t p_max) {
    if (p_max == 0) throw std::invalid_argument("p_max must be at least 1");
    Refiner r(f);
    const Rat lambda = f.lambda();
    Rat lp{1};
    for (std::size_t p = 1; p <= p_max; ++p) {
        lp *= lambda;
        if (lp * r.at(p).size() < Rat(1, 2)) return p;
    }
    return std::nullopt;
}

/// 2^{d·m^{d-1}·l₁} with l₁ = max{l₀, d}, l₀ the number of boundary
/// hyperplanes (domain included).
inline BigInt complexity_bound(const PiecewiseContraction& f) {
    const std::size_t d = f.dim();
    const std::size_t l1 = std::max(boundary_hyperplane_count(f.partition()), d);
    BigInt exponent = BigInt(d) * boost::multiprecision::pow(BigInt(f.size()), static_cast<unsigned>(d - 1)) * l1;
    return BigInt(1) << exponent.convert_to<unsigned>();
}

/// Parallelism cap from PWC_THREADS; absent or invalid means one thread.
inline std::size_t thread_count() {
    const char* env = std::getenv("PWC_THREADS");
    if (!env) return 1;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<std::size_t>(v);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write
/// results by index, so output never depends on scheduling.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Per-trial seed: a splitmix64 finaliser over (seed, index).
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform integer in [lo, hi] by rejection; unlike the standard
/// distributions, the sequence is the same on every platform.
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(rng());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
}

constexpr std::int64_t default_grid = std::int64_t{1} << 20;

/// Translation for trial `index`: zero for index 0, otherwise uniform over
/// the grid {j/G · ε : |j| < G} in each coordinate.
inline Point sample_delta(std::uint64_t seed, std::size_t index, const Rat& eps, std::size_t d,
                          std::int64_t grid = default_grid) {
    Point delta(d, Rat{0});
    if (index == 0) return delta;
    std::mt19937_64 rng(trial_seed(seed, index));
    for (auto& c : delta) c = Rat(uniform_int(rng, -(grid - 1), grid - 1), grid) * eps;
    return delta;
}

struct Trial {
    std::size_t index = 0;
    Point delta;
    MarkovReport outcome;
};

struct MonteCarloReport {
    std::size_t trials = 0;
    std::size_t markov_count = 0;
    Rat fraction;
    std::vector<Trial> per_trial;
    std::uint64_t seed = 0;
    Rat epsilon;
    std::size_t n_max = 0;
    std::int64_t grid = default_grid;
};

namespace detail {

inline void check_epsilon(const PiecewiseContraction& f, const Rat& eps) {
    if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
    if (eps > validation_margin(f))
        throw std::invalid_argument("epsilon exceeds the validation margin " + to_string(validation_margin(f)));
}

inline Trial run_trial(const PiecewiseContraction& f, const Rat& eps, std::size_t n_max, std::uint64_t seed,
                       std::size_t index, std::int64_t grid) {
    Trial t{index, sample_delta(seed, index, eps, f.dim(), grid), {}};
    t.outcome = detect_markov(translate(f, t.delta), n_max);
    return t;
}

inline void summarise(MonteCarloReport& r) {
    r.trials = r.per_trial.size();
    r.markov_count = 0;
    for (const auto& t : r.per_trial) r.markov_count += t.outcome.is_markov();
    r.fraction = r.trials == 0 ? Rat{0} : Rat(r.markov_count) / r.trials;
}

}  // namespace detail

/// Seeded sweep of translations in the ε-ball; per-trial results are
/// independent of the thread count.
inline MonteCarloReport genericity_sweep(const PiecewiseContraction& f, const Rat& eps, std::size_t n_max,
                                         std::size_t samples, std::uint64_t seed,
                                         std::size_t threads = thread_count(), std::int64_t grid = default_grid) {
    detail::check_epsilon(f, eps);
    MonteCarloReport report;
    report.seed = seed;
    report.epsilon = eps;
    report.n_max = n_max;
    report.grid = grid;
    report.per_trial.resize(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
        report.per_trial[i] = detail::run_trial(f, eps, n_max, seed, i, grid);
    });
    detail::summarise(report);
    return report;
}

struct MarkovifyResult {
    std::optional<Trial> success;   // first Markov trial in index order
    MonteCarloReport tried;         // every trial up to and including the success

    bool found() const { return success.has_value(); }
};

/// Tries translations in trial order and stops at the first Markov one.
/// Batches of `threads` trials run concurrently; the lowest successful
/// index wins, so the answer matches the sequential search.
inline MarkovifyResult markovify_search(const PiecewiseContraction& f, const Rat& eps, std::size_t n_max,
                                        std::size_t trials, std::uint64_t seed,
                                        std::size_t threads = thread_count(), std::int64_t grid = default_grid) {
    detail::check_epsilon(f, eps);
    MarkovifyResult result;
    auto& rep = result.tried;
    rep.seed = seed;
    rep.epsilon = eps;
    rep.n_max = n_max;
    rep.grid = grid;
    const std::size_t batch = std::max<std::size_t>(threads, 1);
    for (std::size_t start = 0; start < trials && !result.found(); start += batch) {
        const std::size_t count = std::min(batch, trials - start);
        std::vector<Trial> chunk(count);
        parallel_for(count, threads, [&](std::size_t k) {
            chunk[k] = detail::run_trial(f, eps, n_max, seed, start + k, grid);
        });
        for (auto& t : chunk) {
            rep.per_trial.push_back(t);
            if (t.outcome.is_markov()) {
                result.success = std::move(t);
                break;
            }
        }
    }
    detail::summarise(rep);
    return result;
}

/// Rises from 0 at y = 0 to 1 at y = 1/2 along 3t² - 2t³, t = 2y.
inline Rat bump_profile(const Rat& y) {
    if (!(y > 0)) return Rat{0};
    Rat t = std::min(Rat{2} * y, Rat{1});
    return t * t * (Rat{3} - Rat{2} * t);
}

/// base ∘ h where h(x) = x + δ³ g(1 - ‖x - x̄‖/δ) v on the sup-ball B_δ(x̄)
/// and the identity elsewhere.
class BumpMap {
public:
    BumpMap(DiagonalAffineMap base, Point center, Rat radius, Point direction, Rat slope = Rat{4})
        : base_(std::move(base)), center_(std::move(center)), radius_(std::move(radius)),
          direction_(std::move(direction)), slope_(std::move(slope)) {
        if (center_.size() != base_.dim() || direction_.size() != base_.dim())
            throw std::invalid_argument("bump dimension mismatch");
        if (!(radius_ > 0)) throw std::invalid_argument("bump radius must be positive");
        if (!(slope_ > 2)) throw std::invalid_argument("slope bound must exceed 2");
        Rat vnorm{0};
        for (const auto& c : direction_) vnorm = std::max(vnorm, abs(c));
        if (vnorm > 1) throw std::invalid_argument("bump direction must have sup-norm at most 1");
        // |g'| ≤ 3, so h is (1 + 3|v|δ²)-Lipschitz; the certificate needs a ≥ 3|v|.
        if (Rat{3} * vnorm > slope_) throw std::invalid_argument("slope bound below the profile slope");
        if (!(slope_ * radius_ * radius_ < 1)) throw RadiusTooLarge();
    }

    const DiagonalAffineMap& base() const { return base_; }
    const Point& center() const { return center_; }
    const Rat& radius() const { return radius_; }
    const Point& direction() const { return direction_; }
    const Rat& slope() const { return slope_; }

    Point shift(const Point& x) const {
        Rat r{0};
        for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, abs(x[i] - center_[i]));
        if (!(r < radius_)) return x;
        Rat amount = radius_ * radius_ * radius_ * bump_profile(Rat{1} - r / radius_);
        Point y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += amount * direction_[i];
        return y;
    }

    Point operator()(const Point& x) const { return base_(shift(x)); }

    /// λ(base)·(1 + aδ²).
    Rat lipschitz() const { return base_.lipschitz() * (Rat{1} + slope_ * radius_ * radius_); }

private:
    DiagonalAffineMap base_;
    Point center_;
    Rat radius_;
    Point direction_;
    Rat slope_;
};

/// An IFS with one map replaced by a bump-composed map.
struct BumpedIFS {
    IFS base;
    std::size_t index = 0;
    BumpMap bumped;

    Point apply(std::size_t i, const Point& x) const { return i == index ? bumped(x) : base.maps[i](x); }
    Rat lipschitz(std::size_t i) const { return i == index ? bumped.lipschitz() : base.maps[i].lipschitz(); }
};

inline BumpedIFS bump(const IFS& base, std::size_t map_index, const Point& center, const Rat& radius,
                      const Point& direction, const Rat& slope = Rat{4}) {
    if (map_index >= base.size()) throw std::out_of_range("bump map index");
    return BumpedIFS{base, map_index, BumpMap(base.maps[map_index], center, radius, direction, slope)};
}

/// Largest norm of an inverse derivative, raised above 2 if needed.
inline Rat inverse_derivative_bound(const IFS& ifs) {
    Rat b{0};
    for (const auto& m : ifs.maps)
        for (const auto& s : m.scale()) b = std::max(b, Rat{1} / abs(s));
    return b > 2 ? b : Rat(5, 2);
}

struct ApproxFixedPoint {
    Point point;
    Rat error_bound;          // sup-norm distance to the true fixed point
    Rat certificate;          // Lipschitz bound of the word map
    std::size_t iterations = 0;
};

/// Fixed point of the bumped word map by Picard iteration from the center
/// of Y. Iterates are rounded to 2^-64 to keep denominators bounded; the
/// bound (Λ·step + r)/(1 - Λ) accounts for that rounding r.
inline ApproxFixedPoint bump_fixed_point(const BumpedIFS& ifs, const Word& w, const Rat& tolerance) {
    if (w.empty()) throw std::invalid_argument("fixed point of the empty word");
    if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
    Rat cert{1};
    for (auto i : w) cert *= ifs.lipschitz(i);
    if (!(cert < 1)) throw NotContracting();

    constexpr unsigned bits = 64;
    const Rat rounding = Rat{1} / pow(Rat{2}, bits + 1);
    auto step_map = [&](const Point& x) {
        Point y = x;
        for (auto it = w.rbegin(); it != w.rend(); ++it) y = ifs.apply(*it, y);
        for (auto& c : y) c = round_dyadic(c, bits);
        return y;
    };

    ApproxFixedPoint out;
    out.certificate = cert;
    Point x = ifs.base.Y.center();
    const Rat stop = tolerance * (Rat{1} - cert);
    for (;;) {
        Point y = step_map(x);
        ++out.iterations;
        Rat step{0};
        for (std::size_t i = 0; i < y.size(); ++i) step = std::max(step, abs(y[i] - x[i]));
        x = std::move(y);
        if (step < stop || out.iterations > 100000) {
            out.error_bound = (cert * step + rounding) / (Rat{1} - cert);
            break;
        }
    }
    out.point = std::move(x);
    return out;
}

}  // namespace pwc
