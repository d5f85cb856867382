// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "corpus.hpp"
#include "oracles.hpp"

#include "pwc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace pwc;
using namespace pwc::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string str(const Rat& r) { return to_string(r); }

Outcome fail(std::string why) { return {false, std::move(why)}; }

// 1
Outcome worked_example() {
    auto f = E1();
    auto markov = detect_markov(f, 50);
    if (!markov.is_markov() || markov.time != 1) return fail("E1 is not Markov(1)");
    auto att = attractor(f);
    std::set<Rat> points;
    for (const auto& o : att.orbits)
        for (const auto& x : o.points) points.insert(x[0]);
    if (points != std::set<Rat>{R("1/4"), R("2/3")}) return fail("attractor differs from {1/4, 2/3}");
    if (att.min_distance_to_delta != R("1/6"))
        return fail("distance to boundary " + str(att.min_distance_to_delta) + " != 1/6");
    auto p = strong_contraction_exponent(f, 10);
    if (!p || *p != 3) return fail("strong contraction exponent is not 3");
    auto margin = stability_margin(f);
    if (margin != R("1/48")) return fail("stability margin " + str(margin) + " != 1/48");
    return {true, "Markov(1), {1/4, 2/3}, 1/6, p=3, margin 1/48"};
}

// 2
Outcome markov_attractors_are_periodic() {
    std::mt19937_64 rng(2024);
    std::size_t accepted = 0, drawn = 0;
    while (accepted < 200) {
        if (++drawn > 20000) return fail("only " + std::to_string(accepted) + " Markov maps in 20000 draws");
        auto f = random_interval_map(rng, 2 + drawn % 3);
        if (!detect_markov(f, 20).is_markov()) continue;
        ++accepted;
        auto att = attractor(f, 20);
        for (const auto& o : att.orbits)
            for (const auto& x : o.points) {
                // Iterate pointwise, independent of the cell machinery.
                Point y = x;
                for (std::size_t k = 0; k < o.period; ++k) y = evaluate(f, y);
                if (y != x) return fail("attractor point with nonzero residual in map " + std::to_string(drawn));
            }
        if (!(att.min_distance_to_delta > 0)) return fail("attractor touches the boundary");
    }
    auto e2 = E2();
    const Point half{R("1/2")};
    for (std::size_t n = 1; n <= 50; ++n) {
        bool hit = false;
        for (const auto& b : image_cover(e2, n)) hit = hit || b.contains_closed(half);
        if (!hit) return fail("E2 image closure misses 1/2 at depth " + std::to_string(n));
    }
    auto r = detect_markov(e2, 50);
    if (r.is_markov() || r.time != 50) return fail("E2 reported Markov");
    return {true, "200 Markov maps of " + std::to_string(drawn) + " drawn; E2 holds 1/2 through depth 50"};
}

// 3
Outcome stability_under_translation() {
    std::size_t total = 0;
    std::string sizes;
    for (const auto& f : markov_corpus()) {
        const Rat margin = stability_margin(f);
        const std::size_t N = detect_markov(f, 50).time;
        const Rat eps = std::min(margin / 8, validation_margin(f));
        std::size_t accepted = 0, index = 1;
        for (; accepted < 100 && index <= 2000; ++index) {
            auto delta = sample_delta(41, index, eps, f.dim());
            auto g = translate(f, delta);
            if (!(d1_upper(f, g, 30).total < margin)) continue;
            ++accepted;
            auto r = detect_markov(g, 50);
            if (!r.is_markov() || r.time != N)
                return fail("translate " + std::to_string(index) + " stabilises differently");
        }
        if (accepted < 100) return fail("only " + std::to_string(accepted) + " translations inside the margin");
        total += accepted;
        sizes += (sizes.empty() ? "" : ",") + std::to_string(index - 1);
    }
    return {true, std::to_string(total) + " translations re-detected (draws per map " + sizes + ")"};
}

// 4
Outcome attractor_inclusion_chain() {
    std::size_t boxes = 0;
    for (const auto& f : markov_corpus()) {
        auto ifs = associated_ifs(f);
        for (std::size_t n = 1; n <= 12; ++n) {
            if (!check_attractor_inclusion(f, n).ok) return fail("attractor leaves the IFS cover at n=" + std::to_string(n));
            for (const auto& b : image_cover(f, n)) {
                ++boxes;
                if (!cover_contains(ifs, n, b)) return fail("image box outside the IFS cover at n=" + std::to_string(n));
            }
        }
    }
    return {true, std::to_string(boxes) + " image boxes inside the IFS covers"};
}

// 5
Outcome separation() {
    std::vector<IFS> family{associated_ifs(E1())};
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) family.push_back(random_ifs(rng, 2 + k % 2));
    std::size_t collisions = 0;
    for (const auto& ifs : family) {
        auto t = separation_check(ifs, 5);
        if (t.violation_count() != 0) return fail("collision outside a common-root family");
        collisions += t.collisions.size();
    }
    auto phi = E1().piece(0);
    auto degenerate = make_ifs({phi, phi}, Box::interval(0, 1));
    auto t = separation_check(degenerate, 5);
    const std::size_t n = t.entries.size();
    if (t.collisions.size() != n * (n - 1) / 2) return fail("degenerate IFS has unflagged pairs");
    std::size_t expected = 0;
    for (const auto& c : t.collisions)
        if (oracle::primitive_root(c.first) != oracle::primitive_root(c.second)) ++expected;
    if (t.violation_count() != expected || expected == 0) return fail("degenerate IFS violations miscounted");
    return {true, std::to_string(collisions) + " common-root collisions in generic IFSs; degenerate IFS flags all " +
                      std::to_string(n * (n - 1) / 2) + " pairs"};
}

// 6
Outcome ball_return() {
    std::mt19937_64 rng(6);
    std::vector<IFS> pool{associated_ifs(E1()), associated_ifs(E5()), associated_ifs(E6()), random_ifs(rng, 2),
                          random_ifs(rng, 3)};
    std::size_t hits = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto& ifs = pool[static_cast<std::size_t>(t) % pool.size()];
        Word w(static_cast<std::size_t>(uniform_int(rng, 1, 4)));
        for (auto& c : w) c = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(ifs.size()) - 1));
        Rat delta = grid_rat(rng, 1, 256, 1024);
        Point y(ifs.dim());
        auto x = word_fixed_point(ifs, w);
        for (std::size_t a = 0; a < y.size(); ++a) {
            // Half the centres near the fixed point so the hypothesis fires.
            y[a] = t % 2 == 0 ? ifs.Y.lo(a) + ifs.Y.side(a) * grid_rat(rng, 0, 1024, 1024)
                              : x[a] + delta * grid_rat(rng, -3072, 3072, 1024);
        }
        auto r = ball_return_fixed_point_check(ifs, w, y, delta);
        auto approx = oracle::iterated_fixed_point(ifs.maps, w);
        for (std::size_t a = 0; a < y.size(); ++a)
            if (std::fabs(to_double(r.fixed_point[a]) - approx[a]) > 1e-9) return fail("fixed point disagrees with iteration");
        if (!r.hypothesis) continue;
        ++hits;
        if (!r.conclusion) return fail("fixed point outside c*-ball in triple " + std::to_string(t));
    }
    return {true, std::to_string(hits) + " of 1000 triples met the hypothesis, no violations"};
}

// 7
Outcome bump_displacement() {
    auto ifs = associated_ifs(E1());
    const Rat Lambda = inverse_derivative_bound(ifs);
    const Rat tol(1, 1000000000000LL);
    // Words up to length depth + 1 are the ones tracked at depth N.
    const std::size_t depth = 2;
    std::vector<Word> words;
    for (std::size_t len = 1; len <= depth + 1; ++len)
        for (std::size_t code = 0; code < (std::size_t{1} << len); ++code) {
            Word w(len);
            for (std::size_t i = 0; i < len; ++i) w[i] = (code >> i) & 1U;
            words.push_back(w);
        }

    struct Case {
        bool ok;
        double ratio;   // displacement / δ³
    };
    auto measure = [&](const Word& w, const Rat& delta, const Rat& v) {
        Point center = word_fixed_point(ifs, w);
        auto b = bump(ifs, w.back(), center, delta, Point{v});
        auto fp = bump_fixed_point(b, w, tol);
        Rat moved = abs(fp.point[0] - center[0]);
        Rat lower = Rat(3, 2) * delta * delta * abs(v) / pow(Lambda, depth);
        Rat upper = delta / 2;
        bool ok = moved + fp.error_bound >= lower && moved - fp.error_bound <= upper;
        return Case{ok, to_double(moved / pow(delta, 3))};
    };

    std::size_t cases = 0, failures = 0, above_upper = 0;
    double lo_ratio = 1e300, hi_ratio = 0;
    std::string per_delta;
    for (const Rat& delta : {R("1/16"), R("1/32"), R("1/64")}) {
        std::size_t before = failures;
        for (const auto& w : words)
            for (const Rat& v : {R("1"), R("-1")}) {
                ++cases;
                auto c = measure(w, delta, v);
                if (!c.ok && delta == R("1/16")) c = measure(w, delta / 2, v);
                lo_ratio = std::min(lo_ratio, c.ratio);
                hi_ratio = std::max(hi_ratio, c.ratio);
                if (!c.ok) ++failures;
                if (c.ratio * to_double(delta * delta) > 0.5) ++above_upper;
            }
        per_delta += (per_delta.empty() ? "" : ", ") + str(delta) + ": " + std::to_string(failures - before);
    }
    std::ostringstream why;
    why << failures << " of " << cases << " cases outside [3/2 d^2 |v| L^-N, d/2] (L=" << str(Lambda) << ", N=" << depth
        << "; by d " << per_delta << "); displacement/d^3 in [" << lo_ratio << ", " << hi_ratio << "]";
    if (above_upper) why << "; " << above_upper << " above d/2";
    return {failures == 0, why.str()};
}

// 8
Outcome genericity() {
    auto run = [](const char* threads) {
        if (threads) setenv("PWC_THREADS", threads, 1);
        else unsetenv("PWC_THREADS");
        std::string map = std::string(PWC_MAPS_DIR) + "/e2.json";
        std::vector<const char*> argv{"pwc", "genericity", map.c_str(), "--eps", "1/20", "--nmax", "30",
                                      "--samples", "500", "--seed", "1"};
        std::ostringstream out, err;
        int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        unsetenv("PWC_THREADS");
        return std::make_pair(code, out.str());
    };
    auto [c1, first] = run(nullptr);
    auto [c2, second] = run("2");
    if (c1 != 0 || c2 != 0) return fail("genericity run failed");
    if (first != second) return fail("reports differ between runs");
    auto j = io::json::parse(first)["sweep"];
    Rat fraction = parse_rat(j["fraction"].get<std::string>());
    if (!(fraction >= Rat(99, 100))) return fail("Markov fraction " + str(fraction) + " < 0.99");
    return {true, "fraction " + str(fraction) + " over 500 samples, byte-identical rerun"};
}

// 9
Outcome complexity() {
    std::vector<PiecewiseContraction> maps = markov_corpus();
    maps.push_back(E2());
    std::size_t worst = 0;
    for (const auto& f : maps) {
        auto r = detect_markov(f, 20);
        auto part = refine(f, r.time);
        std::size_t meet = max_cells_meeting_at_point(part);
        if (BigInt(meet) > complexity_bound(f)) return fail("cells meeting exceed the bound");
        if (f.dim() == 1 && meet > 2) return fail("more than two intervals share a point");
        worst = std::max(worst, meet);
    }
    return {true, "largest meeting count " + std::to_string(worst)};
}

// 10
Outcome metric_sanity() {
    std::mt19937_64 rng(10);
    std::size_t pairs = 0;
    for (const auto& f : markov_corpus()) {
        if (rho_upper(f, f).value != 0) return fail("rho(f, f) is not zero");
        const Rat eps = validation_margin(f) / 4;
        for (int k = 0; k < 5; ++k) {
            Point delta(f.dim());
            for (auto& c : delta) c = eps * grid_rat(rng, -1024, 1024, 1024);
            auto g = translate(f, delta);
            auto dist = d2(f, g);
            if (!dist || *dist < rho_upper(f, g).value) return fail("d2 below rho on a shared partition");
            Rat prev = d1_upper(f, g, 1).total;
            for (std::size_t n = 2; n <= 12; ++n) {
                Rat cur = d1_upper(f, g, n).total;
                if (cur > prev) return fail("d1 bound increased at " + std::to_string(n) + " terms");
                prev = cur;
            }
            ++pairs;
        }
    }
    return {true, std::to_string(pairs) + " translated pairs checked"};
}

// 11
Outcome admissible_words_shadow() {
    auto f = E1();
    const Rat eps = validation_margin(f) / 2;
    auto words = [&](const PiecewiseContraction& g, std::size_t n) {
        std::set<Word> out;
        for (const auto& aw : admissible_words(associated_ifs(g), g.partition(), n, eps)) out.insert(aw.word);
        return out;
    };
    std::size_t compared = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        auto base = words(f, n);
        for (int k = -10; k <= 10; ++k) {
            auto g = translate(f, {Rat(k, 2000)});
            if (words(g, n) != base)
                return fail("admissible words change at n=" + std::to_string(n) + ", delta=" + str(Rat(k, 2000)));
            compared += base.size();
        }
    }
    return {true, std::to_string(compared) + " words compared"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"worked example exactness", worked_example},
        {"Markov attractors are periodic", markov_attractors_are_periodic},
        {"stabilisation time survives translation", stability_under_translation},
        {"attractor inclusion chain", attractor_inclusion_chain},
        {"fixed point separation", separation},
        {"ball return", ball_return},
        {"bump displacement bounds", bump_displacement},
        {"genericity at desk scale", genericity},
        {"complexity bound", complexity},
        {"metric estimator sanity", metric_sanity},
        {"admissible words under translation", admissible_words_shadow},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::ostringstream line;
        line.precision(2);
        line << std::fixed << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": "
             << o.detail << " (" << secs << "s)";
        std::cout << line.str() << std::endl;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
