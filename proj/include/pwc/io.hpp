#pragma once

#include "pwc/pwc.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pwc::io {

using json = nlohmann::ordered_json;

struct Options {
    Rat sigma{1, 2};
    std::optional<Rat> epsilon_fattening;   // default: half the validation margin
    BoundaryRule boundary_rule = BoundaryRule::LowestIndex;
};

/// A map as read from disk, before any consistency checks.
struct MapConfig {
    Box domain;
    std::vector<Box> elements;
    std::vector<DiagonalAffineMap> pieces;
    Options options;
};

// ---- reading ----------------------------------------------------------

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

inline Rat rat_from_json(const json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": rationals must be strings \"p/q\"");
    return parse_rat(j.get<std::string>());
}

inline Point point_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a nonempty array");
    Point p;
    for (std::size_t i = 0; i < j.size(); ++i) p.push_back(rat_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return p;
}

inline Box box_from_json(const json& j, const std::string& where) {
    Point lo = point_from_json(field(j, "lo", where), where + ".lo");
    Point hi = point_from_json(field(j, "hi", where), where + ".hi");
    if (lo.size() != hi.size()) throw ParseError(where + ": lo and hi differ in dimension");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw ParseError(where + ": empty box (lo >= hi on axis " + std::to_string(i) + ")");
    return Box(std::move(lo), std::move(hi));
}

inline MapConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("map: expected a JSON object");
    MapConfig cfg{box_from_json(field(j, "domain", "map"), "domain"), {}, {}, {}};
    const auto& els = field(j, "elements", "map");
    if (!els.is_array() || els.empty()) throw ParseError("elements: expected a nonempty array");
    for (std::size_t i = 0; i < els.size(); ++i)
        cfg.elements.push_back(box_from_json(els[i], "elements[" + std::to_string(i) + "]"));
    const auto& ps = field(j, "pieces", "map");
    if (!ps.is_array() || ps.empty()) throw ParseError("pieces: expected a nonempty array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::string where = "pieces[" + std::to_string(i) + "]";
        Point s = point_from_json(field(ps[i], "scale", where), where + ".scale");
        Point o = point_from_json(field(ps[i], "offset", where), where + ".offset");
        if (s.size() != o.size()) throw ParseError(where + ": scale and offset differ in dimension");
        cfg.pieces.emplace_back(std::move(s), std::move(o));
    }
    if (j.contains("options")) {
        const auto& opt = j.at("options");
        if (!opt.is_object()) throw ParseError("options: expected an object");
        if (opt.contains("sigma")) {
            cfg.options.sigma = rat_from_json(opt.at("sigma"), "options.sigma");
            if (!(cfg.options.sigma > 0 && cfg.options.sigma < 1)) throw ParseError("options.sigma must lie in (0,1)");
        }
        if (opt.contains("epsilon_fattening")) {
            cfg.options.epsilon_fattening = rat_from_json(opt.at("epsilon_fattening"), "options.epsilon_fattening");
            if (*cfg.options.epsilon_fattening < 0) throw ParseError("options.epsilon_fattening must be >= 0");
        }
        if (opt.contains("boundary_rule")) {
            const auto& r = opt.at("boundary_rule");
            if (!r.is_string() || r.get<std::string>() != "lowest-index")
                throw ParseError("options.boundary_rule: only \"lowest-index\" is supported");
        }
    }
    return cfg;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Shape checks that must pass before the map can be assembled, followed
/// by the full validation of the assembled map.
inline ValidationReport validate_config(const MapConfig& cfg) {
    ValidationReport rep;
    const std::size_t d = cfg.domain.dim();
    for (std::size_t i = 0; i < cfg.elements.size(); ++i)
        if (cfg.elements[i].dim() != d)
            rep.violations.push_back({ViolationKind::DimensionMismatch, i, std::nullopt, std::nullopt});
    for (std::size_t i = 0; i < cfg.pieces.size(); ++i)
        if (cfg.pieces[i].dim() != d)
            rep.violations.push_back({ViolationKind::DimensionMismatch, i, std::nullopt, std::nullopt});
    if (cfg.pieces.size() != cfg.elements.size())
        rep.violations.push_back({ViolationKind::PieceCountMismatch, cfg.elements.size(), cfg.pieces.size(), std::nullopt});
    if (!rep.ok()) return rep;
    return validate(PiecewiseContraction(Partition(cfg.domain, cfg.elements), cfg.pieces, cfg.options.boundary_rule));
}

/// The validated map; throws InvalidMap listing every violation.
inline PiecewiseContraction build_map(const MapConfig& cfg) {
    auto rep = validate_config(cfg);
    if (!rep.ok()) throw InvalidMap(std::move(rep));
    return PiecewiseContraction(Partition(cfg.domain, cfg.elements), cfg.pieces, cfg.options.boundary_rule);
}

// ---- writing ----------------------------------------------------------
//
// Rationals are written as "p/q"; element, cell and letter indices are
// 1-based. With approximations enabled, exact values are wrapped as
// {"exact": ..., "approx": ...}; the decimals never replace them.

struct Writer {
    bool approx = false;

    json rat(const Rat& r) const {
        if (!approx) return to_string(r);
        return json{{"exact", to_string(r)}, {"approx", to_double(r)}};
    }

    json point(const Point& p) const {
        json exact = json::array();
        for (const auto& c : p) exact.push_back(to_string(c));
        if (!approx) return exact;
        json dec = json::array();
        for (const auto& c : p) dec.push_back(to_double(c));
        return json{{"exact", exact}, {"approx", dec}};
    }

    json box(const Box& b) const { return json{{"lo", point(b.lo())}, {"hi", point(b.hi())}}; }
    json rect(const Rect& r) const { return json{{"lo", point(r.lo)}, {"hi", point(r.hi)}}; }

    json facet(const Facet& f) const {
        Rect c = f.closure();
        return json{{"axis", f.axis + 1}, {"value", rat(f.value)}, {"lo", point(c.lo)}, {"hi", point(c.hi)}};
    }

    static json word(const Word& w) {
        json out = json::array();
        for (auto l : w) out.push_back(l + 1);
        return out;
    }

    static json indices(const std::vector<std::size_t>& v) { return word(v); }

    json affine(const DiagonalAffineMap& m) const {
        return json{{"scale", point(m.scale())}, {"offset", point(m.offset())}};
    }

    json violation(const Violation& v) const {
        json j{{"kind", to_string(v.kind)}};
        if (v.first) j["first"] = *v.first + 1;
        if (v.second) j["second"] = *v.second + 1;
        if (v.witness) j["witness"] = rect(*v.witness);
        return j;
    }

    json validation(const ValidationReport& r) const {
        json vs = json::array();
        for (const auto& v : r.violations) vs.push_back(violation(v));
        return json{{"valid", r.ok()}, {"violations", vs}};
    }

    json markov(const MarkovReport& r) const {
        json j;
        if (r.is_markov()) {
            j["status"] = "Markov";
            j["stabilisation_time"] = r.time;
            json targets = json::array();
            for (std::size_t i = 0; i < r.targets.size(); ++i)
                targets.push_back(json{{"cell", i + 1}, {"inside", r.targets[i] + 1}});
            j["witness"] = targets;
        } else {
            j["status"] = "NotStabilisedWithin";
            j["n_max"] = r.time;
            if (r.failure)
                j["witness"] = json{{"cell", r.failure->cell + 1},
                                    {"image_closure", rect(r.failure->image_closure)},
                                    {"touched_facet", facet(r.failure->touched)}};
        }
        return j;
    }

    json refined(const RefinedPartition& p) const {
        json cells = json::array();
        for (std::size_t i = 0; i < p.size(); ++i)
            cells.push_back(json{{"index", i + 1}, {"word", word(p.cells[i].word)}, {"region", box(p.cells[i].region)}});
        return json{{"depth", p.depth}, {"cell_count", p.size()}, {"cells", cells}};
    }

    json symbolic(const SymbolicModel& m) const {
        json next = json::array();
        for (std::size_t i = 0; i < m.next.size(); ++i) next.push_back(json{{"from", i + 1}, {"to", m.next[i] + 1}});
        json cycles = json::array();
        for (const auto& c : m.cycles) cycles.push_back(indices(c));
        return json{{"depth", m.depth},
                    {"cell_count", m.cell_count()},
                    {"next", next},
                    {"cycles", cycles},
                    {"nonwandering", indices(m.nonwandering)},
                    {"wandering", indices(m.wandering)}};
    }

    json attractor(const AttractorReport& a) const {
        json orbits = json::array();
        for (const auto& o : a.orbits) {
            json pts = json::array();
            for (const auto& p : o.points) pts.push_back(point(p));
            orbits.push_back(json{{"period", o.period}, {"points", pts}, {"cycle", indices(o.cycle)}});
        }
        return json{{"stabilisation_time", a.stabilisation_time},
                    {"orbits", orbits},
                    {"min_distance_to_boundary", rat(a.min_distance_to_delta)}};
    }

    json trial(const Trial& t) const {
        json j{{"trial", t.index + 1}, {"delta", point(t.delta)}};
        j["outcome"] = t.outcome.is_markov() ? "Markov" : "NotStabilisedWithin";
        j["N"] = t.outcome.time;
        return j;
    }

    json monte_carlo(const MonteCarloReport& r) const {
        json trials = json::array();
        for (const auto& t : r.per_trial) trials.push_back(trial(t));
        return json{{"trials", r.trials},
                    {"markov_count", r.markov_count},
                    {"fraction", rat(r.fraction)},
                    {"seed", r.seed},
                    {"epsilon", rat(r.epsilon)},
                    {"n_max", r.n_max},
                    {"grid_denominator", r.grid},
                    {"per_trial", trials}};
    }

    json rho(const RhoEstimate& e) const {
        return json{{"value", rat(e.value)}, {"kind", to_string(e.kind)}, {"matcher", to_string(e.matcher)}};
    }
};

inline json map_to_json(const PiecewiseContraction& f) {
    Writer w;
    json els = json::array();
    for (const auto& e : f.partition().elements()) els.push_back(w.box(e));
    json ps = json::array();
    for (const auto& p : f.pieces()) ps.push_back(w.affine(p));
    return json{{"domain", w.box(f.domain())}, {"elements", els}, {"pieces", ps}};
}

/// CSV rendering of a Monte Carlo run: manifest lines prefixed by '#',
/// then the columns trial,delta,outcome,N. Multi-dimensional δ is joined
/// with ';'.
inline std::string monte_carlo_csv(const MonteCarloReport& r, const json& manifest) {
    std::ostringstream out;
    for (const auto& [k, v] : manifest.items()) out << "# " << k << ": " << v.dump() << "\n";
    out << "# markov_fraction: " << to_string(r.fraction) << "\n";
    out << "trial,delta,outcome,N\n";
    for (const auto& t : r.per_trial) {
        out << t.index + 1 << ",";
        for (std::size_t i = 0; i < t.delta.size(); ++i) out << (i ? ";" : "") << to_string(t.delta[i]);
        out << "," << (t.outcome.is_markov() ? "Markov" : "NotStabilisedWithin") << "," << t.outcome.time << "\n";
    }
    return out.str();
}

}  // namespace pwc::io
