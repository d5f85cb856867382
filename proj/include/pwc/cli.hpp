#pragma once

// Command-line front end. Every command returns an exit code and a JSON
// report (or CSV for Monte Carlo runs); run() wires them to CLI11.
//
// Exit codes: 0 success, 1 input error, 2 validation failure,
// 3 analysis budget exhausted (only with --strict).

#include "pwc/io.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <ctime>
#include <iomanip>
#include <iostream>

namespace pwc::cli {

using io::json;

enum ExitCode : int { Ok = 0, InputError = 1, ValidationFailure = 2, BudgetExhausted = 3 };

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

/// Provenance shared by all reports of one invocation. The timestamp comes
/// from SOURCE_DATE_EPOCH so that reruns stay byte-identical; without it
/// the field is null.
struct RunManifest {
    std::vector<std::string> command;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256

    json to_json() const {
        json cmd = json::array();
        for (const auto& a : command) cmd.push_back(a);
        json in = json::array();
        for (const auto& [p, h] : inputs) in.push_back(json{{"path", p}, {"sha256", h}});
        json j{{"tool", "pwc"}, {"version", PWC_VERSION}, {"command", cmd}};
        j["seed"] = seed ? json(*seed) : json(nullptr);
        j["timestamp"] = timestamp();
        j["inputs"] = in;
        return j;
    }

    static json timestamp() {
        const char* env = std::getenv("SOURCE_DATE_EPOCH");
        if (!env) return nullptr;
        char* end = nullptr;
        long long t = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0') return nullptr;
        std::time_t tt = static_cast<std::time_t>(t);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return std::string(buf);
    }
};

struct Result {
    int exit_code = Ok;
    json report;
    std::optional<std::string> csv;   // set by commands that can emit CSV
};

class Session {
public:
    explicit Session(std::vector<std::string> command, bool approx = false) : writer_{approx} {
        manifest_.command = std::move(command);
    }

    const io::Writer& writer() const { return writer_; }
    RunManifest& manifest() { return manifest_; }

    io::MapConfig load(const std::string& path) {
        auto bytes = io::read_file_bytes(path);
        manifest_.inputs.emplace_back(path, sha256_hex(bytes));
        json j;
        try {
            j = json::parse(bytes);
        } catch (const json::parse_error& e) {
            throw ParseError(path + ": " + e.what());
        }
        return io::config_from_json(j);
    }

    json begin() const { return json{{"manifest", manifest_.to_json()}}; }

private:
    io::Writer writer_;
    RunManifest manifest_;
};

/// A map that failed validation, reported with every violation.
inline Result invalid(Session& s, const ValidationReport& rep) {
    json r = s.begin();
    json body = s.writer().validation(rep);
    for (auto& [k, v] : body.items()) r[k] = v;
    return {ValidationFailure, r, std::nullopt};
}

inline Rat default_fattening(const io::MapConfig& cfg, const PiecewiseContraction& f) {
    return cfg.options.epsilon_fattening.value_or(validation_margin(f) / 2);
}

inline Result cmd_validate(Session& s, const std::string& path) {
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    json r = s.begin();
    json body = s.writer().validation(rep);
    for (auto& [k, v] : body.items()) r[k] = v;
    return {Ok, r, std::nullopt};
}

struct AnalyzeOptions {
    std::size_t n_max = 50;
    std::size_t p_max = 10;
    std::vector<std::size_t> depths{1, 2, 3};
    bool strict = false;
};

inline Result cmd_analyze(Session& s, const std::string& path, const AnalyzeOptions& o) {
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    const auto& w = s.writer();

    json r = s.begin();
    r["map"] = json{{"dimension", f.dim()},
                    {"pieces", f.size()},
                    {"lambda", w.rat(f.lambda())},
                    {"validation_margin", w.rat(validation_margin(f))}};
    Refiner ref(f);
    auto markov = detect_markov(ref, o.n_max);
    r["markov"] = w.markov(markov);
    if (markov.is_markov()) {
        r["symbolic_model"] = w.symbolic(symbolic_model(ref.at(markov.time), f));
        r["attractor"] = w.attractor(attractor(f, o.n_max));
        r["stability_margin"] = w.rat(stability_margin(f, cfg.options.sigma, o.n_max));
    }
    json sizes = json::array();
    for (std::size_t p = 1; p <= o.p_max; ++p) sizes.push_back(json{{"p", p}, {"cells", ref.at(p).size()}});
    r["partition_sizes"] = sizes;
    auto p = strong_contraction_exponent(f, o.p_max);
    r["strong_contraction_exponent"] = p ? json(*p) : json(nullptr);
    r["complexity_bound"] = complexity_bound(f).str();
    json covers = json::array();
    for (auto n : o.depths) {
        if (n == 0) throw std::invalid_argument("cover depth must be at least 1");
        auto boxes = image_cover(f, n);
        Rat widest{0};
        json bs = json::array();
        for (const auto& b : boxes) {
            widest = std::max(widest, b.diameter());
            bs.push_back(w.box(b));
        }
        covers.push_back(json{{"depth", n},
                              {"boxes", bs},
                              {"max_diameter", w.rat(widest)},
                              {"diameter_bound", w.rat(pow(f.lambda(), n) * f.domain().diameter())}});
    }
    r["covers"] = covers;
    return {o.strict && !markov.is_markov() ? BudgetExhausted : Ok, r, std::nullopt};
}

inline Result cmd_markov(Session& s, const std::string& path, std::size_t n_max, bool strict) {
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    auto m = detect_markov(f, n_max);
    json r = s.begin();
    r["markov"] = s.writer().markov(m);
    return {strict && !m.is_markov() ? BudgetExhausted : Ok, r, std::nullopt};
}

inline Result cmd_attractor(Session& s, const std::string& path, std::size_t n_max, bool strict) {
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    auto m = detect_markov(f, n_max);
    json r = s.begin();
    r["markov"] = s.writer().markov(m);
    r["attractor"] = m.is_markov() ? s.writer().attractor(attractor(f, n_max)) : json(nullptr);
    return {strict && !m.is_markov() ? BudgetExhausted : Ok, r, std::nullopt};
}

inline Result cmd_refine(Session& s, const std::string& path, std::size_t depth) {
    if (depth == 0) throw std::invalid_argument("--depth must be at least 1");
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    json r = s.begin();
    r["partition"] = s.writer().refined(refine(f, depth));
    return {Ok, r, std::nullopt};
}

constexpr std::size_t max_listed_boxes = 1u << 20;

inline Result cmd_ifs_cover(Session& s, const std::string& path, std::size_t depth) {
    if (depth == 0) throw std::invalid_argument("--depth must be at least 1");
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    auto ifs = associated_ifs(f);
    if (pow(Rat(ifs.size()), depth) > max_listed_boxes)
        throw std::invalid_argument("cover has more than 2^20 boxes; lower --depth");
    const auto& w = s.writer();
    json boxes = json::array();
    for (const auto& b : ifs_attractor_cover(ifs, depth)) boxes.push_back(w.box(b));
    json r = s.begin();
    r["ifs"] = json{{"lambda", w.rat(ifs.lambda)}, {"invariant_box", w.box(ifs.Y)}, {"gamma", w.rat(ifs.gamma)}};
    r["depth"] = depth;
    r["boxes"] = boxes;
    return {Ok, r, std::nullopt};
}

inline Result cmd_fixed_points(Session& s, const std::string& path, std::size_t max_len, bool separation) {
    if (max_len == 0) throw std::invalid_argument("--maxlen must be at least 1");
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    auto ifs = associated_ifs(f);
    auto table = fixed_point_table(ifs, max_len);
    const auto& w = s.writer();
    json entries = json::array();
    for (const auto& e : table.entries) entries.push_back(json{{"word", w.word(e.word)}, {"point", w.point(e.point)}});
    json r = s.begin();
    r["max_length"] = max_len;
    r["fixed_points"] = entries;
    if (separation) {
        json cs = json::array();
        for (const auto& c : table.collisions)
            cs.push_back(json{{"first", w.word(c.first)},
                              {"second", w.word(c.second)},
                              {"common_root", c.common_root ? w.word(*c.common_root) : json(nullptr)}});
        r["separation"] = json{{"collisions", cs}, {"violations", table.violation_count()}};
    }
    return {Ok, r, std::nullopt};
}

inline Result cmd_boundary(Session& s, const std::string& path, std::size_t depth, const std::optional<Rat>& delta,
                           const std::optional<Rat>& eps) {
    auto cfg = s.load(path);
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    const Rat d = delta.value_or(Rat{0});
    const Rat e = eps.value_or(default_fattening(cfg, f));
    auto set = boundary_preimages(associated_ifs(f), f.partition(), depth, d, e);
    const auto& w = s.writer();
    json facets = json::array();
    auto fat = set.fattened();
    for (std::size_t i = 0; i < set.facets.size(); ++i) {
        json j{{"word", w.word(set.facets[i].word)}, {"facet", w.facet(set.facets[i].facet)}};
        if (d > 0) j["neighbourhood"] = w.rect(fat[i]);
        facets.push_back(j);
    }
    json r = s.begin();
    r["depth"] = depth;
    r["delta"] = w.rat(d);
    r["epsilon"] = w.rat(e);
    r["facets"] = facets;
    return {Ok, r, std::nullopt};
}

struct SearchOptions {
    Rat eps;
    std::size_t n_max = 30;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    bool strict = false;
};

inline Result cmd_markovify(Session& s, const std::string& path, const SearchOptions& o) {
    auto cfg = s.load(path);
    s.manifest().seed = o.seed;
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    auto res = markovify_search(f, o.eps, o.n_max, o.trials, o.seed);
    const auto& w = s.writer();
    json r = s.begin();
    r["found"] = res.found();
    if (res.found()) {
        r["result"] = json{{"trial", res.success->index + 1},
                           {"delta", w.point(res.success->delta)},
                           {"markov", w.markov(res.success->outcome)}};
    }
    r["search"] = w.monte_carlo(res.tried);
    return {o.strict && !res.found() ? BudgetExhausted : Ok, r, io::monte_carlo_csv(res.tried, r["manifest"])};
}

inline Result cmd_genericity(Session& s, const std::string& path, const SearchOptions& o) {
    auto cfg = s.load(path);
    s.manifest().seed = o.seed;
    auto rep = io::validate_config(cfg);
    if (!rep.ok()) return invalid(s, rep);
    auto f = io::build_map(cfg);
    auto mc = genericity_sweep(f, o.eps, o.n_max, o.trials, o.seed);
    json r = s.begin();
    r["sweep"] = s.writer().monte_carlo(mc);
    return {Ok, r, io::monte_carlo_csv(mc, r["manifest"])};
}

struct DistanceOptions {
    std::string metric = "d2";
    std::size_t terms = 30;
    std::optional<Rat> sigma;
};

inline Result cmd_distance(Session& s, const std::string& a, const std::string& b, const DistanceOptions& o) {
    auto ca = s.load(a);
    auto cb = s.load(b);
    for (const auto* c : {&ca, &cb}) {
        auto rep = io::validate_config(*c);
        if (!rep.ok()) return invalid(s, rep);
    }
    auto f = io::build_map(ca);
    auto g = io::build_map(cb);
    const auto& w = s.writer();
    json r = s.begin();
    r["metric"] = o.metric;
    if (o.metric == "d2") {
        auto v = d2(f, g);
        r["value"] = v ? w.rat(*v) : json("infinite");
    } else if (o.metric == "rho") {
        auto e = rho_upper(f, g);
        r["value"] = w.rat(e.value);
        r["estimate"] = w.rho(e);
    } else if (o.metric == "d1") {
        const Rat sigma = o.sigma.value_or(ca.options.sigma);
        auto e = d1_upper(f, g, o.terms, sigma);
        json terms = json::array();
        for (std::size_t n = 0; n < e.summands.size(); ++n) {
            json t = w.rho(e.summands[n]);
            t["n"] = n + 1;
            terms.push_back(t);
        }
        r["value"] = w.rat(e.total);
        r["estimate"] = json{{"sigma", w.rat(e.sigma)},
                             {"terms", e.terms},
                             {"partial", w.rat(e.partial)},
                             {"tail_bound", w.rat(e.tail_bound)},
                             {"total", w.rat(e.total)},
                             {"summands", terms}};
    } else {
        throw std::invalid_argument("unknown metric " + o.metric + " (expected d2, rho or d1)");
    }
    return {Ok, r, std::nullopt};
}

inline Result cmd_stability(Session& s, const std::string& a, const std::string& b, std::size_t n_max, bool strict) {
    auto ca = s.load(a);
    auto cb = s.load(b);
    for (const auto* c : {&ca, &cb}) {
        auto rep = io::validate_config(*c);
        if (!rep.ok()) return invalid(s, rep);
    }
    auto rep = verify_stability(io::build_map(ca), io::build_map(cb), n_max);
    const auto& w = s.writer();
    auto opt_n = [](const std::optional<std::size_t>& n) { return n ? json(*n) : json(nullptr); };
    json r = s.begin();
    r["same_N"] = rep.same_N;
    r["conjugate"] = rep.conjugate;
    r["stabilisation_time_a"] = opt_n(rep.time_a);
    r["stabilisation_time_b"] = opt_n(rep.time_b);
    r["stability_margin_a"] = rep.margin ? w.rat(*rep.margin) : json(nullptr);
    r["cycle_lengths_a"] = rep.cycles_a;
    r["cycle_lengths_b"] = rep.cycles_b;
    bool exhausted = !rep.time_a || !rep.time_b;
    return {strict && exhausted ? BudgetExhausted : Ok, r, std::nullopt};
}

namespace detail {

inline Rat parse_flag(const std::string& name, const std::string& text) {
    try {
        return parse_rat(text);
    } catch (const ParseError& e) {
        throw ParseError("--" + name + ": " + e.what());
    }
}

inline std::vector<std::size_t> parse_depths(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("--depths: expected a comma-separated list of positive integers");
        out.push_back(std::stoul(item));
    }
    return out;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

/// Parses argv, runs one subcommand and writes its report to `out` (or to
/// the --out file). Diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Exact analysis of piecewise contractions on boxes", "pwc"};
    app.require_subcommand(1);
    std::string out_path;
    bool approx = false, strict = false;
    app.add_option("--out", out_path, "Write the report to this file (.csv for Monte Carlo runs)");
    app.add_flag("--approx", approx, "Add decimal approximations next to exact values");
    app.add_flag("--strict", strict, "Exit with 3 when the stabilisation budget is exhausted");

    std::string map, map_b;
    std::size_t n_max = 50, search_n_max = 30, depth = 1, max_len = 3, p_max = 10, terms = 30, count = 100;
    std::uint64_t seed = 0;
    std::string depths = "1,2,3", eps_text, delta_text, sigma_text, metric = "d2";
    bool check_sep = false;

    auto add_map = [&](CLI::App* c) { c->add_option("map", map, "Map JSON file")->required(); };

    auto* validate_cmd = app.add_subcommand("validate", "Check a map file");
    add_map(validate_cmd);
    auto* analyze_cmd = app.add_subcommand("analyze", "Full report for one map");
    add_map(analyze_cmd);
    analyze_cmd->add_option("--nmax", n_max, "Largest depth tried by the stabilisation search");
    analyze_cmd->add_option("--pmax", p_max, "Largest exponent tried for strong contraction");
    analyze_cmd->add_option("--depths", depths, "Comma-separated image-cover depths");
    auto* markov_cmd = app.add_subcommand("markov", "Stabilisation search");
    add_map(markov_cmd);
    markov_cmd->add_option("--nmax", n_max);
    auto* attractor_cmd = app.add_subcommand("attractor", "Periodic attractor of a Markov map");
    add_map(attractor_cmd);
    attractor_cmd->add_option("--nmax", n_max);
    auto* refine_cmd = app.add_subcommand("refine", "Itinerary partition at a given depth");
    add_map(refine_cmd);
    refine_cmd->add_option("--depth", depth)->required();
    auto* cover_cmd = app.add_subcommand("ifs-cover", "Depth-n cover of the IFS attractor");
    add_map(cover_cmd);
    cover_cmd->add_option("--depth", depth)->required();
    auto* fixed_cmd = app.add_subcommand("fixed-points", "Word fixed points");
    add_map(fixed_cmd);
    fixed_cmd->add_option("--maxlen", max_len, "Longest word");
    fixed_cmd->add_flag("--check-separation", check_sep, "Classify coincident fixed points");
    auto* boundary_cmd = app.add_subcommand("boundary", "Boundary facets and their admissible preimages");
    add_map(boundary_cmd);
    boundary_cmd->add_option("--depth", depth)->required();
    boundary_cmd->add_option("--delta", delta_text, "Neighbourhood radius");
    boundary_cmd->add_option("--eps", eps_text, "Admissibility fattening");
    auto* markovify_cmd = app.add_subcommand("markovify", "Search for a Markov translation");
    add_map(markovify_cmd);
    markovify_cmd->add_option("--nmax", search_n_max, "Largest depth tried per trial");
    markovify_cmd->add_option("--eps", eps_text, "Radius of the translation ball")->required();
    markovify_cmd->add_option("--trials", count);
    markovify_cmd->add_option("--seed", seed);
    auto* generic_cmd = app.add_subcommand("genericity", "Markov fraction over random translations");
    add_map(generic_cmd);
    generic_cmd->add_option("--nmax", search_n_max, "Largest depth tried per trial");
    generic_cmd->add_option("--eps", eps_text, "Radius of the translation ball")->required();
    generic_cmd->add_option("--samples", count);
    generic_cmd->add_option("--seed", seed);
    auto* distance_cmd = app.add_subcommand("distance", "Distance estimates between two maps");
    distance_cmd->add_option("--a", map, "First map")->required();
    distance_cmd->add_option("--b", map_b, "Second map")->required();
    distance_cmd->add_option("--metric", metric)->check(CLI::IsMember({"d2", "rho", "d1"}));
    distance_cmd->add_option("--terms", terms);
    distance_cmd->add_option("--sigma", sigma_text);
    auto* stability_cmd = app.add_subcommand("stability", "Compare stabilisation and cycle structure");
    stability_cmd->add_option("--a", map, "First map")->required();
    stability_cmd->add_option("--b", map_b, "Second map")->required();
    stability_cmd->add_option("--nmax", n_max);

    // Global flags are accepted after the subcommand too.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? Ok : InputError;
    }

    std::vector<std::string> command{"pwc"};
    for (int i = 1; i < argc; ++i) command.emplace_back(argv[i]);
    Session session(command, approx);

    Result result;
    try {
        auto opt_rat = [](const char* name, const std::string& t) {
            return t.empty() ? std::optional<Rat>{} : std::optional<Rat>{detail::parse_flag(name, t)};
        };
        if (*validate_cmd) result = cmd_validate(session, map);
        else if (*analyze_cmd) {
            AnalyzeOptions o{n_max, p_max, detail::parse_depths(depths), strict};
            result = cmd_analyze(session, map, o);
        } else if (*markov_cmd) result = cmd_markov(session, map, n_max, strict);
        else if (*attractor_cmd) result = cmd_attractor(session, map, n_max, strict);
        else if (*refine_cmd) result = cmd_refine(session, map, depth);
        else if (*cover_cmd) result = cmd_ifs_cover(session, map, depth);
        else if (*fixed_cmd) result = cmd_fixed_points(session, map, max_len, check_sep);
        else if (*boundary_cmd)
            result = cmd_boundary(session, map, depth, opt_rat("delta", delta_text), opt_rat("eps", eps_text));
        else if (*markovify_cmd || *generic_cmd) {
            SearchOptions o{detail::parse_flag("eps", eps_text), search_n_max, count, seed, strict};
            result = *markovify_cmd ? cmd_markovify(session, map, o) : cmd_genericity(session, map, o);
        } else if (*distance_cmd) {
            DistanceOptions o{metric, terms, opt_rat("sigma", sigma_text)};
            result = cmd_distance(session, map, map_b, o);
        } else if (*stability_cmd) result = cmd_stability(session, map, map_b, n_max, strict);
    } catch (const InvalidMap& e) {
        result = invalid(session, e.report());
    } catch (const std::exception& e) {
        err << "pwc: error: " << e.what() << "\n";
        return InputError;
    }

    std::string body;
    if (!out_path.empty() && detail::ends_with(out_path, ".csv")) {
        if (!result.csv) {
            err << "pwc: error: CSV output is only available for markovify and genericity\n";
            return InputError;
        }
        body = *result.csv;
    } else {
        body = result.report.dump(2) + "\n";
    }
    if (out_path.empty()) {
        out << body;
    } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!(file << body)) {
            err << "pwc: error: cannot write " << out_path << "\n";
            return InputError;
        }
    }
    return result.exit_code;
}

}  // namespace pwc::cli
