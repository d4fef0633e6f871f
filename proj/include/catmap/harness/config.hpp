#pragma once

// Experiment configuration: strict JSON, unknown keys rejected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../birkhoff.hpp"
#include "../classical.hpp"
#include "../errors.hpp"

namespace catmap::harness {

using json = nlohmann::json;

enum class NMode { absolute, ehrenfest };

struct PointPair {
    TorusPoint src, dst;
};

struct TheoremReference {
    int N = 64;
    double n_value = 1.5; // n = ceil(n_value * t_E)
    int pairs = 8;
};

struct ExperimentConfig {
    Sl2IntMatrix matrix = cat_matrix;
    std::vector<int> N_values;
    NMode n_mode = NMode::absolute;
    std::vector<double> n_values{1};
    std::vector<TorusPoint> points;
    std::vector<PointPair> point_pairs;
    int random_pairs = 0;
    int grid_resolution = 64;
    std::string output_dir;
    std::uint64_t seed = 1;
    TheoremReference reference;
    DampingCentre damping_centre = DampingCentre::packet;
    double disk_radius = 10; // in units of sqrt(h)
};

namespace detail {

inline std::string where(const std::string& key)
{
    return "config key '" + key + "'";
}

inline double get_number(const json& j, const std::string& key)
{
    if (!j.is_number())
        throw ConfigError(where(key) + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ConfigError(where(key) + ": expected a finite number");
    return v;
}

inline std::int64_t get_integer(const json& j, const std::string& key)
{
    if (!j.is_number_integer())
        throw ConfigError(where(key) + ": expected an integer");
    return j.get<std::int64_t>();
}

inline const json& get_array(const json& j, const std::string& key)
{
    if (!j.is_array())
        throw ConfigError(where(key) + ": expected an array");
    return j;
}

inline TorusPoint get_point(const json& j, const std::string& key)
{
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(where(key) + ": expected [q, p]");
    return {get_number(j[0], key), get_number(j[1], key)};
}

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& context)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "'" + (context.empty() ? "" : " in '" + context + "'"));
}

// 1-based line and column of a byte offset
inline std::string position(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text, nullptr, true, false);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON at " + detail::position(text, e.byte) + ": " + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config must be a JSON object");
    detail::reject_unknown(root,
                           {"matrix", "N_values", "n_mode", "n_values", "points", "point_pairs", "random_pairs",
                            "grid_resolution", "output_dir", "seed", "theorem_reference", "damping_centre",
                            "disk_radius"},
                           "");
    ExperimentConfig cfg;
    using namespace detail;

    if (root.contains("matrix")) {
        const json& m = get_array(root["matrix"], "matrix");
        if (m.size() != 4)
            throw ConfigError(where("matrix") + ": expected 4 integers [a, b, c, d]");
        std::int64_t e[4];
        for (int i = 0; i < 4; ++i)
            e[i] = get_integer(m[i], "matrix");
        if (e[0] * e[3] - e[1] * e[2] != 1)
            throw ConfigError(where("matrix") + ": determinant must be 1");
        cfg.matrix = {e[0], e[1], e[2], e[3]};
        if (cfg.matrix.trace() <= 2)
            throw ConfigError(where("matrix") + ": trace must exceed 2");
    }

    if (!root.contains("N_values"))
        throw ConfigError("missing required key 'N_values'");
    for (const json& v : get_array(root["N_values"], "N_values")) {
        const std::int64_t N = get_integer(v, "N_values");
        if (N < 2 || N % 2 != 0 || N > 1'000'000)
            throw ConfigError(where("N_values") + ": " + std::to_string(N) + " is not an even integer in [2, 1e6]");
        cfg.N_values.push_back(int(N));
    }
    if (cfg.N_values.empty())
        throw ConfigError(where("N_values") + ": list is empty");

    if (root.contains("n_mode")) {
        const json& m = root["n_mode"];
        if (m == "absolute")
            cfg.n_mode = NMode::absolute;
        else if (m == "ehrenfest")
            cfg.n_mode = NMode::ehrenfest;
        else
            throw ConfigError(where("n_mode") + ": expected \"absolute\" or \"ehrenfest\"");
    }
    if (root.contains("n_values")) {
        cfg.n_values.clear();
        for (const json& v : get_array(root["n_values"], "n_values")) {
            const double x = get_number(v, "n_values");
            if (x < 0)
                throw ConfigError(where("n_values") + ": negative value");
            if (cfg.n_mode == NMode::absolute && (x != std::floor(x) || x > 200))
                throw ConfigError(where("n_values") + ": absolute times must be integers in [0, 200]");
            cfg.n_values.push_back(x);
        }
        if (cfg.n_values.empty())
            throw ConfigError(where("n_values") + ": list is empty");
    }

    if (root.contains("points"))
        for (const json& v : get_array(root["points"], "points"))
            cfg.points.push_back(get_point(v, "points"));
    if (root.contains("point_pairs"))
        for (const json& v : get_array(root["point_pairs"], "point_pairs")) {
            if (!v.is_array() || v.size() != 2)
                throw ConfigError(where("point_pairs") + ": expected [[a, b], [q, p]]");
            cfg.point_pairs.push_back({get_point(v[0], "point_pairs"), get_point(v[1], "point_pairs")});
        }
    if (root.contains("random_pairs")) {
        const std::int64_t k = get_integer(root["random_pairs"], "random_pairs");
        if (k < 0 || k > 10000)
            throw ConfigError(where("random_pairs") + ": expected 0..10000");
        cfg.random_pairs = int(k);
    }
    if (root.contains("grid_resolution")) {
        const std::int64_t R = get_integer(root["grid_resolution"], "grid_resolution");
        if (R < 8 || R > 4096)
            throw ConfigError(where("grid_resolution") + ": must be in [8, 4096]");
        cfg.grid_resolution = int(R);
    }
    if (root.contains("output_dir")) {
        if (!root["output_dir"].is_string())
            throw ConfigError(where("output_dir") + ": expected a string");
        cfg.output_dir = root["output_dir"].get<std::string>();
    }
    if (root.contains("seed")) {
        const json& s = root["seed"];
        if (s.is_number_unsigned())
            cfg.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<std::int64_t>() >= 0)
            cfg.seed = std::uint64_t(s.get<std::int64_t>());
        else
            throw ConfigError(where("seed") + ": expected a non-negative 64-bit integer");
    }
    if (root.contains("theorem_reference")) {
        const json& r = root["theorem_reference"];
        if (!r.is_object())
            throw ConfigError(where("theorem_reference") + ": expected an object");
        reject_unknown(r, {"N", "n_value", "pairs"}, "theorem_reference");
        if (r.contains("N")) {
            const std::int64_t N = get_integer(r["N"], "theorem_reference.N");
            if (N < 2 || N % 2 != 0)
                throw ConfigError(where("theorem_reference.N") + ": must be even and >= 2");
            cfg.reference.N = int(N);
        }
        if (r.contains("n_value")) {
            cfg.reference.n_value = get_number(r["n_value"], "theorem_reference.n_value");
            if (cfg.reference.n_value <= 0)
                throw ConfigError(where("theorem_reference.n_value") + ": must be positive");
        }
        if (r.contains("pairs")) {
            const std::int64_t k = get_integer(r["pairs"], "theorem_reference.pairs");
            if (k < 1 || k > 1000)
                throw ConfigError(where("theorem_reference.pairs") + ": expected 1..1000");
            cfg.reference.pairs = int(k);
        }
    }
    if (root.contains("damping_centre")) {
        const json& d = root["damping_centre"];
        if (d == "packet")
            cfg.damping_centre = DampingCentre::packet;
        else if (d == "origin")
            cfg.damping_centre = DampingCentre::origin;
        else
            throw ConfigError(where("damping_centre") + ": expected \"packet\" or \"origin\"");
    }
    if (root.contains("disk_radius")) {
        cfg.disk_radius = get_number(root["disk_radius"], "disk_radius");
        if (cfg.disk_radius <= 0)
            throw ConfigError(where("disk_radius") + ": must be positive");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline json to_json(const ExperimentConfig& cfg)
{
    json j;
    j["matrix"] = {cfg.matrix.a, cfg.matrix.b, cfg.matrix.c, cfg.matrix.d};
    j["N_values"] = cfg.N_values;
    j["n_mode"] = cfg.n_mode == NMode::absolute ? "absolute" : "ehrenfest";
    j["n_values"] = cfg.n_values;
    j["points"] = json::array();
    for (const TorusPoint& p : cfg.points)
        j["points"].push_back({p.q, p.p});
    j["point_pairs"] = json::array();
    for (const PointPair& pp : cfg.point_pairs)
        j["point_pairs"].push_back({{pp.src.q, pp.src.p}, {pp.dst.q, pp.dst.p}});
    j["random_pairs"] = cfg.random_pairs;
    j["grid_resolution"] = cfg.grid_resolution;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["theorem_reference"] = {{"N", cfg.reference.N}, {"n_value", cfg.reference.n_value}, {"pairs", cfg.reference.pairs}};
    j["damping_centre"] = cfg.damping_centre == DampingCentre::packet ? "packet" : "origin";
    j["disk_radius"] = cfg.disk_radius;
    return j;
}

// Times for one N, sorted and without duplicates.
inline std::vector<int> resolve_times(const ExperimentConfig& cfg, int N)
{
    std::vector<int> out;
    const double tE = ehrenfest_time(torus_h(N), spectral_data(cfg.matrix).lambda);
    for (double x : cfg.n_values)
        out.push_back(cfg.n_mode == NMode::absolute ? int(x) : int(std::ceil(x * tE - 1e-12)));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<int> sorted_N(const ExperimentConfig& cfg)
{
    std::vector<int> Ns = cfg.N_values;
    std::sort(Ns.begin(), Ns.end());
    Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
    return Ns;
}

// Uniform points of [0,1)^2 from mt19937_64, 53 bits per coordinate.
inline std::vector<PointPair> random_point_pairs(std::uint64_t seed, int count)
{
    std::mt19937_64 rng(seed);
    auto u = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    std::vector<PointPair> out;
    for (int i = 0; i < count; ++i) {
        PointPair p;
        p.src = {u(), u()};
        p.dst = {u(), u()};
        out.push_back(p);
    }
    return out;
}

inline std::vector<PointPair> all_pairs(const ExperimentConfig& cfg)
{
    std::vector<PointPair> out = cfg.point_pairs;
    const auto extra = random_point_pairs(cfg.seed, cfg.random_pairs);
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

inline std::vector<PointPair> reference_pairs(const ExperimentConfig& cfg)
{
    return random_point_pairs(cfg.seed + 1, cfg.reference.pairs);
}

} // namespace catmap::harness
