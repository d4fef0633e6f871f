#pragma once

// The five standard experiments. Cells are computed in parallel, written to
// their own slots, and emitted in sorted key order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "../birkhoff.hpp"
#include "../lagrangian.hpp"
#include "../parallel.hpp"
#include "../torus.hpp"
#include "config.hpp"
#include "table.hpp"

namespace catmap::harness {

struct ExtraFile {
    std::string name;
    std::string content;
};

struct ExperimentResult {
    ResultTable table;
    std::vector<ExtraFile> files;
    nlohmann::json summary = nlohmann::json::object();
};

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"unitarity", "egorov", "theorem", "bands", "eigenphases"};
    return names;
}

// ---------------------------------------------------------------------------

inline ExperimentResult run_unitarity(const ExperimentConfig& cfg, unsigned threads = 1)
{
    ExperimentResult r;
    r.table = {"unitarity", {"N", "unitarity_defect", "gram_min_eigenvalue", "wall_time_s"}, {}};
    for (int N : sorted_N(cfg)) {
        const auto t0 = std::chrono::steady_clock::now();
        const CMatrix U = build_propagator_matrix(cfg.matrix, N, threads);
        const double defect = unitarity_defect(U);
        const double gram = comb_gram_min_eigenvalue(N);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.table.add({std::int64_t(N), defect, gram, secs});
    }
    return r;
}

// ---------------------------------------------------------------------------

// Mass of a Husimi grid within torus distance `radius` of `centre`.
inline double disk_mass(const HusimiGrid& g, const TorusPoint& centre, double radius)
{
    double s = 0;
    for (int i = 0; i < g.R; ++i)
        for (int j = 0; j < g.R; ++j) {
            const double dq = circle_distance(double(i) / g.R, centre.q);
            const double dp = circle_distance(double(j) / g.R, centre.p);
            if (dq * dq + dp * dp <= radius * radius)
                s += g.at(i, j);
        }
    return s / (double(g.R) * g.R);
}

inline std::string husimi_csv(const HusimiGrid& g, int N, int n, const TorusPoint& pt)
{
    std::string out = "N," + std::to_string(N) + "\n";
    out += "n," + std::to_string(n) + "\n";
    out += "point," + format_double(pt.q) + "," + format_double(pt.p) + "\n";
    for (int i = 0; i < g.R; ++i) {
        for (int j = 0; j < g.R; ++j) {
            if (j)
                out += ',';
            out += format_double(g.at(i, j));
        }
        out += '\n';
    }
    return out;
}

inline TorusPoint cat_iterate(const Sl2IntMatrix& M, int n, const TorusPoint& pt)
{
    return cat_apply(M.pow(n), pt);
}

inline ExperimentResult run_egorov(const ExperimentConfig& cfg, unsigned threads = 1)
{
    if (cfg.points.empty())
        throw ConfigError("egorov needs a non-empty 'points' list");
    struct EgorovCell {
        int N, n;
        std::size_t idx;
    };
    std::vector<EgorovCell> cells;
    for (int N : sorted_N(cfg))
        for (int n : resolve_times(cfg, N))
            for (std::size_t k = 0; k < cfg.points.size(); ++k)
                cells.push_back({N, n, k});

    const double lambda = spectral_data(cfg.matrix).lambda;
    std::vector<std::vector<Cell>> rows(cells.size());
    std::vector<ExtraFile> files(cells.size());
    // each cell runs its Husimi grid serially; parallelism is across cells
    parallel_for(cells.size(), threads, [&](std::size_t c) {
        const auto [N, n, k] = cells[c];
        const double h = torus_h(N);
        const TorusPoint pt = cfg.points[k];
        const TorusState D = torus_coefficients(propagate_gaussian(cfg.matrix, wavepacket(pt.q, pt.p, h), n));
        const HusimiGrid g = husimi(D, cfg.grid_resolution, 1);
        const TorusPoint centre = cat_iterate(cfg.matrix, n, pt);
        const double mass = disk_mass(g, centre, cfg.disk_radius * std::sqrt(h));
        const double mass2 = disk_mass(g, centre, 2 * std::sqrt(h));
        rows[c] = {std::int64_t(N), std::int64_t(n), n / ehrenfest_time(h, lambda), std::int64_t(k), pt.q, pt.p,
                   centre.q, centre.p, mass, mass2, g.riemann_mass()};
        files[c] = {"husimi_N" + std::to_string(N) + "_n" + std::to_string(n) + "_p" + std::to_string(k) + ".csv",
                    husimi_csv(g, N, n, pt)};
    });
    ExperimentResult r;
    r.table = {"egorov",
               {"N", "n", "n_over_tE", "point", "q", "p", "centre_q", "centre_p", "disk_mass", "disk_mass_2sqrt_h",
                "total_mass"},
               {}};
    for (auto& row : rows)
        r.table.add(std::move(row));
    r.files = std::move(files);
    return r;
}

// ---------------------------------------------------------------------------

inline std::vector<TheoremCase> theorem_cases(const ExperimentConfig& cfg, const std::vector<PointPair>& pairs)
{
    std::vector<TheoremCase> cases;
    for (int N : sorted_N(cfg))
        for (int n : resolve_times(cfg, N))
            for (const PointPair& p : pairs)
                cases.push_back({N, n, p.src, p.dst});
    return cases;
}

inline cplx fit_reference_constant(const ExperimentConfig& cfg, unsigned threads)
{
    const double lambda = spectral_data(cfg.matrix).lambda;
    const int N = cfg.reference.N;
    const int n = int(std::ceil(cfg.reference.n_value * ehrenfest_time(torus_h(N), lambda) - 1e-12));
    std::vector<TheoremCase> ref;
    for (const PointPair& p : reference_pairs(cfg))
        ref.push_back({N, n, p.src, p.dst});
    return fit_theorem_constant(cfg.matrix, ref, cfg.damping_centre, threads);
}

inline ExperimentResult run_theorem(const ExperimentConfig& cfg, unsigned threads = 1)
{
    const std::vector<PointPair> pairs = all_pairs(cfg);
    if (pairs.empty())
        throw ConfigError("theorem needs 'point_pairs' or 'random_pairs'");
    const double lambda = spectral_data(cfg.matrix).lambda;
    const cplx D = fit_reference_constant(cfg, threads);
    const std::vector<TheoremCase> cases = theorem_cases(cfg, pairs);
    const std::vector<TheoremCell> cells = theorem_error_table(cfg.matrix, cases, D, cfg.damping_centre, threads);

    ExperimentResult r;
    r.table = {"theorem",
               {"N", "n", "n_over_tE", "pair", "src_q", "src_p", "dst_q", "dst_p", "lhs_re", "lhs_im", "rhs_re",
                "rhs_im", "lhs_abs", "rhs_abs", "residual", "bound", "ratio", "below_threshold"},
               {}};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const TheoremCell& c = cells[i];
        const double tE = ehrenfest_time(torus_h(c.N), lambda);
        r.table.add({std::int64_t(c.N), std::int64_t(c.n), c.n / tE, std::int64_t(i % pairs.size()), c.src.q, c.src.p,
                     c.dst.q, c.dst.p, c.lhs.real(), c.lhs.imag(), c.rhs.real(), c.rhs.imag(), std::abs(c.lhs),
                     std::abs(c.rhs), c.residual, c.bound, c.ratio(), std::int64_t(c.below_threshold)});
    }
    r.summary["D"] = {D.real(), D.imag()};
    return r;
}

// ---------------------------------------------------------------------------

inline ExperimentResult run_bands(const ExperimentConfig& cfg, unsigned threads = 1)
{
    const std::vector<PointPair> pairs = all_pairs(cfg);
    if (pairs.empty())
        throw ConfigError("bands needs 'point_pairs' or 'random_pairs'");
    const SpectralData sd = spectral_data(cfg.matrix);
    const std::vector<TheoremCase> cases = theorem_cases(cfg, pairs);
    std::vector<std::vector<Cell>> rows(cases.size());
    parallel_for(cases.size(), threads, [&](std::size_t i) {
        const TheoremCase& c = cases[i];
        const double h = torus_h(c.N);
        const GaussianState g = propagate_gaussian(cfg.matrix, wavepacket(c.src.q, c.src.p, h), c.n);
        const double tail = off_band_tail(g, c.dst.q, c.dst.p, std::tan(sd.theta));
        const bool below = c.n < band_threshold(h, sd.lambda);
        const BandDifference d = band_difference(cfg.matrix, c.n, h, c.dst.q, c.dst.p, true, c.src);
        rows[i] = {std::int64_t(c.N), std::int64_t(c.n), std::int64_t(i % pairs.size()), c.src.q, c.src.p, c.dst.q,
                   c.dst.p, tail, d.difference, d.bound, d.difference / d.bound, std::int64_t(below)};
    });
    ExperimentResult r;
    r.table = {"bands",
               {"N", "n", "pair", "src_q", "src_p", "dst_q", "dst_p", "off_band_tail", "band_difference", "bound",
                "ratio", "below_threshold"},
               {}};
    for (auto& row : rows)
        r.table.add(std::move(row));
    return r;
}

// ---------------------------------------------------------------------------

inline ExperimentResult run_eigenphases(const ExperimentConfig& cfg, unsigned threads = 1)
{
    ExperimentResult r;
    r.table = {"eigenphases", {"N", "index", "phase", "spacing", "modulus"}, {}};
    for (int N : sorted_N(cfg)) {
        const std::vector<SpectrumPoint> s = unitary_spectrum(build_propagator_matrix(cfg.matrix, N, threads));
        for (std::size_t i = 0; i < s.size(); ++i) {
            // nearest-neighbour spacing on the circle, the last one wrapping to the first
            const double next = i + 1 < s.size() ? s[i + 1].phase : s[0].phase + 2 * std::numbers::pi;
            r.table.add({std::int64_t(N), std::int64_t(i), s[i].phase, next - s[i].phase, s[i].modulus});
        }
    }
    return r;
}

inline ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& cfg, unsigned threads = 1)
{
    if (name == "unitarity")
        return run_unitarity(cfg, threads);
    if (name == "egorov")
        return run_egorov(cfg, threads);
    if (name == "theorem")
        return run_theorem(cfg, threads);
    if (name == "bands")
        return run_bands(cfg, threads);
    if (name == "eigenphases")
        return run_eigenphases(cfg, threads);
    throw ConfigError("unknown experiment '" + name + "'");
}

} // namespace catmap::harness
