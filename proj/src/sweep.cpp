#include "fastlimit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <thread>

#include "fastlimit/error.hpp"
#include "fastlimit/fast_reaction.hpp"
#include "fastlimit/forward_backward.hpp"
#include "fastlimit/young_measure.hpp"

namespace fastlimit {

namespace fs = std::filesystem;
using json = nlohmann::json;

bool SweepReport::all_ok() const {
    return std::all_of(runs.begin(), runs.end(), [](const EpsResult& r) { return r.ok; });
}

namespace {

double l2_distance(const std::vector<double>& a, const std::vector<double>& b, double dx) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s * dx);
}

// lambda0: centre of the heaviest occupied value bin at least one bin away from f-, f+
std::optional<double> pick_lambda0(const EmpiricalMeasure& nu, const DensityTriple& d,
                                   const Thresholds& t) {
    const double w = nu.bins.width();
    std::optional<double> best;
    double best_mass = -1.0;
    for (int k = 0; k < nu.bins.size(); ++k) {
        const double c = nu.bins.center(k);
        if (!d.occupied[k]) continue;
        if (std::abs(c - t.f_minus) < w || std::abs(c - t.f_plus) < w) continue;
        if (nu.mass[k] > best_mass) {
            best_mass = nu.mass[k];
            best = c;
        }
    }
    return best;
}

std::vector<IdentityReport> cell_identities(const CellSamples& s, const Nonlinearity& F,
                                            const Binning& vb, double v_max, Variant variant,
                                            const std::string& id) {
    const auto& t = F.thresholds();
    const EmpiricalMeasure nu = pushforward(s.u, F, vb);
    const DensityTriple dens = radon_nikodym_densities(s.u, F, vb);
    const auto lambda0 = pick_lambda0(nu, dens, t);
    if (!lambda0) return {};
    const double w = vb.width();
    const double tol = w + 3.0 / std::sqrt(static_cast<double>(s.u.size()));
    const std::array<double, 3> candidates{0.5 * t.f_minus, 0.5 * (t.f_minus + t.f_plus),
                                           0.5 * (t.f_plus + v_max)};
    std::vector<IdentityReport> out;
    for (double tau0 : candidates) {
        if (std::abs(tau0 - *lambda0) < 4.0 * w) continue;
        if (std::abs(tau0 - t.f_minus) < w || std::abs(tau0 - t.f_plus) < w) continue;
        IdentityReport r = theorem_A_residual(dens, branch_tails(s.u, F, tau0), tau0, *lambda0, F, variant);
        r.source = id;
        r.tolerance = tol;
        out.push_back(r);
    }
    return out;
}

}  // namespace

EpsResult analyze_eps(const RunConfig& c, double eps, Trajectory* keep) {
    const Nonlinearity F(c.nonlinearity);
    const auto& t = F.thresholds();
    Trajectory traj = c.system == SystemKind::FastReaction ? simulate(c.fast_reaction(eps))
                                                           : fb_simulate(c.forward_backward(eps));
    const double dx = traj.grid.dx();
    EpsResult r;
    r.eps = eps;
    r.ok = true;
    r.bound = traj.bound;
    r.dt = traj.dt;
    r.steps = static_cast<int>(traj.diagnostics.size()) - 1;

    const auto& d0 = traj.diagnostics.front();
    r.max_energy_increase_per_dt.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t n = 1; n < traj.diagnostics.size(); ++n) {
        const auto& a = traj.diagnostics[n - 1];
        const auto& b = traj.diagnostics[n];
        r.mass_drift = std::max(r.mass_drift, std::abs(b.mass - d0.mass));
        for (int k = 0; k < 3; ++k)
            r.max_energy_increase_per_dt[k] =
                std::max(r.max_energy_increase_per_dt[k], (b.energy[k] - a.energy[k]) / (b.t - a.t));
    }
    r.dissip_gradv = traj.diagnostics.back().dissip_gradv;
    r.dissip_coupling = traj.diagnostics.back().dissip_coupling;

    r.u_min = r.v_min = std::numeric_limits<double>::infinity();
    r.u_max = r.v_max = -std::numeric_limits<double>::infinity();
    for (const auto& s : traj.snapshots) {
        double c2 = 0.0;
        for (std::size_t j = 0; j < s.u.size(); ++j) {
            r.u_min = std::min(r.u_min, s.u[j]);
            r.u_max = std::max(r.u_max, s.u[j]);
            r.v_min = std::min(r.v_min, s.v[j]);
            r.v_max = std::max(r.v_max, s.v[j]);
            const double e = F(s.u[j]) - s.v[j];
            c2 += e * e;
        }
        r.coupling_residual = std::max(r.coupling_residual, std::sqrt(c2 * dx));
    }

    const double v_max = F(traj.bound);
    const Binning ub = u_axis_binning(F, traj.bound, c.bins_u);
    const Binning vb = value_axis_binning(F, v_max, c.bins_v);
    const double delta = c.delta_fraction * (t.beta_plus - t.alpha_minus);
    const Variant variant =
        c.system == SystemKind::FastReaction ? Variant::FastReaction : Variant::ForwardBackward;

    const auto cells = partition_cells(c.t_end, traj.grid.length, c.time_windows, c.space_windows);
    double n_unflagged = 0.0;
    for (const auto& cell : cells) {
        const CellSamples s = collect_cell_samples(traj, cell);
        CellResult cr;
        cr.t_index = cell.t_index;
        cr.x_index = cell.x_index;
        cr.n_samples = s.u.size();
        const PhaseDecomposition dec = decompose(s, F, delta, vb, c.dirac_threshold);
        cr.lambda = dec.lambda;
        cr.v_bar = dec.v_bar;
        cr.dirac_score_v = dec.dirac_score_v;
        cr.fit_residual = dec.fit_residual;
        cr.flagged = dec.flagged;
        EmpiricalMeasure mu = empirical_measure(s.u, ub);
        cr.dirac_score_u = dirac_score(mu);
        cr.var_u = sample_mean_variance(s.u).second;
        std::vector<double> fu(s.u.size());
        std::transform(s.u.begin(), s.u.end(), fu.begin(), [&](double x) { return F(x); });
        cr.var_Fu = sample_mean_variance(fu).second;
        if (c.measures) {
            r.mu_u.push_back(std::move(mu));
            r.pushforward.push_back(empirical_measure(fu, vb));
        }
        if (c.identities) {
            const std::string id = std::to_string(cell.t_index) + "_" + std::to_string(cell.x_index);
            for (auto& rep : cell_identities(s, F, vb, v_max, variant, id)) {
                r.max_identity_residual = std::max(r.max_identity_residual, std::abs(rep.residual));
                r.identities.push_back(std::move(rep));
            }
        }
        r.mean_dirac_v += cr.dirac_score_v;
        r.mean_dirac_u += cr.dirac_score_u;
        r.mean_var_Fu += cr.var_Fu;
        r.mean_lambda2 += cr.lambda[1];
        if (!cr.flagged) {
            n_unflagged += 1.0;
            r.max_fit_residual = std::max(r.max_fit_residual, cr.fit_residual);
        }
        r.cells.push_back(cr);
    }
    const double nc = static_cast<double>(cells.size());
    r.mean_dirac_v /= nc;
    r.mean_dirac_u /= nc;
    r.mean_var_Fu /= nc;
    r.mean_lambda2 /= nc;

    r.final_u = traj.snapshots.back().u;
    r.final_v = traj.snapshots.back().v;
    if (keep) *keep = std::move(traj);
    return r;
}

namespace {

class CsvFile {
public:
    explicit CsvFile(const fs::path& path) : f_(std::fopen(path.string().c_str(), "w")) {
        if (!f_) throw std::runtime_error("cannot write " + path.string());
    }
    ~CsvFile() {
        if (f_) std::fclose(f_);
    }
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;

    void line(const char* text) { std::fprintf(f_, "%s\n", text); }
    CsvFile& num(double x) {
        std::fprintf(f_, first_ ? "%.17g" : ",%.17g", x);
        first_ = false;
        return *this;
    }
    CsvFile& integer(long long x) {
        std::fprintf(f_, first_ ? "%lld" : ",%lld", x);
        first_ = false;
        return *this;
    }
    CsvFile& text(const std::string& s) {
        std::fprintf(f_, first_ ? "%s" : ",%s", s.c_str());
        first_ = false;
        return *this;
    }
    void end() {
        std::fputc('\n', f_);
        first_ = true;
    }

private:
    std::FILE* f_;
    bool first_ = true;
};

std::string variant_name(Variant v) {
    return v == Variant::FastReaction ? "fast_reaction" : "forward_backward";
}

json measure_pairs(const EmpiricalMeasure& mu) {
    json arr = json::array();
    for (int k = 0; k < mu.bins.size(); ++k) arr.push_back({mu.bins.center(k), mu.mass[k]});
    return arr;
}

void write_eps_files(const RunConfig& c, const fs::path& dir, const Trajectory& traj,
                     const EpsResult& r) {
    fs::create_directories(dir);
    const bool fr = c.system == SystemKind::FastReaction;
    const Grid& g = traj.grid;

    auto write_snapshot = [&](std::size_t k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu.csv", k);
        CsvFile f(dir / name);
        f.line(fr ? schema::snapshot_fast_reaction : schema::snapshot_forward_backward);
        const auto& s = traj.snapshots[k];
        for (int j = 0; j < g.n_cells; ++j) {
            f.integer(j).num(g.x(j)).num(s.u[j]).num(s.v[j]);
            f.end();
        }
    };
    if (c.snapshots == SnapshotExport::All)
        for (std::size_t k = 0; k < traj.snapshots.size(); ++k) write_snapshot(k);
    else if (c.snapshots == SnapshotExport::Final)
        write_snapshot(traj.snapshots.size() - 1);

    {
        CsvFile f(dir / "diagnostics.csv");
        f.line(fr ? schema::diagnostics_fast_reaction : schema::diagnostics_forward_backward);
        for (const auto& d : traj.diagnostics) {
            f.num(d.t).num(d.mass);
            if (fr)
                f.num(d.energy[0]).num(d.energy[1]).num(d.energy[2]);
            else
                f.num(d.energy[0]);
            f.num(d.dissip_gradv).num(d.dissip_coupling);
            f.end();
        }
    }
    {
        CsvFile f(dir / "cells.csv");
        f.line(schema::cells);
        for (const auto& cr : r.cells) {
            f.integer(cr.t_index).integer(cr.x_index);
            f.num(cr.lambda[0]).num(cr.lambda[1]).num(cr.lambda[2]).num(cr.v_bar);
            f.num(cr.dirac_score_v).num(cr.dirac_score_u).num(cr.fit_residual);
            f.end();
        }
    }
    {
        CsvFile f(dir / "identities.csv");
        f.line(schema::identities);
        for (const auto& id : r.identities) {
            f.text(id.source).text(variant_name(id.variant));
            f.num(id.tau0).num(id.lambda0).num(id.lhs).num(id.rhs).num(id.residual).num(id.tolerance);
            f.end();
        }
    }
    if (c.measures) {
        json cells = json::array();
        for (std::size_t k = 0; k < r.mu_u.size(); ++k)
            cells.push_back({{"t_window", r.cells[k].t_index},
                             {"x_window", r.cells[k].x_index},
                             {"mu_u", measure_pairs(r.mu_u[k])},
                             {"pushforward", measure_pairs(r.pushforward[k])}});
        std::ofstream(dir / "measures.json") << json{{"eps", r.eps}, {"cells", cells}}.dump() << "\n";
    }
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

SweepReport run_sweep(const RunConfig& config, const SweepOptions& options) {
    config.validate();
    SweepReport report;
    report.config = config;
    if (options.output_dir) report.config.output_dir = *options.output_dir;
    const fs::path out_dir = report.config.output_dir;
    const std::size_t n = config.eps.size();
    report.runs.resize(n);
    report.wall_seconds.assign(n, 0.0);

    int workers = options.workers.value_or(config.workers);
    if (workers <= 0) workers = static_cast<int>(n);
    workers = std::min<int>(workers, static_cast<int>(n));

    if (options.write_files) fs::create_directories(out_dir);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            const auto start = std::chrono::steady_clock::now();
            EpsResult& r = report.runs[k];
            try {
                Trajectory traj;
                r = analyze_eps(config, config.eps[k], &traj);
                if (options.write_files) write_eps_files(config, out_dir / ("eps_" + std::to_string(k)), traj, r);
            } catch (const SolverError& e) {
                r = EpsResult{};
                r.error = e.what();
                r.error_kind = "solver";
            } catch (const MeasureError& e) {
                r = EpsResult{};
                r.error = e.what();
                r.error_kind = "measure";
            } catch (const std::invalid_argument& e) {
                r = EpsResult{};
                r.error = e.what();
                r.error_kind = "validation";
            } catch (const std::exception& e) {
                r = EpsResult{};
                r.error = e.what();
                r.error_kind = "solver";
            }
            r.eps = config.eps[k];
            report.wall_seconds[k] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    const double dx = config.grid.dx();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto& a = report.runs[k];
        const auto& b = report.runs[k + 1];
        TableRow row;
        row.eps = a.eps;
        row.eps_next = b.eps;
        if (a.ok && b.ok) {
            row.cauchy_v = l2_distance(a.final_v, b.final_v, dx);
            row.cauchy_u = l2_distance(a.final_u, b.final_u, dx);
        }
        row.mean_dirac_v = a.mean_dirac_v;
        row.mean_dirac_u = a.mean_dirac_u;
        row.lambda2 = a.mean_lambda2;
        report.table.push_back(row);
    }

    if (options.write_files) {
        std::ofstream(out_dir / "report.json") << report_json(report);
        json timing = json::object();
        json per = json::array();
        for (std::size_t k = 0; k < n; ++k) per.push_back({{"eps", config.eps[k]}, {"seconds", report.wall_seconds[k]}});
        timing["runs"] = per;
        timing["workers"] = workers;
        std::ofstream(out_dir / "timing.json") << timing.dump(2) << "\n";
    }
    return report;
}

std::string report_json(const SweepReport& report) {
    // location-independent copy of the config so reruns elsewhere compare equal
    RunConfig cfg = report.config;
    cfg.output_dir = ".";
    cfg.workers = 0;

    json runs = json::array();
    for (const auto& r : report.runs) {
        json j{{"eps", r.eps}, {"status", r.ok ? "ok" : "error"}};
        if (!r.ok) {
            j["error"] = r.error;
            j["error_kind"] = r.error_kind;
            runs.push_back(j);
            continue;
        }
        j["bound"] = r.bound;
        j["dt"] = r.dt;
        j["steps"] = r.steps;
        j["mass_drift"] = r.mass_drift;
        j["max_energy_increase_per_dt"] = {{"id", r.max_energy_increase_per_dt[0]},
                                           {"cubic", r.max_energy_increase_per_dt[1]},
                                           {"step", r.max_energy_increase_per_dt[2]}};
        j["u_range"] = {r.u_min, r.u_max};
        j["v_range"] = {r.v_min, r.v_max};
        j["dissip_gradv"] = r.dissip_gradv;
        j["dissip_coupling"] = r.dissip_coupling;
        j["coupling_residual"] = r.coupling_residual;
        j["mean_dirac_v"] = r.mean_dirac_v;
        j["mean_dirac_u"] = r.mean_dirac_u;
        j["mean_var_Fu"] = r.mean_var_Fu;
        j["mean_lambda2"] = r.mean_lambda2;
        j["max_fit_residual"] = r.max_fit_residual;
        j["max_identity_residual"] = r.max_identity_residual;
        json cells = json::array();
        for (const auto& c : r.cells)
            cells.push_back({{"t_window", c.t_index},
                             {"x_window", c.x_index},
                             {"n_samples", c.n_samples},
                             {"lambda", c.lambda},
                             {"v_bar", c.v_bar},
                             {"dirac_score_v", c.dirac_score_v},
                             {"dirac_score_u", c.dirac_score_u},
                             {"fit_residual", c.fit_residual},
                             {"flagged", c.flagged},
                             {"var_u", c.var_u},
                             {"var_Fu", c.var_Fu}});
        j["cells"] = cells;
        runs.push_back(j);
    }
    json table = json::array();
    for (const auto& row : report.table)
        table.push_back({{"eps", row.eps},
                         {"eps_next", row.eps_next},
                         {"cauchy_v", optional_number(row.cauchy_v)},
                         {"cauchy_u", optional_number(row.cauchy_u)},
                         {"mean_dirac_v", row.mean_dirac_v},
                         {"mean_dirac_u", row.mean_dirac_u},
                         {"lambda2", row.lambda2}});
    json doc{{"system", system_name(report.config.system)},
             {"config", serialize(cfg)},
             {"eps", report.config.eps},
             {"runs", runs},
             {"table", table}};
    return doc.dump(2) + "\n";
}

SweepReport parse_report_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    SweepReport report;
    try {
        report.config.eps = doc.at("eps").get<std::vector<double>>();
        for (const auto& j : doc.at("runs")) {
            EpsResult r;
            r.eps = j.at("eps").get<double>();
            r.ok = j.at("status").get<std::string>() == "ok";
            if (!r.ok) r.error = j.value("error", "");
            report.runs.push_back(r);
        }
        for (const auto& j : doc.at("table")) {
            TableRow row;
            row.eps = j.at("eps").get<double>();
            row.eps_next = j.at("eps_next").get<double>();
            if (!j.at("cauchy_v").is_null()) row.cauchy_v = j.at("cauchy_v").get<double>();
            if (!j.at("cauchy_u").is_null()) row.cauchy_u = j.at("cauchy_u").get<double>();
            row.mean_dirac_v = j.at("mean_dirac_v").get<double>();
            row.mean_dirac_u = j.at("mean_dirac_u").get<double>();
            row.lambda2 = j.at("lambda2").get<double>();
            report.table.push_back(row);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report is missing fields: ") + e.what());
    }
    return report;
}

std::string convergence_table(const SweepReport& report) {
    if (report.runs.size() < 2 && report.config.eps.size() < 2)
        throw std::invalid_argument("convergence table needs at least two eps values");
    auto cell = [](const std::optional<double>& x) {
        char buf[32];
        if (x)
            std::snprintf(buf, sizeof buf, "%14.6e", *x);
        else
            std::snprintf(buf, sizeof buf, "%14s", "failed");
        return std::string(buf);
    };
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%12s %14s %14s %10s %10s %10s\n", "eps", "|v-v_next|", "|u-u_next|",
                  "dirac_v", "dirac_u", "lambda2");
    os << buf;
    for (const auto& row : report.table) {
        std::snprintf(buf, sizeof buf, "%12.4e %s %s %10.4f %10.4f %10.4f\n", row.eps,
                      cell(row.cauchy_v).c_str(), cell(row.cauchy_u).c_str(), row.mean_dirac_v,
                      row.mean_dirac_u, row.lambda2);
        os << buf;
    }
    return os.str();
}

}  // namespace fastlimit
