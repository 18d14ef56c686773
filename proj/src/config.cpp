#include "fastlimit/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fastlimit/error.hpp"

namespace fastlimit {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("expected a number");
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(x))
        throw std::invalid_argument("'" + s + "' is not a finite number");
    return x;
}

long long to_integer(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("expected an integer");
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw std::invalid_argument("'" + s + "' is not an integer");
    return x;
}

int to_int(const std::string& s) {
    const long long x = to_integer(s);
    if (x < -2147483647LL || x > 2147483647LL) throw std::invalid_argument("'" + s + "' is out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("'" + s + "' is not a boolean");
}

std::vector<double> to_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(to_double(item));
    return out;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? ", " : "") + fmt(xs[k]);
    return out;
}

}  // namespace

std::string system_name(SystemKind s) {
    return s == SystemKind::FastReaction ? "fast_reaction" : "forward_backward";
}

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    try {
        Nonlinearity F(nonlinearity);
    } catch (const ShapeError& e) {
        fail(std::string("nonlinearity: ") + e.what());
    }
    if (grid.n_cells < 4) fail("grid.n must be at least 4");
    if (!(grid.length > 0.0)) fail("grid.length must be positive");
    if (eps.empty()) fail("eps list must not be empty");
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0.0)) fail("eps values must be positive");
        if (k > 0 && !(eps[k] < eps[k - 1])) fail("eps list must be strictly decreasing");
    }
    if (!(t_end > 0.0)) fail("t_end must be positive");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (system == SystemKind::FastReaction && !(t_end >= dt)) fail("t_end must be at least dt");
    if (!(fb_c_dt > 0.0 && fb_c_dt <= 1.0)) fail("fb.c_dt must lie in (0, 1]");
    if (time_windows < 1 || space_windows < 1) fail("cell windows must be positive");
    if (space_windows > grid.n_cells) fail("cells.space_windows exceeds grid.n");
    if (bins_u < 2 || bins_v < 2) fail("bin counts must be at least 2");
    if (init.period < 2) fail("init.period must be at least 2");
    if (!(init.theta >= 0.0 && init.theta <= 1.0)) fail("init.theta must lie in [0, 1]");
    if (!(init.jitter >= 0.0)) fail("init.jitter must be nonnegative");
    if (init.modes < 1) fail("init.modes must be positive");
    if (init.value && !(*init.value >= 0.0)) fail("init.value must be nonnegative");
    if (init.r) {
        const auto t = analyze(nonlinearity);
        if (!(*init.r > t.f_minus && *init.r < t.f_plus)) fail("init.r must lie in (f-, f+)");
    }
    if (entropy_h && !(*entropy_h > 0.0)) fail("entropy.h must be positive");
    if (entropy_h) {
        const auto t = analyze(nonlinearity);
        if (*entropy_h > (t.beta_plus - t.alpha_minus) / 256.0)
            fail("entropy.h must not exceed (beta+ - alpha-)/256");
    }
    if (workers < 0) fail("workers must be nonnegative");
    if (!(dirac_threshold >= 0.0 && dirac_threshold <= 1.0))
        fail("decompose.dirac_threshold must lie in [0, 1]");
    if (!(delta_fraction > 0.0)) fail("decompose.delta_fraction must be positive");
    if (output_dir.empty()) fail("output.dir must not be empty");
}

FastReactionConfig RunConfig::fast_reaction(double eps_value) const {
    FastReactionConfig c;
    c.nonlinearity = nonlinearity;
    c.grid = grid;
    c.eps = eps_value;
    c.t_end = t_end;
    c.dt_macro = dt;
    c.init = init;
    c.snapshot_cadence = cadence();
    c.diffusion = diffusion;
    c.entropy_tau0 = entropy_tau0;
    c.entropy_h = entropy_h;
    return c;
}

ForwardBackwardConfig RunConfig::forward_backward(double eps_value) const {
    ForwardBackwardConfig c;
    c.nonlinearity = nonlinearity;
    c.grid = grid;
    c.eps = eps_value;
    c.t_end = t_end;
    c.c_dt = fb_c_dt;
    c.dt_max = dt;
    c.init = init;
    c.snapshot_cadence = cadence();
    c.entropy_tau0 = entropy_tau0;
    c.entropy_h = entropy_h;
    return c;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::map<std::string, std::pair<std::string, int>> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = {value, lineno};
    }

    for (const char* required : {"system", "nonlinearity.kind", "grid.n", "eps"})
        if (!kv.count(required)) throw ConfigError(std::string("missing required key '") + required + "'");

    std::vector<Breakpoint> breakpoints;
    std::vector<double> slopes;
    std::optional<std::vector<double>> coefficients;

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"system",
         [&](const std::string& v) {
             if (v == "fast_reaction")
                 c.system = SystemKind::FastReaction;
             else if (v == "forward_backward")
                 c.system = SystemKind::ForwardBackward;
             else
                 throw std::invalid_argument("unknown system '" + v + "'");
         }},
        {"nonlinearity.kind",
         [&](const std::string& v) {
             if (v == "affine")
                 c.nonlinearity.kind = NonlinearityKind::PiecewiseAffine;
             else if (v == "cubic")
                 c.nonlinearity.kind = NonlinearityKind::SmoothCubic;
             else
                 throw std::invalid_argument("unknown nonlinearity kind '" + v + "'");
         }},
        {"nonlinearity.breakpoints",
         [&](const std::string& v) {
             for (const auto& item : split(v, ',')) {
                 const auto colon = item.find(':');
                 if (colon == std::string::npos) throw std::invalid_argument("breakpoint '" + item + "' is not x:y");
                 breakpoints.push_back({to_double(trim(item.substr(0, colon))),
                                        to_double(trim(item.substr(colon + 1)))});
             }
         }},
        {"nonlinearity.slopes", [&](const std::string& v) { slopes = to_list(v); }},
        {"nonlinearity.coefficients",
         [&](const std::string& v) {
             coefficients = to_list(v);
             if (coefficients->size() != 3) throw std::invalid_argument("expected three coefficients c3, c2, c1");
         }},
        {"grid.n", [&](const std::string& v) { c.grid.n_cells = to_int(v); }},
        {"grid.length", [&](const std::string& v) { c.grid.length = to_double(v); }},
        {"eps", [&](const std::string& v) { c.eps = to_list(v); }},
        {"t_end", [&](const std::string& v) { c.t_end = to_double(v); }},
        {"dt", [&](const std::string& v) { c.dt = to_double(v); }},
        {"fb.c_dt", [&](const std::string& v) { c.fb_c_dt = to_double(v); }},
        {"diffusion", [&](const std::string& v) { c.diffusion = parse_diffusion_scheme(v); }},
        {"init.generator", [&](const std::string& v) { c.init.generator = parse_generator(v); }},
        {"init.value", [&](const std::string& v) { c.init.value = to_double(v); }},
        {"init.r", [&](const std::string& v) { c.init.r = to_double(v); }},
        {"init.theta", [&](const std::string& v) { c.init.theta = to_double(v); }},
        {"init.period", [&](const std::string& v) { c.init.period = to_int(v); }},
        {"init.jitter", [&](const std::string& v) { c.init.jitter = to_double(v); }},
        {"init.modes", [&](const std::string& v) { c.init.modes = to_int(v); }},
        {"seed",
         [&](const std::string& v) {
             const long long s = to_integer(v);
             if (s < 0) throw std::invalid_argument("seed must be nonnegative");
             c.init.seed = static_cast<std::uint64_t>(s);
         }},
        {"cells.time_windows", [&](const std::string& v) { c.time_windows = to_int(v); }},
        {"cells.space_windows", [&](const std::string& v) { c.space_windows = to_int(v); }},
        {"bins.u", [&](const std::string& v) { c.bins_u = to_int(v); }},
        {"bins.v", [&](const std::string& v) { c.bins_v = to_int(v); }},
        {"entropy.tau0", [&](const std::string& v) { c.entropy_tau0 = to_double(v); }},
        {"entropy.h", [&](const std::string& v) { c.entropy_h = to_double(v); }},
        {"snapshot.cadence", [&](const std::string& v) { c.snapshot_cadence = to_double(v); }},
        {"output.dir", [&](const std::string& v) { c.output_dir = v; }},
        {"output.snapshots",
         [&](const std::string& v) {
             if (v == "all")
                 c.snapshots = SnapshotExport::All;
             else if (v == "final")
                 c.snapshots = SnapshotExport::Final;
             else if (v == "none")
                 c.snapshots = SnapshotExport::None;
             else
                 throw std::invalid_argument("output.snapshots must be all, final or none");
         }},
        {"workers", [&](const std::string& v) { c.workers = to_int(v); }},
        {"decompose.dirac_threshold", [&](const std::string& v) { c.dirac_threshold = to_double(v); }},
        {"decompose.delta_fraction", [&](const std::string& v) { c.delta_fraction = to_double(v); }},
        {"diagnostics.identities", [&](const std::string& v) { c.identities = to_bool(v); }},
        {"diagnostics.measures", [&](const std::string& v) { c.measures = to_bool(v); }},
    };

    // apply in line order so errors name the first bad line
    std::vector<std::pair<int, std::string>> order;
    for (const auto& [key, entry] : kv) order.push_back({entry.second, key});
    std::sort(order.begin(), order.end());
    for (const auto& [lineno, key] : order) {
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        try {
            it->second(kv[key].first);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + key + ": " + e.what());
        }
    }

    if (c.nonlinearity.kind == NonlinearityKind::PiecewiseAffine) {
        if (coefficients) throw ConfigError("nonlinearity.coefficients applies to the cubic only");
        if (breakpoints.empty() != slopes.empty())
            throw ConfigError("nonlinearity.breakpoints and nonlinearity.slopes must be given together");
        if (!breakpoints.empty()) {
            c.nonlinearity.breakpoints = breakpoints;
            c.nonlinearity.slopes = slopes;
        } else {
            c.nonlinearity = canonical_affine_spec();
        }
    } else {
        if (!breakpoints.empty() || !slopes.empty())
            throw ConfigError("breakpoints and slopes apply to the affine kind only");
        c.nonlinearity = canonical_cubic_spec();
        c.nonlinearity.breakpoints.clear();
        c.nonlinearity.slopes.clear();
        if (coefficients) c.nonlinearity.cubic = {(*coefficients)[0], (*coefficients)[1], (*coefficients)[2]};
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
    std::ostringstream os;
    os << "system = " << system_name(c.system) << "\n";
    if (c.nonlinearity.kind == NonlinearityKind::PiecewiseAffine) {
        os << "nonlinearity.kind = affine\n";
        os << "nonlinearity.breakpoints = ";
        for (std::size_t k = 0; k < c.nonlinearity.breakpoints.size(); ++k)
            os << (k ? ", " : "") << fmt(c.nonlinearity.breakpoints[k].x) << ":"
               << fmt(c.nonlinearity.breakpoints[k].y);
        os << "\nnonlinearity.slopes = " << fmt_list(c.nonlinearity.slopes) << "\n";
    } else {
        os << "nonlinearity.kind = cubic\n";
        os << "nonlinearity.coefficients = "
           << fmt_list({c.nonlinearity.cubic[0], c.nonlinearity.cubic[1], c.nonlinearity.cubic[2]}) << "\n";
    }
    os << "grid.n = " << c.grid.n_cells << "\n";
    os << "grid.length = " << fmt(c.grid.length) << "\n";
    os << "eps = " << fmt_list(c.eps) << "\n";
    os << "t_end = " << fmt(c.t_end) << "\n";
    os << "dt = " << fmt(c.dt) << "\n";
    os << "fb.c_dt = " << fmt(c.fb_c_dt) << "\n";
    os << "diffusion = " << diffusion_scheme_name(c.diffusion) << "\n";
    os << "init.generator = " << generator_name(c.init.generator) << "\n";
    if (c.init.value) os << "init.value = " << fmt(*c.init.value) << "\n";
    if (c.init.r) os << "init.r = " << fmt(*c.init.r) << "\n";
    os << "init.theta = " << fmt(c.init.theta) << "\n";
    os << "init.period = " << c.init.period << "\n";
    os << "init.jitter = " << fmt(c.init.jitter) << "\n";
    os << "init.modes = " << c.init.modes << "\n";
    os << "seed = " << c.init.seed << "\n";
    os << "cells.time_windows = " << c.time_windows << "\n";
    os << "cells.space_windows = " << c.space_windows << "\n";
    os << "bins.u = " << c.bins_u << "\n";
    os << "bins.v = " << c.bins_v << "\n";
    if (c.entropy_tau0) os << "entropy.tau0 = " << fmt(*c.entropy_tau0) << "\n";
    if (c.entropy_h) os << "entropy.h = " << fmt(*c.entropy_h) << "\n";
    if (c.snapshot_cadence) os << "snapshot.cadence = " << fmt(*c.snapshot_cadence) << "\n";
    os << "output.dir = " << c.output_dir << "\n";
    os << "output.snapshots = "
       << (c.snapshots == SnapshotExport::All ? "all" : c.snapshots == SnapshotExport::Final ? "final" : "none")
       << "\n";
    os << "workers = " << c.workers << "\n";
    os << "decompose.dirac_threshold = " << fmt(c.dirac_threshold) << "\n";
    os << "decompose.delta_fraction = " << fmt(c.delta_fraction) << "\n";
    os << "diagnostics.identities = " << (c.identities ? "true" : "false") << "\n";
    os << "diagnostics.measures = " << (c.measures ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace fastlimit
