#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "parallel.hpp"

#ifndef LCPT_VERSION
#define LCPT_VERSION "0.0.0"
#endif

namespace lcpt::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Converts internal (gamma_a = 1) quantities to the output units.
struct UnitMap
{
    double gamma = 1.0;

    explicit UnitMap(const RunConfig& rc)
        : gamma(rc.units == Units::mhz ? rc.gamma_a_mhz : 1.0)
    {
    }
    double rate(double x) const { return x * gamma; }
    double time(double x) const { return x / gamma; }
    /// per-unit-frequency densities
    double density(double x) const { return x / gamma; }
};

std::string describe_point(const RunConfig& rc, const LambdaParams& p)
{
    const UnitMap u(rc);
    std::string s;
    for (const Axis* a : rc.swept_axes()) {
        s += fmt::format("{}{}={:.12g}", s.empty() ? "" : " ", to_string(a->field),
                         u.rate(field_of(p, a->field)));
    }
    return s.empty() ? "working parameters" : s;
}

std::vector<std::string> metadata(const RunConfig& rc, const std::string& quantity)
{
    const UnitMap u(rc);
    std::vector<std::string> m;
    m.push_back("lcpt " LCPT_VERSION);
    m.push_back("command: " + rc.command);
    if (!rc.name.empty()) {
        m.push_back("name: " + rc.name);
    }
    if (!rc.source.empty() && rc.source.front() != '<') {
        m.push_back("config: " + std::filesystem::path(rc.source).filename().string());
    }
    if (rc.units == Units::mhz) {
        m.push_back(fmt::format("units: mhz (gamma_a = {} MHz; rates and omega "
                                "in MHz, tau in us)", rc.gamma_a_mhz));
    } else {
        m.push_back("units: scaled (rates and omega in gamma_a, tau in 1/gamma_a)");
    }
    std::string params = "parameters:";
    for (const auto& a : rc.axes) {
        if (a.swept()) {
            params += fmt::format(" {}=[{:.12g}..{:.12g}]x{}", to_string(a.field),
                                  u.rate(a.values.front()),
                                  u.rate(a.values.back()), a.values.size());
        } else {
            params += fmt::format(" {}={:.12g}", to_string(a.field),
                                  u.rate(a.values.front()));
        }
    }
    m.push_back(params);
    m.push_back("quantity: " + quantity);
    return m;
}

std::string phi_line(const RunConfig& rc)
{
    std::string s = "phi:";
    for (std::size_t k = 0; k < rc.phi.size(); ++k) {
        s += fmt::format("{} {} ({} rad)", k ? "," : "", rc.phi_labels[k],
                         rc.phi[k].radians());
    }
    return s;
}

std::string omega_line(const RunConfig& rc)
{
    const UnitMap u(rc);
    return fmt::format("omega grid: {} points over [{:.12g}, {:.12g}]", rc.omega.points,
                       u.rate(rc.omega.from), u.rate(rc.omega.to));
}

std::vector<std::string> swept_columns(const RunConfig& rc)
{
    std::vector<std::string> c;
    for (const Axis* a : rc.swept_axes()) {
        c.emplace_back(to_string(a->field));
    }
    return c;
}

std::vector<double> swept_values(const RunConfig& rc, const LambdaParams& p)
{
    const UnitMap u(rc);
    std::vector<double> v;
    for (const Axis* a : rc.swept_axes()) {
        v.push_back(u.rate(field_of(p, a->field)));
    }
    return v;
}

std::string series(const std::string& kind, const std::string& label)
{
    return kind + "[phi=" + label + "]";
}

/**
 * Evaluates fn on every sweep point. Library errors at a point become an
 * empty slot plus a warning in a sweep, and a degeneracy_error for a single
 * point run.
 */
template <class T, class Fn>
std::vector<std::optional<T>> evaluate_points(const RunConfig& rc,
                                              const std::vector<LambdaParams>& pts,
                                              unsigned threads, Dataset& ds, Fn fn)
{
    std::vector<std::optional<T>> out(pts.size());
    std::vector<std::string> failures(pts.size());
    const bool single = pts.size() == 1;
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        try {
            out[i] = fn(pts[i]);
        } catch (const invalid_params& e) {
            throw config_error(rc.source, "", std::nullopt, e.what());
        } catch (const lcpt::error& e) {
            if (single) {
                throw degeneracy_error(describe_point(rc, pts[i]) + ": " + e.what());
            }
            failures[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!failures[i].empty()) {
            ds.warnings.push_back(describe_point(rc, pts[i]) + ": " + failures[i] +
                                  " (written as nan)");
        }
    }
    return out;
}

void finish(Dataset& ds)
{
    for (const auto& w : ds.warnings) {
        ds.table.metadata.push_back("warning: " + w);
    }
}

std::string dataset_name(const RunConfig& rc)
{
    return rc.name.empty() ? rc.command : rc.name;
}

} // namespace

// --- steady-scan -------------------------------------------------------------

Dataset run_steady_scan(const RunConfig& rc, unsigned threads)
{
    Dataset ds;
    ds.name = dataset_name(rc);
    ds.table.metadata = metadata(rc, "steady-state populations and saturation "
                                     "parameter of the a transition");
    const auto pts = rc.points();
    using Row = std::array<double, 4>;
    const auto res = evaluate_points<Row>(rc, pts, threads, ds,
                                          [](const LambdaParams& p) {
        const auto ss = solve_steady_state(p);
        return Row{ss(OperatorIndex::ee).real(), ss(OperatorIndex::aa).real(),
                   ss(OperatorIndex::bb).real(),
                   saturation_parameter(p, Transition::a)};
    });

    ds.table.columns = swept_columns(rc);
    for (const char* c : {"alpha_ee", "alpha_aa", "alpha_bb", "saturation_a"}) {
        ds.table.columns.emplace_back(c);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto row = swept_values(rc, pts[i]);
        const Row r = res[i].value_or(Row{nan, nan, nan, nan});
        row.insert(row.end(), r.begin(), r.end());
        ds.table.rows.push_back(std::move(row));
    }
    finish(ds);
    return ds;
}

// --- spectrum ----------------------------------------------------------------

namespace {

struct SeriesSpec
{
    SpectrumKind kind;
    std::optional<std::size_t> phi; ///< index into rc.phi
};

std::vector<SeriesSpec> spectrum_series(const RunConfig& rc)
{
    std::vector<SeriesSpec> s;
    for (auto k : rc.kinds) {
        if (k == SpectrumKind::Incoherent) {
            s.push_back({k, std::nullopt});
        } else {
            for (std::size_t i = 0; i < rc.phi.size(); ++i) {
                s.push_back({k, i});
            }
        }
    }
    return s;
}

} // namespace

Dataset run_spectrum(const RunConfig& rc, unsigned threads)
{
    Dataset ds;
    ds.name = dataset_name(rc);
    ds.table.metadata = metadata(rc, "spectral densities (coherent delta peak "
                                     "reported separately as coherent_weight)");
    ds.table.metadata.push_back(phi_line(rc));
    ds.table.metadata.push_back(omega_line(rc));
    if (rc.eta != 1.0) {
        ds.table.metadata.push_back(fmt::format("eta: {}", rc.eta));
    }

    const auto specs = spectrum_series(rc);
    const auto omega = rc.omega.values();
    const UnitMap u(rc);
    struct Result
    {
        std::vector<std::vector<double>> values;
        double coherent_weight = nan;
    };
    const auto pts = rc.points();
    const auto res = evaluate_points<Result>(rc, pts, threads, ds,
                                             [&](const LambdaParams& p) {
        const auto fl = analyze(p);
        Result r;
        for (const auto& s : specs) {
            std::optional<QuadraturePhase> phi;
            if (s.phi) {
                phi = rc.phi[*s.phi];
            }
            const SpectralDensity d(fl, s.kind, phi, Efficiency(rc.eta));
            const auto sampled = sample(d, rc.omega);
            std::vector<double> v = sampled.values;
            if (s.kind == SpectrumKind::Incoherent) {
                for (double& x : v) {
                    x = u.density(x);
                }
                r.coherent_weight = sampled.coherent_weight;
            }
            r.values.push_back(std::move(v));
        }
        return r;
    });

    const bool has_incoherent =
        std::find(rc.kinds.begin(), rc.kinds.end(), SpectrumKind::Incoherent) !=
        rc.kinds.end();
    ds.table.columns = swept_columns(rc);
    ds.table.columns.emplace_back("omega");
    for (const auto& s : specs) {
        ds.table.columns.push_back(
            s.phi ? series(to_string(s.kind), rc.phi_labels[*s.phi])
                  : std::string(to_string(s.kind)));
    }
    if (has_incoherent) {
        ds.table.columns.emplace_back("coherent_weight");
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto head = swept_values(rc, pts[i]);
        for (std::size_t k = 0; k < omega.size(); ++k) {
            auto row = head;
            row.push_back(u.rate(omega[k]));
            for (std::size_t s = 0; s < specs.size(); ++s) {
                row.push_back(res[i] ? res[i]->values[s][k] : nan);
            }
            if (has_incoherent) {
                row.push_back(res[i] ? res[i]->coherent_weight : nan);
            }
            ds.table.rows.push_back(std::move(row));
        }
    }
    finish(ds);
    return ds;
}

// --- chd ---------------------------------------------------------------------

namespace {

std::string bound_name(ClassicalBound b)
{
    switch (b) {
    case ClassicalBound::Deviation: return "0 <= h-1 <= 1";
    case ClassicalBound::SecondOrderDecay: return "|h2(tau)| <= |h2(0)|";
    case ClassicalBound::SecondOrderUnit: return "|h2(0)| <= 1";
    case ClassicalBound::CoherentState: return "-1 <= h <= 1";
    }
    return "?";
}

} // namespace

Dataset run_chd(const RunConfig& rc, unsigned threads)
{
    Dataset ds;
    ds.name = dataset_name(rc);
    const UnitMap u(rc);
    const auto pts = rc.points();
    const bool single = pts.size() == 1;

    // A common tau grid for the whole sweep.
    double tau_max = 0.0;
    if (rc.tau.max) {
        tau_max = *rc.tau.max;
    } else {
        std::vector<double> spans(pts.size(), 0.0);
        parallel_for(pts.size(), threads, [&](std::size_t i) {
            try {
                spans[i] = analyze(pts[i]).auto_grid().max();
            } catch (const lcpt::error&) {
                spans[i] = 0.0; // reported by the main pass
            }
        });
        tau_max = *std::max_element(spans.begin(), spans.end());
        if (tau_max == 0.0) {
            tau_max = default_tau_cap;
        }
    }
    const TauGrid grid{rc.tau.step,
                       static_cast<std::size_t>(std::llround(tau_max / rc.tau.step)) + 1};

    // Near-CPT guard: a single point whose normalization vanishes is written
    // as unnormalized numerators instead of failing.
    bool numerators = false;
    std::string guard_message;
    if (single) {
        try {
            const auto fl = analyze(pts.front());
            for (const auto& phi : rc.phi) {
                chd_normalization(fl, phi);
            }
        } catch (const vanishing_excitation& e) {
            numerators = true;
            guard_message = e.what();
        } catch (const degenerate_quadrature& e) {
            numerators = true;
            guard_message = e.what();
        } catch (const lcpt::error&) {
            // surfaces below as a degeneracy error
        }
    }

    const auto res = evaluate_points<std::vector<ChdSignal>>(
        rc, pts, threads, ds, [&](const LambdaParams& p) {
            const auto fl = analyze(p);
            std::vector<ChdSignal> out;
            for (const auto& phi : rc.phi) {
                out.push_back(numerators ? chd_numerator(fl, phi, grid)
                                         : chd_signal(fl, phi, grid));
            }
            return out;
        });

    ds.table.metadata = metadata(
        rc, numerators ? "unnormalized CHD numerators (normalization vanishes)"
                       : "amplitude-intensity correlation h(tau)");
    ds.table.metadata.push_back(phi_line(rc));
    ds.table.metadata.push_back(fmt::format(
        "tau grid: step {:.12g} over [-{:.12g}, {:.12g}] ({} points)", u.time(grid.step),
        u.time(grid.max()), u.time(grid.max()), 2 * grid.count - 1));
    if (numerators) {
        ds.warnings.push_back("near dark-state trapping: " + guard_message +
                              "; writing unnormalized numerators");
    }
    if (rc.split) {
        ds.table.metadata.push_back("h2, h3 are defined for tau >= 0 only "
                                    "(nan for tau < 0)");
    }
    if (single && res.front() && !numerators) {
        // one line per (bound, edge): number of tau intervals, the first one
        // and the extreme value over all of them
        for (std::size_t k = 0; k < rc.phi.size(); ++k) {
            const auto report = classify_nonclassical((*res.front())[k]);
            std::map<std::pair<int, int>, std::vector<Violation>> groups;
            for (const auto& v : report.violations) {
                groups[{static_cast<int>(v.bound), static_cast<int>(v.edge)}]
                    .push_back(v);
            }
            for (const auto& [key, runs] : groups) {
                const bool lower = runs.front().edge == BoundEdge::lower;
                double extreme = runs.front().extreme;
                for (const auto& v : runs) {
                    extreme = lower ? std::min(extreme, v.extreme)
                                    : std::max(extreme, v.extreme);
                }
                ds.table.metadata.push_back(fmt::format(
                    "violation[phi={}]: {} {} edge, {} interval(s), first tau in "
                    "[{:.6g}, {:.6g}], extreme {:.6g}",
                    rc.phi_labels[k], bound_name(runs.front().bound),
                    lower ? "lower" : "upper", runs.size(),
                    u.time(runs.front().tau_begin), u.time(runs.front().tau_end),
                    extreme));
            }
        }
    }

    const std::string base = numerators ? "numerator" : "h";
    ds.table.columns = swept_columns(rc);
    ds.table.columns.emplace_back("tau");
    for (const auto& label : rc.phi_labels) {
        ds.table.columns.push_back(series(base, label));
        if (rc.split) {
            ds.table.columns.push_back(series(base + "2", label));
            ds.table.columns.push_back(series(base + "3", label));
        }
    }
    const std::size_t n = 2 * grid.count - 1;
    const std::size_t zero = grid.count - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto head = swept_values(rc, pts[i]);
        for (std::size_t t = 0; t < n; ++t) {
            auto row = head;
            const double tau = t < zero ? -grid[zero - t] : grid[t - zero];
            row.push_back(u.time(tau));
            for (std::size_t k = 0; k < rc.phi.size(); ++k) {
                if (!res[i]) {
                    row.insert(row.end(), rc.split ? 3 : 1, nan);
                    continue;
                }
                const ChdSignal& s = (*res[i])[k];
                row.push_back(s.h[t]);
                if (rc.split) {
                    row.push_back(t < zero ? nan : s.second[t - zero]);
                    row.push_back(t < zero ? nan : s.third[t - zero]);
                }
            }
            ds.table.rows.push_back(std::move(row));
        }
    }
    finish(ds);
    return ds;
}

// --- squeezing ---------------------------------------------------------------

Dataset run_squeezing(const RunConfig& rc, unsigned threads)
{
    Dataset ds;
    ds.name = dataset_name(rc);
    ds.table.metadata = metadata(rc, "squeezing spectrum S (negative means "
                                     "squeezed) and equal-time variance V");
    ds.table.metadata.push_back(phi_line(rc));
    ds.table.metadata.push_back(omega_line(rc));
    ds.table.metadata.push_back(fmt::format("eta: {}", rc.eta));

    const auto omega = rc.omega.values();
    const UnitMap u(rc);
    struct Result
    {
        std::vector<std::vector<double>> spectra;
        std::vector<double> variances;
    };
    const auto pts = rc.points();
    const auto res = evaluate_points<Result>(rc, pts, threads, ds,
                                             [&](const LambdaParams& p) {
        const auto fl = analyze(p);
        Result r;
        for (const auto& phi : rc.phi) {
            const SpectralDensity d(fl, SpectrumKind::Squeezing, phi,
                                    Efficiency(rc.eta));
            r.spectra.push_back(sample(d, rc.omega).values);
            r.variances.push_back(variance(fl, phi));
        }
        return r;
    });

    ds.table.columns = swept_columns(rc);
    ds.table.columns.emplace_back("omega");
    for (const auto& label : rc.phi_labels) {
        ds.table.columns.push_back(series("S", label));
    }
    for (const auto& label : rc.phi_labels) {
        ds.table.columns.push_back(series("V", label));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto head = swept_values(rc, pts[i]);
        for (std::size_t k = 0; k < omega.size(); ++k) {
            auto row = head;
            row.push_back(u.rate(omega[k]));
            for (std::size_t f = 0; f < rc.phi.size(); ++f) {
                row.push_back(res[i] ? res[i]->spectra[f][k] : nan);
            }
            for (std::size_t f = 0; f < rc.phi.size(); ++f) {
                row.push_back(res[i] ? res[i]->variances[f] : nan);
            }
            ds.table.rows.push_back(std::move(row));
        }
    }
    finish(ds);
    return ds;
}

// --- variance-map ------------------------------------------------------------

Dataset run_variance_map(const RunConfig& rc, unsigned threads)
{
    Dataset ds;
    ds.name = dataset_name(rc);
    ds.table.metadata = metadata(rc, "equal-time quadrature variance V "
                                     "(negative means squeezed)");
    ds.table.metadata.push_back(phi_line(rc));
    const auto pts = rc.points();
    const auto res = evaluate_points<std::vector<double>>(
        rc, pts, threads, ds, [&](const LambdaParams& p) {
            const auto fl = analyze(p);
            std::vector<double> v;
            for (const auto& phi : rc.phi) {
                v.push_back(variance(fl, phi));
            }
            return v;
        });
    ds.table.columns = swept_columns(rc);
    for (const auto& label : rc.phi_labels) {
        ds.table.columns.push_back(series("V", label));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto row = swept_values(rc, pts[i]);
        for (std::size_t f = 0; f < rc.phi.size(); ++f) {
            row.push_back(res[i] ? (*res[i])[f] : nan);
        }
        ds.table.rows.push_back(std::move(row));
    }
    finish(ds);
    return ds;
}

Dataset run_command(const RunConfig& rc, unsigned threads)
{
    if (rc.command == "steady-scan") {
        return run_steady_scan(rc, threads);
    }
    if (rc.command == "spectrum") {
        return run_spectrum(rc, threads);
    }
    if (rc.command == "chd") {
        return run_chd(rc, threads);
    }
    if (rc.command == "squeezing") {
        return run_squeezing(rc, threads);
    }
    if (rc.command == "variance-map") {
        return run_variance_map(rc, threads);
    }
    throw config_error(rc.source, "command", std::nullopt,
                       "unknown command '" + rc.command + "'");
}

// --- presets -----------------------------------------------------------------

Preset load_preset(const std::filesystem::path& path,
                   std::optional<Units> units_override)
{
    const std::string source = path.string();
    const std::string text = read_file(path);
    const auto j = parse_json_text(text, source);
    const KeyLines lines(text);
    auto fail = [&](const std::string& field, const std::string& msg) {
        throw config_error(source, field, lines.find("/" + field), msg);
    };
    if (!j.is_object()) {
        fail("", "preset must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "name" && key != "description" && key != "runs") {
            fail(key, "unknown key");
        }
    }
    Preset p;
    p.name = j.value("name", path.stem().string());
    p.description = j.value("description", "");
    if (!j.contains("runs") || !j["runs"].is_array() || j["runs"].empty()) {
        fail("runs", "expected a non-empty list of runs");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < j["runs"].size(); ++i) {
        const std::string pointer = "/runs/" + std::to_string(i);
        auto rc = parse_run_config(j["runs"][i], "", source, lines, pointer,
                                   units_override);
        if (rc.name.empty()) {
            rc.name = p.name + "-" + std::to_string(i + 1);
        }
        if (!names.insert(rc.name).second) {
            fail("runs/" + std::to_string(i) + "/name",
                 "duplicate run name '" + rc.name + "'");
        }
        p.runs.push_back(std::move(rc));
    }
    return p;
}

std::vector<std::filesystem::path> list_presets(const std::filesystem::path& dir)
{
    std::vector<std::pair<int, std::filesystem::path>> found;
    if (std::filesystem::is_directory(dir)) {
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            const auto stem = e.path().stem().string();
            if (e.path().extension() == ".json" && stem.starts_with("fig")) {
                try {
                    found.emplace_back(std::stoi(stem.substr(3)), e.path());
                } catch (const std::exception&) {
                }
            }
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::filesystem::path> out;
    for (auto& [_, path] : found) {
        out.push_back(path);
    }
    return out;
}

} // namespace lcpt::cli
