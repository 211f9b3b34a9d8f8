// superint: command-line front end.
//
//   superint verify    --case all
//   superint integrate --case 4 --t-end 400 --format json,csv
//   superint roots     --case 8 --b 1 --d 0
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage error.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "superint/algebra.hpp"
#include "superint/dynamics.hpp"
#include "superint/implicit_orbit.hpp"
#include "superint/roots.hpp"

using namespace superint;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string case_sel = "all";
    std::vector<int> cases;
    std::string variant;
    ParamSet params;
    std::string out = "out";
    std::set<std::string> formats;
    std::uint64_t seed = 20240521;
    double tol = 1e-9;
    std::optional<double> t_end;
    int grid = 512;
    std::optional<std::vector<double>> x0;
    std::optional<double> E1, E2, k;
    double x_min = -2, x_max = 2;
    int samples = 401;

    bool wants(const std::string& f) const { return formats.count(f) != 0; }
};

json to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["case"] = c.case_sel;
    j["variant"] = c.variant;
    j["params"] = c.params;
    j["formats"] = c.formats;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    j["t_end"] = c.t_end ? json(*c.t_end) : json(nullptr);
    j["grid"] = c.grid;
    if (c.x0) j["x0"] = *c.x0;
    if (c.E1) j["E1"] = *c.E1;
    if (c.E2) j["E2"] = *c.E2;
    if (c.k) j["k"] = *c.k;
    if (c.command == "roots") j["x_range"] = {c.x_min, c.x_max, c.samples};
    return j;
}

std::string num(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 7);
    return std::string(buf, r.ptr);
}

std::string full(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// 6 significant digits; entries below 1e-6 of the largest are fit noise
std::string kvector(const json& k) {
    double top = 0;
    for (const auto& v : k) top = std::max(top, std::fabs(v.get<double>()));
    std::string out = "[";
    for (const auto& v : k) {
        const double x = std::fabs(v.get<double>()) < 1e-6 * top ? 0.0 : v.get<double>();
        char buf[32];
        auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
        out += (out.size() > 1 ? ", " : "") + std::string(buf, r.ptr);
    }
    return out + "]";
}

void write_file(const RunConfig& cfg, const std::string& name, const std::string& content) {
    const fs::path p = fs::path(cfg.out) / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw UsageError("cannot write " + p.string());
    os << content;
    std::cerr << "wrote " << p.string() << "\n";
}

void write_json(const RunConfig& cfg, const std::string& name, json j) {
    j["run_config"] = to_json(cfg);
    write_file(cfg, name, j.dump(2) + "\n");
}

std::string tag(int id) { return "case" + std::to_string(id); }

SystemDef system_for(const RunConfig& cfg, int id) {
    ParamSet own;
    const ParamSet known = default_params(id, cfg.variant);
    for (const auto& [k, v] : cfg.params)
        if (known.count(k) || cfg.cases.size() == 1) own[k] = v;
    return build_system(id, own, cfg.variant);
}

// Fan the cases out in parallel and collect results in case order.
template <class F>
auto per_case(const RunConfig& cfg, F f) {
    using R = decltype(f(0));
    std::vector<std::future<R>> fut;
    for (int id : cfg.cases) fut.push_back(std::async(std::launch::async, f, id));
    std::vector<R> out;
    for (auto& x : fut) out.push_back(x.get());
    return out;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const RunConfig& cfg) {
    auto reports = per_case(cfg, [&](int id) {
        const SystemDef s = system_for(cfg, id);
        AlgebraReport r = verify_system(s, cfg.seed, cfg.tol);
        json j = to_json(r);
        if (s.expect_C_constant) {
            const Program C(compute_C(s), s.params);
            j["C_value"] = C(s.sampler(cfg.seed, 1).draw().col(0).eval());
        }
        return std::make_pair(r.passed, j);
    });
    bool ok = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        ok &= reports[i].first;
        const int id = cfg.cases[i];
        std::cout << tag(id) << ": " << reports[i].second["degeneration"].get<std::string>() << " "
                  << (reports[i].first ? "passed" : "FAILED") << "\n";
        write_json(cfg, "verify_" + tag(id) + ".json", reports[i].second);
    }
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- casimir

int cmd_casimir(const RunConfig& cfg) {
    auto fits = per_case(cfg, [&](int id) {
        const SystemDef s = system_for(cfg, id);
        const Expr C = compute_C(s);
        Sampler sm = s.sampler(cfg.seed + 1, 400);
        const StructureConstants sc = fit_structure_constants(s, C, sm);
        const CasimirFit cf = fit_casimir_polynomial(s, casimir_expr(s, sc, C), s.sampler(cfg.seed + 5, 200));
        const PrintedAlgebra pa = printed_algebra(s);
        bool match = cf.residual < 1e-8;
        for (int i = 0; i < 5; ++i) match &= std::fabs(cf.k[i] - pa.casimir[i]) <= 1e-6 * std::max(1.0, std::fabs(pa.casimir[i]));
        json j{{"case", id}, {"variant", s.variant}, {"params", s.params}, {"k", cf.k},
               {"residual", cf.residual}, {"printed", pa.casimir}, {"matches_printed", match}};
        return std::make_pair(match, j);
    });
    bool ok = true;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        ok &= fits[i].first;
        std::cout << tag(cfg.cases[i]) << ": k = " << fits[i].second["k"].dump() << "\n";
        write_json(cfg, "casimir_" + tag(cfg.cases[i]) + ".json", fits[i].second);
    }
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- trajectories

struct Start {
    bool bounded = true;
    PhasePoint z = PhasePoint::Zero();
    double t_end = 400;
    std::string origin;
};

Start start_for(const RunConfig& cfg, const SystemDef& s) {
    Start st;
    st.t_end = cfg.t_end.value_or(s.figure.t_end);
    if (cfg.x0) {
        if (cfg.x0->size() != 4) throw UsageError("--x0 needs four numbers x,y,p1,p2");
        st.z << (*cfg.x0)[0], (*cfg.x0)[1], (*cfg.x0)[2], (*cfg.x0)[3];
        st.origin = "--x0";
        st.bounded = boundedness_check(s, st.z);
        return st;
    }
    if (s.figure.start && !cfg.E1 && !cfg.E2 && !cfg.k) {
        st.z = *s.figure.start;
        st.origin = "figure caption";
        st.bounded = boundedness_check(s, st.z);
        return st;
    }
    const double E1 = cfg.E1.value_or(s.figure.E1), E2 = cfg.E2.value_or(s.figure.E2), k = cfg.k.value_or(s.figure.k);
    try {
        if (!boundedness_bound(s, E1, E2).bounded) {
            st.bounded = false;
            return st;
        }
    } catch (const DomainError&) {
        st.bounded = false;
        return st;
    }
    st.z = seed_orbit_point(s, E1, E2, k);
    st.origin = "seeded from (E1, E2, k)";
    return st;
}

json drift_json(const DriftStats& d) { return {{"H", d.H}, {"A", d.A}, {"B", d.B}, {"B_segments", d.B_segments}}; }

json period_json(const PeriodEstimate& p) {
    return {{"found", p.found}, {"T", p.T}, {"return_distance", p.return_distance}, {"relative", p.relative},
            {"diameter", p.diameter}, {"method", p.method}, {"fx", p.fx}, {"fy", p.fy},
            {"confidence", p.confidence}, {"message", p.message}};
}

struct Integrated {
    json summary;
    std::string csv;
    bool ok = true;
};

Integrated run_integrate(const RunConfig& cfg, int id) {
    const SystemDef s = system_for(cfg, id);
    Integrated out;
    json& j = out.summary;
    j["case"] = id;
    j["variant"] = s.variant;
    j["params"] = s.params;
    const Start st = start_for(cfg, s);
    if (!st.bounded) {
        j["closure"] = "unbounded (skipped)";
        return out;
    }
    IntegratorConfig ic;
    ic.t_end = st.t_end;
    const TrajectoryRecord r = integrate(s, st.z, ic);
    const PeriodEstimate pe = detect_period(r, s, 1e-4, ic);
    j["start"] = {{"z", {st.z[0], st.z[1], st.z[2], st.z[3]}}, {"origin", st.origin}};
    j["status"] = to_string(r.status);
    j["message"] = r.message;
    j["steps"] = r.size();
    j["rejected"] = r.rejected;
    j["axis_crossings"] = r.crossings.size();
    j["drift"] = drift_json(conservation_drift(r, s));
    j["period"] = period_json(pe);
    j["closure"] = pe.found ? "closed" : "not closed";
    out.ok = pe.found && r.status == RunStatus::completed;
    if (cfg.wants("csv")) {
        std::ostringstream os;
        write_csv(os, r);
        out.csv = os.str();
    }
    return out;
}

int cmd_integrate(const RunConfig& cfg) {
    auto runs = per_case(cfg, [&](int id) { return run_integrate(cfg, id); });
    bool ok = true;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const int id = cfg.cases[i];
        ok &= runs[i].ok;
        std::cout << tag(id) << ": " << runs[i].summary["closure"].get<std::string>() << "\n";
        if (cfg.wants("json")) write_json(cfg, "integrate_" + tag(id) + ".json", runs[i].summary);
        if (cfg.wants("csv") && !runs[i].csv.empty()) write_file(cfg, "trajectory_" + tag(id) + ".csv", runs[i].csv);
    }
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- svg

struct Layer {
    std::vector<Polyline> lines;
    std::string colour;
    double width;
};

std::string svg(const std::vector<Layer>& layers, const std::string& title, const json& meta) {
    double xl = 1e300, xh = -1e300, yl = 1e300, yh = -1e300;
    for (const auto& L : layers)
        for (const auto& l : L.lines)
            for (const auto& p : l) {
                xl = std::min(xl, p.x());
                xh = std::max(xh, p.x());
                yl = std::min(yl, p.y());
                yh = std::max(yh, p.y());
            }
    if (xl > xh) xl = yl = -1, xh = yh = 1;
    const double W = 600, pad = 30;
    const double span = std::max({xh - xl, yh - yl, 1e-12});
    const double sc = (W - 2 * pad) / span;
    auto X = [&](double x) { return num(pad + (x - xl) * sc); };
    auto Y = [&](double y) { return num(W - pad - (y - yl) * sc); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W << "\" viewBox=\"0 0 "
       << W << " " << W << "\">\n";
    std::string m = meta.dump();
    for (std::size_t p = m.find("]]>"); p != std::string::npos; p = m.find("]]>", p)) m.replace(p, 3, "]] >");
    os << "<metadata><![CDATA[" << m << "]]></metadata>\n";
    os << "<title>" << title << "</title>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (xl <= 0 && xh >= 0) os << "<line x1=\"" << X(0) << "\" y1=\"0\" x2=\"" << X(0) << "\" y2=\"" << W << "\" stroke=\"#bbb\"/>\n";
    if (yl <= 0 && yh >= 0) os << "<line x1=\"0\" y1=\"" << Y(0) << "\" x2=\"" << W << "\" y2=\"" << Y(0) << "\" stroke=\"#bbb\"/>\n";
    for (const auto& L : layers) {
        for (const auto& l : L.lines) {
            os << "<polyline fill=\"none\" stroke=\"" << L.colour << "\" stroke-width=\"" << num(L.width) << "\" points=\"";
            for (std::size_t i = 0; i < l.size(); ++i) os << (i ? " " : "") << X(l[i].x()) << "," << Y(l[i].y());
            os << "\"/>\n";
        }
    }
    os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"13\" font-family=\"sans-serif\">" << title << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------- orbit

struct Contour {
    OrbitSpec spec;
    ContourGrid grid;
    std::vector<Polyline> lines;
};

Contour contour_for(const RunConfig& cfg, const SystemDef& s, const Start& st) {
    const Flow f(s);
    OrbitSpec sp{s, s.figure.E1, s.figure.E2, s.figure.k};
    if (s.figure.start || cfg.x0) {
        sp.E1 = f.energy_x(st.z);
        sp.E2 = f.energy_y(st.z);
        sp.k = s.compile(s.B)(st.z);
    }
    if (cfg.E1) sp.E1 = *cfg.E1;
    if (cfg.E2) sp.E2 = *cfg.E2;
    if (cfg.k) sp.k = *cfg.k;
    sp.x_hint = st.z[0];
    sp.y_hint = st.z[1];
    Contour c{sp, default_grid(sp, cfg.grid), {}};
    c.lines = orbit_contour(ImplicitOrbit(sp), c.grid);
    return c;
}

int cmd_orbit(const RunConfig& cfg) {
    struct Out {
        json j;
        std::string csv, svg;
    };
    auto outs = per_case(cfg, [&](int id) {
        const SystemDef s = system_for(cfg, id);
        Out o;
        const Start st = start_for(cfg, s);
        if (!st.bounded) {
            o.j = {{"case", id}, {"bounded", false}};
            return o;
        }
        const Contour c = contour_for(cfg, s, st);
        std::size_t vertices = 0;
        std::ostringstream csv;
        csv << "curve,x,y\n";
        for (std::size_t i = 0; i < c.lines.size(); ++i) {
            vertices += c.lines[i].size();
            for (const auto& p : c.lines[i]) csv << i << ',' << full(p.x()) << ',' << full(p.y()) << '\n';
        }
        o.csv = csv.str();
        o.j = {{"case", id},
               {"variant", s.variant},
               {"params", s.params},
               {"bounded", true},
               {"E1", c.spec.E1},
               {"E2", c.spec.E2},
               {"k", c.spec.k},
               {"grid", {{"x", {c.grid.x_lo, c.grid.x_hi}}, {"y", {c.grid.y_lo, c.grid.y_hi}}, {"n", c.grid.nx}}},
               {"curves", c.lines.size()},
               {"vertices", vertices}};
        json meta = to_json(cfg);
        meta["orbit"] = o.j;
        o.svg = svg({{c.lines, "#1f4e9c", 1.2}}, "implicit orbit, " + tag(id), meta);
        return o;
    });
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const int id = cfg.cases[i];
        std::cout << tag(id) << ": " << outs[i].j.value("curves", 0) << " curve(s)\n";
        if (cfg.wants("json")) write_json(cfg, "orbit_" + tag(id) + ".json", outs[i].j);
        if (cfg.wants("csv") && !outs[i].csv.empty()) write_file(cfg, "orbit_" + tag(id) + ".csv", outs[i].csv);
        if (cfg.wants("svg") && !outs[i].svg.empty()) write_file(cfg, "orbit_" + tag(id) + ".svg", outs[i].svg);
    }
    return 0;
}

// ---------------------------------------------------------------- roots

double param_or(const RunConfig& cfg, const std::string& name, double dflt) {
    auto it = cfg.params.find(name);
    return it == cfg.params.end() ? dflt : it->second;
}

int cmd_roots(const RunConfig& cfg) {
    if (cfg.cases.size() != 1 || (cfg.cases[0] != 8 && cfg.cases[0] != 6))
        throw UsageError("roots needs --case 8 (cubic) or --case 6 (quartic)");
    const int id = cfg.cases[0];
    if (cfg.samples < 2 || !(cfg.x_max > cfg.x_min)) throw UsageError("bad x range");
    std::ostringstream csv;
    json j{{"case", id}};
    int rows = 0;
    if (id == 8) {
        const double b = param_or(cfg, "b", 1.0), d = param_or(cfg, "d", 1.0);
        j["b"] = b;
        j["d"] = d;
        csv << "x,D,root,multiplicity\n";
        for (int i = 0; i < cfg.samples; ++i) {
            const double x = cfg.x_min + (cfg.x_max - cfg.x_min) * i / (cfg.samples - 1);
            const DepressedCubic c = depressed_cubic(b, x, d);
            const RootSet rs = cubic_roots(c);
            for (const Root& r : rs.roots) {
                csv << full(x) << ',' << full(rs.D) << ',' << full(r.value + 2 * b * x / 3) << ',' << r.multiplicity << '\n';
                ++rows;
            }
        }
    } else {
        const double w2 = param_or(cfg, "omega2", 1.0);
        double c, d;
        if (cfg.params.count("c") || cfg.params.count("d")) {
            c = param_or(cfg, "c", 0.0);
            d = param_or(cfg, "d", 0.0);
        } else {
            std::tie(c, d) = case6_special_cd(w2, param_or(cfg, "b", 9.0));
        }
        j["omega2"] = w2;
        j["c"] = c;
        j["d"] = d;
        csv << "x,root,multiplicity\n";
        for (int i = 0; i < cfg.samples; ++i) {
            const double x = cfg.x_min + (cfg.x_max - cfg.x_min) * i / (cfg.samples - 1);
            for (const Root& r : case6_quartic_roots(w2, c, d, x)) {
                csv << full(x) << ',' << full(r.value) << ',' << r.multiplicity << '\n';
                ++rows;
            }
        }
    }
    j["rows"] = rows;
    std::cout << tag(id) << ": " << rows << " root rows\n";
    if (cfg.wants("csv")) write_file(cfg, "roots_" + tag(id) + ".csv", csv.str());
    if (cfg.wants("json")) write_json(cfg, "roots_" + tag(id) + ".json", j);
    return 0;
}

// ---------------------------------------------------------------- figures

int cmd_figures(const RunConfig& cfg) {
    auto outs = per_case(cfg, [&](int id) {
        const SystemDef s = system_for(cfg, id);
        json meta = to_json(cfg);
        meta["case"] = id;
        meta["variant"] = s.variant;
        meta["params"] = s.params;
        meta["caption"] = s.figure.caption;
        if (id == 6) meta["note"] = "caption lists d=3; the double-root family is parametrized by b (b=9 gives d=3)";
        const Start st = start_for(cfg, s);
        std::vector<Layer> layers;
        if (st.bounded) {
            IntegratorConfig ic;
            ic.t_end = st.t_end;
            const TrajectoryRecord r = integrate(s, st.z, ic);
            const UniformSeries u = resample(r, s, 0.02);
            Polyline l;
            for (std::size_t i = 0; i < u.t.size(); ++i) l.emplace_back(u.x[i], u.y[i]);
            layers.push_back({{l}, "#222", 0.6});
            meta["start"] = {st.z[0], st.z[1], st.z[2], st.z[3]};
            meta["start_origin"] = st.origin;
            if (!s.figure.start) {
                const Contour c = contour_for(cfg, s, st);
                layers.push_back({c.lines, "#c0392b", 1.4});
                meta["contour"] = {{"E1", c.spec.E1}, {"E2", c.spec.E2}, {"k", c.spec.k}, {"grid", c.grid.nx}};
            }
        } else {
            meta["bounded"] = false;
        }
        return svg(layers, "Figure " + std::to_string(id) + ": " + s.title, meta);
    });
    for (std::size_t i = 0; i < outs.size(); ++i) write_file(cfg, "figure_" + tag(cfg.cases[i]) + ".svg", outs[i]);
    return 0;
}

// ---------------------------------------------------------------- report

int cmd_report(const RunConfig& cfg) {
    json rows = json::array(), warnings = json::array();
    for (int id : cfg.cases) {
        const fs::path vp = fs::path(cfg.out) / ("verify_" + tag(id) + ".json");
        const fs::path ip = fs::path(cfg.out) / ("integrate_" + tag(id) + ".json");
        json row{{"case", id}};
        bool any = false;
        if (std::ifstream vf(vp); vf) {
            const json v = json::parse(vf);
            row["degeneration"] = v["degeneration"];
            row["casimir"] = v["casimir"];
            row["discrepancies"] = v["discrepancies"];
            row["verified"] = v["passed"];
            any = true;
        } else {
            warnings.push_back("missing " + vp.string());
        }
        if (std::ifstream inf(ip); inf) {
            row["closure"] = json::parse(inf)["closure"];
            any = true;
        } else {
            warnings.push_back("missing " + ip.string());
        }
        if (any) rows.push_back(row);
    }
    if (rows.empty()) warnings.push_back("no inputs found; run verify and integrate first");
    std::ostringstream md;
    md << "| case | degeneration | Casimir k0..k4 | closure | discrepancies |\n|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        std::string disc;
        for (const auto& d : r.value("discrepancies", json::array()))
            disc += d["name"].get<std::string>() + (d["allowlisted"].get<bool>() ? " (allowlisted) " : " ");
        md << "| " << r["case"] << " | " << r.value("degeneration", std::string("?")) << " | "
           << (r.contains("casimir") ? kvector(r["casimir"]) : "?") << " | " << r.value("closure", std::string("?"))
           << " | " << disc << " |\n";
    }
    for (const auto& w : warnings) md << "\nwarning: " << w.get<std::string>();
    md << "\n";
    write_json(cfg, "report.json", {{"rows", rows}, {"warnings", warnings}});
    write_file(cfg, "report.md", md.str());
    std::cout << md.str();
    return 0;
}

// ---------------------------------------------------------------- main

std::vector<int> parse_cases(const std::string& sel) {
    if (sel == "all") return {1, 2, 3, 4, 5, 6, 7, 8};
    int id = 0;
    auto r = std::from_chars(sel.data(), sel.data() + sel.size(), id);
    if (r.ec != std::errc() || r.ptr != sel.data() + sel.size() || id < 1 || id > 8)
        throw UsageError("--case must be 1..8 or all, got '" + sel + "'");
    return {id};
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw UsageError("malformed number for " + what + ": '" + s + "'");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superintegrable systems with cubic integrals: verification, dynamics, orbits"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::vector<std::string> param_args;
    std::string formats = "json,csv,svg";
    std::string x0;
    double t_end = 0, E1 = 0, E2 = 0, k = 0;

    const std::map<std::string, std::string> commands = {
        {"verify", "fit structure constants, Casimir and degeneration"},
        {"casimir", "fit the Casimir polynomial only"},
        {"integrate", "integrate the figure initial data; drift and period"},
        {"orbit", "implicit orbit contour from (E1, E2, k)"},
        {"roots", "potential roots: cubic (case 8) or quartic (case 6)"},
        {"figures", "SVG figures 1-8"},
        {"report", "summary table from verify and integrate artifacts"}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--case", cfg.case_sel, "1..8 or all")->capture_default_str();
        sub->add_option("--variant", cfg.variant, "system variant (e.g. printed, V3, simple)");
        sub->add_option("--param", param_args, "parameter override NAME=VALUE (repeatable)");
        sub->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
        sub->add_option("--tol", cfg.tol, "integral residual tolerance")->capture_default_str();
        sub->add_option("--t-end", t_end, "integration horizon (default from caption)");
        sub->add_option("--grid", cfg.grid, "contour nodes per axis")->capture_default_str();
        sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
        sub->add_option("--format", formats, "comma list of json,csv,svg")->capture_default_str();
        sub->add_option("--x0", x0, "initial point x,y,p1,p2");
        sub->add_option("--E1", E1, "x energy");
        sub->add_option("--E2", E2, "y energy");
        sub->add_option("--k", k, "value of B");
        sub->add_option("--x-min", cfg.x_min, "roots: grid start")->capture_default_str();
        sub->add_option("--x-max", cfg.x_max, "roots: grid end")->capture_default_str();
        sub->add_option("--samples", cfg.samples, "roots: grid points")->capture_default_str();
        sub->allow_extras();  // --NAME VALUE as shorthand for --param NAME=VALUE
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            cfg.command = name;
            if (sub->count("--t-end")) cfg.t_end = t_end;
            if (sub->count("--E1")) cfg.E1 = E1;
            if (sub->count("--E2")) cfg.E2 = E2;
            if (sub->count("--k")) cfg.k = k;
            const auto extras = sub->remaining();
            for (std::size_t i = 0; i < extras.size(); ++i) {
                const std::string& a = extras[i];
                if (a.rfind("--", 0) != 0 || a.size() < 3) throw UsageError("unexpected argument '" + a + "'");
                const auto eq = a.find('=');
                if (eq != std::string::npos) {
                    param_args.push_back(a.substr(2));
                } else {
                    if (i + 1 >= extras.size()) throw UsageError("missing value for " + a);
                    param_args.push_back(a.substr(2) + "=" + extras[++i]);
                }
            }
        }
        for (const auto& p : param_args) {
            const auto eq = p.find('=');
            if (eq == std::string::npos || eq == 0) throw UsageError("--param expects NAME=VALUE, got '" + p + "'");
            cfg.params[p.substr(0, eq)] = parse_double(p.substr(eq + 1), p.substr(0, eq));
        }
        if (!x0.empty()) {
            std::vector<double> v;
            std::stringstream ss(x0);
            for (std::string item; std::getline(ss, item, ',');) v.push_back(parse_double(item, "--x0"));
            cfg.x0 = v;
        }
        std::stringstream fs_(formats);
        for (std::string f; std::getline(fs_, f, ',');) {
            if (f != "json" && f != "csv" && f != "svg") throw UsageError("unknown format '" + f + "'");
            cfg.formats.insert(f);
        }
        cfg.cases = parse_cases(cfg.case_sel);
        if (cfg.grid < 64) throw UsageError("--grid must be at least 64");
        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (ec || !fs::is_directory(cfg.out)) throw UsageError("cannot create output directory " + cfg.out);
        // validate overrides once, before any work
        if (cfg.command != "roots" && cfg.command != "report")
            for (int id : cfg.cases) system_for(cfg, id);

        if (cfg.command == "verify") return cmd_verify(cfg);
        if (cfg.command == "casimir") return cmd_casimir(cfg);
        if (cfg.command == "integrate") return cmd_integrate(cfg);
        if (cfg.command == "orbit") return cmd_orbit(cfg);
        if (cfg.command == "roots") return cmd_roots(cfg);
        if (cfg.command == "figures") return cmd_figures(cfg);
        if (cfg.command == "report") return cmd_report(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigurationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
