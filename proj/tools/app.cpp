#include "app.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "hsca/beltrami.hpp"
#include "hsca/kernels.hpp"

namespace hsca::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
    std::vector<int> r;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            int v = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            r.push_back(v);
        } catch (const std::exception&) {
            throw SchemaError(std::string(what) + ": not an integer list: '" + s + "'");
        }
    }
    if (r.empty()) throw SchemaError(std::string(what) + ": empty list");
    return r;
}

std::vector<std::string> parse_str_list(const std::string& s) {
    std::vector<std::string> r;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) r.push_back(tok);
    return r;
}

std::vector<int> int_or_list(const Json& v, const char* what) {
    if (v.is_number_integer()) return {v.get<int>()};
    if (v.is_array()) {
        std::vector<int> r;
        for (const auto& e : v) {
            if (!e.is_number_integer()) throw SchemaError(std::string(what) + ": expected integers");
            r.push_back(e.get<int>());
        }
        if (r.empty()) throw SchemaError(std::string(what) + ": empty list");
        return r;
    }
    throw SchemaError(std::string(what) + ": expected an integer or a list of integers");
}

template <class T>
T typed(const Json& v, const char* what) {
    try {
        return v.get<T>();
    } catch (const Json::exception&) {
        throw SchemaError(std::string("config key '") + what + "' has the wrong type");
    }
}

void ensure_dir(const std::string& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    ensure_dir(dir);
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot open '" + p.string() + "' for writing");
    f << text;
    if (!f) throw IoError("write failed for '" + p.string() + "'");
}

Json series_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
    return a;
}

Json metadata(const RunConfig& cfg) { return Json{{"tool", "hsca"}, {"version", kVersion}, {"config", cfg.to_json()}}; }

// ---- verify ------------------------------------------------------------------------
int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    std::ostringstream table;
    table << std::left << std::setw(15) << "suite" << std::setw(4) << "m" << std::setw(4) << "k" << std::setw(16)
          << "N" << std::setw(12) << "residual" << std::setw(9) << "order" << std::setw(6) << "sign"
          << "status\n";
    bool all = true;
    std::vector<std::string> failures;
    for (int m : cfg.m)
        for (int k : cfg.k)
            for (const auto& name : cfg.suites) {
                suites::SuiteConfig sc;
                sc.m = m;
                sc.k = k;
                sc.ladder = cfg.grid;
                sc.bounds = cfg.bounds;
                sc.seed = cfg.seed;
                sc.threads = cfg.threads;
                sc.sphere_degree = cfg.sphere_degree;
                suites::SuiteReport r;
                try {
                    r = suites::run_suite(name, sc);
                } catch (const std::invalid_argument& e) {
                    throw std::invalid_argument(name + " (m=" + std::to_string(m) + ", k=" + std::to_string(k) + "): " + e.what());
                }
                if (!cfg.out.empty())
                    write_file(cfg.out, name + "_m" + std::to_string(m) + "_k" + std::to_string(k) + ".json",
                               report_json(r, cfg).dump(2) + "\n");
                std::string ns;
                for (std::size_t i = 0; i < r.N.size(); ++i) ns += (i ? "," : "") + std::to_string(r.N[i]);
                if (ns.empty()) ns = "-";
                table << std::left << std::setw(15) << name << std::setw(4) << m << std::setw(4) << k << std::setw(16)
                      << ns << std::setw(12) << fmt_short(r.residuals.empty() ? NAN : r.residuals.back())
                      << std::setw(9) << (std::isnan(r.order_estimate) ? std::string("-") : fmt_short(r.order_estimate).substr(0, 5))
                      << std::setw(6) << (r.sign ? std::to_string(r.sign) : std::string("-"))
                      << (r.pass ? "PASS" : "FAIL") << "\n";
                if (!r.pass) {
                    all = false;
                    failures.push_back(name + " m=" + std::to_string(m) + " k=" + std::to_string(k) + ": " + r.message);
                }
            }
    for (const auto& f : failures) table << f << "\n";
    out << table.str();
    if (!cfg.out.empty()) write_file(cfg.out, "verify_summary.txt", table.str());
    return all ? kOk : kSuiteFailure;
}

// ---- constants ---------------------------------------------------------------------
int cmd_constants(const RunConfig& cfg, std::ostream& out) {
    const std::string csv = constants_csv(cfg.m, cfg.k);
    out << csv;
    if (!cfg.out.empty()) write_file(cfg.out, "constants.csv", csv);
    return kOk;
}

// ---- beltrami ----------------------------------------------------------------------
double spec_number(const Json& spec, const char* key, double dflt) {
    if (!spec.contains(key)) return dflt;
    if (!spec[key].is_number()) throw SchemaError(std::string("f_spec.") + key + " must be a number");
    return spec[key].get<double>();
}

int cmd_beltrami(const RunConfig& cfg, std::ostream& out) {
    const int m = cfg.m.front(), k = cfg.k.front(), N = cfg.grid.front();
    suites::SuiteConfig sc;
    sc.m = m;
    sc.k = k;
    sc.bounds = cfg.bounds;
    sc.threads = cfg.threads;
    sc.sphere_degree = cfg.sphere_degree;
    auto ctx = suites::make_context(sc, N);
    const auto& grid = *ctx->grid;
    const int nn = grid.num_nodes();

    const auto pn = ops::pi_norm_emp(ctx, cfg.power_steps, cfg.seed);
    const int deg = cfg.phi_spec.value("degree", 2);
    const uint64_t pseed = cfg.phi_spec.value("seed", uint64_t(7));

    beltrami::BeltramiProblem p;
    p.phi = disc::sample(beltrami::make_phi(ctx, deg, pseed), ctx->grid);
    p.tol = cfg.tol;
    p.max_iter = cfg.max_iter;
    p.rho_bound = cfg.rho_bound;
    p.multivector = cfg.f_mode == "multivector";

    const std::string type = cfg.f_spec.value("type", std::string("contraction"));
    auto scalar_at = [&](const double* x) {
        if (type == "constant") return spec_number(cfg.f_spec, "value", 0.0);
        if (type == "contraction") return spec_number(cfg.f_spec, "factor", 0.5) / pn.norm;
        if (type == "gaussian") {
            const double a = spec_number(cfg.f_spec, "amplitude", 0.1), w = spec_number(cfg.f_spec, "width", 0.25);
            double r2 = 0;
            for (int i = 0; i < m; ++i) {
                const auto [lo, hi] = grid.bounds()[std::size_t(i)];
                const double d = x[i] - 0.5 * (lo + hi);
                r2 += d * d;
            }
            return a * std::exp(-r2 / (w * w));
        }
        throw SchemaError("f_spec.type must be constant, contraction or gaussian");
    };
    if (!p.multivector) {
        for (int n = 0; n < nn; ++n) p.f_scalar.push_back(scalar_at(grid.node(n)));
    } else {
        // direction from f_spec.coefficients (blade order), scaled by the scalar profile
        clifford::Multivector<double> dir = clifford::Multivector<double>::scalar(m, 1.0);
        if (cfg.f_spec.contains("coefficients")) {
            const auto& c = cfg.f_spec["coefficients"];
            if (!c.is_array() || int(c.size()) != (1 << (m - 1)))
                throw SchemaError("f_spec.coefficients needs 2^(m-1) numbers");
            for (int a = 0; a < (1 << (m - 1)); ++a) dir[uint32_t(a)] = typed<double>(c[std::size_t(a)], "coefficients");
            const double nrm = clifford::norm(dir);
            if (!(nrm > 0)) throw SchemaError("f_spec.coefficients must not vanish");
            dir *= 1.0 / nrm;
        }
        for (int n = 0; n < nn; ++n) p.f_mv.push_back(dir * scalar_at(grid.node(n)));
    }

    const auto verdict = beltrami::check_contraction(p, ctx, pn.norm);
    const auto sol = beltrami::solve(p, ctx, pn.norm);

    std::ostringstream csv;
    csv << "iter,update_norm,ratio\n";
    for (std::size_t i = 0; i < sol.update_norms.size(); ++i)
        csv << (i + 1) << "," << fmt(sol.update_norms[i]) << "," << fmt(sol.ratios[i]) << "\n";

    Json s;
    s["m"] = m;
    s["k"] = k;
    s["N"] = N;
    s["f_mode"] = cfg.f_mode;
    s["f_inf"] = verdict.f_inf;
    s["pi_norm_emp"] = pn.norm;
    s["iterations"] = sol.iterations;
    s["converged"] = sol.converged;
    s["diverged"] = sol.diverged;
    s["diagnostic"] = sol.diagnostic;
    s["equation_residual"] = sol.equation_residual;
    s["fixed_point_residual"] = sol.fixed_point_residual;
    s["leakage"] = sol.leakage;
    s["contraction"] = Json{{"analytic", Json{{"f_inf", verdict.f_inf}, {"bound", 1.0 / verdict.C}, {"C", verdict.C},
                                            {"pass", verdict.analytic_pass}}},
                            {"empirical", Json{{"f_inf_times_pi_norm", verdict.f_inf * pn.norm},
                                               {"pass", verdict.empirical_pass}}}};
    s["metadata"] = metadata(cfg);

    out << "pi_norm_emp " << fmt_short(pn.norm) << "  f_inf " << fmt_short(verdict.f_inf) << "  analytic bound "
        << (verdict.analytic_pass ? "pass" : "fail") << "  empirical bound " << (verdict.empirical_pass ? "pass" : "fail")
        << "\n";
    out << "iterations " << sol.iterations << "  " << (sol.converged ? "converged" : sol.diverged ? "diverged" : "stopped")
        << "  equation residual " << fmt_short(sol.equation_residual) << "  fixed-point residual "
        << fmt_short(sol.fixed_point_residual) << "\n";
    if (!sol.diagnostic.empty()) out << sol.diagnostic << "\n";
    if (!cfg.out.empty()) {
        write_file(cfg.out, "beltrami_convergence.csv", csv.str());
        write_file(cfg.out, "beltrami_summary.json", s.dump(2) + "\n");
    }
    return sol.converged ? kOk : kSuiteFailure;
}

// ---- bench -------------------------------------------------------------------------
int cmd_bench(const RunConfig& cfg, std::ostream& out) {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point a) { return std::chrono::duration<double>(clock::now() - a).count(); };
    std::ostringstream csv;
    csv << "m,k,N,operation,targets,seconds,node_pairs_per_second\n";
    for (int m : cfg.m)
        for (int k : cfg.k)
            for (int N : cfg.grid) {
                suites::SuiteConfig sc;
                sc.m = m;
                sc.k = k;
                sc.bounds = cfg.bounds;
                sc.threads = cfg.threads;
                sc.sphere_degree = cfg.sphere_degree;
                auto ctx = suites::make_context(sc, N);
                const int nn = ctx->grid->num_nodes();
                auto f = disc::sample(suites::polynomial_field(ctx, +1, 2, cfg.seed), ctx->grid);
                std::vector<clifford::Paravector<double>> ys;
                for (int t = 0; t < 8; ++t) {
                    clifford::Paravector<double> y(m);
                    for (int i = 0; i < m; ++i) {
                        const auto [lo, hi] = ctx->grid->bounds()[std::size_t(i)];
                        y[i] = lo + (0.35 + 0.3 * ((t >> (i % 3)) & 1)) * (hi - lo) + ctx->grid->h(i) / 3;
                    }
                    ys.push_back(y);
                }
                auto row = [&](const char* op, int targets, double s, double pairs) {
                    csv << m << "," << k << "," << N << "," << op << "," << targets << "," << fmt(s) << ","
                        << fmt(pairs / s) << "\n";
                    out << std::left << std::setw(26) << op << " m=" << m << " k=" << k << " N=" << std::setw(4) << N
                        << fmt_short(s / targets) << " s/target  " << fmt_short(pairs / s) << " node pairs/s\n";
                };
                auto t0 = clock::now();
                ops::teodorescu(f, ys, ctx);
                row("teodorescu_point", int(ys.size()), secs(t0), double(ys.size()) * nn);
                t0 = clock::now();
                ops::teodorescu(f, ctx);
                row("teodorescu_all_nodes", nn, secs(t0), double(nn) * nn);
                auto g = suites::bump_field(ctx, -1, std::vector<double>(std::size_t(m), 0.5), 0.4, cfg.seed);
                if (!cfg.bounds.empty()) break;
                auto fa = ops::apply_Rk(g, ctx);
                clifford::Paravector<double> y(std::vector<double>(std::size_t(m), 0.5));
                t0 = clock::now();
                ops::pi_compose(fa, y, ctx);
                row("pi_compose_point", 1, secs(t0), double(nn) * (2 * m));
            }
    if (!cfg.out.empty()) write_file(cfg.out, "bench.csv", csv.str());
    return kOk;
}

}  // namespace

Json RunConfig::to_json() const {
    Json j;
    j["command"] = command;
    j["m"] = m;
    j["k"] = k;
    j["grid"] = grid;
    j["suite"] = suites;
    j["seed"] = seed;
    j["threads"] = threads;
    j["sphere_degree"] = sphere_degree;
    Json b = Json::array();
    for (const auto& [lo, hi] : bounds) b.push_back(Json::array({lo, hi}));
    j["bounds"] = b;
    if (command == "beltrami") {
        j["f_mode"] = f_mode;
        j["f_spec"] = f_spec;
        j["phi_spec"] = phi_spec;
        j["tol"] = tol;
        j["max_iter"] = max_iter;
        j["rho_bound"] = rho_bound;
        j["power_steps"] = power_steps;
    }
    return j;
}

void apply_config(const Json& doc, RunConfig& cfg) {
    if (!doc.is_object()) throw SchemaError("config must be a JSON object");
    for (const auto& [key, v] : doc.items()) {
        if (key == "command") cfg.command = typed<std::string>(v, "command");
        else if (key == "m") cfg.m = int_or_list(v, "m");
        else if (key == "k") cfg.k = int_or_list(v, "k");
        else if (key == "grid" || key == "N") cfg.grid = int_or_list(v, key.c_str());
        else if (key == "suite") {
            if (v.is_string()) cfg.suites = parse_str_list(v.get<std::string>());
            else cfg.suites = typed<std::vector<std::string>>(v, "suite");
        } else if (key == "out") cfg.out = typed<std::string>(v, "out");
        else if (key == "seed") cfg.seed = typed<uint64_t>(v, "seed");
        else if (key == "threads") cfg.threads = typed<int>(v, "threads");
        else if (key == "sphere_degree") cfg.sphere_degree = typed<int>(v, "sphere_degree");
        else if (key == "bounds") {
            cfg.bounds.clear();
            if (!v.is_array()) throw SchemaError("bounds must be a list of [lo, hi] pairs");
            for (const auto& p : v) {
                if (!p.is_array() || p.size() != 2) throw SchemaError("bounds must be a list of [lo, hi] pairs");
                cfg.bounds.push_back({typed<double>(p[0], "bounds"), typed<double>(p[1], "bounds")});
            }
        } else if (key == "f_mode") cfg.f_mode = typed<std::string>(v, "f_mode");
        else if (key == "f_spec") {
            if (!v.is_object()) throw SchemaError("f_spec must be an object");
            cfg.f_spec = v;
        } else if (key == "phi_spec") {
            if (!v.is_object()) throw SchemaError("phi_spec must be an object");
            cfg.phi_spec = v;
        } else if (key == "tol") cfg.tol = typed<double>(v, "tol");
        else if (key == "max_iter") cfg.max_iter = typed<int>(v, "max_iter");
        else if (key == "rho_bound") cfg.rho_bound = typed<double>(v, "rho_bound");
        else if (key == "power_steps") cfg.power_steps = typed<int>(v, "power_steps");
        else throw SchemaError("unknown config key '" + key + "'");
    }
}

void validate(const RunConfig& cfg) {
    static const std::vector<std::string> commands{"verify", "constants", "beltrami", "bench"};
    if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
        throw SchemaError("command must be one of verify, constants, beltrami, bench (got '" + cfg.command + "')");
    for (int m : cfg.m)
        if (m < 3 || m > 8) throw SchemaError("m out of range [3,8]: " + std::to_string(m));
    for (int k : cfg.k)
        if (k < 0 || k > 4) throw SchemaError("k out of range [0,4]: " + std::to_string(k));
    for (int N : cfg.grid)
        if (N < 4 || N > 64) throw SchemaError("N out of range [4,64]: " + std::to_string(N));
    if (cfg.threads < 1) throw SchemaError("threads >= 1");
    if (cfg.sphere_degree < -1) throw SchemaError("sphere_degree >= 0 (or -1 for the default)");
    if (!cfg.bounds.empty()) {
        for (int m : cfg.m)
            if (int(cfg.bounds.size()) != m) throw SchemaError("bounds needs one [lo, hi] pair per dimension");
        for (const auto& [lo, hi] : cfg.bounds)
            if (!(hi > lo)) throw SchemaError("bounds: hi must exceed lo");
    }
    if (cfg.command == "verify") {
        if (cfg.suites.empty()) throw SchemaError("no suite selected");
        for (const auto& s : cfg.suites)
            if (!suites::is_suite(s)) throw SchemaError("unknown suite '" + s + "'");
    }
    if (cfg.command == "beltrami") {
        if (cfg.m.size() != 1 || cfg.k.size() != 1 || cfg.grid.size() != 1)
            throw SchemaError("beltrami takes a single m, k and N");
        if (cfg.f_mode != "scalar" && cfg.f_mode != "multivector") throw SchemaError("f_mode must be scalar or multivector");
        if (!(cfg.tol > 0)) throw SchemaError("tol > 0");
        if (cfg.max_iter < 1) throw SchemaError("max_iter >= 1");
        if (cfg.power_steps < 1) throw SchemaError("power_steps >= 1");
        const int d = cfg.phi_spec.value("degree", 2);
        if (d < 1 || d > 4) throw SchemaError("phi_spec.degree in [1,4]");
    }
}

Json report_json(const suites::SuiteReport& r, const RunConfig& cfg) {
    Json j;
    j["suite"] = r.suite;
    j["m"] = r.m;
    j["k"] = r.k;
    j["N"] = r.N;
    j["residuals"] = series_json(r.residuals);
    j["order_estimate"] = std::isfinite(r.order_estimate) ? Json(r.order_estimate) : Json(nullptr);
    if (r.suite == "adjoint") j["sign"] = r.sign;
    j["pass"] = r.pass;
    j["threshold"] = r.threshold;
    j["invariant"] = r.invariant;
    j["identity"] = r.identity;
    Json s = Json::object();
    for (const auto& [name, v] : r.series) s[name] = series_json(v);
    j["series"] = s;
    j["message"] = r.message;
    j["metadata"] = metadata(cfg);
    return j;
}

std::string constants_csv(const std::vector<int>& ms, const std::vector<int>& ks) {
    std::ostringstream os;
    os << "m,k,C1,C2,C\n";
    for (int m : ms)
        for (int k : ks) {
            const auto c = kernels::norm_constants(m, k);
            os << m << "," << k << "," << fmt(c.C1) << "," << fmt(c.C2) << "," << fmt(c.C) << "\n";
        }
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App cli{"hsca: higher spin Clifford analysis toolkit"};
    cli.set_version_flag("--version", kVersion);
    std::string command, config, m_s, k_s, grid_s, suite_s, out_s;
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    cli.add_option("command", command, "verify | constants | beltrami | bench");
    cli.add_option("--config", config, "JSON config document");
    cli.add_option("--m", m_s, "dimension m (comma list allowed)");
    cli.add_option("--k", k_s, "degree k (comma list allowed)");
    cli.add_option("--grid", grid_s, "cells per axis, refinement ladder as a comma list");
    cli.add_option("--suite", suite_s, "suite name(s), comma separated, or 'all'");
    cli.add_option("--out", out_s, "output directory for artifacts");
    cli.add_option("--seed", seed, "seed for randomized inputs");
    cli.add_option("--threads", threads, "worker threads");
    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << cli.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kSchema;
    }

    RunConfig cfg;
    try {
        if (!config.empty()) {
            std::ifstream f(config);
            if (!f) throw IoError("cannot read config '" + config + "'");
            Json doc;
            try {
                doc = Json::parse(f);
            } catch (const Json::parse_error& e) {
                throw SchemaError(std::string("config is not valid JSON: ") + e.what());
            }
            apply_config(doc, cfg);
        }
        if (!command.empty()) cfg.command = command;
        if (cfg.command == "constants" && config.empty()) {
            cfg.m = {3, 4, 5};
            cfg.k = {0, 1, 2, 3};
        }
        if (!m_s.empty()) cfg.m = parse_int_list(m_s, "--m");
        if (!k_s.empty()) cfg.k = parse_int_list(k_s, "--k");
        if (!grid_s.empty()) cfg.grid = parse_int_list(grid_s, "--grid");
        if (!suite_s.empty()) cfg.suites = suite_s == "all" ? suites::suite_names() : parse_str_list(suite_s);
        if (!out_s.empty()) cfg.out = out_s;
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (cfg.command == "beltrami" && grid_s.empty() && (config.empty() || cfg.grid.size() != 1)) cfg.grid = {16};
        validate(cfg);

        if (cfg.command == "verify") return cmd_verify(cfg, out);
        if (cfg.command == "constants") return cmd_constants(cfg, out);
        if (cfg.command == "beltrami") return cmd_beltrami(cfg, out);
        return cmd_bench(cfg, out);
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return kSchema;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kSchema;
    }
}

}  // namespace hsca::app
