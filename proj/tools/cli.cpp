#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracpois/errors.hpp"
#include "fracpois/models.hpp"
#include "fracpois/simulate.hpp"
#include "fracpois/special_functions.hpp"
#include "fracpois/verify.hpp"

namespace fracpois::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Record {
    double x;
    double y;
    Json meta;
};

// Densities are singular at the origin for small nu, so grid starts are nudged off it.
constexpr double density_floor = 1e-9;

std::string format_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        return quoted + "\"";
    }
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.dump();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void emit(const std::vector<Record>& records, const std::string& format, std::ostream& out) {
    if (format == "json") {
        Json arr = Json::array();
        for (const Record& r : records) {
            Json meta = r.meta;
            arr.push_back({{"x", number_or_null(r.x)}, {"y", number_or_null(r.y)}, {"meta", std::move(meta)}});
        }
        out << arr.dump(2) << '\n';
        return;
    }
    std::vector<std::string> keys;
    for (const Record& r : records)
        for (const auto& [key, _] : r.meta.items())
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    out << "x,y";
    for (const auto& k : keys) out << ',' << k;
    out << '\n';
    for (const Record& r : records) {
        out << format_number(r.x) << ',' << format_number(r.y);
        for (const auto& k : keys) out << ',' << (r.meta.contains(k) ? csv_cell(r.meta[k]) : std::string());
        out << '\n';
    }
}

// Either an explicit list of values or an evenly spaced (optionally log-spaced) range.
struct GridArgs {
    std::vector<double> values;
    std::optional<double> from, to;
    int points = 50;
    bool log = false;

    void add_to(CLI::App& app, const std::string& name, const std::string& what) {
        app.add_option("--" + name, values, what + " values")->delimiter(',');
        app.add_option("--" + name + "-from", from, "first " + what + " of a range");
        app.add_option("--" + name + "-to", to, "last " + what + " of a range");
        app.add_option("--points", points, "range size")->check(CLI::PositiveNumber);
        app.add_flag("--log", log, "logarithmic range spacing");
    }

    std::vector<double> build(const std::string& name, std::optional<double> floor = std::nullopt) const {
        if (!values.empty()) {
            if (from || to) throw InvalidParam("give --" + name + " or a range, not both");
            return values;
        }
        if (!from || !to) throw InvalidParam("missing --" + name + " or --" + name + "-from/--" + name + "-to");
        double lo = *from;
        const double hi = *to;
        if (floor && lo <= 0.0) lo = *floor;
        if (!(hi > lo) && !(points == 1 && hi == lo)) throw InvalidParam("empty " + name + " range");
        if (points == 1) return {lo};
        if (log) {
            if (!(lo > 0.0)) throw InvalidParam("log spacing needs a positive range");
            return GridSpec{lo, hi, points, GridSpec::Spacing::logarithmic}.nodes();
        }
        std::vector<double> out(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / (points - 1);
        out.back() = hi;
        return out;
    }
};

std::string provenance_of(Route r) { return r == Route::integral ? "integral" : "series"; }

struct Globals {
    std::string format = "csv";
    std::uint64_t seed = 20240601;
    std::optional<double> tol;

    SeriesPolicy policy() const {
        SeriesPolicy p = SeriesPolicy::from_environment();
        if (tol) {
            if (!(*tol > 0.0)) throw InvalidParam("--tol must be positive");
            p.rel_tol = *tol;
        }
        return p;
    }
};

// ---- eval ----

struct EvalArgs {
    double alpha = 1.0, beta = 1.0, gamma = 1.0, lam = 1.0;
    std::string route = "auto";
    GridArgs grid;
};

RouteChoice parse_route(const std::string& r) {
    if (r == "series") return RouteChoice::series;
    if (r == "integral") return RouteChoice::integral;
    return RouteChoice::automatic;
}

Evaluation eval_wright(double lam, double beta, double x, const SeriesPolicy& policy, RouteChoice choice) {
    // the M-Wright density has a dedicated dispatcher
    if (lam > -1.0 && lam < 0.0 && beta == 1.0 + lam && x <= 0.0) return m_wright_eval(-lam, -x, policy, choice);
    const bool hankel = lam > -1.0 && lam < 0.0 && beta < 1.0 && x <= 0.0;
    if (choice == RouteChoice::integral) {
        if (!hankel) throw InvalidParam("no integral route for these Wright parameters");
        return {wright_hankel_integral(-lam, beta, -x), Route::integral, 1.0};
    }
    try {
        const SeriesResult s = wright_series_detail(lam, beta, x, policy);
        if (s.cancellation > 1e10) throw CancellationWarning("Wright series cancellation", s.cancellation);
        return {s.value, Route::series, s.cancellation};
    } catch (const CancellationWarning&) {
        if (!hankel || choice == RouteChoice::series) throw;
        return {wright_hankel_integral(-lam, beta, -x), Route::integral, 1.0};
    }
}

std::vector<Record> run_eval(const std::string& fn, const EvalArgs& a, const Globals& g) {
    const SeriesPolicy policy = g.policy();
    const RouteChoice choice = parse_route(a.route);
    std::vector<Record> records;
    for (double x : a.grid.build("x")) {
        Evaluation e;
        Json meta = {{"command", "eval " + fn}};
        if (fn == "wright") {
            e = eval_wright(a.lam, a.beta, x, policy, choice);
            meta["lam"] = a.lam;
            meta["beta"] = a.beta;
        } else {
            const MLSpec spec{a.alpha, a.beta, fn == "ml" ? 1.0 : a.gamma};
            e = gml_eval(spec, x, policy, choice);
            meta["alpha"] = spec.alpha;
            meta["beta"] = spec.beta;
            meta["gamma"] = spec.gamma;
        }
        meta["route"] = std::string(route_name(e.route));
        meta["cancellation"] = e.cancellation;
        meta["provenance"] = provenance_of(e.route);
        records.push_back({x, e.value, std::move(meta)});
    }
    return records;
}

// ---- dist ----

struct DistArgs {
    int n = 1;
    double nu = 1.0, lambda = 1.0;
    GridArgs t_grid, u_grid;
    std::vector<int> k;
    std::optional<int> k_max;
    int r = 1;
    double t_single = 1.0;
};

Json dist_meta(const std::string& quantity, const ProcessSpec& spec) {
    return {{"command", "dist " + quantity}, {"n", spec.n}, {"nu", spec.nu}, {"lambda", spec.lambda}};
}

// Route taken by the first-order survival term, which leads every GML sum in the model.
std::string dist_provenance(const ProcessSpec& spec, double t, const SeriesPolicy& policy) {
    if (t <= 0.0 || spec.nu == 1.0) return "series";
    return provenance_of(gml_neg_scaled({spec.nu, 1.0, 1.0}, spec.lambda * std::pow(t, spec.nu), 0.0, policy).route);
}

std::vector<Record> run_dist(const std::string& q, DistArgs& a, const Globals& g) {
    const ProcessSpec spec{a.n, a.nu, a.lambda};
    spec.validate();
    const SeriesPolicy policy = g.policy();
    std::vector<Record> records;
    auto push = [&](double x, double y, double t, Json extra) {
        Json meta = dist_meta(q, spec);
        for (auto& [key, v] : extra.items()) meta[key] = v;
        meta["provenance"] = dist_provenance(spec, t, policy);
        records.push_back({x, y, std::move(meta)});
    };

    if (q == "pmf") {
        if (a.k_max) {
            if (!a.k.empty()) throw InvalidParam("give --k or --k-max, not both");
            if (a.t_grid.values.size() != 1) throw InvalidParam("--k-max needs exactly one --t");
            const double t = a.t_grid.values.front();
            const auto table = pmf_table(spec, *a.k_max, t, policy);
            for (std::size_t k = 0; k < table.size(); ++k) push(static_cast<double>(k), table[k], t, {{"t", t}});
        } else {
            if (a.k.empty()) throw InvalidParam("pmf needs --k or --k-max");
            for (int k : a.k)
                for (double t : a.t_grid.build("t")) push(t, pmf(spec, k, t, policy), t, {{"k", k}});
        }
    } else if (q == "wtpdf" || q == "wtcdf") {
        const std::vector<int> ks = a.k.empty() ? std::vector<int>{1} : a.k;
        for (int k : ks)
            for (double t : a.t_grid.build("t", density_floor))
                push(t, q == "wtpdf" ? waiting_time_pdf(spec, k, t, policy) : waiting_time_cdf(spec, k, t, policy), t,
                     {{"k", k}});
    } else if (q == "iapdf") {
        for (double t : a.t_grid.build("t", density_floor)) push(t, interarrival_pdf(spec, t, policy), t, {});
    } else if (q == "pgf") {
        const double t = a.t_single;
        for (double u : a.u_grid.build("u")) push(u, pgf(spec, u, t, policy), t, {{"t", t}});
    } else if (q == "renewal") {
        for (double t : a.t_grid.build("t")) push(t, renewal_mean(spec, t, policy), t, {});
    } else if (q == "moments") {
        for (double t : a.t_grid.build("t")) {
            push(t, factorial_moment(spec, a.r, t), t, {{"r", a.r}});
            records.back().meta["provenance"] = "series";
        }
    }
    return records;
}

// ---- simulate ----

struct SimArgs {
    int n = 1;
    double nu = 1.0, lambda = 1.0;
    double horizon = 1.0;
    int paths = 10000;
    int threads = 0;
    std::string out_file;
    std::vector<double> probes;
};

double analytic_mean(const ProcessSpec& spec, double t, const SeriesPolicy& policy) {
    if (spec.n <= 2) return renewal_mean(spec, t, policy);
    const auto table = pmf_table(spec, normalization_cutoff(spec, t, 1e-12, policy), t, policy);
    double m = 0.0;
    for (std::size_t k = 1; k < table.size(); ++k) m += static_cast<double>(k) * table[k];
    return m;
}

std::vector<Record> run_simulate(const SimArgs& a, const Globals& g) {
    const ProcessSpec spec{a.n, a.nu, a.lambda};
    spec.validate();
    const SimConfig config{g.seed, a.paths, a.horizon};
    config.validate();
    if (a.threads < 0) throw InvalidParam("--threads must be >= 0");
    const SeriesPolicy policy = g.policy();
    std::vector<double> probes = a.probes.empty() ? std::vector<double>{a.horizon} : a.probes;
    for (double t : probes)
        if (!(t > 0.0 && t <= a.horizon)) throw InvalidParam("probe times must lie in (0, horizon]");

    const int threads = a.threads > 0 ? a.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto paths = simulate_paths(spec, config, threads);

    if (!a.out_file.empty()) {
        std::ofstream file(a.out_file);
        if (!file) throw InvalidParam("cannot open " + a.out_file);
        write_paths_jsonl(file, paths);
        if (!file) throw InvalidParam("failed writing " + a.out_file);
    }

    std::vector<Record> records;
    const Json base = {{"command", "simulate"}, {"n", spec.n},       {"nu", spec.nu},
                       {"lambda", spec.lambda}, {"seed", g.seed},    {"paths", a.paths}};
    for (double t : probes) {
        const CountStats stats = count_stats(paths, t);
        Json meta = base;
        meta["record"] = "mean";
        meta["t"] = t;
        meta["k"] = nullptr;
        meta["std_error"] = stats.std_error;
        meta["analytic"] = analytic_mean(spec, t, policy);
        meta["provenance"] = "simulation";
        records.push_back({t, stats.mean, std::move(meta)});

        const auto empirical = empirical_pmf(paths, t);
        const auto exact = pmf_table(spec, static_cast<int>(empirical.size()) - 1, t, policy);
        for (std::size_t k = 0; k < empirical.size(); ++k) {
            Json row = base;
            row["record"] = "pmf";
            row["t"] = t;
            row["k"] = static_cast<int>(k);
            row["std_error"] = std::sqrt(empirical[k] * (1.0 - empirical[k]) / a.paths);
            row["analytic"] = exact[k];
            row["provenance"] = "simulation";
            records.push_back({static_cast<double>(k), empirical[k], std::move(row)});
        }
    }
    return records;
}

// ---- verify ----

struct VerifyArgs {
    std::vector<std::string> only;
    int threads = 0;
    bool list = false;
};

int run_verify(const VerifyArgs& a, const Globals& g, std::ostream& out) {
    if (a.list) {
        Json arr = Json::array();
        for (const SuiteGroup& grp : suite_groups())
            arr.push_back({{"name", grp.name}, {"description", grp.description}, {"in_default", grp.in_default}});
        out << arr.dump(2) << '\n';
        return ok;
    }
    if (a.threads < 0) throw InvalidParam("--threads must be >= 0");
    const auto reports = run_suite(a.only, SuiteOptions{g.tol, a.threads});
    out << reports_to_json(reports) << '\n';
    const bool all_pass = std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
    return all_pass ? ok : verification_failed;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional Poisson processes: special functions, distributions, simulation, checks", "fracpois"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", g.seed, "simulation seed");
    app.add_option("--tol", g.tol, "series tolerance, or replacement tolerance for verify");

    // eval
    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "evaluate Mittag-Leffler type functions");
    eval->require_subcommand(1);
    eval->fallthrough();
    eval->add_option("--route", ea.route, "auto, series or integral")
        ->check(CLI::IsMember({"auto", "series", "integral"}));
    ea.grid.add_to(*eval, "x", "argument");
    auto* ml_cmd = eval->add_subcommand("ml", "E_{alpha,beta}(x)");
    auto* gml_cmd = eval->add_subcommand("gml", "three-parameter Mittag-Leffler function");
    auto* wright_cmd = eval->add_subcommand("wright", "Wright function W_{lam,beta}(x)");
    for (auto* c : {ml_cmd, gml_cmd}) {
        c->fallthrough();
        c->add_option("--alpha", ea.alpha)->required();
        c->add_option("--beta", ea.beta)->required();
    }
    gml_cmd->add_option("--gamma", ea.gamma)->required();
    wright_cmd->fallthrough();
    wright_cmd->add_option("--lam", ea.lam)->required();
    wright_cmd->add_option("--beta", ea.beta)->required();

    // dist
    DistArgs da;
    auto* dist = app.add_subcommand("dist", "exact distributions of the counting process");
    dist->require_subcommand(1);
    dist->fallthrough();
    dist->add_option("--n", da.n, "model order")->required();
    dist->add_option("--nu", da.nu, "fractional order in (0, 1]")->required();
    dist->add_option("--lambda", da.lambda, "rate")->required();
    const std::vector<std::string> quantities = {"pmf", "wtpdf", "wtcdf", "iapdf", "pgf", "renewal", "moments"};
    for (const auto& q : quantities) {
        auto* c = dist->add_subcommand(q);
        c->fallthrough();
        if (q == "pgf") {
            da.u_grid.add_to(*c, "u", "pgf argument");
            c->add_option("--t", da.t_single)->required();
            continue;
        }
        da.t_grid.add_to(*c, "t", "time");
        if (q == "pmf" || q == "wtpdf" || q == "wtcdf") c->add_option("--k", da.k, "event counts")->delimiter(',');
        if (q == "pmf") c->add_option("--k-max", da.k_max, "table k = 0..k_max at a single t");
        if (q == "moments") c->add_option("--r", da.r, "factorial moment order");
    }

    // simulate
    SimArgs sa;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo paths and empirical counts");
    sim->fallthrough();
    sim->add_option("--n", sa.n)->required();
    sim->add_option("--nu", sa.nu)->required();
    sim->add_option("--lambda", sa.lambda)->required();
    sim->add_option("--horizon", sa.horizon)->required();
    sim->add_option("--paths", sa.paths);
    sim->add_option("--threads", sa.threads, "0 uses every core");
    sim->add_option("--out", sa.out_file, "JSON-lines path file");
    sim->add_option("--probe", sa.probes, "probe times, default the horizon")->delimiter(',');

    // verify
    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "run the cross-check suite");
    ver->fallthrough();
    ver->add_option("--only", va.only, "groups or aliases")->delimiter(',');
    ver->add_option("--threads", va.threads, "0 uses every core");
    ver->add_flag("--list", va.list, "list groups");

    std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 consumes from the back
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "fracpois: " << e.what() << '\n';
        return usage_error;
    }

    try {
        std::vector<Record> records;
        if (*eval) {
            for (auto* c : {ml_cmd, gml_cmd, wright_cmd})
                if (*c) records = run_eval(c->get_name(), ea, g);
        } else if (*dist) {
            for (auto* c : dist->get_subcommands()) records = run_dist(c->get_name(), da, g);
        } else if (*sim) {
            records = run_simulate(sa, g);
        } else if (*ver) {
            return run_verify(va, g, out);
        }
        emit(records, g.format, out);
        return ok;
    } catch (const InvalidParam& e) {
        err << "fracpois: invalid parameter: " << e.what() << '\n';
        return usage_error;
    } catch (const Error& e) {
        err << "fracpois: numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
}

}  // namespace fracpois::cli
