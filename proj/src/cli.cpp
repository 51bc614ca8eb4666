#include "bitree/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace bitree::cli {

namespace {

using nlohmann::json;

const std::vector<double> published_sigmas{0.08, 0.5, 1.0, 3.0};
const std::vector<int> published_steps{50, 100, 150, 200, 300};
const std::vector<Method> default_methods{Method::wei, Method::hst, Method::acz};

std::string fixed(double x, int digits = 6) {
    if (!std::isfinite(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string upper(std::string_view s) {
    std::string o(s);
    std::transform(o.begin(), o.end(), o.begin(), [](unsigned char c) { return char(std::toupper(c)); });
    return o;
}

json to_json(const ModelParams& p) {
    return {{"S0", p.S0},       {"sigma_S", p.sigma_S}, {"r0", p.r0},   {"kappa", p.kappa},
            {"theta", p.theta}, {"sigma_r", p.sigma_r}, {"rho", p.rho}, {"feller_ratio", p.feller_ratio()}};
}

json to_json(const ContractSpec& c) {
    return {{"K", c.strike}, {"T", c.maturity}, {"kind", to_string(c.kind)}, {"exercise", to_string(c.exercise)}};
}

json to_json(const PriceResult& r) {
    json j{{"method", to_string(r.method)},
           {"N", r.steps},
           {"price", r.finite ? json(r.price) : json("nan")},
           {"finite", r.finite},
           {"clamp_count", r.diagnostics.clamp_count()},
           {"marginal_clamps", r.diagnostics.marginal_clamps},
           {"joint_clamps", r.diagnostics.joint_clamps},
           {"infeasible_nodes", r.diagnostics.infeasible},
           {"near_zero_count", r.diagnostics.near_zero},
           {"nodes", r.diagnostics.nodes},
           {"seconds", r.seconds}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

json to_json(const McResult& r, const McConfig& c) {
    return {{"method", "mc"},           {"price", r.price},     {"std_error", r.std_error},
            {"paths", r.paths},         {"steps", c.steps},     {"seed", c.seed},
            {"scheme", to_string(r.scheme)}, {"noise_correlation", r.noise_correlation}, {"seconds", r.seconds}};
}

ClampPolicy policy_from_string(std::string_view s) {
    if (s == "exact" || s == "exact_and_count") return ClampPolicy::exact_and_count;
    if (s == "clamp" || s == "clamp_and_count") return ClampPolicy::clamp_and_count;
    throw std::invalid_argument("unknown clamp policy '" + std::string(s) + "'");
}

std::string_view to_string(ClampPolicy p) { return p == ClampPolicy::exact_and_count ? "exact_and_count" : "clamp_and_count"; }

// Everything the two commands read, gathered from flags, config file and env.
struct Options {
    ModelParams params;
    ContractSpec contract;
    std::string kind = "put";
    std::string exercise = "european";
    std::vector<double> sigmas;
    std::vector<int> steps;
    std::string method = "acz";
    std::vector<std::string> methods;
    std::optional<double> theta_star;
    std::string clamp = "exact";
    McConfig mc;
    std::string scheme = "weak_second_order";
    std::string format = "text";
    std::optional<int> table_id;
    bool with_mc = false;
    std::string out_dir = ".";
    int workers = 0;
    std::string config_path;
};

void add_options(CLI::App& app, Options& o) {
    auto env = [](CLI::Option* opt, std::string_view name) {
        std::string n = upper(name);
        std::replace(n.begin(), n.end(), '-', '_');
        opt->envname("BITREE_" + n);
    };
    env(app.add_option("--S0", o.params.S0, "initial equity price"), "S0");
    env(app.add_option("--sigma-S", o.params.sigma_S, "equity volatility"), "sigma-S");
    env(app.add_option("--r0", o.params.r0, "initial short rate"), "r0");
    env(app.add_option("--kappa", o.params.kappa, "rate mean reversion"), "kappa");
    env(app.add_option("--theta", o.params.theta, "long-run rate"), "theta");
    env(app.add_option("--sigma-r", o.sigmas, "rate volatility (list for tables)")->delimiter(','), "sigma-r");
    env(app.add_option("--rho", o.params.rho, "equity/rate correlation"), "rho");
    env(app.add_option("--K", o.contract.strike, "strike"), "K");
    env(app.add_option("--T", o.contract.maturity, "maturity in years"), "T");
    env(app.add_option("--kind", o.kind, "put or call")->check(CLI::IsMember({"put", "call"})), "kind");
    env(app.add_option("--exercise", o.exercise, "european or american")->check(CLI::IsMember({"european", "american"})),
        "exercise");
    env(app.add_option("--N", o.steps, "time steps (list allowed)")->delimiter(','), "N");
    env(app.add_option("--method", o.method, "acz, wei, hst or mc")->check(CLI::IsMember({"acz", "wei", "hst", "mc"})),
        "method");
    env(app.add_option("--methods", o.methods, "table columns")->delimiter(','), "methods");
    env(app.add_option("--theta-star", o.theta_star, "near-zero regime threshold"), "theta-star");
    env(app.add_option("--clamp-policy", o.clamp, "exact or clamp")->check(CLI::IsMember({"exact", "clamp", "exact_and_count", "clamp_and_count"})),
        "clamp-policy");
    env(app.add_option("--paths", o.mc.paths, "Monte Carlo paths"), "paths");
    env(app.add_option("--mc-steps", o.mc.steps, "Monte Carlo time steps"), "mc-steps");
    env(app.add_option("--seed", o.mc.seed, "Monte Carlo seed"), "seed");
    env(app.add_option("--scheme", o.scheme, "weak_second_order or full_truncation_euler")
            ->check(CLI::IsMember({"weak_second_order", "full_truncation_euler", "euler", "second_order"})),
        "scheme");
    env(app.add_option("--workers", o.workers, "worker threads (0: all cores)"), "workers");
    env(app.add_option("--format", o.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"})), "format");
    env(app.add_option("--id", o.table_id, "published table 1..4")->check(CLI::Range(1, 4)), "id");
    env(app.add_flag("--with-mc", o.with_mc, "add the Monte Carlo benchmark column"), "with-mc");
    env(app.add_option("--out-dir", o.out_dir, "directory for table outputs"), "out-dir");
    app.set_config("--config", "", "flat key=value file; flags win over it");
}

void resolve(Options& o) {
    o.contract.kind = o.kind == "put" ? OptionKind::put : OptionKind::call;
    o.contract.exercise = o.exercise == "european" ? Exercise::european : Exercise::american;
    o.mc.scheme = scheme_from_string(o.scheme);
    o.mc.workers = o.workers;
}

LatticeConfig lattice_of(const Options& o) {
    LatticeConfig c;
    c.theta_star = o.theta_star;
    c.clamp_policy = policy_from_string(o.clamp);
    return c;
}

int exit_for(bool all_finite) { return all_finite ? ok : non_finite; }

int cmd_price(Options& o, std::ostream& out) {
    if (o.sigmas.size() > 1) throw std::invalid_argument("price takes a single --sigma-r");
    if (!o.sigmas.empty()) o.params.sigma_r = o.sigmas.front();

    if (o.method == "mc") {
        const McResult r = mc_price(o.params, o.contract, o.mc);
        if (o.format == "json") {
            json j = to_json(r, o.mc);
            j["params"] = to_json(o.params);
            j["contract"] = to_json(o.contract);
            out << j.dump(2) << "\n";
        } else if (o.format == "csv") {
            out << "method,sigma_r,T,paths,steps,scheme,price,std_error,finite\n"
                << "mc," << o.params.sigma_r << "," << o.contract.maturity << "," << r.paths << "," << o.mc.steps << ","
                << to_string(r.scheme) << "," << fixed(r.price) << "," << fixed(r.std_error) << ","
                << int(std::isfinite(r.price)) << "\n";
        } else {
            out << "mc sigma_r=" << o.params.sigma_r << " T=" << o.contract.maturity << " price=" << fixed(r.price)
                << " se=" << fixed(r.std_error) << " paths=" << r.paths << " steps=" << o.mc.steps
                << " scheme=" << to_string(r.scheme) << " seconds=" << fixed(r.seconds, 2) << "\n";
        }
        return exit_for(std::isfinite(r.price));
    }

    const Method m = method_from_string(o.method);
    if (o.steps.empty()) o.steps = {300};
    LatticeConfig cfg = lattice_of(o);
    bool all_finite = true;
    json arr = json::array();
    if (o.format == "csv") out << "sigma_r,N,method,price,finite,clamp_count,near_zero_count\n";
    for (int n : o.steps) {
        cfg.steps = n;
        const PriceResult r = price(m, o.params, o.contract, cfg);
        all_finite = all_finite && r.finite;
        if (o.format == "json") {
            json j = to_json(r);
            j["params"] = to_json(o.params);
            j["contract"] = to_json(o.contract);
            arr.push_back(std::move(j));
        } else if (o.format == "csv") {
            out << o.params.sigma_r << "," << n << "," << to_string(m) << "," << fixed(r.price) << "," << int(r.finite)
                << "," << r.diagnostics.clamp_count() << "," << r.diagnostics.near_zero << "\n";
        } else {
            out << to_string(m) << " sigma_r=" << o.params.sigma_r << " T=" << o.contract.maturity << " N=" << n
                << " " << to_string(o.contract.exercise) << " " << to_string(o.contract.kind) << " price=" << fixed(r.price)
                << " clamps=" << r.diagnostics.clamp_count() << " infeasible=" << r.diagnostics.infeasible
                << " near_zero=" << r.diagnostics.near_zero << " seconds=" << fixed(r.seconds, 3) << "\n";
        }
    }
    if (o.format == "json") out << (arr.size() == 1 ? arr[0] : arr).dump(2) << "\n";
    return exit_for(all_finite);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

int cmd_table(Options& o, std::ostream& out, int argc, const char* const* argv) {
    TableSpec spec;
    if (o.table_id) {
        spec = table_spec(*o.table_id);
        o.contract.maturity = spec.maturity;
        o.contract.exercise = spec.exercise;
    } else {
        spec.name = "sweep";
        spec.maturity = o.contract.maturity;
        spec.exercise = o.contract.exercise;
        spec.sigmas = published_sigmas;
        spec.steps = published_steps;
        spec.methods = default_methods;
    }
    if (!o.sigmas.empty()) spec.sigmas = o.sigmas;
    if (!o.steps.empty()) spec.steps = o.steps;
    if (!o.methods.empty()) {
        spec.methods.clear();
        for (const auto& s : o.methods) spec.methods.push_back(method_from_string(s));
    }
    // validate the whole grid before spending time on it
    for (double s : spec.sigmas) {
        ModelParams p = o.params;
        p.sigma_r = s;
        for (int n : spec.steps) validate(p, o.contract, LatticeConfig{n, o.theta_star, lattice_of(o).clamp_policy});
    }

    const auto cells = run_table(o.params, spec, o.contract, lattice_of(o), o.workers);

    std::vector<McRow> mc_rows;
    const bool with_mc = o.with_mc && spec.exercise == Exercise::european;
    if (o.with_mc && !with_mc) out << "note: no Monte Carlo benchmark for American exercise; column skipped\n";
    if (with_mc) {
        for (double s : spec.sigmas) {
            ModelParams p = o.params;
            p.sigma_r = s;
            mc_rows.push_back({s, mc_price(p, o.contract, o.mc)});
        }
    }

    namespace fs = std::filesystem;
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    const fs::path csv = dir / (spec.name + ".csv");
    const fs::path md = dir / (spec.name + ".md");
    const fs::path mcsv = dir / (spec.name + "_mc.csv");
    const fs::path manifest = dir / (spec.name + ".manifest.json");

    const std::string markdown = render_markdown(spec, cells, mc_rows);
    write_file(csv, render_csv(cells));
    write_file(md, markdown);
    json outputs = json::array({csv.string(), md.string()});
    if (with_mc) {
        write_file(mcsv, render_mc_csv(mc_rows, spec.maturity, o.mc));
        outputs.push_back(mcsv.string());
    }

    json m;
    m["tool"] = "bitree";
    m["version"] = tool_version;
    m["argv"] = std::vector<std::string>(argv, argv + argc);
    m["table"] = spec.name;
    m["params"] = to_json(o.params);
    m["params"].erase("sigma_r");
    m["contract"] = to_json(o.contract);
    m["sigma_r"] = spec.sigmas;
    m["N"] = spec.steps;
    json methods = json::array();
    for (Method x : spec.methods) methods.push_back(to_string(x));
    m["methods"] = methods;
    m["theta_star"] = o.theta_star ? json(*o.theta_star) : json("min(theta, r0)/100");
    m["clamp_policy"] = to_string(lattice_of(o).clamp_policy);
    m["mc"] = {{"enabled", with_mc}, {"paths", o.mc.paths}, {"steps", o.mc.steps}, {"seed", o.mc.seed},
               {"scheme", to_string(o.mc.scheme)}};
    m["outputs"] = outputs;
    write_file(manifest, m.dump(2) + "\n");

    out << markdown;
    out << "wrote " << csv.string() << ", " << md.string() << (with_mc ? ", " + mcsv.string() : std::string()) << ", "
        << manifest.string() << "\n";
    // per-cell non-finite values are data here, not a failure of the command
    return ok;
}

}  // namespace

TableSpec table_spec(int id) {
    if (id < 1 || id > 4) throw std::invalid_argument("table id must be 1..4");
    TableSpec s;
    s.name = "table" + std::to_string(id);
    s.maturity = (id == 1 || id == 3) ? 1.0 : 2.0;
    s.exercise = id <= 2 ? Exercise::european : Exercise::american;
    s.sigmas = published_sigmas;
    s.steps = published_steps;
    s.methods = default_methods;
    return s;
}

std::vector<TableCell> run_table(const ModelParams& base, const TableSpec& spec, const ContractSpec& contract,
                                 const LatticeConfig& lattice, int workers) {
    std::vector<TableCell> cells;
    for (double s : spec.sigmas)
        for (int n : spec.steps)
            for (Method m : spec.methods) cells.push_back({s, n, m, {}});

    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < cells.size(); i = next++) {
            TableCell& c = cells[i];
            ModelParams p = base;
            p.sigma_r = c.sigma_r;
            ContractSpec k = contract;
            k.maturity = spec.maturity;
            k.exercise = spec.exercise;
            const int n = c.steps;
            c.result = price_curve(c.method, p, k, std::span<const int>(&n, 1), lattice).front();
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t n_workers = std::min<size_t>(cells.size(), workers > 0 ? size_t(workers) : hw);
    {
        std::vector<std::jthread> pool;
        for (size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
        work();
    }
    return cells;
}

std::string render_csv(const std::vector<TableCell>& cells) {
    std::ostringstream os;
    os << "sigma_r,N,method,price,finite,clamp_count,near_zero_count\n";
    for (const auto& c : cells)
        os << c.sigma_r << "," << c.steps << "," << to_string(c.method) << "," << fixed(c.result.price) << ","
           << int(c.result.finite) << "," << c.result.diagnostics.clamp_count() << "," << c.result.diagnostics.near_zero
           << "\n";
    return os.str();
}

std::string render_mc_csv(const std::vector<McRow>& rows, double maturity, const McConfig& mc) {
    std::ostringstream os;
    os << "sigma_r,T,paths,steps,scheme,seed,price,std_error,seconds\n";
    for (const auto& r : rows)
        os << r.sigma_r << "," << maturity << "," << r.result.paths << "," << mc.steps << "," << to_string(r.result.scheme)
           << "," << mc.seed << "," << fixed(r.result.price) << "," << fixed(r.result.std_error) << ","
           << fixed(r.result.seconds, 2) << "\n";
    return os.str();
}

std::string render_markdown(const TableSpec& spec, const std::vector<TableCell>& cells, const std::vector<McRow>& mc) {
    std::map<std::tuple<double, int, Method>, const PriceResult*> at;
    for (const auto& c : cells) at[{c.sigma_r, c.steps, c.method}] = &c.result;

    std::ostringstream os;
    os << "| sigma_r | N |";
    for (Method m : spec.methods) os << " " << upper(to_string(m)) << " |";
    if (!mc.empty()) os << " MC Benchmark |";
    os << "\n|---|---|";
    for (size_t i = 0; i < spec.methods.size(); ++i) os << "---|";
    if (!mc.empty()) os << "---|";
    os << "\n";

    const size_t mid = spec.steps.size() / 2;
    for (double s : spec.sigmas) {
        const auto mc_row = std::find_if(mc.begin(), mc.end(), [&](const McRow& r) { return r.sigma_r == s; });
        for (size_t row = 0; row < spec.steps.size(); ++row) {
            const int n = spec.steps[row];
            os << "| " << (row == 0 ? fixed(s, 2) : std::string()) << " | " << n << " |";
            for (Method m : spec.methods) {
                const auto it = at.find({s, n, m});
                os << " " << (it == at.end() ? std::string("-") : fixed(it->second->price)) << " |";
            }
            if (!mc.empty()) {
                std::string cell;
                if (mc_row != mc.end()) {
                    // centre value flanked by a 95% band, as in the published layout
                    const double half = 1.96 * mc_row->result.std_error;
                    if (row + 1 == mid) cell = "(" + fixed(mc_row->result.price - half) + ")";
                    if (row == mid) cell = fixed(mc_row->result.price);
                    if (row == mid + 1) cell = "(" + fixed(mc_row->result.price + half) + ")";
                }
                os << " " << cell << " |";
            }
            os << "\n";
        }
    }
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Option prices under lognormal equity with CIR short rate"};
    app.fallthrough();
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    add_options(app, o);
    CLI::App* price_cmd = app.add_subcommand("price", "price one contract");
    CLI::App* table_cmd = app.add_subcommand("table", "regenerate a convergence table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return invalid_input;
    }

    try {
        resolve(o);
        if (price_cmd->parsed()) return cmd_price(o, out);
        if (table_cmd->parsed()) return cmd_table(o, out, argc, argv);
        return invalid_input;
    } catch (const std::invalid_argument& e) {  // ValidationError, AmericanNotSupported, bad names
        err << "error: " << e.what() << "\n";
        return invalid_input;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return internal_error;
    }
}

}  // namespace bitree::cli
