// macrosize: size reports, parameter sweeps, calibration and phase-noise queries.
//
// Exit codes: 0 ok, 1 mc-check disagreement, 2 bad input, 3 numerical failure.
// Nothing is written to stdout unless the whole command succeeds.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "macrosize/macrosize.hpp"
#include "macrosize/report.hpp"

namespace ms = macrosize;
using nlohmann::json;

namespace {

struct Options {
    std::string state;
    std::string pair;
    double pg = ms::kDefaultGuessTarget;
    std::string sweep;
    std::string out;
    std::uint64_t seed = ms::McConfig{}.seed;
    std::uint64_t samples = ms::McConfig{}.samples;
    std::size_t cutoff = 0;
    bool json = false;
    bool csv = false;
    bool rotate = false;
    std::size_t grid = 32;
    double E = 0.5;
    double dphi = 0.1;
    double sigma = 1.0;
    double sigma_scale = 1.0;
    unsigned threads = 0;
};

struct Sweep {
    std::string param;
    std::vector<double> values;
};

std::optional<std::size_t> cutoff_of(const Options& o)
{
    if (o.cutoff == 0)
        return std::nullopt;
    return o.cutoff;
}

ms::ComponentPair load_pair(const ms::StateFamilySpec& spec, const Options& o)
{
    std::optional<ms::StateFamilySpec> second;
    if (!o.pair.empty())
        second = ms::parse_state_spec(o.pair);
    return ms::build_pair(spec, second, cutoff_of(o));
}

double parse_double(const std::string& text, const std::string& what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ms::parse_error("sweep: bad " + what + " '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v))
        throw ms::parse_error("sweep: bad " + what + " '" + text + "'");
    return v;
}

bool integer_param(const std::string& p) { return p == "N" || p == "M"; }

// param=start:stop:points[:log]
Sweep parse_sweep(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ms::parse_error("sweep: expected param=start:stop:points[:log]");
    Sweep s;
    s.param = text.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(eq + 1));
    for (std::string item; std::getline(ss, item, ':');)
        parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4)
        throw ms::parse_error("sweep: expected param=start:stop:points[:log]");
    const double start = parse_double(parts[0], "start");
    const double stop = parse_double(parts[1], "stop");
    const double points = parse_double(parts[2], "points");
    if (points < 2 || std::floor(points) != points || points > 1e6)
        throw ms::parse_error("sweep: points must be an integer >= 2");
    bool log = false;
    if (parts.size() == 4) {
        if (parts[3] != "log" && parts[3] != "lin")
            throw ms::parse_error("sweep: scale must be 'log' or 'lin'");
        log = parts[3] == "log";
    }
    if (log && !(start > 0.0 && stop > 0.0))
        throw ms::parse_error("sweep: log range must be positive");
    const auto n = static_cast<std::size_t>(points);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n - 1);
        double v = log ? start * std::pow(stop / start, f) : start + (stop - start) * f;
        if (integer_param(s.param))
            v = std::round(v);
        if (s.values.empty() || v != s.values.back())
            s.values.push_back(v);
    }
    return s;
}

// Evaluates f(i) for i in [0, n) on a small pool; results stay in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F&& f)
{
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < workers; ++t)
            pool.emplace_back(work);
        work();
    }
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i])
            std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

std::string csv_table(const std::vector<double>& values, const std::vector<ms::SizeReport>& rows)
{
    std::string s = "param,size,sigma_max,p_at_sigma0\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        s += ms::format_number(values[i]) + "," + ms::format_number(rows[i].size) + "," +
             ms::format_number(rows[i].sigma_max) + "," + ms::format_number(rows[i].p_at_sigma0) + "\n";
    return s;
}

std::string json_table(const std::string& param, const std::vector<double>& values,
                       const std::vector<ms::SizeReport>& rows)
{
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto j = ms::to_json(rows[i]);
        j["param"] = param;
        j["value"] = values[i];
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

ms::SizeReport size_report(const ms::StateFamilySpec& spec, const Options& o, double pg, json* extra = nullptr)
{
    const auto pair = load_pair(spec, o);
    if (o.rotate) {
        if (!pair.amp_a || !pair.amp_d)
            throw std::invalid_argument("size: --rotate needs amplitude components (not spins)");
        const ms::RotationGrid grid{o.grid, o.grid, true, o.threads};
        auto r = ms::optimize_rotation(*pair.amp_a, *pair.amp_d, pg, grid);
        r.report.family = pair.label;
        if (extra)
            *extra = {{"theta", r.theta}, {"phi", r.phi}, {"skipped", r.skipped}};
        return r.report;
    }
    return ms::size(pair.a, pair.d, pg, pair.label);
}

std::string cmd_size(const Options& o)
{
    const auto spec = ms::parse_state_spec(o.state);
    json extra;
    const auto r = size_report(spec, o, o.pg, &extra);
    if (o.csv)
        return csv_table({o.pg}, {r});
    auto j = ms::to_json(r);
    if (o.rotate)
        j["rotation"] = extra;
    return j.dump(2) + "\n";
}

std::string cmd_sweep(const Options& o)
{
    const auto spec = ms::parse_state_spec(o.state);
    if (o.sweep.empty())
        throw ms::parse_error("sweep: --sweep is required");
    const auto sw = parse_sweep(o.sweep);
    if (sw.param == "pg")
        throw ms::parse_error("sweep: use pg-sweep to vary pg");
    std::vector<ms::StateFamilySpec> specs;
    for (double v : sw.values)
        specs.push_back(ms::with_param(spec, sw.param, v));
    auto rows = parallel_map<ms::SizeReport>(specs.size(), o.threads,
                                             [&](std::size_t i) { return size_report(specs[i], o, o.pg); });
    return o.json ? json_table(sw.param, sw.values, rows) : csv_table(sw.values, rows);
}

std::string cmd_pg_sweep(const Options& o)
{
    const auto spec = ms::parse_state_spec(o.state);
    const auto sw = parse_sweep(o.sweep.empty() ? "pg=0.55:0.95:41" : o.sweep);
    if (sw.param != "pg")
        throw ms::parse_error("pg-sweep: the swept parameter must be pg");
    for (double p : sw.values)
        ms::check_guess_target(p);
    const auto pair = load_pair(spec, o);
    auto rows = parallel_map<ms::SizeReport>(sw.values.size(), o.threads, [&](std::size_t i) {
        return ms::size(pair.a, pair.d, sw.values[i], pair.label);
    });
    return o.json ? json_table("pg", sw.values, rows) : csv_table(sw.values, rows);
}

std::string cmd_calibrate(const Options& o)
{
    const double n = ms::size_from_sigma(o.sigma, o.pg);
    if (o.csv)
        return "sigma,pg,size\n" + ms::format_number(o.sigma) + "," + ms::format_number(o.pg) + "," +
               ms::format_number(n) + "\n";
    return json{{"sigma", o.sigma}, {"pg", o.pg}, {"size", n}}.dump(2) + "\n";
}

std::string cmd_phase_bound(const Options& o)
{
    const auto spec = ms::parse_state_spec(o.state);
    const auto pair = load_pair(spec, o);
    const auto b = ms::required_phase_resolution(
        o.E, [&](double p) { return ms::size(pair.a, pair.d, p, pair.label).size; });
    auto j = ms::to_json(b);
    j["family"] = pair.label;
    return j.dump(2) + "\n";
}

std::string cmd_dephase(const Options& o)
{
    const auto spec = ms::parse_state_spec(o.state);
    const auto pair = load_pair(spec, o);
    if (!pair.amp_a || !pair.amp_d)
        throw std::invalid_argument("dephase: needs amplitude components (not spins)");
    const ms::TwoComponentEntangledState st(*pair.amp_a, *pair.amp_d);
    const auto r = ms::dephasing_report(st, o.dphi);
    auto j = ms::to_json(r);
    j["environment_guess_bound"] = ms::environment_guess_bound(pair.a, pair.d, o.dphi);
    j["family"] = pair.label;
    return j.dump(2) + "\n";
}

struct McCase {
    const char* state;
    const char* pair;
    double sigma;
};

constexpr McCase kMcGrid[] = {
    {"fock:M=0", "fock:M=5", 1.0},        {"fock:M=0", "fock:M=5", 4.0},
    {"coherent:a2=9", "fock:M=0", 0.5},   {"coherent:a2=9", "fock:M=0", 3.0},
    {"cat:a2=0,b2=10", "", 1.0},          {"cat:a2=25,b2=4", "", 2.0},
    {"dsp:a2=25", "", 0.3},               {"dsp:a2=25", "", 2.0},
    {"spins:N=100,delta=0.3", "", 1.0},   {"spins:N=100,delta=0.3", "", 5.0},
    {"fock:M=3", "coherent:a2=4", 0.7},  {"cat:a2=4,b2=1", "", 0.8},
};

int cmd_mc_check(const Options& o, std::string& out)
{
    if (!(o.sigma_scale > 0.0) || !std::isfinite(o.sigma_scale))
        throw std::domain_error("mc-check: --sigma-scale must be > 0");
    std::string s = "state,pair,sigma,analytic,mc,stderr,z,status\n";
    bool ok = true;
    for (const auto& c : kMcGrid) {
        std::optional<ms::StateFamilySpec> second;
        if (*c.pair)
            second = ms::parse_state_spec(c.pair);
        const auto pair = ms::build_pair(ms::parse_state_spec(c.state), second);
        const double sigma = c.sigma * o.sigma_scale;
        const double exact = ms::guess_probability(pair.a, pair.d, sigma).guess_probability;
        const auto mc = ms::mc_guess_probability(pair.a, pair.d, sigma, {o.samples, o.seed, 8});
        const double z = mc.standard_error > 0 ? (mc.probability - exact) / mc.standard_error : 0.0;
        const bool pass = std::abs(mc.probability - exact) <= 3.0 * mc.standard_error + 1e-12;
        ok = ok && pass;
        s += "\"" + std::string(c.state) + "\",\"" + c.pair + "\"," + ms::format_number(sigma) + "," +
             ms::format_number(exact) + "," + ms::format_number(mc.probability) + "," +
             ms::format_number(mc.standard_error) + "," + ms::format_number(z) + "," + (pass ? "PASS" : "FAIL") +
             "\n";
    }
    s += "# seed=" + std::to_string(o.seed) + " samples=" + std::to_string(o.samples) + "\n";
    out = std::move(s);
    return ok ? 0 : 1;
}

void emit(const Options& o, const std::string& text)
{
    if (o.out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f)
        throw ms::parse_error("cannot open output file '" + o.out + "'");
    f << text;
    if (!f)
        throw ms::parse_error("failed writing '" + o.out + "'");
}

} // namespace

int main(int argc, char** argv)
{
    Options o;
    CLI::App app{"Size of two-component superpositions under a coarse-grained photon counter"};
    app.require_subcommand(1);

    auto add_state = [&](CLI::App* c, bool required) {
        auto* opt = c->add_option("--state", o.state, "state spec, e.g. cat:a2=0,b2=40");
        if (required)
            opt->required();
        c->add_option("--pair", o.pair, "second component for single-state families");
        c->add_option("--cutoff-override", o.cutoff, "Fock cutoff for built states");
    };
    auto add_pg = [&](CLI::App* c) { c->add_option("--pg", o.pg, "target guessing probability (default 2/3)"); };
    auto add_format = [&](CLI::App* c) {
        auto* j = c->add_flag("--json", o.json, "JSON output");
        auto* v = c->add_flag("--csv", o.csv, "CSV output");
        j->excludes(v);
        c->add_option("--out", o.out, "write output to a file instead of stdout");
    };

    auto* size = app.add_subcommand("size", "size report for one pair");
    add_state(size, true);
    add_pg(size);
    add_format(size);
    size->add_flag("--rotate", o.rotate, "maximize over rotations of the components");
    size->add_option("--grid", o.grid, "rotation grid points per axis")->check(CLI::Range(1, 4096));
    size->add_option("--threads", o.threads, "worker threads (0 = all cores)");

    auto* sweep = app.add_subcommand("sweep", "size over a family parameter");
    add_state(sweep, true);
    add_pg(sweep);
    add_format(sweep);
    sweep->add_option("--sweep", o.sweep, "param=start:stop:points[:log]")->required();
    sweep->add_option("--threads", o.threads, "worker threads (0 = all cores)");

    auto* pg_sweep = app.add_subcommand("pg-sweep", "size over the guessing target");
    add_state(pg_sweep, true);
    add_format(pg_sweep);
    pg_sweep->add_option("--sweep", o.sweep, "pg=start:stop:points (default 0.55:0.95:41)");
    pg_sweep->add_option("--threads", o.threads, "worker threads (0 = all cores)");

    auto* calibrate = app.add_subcommand("calibrate", "Fock-equivalent gap for a detector spread");
    calibrate->add_option("--sigma", o.sigma, "detector spread")->required();
    add_pg(calibrate);
    add_format(calibrate);

    auto* phase = app.add_subcommand("phase-bound", "phase resolution keeping a fraction E of entanglement");
    add_state(phase, true);
    phase->add_option("--E", o.E, "entanglement fraction in (0, 1]")->required();
    phase->add_option("--out", o.out, "write output to a file instead of stdout");

    auto* dephase = app.add_subcommand("dephase", "negativity after Gaussian phase noise");
    add_state(dephase, true);
    dephase->add_option("--dphi", o.dphi, "phase-noise standard deviation (rad)")->required();
    dephase->add_option("--out", o.out, "write output to a file instead of stdout");

    auto* mc = app.add_subcommand("mc-check", "Monte Carlo check of the analytic guessing probability");
    mc->add_option("--seed", o.seed, "generator seed");
    mc->add_option("--samples", o.samples, "samples per case")->check(CLI::PositiveNumber);
    mc->add_option("--sigma-scale", o.sigma_scale, "multiply every grid spread");
    mc->add_option("--out", o.out, "write output to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "macrosize: " << msg << "\n";
        return 2;
    }

    try {
        std::string text;
        int code = 0;
        if (*size)
            text = cmd_size(o);
        else if (*sweep)
            text = cmd_sweep(o);
        else if (*pg_sweep)
            text = cmd_pg_sweep(o);
        else if (*calibrate)
            text = cmd_calibrate(o);
        else if (*phase)
            text = cmd_phase_bound(o);
        else if (*dephase)
            text = cmd_dephase(o);
        else if (*mc)
            code = cmd_mc_check(o, text);
        emit(o, text);
        if (code != 0)
            std::cerr << "macrosize: mc-check: some cases disagree beyond 3 standard errors\n";
        return code;
    } catch (const ms::numerical_error& e) {
        std::cerr << "macrosize: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "macrosize: " << e.what() << "\n";
        return 2;
    }
}
