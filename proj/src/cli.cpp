#include "oscimarket/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscimarket/errors.hpp"
#include "oscimarket/ingest.hpp"
#include "oscimarket/noscillator.hpp"
#include "oscimarket/noscillator_stoch.hpp"
#include "oscimarket/oscillator.hpp"
#include "oscimarket/reducecheck.hpp"
#include "oscimarket/stats.hpp"

namespace oscimarket::cli {

namespace {

using nlohmann::json;

struct GlobalOpts {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<long> paths;
    bool quiet = false;
    int threads = 1;
};

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(ctx + ": unknown key '" + key + "'");
        }
    }
}

const json& require_key(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
    return obj.at(key);
}

double num(const json& obj, const std::string& key, const std::string& ctx) {
    const json& v = require_key(obj, key, ctx);
    if (!v.is_number()) throw ConfigError(ctx + ": key '" + key + "' must be a number");
    return v.get<double>();
}

double num_or(const json& obj, const std::string& key, double fallback, const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return num(obj, key, ctx);
}

long integer(const json& obj, const std::string& key, const std::string& ctx) {
    const json& v = require_key(obj, key, ctx);
    if (!v.is_number_integer()) throw ConfigError(ctx + ": key '" + key + "' must be an integer");
    return v.get<long>();
}

long integer_or(const json& obj, const std::string& key, long fallback, const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return integer(obj, key, ctx);
}

std::string text_or(const json& obj, const std::string& key, const std::string& fallback,
                    const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(ctx + ": key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& ctx) {
    const json& v = require_key(obj, key, ctx);
    if (!v.is_array()) throw ConfigError(ctx + ": key '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(ctx + ": key '" + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::filesystem::path output_path(const GlobalOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return std::filesystem::path(opts.out_dir) / name;
}

void write_json(const GlobalOpts& opts, const std::string& name, const json& doc) {
    const auto path = output_path(opts, name);
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!opts.quiet) std::cout << "wrote " << path.string() << "\n";
}

class CsvWriter {
public:
    CsvWriter(const GlobalOpts& opts, const std::string& name) : path_(output_path(opts, name)) {
        out_.open(path_);
        if (!out_) throw ConfigError("cannot write '" + path_.string() + "'");
    }
    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out_ << ",";
            out_ << names[i];
        }
        out_ << "\n";
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << g17(values[i]);
        }
        out_ << "\n";
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

// --------------------------------------------------------------------------
// config -> domain objects

oscillator::PotentialSpec parse_potential(const json& obj) {
    const std::string ctx = "potential";
    const std::string kind = text_or(obj, "kind", "quadratic", ctx);
    if (kind == "quadratic") {
        check_keys(obj, {"kind", "k"}, ctx);
        return oscillator::PotentialSpec::quadratic(num_or(obj, "k", 1.0, ctx));
    }
    if (kind == "double_well") {
        check_keys(obj, {"kind", "v1", "v2", "depth"}, ctx);
        return oscillator::PotentialSpec::double_well(num(obj, "v1", ctx), num(obj, "v2", ctx),
                                                      num(obj, "depth", ctx));
    }
    if (kind == "walled") {
        check_keys(obj, {"kind", "k", "wall_position", "wall_height", "wall_width"}, ctx);
        return oscillator::PotentialSpec::walled(
            num_or(obj, "k", 1.0, ctx), num(obj, "wall_position", ctx),
            num(obj, "wall_height", ctx), num(obj, "wall_width", ctx));
    }
    throw ConfigError("potential: unknown kind '" + kind + "'");
}

oscillator::DampedOscillatorModel parse_model(const json& obj) {
    const std::string ctx = "model";
    check_keys(obj, {"potential", "damping", "sigma"}, ctx);
    oscillator::DampedOscillatorModel model;
    if (obj.contains("potential")) model.potential = parse_potential(obj.at("potential"));
    model.damping_c = num_or(obj, "damping", 0.0, ctx);
    model.sigma = num_or(obj, "sigma", 0.0, ctx);
    model.validate();
    return model;
}

noscillator::MarketSpec parse_market(const json& obj, const std::string& ctx) {
    auto a = number_list(obj, "a", ctx);
    auto b = number_list(obj, "b", ctx);
    if (a.size() != b.size()) throw ConfigError(ctx + ": a and b must have the same length");
    auto spec = noscillator::MarketSpec::from_coefficients(std::move(a), std::move(b));
    if (obj.contains("v")) {
        spec.v = number_list(obj, "v", ctx);
    }
    if (obj.contains("labels")) {
        const json& labels = obj.at("labels");
        if (!labels.is_array()) throw ConfigError(ctx + ": labels must be an array");
        spec.labels.clear();
        for (const auto& l : labels) spec.labels.push_back(l.get<std::string>());
    }
    spec.validate();
    return spec;
}

oscillator::RadialConvention parse_convention(const json& obj, const std::string& ctx) {
    const std::string name = text_or(obj, "convention", "cartesian_consistent", ctx);
    if (name == "cartesian_consistent") return oscillator::RadialConvention::cartesian_consistent;
    if (name == "paper_literal") return oscillator::RadialConvention::paper_literal;
    throw ConfigError(ctx + ": unknown convention '" + name + "'");
}

integrate::IntegratorConfig parse_integrator(const json& obj, const std::string& ctx) {
    integrate::IntegratorConfig cfg;
    cfg.dt = num(obj, "dt", ctx);
    cfg.steps = integer(obj, "steps", ctx);
    cfg.record_stride = integer_or(obj, "record_stride", 1, ctx);
    const std::string method = text_or(obj, "method", "default", ctx);
    if (method == "euler_maruyama") {
        cfg.method = integrate::Method::euler_maruyama;
    } else if (method == "stratonovich_heun") {
        cfg.method = integrate::Method::stratonovich_heun;
    } else if (method == "hamiltonian_splitting" || method == "default") {
        cfg.method = integrate::Method::hamiltonian_splitting;
    } else {
        throw ConfigError(ctx + ": unknown method '" + method + "'");
    }
    cfg.validate();
    return cfg;
}

json matrix_to_json(const linalg::Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// --------------------------------------------------------------------------
// subcommands

int cmd_simulate_asset(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "simulate-asset";
    check_keys(cfg,
               {"model", "x0", "y0", "dt", "steps", "record_stride", "method", "seed", "output"},
               ctx);
    const auto model = parse_model(require_key(cfg, "model", ctx));
    const auto icfg = parse_integrator(cfg, ctx);
    const double x0 = num(cfg, "x0", ctx);
    const double y0 = num(cfg, "y0", ctx);
    const std::uint64_t seed =
        opts.seed.value_or(std::uint64_t(integer_or(cfg, "seed", 0, ctx)));

    const NoiseStream noise(seed, 0, 2);
    const auto traj = oscillator::simulate_cartesian(model, x0, y0, icfg, noise);
    const auto energies = oscillator::energy_series(traj, model);

    CsvWriter csv(opts, text_or(cfg, "output", "asset.csv", ctx));
    csv.header({"t", "x", "y", "potential_energy", "kinetic_energy", "total_energy"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        csv.row({traj.times[i], traj.states[i][0], traj.states[i][1], energies[i].potential,
                 energies[i].kinetic, energies[i].total});
    }
    if (!opts.quiet) std::cout << "wrote " << csv.path().string() << "\n";
    return 0;
}

int cmd_modes(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "modes";
    check_keys(cfg, {"a", "b", "v", "labels", "output"}, ctx);
    const auto spec = parse_market(cfg, ctx);
    const auto decomp = noscillator::normal_modes(spec);
    auto gammas = spec.gammas();
    std::sort(gammas.begin(), gammas.end());
    const auto check = noscillator::verify_interlacing(gammas, decomp.lambdas);

    json doc;
    doc["labels"] = spec.labels;
    doc["gammas_sorted"] = gammas;
    doc["lambdas"] = decomp.lambdas;
    doc["C"] = matrix_to_json(decomp.C);
    doc["pseudo_inverse"] = matrix_to_json(decomp.pseudo_inverse);
    doc["interlacing"] = {{"ok", check.ok}, {"max_violation", check.max_violation}};
    write_json(opts, text_or(cfg, "output", "modes.json", ctx), doc);
    return 0;
}

int cmd_inverse_modes(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "inverse-modes";
    check_keys(cfg, {"gammas", "lambdas", "output"}, ctx);
    const auto gammas = number_list(cfg, "gammas", ctx);
    const auto lambdas = number_list(cfg, "lambdas", ctx);
    const auto coeff = noscillator::inverse_from_frequencies(gammas, lambdas);

    const auto decomp =
        noscillator::normal_modes(noscillator::MarketSpec::from_coefficients(coeff.a, coeff.b));
    double max_rel = 0.0;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        max_rel = std::max(max_rel, std::abs(decomp.lambdas[j] - lambdas[j]) / lambdas[j]);
    }

    json doc;
    doc["a"] = coeff.a;
    doc["b"] = coeff.b;
    doc["roundtrip_lambdas"] = decomp.lambdas;
    doc["roundtrip_max_relative_error"] = max_rel;
    write_json(opts, text_or(cfg, "output", "inverse_modes.json", ctx), doc);
    return 0;
}

int cmd_simulate_market(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "simulate-market";
    const std::string kind = text_or(cfg, "kind", "deterministic", ctx);

    if (kind == "deterministic") {
        check_keys(cfg, {"kind", "a", "b", "v", "labels", "x0", "xdot0", "dt", "steps",
                         "record_stride", "method", "output"},
                   ctx);
        const auto spec = parse_market(cfg, ctx);
        const auto icfg = parse_integrator(cfg, ctx);
        noscillator::ConstrainedState initial{number_list(cfg, "x0", ctx),
                                              number_list(cfg, "xdot0", ctx)};
        initial.validate();
        const auto traj = noscillator::simulate(spec, initial, icfg);

        std::vector<std::string> names{"t"};
        for (const auto& l : spec.labels) names.push_back("x_" + l);
        for (const auto& l : spec.labels) names.push_back("E_" + l);
        names.push_back("total_E");
        CsvWriter csv(opts, text_or(cfg, "output", "market.csv", ctx));
        csv.header(names);
        for (std::size_t f = 0; f < traj.size(); ++f) {
            const auto& state = traj.states[f];
            noscillator::ConstrainedState s{
                sds::Vec(state.begin(), state.begin() + spec.n),
                sds::Vec(state.begin() + spec.n, state.end())};
            const auto energies = noscillator::component_energies(spec, s);
            std::vector<double> row{traj.times[f]};
            row.insert(row.end(), s.x.begin(), s.x.end());
            row.insert(row.end(), energies.per_component.begin(), energies.per_component.end());
            row.push_back(energies.total);
            csv.row(row);
        }
        if (!opts.quiet) std::cout << "wrote " << csv.path().string() << "\n";
        return 0;
    }

    if (kind != "stochastic") throw ConfigError(ctx + ": kind must be deterministic|stochastic");
    check_keys(cfg, {"kind", "a", "b", "v", "labels", "convention", "radial_c", "radial_sigma",
                     "r0", "phase_sigma", "theta", "dt", "steps", "record_stride", "method",
                     "seed", "path_index", "output"},
               ctx);
    const auto spec = parse_market(cfg, ctx);
    const auto icfg = parse_integrator(cfg, ctx);
    const auto convention = parse_convention(cfg, ctx);
    const std::uint64_t seed = opts.seed.value_or(std::uint64_t(integer_or(cfg, "seed", 0, ctx)));

    const auto decomp = noscillator::normal_modes(spec);
    const int m = int(decomp.lambdas.size());

    noscillator_stoch::ModeParams base;
    base.c = num_or(cfg, "radial_c", 1.0, ctx);
    base.sigma = num_or(cfg, "radial_sigma", 1.0, ctx);
    base.phase_sigma = num_or(cfg, "phase_sigma", 1.0, ctx);
    base.r0 = 1.0;
    auto model =
        noscillator_stoch::StochasticMarketModel::uniform(decomp, base, convention, seed);
    if (cfg.contains("r0")) {
        if (cfg.at("r0").is_array()) {
            const auto r0 = number_list(cfg, "r0", ctx);
            if (int(r0.size()) != m) throw ConfigError(ctx + ": r0 needs n-1 entries");
            for (int j = 0; j < m; ++j) model.modes[j].r0 = r0[j];
        } else {
            for (auto& mode : model.modes) mode.r0 = num(cfg, "r0", ctx);
        }
    }
    if (cfg.contains("theta")) {
        model.theta = number_list(cfg, "theta", ctx);
    }
    model.validate();

    const auto traj = noscillator_stoch::simulate_market(
        model, icfg, seed, std::uint64_t(integer_or(cfg, "path_index", 0, ctx)));

    std::vector<std::string> names{"t"};
    for (const auto& l : spec.labels) names.push_back("x_" + l);
    for (const auto& l : spec.labels) names.push_back("E_" + l);
    names.push_back("total_E");
    for (int j = 1; j <= m; ++j) names.push_back("r_" + std::to_string(j));
    for (int j = 1; j <= m; ++j) names.push_back("S_" + std::to_string(j));

    CsvWriter csv(opts, text_or(cfg, "output", "market.csv", ctx));
    csv.header(names);
    for (std::size_t f = 0; f < traj.times.size(); ++f) {
        const double t = traj.times[f];
        // carrier velocity: xdot_i = sum_j C_ij r_j lambda_j cos(phase_j)
        sds::Vec xdot(spec.n, 0.0);
        for (int j = 0; j < m; ++j) {
            const double phase = decomp.lambdas[j] * t + model.theta[j] + traj.s[f][j];
            const double zdot = traj.r[f][j] * decomp.lambdas[j] * std::cos(phase);
            for (int i = 0; i < spec.n; ++i) xdot[i] += decomp.C(i, j) * zdot;
        }
        const noscillator::ConstrainedState s{traj.x[f], xdot};
        const auto energies = noscillator::component_energies(spec, s);
        std::vector<double> row{t};
        row.insert(row.end(), traj.x[f].begin(), traj.x[f].end());
        row.insert(row.end(), energies.per_component.begin(), energies.per_component.end());
        row.push_back(energies.total);
        row.insert(row.end(), traj.r[f].begin(), traj.r[f].end());
        row.insert(row.end(), traj.s[f].begin(), traj.s[f].end());
        csv.row(row);
    }
    if (!opts.quiet) std::cout << "wrote " << csv.path().string() << "\n";
    return 0;
}

int cmd_sectors(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "sectors";
    check_keys(cfg, {"a", "b", "v", "labels", "gamma_tolerance", "state", "output"}, ctx);
    const auto spec = parse_market(cfg, ctx);
    const double tol = num_or(cfg, "gamma_tolerance", 1e-9, ctx);
    const auto grouping = noscillator::detect_sectors(spec, tol);

    json doc;
    doc["gammas"] = spec.gammas();
    json groups = json::array();
    for (std::size_t g = 0; g < grouping.groups.size(); ++g) {
        json entry;
        entry["members"] = grouping.groups[g];
        entry["gamma"] = grouping.group_gamma[g];
        entry["a_hat"] = grouping.a_hat[g];
        entry["b_hat"] = grouping.b_hat[g];
        if (grouping.groups[g].size() > 1) {
            const auto reduction = noscillator::reduce_sector(spec, grouping.groups[g]);
            entry["reduced_a"] = reduction.reduced.a;
            entry["reduced_b"] = reduction.reduced.b;
            entry["index_map"] = reduction.index_map;
            entry["merged_index"] = reduction.merged_index;
        }
        groups.push_back(std::move(entry));
    }
    doc["groups"] = std::move(groups);

    if (cfg.contains("state")) {
        const json& st = cfg.at("state");
        check_keys(st, {"x", "xdot"}, ctx + ".state");
        noscillator::ConstrainedState state{number_list(st, "x", ctx), number_list(st, "xdot", ctx)};
        state.validate();
        json splits = json::array();
        for (const auto& group : grouping.groups) {
            const auto split = noscillator::sector_energy_split(spec, group, state);
            splits.push_back({{"members", group},
                              {"external", split.external},
                              {"internal", split.internal},
                              {"sector_total", split.sector_total}});
        }
        doc["energy_splits"] = std::move(splits);
    }
    write_json(opts, text_or(cfg, "output", "sectors.json", ctx), doc);
    return 0;
}

int cmd_check_reduce(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "check-reduce";
    check_keys(cfg, {"system", "mode", "params", "projection", "coordinate", "base_points",
                     "fiber_samples", "fiber_range", "pass_threshold", "fail_threshold", "output"},
               ctx);
    const std::string system = require_key(cfg, "system", ctx).get<std::string>();
    const std::string mode = text_or(cfg, "mode", "sds", ctx);

    json params = cfg.contains("params") ? cfg.at("params") : json::object();
    check_keys(params, {"c", "sigma", "k", "drift"}, ctx + ".params");
    const double c = num_or(params, "c", 1.0, ctx);
    const double sigma = num_or(params, "sigma", 1.0, ctx);
    const double k = num_or(params, "k", 1.0, ctx);

    sds::VectorFieldSet fields;
    fields.dimension = 2;
    if (system == "brownian2d") {
        fields = sds::additive_noise_fields(
            2, [](std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; },
            {{sigma, 0.0}, {0.0, sigma}});
    } else if (system == "damped_oscillator") {
        fields = sds::additive_noise_fields(
            2,
            [c, k](std::span<const double> p, std::span<double> out) {
                out[0] = p[1] - c * p[0];
                out[1] = -k * p[0] - c * p[1];
            },
            {{sigma, 0.0}, {0.0, sigma}});
    } else if (system == "rotation") {
        fields.drift = [](std::span<const double> p, std::span<double> out) {
            out[0] = p[1];
            out[1] = -p[0];
        };
        fields.additive = true;
    } else if (system == "constant_drift") {
        std::vector<double> drift{1.0, 0.0};
        if (params.contains("drift")) drift = number_list(params, "drift", ctx + ".params");
        fields.drift = [drift](std::span<const double>, std::span<double> out) {
            out[0] = drift[0];
            out[1] = drift[1];
        };
        fields.additive = true;
    } else {
        throw ConfigError(ctx + ": unknown system '" + system + "'");
    }

    reducecheck::ProjectionSetup setup;
    const std::string projection = text_or(cfg, "projection", "coordinate", ctx);
    json fiber_range = cfg.contains("fiber_range") ? cfg.at("fiber_range") : json::object();
    check_keys(fiber_range, {"lo", "hi"}, ctx + ".fiber_range");
    if (projection == "coordinate") {
        const int coord = int(integer_or(cfg, "coordinate", 0, ctx));
        setup.phi = reducecheck::coordinate_projection(2, coord);
        setup.fiber_sampler = reducecheck::coordinate_fiber_sampler(
            2, coord, num_or(fiber_range, "lo", -2.0, ctx), num_or(fiber_range, "hi", 2.0, ctx));
    } else if (projection == "radius") {
        setup.phi = reducecheck::radius_map_2d();
        setup.fiber_sampler = reducecheck::radius_fiber_sampler();
    } else {
        throw ConfigError(ctx + ": unknown projection '" + projection + "'");
    }
    setup.test_functions = reducecheck::default_test_functions(1);

    json bp = cfg.contains("base_points") ? cfg.at("base_points") : json::object();
    check_keys(bp, {"lo", "hi", "count"}, ctx + ".base_points");
    const double default_lo = projection == "radius" ? 0.5 : -2.0;
    const double default_hi = projection == "radius" ? 2.5 : 2.0;
    setup.base_points =
        reducecheck::linspace_points(num_or(bp, "lo", default_lo, ctx),
                                     num_or(bp, "hi", default_hi, ctx),
                                     int(integer_or(bp, "count", 16, ctx)));

    const int fiber_samples = int(integer_or(cfg, "fiber_samples", 8, ctx));
    const double pass = num_or(cfg, "pass_threshold", 1e-6, ctx);
    const double fail = num_or(cfg, "fail_threshold", 1e-3, ctx);

    reducecheck::ProjectabilityReport report;
    if (mode == "sds") {
        report = reducecheck::check_projectable_sds(fields, setup, fiber_samples, pass, fail);
    } else if (mode == "deterministic") {
        report = reducecheck::check_projectable_deterministic(fields.drift, 2, setup,
                                                              fiber_samples, pass, fail);
    } else {
        throw ConfigError(ctx + ": mode must be sds|deterministic");
    }

    json doc;
    doc["system"] = system;
    doc["mode"] = mode;
    doc["projection"] = projection;
    doc["verdict"] = reducecheck::verdict_name(report.verdict);
    doc["max_fiber_variation"] = report.max_fiber_variation;
    doc["worst"] = {{"test_function", report.worst.test_function},
                    {"base_point", report.worst.base_point},
                    {"fiber_low", report.worst.fiber_low},
                    {"fiber_high", report.worst.fiber_high}};
    doc["note"] = report.note;
    write_json(opts, text_or(cfg, "output", "check_reduce.json", ctx), doc);
    return 0;
}

int cmd_density(const std::string& config_path, const GlobalOpts& opts) {
    const json cfg = load_json_file(config_path);
    const std::string ctx = "density";
    check_keys(cfg, {"model", "convention", "grid", "ensemble", "seed", "output"}, ctx);
    const auto model = parse_model(require_key(cfg, "model", ctx));
    const auto convention = parse_convention(cfg, ctx);

    json grid = cfg.contains("grid") ? cfg.at("grid") : json::object();
    check_keys(grid, {"r_max", "bins"}, ctx + ".grid");
    const double r_max = num_or(grid, "r_max", 4.0, ctx);
    const int bins = int(integer_or(grid, "bins", 80, ctx));

    json ens = require_key(cfg, "ensemble", ctx);
    check_keys(ens, {"route", "paths", "steps", "burn_in", "stride", "dt", "x0", "y0", "r0"},
               ctx + ".ensemble");
    oscillator::EnsembleOptions eopts;
    eopts.paths = opts.paths.value_or(integer_or(ens, "paths", 256, ctx));
    eopts.steps = integer_or(ens, "steps", 100000, ctx);
    eopts.burn_in = integer_or(ens, "burn_in", 2000, ctx);
    eopts.stride = integer_or(ens, "stride", 40, ctx);
    eopts.dt = num_or(ens, "dt", 1e-3, ctx);
    eopts.x0 = num_or(ens, "x0", 0.7, ctx);
    eopts.y0 = num_or(ens, "y0", 0.0, ctx);
    eopts.r0 = num_or(ens, "r0", 0.7, ctx);
    eopts.seed = opts.seed.value_or(std::uint64_t(integer_or(cfg, "seed", 0, ctx)));
    eopts.threads = opts.threads;
    const std::string route = text_or(ens, "route", "cartesian", ctx);

    std::vector<double> samples;
    if (route == "cartesian") {
        samples = oscillator::sample_stationary_radius_cartesian(model, eopts);
    } else if (route == "polar") {
        samples = oscillator::sample_stationary_radius_polar(model, convention, eopts);
    } else {
        throw ConfigError(ctx + ": ensemble.route must be cartesian|polar");
    }

    const auto density = oscillator::stationary_radial_density(model, convention);
    std::vector<long> counts(bins, 0);
    long inside = 0;
    for (double r : samples) {
        const int bin = int(r / r_max * bins);
        if (bin >= 0 && bin < bins) {
            ++counts[bin];
            ++inside;
        }
    }
    const double bin_width = r_max / bins;

    CsvWriter csv(opts, text_or(cfg, "output", "density.csv", ctx));
    csv.header({"r_mid", "analytic_pdf", "empirical_pdf", "count"});
    for (int i = 0; i < bins; ++i) {
        const double mid = (i + 0.5) * bin_width;
        const double emp = inside > 0 ? double(counts[i]) / (double(inside) * bin_width) : 0.0;
        csv.row({mid, density.pdf(mid), emp, double(counts[i])});
    }
    if (!opts.quiet) std::cout << "wrote " << csv.path().string() << "\n";
    return 0;
}

int cmd_spectrum(const std::string& csv_path, const std::string& column, int peaks,
                 double min_separation, const GlobalOpts& opts) {
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open '" + csv_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + csv_path + "': empty file");

    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) names.push_back(field);
    }
    int col = -1;
    for (std::size_t i = 1; i < names.size(); ++i) {
        if (names[i] == column) col = int(i);
    }
    if (col < 0) {
        if (column.empty() && names.size() >= 2) {
            col = 1;
        } else {
            throw ConfigError("spectrum: column '" + column + "' not found in " + csv_path);
        }
    }

    std::vector<double> t, x;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (int(fields.size()) <= col) {
            throw ParseError("row " + std::to_string(row) + ": too few fields");
        }
        t.push_back(std::stod(fields[0]));
        x.push_back(std::stod(fields[col]));
    }
    if (t.size() < 16) throw SeriesTooShort("spectrum: need at least 16 rows");

    double dt_sum = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) dt_sum += t[i] - t[i - 1];
    const double dt = dt_sum / double(t.size() - 1);

    const auto p = stats::periodogram(x, dt);
    CsvWriter csv(opts, "spectrum.csv");
    csv.header({"omega", "power"});
    for (std::size_t i = 0; i < p.frequencies.size(); ++i) csv.row({p.frequencies[i], p.power[i]});
    if (!opts.quiet) std::cout << "wrote " << csv.path().string() << "\n";

    if (peaks > 0) {
        const double sep = min_separation > 0.0 ? min_separation : 4.0 * p.bin_width;
        const auto freqs = stats::find_peaks(p, peaks, sep);
        CsvWriter pk(opts, "peaks.csv");
        pk.header({"omega"});
        for (double f : freqs) pk.row({f});
        if (!opts.quiet) std::cout << "wrote " << pk.path().string() << "\n";
    }
    return 0;
}

int cmd_fit(const std::string& csv_path, const std::string& mode_name,
            std::optional<double> constant_fair_value, int window, const GlobalOpts& opts) {
    const auto series = ingest::load_csv(csv_path);
    const auto mode = mode_name == "difference" ? ingest::MispricingMode::difference
                                                : ingest::MispricingMode::log_ratio;

    std::vector<double> x;
    std::string fair_source;
    if (series.has_fair_value()) {
        x = ingest::mispricing(series, mode);
        fair_source = "column";
    } else if (constant_fair_value) {
        x = ingest::mispricing(series, mode, constant_fair_value);
        fair_source = "constant";
    } else {
        ingest::PriceSeries with_fv = series;
        with_fv.fair_value = ingest::rolling_fair_value(series, window);
        x = ingest::mispricing(with_fv, mode);
        fair_source = "rolling_mean";
    }

    const auto resampled = ingest::resample_uniform(series.t_days, x);
    const auto fit = ingest::fit_ar2(resampled.x, resampled.dt);

    json doc;
    doc["rows"] = series.size();
    doc["fair_value_source"] = fair_source;
    doc["mispricing_mode"] = mode_name.empty() ? "log_ratio" : mode_name;
    doc["resampled_points"] = resampled.x.size();
    doc["dt_days"] = resampled.dt;
    doc["phi1"] = fit.phi1;
    doc["phi2"] = fit.phi2;
    doc["residual_variance"] = fit.residual_variance;
    doc["oscillatory"] = fit.oscillatory;
    if (fit.oscillatory) {
        doc["period_days"] = fit.period_estimate;
        doc["damping_per_day"] = fit.damping_estimate;
    }
    write_json(opts, "fit.json", doc);
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"oscimarket: second-order stochastic market models"};
    app.require_subcommand(1);

    GlobalOpts opts;
    std::uint64_t seed_value = 0;
    long paths_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
    auto* paths_opt = app.add_option("--paths", paths_value, "override the ensemble path count");
    app.add_option("--out", opts.out_dir, "output directory (default .)");
    app.add_flag("--quiet", opts.quiet, "suppress progress messages");

    std::string config_path, csv_path, column, fit_mode = "log_ratio";
    int peaks = 0, fit_window = 521;
    double min_separation = 0.0;
    double constant_fv = 0.0;

    auto* sim_asset = app.add_subcommand("simulate-asset", "single-asset oscillator trajectory");
    sim_asset->add_option("config", config_path)->required();
    auto* modes = app.add_subcommand("modes", "normal-mode decomposition");
    modes->add_option("config", config_path)->required();
    auto* inverse = app.add_subcommand("inverse-modes", "coefficients from frequencies");
    inverse->add_option("config", config_path)->required();
    auto* sim_market = app.add_subcommand("simulate-market", "constrained n-oscillator paths");
    sim_market->add_option("config", config_path)->required();
    auto* sectors = app.add_subcommand("sectors", "sector detection and reduction");
    sectors->add_option("config", config_path)->required();
    auto* check_reduce = app.add_subcommand("check-reduce", "projectability check");
    check_reduce->add_option("config", config_path)->required();
    auto* density = app.add_subcommand("density", "stationary density vs histogram");
    density->add_option("config", config_path)->required();
    auto* spectrum = app.add_subcommand("spectrum", "periodogram of a CSV column");
    spectrum->add_option("csv", csv_path)->required();
    spectrum->add_option("--column", column, "data column name (default: second column)");
    spectrum->add_option("--peaks", peaks, "extract this many spectral peaks");
    spectrum->add_option("--min-separation", min_separation, "peak separation (rad/time)");
    auto* fit = app.add_subcommand("fit", "oscillator fit of a price CSV");
    fit->add_option("csv", csv_path)->required();
    fit->add_option("--mode", fit_mode, "log_ratio|difference")
        ->check(CLI::IsMember({"log_ratio", "difference"}));
    auto* fv_opt = fit->add_option("--constant-fair-value", constant_fv, "fixed fair value");
    fit->add_option("--fair-value-window", fit_window, "rolling fair-value window");

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*seed_opt) opts.seed = seed_value;
    if (*paths_opt) opts.paths = paths_value;
    opts.threads = integrate::resolve_thread_count(int(std::thread::hardware_concurrency()));

    try {
        if (sim_asset->parsed()) return cmd_simulate_asset(config_path, opts);
        if (modes->parsed()) return cmd_modes(config_path, opts);
        if (inverse->parsed()) return cmd_inverse_modes(config_path, opts);
        if (sim_market->parsed()) return cmd_simulate_market(config_path, opts);
        if (sectors->parsed()) return cmd_sectors(config_path, opts);
        if (check_reduce->parsed()) return cmd_check_reduce(config_path, opts);
        if (density->parsed()) return cmd_density(config_path, opts);
        if (spectrum->parsed()) {
            return cmd_spectrum(csv_path, column, peaks, min_separation, opts);
        }
        if (fit->parsed()) {
            std::optional<double> fv;
            if (*fv_opt) fv = constant_fv;
            return cmd_fit(csv_path, fit_mode, fv, fit_window, opts);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace oscimarket::cli
