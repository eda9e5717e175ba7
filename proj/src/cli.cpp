#include "qwalk/cli.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace qwalk::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAbsent = 3;

std::vector<double> time_grid(double t_max, double dt) {
    if (!(t_max >= 0.0)) throw DomainError("time grid: --t-max is required and must be >= 0");
    if (t_max == 0.0) return {0.0};
    if (!(dt > 0.0)) throw DomainError("time grid: --dt is required and must be > 0");
    std::vector<double> grid;
    const auto steps = static_cast<Index>(std::floor(t_max / dt + 1e-9));
    grid.reserve(steps + 2);
    for (Index k = 0; k <= steps; ++k) grid.push_back(k * dt);
    if (grid.back() < t_max - 1e-12 * t_max) grid.push_back(t_max);
    return grid;
}

void write_outputs(const RunConfig& config, const std::string& csv, const json& meta) {
    if (config.output.empty()) {
        std::cout << csv;
        return;
    }
    std::ofstream csv_file(config.output + ".csv", std::ios::binary);
    if (!csv_file) throw DomainError("cannot open output file " + config.output + ".csv");
    csv_file << csv;
    std::ofstream json_file(config.output + ".json", std::ios::binary);
    if (!json_file) throw DomainError("cannot open output file " + config.output + ".json");
    json_file << meta.dump(2) << "\n";
}

HyperCycleConfig hyper_config(const RunConfig& config) {
    HyperCycleConfig hyper{{config.size, config.gamma}, config.dims};
    hyper.validate();
    return hyper;
}

Regime parse_regime(const std::string& name) {
    if (name == "weak") return Regime::weak;
    if (name == "strong") return Regime::strong;
    throw DomainError("--regime must be 'weak' or 'strong', got '" + name + "'");
}

json base_metadata(const RunConfig& config) {
    json meta;
    meta["command"] = config.command;
    meta["library_version"] = std::string(kLibraryVersion);
    meta["size"] = config.size;
    meta["dims"] = config.dims;
    meta["gamma"] = config.gamma;
    return meta;
}

}  // namespace

std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.16e", x + 0.0);
    return buffer;
}

std::string vertex_label(Index flat, const HyperCycleConfig& config) {
    const MultiIndex digits = decode_multi_index(flat, config);
    std::string label;
    for (size_t j = 0; j < digits.size(); ++j) {
        if (config.base.size <= 10) {
            label += static_cast<char>('0' + digits[j]);
        } else {
            if (j > 0) label += '-';
            label += std::to_string(digits[j]);
        }
    }
    return label;
}

MultiIndex parse_start(const std::string& start, const HyperCycleConfig& config) {
    if (start.empty()) return MultiIndex(config.dims, 0);
    MultiIndex digits;
    if (config.base.size <= 10 && start.find('-') == std::string::npos) {
        for (char c : start) {
            if (c < '0' || c > '9')
                throw DomainError("--start: invalid digit character '" + std::string(1, c) +
                                  "'");
            digits.push_back(c - '0');
        }
    } else {
        size_t pos = 0;
        while (pos < start.size()) {
            const size_t dash = start.find('-', pos);
            const std::string token = start.substr(pos, dash - pos);
            try {
                digits.push_back(std::stoi(token));
            } catch (const std::exception&) {
                throw DomainError("--start: invalid digit token '" + token + "'");
            }
            pos = dash == std::string::npos ? start.size() : dash + 1;
        }
    }
    encode_multi_index(digits, config);  // range/length validation
    return digits;
}

int run_simulate(const RunConfig& config) {
    const HyperCycleConfig hyper = hyper_config(config);
    const MultiIndex start = parse_start(config.start, hyper);
    const std::vector<double> grid = time_grid(config.t_max, config.dt);

    const Index vertices = hyper.vertex_count();
    CMatrix rho0 = CMatrix::Zero(vertices, vertices);
    const Index start_flat = encode_multi_index(start, hyper);
    rho0(start_flat, start_flat) = 1.0;

    std::string method = "pade-scaling-squaring";
    std::vector<CMatrix> states;
    if (config.dims == 1) {
        EvolveBackend backend = EvolveBackend::auto_select;
        if (config.backend == "exact") backend = EvolveBackend::exact_exponential;
        else if (config.backend == "ode") backend = EvolveBackend::ode_integrator;
        else if (config.backend != "auto")
            throw DomainError("--backend must be exact, ode or auto");
        const CycleSuperOperator superop = build_cycle_superoperator(hyper.base);
        states = evolve_numeric(superop, rho0, grid, backend);
        if (backend == EvolveBackend::ode_integrator ||
            (backend == EvolveBackend::auto_select && vertices * vertices > 10000))
            method = "dormand-prince-5(4)";
    } else {
        HyperPath path = HyperPath::auto_select;
        if (config.path == "factored") path = HyperPath::factored;
        else if (config.path == "full") path = HyperPath::full;
        else if (config.path != "auto")
            throw DomainError("--path must be factored, full or auto");
        states = evolve_hyper(hyper, rho0, grid, path);
    }

    std::vector<std::string> labels(vertices);
    for (Index v = 0; v < vertices; ++v) labels[v] = vertex_label(v, hyper);

    int clamped = 0;
    std::string csv = "t,vertex,probability\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        RVector probs = states[i].diagonal().real();
        clamped += clamp_probabilities(probs);
        for (Index v = 0; v < vertices; ++v)
            csv += format_double(grid[i]) + "," + labels[v] + "," + format_double(probs(v)) +
                   "\n";
    }

    json meta = base_metadata(config);
    meta["start"] = vertex_label(start_flat, hyper);
    meta["t_max"] = config.t_max;
    meta["dt"] = config.dt;
    meta["backend"] = config.dims == 1 ? config.backend : std::string("n/a");
    meta["path"] = config.dims == 1 ? std::string("n/a") : config.path;
    meta["method"] = method;
    meta["ode_rtol"] = OdeOptions{}.rtol;
    meta["ode_atol"] = OdeOptions{}.atol;
    meta["clamped_entries"] = clamped;
    meta["row_count"] = grid.size() * static_cast<size_t>(vertices);
    write_outputs(config, csv, meta);
    return kExitOk;
}

int run_mixing(const RunConfig& config) {
    const HyperCycleConfig hyper = hyper_config(config);
    const MultiIndex start = parse_start(config.start, hyper);

    std::optional<BoundValue> bound;
    if (!config.regime.empty())
        bound = mixing_bound(parse_regime(config.regime), hyper, config.epsilon).applicable;

    MixingQuery query;
    query.epsilon = config.epsilon;
    query.t_max = config.t_max >= 0.0 ? config.t_max
                                      : (bound ? 5.0 * bound->value : -1.0);
    query.dt = config.dt > 0.0 ? config.dt : (bound ? bound->value / 2000.0 : -1.0);
    if (!(query.t_max > 0.0) || !(query.dt > 0.0))
        throw DomainError("mixing: provide --regime or explicit --t-max and --dt");
    query.refine_tol = query.dt / 100.0;

    std::string method;
    const DistributionSource source = exact_distribution_source(hyper, start, &method);
    const MixingResult result = measure_mixing_time(source, query, MixingMode::stable);

    std::string csv = "t,tv\n";
    for (const auto& [t, tv] : result.tv_series)
        csv += format_double(t) + "," + format_double(tv) + "\n";

    json meta = base_metadata(config);
    meta["epsilon"] = config.epsilon;
    meta["start"] = vertex_label(encode_multi_index(start, hyper), hyper);
    meta["horizon"] = result.horizon;
    meta["dt"] = query.dt;
    meta["refine_tol"] = query.refine_tol;
    meta["method"] = method;
    meta["first_hit"] = result.first_hit ? json(*result.first_hit) : json(nullptr);
    meta["stable"] = result.stable ? json(*result.stable) : json(nullptr);
    meta["bound"] = bound ? json(bound->value) : json(nullptr);
    meta["bound_formula"] = bound ? json(bound->formula) : json(nullptr);
    meta["regime"] = config.regime.empty() ? "none" : config.regime;
    meta["diagnostic"] = result.diagnostic;
    write_outputs(config, csv, meta);
    return result.stable ? kExitOk : kExitAbsent;
}

int run_bounds(const RunConfig& config) {
    const std::vector<int> sizes = config.sizes.empty() ? std::vector<int>{config.size}
                                                        : config.sizes;
    const std::vector<int> dims = config.dims_list.empty() ? std::vector<int>{config.dims}
                                                           : config.dims_list;
    const std::vector<double> gammas =
        config.gammas.empty() ? std::vector<double>{config.gamma} : config.gammas;
    const std::vector<double> epsilons =
        config.epsilons.empty() ? std::vector<double>{config.epsilon} : config.epsilons;
    std::vector<Regime> regimes;
    if (config.regime.empty())
        regimes = {Regime::weak, Regime::strong};
    else
        regimes = {parse_regime(config.regime)};

    std::string csv = "regime,N,n,gamma,epsilon,bound,formula\n";
    json rows = json::array();
    const auto emit = [&](Regime regime, int n, int d, double g, double eps,
                          const std::optional<BoundValue>& value,
                          const std::string& formula_hint) {
        const std::string name(regime_name(regime));
        csv += name + "," + std::to_string(n) + "," + std::to_string(d) + "," +
               format_double(g) + "," + format_double(eps) + "," +
               (value ? format_double(value->value) : std::string("invalid")) + "," +
               (value ? value->formula : formula_hint) + "\n";
        json row;
        row["regime"] = name;
        row["N"] = n;
        row["n"] = d;
        row["gamma"] = g;
        row["epsilon"] = eps;
        row["bound"] = value ? json(value->value) : json(nullptr);
        row["formula"] = value ? value->formula : formula_hint;
        row["valid"] = value.has_value();
        rows.push_back(row);
    };

    for (Regime regime : regimes)
        for (int n : sizes)
            for (int d : dims)
                for (double g : gammas)
                    for (double eps : epsilons) {
                        const std::string hint =
                            d == 1 ? (regime == Regime::weak ? "weak-n1" : "strong-n1")
                                   : (regime == Regime::weak ? "weak-ndim" : "strong-ndim");
                        try {
                            const MixingBoundResult result =
                                mixing_bound(regime, HyperCycleConfig{{n, g}, d}, eps);
                            emit(regime, n, d, g, eps, result.applicable, hint);
                            if (result.n1_general)
                                emit(regime, n, d, g, eps, result.n1_general, hint);
                        } catch (const DomainError&) {
                            emit(regime, n, d, g, eps, std::nullopt, hint);
                        }
                    }

    json meta = base_metadata(config);
    meta["rows"] = rows;
    write_outputs(config, csv, meta);
    return kExitOk;
}

int run_compare(const RunConfig& config) {
    if (config.regime.empty()) throw DomainError("compare: --regime is required");
    const Regime regime = parse_regime(config.regime);
    const HyperCycleConfig hyper = hyper_config(config);
    const AnalyticKernel kernel(regime, hyper.base);
    const std::vector<double> grid = time_grid(config.t_max, config.dt);
    const MultiIndex start = parse_start(config.start, hyper);

    std::string csv = "t,max_abs,tv\n";
    double summary_max_abs = 0.0;
    double summary_tv = 0.0;

    if (config.dims == 1) {
        const CycleSuperOperator superop = build_cycle_superoperator(hyper.base);
        const Index n = config.size;
        CMatrix rho0 = CMatrix::Zero(n, n);
        rho0(start[0], start[0]) = 1.0;
        const CVector v0 = vectorize_density(rho0);
        for (double t : grid) {
            const CMatrix numeric =
                unvectorize_density(propagator_exact(superop, t).matrix * v0, n);
            // kernel matrix is defined for the origin start; translate it
            CMatrix analytic(n, n);
            const CMatrix origin = kernel.matrix(t);
            for (Index a = 0; a < n; ++a)
                for (Index b = 0; b < n; ++b)
                    analytic(a, b) = origin(((a - start[0]) % n + n) % n,
                                            ((b - start[0]) % n + n) % n);
            const double max_abs = (analytic - numeric).cwiseAbs().maxCoeff();
            const double tv =
                (analytic.diagonal().real() - numeric.diagonal().real()).cwiseAbs().sum();
            summary_max_abs = std::max(summary_max_abs, max_abs);
            summary_tv = std::max(summary_tv, tv);
            csv += format_double(t) + "," + format_double(max_abs) + "," + format_double(tv) +
                   "\n";
        }
    } else {
        const DistributionSource numeric_source = exact_distribution_source(hyper, start);
        for (double t : grid) {
            const RVector analytic = hyper_probability_product(kernel, hyper, start, t);
            const RVector numeric = numeric_source(t);
            const double max_abs = (analytic - numeric).cwiseAbs().maxCoeff();
            const double tv = (analytic - numeric).cwiseAbs().sum();
            summary_max_abs = std::max(summary_max_abs, max_abs);
            summary_tv = std::max(summary_tv, tv);
            csv += format_double(t) + "," + format_double(max_abs) + "," + format_double(tv) +
                   "\n";
        }
    }
    csv += "summary," + format_double(summary_max_abs) + "," + format_double(summary_tv) +
           "\n";

    json meta = base_metadata(config);
    meta["regime"] = config.regime;
    meta["t_max"] = config.t_max;
    meta["dt"] = config.dt;
    meta["summary_max_abs"] = summary_max_abs;
    meta["summary_tv"] = summary_tv;
    write_outputs(config, csv, meta);
    return kExitOk;
}

int run_sweep(const RunConfig& config) {
    if (config.gammas.empty())
        throw DomainError("sweep: provide a non-empty --gamma list");
    HyperCycleConfig shape{{config.size, 0.0}, config.dims};
    shape.validate();
    const MultiIndex start = parse_start(config.start, shape);

    std::string csv = "gamma,first_hit,stable,weak_bound,strong_bound\n";
    json rows = json::array();
    const auto cell = [](std::optional<double> value) {
        return value ? format_double(*value) : std::string("absent");
    };

    for (double gamma : config.gammas) {
        const HyperCycleConfig hyper{{config.size, gamma}, config.dims};
        std::optional<double> weak_bound, strong_bound;
        try {
            weak_bound = mixing_bound(Regime::weak, hyper, config.epsilon).applicable.value;
        } catch (const DomainError&) {}
        try {
            strong_bound = mixing_bound(Regime::strong, hyper, config.epsilon).applicable.value;
        } catch (const DomainError&) {}

        std::optional<double> first_hit, stable;
        std::string diagnostic;
        try {
            double horizon = config.t_max;
            if (horizon < 0.0) {
                double reference = 0.0;
                if (weak_bound) reference = std::max(reference, *weak_bound);
                if (strong_bound) reference = std::max(reference, *strong_bound);
                if (reference == 0.0)
                    throw DomainError("no finite bound available; provide --t-max");
                horizon = 5.0 * reference;
            }
            MixingQuery query;
            query.epsilon = config.epsilon;
            query.t_max = horizon;
            query.dt = config.dt > 0.0 ? config.dt : horizon / 10000.0;
            query.refine_tol = query.dt / 100.0;
            const MixingResult result = measure_mixing_time(
                exact_distribution_source(hyper, start), query, MixingMode::stable);
            first_hit = result.first_hit;
            stable = result.stable;
            diagnostic = result.diagnostic;
        } catch (const std::exception& e) {
            diagnostic = e.what();
        }

        csv += format_double(gamma) + "," + cell(first_hit) + "," + cell(stable) + "," +
               (weak_bound ? format_double(*weak_bound) : std::string("invalid")) + "," +
               (strong_bound ? format_double(*strong_bound) : std::string("invalid")) + "\n";
        json row;
        row["gamma"] = gamma;
        row["first_hit"] = first_hit ? json(*first_hit) : json(nullptr);
        row["stable"] = stable ? json(*stable) : json(nullptr);
        row["weak_bound"] = weak_bound ? json(*weak_bound) : json(nullptr);
        row["strong_bound"] = strong_bound ? json(*strong_bound) : json(nullptr);
        row["diagnostic"] = diagnostic;
        rows.push_back(row);
    }

    json meta = base_metadata(config);
    meta["epsilon"] = config.epsilon;
    meta["rows"] = rows;
    write_outputs(config, csv, meta);
    return kExitOk;
}

int run_command(const RunConfig& config) {
    try {
        if (config.command == "simulate") return run_simulate(config);
        if (config.command == "mixing") return run_mixing(config);
        if (config.command == "bounds") return run_bounds(config);
        if (config.command == "compare") return run_compare(config);
        if (config.command == "sweep") return run_sweep(config);
        std::cerr << "qwalk: unknown command '" << config.command << "'\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "qwalk " << config.command << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const ResourceError& e) {
        std::cerr << "qwalk " << config.command << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "qwalk " << config.command << ": " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "qwalk " << config.command << ": " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace qwalk::cli
