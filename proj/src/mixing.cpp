#include "qwalk/mixing.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace qwalk {

namespace {

constexpr double kPi = std::numbers::pi;

// Bisection on the predicate tv(t) <= epsilon over (lo, hi], lo violating and
// hi satisfying; returns the satisfying endpoint at the requested resolution.
double refine_crossing(const DistributionSource& source, double epsilon, double lo, double hi,
                       double refine_tol) {
    while (hi - lo > refine_tol) {
        const double mid = 0.5 * (lo + hi);
        if (tv_distance(source(mid)) <= epsilon)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

RVector product_distribution(const RVector& single, const HyperCycleConfig& config,
                             const MultiIndex& start) {
    const int n = config.dims;
    const int size = config.base.size;
    const Index vertices = config.vertex_count();
    RVector probs(vertices);
    for (Index alpha = 0; alpha < vertices; ++alpha) {
        Index rest = alpha;
        double p = 1.0;
        for (int j = n - 1; j >= 0; --j) {
            const int digit = static_cast<int>(rest % size);
            rest /= size;
            p *= single(((digit - start[j]) % size + size) % size);
        }
        probs(alpha) = p;
    }
    return probs;
}

MultiIndex checked_start(const HyperCycleConfig& config, MultiIndex start) {
    if (start.empty()) start.assign(config.dims, 0);
    encode_multi_index(start, config);
    return start;
}

}  // namespace

double tv_distance(const RVector& p) {
    if (p.size() == 0) throw DomainError("tv_distance: empty distribution");
    const double uniform = 1.0 / static_cast<double>(p.size());
    return (p.array() - uniform).abs().sum();
}

MixingResult measure_mixing_time(const DistributionSource& source, const MixingQuery& query,
                                 MixingMode mode) {
    query.validate();
    MixingResult result;
    result.horizon = query.t_max;

    std::vector<double> grid;
    const auto steps = static_cast<Index>(std::floor(query.t_max / query.dt + 1e-9));
    grid.reserve(steps + 2);
    for (Index k = 0; k <= steps; ++k) grid.push_back(k * query.dt);
    if (grid.back() < query.t_max - 1e-12 * query.t_max) grid.push_back(query.t_max);

    std::optional<Index> first_ok;
    std::optional<Index> last_violation;
    for (Index i = 0; i < static_cast<Index>(grid.size()); ++i) {
        const double tv = tv_distance(source(grid[i]));
        result.tv_series.emplace_back(grid[i], tv);
        if (tv <= query.epsilon) {
            if (!first_ok) first_ok = i;
        } else {
            last_violation = i;
        }
        if (mode == MixingMode::first_hit && first_ok) break;
    }

    if (first_ok) {
        result.first_hit =
            *first_ok == 0 ? 0.0
                           : refine_crossing(source, query.epsilon, grid[*first_ok - 1],
                                             grid[*first_ok], query.refine_tol);
    } else {
        result.diagnostic = "no epsilon-close time found within the horizon";
    }
    if (mode == MixingMode::first_hit) return result;

    if (!last_violation) {
        result.stable = 0.0;
    } else if (*last_violation == static_cast<Index>(grid.size()) - 1) {
        result.diagnostic = "stability not certified: TV exceeds epsilon at the final "
                            "grid point; increase t_max";
    } else {
        result.stable = refine_crossing(source, query.epsilon, grid[*last_violation],
                                        grid[*last_violation + 1], query.refine_tol);
    }
    return result;
}

DistributionSource kernel_distribution_source(const AnalyticKernel& kernel,
                                              const HyperCycleConfig& config,
                                              MultiIndex start) {
    config.validate();
    if (kernel.config().size != config.base.size ||
        kernel.config().gamma != config.base.gamma)
        throw DomainError("kernel_distribution_source: kernel does not match the base cycle");
    start = checked_start(config, std::move(start));
    const AnalyticKernel kernel_copy = kernel;
    return [kernel_copy, config, start](double t) {
        return product_distribution(kernel_copy.diagonal(t / config.dims), config, start);
    };
}

DistributionSource exact_distribution_source(const HyperCycleConfig& config, MultiIndex start,
                                             std::string* method_out) {
    config.validate();
    start = checked_start(config, std::move(start));
    auto cache = std::make_shared<PropagatorCache>(build_cycle_superoperator(config.base));
    if (method_out) *method_out = std::string(cache->method());
    const int size = config.base.size;
    CVector v0 = CVector::Zero(static_cast<Index>(size) * size);
    v0(0) = 1.0;  // vectorized |0><0|
    return [cache, config, start, size, v0 = std::move(v0)](double t) {
        const CVector v = cache->apply(t / config.dims, v0);
        RVector single(size);
        for (int a = 0; a < size; ++a) single(a) = v(a * size + a).real();
        return product_distribution(single, config, start);
    };
}

MixingBoundResult mixing_bound(Regime regime, const HyperCycleConfig& config, double epsilon) {
    config.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DomainError("mixing_bound: epsilon must be in (0,1)");
    const int n = config.dims;
    const double size = config.base.size;
    const double gamma = config.base.gamma;
    const double cells = std::pow(size, n);

    const auto general_weak = [&](int dims) {
        return dims / gamma * size / (size - 1.0) *
               std::log(dims * (size + 1.0) * (1.0 + epsilon * cells) / epsilon);
    };
    const auto general_strong = [&](int dims) {
        return gamma * size * size * dims / 4.0 *
               std::log(dims * (2.0 + epsilon) * (1.0 + epsilon * cells) / epsilon);
    };

    MixingBoundResult result;
    if (regime == Regime::weak) {
        if (!(gamma > 0.0)) throw DomainError("mixing_bound: weak bound requires gamma > 0");
        if (n == 1) {
            if (config.base.size < 3)
                throw DomainError("mixing_bound: weak n=1 bound divides by N-2; requires N >= 3");
            result.applicable = {1.0 / gamma * size / (size - 2.0) *
                                     std::log((size + 1.0) / epsilon),
                                 "weak-n1"};
            result.n1_general = BoundValue{general_weak(1), "weak-ndim"};
        } else {
            result.applicable = {general_weak(n), "weak-ndim"};
        }
    } else {
        if (!(gamma > 0.0)) throw DomainError("mixing_bound: strong bound requires gamma > 0");
        if (n == 1) {
            result.applicable = {gamma * size * size / 4.0 *
                                     std::log((2.0 + epsilon) / epsilon),
                                 "strong-n1"};
            result.n1_general = BoundValue{general_strong(1), "strong-ndim"};
        } else {
            result.applicable = {general_strong(n), "strong-ndim"};
        }
    }
    return result;
}

ReductionReport verify_reduction_inequality(const HyperCycleConfig& config,
                                            const AnalyticKernel& kernel, double epsilon,
                                            double t) {
    config.validate();
    if (kernel.config().size != config.base.size ||
        kernel.config().gamma != config.base.gamma)
        throw DomainError("verify_reduction_inequality: kernel does not match the base cycle");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DomainError("verify_reduction_inequality: epsilon must be in (0,1)");
    if (!(t >= 0.0)) throw DomainError("verify_reduction_inequality: t must be >= 0");

    const int n = config.dims;
    const int size = config.base.size;
    const Index vertices = config.vertex_count();
    const double cells = static_cast<double>(vertices);

    ReductionReport report;
    report.t = t;
    report.epsilon = epsilon;
    report.rhs_single = epsilon / n / (1.0 + cells * epsilon);
    report.rhs_a_tilde = cells * epsilon / (1.0 + cells * epsilon);

    const RVector single = kernel.diagonal(t / n);
    report.tv_single = (single.array() - 1.0 / size).abs().sum();

    RVector deviation(size);  // |N P_a - 1|
    for (int a = 0; a < size; ++a) deviation(a) = std::abs(size * single(a) - 1.0);

    double tv_n = 0.0;
    double direct = 0.0;
    for (Index alpha = 0; alpha < vertices; ++alpha) {
        Index rest = alpha;
        double prob = 1.0;
        double a_alpha = 0.0;
        for (int j = 0; j < n; ++j) {
            const int digit = static_cast<int>(rest % size);
            rest /= size;
            prob *= single(digit);
            a_alpha += deviation(digit);
        }
        tv_n += std::abs(prob - 1.0 / cells);
        double power = a_alpha;
        for (int p = 1; p <= n; ++p) {
            direct += power;
            power *= a_alpha;
        }
    }
    report.tv_n = tv_n;
    report.majorant_direct = direct / cells;
    report.a_tilde = static_cast<double>(n) * cells * report.tv_single;

    report.assumption_ok = report.a_tilde < 1.0;
    if (report.assumption_ok)
        report.majorant_geometric = report.a_tilde / (1.0 - report.a_tilde) / cells;

    const double slack = 1e-12;
    report.holds_n_dim = report.tv_n <= epsilon;
    report.holds_single = report.tv_single <= report.rhs_single;
    report.holds_majorant =
        report.tv_n <= report.majorant_direct * (1.0 + slack) + slack &&
        (!report.majorant_geometric ||
         report.majorant_direct <= *report.majorant_geometric * (1.0 + slack) + slack);
    report.holds_a_tilde = report.a_tilde <= report.rhs_a_tilde;
    return report;
}

StrongChainReport verify_strong_bound_chain(const CycleConfig& config, double epsilon,
                                            double t) {
    config.validate();
    if (!(config.gamma > 0.0))
        throw DomainError("verify_strong_bound_chain: gamma must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DomainError("verify_strong_bound_chain: epsilon must be in (0,1)");
    if (!(t >= 0.0)) throw DomainError("verify_strong_bound_chain: t must be >= 0");
    const int n = config.size;
    const double gamma = config.gamma;

    StrongChainReport report;
    report.t = t;
    report.epsilon = epsilon;

    RVector weights(n);  // exp(-(t/gamma) sin^2(pi mu / N)), mu >= 1
    for (int mu = 1; mu < n; ++mu) {
        const double s = std::sin(kPi * mu / n);
        weights(mu) = std::exp(-t / gamma * s * s);
    }

    double exact = 0.0;
    for (int a = 0; a < n; ++a) {
        Complex sum{0.0, 0.0};
        for (int mu = 1; mu < n; ++mu)
            sum += weights(mu) * std::exp(Complex(0.0, 2.0 * kPi * mu * a / n));
        exact += std::abs(sum);
    }
    report.exact_series = exact / n;

    report.phase_free = weights.segment(1, n - 1).sum();

    double split = 0.0;
    for (int mu = 1; mu <= n / 2; ++mu)
        split += std::exp(-4.0 * mu * t / (gamma * n * n));
    report.split_sum = 2.0 * split;

    report.closed_form = t > 0.0
                             ? 2.0 / (std::exp(4.0 * t / (gamma * n * n)) - 1.0)
                             : std::numeric_limits<double>::infinity();

    const double slack = 1.0 + 1e-12;
    report.ordered = report.exact_series <= report.phase_free * slack &&
                     report.phase_free <= report.split_sum * slack &&
                     report.split_sum <= report.closed_form * slack;
    report.closed_form_within_epsilon = report.closed_form <= epsilon * slack;
    return report;
}

}  // namespace qwalk
