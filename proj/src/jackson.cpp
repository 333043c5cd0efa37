#include "exclusion/jackson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace exclusion {

JacksonParams reduced_params(const RateSystem& rates, const DiscreteInterval& interval) {
    check_interval(rates, interval);
    if (interval.length < 2) {
        throw ModelError("reduced network needs an interval with at least two particles, got " +
                         to_string(interval));
    }
    const int first = interval.first;
    const int last = interval.last();
    const auto n = static_cast<std::size_t>(interval.length - 1);

    JacksonParams p;
    p.first_gap = first;
    p.lambda.assign(n, 0.0);
    p.mu.resize(n);
    p.to_prev.assign(n, 0.0);
    p.to_next.assign(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        const int gap = first + static_cast<int>(k);
        p.mu[k] = rates.b(gap) + rates.a(gap + 1);
        if (k > 0) {
            p.to_prev[k] = rates.b(gap) / p.mu[k];
        }
        if (k + 1 < n) {
            p.to_next[k] = rates.a(gap + 1) / p.mu[k];
        }
    }
    if (n == 1) {
        p.lambda[0] = rates.a(first) + rates.b(last);
    } else {
        p.lambda.front() = rates.a(first);
        p.lambda.back() = rates.b(last);
    }
    return p;
}

JacksonParams to_jackson(const RateSystem& rates) {
    return reduced_params(rates, {1, static_cast<int>(rates.particles())});
}

std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& super, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0);
    double pivot = diag[0];
    if (pivot == 0.0) {
        throw ModelError("singular tridiagonal system (zero pivot at row 0)");
    }
    c[0] = n > 1 ? super[0] / pivot : 0.0;
    rhs[0] /= pivot;
    for (std::size_t k = 1; k < n; ++k) {
        pivot = diag[k] - sub[k] * c[k - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw ModelError("singular tridiagonal system (zero pivot at row " + std::to_string(k) + ")");
        }
        c[k] = k + 1 < n ? super[k] / pivot : 0.0;
        rhs[k] = (rhs[k] - sub[k] * rhs[k - 1]) / pivot;
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        rhs[k] -= c[k] * rhs[k + 1];
    }
    return rhs;
}

namespace {

void classify(const JacksonParams& params, double tol, TrafficSolution& sol) {
    sol.rho.resize(sol.nu.size());
    sol.stable_set.clear();
    sol.critical_set.clear();
    for (std::size_t k = 0; k < sol.nu.size(); ++k) {
        sol.rho[k] = sol.nu[k] / params.mu[k];
        const int gap = params.first_gap + static_cast<int>(k);
        if (sol.rho[k] < 1.0 - tol) {
            sol.stable_set.push_back(gap);
        }
        if (std::abs(sol.rho[k] - 1.0) <= tol) {
            sol.critical_set.push_back(gap);
        }
    }
}

// (x P)_k for the tridiagonal routing matrix.
double routed_into(const JacksonParams& p, const std::vector<double>& x, std::size_t k) {
    double inflow = 0.0;
    if (k > 0) {
        inflow += x[k - 1] * p.to_next[k - 1];
    }
    if (k + 1 < x.size()) {
        inflow += x[k + 1] * p.to_prev[k + 1];
    }
    return inflow;
}

}  // namespace

TrafficSolution solve_stable_traffic(const JacksonParams& params, double tol) {
    const std::size_t n = params.size();
    // Column k of nu (I - P) = lambda:  nu_k - nu_{k-1} P_{k-1,k} - nu_{k+1} P_{k+1,k} = lambda_k.
    std::vector<double> sub(n, 0.0), diag(n, 1.0), super(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            sub[k] = -params.to_next[k - 1];
        }
        if (k + 1 < n) {
            super[k] = -params.to_prev[k + 1];
        }
    }
    TrafficSolution sol;
    sol.nu = solve_tridiagonal(sub, diag, super, params.lambda);
    sol.residual = stable_traffic_residual(params, sol.nu);
    classify(params, tol, sol);
    return sol;
}

double stable_traffic_residual(const JacksonParams& params, const std::vector<double>& nu) {
    double worst = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
        worst = std::max(worst, std::abs(nu[k] - routed_into(params, nu, k) - params.lambda[k]));
    }
    return worst;
}

double general_traffic_residual(const JacksonParams& params, const std::vector<double>& nu) {
    std::vector<double> clamped(nu.size());
    for (std::size_t k = 0; k < nu.size(); ++k) {
        clamped[k] = std::min(nu[k], params.mu[k]);
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
        worst = std::max(worst, std::abs(nu[k] - routed_into(params, clamped, k) - params.lambda[k]));
    }
    return worst;
}

TrafficSolution solve_general_traffic(const JacksonParams& params, const GeneralTrafficOptions& options,
                                      std::vector<std::vector<double>>& iterates) {
    if (!(options.tol > 0.0)) {
        throw ModelError("tolerance must be positive");
    }
    const std::size_t n = params.size();
    std::vector<double> nu = options.initial.value_or(params.lambda);
    if (nu.size() != n) {
        throw ModelError("initial throughput vector has wrong length");
    }
    if (options.record_iterates) {
        iterates.push_back(nu);
    }
    std::vector<double> clamped(n), next(n);
    double step = 0.0;
    for (long it = 1; it <= options.max_iter; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            clamped[k] = std::min(nu[k], params.mu[k]);
        }
        step = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] = routed_into(params, clamped, k) + params.lambda[k];
            step = std::max(step, std::abs(next[k] - nu[k]));
        }
        nu.swap(next);
        if (options.record_iterates) {
            iterates.push_back(nu);
        }
        if (step < options.tol) {
            TrafficSolution sol;
            sol.nu = std::move(nu);
            sol.iterations = it;
            sol.residual = general_traffic_residual(params, sol.nu);
            classify(params, options.tol, sol);
            return sol;
        }
    }
    throw ConvergenceError("general traffic iteration did not converge in " +
                               std::to_string(options.max_iter) + " steps; last step " + std::to_string(step),
                           step);
}

TrafficSolution solve_general_traffic(const JacksonParams& params, const GeneralTrafficOptions& options) {
    std::vector<std::vector<double>> unused;
    GeneralTrafficOptions opts = options;
    opts.record_iterates = false;
    return solve_general_traffic(params, opts, unused);
}

}  // namespace exclusion
