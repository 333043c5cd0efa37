#pragma once

// Queueing dual of the gap process: gap i is queue i of an open Jackson
// network with nearest-neighbour routing.  A customer at queue i is served
// when particle i jumps right (routed to queue i-1) or particle i+1 jumps left
// (routed to queue i+1); at the ends of the chain it leaves the network.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "exclusion/core.hpp"

namespace exclusion {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}

    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

/// Parameters of a tridiagonal Jackson network over gaps first_gap .. first_gap+n-1.
/// Vectors are indexed by local queue position k = 0..n-1.
struct JacksonParams {
    int first_gap = 1;
    std::vector<double> lambda;   // exogenous arrival rates
    std::vector<double> mu;       // service rates
    std::vector<double> to_prev;  // P_{k,k-1}; to_prev[0] == 0
    std::vector<double> to_next;  // P_{k,k+1}; to_next[n-1] == 0

    std::size_t size() const { return mu.size(); }

    /// Q_k = 1 - P_{k,k-1} - P_{k,k+1}: probability a served customer leaves.
    double exit_probability(std::size_t k) const { return 1.0 - to_prev[k] - to_next[k]; }
};

/// Full-system network: mu_i = b_i + a_{i+1}; lambda_1 = a_1, lambda_N = b_{N+1}
/// (lambda_1 = a_1 + b_2 when N = 1); P_{i,i-1} = b_i/mu_i, P_{i,i+1} = a_{i+1}/mu_i.
JacksonParams to_jackson(const RateSystem& rates);

/// Sub-network of the gaps interior to I (|I| >= 2), treating I as isolated.
JacksonParams reduced_params(const RateSystem& rates, const DiscreteInterval& interval);

struct TrafficSolution {
    std::vector<double> nu;        // throughputs
    std::vector<double> rho;       // nu / mu
    std::vector<int> stable_set;   // gap labels with rho < 1 - tol
    std::vector<int> critical_set; // gap labels with |rho - 1| <= tol
    double residual = 0.0;         // sup-norm residual of the defining equation
    long iterations = 0;
};

/// Solves nu (I - P) = lambda directly (the transposed system is tridiagonal).
/// Returns the solution whether or not every rho < 1.
TrafficSolution solve_stable_traffic(const JacksonParams& params, double tol = 1e-12);

/// Tridiagonal solve: sub[k] x[k-1] + diag[k] x[k] + super[k] x[k+1] = rhs[k].
/// Throws ModelError on a vanishing pivot.
std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& super, std::vector<double> rhs);

struct GeneralTrafficOptions {
    double tol = 1e-12;
    long max_iter = 1'000'000;
    std::optional<std::vector<double>> initial;  // defaults to lambda
    bool record_iterates = false;
};

/// Monotone fixed-point iteration nu <- (nu ^ mu) P + lambda until the
/// sup-norm step falls below tol.  Throws ConvergenceError after max_iter.
TrafficSolution solve_general_traffic(const JacksonParams& params, const GeneralTrafficOptions& options = {});

/// Same iteration, also returning every iterate (for monotonicity checks).
TrafficSolution solve_general_traffic(const JacksonParams& params, const GeneralTrafficOptions& options,
                                      std::vector<std::vector<double>>& iterates);

/// sup_k |nu_k - ((nu ^ mu) P + lambda)_k|.
double general_traffic_residual(const JacksonParams& params, const std::vector<double>& nu);

/// sup_k |(nu (I - P))_k - lambda_k|.
double stable_traffic_residual(const JacksonParams& params, const std::vector<double>& nu);

}  // namespace exclusion
