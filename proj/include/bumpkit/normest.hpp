#pragma once

#include "bumpkit/sparse.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bumpkit {

// Positive-homogeneous map on nonnegative step functions
using Operator = std::function<StepFn(const StepFn&)>;

struct NormEstimate {
    double lower = 0.0;
    StepFn witness;
    std::size_t iterations = 0; // operator evaluations spent
    std::uint64_t seed = 0;
    std::string seedset;        // which seed the ascent started from
};

nlohmann::ordered_json to_json(const NormEstimate& e);

struct AscentOptions {
    std::size_t budget = 4000;       // operator evaluations, seeds included
    std::uint64_t seed = 1;
    int random_seeds = 4;
    std::vector<StepFn> extra_seeds; // evaluated first
};

// ||Op f||_{L^p(u)} / ||f||_{L^p(v)}
double rayleigh_ratio(const Operator& op, const StepFn& f, double p, const StepFn& u, const StepFn& v);

// Largest ratio found over the seed set followed by coarse-to-fine block ascent; `lower` is the
// ratio of `witness` re-evaluated at exit.
NormEstimate opnorm_lower(const Operator& op, double p, const StepFn& u, const StepFn& v,
                          const AscentOptions& opt = {});

// Matrix of a linear operator in the cell basis, column j = op(e_j)
Eigen::MatrixXd dense_matrix(const Operator& op, const Grid& g);
// Unweighted L^2 norm of a linear operator (largest singular value)
double l2_norm_dense(const Operator& op, const Grid& g);

struct TestingConstants {
    double t_out = 0.0;
    double t_in = 0.0;
    std::size_t skipped = 0; // R with sigma(R) = 0 or u(R) = 0
};

TestingConstants testing_constants(const SparseFamily& S, const CoefSeq& tau, const StepFn& sigma, const StepFn& u,
                                   double p);

// sup_t t u({|f| > t})^{1/p}
double weak_norm(const StepFn& f, const StepFn& u, double p);

} // namespace bumpkit
