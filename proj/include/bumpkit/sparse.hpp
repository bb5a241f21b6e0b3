#pragma once

#include "bumpkit/grid.hpp"
#include "bumpkit/random.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace bumpkit {

// Cubes are kept sorted by descending length then offset, so parents precede children.
struct SparseFamily {
    Grid grid;
    std::vector<IntervalRef> cubes;
    std::vector<std::vector<IntervalRef>> witness; // E_Q as cell ranges
    double alpha = 0.5;
    std::vector<int> parent; // nearest containing cube, -1 at roots
    std::vector<std::vector<int>> children;

    std::size_t size() const { return cubes.size(); }
    int index_of(const IntervalRef& Q) const;
};

// Sorts and builds the containment forest. Witnesses may be empty (assign later).
SparseFamily make_family(const Grid& g, std::vector<IntervalRef> cubes,
                         std::vector<std::vector<IntervalRef>> witness = {}, double alpha = 0.5);

bool verify_sparsity(const SparseFamily& S);

// Bottom-up greedy witnesses; optimal for nested families. Returns false if some cube
// cannot get ceil(alpha |Q|) free cells.
bool assign_witnesses(SparseFamily& S, double alpha);
// Largest alpha (to 1e-9) for which assign_witnesses succeeds.
double max_feasible_alpha(const SparseFamily& S);

SparseFamily build_sparse_cz(const StepFn& f, const IntervalRef& root, double factor = 2.0);

struct Augmented {
    SparseFamily family;
    std::size_t added = 0;
};
// Principal-cube augmentation: inside each cube Q add maximal dyadic P with
// avg_P |b - b_Q| > 4 avg_Q |b - b_Q|; witnesses are re-assigned at the best alpha <= alpha(S).
Augmented augment_family(const SparseFamily& S, const StepFn& b);
// max over Q in S, x in Q of |b(x) - b_Q| / sum_{P in S, P in Q, x in P} avg_P |b - b_P|
double oscillation_constant(const SparseFamily& S, const StepFn& b);

// Full dyadic tree to `depth` (cube depth below the whole domain), each cube kept with
// probability q (the root always), cubes that cannot get an alpha-witness are dropped bottom-up.
SparseFamily random_family(const Grid& g, int depth, double q, SplitMix64& rng, double alpha = 0.5);

using CoefSeq = std::vector<double>; // aligned with SparseFamily::cubes

StepFn apply_AS(const SparseFamily& S, const StepFn& f);
StepFn apply_AS_eta_iter(const SparseFamily& S, const StepFn& eta, const StepFn& f, int m);
StepFn apply_ALlogLm(const SparseFamily& S, const StepFn& f, int m);
StepFn apply_Tm(const SparseFamily& S, const StepFn& f, int m, bool adjoint = false);
StepFn apply_TStau(const SparseFamily& S, const CoefSeq& tau, const StepFn& f,
                   const std::optional<IntervalRef>& R = std::nullopt);
// sum_Q a_Q chi_Q for coefficients aligned with cubes
StepFn sum_indicators(const SparseFamily& S, const CoefSeq& a);

nlohmann::ordered_json to_json(const SparseFamily& S);
SparseFamily family_from_json(const Grid& g, const nlohmann::json& j);

} // namespace bumpkit
