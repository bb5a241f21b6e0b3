#pragma once

#include "bumpkit/grid.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bumpkit {

// Constant piece of a weight pair; lengths and levels kept as logs (-inf for u = 0) so that
// e^{-n} and e^{n} live side by side without rounding.
struct Piece {
    double log_len;
    double log_u;
    double log_v;
};

// a = e^{-n}, b = n^{-1/2}, c = a^{1/(p-1)}
struct LocalizedGeometry {
    double n;
    double p;
    double log_a, log_b, log_c;
};

// a < (b/2)^{max(p-1,1)} and b < 1/2
bool conda_holds(double n, double p);
// throws std::invalid_argument when conda fails
LocalizedGeometry localized_geometry(double n, double p);
// pieces of u_I, v_I on I = [0, b], left to right
std::vector<Piece> localized_pieces(double n, double p);

struct LocalizedStep {
    StepFn u, v;  // u = 0 and v = 1 off I
    IntervalRef I;
    double b_len; // b before snapping
    double avg_u;     // (1 + a^2)/b
    double avg_sigma; // ((b - c)c + log^{3p(1-p')}(1/a))/b
};

// (def1)/(def2) on [shift, shift + b] snapped to cells. Throws std::invalid_argument if conda
// fails, if a or a^{1/(p-1)} spans fewer than 4 cells, or if I leaves the domain.
LocalizedStep gen_localized_weights(const Grid& g, double a, double p, double shift);

struct Overlap {
    std::size_t piece;
    double log_len;
};

// log of ||u^{1/p}||_{t^p log^alpha(e+t), J} ||v^{-1/p}||_{t^{p'} log^beta(e+t), J}; -inf when u = 0 on J
double log_pair_product(std::span<const Piece> w, std::span<const Overlap> J, double p, double alpha, double beta);
// log of ||u^{1/p}||_{t^p log^alpha(e+t), J} alone
double log_u_norm(std::span<const Piece> w, std::span<const Overlap> J, double p, double alpha);
double log_v_norm(std::span<const Piece> w, std::span<const Overlap> J, double p, double beta);

// Exponent pairs (alpha, beta) of the three products
struct ExponentPair {
    double alpha, beta;
};
ExponentPair exponents_b1(double p); // (p - 1/2, 2p' - 1/2)
ExponentPair exponents_b2(double p); // (2p - 1/2, p' - 1/2)
ExponentPair exponents_b3(double p); // (2p - 1, 2p' - 1)

struct ExampleBlock {
    int n;
    std::size_t first, last; // pieces of I_n, inclusive
};

// u = sum u_n, v = chi_{[0,e^N)} + sum v_n + sum e^n chi_{(e^n + b_n, e^{n+1})} on [0, e^{N1} + 1];
// the trailing piece after I_{N1} carries v = e^{N1}.
struct ExampleWeights {
    double p;
    std::vector<Piece> pieces;
    std::vector<ExampleBlock> blocks;
};

ExampleWeights example_weights(double p, int N, int N1);

enum class IntervalClass { inside = 1, straddling = 2, several = 3 };

struct ExampleClassMax {
    double cl1 = 0.0, cl2 = 0.0, cl3 = 0.0;
    std::size_t count = 0;
};

struct ExampleScan {
    std::vector<int> n;
    std::vector<double> on_block_cl1, on_block_cl2, on_block_cl3; // J = I_n
    std::vector<ExampleClassMax> inside, straddling, several;      // indexed like n
    double case3_u2_ratio = 0.0; // max over several-block J of int_J u^2 / |J|
};

// Endpoints: piece ends plus offsets len * 2^{-k} from either end of each piece, k up to
// `levels` (coarser `levels3` for intervals meeting several blocks). Intervals meeting several
// blocks are attributed to the largest n they meet.
ExampleScan scan_example(const ExampleWeights& w, int levels = 60, int levels3 = 16);

} // namespace bumpkit
