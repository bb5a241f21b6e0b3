#include "bumpkit/appendix.hpp"

#include "bumpkit/orlicz.hpp"
#include "bumpkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bumpkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double conj(double p) { return p / (p - 1.0); }

// log(e^x - e^y), x >= y
double log_sub(double x, double y) {
    if (y == kNegInf) return x;
    return x + std::log(-std::expm1(y - x));
}

double lse(double a, double b) {
    if (a < b) std::swap(a, b);
    return b == kNegInf ? a : a + std::log1p(std::exp(b - a));
}

} // namespace

bool conda_holds(double n, double p) {
    if (!(n > 4.0) || !(p > 1.0)) return false;
    double log_b = -0.5 * std::log(n);
    return -n < std::max(p - 1.0, 1.0) * (log_b - std::log(2.0));
}

LocalizedGeometry localized_geometry(double n, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("localized weights: p must exceed 1");
    if (!conda_holds(n, p)) throw std::invalid_argument("localized weights: a violates a < (b/2)^{max(p-1,1)}");
    return {n, p, -n, -0.5 * std::log(n), -n / (p - 1.0)};
}

std::vector<Piece> localized_pieces(double n, double p) {
    auto G = localized_geometry(n, p);
    double top = G.log_a + 3.0 * p * std::log(n); // log(a log^{3p}(1/a))
    double s = std::max(G.log_a, G.log_c);
    // b - a - max(a, c) without cancellation: a, c << b under conda
    double log_mid = log_sub(G.log_b, lse(G.log_a, s));
    std::vector<Piece> out;
    out.push_back({G.log_a, -G.log_a, -G.log_a});
    out.push_back({log_mid, kNegInf, -G.log_a});
    if (G.log_c > G.log_a) {
        out.push_back({log_sub(G.log_c, G.log_a), kNegInf, top});
        out.push_back({G.log_a, G.log_a, top});
    } else if (G.log_c < G.log_a) {
        out.push_back({log_sub(G.log_a, G.log_c), G.log_a, -G.log_a});
        out.push_back({G.log_c, G.log_a, top});
    } else {
        out.push_back({G.log_a, G.log_a, top});
    }
    return out;
}

LocalizedStep gen_localized_weights(const Grid& g, double a, double p, double shift) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("gen_localized_weights: a must lie in (0, 1)");
    double n = -std::log(a);
    auto G = localized_geometry(n, p);
    double h = g.cell_width();
    double b = std::exp(G.log_b), c = std::exp(G.log_c);
    if (a < 4.0 * h || c < 4.0 * h)
        throw std::invalid_argument("gen_localized_weights: a and a^{1/(p-1)} need at least 4 cells each");
    Index s = std::llround(shift / h), nb = std::llround(b / h), na = std::llround(a / h), nc = std::llround(c / h);
    if (s < 0 || s + nb > g.cells()) throw std::invalid_argument("gen_localized_weights: I leaves the domain");
    Eigen::ArrayXd u = Eigen::ArrayXd::Zero(g.cells()), v = Eigen::ArrayXd::Ones(g.cells());
    u.segment(s, na).setConstant(1.0 / a);
    u.segment(s + nb - na, na).setConstant(a);
    v.segment(s, nb - nc).setConstant(1.0 / a);
    v.segment(s + nb - nc, nc).setConstant(a * std::pow(n, 3.0 * p));
    double q = conj(p);
    LocalizedStep out{StepFn(g, u), StepFn(g, v), {s, nb}, b, (1.0 + a * a) / b, 0.0};
    out.avg_sigma = ((b - c) * c + std::pow(n, 3.0 * p * (1.0 - q))) / b;
    return out;
}

namespace {

double log_norm(std::span<const Piece> w, std::span<const Overlap> J, double scale, bool of_u, const YoungFn& phi) {
    std::vector<double> lv, lm;
    lv.reserve(J.size());
    lm.reserve(J.size());
    for (const auto& o : J) {
        double l = of_u ? w[o.piece].log_u : w[o.piece].log_v;
        lv.push_back(l == kNegInf ? kNegInf : scale * l);
        lm.push_back(o.log_len);
    }
    return log_luxemburg_norm(lv, lm, phi);
}

} // namespace

double log_u_norm(std::span<const Piece> w, std::span<const Overlap> J, double p, double alpha) {
    return log_norm(w, J, 1.0 / p, true, YoungFn::power_log(p, alpha));
}

double log_v_norm(std::span<const Piece> w, std::span<const Overlap> J, double p, double beta) {
    return log_norm(w, J, -1.0 / p, false, YoungFn::power_log(conj(p), beta));
}

double log_pair_product(std::span<const Piece> w, std::span<const Overlap> J, double p, double alpha, double beta) {
    double lu = log_u_norm(w, J, p, alpha);
    if (lu == kNegInf) return kNegInf;
    return lu + log_v_norm(w, J, p, beta);
}

ExponentPair exponents_b1(double p) { return {p - 0.5, 2.0 * conj(p) - 0.5}; }
ExponentPair exponents_b2(double p) { return {2.0 * p - 0.5, conj(p) - 0.5}; }
ExponentPair exponents_b3(double p) { return {2.0 * p - 1.0, 2.0 * conj(p) - 1.0}; }

ExampleWeights example_weights(double p, int N, int N1) {
    if (N > N1) throw std::invalid_argument("example_weights: N must not exceed N1");
    ExampleWeights out;
    out.p = p;
    out.pieces.push_back({static_cast<double>(N), kNegInf, 0.0});
    for (int n = N; n <= N1; ++n) {
        auto loc = localized_pieces(n, p);
        ExampleBlock blk{n, out.pieces.size(), out.pieces.size() + loc.size() - 1};
        out.pieces.insert(out.pieces.end(), loc.begin(), loc.end());
        out.blocks.push_back(blk);
        double b = 1.0 / std::sqrt(static_cast<double>(n));
        // e^{n+1} - e^n - b_n, or 1 - b after the last block
        double log_gap = n < N1 ? n + std::log(std::expm1(1.0) - b * std::exp(-static_cast<double>(n))) : std::log1p(-b);
        out.pieces.push_back({log_gap, kNegInf, static_cast<double>(n)});
    }
    return out;
}

namespace {

struct Point {
    std::size_t piece;
    double log_off; // distance to the reference end of the piece
    bool from_end;
    int k;          // 0 for piece ends
};

// log of the measure between the start of the piece and the point
double log_from_start(const Piece& pc, const Point& P) {
    return P.from_end ? log_sub(pc.log_len, P.log_off) : P.log_off;
}

double log_to_end(const Piece& pc, const Point& P) {
    return P.from_end ? P.log_off : log_sub(pc.log_len, P.log_off);
}

// Overlaps of [P, Q); empty if the interval is degenerate or reversed.
std::vector<Overlap> overlaps(std::span<const Piece> w, const Point& P, const Point& Q) {
    std::vector<Overlap> out;
    if (P.piece > Q.piece) return out;
    if (P.piece == Q.piece) {
        const Piece& pc = w[P.piece];
        double l;
        if (!P.from_end && !Q.from_end) {
            if (!(Q.log_off > P.log_off)) return out;
            l = log_sub(Q.log_off, P.log_off);
        } else if (P.from_end && Q.from_end) {
            if (!(P.log_off > Q.log_off)) return out;
            l = log_sub(P.log_off, Q.log_off);
        } else if (!P.from_end && Q.from_end) {
            double used = lse(P.log_off, Q.log_off);
            if (!(pc.log_len > used)) return out;
            l = log_sub(pc.log_len, used);
        } else {
            return out;
        }
        out.push_back({P.piece, l});
        return out;
    }
    double head = log_to_end(w[P.piece], P);
    if (head > kNegInf) out.push_back({P.piece, head});
    for (std::size_t i = P.piece + 1; i < Q.piece; ++i) out.push_back({i, w[i].log_len});
    double tail = log_from_start(w[Q.piece], Q);
    if (tail > kNegInf) out.push_back({Q.piece, tail});
    return out;
}

// start, offsets len 2^{-k} from the start (k = 1..K) and from the end (k = 2..K), ascending
std::vector<Point> piece_points(const Piece& pc, std::size_t idx, int K) {
    std::vector<Point> out;
    out.push_back({idx, kNegInf, false, 0});
    for (int k = K; k >= 1; --k) out.push_back({idx, pc.log_len - k * std::log(2.0), false, k});
    for (int k = 2; k <= K; ++k) out.push_back({idx, pc.log_len - k * std::log(2.0), true, k});
    return out;
}

struct Eval {
    int block = -1; // attribution
    IntervalClass cls = IntervalClass::inside;
    double cl1 = 0.0, cl2 = 0.0, cl3 = 0.0;
    double u2_ratio = 0.0;
};

} // namespace

ExampleScan scan_example(const ExampleWeights& w, int levels, int levels3) {
    const auto& pcs = w.pieces;
    double p = w.p;
    double log_a_min = -static_cast<double>(w.blocks.back().n);
    auto depth = [&](const Piece& pc, int cap) {
        int k = static_cast<int>(std::ceil((pc.log_len - log_a_min) / std::log(2.0))) + 2;
        return std::clamp(k, 2, cap);
    };
    std::vector<std::vector<Point>> fine(pcs.size()), coarse(pcs.size());
    for (std::size_t i = 0; i < pcs.size(); ++i) {
        fine[i] = piece_points(pcs[i], i, depth(pcs[i], levels));
        coarse[i] = piece_points(pcs[i], i, depth(pcs[i], levels3));
    }
    auto end_of = [&](std::size_t i) {
        return Point{i, kNegInf, true, 0};
    };
    auto collect = [&](const std::vector<std::vector<Point>>& src, std::size_t lo, std::size_t hi, bool with_end) {
        std::vector<Point> out;
        for (std::size_t i = lo; i <= hi; ++i) out.insert(out.end(), src[i].begin(), src[i].end());
        if (with_end) out.push_back(end_of(hi));
        return out;
    };

    std::vector<std::pair<Point, Point>> jobs;
    std::size_t nb = w.blocks.size();
    for (std::size_t bi = 0; bi < nb; ++bi) {
        const auto& B = w.blocks[bi];
        auto in = collect(fine, B.first, B.last, true);
        for (std::size_t i = 0; i < in.size(); ++i)
            for (std::size_t j = i + 1; j < in.size(); ++j) jobs.push_back({in[i], in[j]});
        auto left = fine[B.first - 1];
        auto right = collect(fine, B.last + 1, B.last + 1, true);
        for (const auto& L : left) {
            for (const auto& Q : in) jobs.push_back({L, Q});
            for (const auto& R : right) jobs.push_back({L, R});
        }
        for (const auto& P : in)
            for (const auto& R : right) jobs.push_back({P, R});
    }
    for (std::size_t b1 = 0; b1 < nb; ++b1)
        for (std::size_t b2 = b1 + 1; b2 < nb; ++b2) {
            auto left = collect(coarse, w.blocks[b1].first - 1, w.blocks[b1].last, false);
            auto right = collect(coarse, w.blocks[b2].first, w.blocks[b2].last + 1, true);
            for (const auto& L : left)
                for (const auto& R : right) jobs.push_back({L, R});
        }

    auto e1 = exponents_b1(p), e2 = exponents_b2(p), e3 = exponents_b3(p);
    std::vector<int> block_of(pcs.size(), -1);
    for (std::size_t bi = 0; bi < nb; ++bi)
        for (std::size_t i = w.blocks[bi].first; i <= w.blocks[bi].last; ++i) block_of[i] = static_cast<int>(bi);

    auto evaluate = [&](std::span<const Overlap> J, Eval& e) {
        int lo = -1, hi = -1;
        bool outside = false;
        for (const auto& o : J) {
            int b = block_of[o.piece];
            if (b < 0) {
                outside = true;
                continue;
            }
            if (lo < 0) lo = b;
            hi = b;
        }
        if (lo < 0) return false;
        e.block = hi;
        e.cls = lo != hi ? IntervalClass::several : outside ? IntervalClass::straddling : IntervalClass::inside;
        e.cl1 = std::exp(log_pair_product(pcs, J, p, e1.alpha, e1.beta));
        e.cl2 = std::exp(log_pair_product(pcs, J, p, e2.alpha, e2.beta));
        e.cl3 = std::exp(log_pair_product(pcs, J, p, e3.alpha, e3.beta));
        if (e.cls == IntervalClass::several) {
            double lu2 = kNegInf, lj = kNegInf;
            for (const auto& o : J) {
                lj = lse(lj, o.log_len);
                if (pcs[o.piece].log_u > kNegInf) lu2 = lse(lu2, 2.0 * pcs[o.piece].log_u + o.log_len);
            }
            e.u2_ratio = std::exp(lu2 - lj);
        }
        return true;
    };

    std::vector<Eval> evals(jobs.size());
    std::vector<char> valid(jobs.size(), 0);
    parallel_for(jobs.size(), [&](std::size_t i) {
        auto J = overlaps(pcs, jobs[i].first, jobs[i].second);
        if (!J.empty()) valid[i] = evaluate(J, evals[i]);
    });

    ExampleScan out;
    out.inside.resize(nb);
    out.straddling.resize(nb);
    out.several.resize(nb);
    for (std::size_t bi = 0; bi < nb; ++bi) {
        const auto& B = w.blocks[bi];
        out.n.push_back(B.n);
        std::vector<Overlap> J;
        for (std::size_t i = B.first; i <= B.last; ++i) J.push_back({i, pcs[i].log_len});
        out.on_block_cl1.push_back(std::exp(log_pair_product(pcs, J, p, e1.alpha, e1.beta)));
        out.on_block_cl2.push_back(std::exp(log_pair_product(pcs, J, p, e2.alpha, e2.beta)));
        out.on_block_cl3.push_back(std::exp(log_pair_product(pcs, J, p, e3.alpha, e3.beta)));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!valid[i]) continue;
        const Eval& e = evals[i];
        auto& slot = e.cls == IntervalClass::inside       ? out.inside[e.block]
                     : e.cls == IntervalClass::straddling ? out.straddling[e.block]
                                                          : out.several[e.block];
        slot.cl1 = std::max(slot.cl1, e.cl1);
        slot.cl2 = std::max(slot.cl2, e.cl2);
        slot.cl3 = std::max(slot.cl3, e.cl3);
        ++slot.count;
        out.case3_u2_ratio = std::max(out.case3_u2_ratio, e.u2_ratio);
    }
    return out;
}

} // namespace bumpkit
