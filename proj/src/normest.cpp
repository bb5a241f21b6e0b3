#include "bumpkit/normest.hpp"

#include "bumpkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bumpkit {

nlohmann::ordered_json to_json(const NormEstimate& e) {
    nlohmann::ordered_json j;
    j["lower"] = e.lower;
    j["seed"] = e.seed;
    j["iterations"] = e.iterations;
    j["seedset"] = e.seedset;
    return j;
}

double rayleigh_ratio(const Operator& op, const StepFn& f, double p, const StepFn& u, const StepFn& v) {
    double den = lp_norm(f, p, &v);
    if (den == 0.0) return 0.0;
    return lp_norm(op(f), p, &u) / den;
}

namespace {

struct Search {
    const Operator& op;
    double p;
    const StepFn& u;
    const StepFn& v;
    std::size_t budget;
    std::size_t used = 0;
    double best = -1.0;
    Eigen::ArrayXd best_f;
    std::string origin;

    bool exhausted() const { return used >= budget; }

    // true if f improved the incumbent
    bool offer(const Eigen::ArrayXd& f, const std::string& tag) {
        if (exhausted()) return false;
        ++used;
        double r = rayleigh_ratio(op, StepFn(u.grid(), f), p, u, v);
        if (r > best) {
            best = r;
            best_f = f;
            if (!tag.empty()) origin = tag;
            return true;
        }
        return false;
    }
};

} // namespace

NormEstimate opnorm_lower(const Operator& op, double p, const StepFn& u, const StepFn& v, const AscentOptions& opt) {
    if (!(p > 1.0)) throw std::invalid_argument("opnorm_lower: p must exceed 1");
    if ((u.values() <= 0.0).any() || (v.values() <= 0.0).any())
        throw std::invalid_argument("opnorm_lower: weights must be positive");
    const Grid& g = u.grid();
    Index n = g.cells();
    double q = p / (p - 1.0);
    Search s{op, p, u, v, std::max<std::size_t>(opt.budget, 1), 0, -1.0, {}, {}};

    for (std::size_t k = 0; k < opt.extra_seeds.size(); ++k) s.offer(opt.extra_seeds[k].abs().values(), "extra:" + std::to_string(k));
    s.offer(v.pow(1.0 - q).values(), "v^{1-p'}");
    s.offer(u.pow(q - 1.0).values(), "u^{p'-1}");
    s.offer(Eigen::ArrayXd::Ones(n), "ones");
    SplitMix64 rng(opt.seed);
    for (int k = 0; k < opt.random_seeds; ++k) {
        auto r = random_lognormal(g, rng, 1.0);
        s.offer(r.values(), "lognormal:" + std::to_string(k));
    }
    for (const auto& I : enumerate_within({0, n}, ScanMode::dyadic)) {
        if (s.exhausted()) break;
        Eigen::ArrayXd f = Eigen::ArrayXd::Zero(n);
        f.segment(I.start, I.len).setConstant(1.0);
        char buf[64];
        std::snprintf(buf, sizeof buf, "indicator:%lld:%lld", static_cast<long long>(I.start),
                      static_cast<long long>(I.len));
        s.offer(f, buf);
    }

    // coarse-to-fine block ascent; empty blocks may be filled at half the current peak
    bool improved = true;
    while (improved && !s.exhausted()) {
        improved = false;
        for (Index len = n / 2; len >= 1 && !s.exhausted(); len /= 2) {
            for (Index st = 0; st + len <= n && !s.exhausted(); st += len) {
                Eigen::ArrayXd f = s.best_f;
                auto blk = f.segment(st, len);
                if (blk.maxCoeff() == 0.0) {
                    double lvl = s.best_f.maxCoeff();
                    if (lvl <= 0.0) continue;
                    blk.setConstant(0.5 * lvl);
                    if (s.offer(f, "")) improved = true;
                    continue;
                }
                for (double factor : {2.0, 0.5}) {
                    Eigen::ArrayXd h = s.best_f;
                    h.segment(st, len) *= factor;
                    if (s.offer(h, "")) {
                        improved = true;
                        break;
                    }
                }
            }
        }
    }

    NormEstimate out;
    out.witness = StepFn(g, s.best_f);
    out.lower = rayleigh_ratio(op, out.witness, p, u, v);
    out.iterations = s.used + 1;
    out.seed = opt.seed;
    out.seedset = s.origin;
    return out;
}

Eigen::MatrixXd dense_matrix(const Operator& op, const Grid& g) {
    Index n = g.cells();
    Eigen::MatrixXd M(n, n);
    for (Index j = 0; j < n; ++j) {
        Eigen::ArrayXd e = Eigen::ArrayXd::Zero(n);
        e[j] = 1.0;
        M.col(j) = op(StepFn(g, e)).values().matrix();
    }
    return M;
}

double l2_norm_dense(const Operator& op, const Grid& g) {
    // ||f||_2 = h^{1/2} |f|, which cancels between numerator and denominator
    Eigen::MatrixXd M = dense_matrix(op, g);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0);
}

TestingConstants testing_constants(const SparseFamily& S, const CoefSeq& tau, const StepFn& sigma, const StepFn& u,
                                   double p) {
    if (!(p > 1.0)) throw std::invalid_argument("testing_constants: p must exceed 1");
    if (tau.size() != S.size()) throw std::invalid_argument("testing_constants: tau misaligned with S");
    double q = p / (p - 1.0);
    TestingConstants out;
    for (const auto& R : S.cubes) {
        double sR = integrate(sigma, R), uR = integrate(u, R);
        if (sR <= 0.0 || uR <= 0.0) {
            ++out.skipped;
            continue;
        }
        out.t_out = std::max(out.t_out, lp_norm(apply_TStau(S, tau, sigma, R), p, &u) / std::pow(sR, 1.0 / p));
        out.t_in = std::max(out.t_in, lp_norm(apply_TStau(S, tau, u, R), q, &sigma) / std::pow(uR, 1.0 / q));
    }
    return out;
}

double weak_norm(const StepFn& f, const StepFn& u, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("weak_norm: p must be positive");
    if ((u.values() <= 0.0).any()) throw std::invalid_argument("weak_norm: u must be positive");
    Index n = f.size();
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    const auto& fv = f.values();
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return std::abs(fv[a]) > std::abs(fv[b]); });
    double h = f.grid().cell_width(), mass = 0.0, best = 0.0;
    // the supremum over t just below each distinct level |f| = t_k
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double t = std::abs(fv[idx[k]]);
        if (t == 0.0) break;
        mass += u[idx[k]] * h;
        if (k + 1 < idx.size() && std::abs(fv[idx[k + 1]]) == t) continue;
        best = std::max(best, t * std::pow(mass, 1.0 / p));
    }
    return best;
}

} // namespace bumpkit
