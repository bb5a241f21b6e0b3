#include "bumpkit/sparse.hpp"

#include "bumpkit/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace bumpkit {

namespace {

bool forest_order(const IntervalRef& a, const IntervalRef& b) {
    return a.len != b.len ? a.len > b.len : a.start < b.start;
}

Index quota(double alpha, Index len) {
    return static_cast<Index>(std::ceil(alpha * static_cast<double>(len) - 1e-12));
}

std::vector<IntervalRef> runs_of(const std::vector<Index>& cells) {
    std::vector<IntervalRef> out;
    for (Index c : cells) {
        if (!out.empty() && out.back().end() == c)
            ++out.back().len;
        else
            out.push_back({c, 1});
    }
    return out;
}

} // namespace

int SparseFamily::index_of(const IntervalRef& Q) const {
    auto it = std::lower_bound(cubes.begin(), cubes.end(), Q, forest_order);
    if (it != cubes.end() && *it == Q) return static_cast<int>(it - cubes.begin());
    return -1;
}

SparseFamily make_family(const Grid& g, std::vector<IntervalRef> cubes, std::vector<std::vector<IntervalRef>> witness,
                         double alpha) {
    if (!witness.empty() && witness.size() != cubes.size())
        throw std::invalid_argument("make_family: witness count differs from cube count");
    if (witness.empty()) witness.resize(cubes.size());
    for (auto& Q : cubes) {
        check_interval(g, Q);
        if (!Q.is_dyadic()) throw std::invalid_argument("make_family: cube is not dyadic");
    }
    std::vector<std::size_t> order(cubes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return forest_order(cubes[a], cubes[b]); });

    SparseFamily S;
    S.grid = g;
    S.alpha = alpha;
    for (auto i : order) {
        S.cubes.push_back(cubes[i]);
        S.witness.push_back(std::move(witness[i]));
    }
    S.parent.assign(S.cubes.size(), -1);
    S.children.assign(S.cubes.size(), {});
    std::map<std::pair<Index, Index>, int> seen;
    for (std::size_t i = 0; i < S.cubes.size(); ++i) {
        IntervalRef a = S.cubes[i];
        while (true) {
            auto it = seen.find({a.start, a.len});
            if (it != seen.end()) {
                S.parent[i] = it->second;
                S.children[it->second].push_back(static_cast<int>(i));
                break;
            }
            if (a.len >= g.cells()) break;
            Index len = a.len * 2;
            a = {a.start / len * len, len};
        }
        seen[{S.cubes[i].start, S.cubes[i].len}] = static_cast<int>(i);
    }
    return S;
}

bool verify_sparsity(const SparseFamily& S) {
    if (!(S.alpha > 0.0 && S.alpha <= 1.0) || S.witness.size() != S.cubes.size()) return false;
    std::vector<char> owned(static_cast<std::size_t>(S.grid.cells()), 0);
    for (std::size_t i = 0; i < S.cubes.size(); ++i) {
        const auto& Q = S.cubes[i];
        if (Q.start < 0 || Q.len < 1 || Q.end() > S.grid.cells() || !Q.is_dyadic()) return false;
        Index count = 0;
        for (const auto& r : S.witness[i]) {
            if (r.len < 1 || !Q.contains(r)) return false;
            for (Index c = r.start; c < r.end(); ++c) {
                if (owned[c]) return false;
                owned[c] = 1;
            }
            count += r.len;
        }
        if (static_cast<double>(count) < S.alpha * static_cast<double>(Q.len)) return false;
    }
    return true;
}

bool assign_witnesses(SparseFamily& S, double alpha) {
    std::vector<char> taken(static_cast<std::size_t>(S.grid.cells()), 0);
    std::vector<std::vector<IntervalRef>> wit(S.cubes.size());
    for (std::size_t k = S.cubes.size(); k-- > 0;) {
        const auto& Q = S.cubes[k];
        Index need = quota(alpha, Q.len);
        std::vector<Index> got;
        for (Index c = Q.start; c < Q.end() && static_cast<Index>(got.size()) < need; ++c)
            if (!taken[c]) got.push_back(c);
        if (static_cast<Index>(got.size()) < need) return false;
        for (Index c : got) taken[c] = 1;
        wit[k] = runs_of(got);
    }
    S.witness = std::move(wit);
    S.alpha = alpha;
    return true;
}

double max_feasible_alpha(const SparseFamily& S) {
    auto feasible = [&](double alpha) {
        std::vector<Index> used(S.cubes.size(), 0); // cells claimed inside the subtree
        for (std::size_t k = S.cubes.size(); k-- > 0;) {
            Index below = 0;
            for (int c : S.children[k]) below += used[c];
            Index need = quota(alpha, S.cubes[k].len);
            if (S.cubes[k].len - below < need) return false;
            used[k] = below + need;
        }
        return true;
    };
    double lo = 0.0, hi = 1.0;
    if (feasible(1.0)) return 1.0;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

SparseFamily build_sparse_cz(const StepFn& f, const IntervalRef& root, double factor) {
    if (f.is_signed()) throw std::invalid_argument("build_sparse_cz needs f >= 0");
    if (!(factor > 1.0)) throw std::invalid_argument("build_sparse_cz: factor must exceed 1");
    check_interval(f.grid(), root);
    if (!root.is_dyadic()) throw std::invalid_argument("build_sparse_cz: root must be dyadic");
    PrefixSums ps(f);

    std::vector<IntervalRef> cubes;
    std::vector<std::vector<IntervalRef>> witness;
    std::vector<IntervalRef> work{root};
    while (!work.empty()) {
        IntervalRef Q = work.back();
        work.pop_back();
        double threshold = factor * ps.average(Q);
        std::vector<IntervalRef> picked;
        if (threshold > 0) {
            std::vector<IntervalRef> stack{Q};
            while (!stack.empty()) {
                IntervalRef P = stack.back();
                stack.pop_back();
                if (P.len == 1) continue;
                IntervalRef kids[2] = {{P.start + P.len / 2, P.len / 2}, {P.start, P.len / 2}};
                for (auto& C : kids) {
                    if (ps.average(C) > threshold)
                        picked.push_back(C);
                    else
                        stack.push_back(C);
                }
            }
        }
        std::sort(picked.begin(), picked.end());
        std::vector<IntervalRef> E;
        Index pos = Q.start;
        for (auto& P : picked) {
            if (P.start > pos) E.push_back({pos, P.start - pos});
            pos = P.end();
            work.push_back(P);
        }
        if (pos < Q.end()) E.push_back({pos, Q.end() - pos});
        cubes.push_back(Q);
        witness.push_back(std::move(E));
    }
    return make_family(f.grid(), std::move(cubes), std::move(witness), 1.0 - 1.0 / factor);
}

Augmented augment_family(const SparseFamily& S, const StepFn& b) {
    if (!(b.grid() == S.grid)) throw std::invalid_argument("augment_family: grid mismatch");
    PrefixSums pb(b);
    std::set<IntervalRef> have(S.cubes.begin(), S.cubes.end());
    std::vector<IntervalRef> work(S.cubes.begin(), S.cubes.end());
    std::vector<IntervalRef> all(S.cubes.begin(), S.cubes.end());
    std::size_t added = 0;
    while (!work.empty()) {
        IntervalRef Q = work.back();
        work.pop_back();
        double bQ = pb.average(Q);
        Eigen::ArrayXd d = (b.values().segment(Q.start, Q.len) - bQ).abs();
        double omega = d.mean();
        if (!(omega > 0)) continue;
        std::vector<double> acc(static_cast<std::size_t>(Q.len) + 1, 0.0);
        for (Index i = 0; i < Q.len; ++i) acc[i + 1] = acc[i] + d[i];
        auto avg = [&](const IntervalRef& P) { return (acc[P.end() - Q.start] - acc[P.start - Q.start]) / P.len; };
        std::vector<IntervalRef> stack{Q};
        while (!stack.empty()) {
            IntervalRef P = stack.back();
            stack.pop_back();
            if (P.len == 1) continue;
            for (IntervalRef C : {IntervalRef{P.start, P.len / 2}, IntervalRef{P.start + P.len / 2, P.len / 2}}) {
                if (avg(C) > 4.0 * omega) {
                    if (have.insert(C).second) {
                        all.push_back(C);
                        work.push_back(C);
                        ++added;
                    }
                } else {
                    stack.push_back(C);
                }
            }
        }
    }
    SparseFamily out = make_family(S.grid, std::move(all), {}, S.alpha);
    double alpha = std::min(S.alpha, max_feasible_alpha(out));
    if (!assign_witnesses(out, alpha)) throw std::logic_error("augment_family: witness assignment failed");
    return {std::move(out), added};
}

double oscillation_constant(const SparseFamily& S, const StepFn& b) {
    PrefixSums pb(b);
    std::size_t n = S.cubes.size();
    std::vector<double> mean(n), omega(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& Q = S.cubes[k];
        mean[k] = pb.average(Q);
        omega[k] = (b.values().segment(Q.start, Q.len) - mean[k]).abs().mean();
    }
    double scale = b.values().abs().maxCoeff();
    std::vector<std::vector<double>> D(n);
    double worst = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const auto& Q = S.cubes[k];
        D[k].assign(static_cast<std::size_t>(Q.len), omega[k]);
        for (int c : S.children[k]) {
            const auto& C = S.cubes[c];
            for (Index i = 0; i < C.len; ++i) D[k][C.start - Q.start + i] += D[c][i];
            std::vector<double>().swap(D[c]);
        }
        for (Index i = 0; i < Q.len; ++i) {
            double num = std::abs(b[Q.start + i] - mean[k]);
            if (num <= 1e-12 * scale) continue;
            double den = D[k][i];
            worst = std::max(worst, den > 0 ? num / den : std::numeric_limits<double>::infinity());
        }
    }
    return worst;
}

SparseFamily random_family(const Grid& g, int depth, double q, SplitMix64& rng, double alpha) {
    depth = std::min(depth, g.depth());
    std::vector<std::vector<char>> kept(depth + 1);
    for (int d = 0; d <= depth; ++d) {
        kept[d].resize(std::size_t{1} << d);
        for (auto& k : kept[d]) k = d == 0 || rng.uniform() < q;
    }
    std::vector<Index> used_child;
    std::vector<IntervalRef> cubes;
    for (int d = depth; d >= 0; --d) {
        Index len = g.cells() >> d;
        std::vector<Index> used(kept[d].size(), 0);
        for (std::size_t o = 0; o < kept[d].size(); ++o) {
            Index below = d < depth ? used_child[2 * o] + used_child[2 * o + 1] : 0;
            Index need = quota(alpha, len);
            if (kept[d][o] && len - below >= need) {
                cubes.push_back({static_cast<Index>(o) * len, len});
                below += need;
            }
            used[o] = below;
        }
        used_child = std::move(used);
    }
    SparseFamily S = make_family(g, std::move(cubes), {}, alpha);
    if (!assign_witnesses(S, alpha) || !verify_sparsity(S)) throw std::logic_error("random_family: repair failed");
    return S;
}

StepFn sum_indicators(const SparseFamily& S, const CoefSeq& a) {
    if (a.size() != S.cubes.size()) throw std::invalid_argument("coefficient count differs from cube count");
    Index n = S.grid.cells();
    std::vector<long double> diff(static_cast<std::size_t>(n) + 1, 0.0L);
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff[S.cubes[k].start] += a[k];
        diff[S.cubes[k].end()] -= a[k];
    }
    Eigen::ArrayXd v(n);
    long double run = 0.0L;
    bool neg = false;
    for (Index i = 0; i < n; ++i) {
        run += diff[i];
        v[i] = static_cast<double>(run);
        neg = neg || v[i] < 0;
    }
    return StepFn(S.grid, std::move(v), neg);
}

StepFn apply_AS(const SparseFamily& S, const StepFn& f) {
    PrefixSums ps(f);
    CoefSeq a(S.cubes.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = ps.average(S.cubes[k]);
    return sum_indicators(S, a);
}

StepFn apply_AS_eta_iter(const SparseFamily& S, const StepFn& eta, const StepFn& f, int m) {
    if (m < 0) throw std::invalid_argument("apply_AS_eta_iter: m < 0");
    StepFn out = f;
    for (int i = 0; i < m; ++i) out = out.with_values(eta.values() * apply_AS(S, out).values());
    return out;
}

StepFn apply_ALlogLm(const SparseFamily& S, const StepFn& f, int m) {
    if (m < 0) throw std::invalid_argument("apply_ALlogLm: m < 0");
    if (m == 0) return apply_AS(S, f);
    auto phi = YoungFn::lin_log(m);
    CoefSeq a(S.cubes.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = luxemburg_norm(f, S.cubes[k], phi);
    return sum_indicators(S, a);
}

StepFn apply_Tm(const SparseFamily& S, const StepFn& f, int m, bool adjoint) {
    if (m < 0) throw std::invalid_argument("apply_Tm: m < 0");
    PrefixSums ps(f);
    std::size_t n = S.cubes.size();
    CoefSeq w(n);
    if (!adjoint) {
        for (std::size_t k = 0; k < n; ++k) w[k] = ps.integral(S.cubes[k]);
        for (int step = 0; step < m; ++step) {
            CoefSeq next(w);
            for (std::size_t k = n; k-- > 0;)
                for (int c : S.children[k]) next[k] += next[c];
            w = std::move(next);
        }
        for (std::size_t k = 0; k < n; ++k) w[k] /= S.cubes[k].measure(S.grid);
    } else {
        for (std::size_t k = 0; k < n; ++k) w[k] = ps.average(S.cubes[k]);
        for (int step = 0; step < m; ++step) {
            CoefSeq next(w);
            for (std::size_t k = 0; k < n; ++k)
                if (S.parent[k] >= 0) next[k] += next[S.parent[k]];
            w = std::move(next);
        }
    }
    return sum_indicators(S, w);
}

StepFn apply_TStau(const SparseFamily& S, const CoefSeq& tau, const StepFn& f, const std::optional<IntervalRef>& R) {
    if (tau.size() != S.cubes.size()) throw std::invalid_argument("apply_TStau: tau size differs from family size");
    if (R && S.index_of(*R) < 0) throw std::invalid_argument("apply_TStau: R is not a cube of the family");
    PrefixSums ps(f);
    CoefSeq a(S.cubes.size(), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!R || R->contains(S.cubes[k])) a[k] = tau[k] * ps.average(S.cubes[k]);
    return sum_indicators(S, a);
}

nlohmann::ordered_json to_json(const SparseFamily& S) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < S.cubes.size(); ++k) {
        const auto& Q = S.cubes[k];
        int level = S.grid.depth() - (63 - __builtin_clzll(static_cast<unsigned long long>(Q.len)));
        nlohmann::ordered_json w = nlohmann::ordered_json::array();
        for (const auto& r : S.witness[k]) w.push_back({r.start, r.len});
        arr.push_back({{"level", level}, {"offset", Q.start / Q.len}, {"witness_ranges", w}});
    }
    return arr;
}

SparseFamily family_from_json(const Grid& g, const nlohmann::json& j) {
    std::vector<IntervalRef> cubes;
    std::vector<std::vector<IntervalRef>> wit;
    for (const auto& e : j) {
        cubes.push_back(dyadic_interval(g, e.at("level").get<int>(), e.at("offset").get<Index>()));
        std::vector<IntervalRef> w;
        for (const auto& r : e.at("witness_ranges")) w.push_back({r.at(0).get<Index>(), r.at(1).get<Index>()});
        wit.push_back(std::move(w));
    }
    SparseFamily S = make_family(g, std::move(cubes), std::move(wit));
    // the tightest alpha the witnesses certify
    double alpha = 1.0;
    for (std::size_t k = 0; k < S.cubes.size(); ++k) {
        Index c = 0;
        for (auto& r : S.witness[k]) c += r.len;
        alpha = std::min(alpha, static_cast<double>(c) / static_cast<double>(S.cubes[k].len));
    }
    S.alpha = alpha;
    return S;
}

} // namespace bumpkit
