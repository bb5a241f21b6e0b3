#include "bumpkit/bump.hpp"

#include "bumpkit/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace bumpkit {

namespace {

double conj(double p) { return p / (p - 1.0); }

void check_p(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("bump: p must exceed 1");
}

} // namespace

YoungFn alpha_bump(double p, double delta) {
    check_p(p);
    return YoungFn::power_log(p, p - 1.0 + delta);
}

YoungFn beta_bump(double p, int m, double delta) {
    check_p(p);
    double q = conj(p);
    return YoungFn::power_log(q, (m + 1) * q - 1.0 + delta);
}

YoungFn gamma_bump(double p, int m, double delta) {
    check_p(p);
    double q = conj(p);
    return YoungFn::power_log(q, m * (q + delta));
}

YoungFn psi_bump(double p, int m, double eps) {
    check_p(p);
    double q = conj(p);
    return YoungFn::power_log(q, std::max((m + 1) * q - 1.0, m * q + 1.0) + eps);
}

BumpSpec bump_preset(const std::string& name, double p, int m, double delta, double eps) {
    check_p(p);
    if (m < 0) throw std::invalid_argument("bump: m must be >= 0");
    double q = conj(p);
    BumpSpec s;
    s.p = p;
    s.m = m;
    s.preset = name;
    if (name == "ap") {
        s.A = YoungFn::power(p);
        s.B = YoungFn::power(q);
    } else if (name == "bump_conjecture") {
        s.A = alpha_bump(p, delta);
        s.B = alpha_bump(q, delta);
    } else if (name == "stco_pair") {
        s.A = alpha_bump(p, delta);
        s.B = beta_bump(p, m, delta);
    } else if (name == "sepbump_thm") {
        // the gamma term that separates the theorem from the conjecture
        s.A = alpha_bump(p, delta);
        s.B = gamma_bump(p, m, delta);
    } else if (name == "corpc") {
        // one pair dominating both terms of the corollary
        if (m < 1) throw std::invalid_argument("corpc preset needs m >= 1");
        s.A = psi_bump(q, m, eps);
        s.B = psi_bump(p, m, eps);
    } else if (name == "necbump") {
        s.A = YoungFn::power(p);
        s.B = YoungFn::power_log(q, m * q);
    } else if (name == "recond") {
        s.form = BumpForm::sigma;
        s.A = YoungFn::power(1.0);
        s.B = YoungFn::lin_log((m + 1) * q - 1.0 + delta);
    } else if (name == "k2") {
        s.form = BumpForm::sigma;
        s.A = YoungFn::lin_log(p - 1.0 + delta);
        s.B = YoungFn::lin_log(m * (q + delta));
    } else {
        throw std::invalid_argument("unknown bump preset '" + name + "'");
    }
    return s;
}

std::vector<BumpSpec> theorem_terms(const std::string& theorem, double p, int m, double delta, double eps) {
    check_p(p);
    double q = conj(p);
    auto term = [&](YoungFn A, YoungFn B) {
        BumpSpec s;
        s.A = std::move(A);
        s.B = std::move(B);
        s.p = p;
        s.m = m;
        s.preset = theorem;
        return s;
    };
    if (theorem == "extbctbm")
        return {term(alpha_bump(p, delta), beta_bump(p, m, delta)), term(beta_bump(q, m, delta), alpha_bump(q, delta))};
    if (theorem == "sepbump_thm")
        return {term(YoungFn::power(p), beta_bump(p, m, delta)), term(alpha_bump(p, delta), gamma_bump(p, m, delta))};
    if (theorem == "sepbumex")
        return {term(YoungFn::power(p), beta_bump(p, m, delta)), term(alpha_bump(p, delta), gamma_bump(p, m, delta)),
                term(beta_bump(q, m, delta), YoungFn::power(q)), term(gamma_bump(q, m, delta), alpha_bump(q, delta))};
    if (theorem == "corpc") {
        if (m < 1) throw std::invalid_argument("corpc needs m >= 1");
        return {term(YoungFn::power(p), psi_bump(p, m, eps)), term(psi_bump(q, m, eps), YoungFn::power(q))};
    }
    throw std::invalid_argument("unknown theorem '" + theorem + "'");
}

nlohmann::ordered_json to_json(const BumpReport& r) {
    nlohmann::ordered_json j;
    j["value"] = r.value;
    j["argmax"] = {{"start", r.argmax.start}, {"len", r.argmax.len}};
    j["mode"] = to_string(r.mode);
    auto prof = nlohmann::ordered_json::array();
    for (const auto& s : r.profile) prof.push_back({{"len", s.len}, {"value", s.value}});
    j["profile"] = std::move(prof);
    return j;
}

namespace {

template <class Eval>
BumpReport scan(const Grid& g, ScanMode mode, Eval&& eval) {
    auto intervals = enumerate_within({0, g.cells()}, mode);
    std::vector<double> vals(intervals.size());
    parallel_for(intervals.size(), [&](std::size_t i) { vals[i] = eval(intervals[i]); });
    BumpReport rep;
    rep.mode = mode;
    rep.argmax = intervals.front();
    rep.value = -1.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& Q = intervals[i];
        if (rep.profile.empty() || rep.profile.back().len != Q.len) rep.profile.push_back({Q.len, vals[i]});
        rep.profile.back().value = std::max(rep.profile.back().value, vals[i]);
        if (vals[i] > rep.value) {
            rep.value = vals[i];
            rep.argmax = Q;
        }
    }
    return rep;
}

} // namespace

BumpReport bump_constant(const StepFn& lam, const StepFn& mu, const BumpSpec& spec, ScanMode mode) {
    if (!(lam.grid() == mu.grid())) throw std::invalid_argument("bump_constant: grids differ");
    if (lam.is_signed() || mu.is_signed()) throw std::invalid_argument("bump_constant: lam, mu must be >= 0");
    check_p(spec.p);
    double eb = spec.form == BumpForm::sigma ? spec.p - 1.0 : 1.0;
    return scan(lam.grid(), mode, [&](const IntervalRef& Q) {
        double a = luxemburg_norm(lam, Q, spec.A);
        if (a == 0.0) return 0.0;
        double b = luxemburg_norm(mu, Q, spec.B);
        return a * (eb == 1.0 ? b : std::pow(b, eb));
    });
}

BumpReport bump_for_weights(const StepFn& u, const StepFn& v, const BumpSpec& spec, ScanMode mode) {
    if ((u.values() <= 0.0).any() || (v.values() <= 0.0).any())
        throw std::invalid_argument("bump_for_weights: weights must be positive");
    double p = spec.p, q = conj(p);
    if (spec.form == BumpForm::sigma) return bump_constant(u, v.pow(1.0 - q), spec, mode);
    return bump_constant(u.pow(1.0 / p), v.pow(-1.0 / p), spec, mode);
}

NecessaryReport necessary_constant(const StepFn& u, const StepFn& v, double p, int m, ScanMode mode) {
    NecessaryReport out;
    out.pair = bump_for_weights(u, v, bump_preset("necbump", p, m), mode);
    double q = conj(p);
    StepFn sigma = v.pow(1.0 - q);
    PrefixSums pu(u), ps(sigma);
    const auto& sv = sigma.values();
    double h = u.grid().cell_width();
    out.sigma_form = scan(u.grid(), mode, [&](const IntervalRef& Q) {
        double sQ = ps.average(Q);
        double acc = 0.0;
        for (Index i = Q.start; i < Q.end(); ++i) acc += sv[i] * std::pow(std::log(sv[i] / sQ + M_E), m * q);
        acc *= h / Q.measure(u.grid());
        return pu.average(Q) * std::pow(acc, p - 1.0);
    });
    out.ratio = std::pow(out.pair.value, p) / out.sigma_form.value;
    out.in_band = out.ratio >= 1.0 / 32.0 && out.ratio <= 32.0;
    return out;
}

TestingVariant parse_testing_variant(const std::string& s) {
    if (s == "lacey") return TestingVariant::lacey;
    if (s == "li") return TestingVariant::li;
    if (s == "estli") return TestingVariant::estli;
    throw std::invalid_argument("unknown testing variant '" + s + "'");
}

double testing_functional(const SparseFamily& S, const StepFn& u, const StepFn& sigma, double p, const YoungFn& A,
                          TestingVariant variant, const std::vector<double>& lambdas) {
    check_p(p);
    double q = conj(p);
    if (variant == TestingVariant::estli) {
        if (lambdas.size() != S.size()) throw std::invalid_argument("estli: one lambda per cube required");
        for (double l : lambdas)
            if (!(l >= 1.0)) throw std::invalid_argument("estli: lambda_Q must be >= 1");
    }
    auto phi = [](double t) { return std::log(M_E + t); };
    PrefixSums pu(u), ps(sigma);
    std::vector<double> vals(S.size());
    if (variant == TestingVariant::lacey) {
        ComplementaryFn Abar(A);
        StepFn s1 = sigma.pow(1.0 / q);
        parallel_for(S.size(), [&](std::size_t k) {
            const auto& Q = S.cubes[k];
            double sQ = ps.average(Q);
            if (sQ <= 0.0) return;
            double nb = luxemburg_norm(s1, Q, Abar);
            double r = nb / std::pow(sQ, 1.0 / q);
            vals[k] = std::pow(pu.average(Q), 1.0 / p) * nb * phi(r);
        });
    } else {
        StepFn s1 = sigma.pow(1.0 / p);
        parallel_for(S.size(), [&](std::size_t k) {
            const auto& Q = S.cubes[k];
            double sQ = ps.average(Q);
            if (sQ <= 0.0) return;
            double na = luxemburg_norm(s1, Q, A);
            double r = std::pow(sQ, 1.0 / p) / na;
            double v = std::pow(pu.average(Q), 1.0 / p) * sQ / na * phi(r);
            if (variant == TestingVariant::estli) v *= lambdas[k] * phi(lambdas[k]);
            vals[k] = v;
        });
    }
    double best = 0.0;
    for (double v : vals) best = std::max(best, v);
    return best;
}

std::vector<double> estli_lambdas(const SparseFamily& S, const StepFn& sigma, int m, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("estli_lambdas: r must exceed 1");
    double rq = conj(r);
    YoungFn L = YoungFn::lin_log(m * rq);
    PrefixSums ps(sigma);
    std::vector<double> out(S.size());
    for (std::size_t k = 0; k < S.size(); ++k) {
        double sQ = ps.average(S.cubes[k]);
        double l = sQ > 0 ? std::pow(luxemburg_norm(sigma, S.cubes[k], L) / sQ, 1.0 / rq) : 1.0;
        out[k] = std::max(1.0, l);
    }
    return out;
}

} // namespace bumpkit
