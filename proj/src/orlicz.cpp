#include "bumpkit/orlicz.hpp"

#include <algorithm>
#include <deque>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bumpkit {

namespace {

constexpr double kLn10 = 2.302585092994046;

double interp_loglog(const std::vector<double>& lx, const std::vector<double>& ly, double x) {
    std::size_t n = lx.size();
    std::size_t j;
    if (x <= lx.front())
        j = 0;
    else if (x >= lx.back())
        j = n - 2;
    else
        j = static_cast<std::size_t>(std::upper_bound(lx.begin(), lx.end(), x) - lx.begin()) - 1;
    double w = (x - lx[j]) / (lx[j + 1] - lx[j]);
    return ly[j] + w * (ly[j + 1] - ly[j]);
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace

YoungFn::YoungFn(Kind k) : kind_(std::move(k)) {
    if (auto* a = std::get_if<PowerLog>(&kind_)) {
        if (!(a->p >= 1.0) || !(a->alpha >= 0.0)) throw std::invalid_argument("PowerLog needs p >= 1, alpha >= 0");
        if (a->alpha == 0.0) power_ = a->p;
    } else if (auto* b = std::get_if<PowerOverLog>(&kind_)) {
        if (!(b->p > 1.0) || !(b->mu > 0.0)) throw std::invalid_argument("PowerOverLog needs p > 1, mu > 0");
    } else if (auto* c = std::get_if<LinLog>(&kind_)) {
        if (!(c->alpha >= 0.0)) throw std::invalid_argument("LinLog needs alpha >= 0");
        if (c->alpha == 0.0) power_ = 1.0;
    } else {
        auto& tab = std::get<Tabulated>(kind_);
        if (tab.t.size() < 2 || tab.t.size() != tab.y.size())
            throw std::invalid_argument("Tabulated needs at least two (t, y) samples");
        for (std::size_t i = 0; i < tab.t.size(); ++i) {
            if (!(tab.t[i] > 0) || !(tab.y[i] > 0)) throw std::invalid_argument("Tabulated samples must be positive");
            if (i > 0 && !(tab.t[i] > tab.t[i - 1] && tab.y[i] > tab.y[i - 1]))
                throw std::invalid_argument("Tabulated samples must be strictly increasing");
            log_t_.push_back(std::log(tab.t[i]));
            log_y_.push_back(std::log(tab.y[i]));
        }
        if ((log_y_[1] - log_y_[0]) / (log_t_[1] - log_t_[0]) < 1.0)
            throw std::invalid_argument("Tabulated: slope below 1 near 0 is not a Young function");
    }

    if (std::holds_alternative<PowerLog>(kind_) || std::holds_alternative<PowerOverLog>(kind_)) {
        // second differences on a log grid
        const int n = 241;
        double prev_t = 0, prev_y = 0, prev_slope = -1;
        for (int i = 0; i < n; ++i) {
            double t = std::exp((-12.0 + 24.0 * i / (n - 1)) * kLn10);
            double y = (*this)(t);
            if (i > 0) {
                double slope = (y - prev_y) / (t - prev_t);
                if (prev_slope >= 0 && slope < prev_slope * (1 - 1e-9))
                    throw std::invalid_argument(name() + " is not convex on the sampled range");
                prev_slope = slope;
            }
            prev_t = t;
            prev_y = y;
        }
    }
}

YoungFn YoungFn::parse(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    auto num = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            double v = std::stod(parts.at(i), &used);
            if (used != parts[i].size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("bad Young function '" + spec + "'");
        }
    };
    if (parts.size() == 3 && parts[0] == "plog") return power_log(num(1), num(2));
    if (parts.size() == 3 && parts[0] == "poverlog") return power_over_log(num(1), num(2));
    if (parts.size() == 2 && parts[0] == "linlog") return lin_log(num(1));
    throw std::invalid_argument("bad Young function '" + spec + "' (expected plog:p:alpha, poverlog:p:mu, linlog:alpha)");
}

std::string YoungFn::name() const {
    if (auto* a = std::get_if<PowerLog>(&kind_)) return "plog:" + fmt(a->p) + ":" + fmt(a->alpha);
    if (auto* b = std::get_if<PowerOverLog>(&kind_)) return "poverlog:" + fmt(b->p) + ":" + fmt(b->mu);
    if (auto* c = std::get_if<LinLog>(&kind_)) return "linlog:" + fmt(c->alpha);
    return "table:" + std::to_string(std::get<Tabulated>(kind_).t.size());
}

double YoungFn::operator()(double t) const {
    if (t < 0 || std::isnan(t)) throw std::domain_error("Young function evaluated at negative t");
    if (t == 0.0) return 0.0;
    if (auto* a = std::get_if<PowerLog>(&kind_)) {
        double base = a->p == 1.0 ? t : a->p == 2.0 ? t * t : std::pow(t, a->p);
        return a->alpha == 0.0 ? base : base * std::pow(std::log(std::numbers::e + t), a->alpha);
    }
    if (auto* b = std::get_if<PowerOverLog>(&kind_))
        return std::pow(t, b->p) / std::pow(std::log(std::numbers::e + t), 1.0 + b->mu);
    if (auto* c = std::get_if<LinLog>(&kind_))
        return c->alpha == 0.0 ? t : t * std::pow(std::log(std::numbers::e + t), c->alpha);
    return std::exp(interp_loglog(log_t_, log_y_, std::log(t)));
}

double YoungFn::log_eval(double x) const {
    if (std::isinf(x) && x < 0) return -std::numeric_limits<double>::infinity();
    if (auto* a = std::get_if<PowerLog>(&kind_))
        return a->p * x + (a->alpha == 0.0 ? 0.0 : a->alpha * std::log(log_e_plus_exp(x)));
    if (auto* b = std::get_if<PowerOverLog>(&kind_)) return b->p * x - (1.0 + b->mu) * std::log(log_e_plus_exp(x));
    if (auto* c = std::get_if<LinLog>(&kind_))
        return x + (c->alpha == 0.0 ? 0.0 : c->alpha * std::log(log_e_plus_exp(x)));
    return interp_loglog(log_t_, log_y_, x);
}

double YoungFn::inverse(double y) const {
    if (y < 0 || std::isnan(y)) throw std::domain_error("Young inverse of negative value");
    if (y == 0.0) return 0.0;
    if (is_power()) return power_ == 1.0 ? y : std::pow(y, 1.0 / power_);
    double ly = std::log(y);
    double lo = ly, hi = ly;
    double step = 1.0;
    while (log_eval(lo) > ly) lo -= (step *= 2);
    step = 1.0;
    while (log_eval(hi) < ly) hi += (step *= 2);
    while (hi - lo > 1e-14 * std::max(1.0, std::abs(hi))) {
        double mid = 0.5 * (lo + hi);
        if (log_eval(mid) < ly)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double young_eval(const YoungFn& phi, double t) { return phi(t); }
double young_inverse(const YoungFn& phi, double y) { return phi.inverse(y); }

namespace {

constexpr int kSGrid = 4097;
constexpr double kSLo = -12.0 * kLn10, kSHi = 12.0 * kLn10;

struct Legendre {
    const YoungFn& phi;
    double t;
    double operator()(double x) const {
        double s = std::exp(x);
        double v = phi(s);
        return std::isfinite(v) ? s * t - v : -std::numeric_limits<double>::infinity();
    }
};

Complementary refine(const Legendre& g, double a, double b) {
    for (int it = 0; it < 90; ++it) {
        double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
        if (g(m1) < g(m2))
            a = m1;
        else
            b = m2;
    }
    double x = 0.5 * (a + b);
    double v = g(x);
    if (v > kSaturation) return {kSaturation, std::exp(x), true};
    return {std::max(v, 0.0), std::exp(x), false};
}

} // namespace

Complementary complementary_eval(const YoungFn& phi, double t) {
    if (t < 0 || std::isnan(t)) throw std::domain_error("complementary function at negative t");
    if (t == 0.0) return {0.0, 0.0, false};
    Legendre g{phi, t};
    double lo = kSLo, hi = kSHi;
    const double h = (kSHi - kSLo) / (kSGrid - 1);
    for (int window = 0; window < 40; ++window) {
        int best = 0;
        double bv = g(lo);
        for (int k = 1; k < kSGrid; ++k) {
            double v = g(lo + k * h);
            if (v > bv) {
                bv = v;
                best = k;
            }
        }
        if (bv > kSaturation) return {kSaturation, std::exp(lo + best * h), true};
        if (best == kSGrid - 1) {
            if (hi > 690.0) return {kSaturation, std::exp(hi), true};
            lo = hi - h;
            hi = lo + (kSGrid - 1) * h;
            continue;
        }
        if (best == 0 && bv > 0 && lo > -690.0) {
            hi = lo + h;
            lo = hi - (kSGrid - 1) * h;
            continue;
        }
        if (bv <= 0 && best == 0) return {0.0, 0.0, false};
        double x = lo + best * h;
        return refine(g, x - h, x + h);
    }
    return {kSaturation, std::exp(hi), true};
}

ComplementaryFn::ComplementaryFn(YoungFn base) : base_(std::move(base)) {
    // slope of Phi at 0: Phi-bar vanishes below it
    double eps = 1e-200;
    zero_below_ = base_(eps) / eps;
    if (zero_below_ < 1e-100) zero_below_ = 0.0;

    const int m = 4097;
    log_t0_ = -12.0 * kLn10;
    dlog_ = 24.0 * kLn10 / (m - 1);
    values_.assign(m, 0.0);
    const double h = (kSHi - kSLo) / (kSGrid - 1);
    bool have_x = false;
    double x = 0.0;
    for (int j = 0; j < m; ++j) {
        double t = std::exp(log_t0_ + j * dlog_);
        if (t <= zero_below_) continue;
        if (!have_x) {
            auto c = complementary_eval(base_, t);
            if (c.saturated) {
                std::fill(values_.begin() + j, values_.end(), std::numeric_limits<double>::infinity());
                break;
            }
            values_[j] = c.value;
            if (c.value > 0) {
                x = std::log(c.argmax);
                have_x = true;
            }
            continue;
        }
        Legendre g{base_, t};
        double gx = g(x);
        while (g(x + h) > gx && x < 690.0) {
            x += h;
            gx = g(x);
        }
        while (g(x - h) > gx && x > -690.0) {
            x -= h;
            gx = g(x);
        }
        auto c = refine(g, x - h, x + h);
        if (c.saturated || x >= 690.0) {
            std::fill(values_.begin() + j, values_.end(), std::numeric_limits<double>::infinity());
            break;
        }
        values_[j] = c.value;
        x = std::log(c.argmax);
    }
}

double ComplementaryFn::operator()(double t) const {
    if (t < 0 || std::isnan(t)) throw std::domain_error("complementary function at negative t");
    if (t <= zero_below_) return 0.0;
    const int m = static_cast<int>(values_.size());
    double u = (std::log(t) - log_t0_) / dlog_;
    int j = static_cast<int>(std::floor(u));
    j = std::clamp(j, 0, m - 2);
    double w = u - j;
    double a = values_[j], b = values_[j + 1];
    if (std::isinf(b)) {
        if (std::isinf(a) || w > 0) return std::numeric_limits<double>::infinity();
        return a;
    }
    if (a <= 0.0) {
        if (b <= 0.0) return 0.0;
        // linear in t just above the threshold
        double ta = std::exp(log_t0_ + j * dlog_), tb = std::exp(log_t0_ + (j + 1) * dlog_);
        double lo = std::max(ta, zero_below_);
        return t <= lo ? 0.0 : b * std::min(1.0, (t - lo) / (tb - lo));
    }
    return std::exp(std::log(a) + w * (std::log(b) - std::log(a)));
}

double ComplementaryFn::inverse(double y) const {
    if (y < 0 || std::isnan(y)) throw std::domain_error("complementary inverse of negative value");
    if (y == 0.0) return zero_below_;
    // bracket from the table, then safeguarded Newton on exact values (derivative = argmax s)
    double a = std::max(zero_below_, 0.0), b = std::exp(log_t0_);
    while (!((*this)(b) >= y)) {
        a = b;
        b *= 2;
        if (b > 1e300) return std::numeric_limits<double>::infinity();
    }
    double t = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        auto c = complementary_eval(base_, t);
        double r = c.value - y;
        if (r > 0 || c.saturated)
            b = t;
        else
            a = t;
        double next = (c.argmax > 0 && !c.saturated) ? t - r / c.argmax : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - t) <= 1e-14 * t || b - a <= 1e-15 * b) return next;
        t = next;
    }
    return t;
}

double luxemburg_norm(std::span<const double> values, const YoungFn& phi) {
    if (values.empty()) return 0.0;
    if (phi.is_power()) {
        double q = phi.power(), acc = 0.0;
        for (double v : values) acc += q == 1.0 ? std::abs(v) : q == 2.0 ? v * v : std::pow(std::abs(v), q);
        acc /= static_cast<double>(values.size());
        return q == 1.0 ? acc : q == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / q);
    }
    return luxemburg_norm_with(values, phi);
}

double luxemburg_norm(std::span<const double> values, std::span<const double> measures, const YoungFn& phi) {
    if (values.size() != measures.size()) throw std::invalid_argument("luxemburg_norm: size mismatch");
    if (phi.is_power()) {
        double q = phi.power(), acc = 0.0, total = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            acc += measures[i] * std::pow(std::abs(values[i]), q);
            total += measures[i];
        }
        return total > 0 ? std::pow(acc / total, 1.0 / q) : 0.0;
    }
    return luxemburg_norm_with(values, measures, phi);
}

double luxemburg_norm(const StepFn& f, const IntervalRef& I, const YoungFn& phi) {
    check_interval(f.grid(), I);
    return luxemburg_norm(std::span<const double>(f.values().data() + I.start, static_cast<std::size_t>(I.len)), phi);
}

double luxemburg_norm(const StepFn& f, const IntervalRef& I, const ComplementaryFn& phi) {
    check_interval(f.grid(), I);
    return luxemburg_norm_with(std::span<const double>(f.values().data() + I.start, static_cast<std::size_t>(I.len)),
                               phi);
}

double log_luxemburg_norm(std::span<const double> log_values, std::span<const double> log_measures,
                          const YoungFn& phi) {
    if (log_values.size() != log_measures.size()) throw std::invalid_argument("log_luxemburg_norm: size mismatch");
    double mx = -std::numeric_limits<double>::infinity();
    double log_total = -std::numeric_limits<double>::infinity();
    auto lse = [](double a, double b) {
        if (a < b) std::swap(a, b);
        return std::isinf(b) ? a : a + std::log1p(std::exp(b - a));
    };
    for (std::size_t i = 0; i < log_values.size(); ++i) {
        log_total = lse(log_total, log_measures[i]);
        if (!std::isinf(log_measures[i])) mx = std::max(mx, log_values[i]);
    }
    if (std::isinf(mx)) return mx;
    auto g = [&](double s) {
        // log-sum-exp of log m_i + log Phi(e^{l_i - s})
        double top = -std::numeric_limits<double>::infinity();
        std::vector<double> terms(log_values.size());
        for (std::size_t i = 0; i < log_values.size(); ++i) {
            terms[i] = std::isinf(log_values[i]) ? -std::numeric_limits<double>::infinity()
                                                  : log_measures[i] + phi.log_eval(log_values[i] - s);
            top = std::max(top, terms[i]);
        }
        if (std::isinf(top)) return top;
        double acc = 0.0;
        for (double t : terms) acc += std::exp(t - top);
        return top + std::log(acc) - log_total;
    };
    return solve_log_gauge(g, mx);
}

namespace {

// out[x] = max over windows of length len containing x of w[s]
void sliding_max_into(const std::vector<double>& w, Index len, Eigen::ArrayXd& out) {
    Index n = out.size();
    std::deque<Index> dq;
    Index count = static_cast<Index>(w.size());
    for (Index x = 0; x < n; ++x) {
        if (x < count) {
            while (!dq.empty() && w[dq.back()] <= w[x]) dq.pop_back();
            dq.push_back(x);
        }
        while (!dq.empty() && dq.front() < x - len + 1) dq.pop_front();
        if (!dq.empty()) out[x] = std::max(out[x], w[dq.front()]);
    }
}

template <class WindowValue>
StepFn window_sup(const Grid& g, ScanMode mode, WindowValue&& value) {
    Index n = g.cells();
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
    for (Index len = n; len >= 1; len >>= 1) {
        if (mode == ScanMode::dyadic) {
            for (Index s = 0; s < n; s += len) {
                double v = value(IntervalRef{s, len});
                out.segment(s, len) = out.segment(s, len).max(v);
            }
        } else {
            std::vector<double> w(static_cast<std::size_t>(n - len + 1));
            for (Index s = 0; s + len <= n; ++s) w[s] = value(IntervalRef{s, len});
            sliding_max_into(w, len, out);
        }
    }
    return StepFn(g, std::move(out));
}

} // namespace

StepFn orlicz_maximal(const StepFn& f, const YoungFn& phi, ScanMode mode) {
    if (f.is_signed()) throw std::invalid_argument("orlicz_maximal needs f >= 0");
    if (phi.is_power()) {
        double q = phi.power();
        PrefixSums ps(q == 1.0 ? f : f.pow(q));
        return window_sup(f.grid(), mode, [&](const IntervalRef& I) {
            double a = std::max(ps.average(I), 0.0);
            return q == 1.0 ? a : std::pow(a, 1.0 / q);
        });
    }
    return window_sup(f.grid(), mode, [&](const IntervalRef& I) { return luxemburg_norm(f, I, phi); });
}

StepFn hardy_littlewood(const StepFn& f, ScanMode mode) { return orlicz_maximal(f.abs(), YoungFn::power(1.0), mode); }

StepFn iterated_maximal(const StepFn& f, int k, ScanMode mode) {
    if (k < 0) throw std::invalid_argument("iterated_maximal: k < 0");
    StepFn out = f.abs();
    for (int i = 0; i < k; ++i) out = hardy_littlewood(out, mode);
    return out;
}

const char* to_string(BpVerdict v) {
    switch (v) {
    case BpVerdict::finite: return "finite";
    case BpVerdict::divergent: return "divergent";
    default: return "borderline";
    }
}

BpResult bp_integral(const YoungFn& phi, double p, double log_T) {
    if (!(p > 1.0)) throw std::invalid_argument("bp_integral: p must exceed 1");
    if (!(log_T >= std::log(1e6))) throw std::invalid_argument("bp_integral: truncation below 1e6");
    // integrand in x = log t
    auto log_h = [&](double x) { return phi.log_eval(x) - p * x; };
    auto h = [&](double x) { return std::exp(log_h(x)); };

    // x = e^y - 1 spreads nodes over both the head and the long tail
    const int n = 40000;
    double Y = std::log1p(log_T);
    double dy = Y / n, value = 0.0;
    for (int i = 0; i <= n; ++i) {
        double y = i * dy, x = std::expm1(y);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        value += w * h(x) * std::exp(y);
    }
    value *= dy / 3.0;

    const int m = 400;
    double a = log_T - kLn10, dx = kLn10 / m, tail = 0.0;
    for (int i = 0; i <= m; ++i) {
        double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        tail += w * h(a + i * dx);
    }
    tail *= dx / 3.0;

    double gamma = -(log_h(log_T) - log_h(0.5 * log_T)) / std::log(2.0);
    BpVerdict verdict;
    if (std::abs(gamma - 1.0) < 0.05)
        verdict = BpVerdict::borderline;
    else if (std::isfinite(value) && tail < 1e-6 * value)
        verdict = BpVerdict::finite;
    else
        verdict = BpVerdict::divergent;
    return {value, tail, gamma, verdict};
}

} // namespace bumpkit
