#include "bumpkit/grid.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bumpkit {

Grid::Grid(int levels_, int span_) : levels(levels_), span(span_) {
    if (levels < 1 || span < 0 || levels + span > 30)
        throw std::invalid_argument("grid: need levels >= 1, span >= 0, levels + span <= 30");
}

bool IntervalRef::is_dyadic() const {
    return len > 0 && (len & (len - 1)) == 0 && start % len == 0;
}

IntervalRef dyadic_interval(const Grid& g, int depth, Index offset) {
    if (depth < 0 || depth > g.depth()) throw std::out_of_range("dyadic_interval: depth");
    Index len = g.cells() >> depth;
    if (offset < 0 || offset >= (Index{1} << depth)) throw std::out_of_range("dyadic_interval: offset");
    return {offset * len, len};
}

void check_interval(const Grid& g, const IntervalRef& I) {
    if (I.len < 1 || I.start < 0 || I.end() > g.cells())
        throw std::out_of_range("interval [" + std::to_string(I.start) + ", +" + std::to_string(I.len) +
                                ") outside grid of " + std::to_string(g.cells()) + " cells");
}

StepFn::StepFn(Grid g, Eigen::ArrayXd values, bool is_signed)
    : grid_(g), values_(std::move(values)), signed_(is_signed) {
    if (values_.size() != grid_.cells())
        throw std::invalid_argument("StepFn: value count does not match grid");
    if (!signed_ && (values_ < 0.0).any())
        throw std::invalid_argument("StepFn: negative value in unsigned step function");
}

StepFn StepFn::constant(const Grid& g, double c) {
    return StepFn(g, Eigen::ArrayXd::Constant(g.cells(), c), c < 0);
}

StepFn StepFn::indicator(const Grid& g, const IntervalRef& I, double height) {
    check_interval(g, I);
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.cells());
    v.segment(I.start, I.len).setConstant(height);
    return StepFn(g, std::move(v), height < 0);
}

StepFn StepFn::sample(const Grid& g, const std::function<double(double)>& f, bool is_signed) {
    Eigen::ArrayXd v(g.cells());
    for (Index i = 0; i < g.cells(); ++i) v[i] = f(g.center(i));
    return StepFn(g, std::move(v), is_signed);
}

StepFn StepFn::pow(double e) const {
    if (signed_) throw std::domain_error("StepFn::pow on signed function");
    Eigen::ArrayXd v = values_.pow(e);
    // 0^negative is a weight with an infinite value; keep zeros as zeros
    for (Index i = 0; i < v.size(); ++i)
        if (values_[i] == 0.0) v[i] = 0.0;
    return StepFn(grid_, std::move(v));
}

StepFn StepFn::with_values(Eigen::ArrayXd v) const {
    bool neg = (v < 0.0).any();
    return StepFn(grid_, std::move(v), signed_ || neg);
}

double integrate(const StepFn& f, const IntervalRef& I) {
    check_interval(f.grid(), I);
    return f.values().segment(I.start, I.len).sum() * f.grid().cell_width();
}

double integrate(const StepFn& f) { return f.values().sum() * f.grid().cell_width(); }

double average(const StepFn& f, const IntervalRef& I) {
    check_interval(f.grid(), I);
    return f.values().segment(I.start, I.len).mean();
}

double inner(const StepFn& f, const StepFn& g) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("inner: grid mismatch");
    return (f.values() * g.values()).sum() * f.grid().cell_width();
}

double lp_norm(const StepFn& f, double p, const StepFn* weight) {
    Eigen::ArrayXd a = f.values().abs().pow(p);
    if (weight) a *= weight->values();
    return std::pow(a.sum() * f.grid().cell_width(), 1.0 / p);
}

const char* to_string(ScanMode m) { return m == ScanMode::dyadic ? "dyadic" : "all_aligned"; }

ScanMode parse_scan_mode(const std::string& s) {
    if (s == "dyadic") return ScanMode::dyadic;
    if (s == "all_aligned" || s == "all-aligned") return ScanMode::all_aligned;
    throw std::invalid_argument("unknown scan mode '" + s + "'");
}

std::vector<IntervalRef> enumerate_within(const IntervalRef& R, ScanMode mode) {
    std::vector<IntervalRef> out;
    for (Index len = Index{1} << (63 - __builtin_clzll(static_cast<unsigned long long>(R.len))); len >= 1;
         len >>= 1) {
        if (mode == ScanMode::dyadic) {
            // dyadic relative to the global lattice
            Index first = (R.start + len - 1) / len * len;
            for (Index s = first; s + len <= R.end(); s += len) out.push_back({s, len});
        } else {
            for (Index s = R.start; s + len <= R.end(); ++s) out.push_back({s, len});
        }
    }
    return out;
}

std::vector<IntervalRef> enumerate_intervals(const Grid& g, ScanMode mode, std::size_t budget) {
    Index n = g.cells();
    if (mode == ScanMode::dyadic && budget < static_cast<std::size_t>(2 * n - 1))
        throw std::invalid_argument("enumerate_intervals: budget below the dyadic interval count");
    auto out = enumerate_within({0, n}, mode);
    if (out.size() > budget) out.resize(budget);
    return out;
}

PrefixSums::PrefixSums(const StepFn& f) : grid_(f.grid()), acc_(static_cast<std::size_t>(f.size()) + 1, 0.0L) {
    for (Index i = 0; i < f.size(); ++i) acc_[i + 1] = acc_[i] + f[i];
}

double PrefixSums::integral(const IntervalRef& I) const {
    check_interval(grid_, I);
    return static_cast<double>(acc_[I.end()] - acc_[I.start]) * grid_.cell_width();
}

void write_stepfn_csv(const StepFn& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "cell,value\n";
    char buf[64];
    for (Index i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(i), f[i]);
        out << buf;
    }
    nlohmann::ordered_json side{{"levels", f.grid().levels}, {"span", f.grid().span}};
    std::ofstream(path + ".json") << side.dump() << "\n";
}

StepFn read_stepfn_csv(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) throw std::runtime_error("missing grid sidecar " + path + ".json");
    auto j = nlohmann::json::parse(side);
    Grid g(j.at("levels").get<int>(), j.at("span").get<int>());

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("cell,value", 0) != 0) throw std::runtime_error(path + ": expected header cell,value");
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.cells());
    std::vector<bool> seen(static_cast<std::size_t>(g.cells()), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error(path + ": malformed row '" + line + "'");
        Index cell = std::stoll(line.substr(0, comma));
        if (cell < 0 || cell >= g.cells()) throw std::runtime_error(path + ": cell out of range");
        v[cell] = std::stod(line.substr(comma + 1));
        seen[static_cast<std::size_t>(cell)] = true;
    }
    for (bool s : seen)
        if (!s) throw std::runtime_error(path + ": missing cells");
    bool neg = (v < 0.0).any();
    return StepFn(g, std::move(v), neg);
}

} // namespace bumpkit
