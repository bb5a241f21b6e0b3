#include "bumpkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bumpkit {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
    case Verdict::recorded: return "RECORDED";
    }
    return "?";
}

namespace {

Verdict parse_verdict(const std::string& s) {
    for (auto v : {Verdict::pass, Verdict::fail, Verdict::inconclusive, Verdict::recorded})
        if (s == to_string(v)) return v;
    throw std::invalid_argument("unknown verdict '" + s + "'");
}

} // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Cell::Cell(double x) : text(format_double(x)) {}

void ExperimentReport::add_row(const std::vector<Cell>& cells) {
    if (cells.size() != columns.size()) throw std::logic_error("report row width differs from the header");
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(c.text);
    rows.push_back(std::move(row));
}

void ExperimentReport::verdict(const std::string& n, Verdict v, const std::string& detail) {
    verdicts.push_back({n, v, detail});
}

Verdict ExperimentReport::overall() const {
    bool inc = false;
    for (const auto& v : verdicts) {
        if (v.verdict == Verdict::fail) return Verdict::fail;
        inc = inc || v.verdict == Verdict::inconclusive;
    }
    return inc ? Verdict::inconclusive : Verdict::pass;
}

const VerdictEntry* ExperimentReport::find(const std::string& n) const {
    for (const auto& v : verdicts)
        if (v.name == n) return &v;
    return nullptr;
}

std::string table_csv(const ExperimentReport& r) {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    line(r.columns);
    for (const auto& row : r.rows) line(row);
    return os.str();
}

nlohmann::ordered_json report_json(const ExperimentReport& r, bool with_wall_time) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["config"] = r.config;
    j["seed"] = r.seed;
    j["columns"] = r.columns;
    j["row_count"] = r.rows.size();
    j["constants"] = r.constants;
    auto vs = nlohmann::ordered_json::array();
    for (const auto& v : r.verdicts) vs.push_back({{"name", v.name}, {"verdict", to_string(v.verdict)}, {"detail", v.detail}});
    j["verdicts"] = std::move(vs);
    j["overall"] = to_string(r.overall());
    if (with_wall_time) j["wall_time"] = r.wall_time;
    return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.config = j.at("config");
    r.seed = j.value("seed", std::uint64_t{0});
    r.columns = j.value("columns", std::vector<std::string>{});
    if (j.contains("constants")) r.constants = j.at("constants");
    if (j.contains("verdicts"))
        for (const auto& v : j.at("verdicts"))
            r.verdicts.push_back({v.at("name"), parse_verdict(v.at("verdict")), v.value("detail", "")});
    r.wall_time = j.value("wall_time", 0.0);
    return r;
}

ReportFiles write_report(const ExperimentReport& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    ReportFiles f{(std::filesystem::path(dir) / (r.name + ".report.json")).string(),
                  (std::filesystem::path(dir) / (r.name + ".table.csv")).string()};
    std::ofstream js(f.json_path), cs(f.csv_path);
    if (!js || !cs) throw std::runtime_error("cannot write report files under " + dir);
    js << report_json(r).dump(2) << '\n';
    cs << table_csv(r);
    return f;
}

Params::Params(nlohmann::ordered_json in) : in_(std::move(in)) {
    if (in_.is_null()) in_ = nlohmann::ordered_json::object();
    if (!in_.is_object()) throw std::invalid_argument("config must be a key/value object");
}

const nlohmann::ordered_json* Params::lookup(const std::string& key) const {
    auto it = in_.find(key);
    return it == in_.end() ? nullptr : &*it;
}

namespace {

double parse_number(const std::string& key, const nlohmann::ordered_json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == s.size() && !s.empty()) return x;
    }
    throw std::invalid_argument("config key '" + key + "' expects a number, got " + v.dump());
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

double Params::number(const std::string& key, double def) {
    const auto* v = lookup(key);
    double x = v ? parse_number(key, *v) : def;
    out_[key] = x;
    return x;
}

long long Params::integer(const std::string& key, long long def) {
    const auto* v = lookup(key);
    long long x = def;
    if (v) {
        double d = parse_number(key, *v);
        if (d != std::floor(d)) throw std::invalid_argument("config key '" + key + "' expects an integer");
        x = static_cast<long long>(d);
    }
    out_[key] = x;
    return x;
}

std::string Params::text(const std::string& key, const std::string& def) {
    const auto* v = lookup(key);
    std::string s = def;
    if (v) s = v->is_string() ? v->get<std::string>() : v->dump();
    out_[key] = s;
    return s;
}

std::vector<double> Params::numbers(const std::string& key, const std::vector<double>& def) {
    const auto* v = lookup(key);
    std::vector<double> x = def;
    if (v) {
        x.clear();
        if (v->is_array())
            for (const auto& e : *v) x.push_back(parse_number(key, e));
        else if (v->is_string())
            for (const auto& e : split_list(v->get<std::string>())) x.push_back(parse_number(key, e));
        else
            x.push_back(parse_number(key, *v));
    }
    out_[key] = x;
    return x;
}

std::vector<std::string> Params::texts(const std::string& key, const std::vector<std::string>& def) {
    const auto* v = lookup(key);
    std::vector<std::string> x = def;
    if (v) {
        if (v->is_array())
            x = v->get<std::vector<std::string>>();
        else
            x = split_list(v->is_string() ? v->get<std::string>() : v->dump());
    }
    out_[key] = x;
    return x;
}

void Params::check_unused() const {
    std::string bad;
    for (auto it = in_.begin(); it != in_.end(); ++it)
        if (!out_.contains(it.key())) bad += (bad.empty() ? "" : ", ") + it.key();
    if (!bad.empty()) throw std::invalid_argument("unknown config key(s): " + bad);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        f.residuals.push_back(r);
        sse += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

namespace {

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
        i = j + 1;
    }
    return r;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two or more pairs");
    auto rx = ranks(x), ry = ranks(y);
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n, my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

double median(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("median of nothing");
    std::sort(x.begin(), x.end());
    std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

} // namespace bumpkit
