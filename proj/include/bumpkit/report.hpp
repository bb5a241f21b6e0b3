#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace bumpkit {

enum class Verdict { pass, fail, inconclusive, recorded };
const char* to_string(Verdict v);

struct VerdictEntry {
    std::string name;
    Verdict verdict;
    std::string detail;
};

// One table cell; doubles are written with 17 significant digits
struct Cell {
    std::string text;
    Cell(double x);
    Cell(int x) : text(std::to_string(x)) {}
    Cell(long x) : text(std::to_string(x)) {}
    Cell(long long x) : text(std::to_string(x)) {}
    Cell(unsigned long x) : text(std::to_string(x)) {}
    Cell(unsigned long long x) : text(std::to_string(x)) {}
    Cell(std::string s) : text(std::move(s)) {}
    Cell(const char* s) : text(s) {}
};

std::string format_double(double x);

struct ExperimentReport {
    std::string name;
    nlohmann::ordered_json config = nlohmann::ordered_json::object(); // fully resolved
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::ordered_json constants = nlohmann::ordered_json::object();
    std::vector<VerdictEntry> verdicts;
    double wall_time = 0.0;

    void add_row(const std::vector<Cell>& cells);
    void record(const std::string& key, nlohmann::ordered_json value) { constants[key] = std::move(value); }
    void verdict(const std::string& name, Verdict v, const std::string& detail);
    // FAIL over INCONCLUSIVE over PASS; all-recorded counts as PASS
    Verdict overall() const;
    const VerdictEntry* find(const std::string& name) const;
};

std::string table_csv(const ExperimentReport& r);
nlohmann::ordered_json report_json(const ExperimentReport& r, bool with_wall_time = true);
ExperimentReport report_from_json(const nlohmann::json& j);

struct ReportFiles {
    std::string json_path, csv_path;
};
// Writes <dir>/<name>.report.json and <dir>/<name>.table.csv
ReportFiles write_report(const ExperimentReport& r, const std::string& dir);

// Typed access to a key/value config; every value read (or defaulted) lands in resolved()
// in read order. String values are parsed on demand so CLI input and JSON replays agree.
class Params {
public:
    explicit Params(nlohmann::ordered_json in = nlohmann::ordered_json::object());

    double number(const std::string& key, double def);
    long long integer(const std::string& key, long long def);
    std::string text(const std::string& key, const std::string& def);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& def);
    std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& def);

    const nlohmann::ordered_json& resolved() const { return out_; }
    // throws std::invalid_argument naming keys that were supplied but never read
    void check_unused() const;

private:
    const nlohmann::ordered_json* lookup(const std::string& key) const;
    nlohmann::ordered_json in_;
    nlohmann::ordered_json out_ = nlohmann::ordered_json::object();
};

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    std::vector<double> residuals;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> x);

} // namespace bumpkit
