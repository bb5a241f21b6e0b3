#include "bumpkit/cli.hpp"

#include "bumpkit/appendix.hpp"
#include "bumpkit/bump.hpp"
#include "bumpkit/experiments.hpp"
#include "bumpkit/normest.hpp"
#include "bumpkit/orlicz.hpp"
#include "bumpkit/parallel.hpp"
#include "bumpkit/sparse.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace bumpkit {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw std::invalid_argument("bad number '" + s + "' in " + what);
    return x;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void validate(const std::string& key, const std::vector<double>& vals) {
    for (double x : vals) {
        if (key == "p" && !(x > 1.0)) throw UsageError("--p must exceed 1");
        if (key == "m" && !(x >= 0 && x <= 4 && x == std::floor(x))) throw UsageError("--m must be an integer in 0..4");
        if (key == "levels" && !(x >= 1 && x <= 16 && x == std::floor(x)))
            throw UsageError("--levels must be an integer in 1..16");
    }
}

} // namespace

StepFn parse_weight(const std::string& spec, const Grid& g, const std::string& role) {
    auto parts = split(spec, ':');
    const auto& kind = parts[0];
    if (kind == "ones" && parts.size() == 1) return StepFn::constant(g, 1.0);
    if (kind == "power" && parts.size() == 2) {
        double gamma = to_number(parts[1], spec);
        return StepFn::sample(g, [&](double x) { return std::pow(x, gamma); });
    }
    if (kind == "spike" && parts.size() == 3) {
        double h = to_number(parts[1], spec), w = to_number(parts[2], spec);
        if (!(h > 0) || !(w > 0)) throw std::invalid_argument("spike needs positive height and width");
        double mid = 0.5 * g.length();
        return StepFn::sample(g, [&](double x) { return std::abs(x - mid) < 0.5 * w ? h : 1.0; });
    }
    if (kind == "appendix" && parts.size() == 3) {
        auto loc = gen_localized_weights(g, to_number(parts[1], spec), to_number(parts[2], spec), 0.0);
        if (role == "u") return loc.u;
        if (role == "v") return loc.v;
        throw std::invalid_argument("appendix weights exist for u and v only");
    }
    if (kind == "file" && parts.size() >= 2) {
        StepFn f = read_stepfn_csv(spec.substr(5));
        if (!(f.grid() == g)) throw std::invalid_argument(spec + ": grid differs from --levels/--span");
        return f;
    }
    throw std::invalid_argument("unknown weight spec '" + spec + "'");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(no) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

namespace {

// position right after the command (and the experiment name), where config entries go
std::size_t insertion_point(const std::vector<std::string>& a) {
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i] == "--jobs" || a[i] == "--config" || a[i] == "--out" || a[i] == "-j") {
            ++i;
            continue;
        }
        if (!a[i].empty() && a[i][0] == '-') continue;
        if (a[i] == "experiment" && i + 1 < a.size() && a[i + 1][0] != '-') return i + 2;
        return i + 1;
    }
    return a.size();
}

int exit_for(Verdict v) {
    return v == Verdict::fail ? kExitFail : v == Verdict::inconclusive ? kExitInconclusive : kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args = args_in;
    if (args.empty()) args.push_back("bumpkit");

    CLI::App app{"Two-weight bump workbench on a dyadic grid"};
    app.name("bumpkit");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    unsigned jobs = 1;
    std::string config_path, out_dir = ".";
    app.add_option("-j,--jobs", jobs, "worker threads (0 = all cores)");
    app.add_option("--config", config_path, "key = value file; flags win");
    app.add_option("--out", out_dir, "output directory for reports");

    int levels = 8, span = 0, m = 0;
    double p = 0.0, delta = 0.5, eps = 0.5;
    std::string u_spec = "ones", v_spec = "ones", mode = "dyadic";

    auto* cmd_norm = app.add_subcommand("orlicz-norm", "Luxemburg norm of a step function");
    std::string phi, f_spec = "ones";
    long long start = 0, len = 0;
    cmd_norm->add_option("--phi", phi, "plog:p:a | poverlog:p:mu | linlog:a")->required();
    cmd_norm->add_option("--f", f_spec, "weight spec for f");
    cmd_norm->add_option("--levels", levels);
    cmd_norm->add_option("--span", span);
    cmd_norm->add_option("--start", start);
    cmd_norm->add_option("--len", len, "cells (0 = whole domain)");

    auto* cmd_bump = app.add_subcommand("bump", "bump constant of a weight pair");
    std::string preset;
    cmd_bump->add_option("--preset", preset)->required();
    cmd_bump->add_option("--p", p)->required();
    cmd_bump->add_option("--m", m);
    cmd_bump->add_option("--u", u_spec);
    cmd_bump->add_option("--v", v_spec);
    cmd_bump->add_option("--levels", levels);
    cmd_bump->add_option("--span", span);
    cmd_bump->add_option("--mode", mode);
    cmd_bump->add_option("--delta", delta);
    cmd_bump->add_option("--eps", eps);

    auto* cmd_op = app.add_subcommand("opnorm", "certified lower bound for a weighted operator norm");
    std::string op = "ALlogL";
    int depth = 6;
    double q = 0.6;
    long long seed = 1, budget = 4000;
    cmd_op->add_option("--op", op, "AS | ALlogL | Tm");
    cmd_op->add_option("--p", p)->required();
    cmd_op->add_option("--m", m);
    cmd_op->add_option("--u", u_spec);
    cmd_op->add_option("--v", v_spec);
    cmd_op->add_option("--levels", levels);
    cmd_op->add_option("--depth", depth);
    cmd_op->add_option("--q", q);
    cmd_op->add_option("--seed", seed);
    cmd_op->add_option("--budget", budget);

    auto* cmd_exp = app.add_subcommand("experiment", "run a named experiment");
    std::string exp_name;
    cmd_exp->add_option("name", exp_name)->required();
    cmd_exp->allow_extras();

    auto* cmd_replay = app.add_subcommand("replay", "re-run a report and compare byte for byte");
    std::string replay_path;
    cmd_replay->add_option("report", replay_path)->required();

    try {
        // config entries go right after the command so that later flags override them
        for (std::size_t i = 1; i + 1 < args.size(); ++i)
            if (args[i] == "--config") config_path = args[i + 1];
        if (!config_path.empty()) {
            std::vector<std::string> extra;
            for (const auto& [k, v] : read_config_file(config_path)) {
                extra.push_back("--" + k);
                extra.push_back(v);
            }
            args.insert(args.begin() + static_cast<long>(insertion_point(args)), extra.begin(), extra.end());
        }
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        set_jobs(jobs);
        if (*cmd_norm || *cmd_bump || *cmd_op) {
            validate("levels", {static_cast<double>(levels)});
            if (*cmd_bump || *cmd_op) {
                validate("p", {p});
                validate("m", {static_cast<double>(m)});
            }
        }
        if (*cmd_norm) {
            Grid g(levels, span);
            StepFn f = parse_weight(f_spec, g, "f");
            IntervalRef I{start, len > 0 ? len : g.cells() - start};
            check_interval(g, I);
            out << "norm " << format_double(luxemburg_norm(f, I, YoungFn::parse(phi))) << "\n";
            return kExitOk;
        }
        if (*cmd_bump) {
            Grid g(levels, span);
            StepFn u = parse_weight(u_spec, g, "u"), v = parse_weight(v_spec, g, "v");
            auto spec = bump_preset(preset, p, m, delta, eps);
            double pq = p / (p - 1.0);
            // u may vanish (appendix weights); go through bump_constant directly
            BumpReport rep = spec.form == BumpForm::sigma
                                 ? bump_constant(u, v.pow(1.0 - pq), spec, parse_scan_mode(mode))
                                 : bump_constant(u.pow(1.0 / p), v.pow(-1.0 / p), spec, parse_scan_mode(mode));
            out << "value " << format_double(rep.value) << "\n";
            nlohmann::ordered_json j{{"command", "bump"},
                                     {"config",
                                      {{"preset", preset}, {"p", p}, {"m", m}, {"u", u_spec}, {"v", v_spec},
                                       {"levels", levels}, {"span", span}, {"mode", mode}, {"delta", delta}, {"eps", eps}}},
                                     {"report", to_json(rep)}};
            std::filesystem::create_directories(out_dir);
            std::ofstream((std::filesystem::path(out_dir) / "bump.report.json").string()) << j.dump(2) << "\n";
            return kExitOk;
        }
        if (*cmd_op) {
            Grid g(levels, 0);
            StepFn u = parse_weight(u_spec, g, "u"), v = parse_weight(v_spec, g, "v");
            SplitMix64 rng(static_cast<std::uint64_t>(seed));
            auto S = random_family(g, depth, q, rng);
            Operator A;
            if (op == "AS") A = [&](const StepFn& f) { return apply_AS(S, f); };
            else if (op == "ALlogL") A = [&](const StepFn& f) { return apply_ALlogLm(S, f, m); };
            else if (op == "Tm") A = [&](const StepFn& f) { return apply_Tm(S, f, m); };
            else throw UsageError("--op must be AS, ALlogL or Tm");
            AscentOptions opt;
            opt.budget = static_cast<std::size_t>(budget);
            opt.seed = static_cast<std::uint64_t>(seed);
            auto est = opnorm_lower(A, p, u, v, opt);
            out << "lower " << format_double(est.lower) << "\n";
            nlohmann::ordered_json j{{"command", "opnorm"},
                                     {"config",
                                      {{"op", op}, {"p", p}, {"m", m}, {"u", u_spec}, {"v", v_spec}, {"levels", levels},
                                       {"depth", depth}, {"q", q}, {"seed", seed}, {"budget", budget}}},
                                     {"estimate", to_json(est)}};
            std::filesystem::create_directories(out_dir);
            std::ofstream((std::filesystem::path(out_dir) / "opnorm.report.json").string()) << j.dump(2) << "\n";
            return kExitOk;
        }
        if (*cmd_exp) {
            nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
            auto rest = cmd_exp->remaining();
            for (std::size_t i = 0; i < rest.size(); ++i) {
                const auto& t = rest[i];
                if (t.rfind("--", 0) != 0) throw UsageError("unexpected token '" + t + "'");
                std::string key = t.substr(2), val;
                auto eq = key.find('=');
                if (eq != std::string::npos) {
                    val = key.substr(eq + 1);
                    key = key.substr(0, eq);
                } else {
                    if (i + 1 >= rest.size()) throw UsageError("flag '" + t + "' needs a value");
                    val = rest[++i];
                }
                if (key == "out") {
                    out_dir = val;
                    continue;
                }
                if (key == "p" || key == "m" || key == "levels") {
                    std::vector<double> xs;
                    for (const auto& s : split(val, ',')) xs.push_back(to_number(trim(s), "--" + key));
                    validate(key, xs);
                }
                cfg[key] = val;
            }
            ExperimentReport r;
            try {
                r = run_experiment(exp_name, cfg);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            auto files = write_report(r, out_dir);
            out << r.name << ": " << to_string(r.overall()) << " [";
            for (std::size_t i = 0; i < r.verdicts.size(); ++i)
                out << (i ? ", " : "") << r.verdicts[i].name << "=" << to_string(r.verdicts[i].verdict);
            out << "] -> " << files.json_path << "\n";
            return exit_for(r.overall());
        }
        if (*cmd_replay) {
            auto res = replay_report(replay_path);
            bool same = res.json_identical && res.csv_identical;
            out << "replay " << res.fresh.name << ": report " << (res.json_identical ? "identical" : "DIFFERS")
                << ", table " << (res.csv_identical ? "identical" : "DIFFERS") << "\n";
            return same ? kExitOk : kExitFail;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}

} // namespace bumpkit
