#pragma once

#include "bumpkit/orlicz.hpp"
#include "bumpkit/sparse.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bumpkit {

// Named logarithmic bumps (delta, eps > 0)
YoungFn alpha_bump(double p, double delta = 0.5);            // t^p log^{p-1+d}
YoungFn beta_bump(double p, int m, double delta = 0.5);      // t^{p'} log^{(m+1)p'-1+d}
YoungFn gamma_bump(double p, int m, double delta = 0.5);     // t^{p'} log^{m(p'+d)}
YoungFn psi_bump(double p, int m, double eps = 0.5);         // t^{p'} log^{max((m+1)p'-1, mp'+1)+e}

// pair:  [u^{1/p}, v^{-1/p}]_{A,B}
// sigma: sup ||u||_{A,Q} ||sigma||_{B,Q}^{p-1}, sigma = v^{1-p'}
enum class BumpForm { pair, sigma };

struct BumpSpec {
    YoungFn A;
    YoungFn B;
    double p = 2.0;
    int m = 0;
    std::string preset; // empty for manual entries
    BumpForm form = BumpForm::pair;
};

// ap, bump_conjecture, stco_pair, necbump, recond, k2, joint_psi
BumpSpec bump_preset(const std::string& name, double p, int m, double delta = 0.5, double eps = 0.5);
// Right-hand sides: extbctbm (2 terms), sepbumex (4), sepbump_thm (first line, 2), corpc (2)
std::vector<BumpSpec> theorem_terms(const std::string& theorem, double p, int m, double delta = 0.5,
                                    double eps = 0.5);

struct ScaleMax {
    Index len;
    double value;
};

struct BumpReport {
    double value = 0.0;
    IntervalRef argmax;
    std::vector<ScaleMax> profile; // largest length first
    ScanMode mode = ScanMode::dyadic;
};

nlohmann::ordered_json to_json(const BumpReport& r);

// sup over enumerated intervals of ||lam||_{A,Q} ||mu||_{B,Q} (B-factor raised to p-1 in sigma form)
BumpReport bump_constant(const StepFn& lam, const StepFn& mu, const BumpSpec& spec, ScanMode mode);
// Builds lam, mu from (u, v) according to spec.form and evaluates.
BumpReport bump_for_weights(const StepFn& u, const StepFn& v, const BumpSpec& spec, ScanMode mode);

struct NecessaryReport {
    BumpReport pair;        // sup ||u^{1/p}||_{L^p} ||v^{-1/p}||_{L^{p'}(log L)^{mp'}}
    BumpReport sigma_form;  // sup u_Q ((1/|Q|) int sigma log^{mp'}(sigma/sigma_Q + e))^{p-1}
    double ratio;           // pair^p / sigma_form
    bool in_band;           // ratio within [1/32, 32]
};

NecessaryReport necessary_constant(const StepFn& u, const StepFn& v, double p, int m, ScanMode mode);

enum class TestingVariant { lacey, li, estli };
TestingVariant parse_testing_variant(const std::string& s);

// sup over Q in S of the Lacey / Li / estli functional with phi = psi = log(e + t).
// A must be a B_p function; lambdas (aligned with S.cubes, each >= 1) are used by estli only.
double testing_functional(const SparseFamily& S, const StepFn& u, const StepFn& sigma, double p, const YoungFn& A,
                          TestingVariant variant, const std::vector<double>& lambdas = {});

// lambda_Q = (||sigma||_{L(log L)^{m r'},Q} / sigma_Q)^{1/r'}, each >= 1 up to rounding
std::vector<double> estli_lambdas(const SparseFamily& S, const StepFn& sigma, int m, double r);

} // namespace bumpkit
