#pragma once

#include <string>
#include <vector>

#include "qlab/envelopes.hpp"
#include "qlab/matrix.hpp"
#include "qlab/simulator.hpp"

namespace qlab {

// One closed-form interval check: lo <= value <= hi.
struct BoundCheck {
    std::string name;
    double value = 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool pass = false;
};

struct AnalysisReport {
    Vec q_star;
    HurwitzCertificate hurwitz;
    LyapunovAnalysis lyap;
    StepSizePlan plan;
    ProblemConstants constants;
    double lyapunov_residual = 0.0;  // ||G T + T^T G + I||_inf
    double similarity_residual = 0.0; // ||B + B^T + G^{-1}||_inf
    std::vector<BoundCheck> bound_checks;

    bool all_bounds_pass() const;
};

ProblemConstants problem_constants(const SimContext& ctx, const Vec* q_lower0 = nullptr);

// The eight closed-form interval checks on ||G||_2, ||G^{-1}||_2, ||B||_2,
// ||T||_inf, theta, xi, beta*theta, and d_min(1-gamma)*theta.
std::vector<BoundCheck> norm_bound_checks(const SimContext& ctx);

AnalysisReport analyze(const SimContext& ctx);

std::string report_to_json(const AnalysisReport& report);

// Ensemble CSV, one row per logged k:
// k, alpha_k, mean_err_inf, se_err_inf, mean_lower_err,
// mean_diff_upper_lower, mean_vz, envelope_total, envelope_lower,
// envelope_diff.  Envelope columns are empty below `envelope_from_k`
// (Markovian validity region).
std::string ensemble_to_csv(const EnsembleResult& res, const Envelope& total,
                            const Envelope& lower, const Envelope& diff,
                            long long envelope_from_k = 0);

// FNV-1a hash of a string, for config/MDP fingerprints in metadata.
std::uint64_t fnv1a(const std::string& text);

} // namespace qlab
