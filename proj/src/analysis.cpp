#include "qlab/analysis.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace qlab {

bool AnalysisReport::all_bounds_pass() const {
    for (const auto& check : bound_checks)
        if (!check.pass) return false;
    return true;
}

ProblemConstants problem_constants(const SimContext& ctx, const Vec* q_lower0) {
    ProblemConstants c;
    c.sa = static_cast<double>(ctx.mdp.num_pairs());
    c.gamma = ctx.mdp.discount();
    c.d_min = ctx.dist.d_min();
    c.d_max = ctx.dist.d_max();
    const Vec q0 = q_lower0 ? *q_lower0 : Vec::Zero(ctx.mdp.num_pairs());
    c.q0_dist = (q0 - ctx.q_star).norm();
    c.xi = ctx.plan.xi;
    c.theta = ctx.plan.theta;
    return c;
}

std::vector<BoundCheck> norm_bound_checks(const SimContext& ctx) {
    const double sa = static_cast<double>(ctx.mdp.num_pairs());
    const double gamma = ctx.mdp.discount();
    const double dmin = ctx.dist.d_min();
    const double dmax = ctx.dist.d_max();
    const double slack = 1.0 + 1e-9;
    std::vector<BoundCheck> checks;
    auto add = [&](std::string name, double value, double lo, double hi) {
        BoundCheck c;
        c.name = std::move(name);
        c.value = value;
        c.lo = lo;
        c.hi = hi;
        c.pass = value >= lo / slack && value <= hi * slack;
        checks.push_back(std::move(c));
    };
    add("norm2_G", ctx.lyap.norm2_g, 1.0 / (4.0 * std::sqrt(sa) * dmax),
        sa / (2.0 * (1.0 - gamma) * dmin));
    add("norm2_G_inv", ctx.lyap.norm2_g_inv, 2.0 * (1.0 - gamma) * dmin / sa,
        4.0 * std::sqrt(sa) * dmax);
    add("norm2_B", ctx.lyap.norm2_b, (1.0 - gamma) * dmin / sa,
        2.0 * std::pow(sa, 1.25) * dmax);
    add("norm_inf_T", ctx.lyap.t_star.cwiseAbs().rowwise().sum().maxCoeff(), 0.0, 2.0 * dmax);
    add("theta_upper", ctx.plan.theta, 0.0, 4.0 * sa / ((1.0 - gamma) * dmin));
    add("xi_range", ctx.plan.xi, 8.0 / (sa * sa),
        16.0 * std::pow(sa, 4.5) * dmax * dmax / ((1.0 - gamma) * (1.0 - gamma) * dmin * dmin));
    add("beta_theta", ctx.plan.beta * ctx.plan.theta, 2.0,
        std::numeric_limits<double>::infinity());
    add("dmin_gamma_theta", ctx.dist.d_min() * (1.0 - gamma) * ctx.plan.theta, 2.0,
        std::numeric_limits<double>::infinity());
    return checks;
}

AnalysisReport analyze(const SimContext& ctx) {
    AnalysisReport report;
    report.q_star = ctx.q_star;
    report.hurwitz = hurwitz_certificate(ctx.lyap.t_star);
    report.lyap = ctx.lyap;
    report.plan = ctx.plan;
    report.constants = problem_constants(ctx);
    const int n = ctx.mdp.num_pairs();
    report.lyapunov_residual = (ctx.lyap.g * ctx.lyap.t_star + ctx.lyap.t_star.transpose() * ctx.lyap.g +
                                Mat::Identity(n, n))
                                   .lpNorm<Eigen::Infinity>();
    report.similarity_residual =
        (ctx.lyap.b + ctx.lyap.b.transpose() + ctx.lyap.g.inverse()).lpNorm<Eigen::Infinity>();
    report.bound_checks = norm_bound_checks(ctx);
    return report;
}

namespace {

nlohmann::json matrix_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_to_json(const Vec& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

} // namespace

std::string report_to_json(const AnalysisReport& report) {
    using nlohmann::json;
    json doc;
    doc["q_star"] = vector_to_json(report.q_star);
    doc["hurwitz"] = {{"is_strictly_diag_dominant", report.hurwitz.is_strictly_diag_dominant},
                      {"diagonals_negative", report.hurwitz.diagonals_negative},
                      {"gerschgorin_max_real_bound", report.hurwitz.gerschgorin_max_real_bound},
                      {"max_real_eigenvalue", report.hurwitz.max_real_eigenvalue}};
    doc["lyapunov"] = {{"G", matrix_to_json(report.lyap.g)},
                       {"B", matrix_to_json(report.lyap.b)},
                       {"norm2_G", report.lyap.norm2_g},
                       {"norm2_G_inv", report.lyap.norm2_g_inv},
                       {"norm2_B", report.lyap.norm2_b},
                       {"sigma_max_B", report.lyap.sigma_max_b},
                       {"lambda_min_G_inv", report.lyap.lambda_min_g_inv},
                       {"lyapunov_residual", report.lyapunov_residual},
                       {"similarity_residual", report.similarity_residual}};
    doc["plan"] = {{"nu", report.plan.nu},
                   {"sigma_max_B", report.plan.sigma_max_b},
                   {"xi", report.plan.xi},
                   {"theta", report.plan.theta},
                   {"beta", report.plan.beta},
                   {"xi_factor", report.plan.xi_factor},
                   {"certificate",
                    {{"xi_in_range", report.plan.certificate.xi_in_range},
                     {"theta_exact", report.plan.certificate.theta_exact},
                     {"beta_theta_ok", report.plan.certificate.beta_theta_ok},
                     {"dmin_gamma_theta_ok", report.plan.certificate.dmin_gamma_theta_ok},
                     {"theta_upper_ok", report.plan.certificate.theta_upper_ok},
                     {"xi_bounds_ok", report.plan.certificate.xi_bounds_ok},
                     {"alpha0_admissible", report.plan.certificate.alpha0_admissible}}}};
    doc["constants"] = {{"sa", report.constants.sa},         {"gamma", report.constants.gamma},
                        {"d_min", report.constants.d_min},   {"d_max", report.constants.d_max},
                        {"q0_dist", report.constants.q0_dist}, {"xi", report.constants.xi},
                        {"theta", report.constants.theta}};
    json checks = json::array();
    for (const auto& check : report.bound_checks)
        checks.push_back({{"name", check.name},
                          {"value", check.value},
                          {"lo", check.lo},
                          {"hi", check.hi},
                          {"pass", check.pass}});
    doc["bound_checks"] = std::move(checks);
    doc["all_bounds_pass"] = report.all_bounds_pass();
    return doc.dump(2) + "\n";
}

std::string ensemble_to_csv(const EnsembleResult& res, const Envelope& total, const Envelope& lower,
                            const Envelope& diff, long long envelope_from_k) {
    std::ostringstream out;
    out.precision(17);
    out << "k,alpha_k,mean_err_inf,se_err_inf,mean_lower_err,mean_diff_upper_lower,mean_vz,"
           "envelope_total,envelope_lower,envelope_diff\n";
    for (std::size_t i = 0; i < res.ks.size(); ++i) {
        const long long k = res.ks[i];
        out << k << ',' << res.alpha[i] << ',' << res.mean_err_inf[i] << ',' << res.se_err_inf[i]
            << ',' << res.mean_lower_err[i] << ',' << res.mean_diff_upper_lower[i] << ','
            << res.mean_vz[i];
        if (k >= envelope_from_k) {
            const double kd = static_cast<double>(k);
            out << ',' << total.evaluate(kd) << ',' << lower.evaluate(kd) << ','
                << diff.evaluate(kd);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

} // namespace qlab
