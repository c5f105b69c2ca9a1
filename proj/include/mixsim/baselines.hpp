#pragma once
// Reference estimators: difference in means (plain, prior-filtered), Hajek
// reweighting by priors, the 3-parameter population recursion and a
// composition-blind version of the subpopulation regression.

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "mixsim/estimator.hpp"

namespace mixsim {

struct BaselineResult {
    std::string name;
    EffectSeries effect;
    std::vector<std::string> param_names;
    std::vector<double> params;
};

namespace detail {

// Weighted treated-minus-control contrast over the units in `members`;
// kUndefined when either arm carries no weight.
template <class WeightFn>
double weighted_contrast(const Panel& panel, int t, const std::vector<std::size_t>& members, WeightFn weight) {
    const auto yc = panel.y.col(static_cast<std::size_t>(t));
    const auto wc = panel.w.col(static_cast<std::size_t>(t));
    double s1 = 0.0, m1 = 0.0, s0 = 0.0, m0 = 0.0;
    for (auto i : members) {
        const double wt = weight(i);
        if (wc[i]) {
            s1 += wt * yc[i];
            m1 += wt;
        } else {
            s0 += wt * yc[i];
            m0 += wt;
        }
    }
    if (m1 <= 0.0 || m0 <= 0.0) return kUndefined;
    return s1 / m1 - s0 / m0;
}

inline std::vector<std::size_t> all_units(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

inline EffectSeries per_round(const Panel& panel, const std::vector<std::size_t>& members,
                              const std::function<double(std::size_t)>& weight) {
    EffectSeries out(panel.horizon());
    for (int t = 1; t <= panel.horizon(); ++t) out[t] = weighted_contrast(panel, t, members, weight);
    return out;
}

// Least squares with an SVD rank check; throws when rank < cols.
inline Eigen::VectorXd solve_full_rank(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& who) {
    if (x.rows() < x.cols()) throw EstimationError(who + ": fewer rows than parameters");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int rank = numerical_rank(svd.singularValues(), x.rows(), x.cols());
    if (rank < x.cols())
        throw EstimationError(who + ": rank-deficient design (rank " + std::to_string(rank) + " of " +
                              std::to_string(x.cols()) + ")");
    return svd.solve(y);
}

}  // namespace detail

inline BaselineResult dim(const Panel& panel) {
    const auto members = detail::all_units(panel.n_units());
    return {"dim", detail::per_round(panel, members, [](std::size_t) { return 1.0; }), {}, {}};
}

struct DimFilterOptions {
    double threshold = 0.5;
    bool use_median = false;   // threshold := median of q
};

inline BaselineResult dim_filtered(const Panel& panel, const DimFilterOptions& opt = {}) {
    double cut = opt.threshold;
    if (opt.use_median) {
        std::vector<double> q = panel.q;
        std::sort(q.begin(), q.end());
        const std::size_t n = q.size();
        cut = n % 2 ? q[n / 2] : 0.5 * (q[n / 2 - 1] + q[n / 2]);
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < panel.n_units(); ++i)
        if (panel.q[i] > cut) members.push_back(i);
    if (members.empty()) throw EstimationError("dim_filtered: no unit has a prior above the threshold");
    return {"dim_filtered", detail::per_round(panel, members, [](std::size_t) { return 1.0; }), {"threshold"}, {cut}};
}

inline BaselineResult ht_q(const Panel& panel) {
    const auto members = detail::all_units(panel.n_units());
    return {"ht_q", detail::per_round(panel, members, [&](std::size_t i) { return panel.q[i]; }), {}, {}};
}

struct RecursionOptions {
    FitWindow window{};
    int treat_start = 1;
};

// Y_t = lambda pi_t + xi Y_{t-1} + gamma pi_t Y_{t-1} on population means.
inline BaselineResult cmp_basic(const Panel& panel, const RecursionOptions& opt = {}) {
    const auto pop = summarize_population(panel);
    const int horizon = panel.horizon();
    const auto [lo, hi] = opt.window.resolve(horizon);
    if (hi - lo + 1 < 3) throw EstimationError("cmp_basic: needs at least 3 rounds");
    Eigen::MatrixXd x(hi - lo + 1, 3);
    Eigen::VectorXd y(hi - lo + 1);
    for (int t = lo; t <= hi; ++t) {
        const double p = pop.pi_path[static_cast<std::size_t>(t)];
        const double ylag = pop.y_path[static_cast<std::size_t>(t - 1)];
        x.row(t - lo) << p, ylag, p * ylag;
        y(t - lo) = pop.y_path[static_cast<std::size_t>(t)];
    }
    const Eigen::VectorXd c = detail::solve_full_rank(x, y, "cmp_basic");

    BaselineResult out{"cmp_basic", EffectSeries(horizon), {"lambda", "xi", "gamma"}, {c(0), c(1), c(2)}};
    double nu1 = pop.y_path[0];
    double nu0 = pop.y_path[0];
    for (int t = 1; t <= horizon; ++t) {
        const double w = t >= opt.treat_start ? 1.0 : 0.0;
        nu1 = c(0) * w + c(1) * nu1 + c(2) * w * nu1;
        nu0 = c(1) * nu0;
        detail::check_cap(nu1, t, kDivergenceCap);
        detail::check_cap(nu0, t, kDivergenceCap);
        out.effect[t] = nu1 - nu0;
    }
    return out;
}

// Rows (k,t): [1, pi^k_t, pi_t, Y_{t-1}, pi_t Y_{t-1}]; counterfactual paths
// set pi^S = pi = 1 (resp. 0). Targets the population-average effect.
inline BaselineResult cmp_full(const Panel& panel, const std::vector<Subpopulation>& batches,
                               const RecursionOptions& opt = {}) {
    const auto s = summarize(panel, batches);
    const int horizon = panel.horizon();
    const auto [lo, hi] = opt.window.resolve(horizon);
    const auto rows = static_cast<Eigen::Index>(s.batches.size()) * (hi - lo + 1);
    Eigen::MatrixXd x(rows, 5);
    Eigen::VectorXd y(rows);
    Eigen::Index r = 0;
    for (const auto& b : s.batches) {
        for (int t = lo; t <= hi; ++t, ++r) {
            const auto ut = static_cast<std::size_t>(t);
            const double p = s.population.pi_path[ut];
            const double ylag = s.population.y_path[ut - 1];
            x.row(r) << 1.0, b.pi_path[ut], p, ylag, p * ylag;
            y(r) = b.y_path[ut];
        }
    }
    const Eigen::VectorXd c = detail::solve_full_rank(x, y, "cmp_full");

    BaselineResult out{"cmp", EffectSeries(horizon), {"intercept", "tau", "alpha", "beta", "gamma"},
                       {c(0), c(1), c(2), c(3), c(4)}};
    double nu1 = s.population.y_path[0];
    double nu0 = s.population.y_path[0];
    for (int t = 1; t <= horizon; ++t) {
        const double w = t >= opt.treat_start ? 1.0 : 0.0;
        nu1 = c(0) + (c(1) + c(2)) * w + c(3) * nu1 + c(4) * w * nu1;
        nu0 = c(0) + c(3) * nu0;
        detail::check_cap(nu1, t, kDivergenceCap);
        detail::check_cap(nu0, t, kDivergenceCap);
        out.effect[t] = nu1 - nu0;
    }
    return out;
}

}  // namespace mixsim
