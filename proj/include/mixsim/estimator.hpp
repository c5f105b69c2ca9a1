#pragma once
// Human total-treatment-effect estimation from subpopulation aggregates:
// design assembly, closed-form least squares for theta, identifiability
// diagnostics and counterfactual propagation.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixsim/ese.hpp"
#include "mixsim/subpop.hpp"

namespace mixsim {

// Rounds [t_lo, t_hi] used as regression responses; t_hi < 0 means T.
struct FitWindow {
    int t_lo = 1;
    int t_hi = -1;

    std::pair<int, int> resolve(int horizon) const {
        const int hi = t_hi < 0 ? horizon : t_hi;
        if (t_lo < 1 || hi > horizon || t_lo > hi) throw ConfigError("fit window is empty or outside 1..T");
        return {t_lo, hi};
    }
};

struct DesignSystem {
    Eigen::MatrixXd x;                      // rows x 7
    Eigen::VectorXd y;
    std::vector<std::pair<int, int>> index; // (batch k, round t) per row
};

inline constexpr int kThetaDim = 7;

// Row (k,t): [q, 1-q, q pi^k_t, (1-q) pi^k_t, pi_t, Y_{t-1}, pi_t Y_{t-1}],
// where pi_t and Y_{t-1} are population aggregates.
inline DesignSystem build_design(const std::vector<SubpopSummary>& batches, const PopulationSummary& pop,
                                 const FitWindow& window = {}) {
    const int horizon = static_cast<int>(pop.y_path.size()) - 1;
    const auto [lo, hi] = window.resolve(horizon);
    const auto rows = static_cast<Eigen::Index>(batches.size()) * (hi - lo + 1);
    DesignSystem d;
    d.x.resize(rows, kThetaDim);
    d.y.resize(rows);
    d.index.reserve(static_cast<std::size_t>(rows));
    Eigen::Index r = 0;
    for (std::size_t k = 0; k < batches.size(); ++k) {
        const auto& b = batches[k];
        if (b.y_path.size() != pop.y_path.size() || b.pi_path.size() != pop.pi_path.size())
            throw ConfigError("build_design: batch summary length mismatch");
        for (int t = lo; t <= hi; ++t, ++r) {
            const auto ut = static_cast<std::size_t>(t);
            const double q = b.q_k;
            const double pk = b.pi_path[ut];
            const double pp = pop.pi_path[ut];
            const double ylag = pop.y_path[ut - 1];
            d.x.row(r) << q, 1.0 - q, q * pk, (1.0 - q) * pk, pp, ylag, pp * ylag;
            d.y(r) = b.y_path[ut];
            d.index.emplace_back(static_cast<int>(k), t);
        }
    }
    if (!d.x.allFinite() || !d.y.allFinite()) throw EstimationError("build_design: non-finite design entries");
    return d;
}

// Numerical rank threshold: max(rows, cols) * eps * sigma_max.
inline double rank_threshold(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

inline int numerical_rank(const Eigen::VectorXd& sv, Eigen::Index rows, Eigen::Index cols) {
    if (sv.size() == 0) return 0;
    const double tol = rank_threshold(rows, cols, sv(0));
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > tol ? 1 : 0;
    return r;
}

struct CrossVariationWitness {
    std::array<std::pair<int, int>, 4> obs{};   // (k,t) at (qL,pL), (qL,pH), (qH,pL), (qH,pH)
    double q_low = 0.0;
    double q_high = 0.0;
    double p_low = 0.0;
    double p_high = 0.0;
    double z4_det = 0.0;
};

struct IdentifiabilityOptions {
    double q_gap = 0.05;
    double p_gap = 0.05;
    double p_match_tol = 0.025;   // two observed rates count as the same level
    FitWindow window{};
};

struct IdentifiabilityReport {
    bool cross_variation = false;
    std::optional<CrossVariationWitness> witness;
    bool temporal_ok = false;
    int temporal_rank = 0;
    std::vector<double> temporal_singular_values;

    bool pass() const noexcept { return cross_variation && temporal_ok; }
};

// (i) composition-exposure cross-variation: looks for two batches with
// composition gap >= q_gap and two rate levels (matched across the batches
// within p_match_tol) separated by >= p_gap. The witness with the largest
// |det Z4| is reported; Z4 is built from the observed (q, pi) values.
// (ii) temporal non-degeneracy: rank of the rows [pi_t, Y_{t-1}, pi_t Y_{t-1}].
inline IdentifiabilityReport check_identifiability(const std::vector<SubpopSummary>& batches,
                                                   const PopulationSummary& pop,
                                                   const IdentifiabilityOptions& opt = {}) {
    IdentifiabilityReport rep;
    const int horizon = static_cast<int>(pop.y_path.size()) - 1;
    const auto [lo, hi] = opt.window.resolve(horizon);

    for (std::size_t k1 = 0; k1 < batches.size(); ++k1) {
        for (std::size_t k2 = 0; k2 < batches.size(); ++k2) {
            const auto& a = batches[k1];
            const auto& b = batches[k2];
            if (b.q_k - a.q_k < opt.q_gap) continue;   // a = low composition, b = high
            // matched (t_a, t_b) pairs with their common level
            struct Match { int ta, tb; double level; };
            std::optional<Match> low, high;
            for (int ta = lo; ta <= hi; ++ta) {
                for (int tb = lo; tb <= hi; ++tb) {
                    const double pa = a.pi_path[static_cast<std::size_t>(ta)];
                    const double pb = b.pi_path[static_cast<std::size_t>(tb)];
                    if (std::abs(pa - pb) > opt.p_match_tol) continue;
                    const double level = 0.5 * (pa + pb);
                    if (!low || level < low->level) low = Match{ta, tb, level};
                    if (!high || level > high->level) high = Match{ta, tb, level};
                }
            }
            if (!low || !high || high->level - low->level < opt.p_gap) continue;
            CrossVariationWitness w;
            w.q_low = a.q_k;
            w.q_high = b.q_k;
            w.p_low = low->level;
            w.p_high = high->level;
            w.obs = {std::pair{static_cast<int>(k1), low->ta}, std::pair{static_cast<int>(k1), high->ta},
                     std::pair{static_cast<int>(k2), low->tb}, std::pair{static_cast<int>(k2), high->tb}};
            Eigen::Matrix4d z;
            for (int r = 0; r < 4; ++r) {
                const auto& s = batches[static_cast<std::size_t>(w.obs[static_cast<std::size_t>(r)].first)];
                const double q = s.q_k;
                const double p = s.pi_path[static_cast<std::size_t>(w.obs[static_cast<std::size_t>(r)].second)];
                z.row(r) << 1.0, q, p, q * p;
            }
            w.z4_det = z.determinant();
            if (!rep.witness || std::abs(w.z4_det) > std::abs(rep.witness->z4_det)) rep.witness = w;
        }
    }
    rep.cross_variation = rep.witness.has_value() && std::abs(rep.witness->z4_det) > 0.0;

    Eigen::MatrixXd m(hi - lo + 1, 3);
    for (int t = lo; t <= hi; ++t) {
        const double p = pop.pi_path[static_cast<std::size_t>(t)];
        const double ylag = pop.y_path[static_cast<std::size_t>(t - 1)];
        m.row(t - lo) << p, ylag, p * ylag;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd sv = svd.singularValues();
    rep.temporal_singular_values.assign(sv.data(), sv.data() + sv.size());
    rep.temporal_rank = numerical_rank(sv, m.rows(), m.cols());
    rep.temporal_ok = rep.temporal_rank == 3;
    return rep;
}

struct FitReport {
    ThetaReduced theta_hat;
    double residual_sum_squares = 0.0;
    int design_rank = 0;
    double condition_estimate = 0.0;
    std::vector<double> singular_values;
    bool rank_deficient = false;
    std::size_t n_rows = 0;
    std::optional<IdentifiabilityReport> identifiability;
};

// Minimum-norm least squares through the SVD; singular values at or below
// rank_threshold are treated as zero.
inline FitReport fit_theta(const DesignSystem& d) {
    if (d.x.cols() != kThetaDim) throw ConfigError("fit_theta: design must have 7 columns");
    if (d.x.rows() < kThetaDim) throw EstimationError("fit_theta: fewer rows than parameters");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    FitReport rep;
    rep.n_rows = static_cast<std::size_t>(d.x.rows());
    rep.singular_values.assign(sv.data(), sv.data() + sv.size());
    rep.design_rank = numerical_rank(sv, d.x.rows(), d.x.cols());
    rep.rank_deficient = rep.design_rank < kThetaDim;
    const double smin = sv(sv.size() - 1);
    rep.condition_estimate = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();

    const double tol = rank_threshold(d.x.rows(), d.x.cols(), sv(0));
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(kThetaDim);
    const Eigen::VectorXd uty = svd.matrixU().transpose() * d.y;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) coef += svd.matrixV().col(i) * (uty(i) / sv(i));

    std::array<double, 7> a{};
    for (int i = 0; i < kThetaDim; ++i) a[static_cast<std::size_t>(i)] = coef(i);
    rep.theta_hat = ThetaReduced::from_array(a);
    rep.residual_sum_squares = (d.y - d.x * coef).squaredNorm();
    return rep;
}

struct CounterfactualPaths {
    EffectSeries tte_h;
    std::vector<double> human_treated;
    std::vector<double> human_control;
    std::vector<double> population_treated;
    std::vector<double> population_control;
};

// Human counterfactual propagation from Y_0: treated readout F(., 1, 1, 1),
// control readout F(., 0, 1, 0), population paths F(., w, q_bar, w).
// Rounds before opt.treat_start run under control in both arms.
inline CounterfactualPaths propagate_counterfactuals(const ThetaReduced& th, double q_bar, double y0, int t_max,
                                                     const CounterfactualOptions& opt = {}) {
    if (!th.finite() || !std::isfinite(y0) || !std::isfinite(q_bar))
        throw EstimationError("propagate_counterfactuals: non-finite input");
    const auto len = static_cast<std::size_t>(t_max) + 1;
    CounterfactualPaths p;
    p.tte_h = EffectSeries(t_max);
    p.human_treated.assign(len, y0);
    p.human_control.assign(len, y0);
    p.population_treated.assign(len, y0);
    p.population_control.assign(len, y0);
    for (std::size_t t = 1; t < len; ++t) {
        const double w = static_cast<int>(t) >= opt.treat_start ? 1.0 : 0.0;
        const bool own = opt.human_memory == HumanMemory::own;
        const double mem1 = own ? p.human_treated[t - 1] : p.population_treated[t - 1];
        const double mem0 = own ? p.human_control[t - 1] : p.population_control[t - 1];
        p.human_treated[t] = ese_step(mem1, w, 1.0, w, th);
        p.human_control[t] = ese_step(mem0, 0.0, 1.0, 0.0, th);
        p.population_treated[t] = ese_step(p.population_treated[t - 1], w, q_bar, w, th);
        p.population_control[t] = ese_step(p.population_control[t - 1], 0.0, q_bar, 0.0, th);
        for (double v : {p.human_treated[t], p.human_control[t], p.population_treated[t], p.population_control[t]})
            detail::check_cap(v, static_cast<int>(t), opt.cap);
        p.tte_h[static_cast<int>(t)] = p.human_treated[t] - p.human_control[t];
    }
    return p;
}

struct EstimatorOptions {
    FitWindow window{};
    bool strict = false;
    CounterfactualOptions counterfactual{};
    IdentifiabilityOptions identifiability{};
};

struct Estimate {
    EffectSeries effect;
    FitReport fit;
    CounterfactualPaths paths;
    Summaries summaries;
    std::vector<std::string> warnings;
};

inline Estimate estimate_tte_h(const Panel& panel, const std::vector<Subpopulation>& batches,
                               const EstimatorOptions& opt = {}) {
    panel.validate();
    Estimate est;
    est.summaries = summarize(panel, batches);
    const auto design = build_design(est.summaries.batches, est.summaries.population, opt.window);
    est.fit = fit_theta(design);
    IdentifiabilityOptions id = opt.identifiability;
    id.window = opt.window;
    est.fit.identifiability = check_identifiability(est.summaries.batches, est.summaries.population, id);
    if (est.fit.rank_deficient) {
        const std::string msg = "design rank " + std::to_string(est.fit.design_rank) +
                                " < 7; minimum-norm solution returned";
        if (opt.strict) throw IdentifiabilityError(msg);
        est.warnings.push_back(msg);
    }
    if (!est.fit.identifiability->pass()) {
        const std::string msg = "identifiability diagnostics failed (cross-variation: " +
                                std::string(est.fit.identifiability->cross_variation ? "pass" : "fail") +
                                ", temporal rank: " + std::to_string(est.fit.identifiability->temporal_rank) + ")";
        if (opt.strict) throw IdentifiabilityError(msg);
        est.warnings.push_back(msg);
    }
    est.paths = propagate_counterfactuals(est.fit.theta_hat, est.summaries.population.q_bar,
                                          est.summaries.population.y_path[0], panel.horizon(), opt.counterfactual);
    est.effect = est.paths.tte_h;
    return est;
}

}  // namespace mixsim
