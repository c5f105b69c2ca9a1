#pragma once
// Panel builders shared by the unit tests.

#include <functional>
#include <random>
#include <vector>

#include "mixsim/core_model.hpp"
#include "mixsim/ese.hpp"
#include "mixsim/subpop.hpp"

namespace mixsim::testing {

// n_groups equal-size groups with constant prior groups_q[g]; treatments drawn
// from `plan` (warmup rows stay zero).
inline Panel grouped_panel(const std::vector<double>& groups_q, std::size_t per_group, const TreatmentPlan& plan,
                           std::uint64_t seed) {
    const std::size_t n = groups_q.size() * per_group;
    Panel p(n, plan.horizon());
    p.t_warmup = plan.t_warmup;
    p.seed = seed;
    for (std::size_t i = 0; i < n; ++i) p.q[i] = groups_q[i / per_group];
    p.w = assign_treatments(plan, n, SeedTree(seed));
    return p;
}

// Fills y so that every unit follows unit_fn(i, t, Y_{t-1}, pi_t) where Y and
// pi are the realized population aggregates; round 0 is y0 for everyone.
inline void fill_outcomes(Panel& p, double y0,
                          const std::function<double(std::size_t, int, double, double)>& unit_fn) {
    const std::size_t n = p.n_units();
    for (std::size_t i = 0; i < n; ++i) p.y(i, 0) = y0;
    double ylag = y0;
    for (int t = 1; t <= p.horizon(); ++t) {
        const auto ut = static_cast<std::size_t>(t);
        double pi = 0.0;
        for (std::size_t i = 0; i < n; ++i) pi += p.w(i, ut);
        pi /= static_cast<double>(n);
        double ysum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p.y(i, ut) = unit_fn(i, t, ylag, pi);
            ysum += p.y(i, ut);
        }
        ylag = ysum / static_cast<double>(n);
    }
}

// Unit outcomes F(Y_{t-1}, W_it, q_i, pi_t; theta): batch means of a
// constant-prior batch then follow the recursion exactly.
inline void fill_ese_outcomes(Panel& p, const ThetaReduced& th, double y0) {
    fill_outcomes(p, y0, [&](std::size_t i, int t, double ylag, double pi) {
        return ese_step(ylag, p.w(i, static_cast<std::size_t>(t)), p.q[i], pi, th);
    });
}

inline PopulationConfig small_config(std::size_t n, int warm, int main, std::uint64_t seed) {
    PopulationConfig c;
    c.n_units = n;
    c.t_warmup = warm;
    c.t_main = main;
    c.seed = seed;
    return c;
}

}  // namespace mixsim::testing
