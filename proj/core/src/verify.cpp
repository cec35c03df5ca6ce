#include "nbplan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nbplan {

namespace {

class Tracker {
public:
    explicit Tracker(std::string name) { result_.name = std::move(name); }

    // NaN counts as an infinite violation.
    template <typename Where>
    void see(double violation, Where&& where) {
        ++result_.evaluated;
        if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
        if (violation > result_.max_violation) {
            result_.max_violation = violation;
            result_.location = where();
        }
    }

    CheckResult take() { return std::move(result_); }

private:
    CheckResult result_;
};

double excess(double value, double limit) { return std::max(0.0, std::abs(value) - limit); }

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

bool VerificationReport::valid() const { return failures().empty(); }

const CheckResult& VerificationReport::check(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no verification check named '" + std::string(name) + "'");
}

std::vector<std::string> VerificationReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!(c.max_violation <= tolerance)) out.push_back(c.name);
    return out;
}

VerificationReport verify_plan(const PlanResult& plan, const Network& net, const SensitivitySet& sens,
                               const ScenarioConfig& config, double tolerance) {
    const std::size_t N = net.bus_count();
    const std::size_t L = net.line_count();
    const std::size_t S = net.generator_count();
    const std::size_t T = net.snapshot_count();
    if (plan.generator_capacity.size() != ix(S) || plan.dispatch.rows() != ix(S) ||
        plan.dispatch.cols() != ix(T) || plan.line_flow.rows() != ix(L) || plan.line_flow.cols() != ix(T) ||
        plan.angles.rows() != ix(N) || plan.angles.cols() != ix(T))
        throw PlanningError("plan dimensions do not match the network");
    if (plan.has_boosters() &&
        (plan.nb_capacity_up.size() != ix(N) || plan.nb_capacity_down.size() != ix(N) ||
         plan.nb_dispatch_up.size() != plan.contingencies.size() ||
         plan.nb_dispatch_down.size() != plan.contingencies.size()))
        throw PlanningError("booster dimensions do not match the network");

    auto bus_at = [&](std::size_t i, std::size_t t) {
        return "bus '" + net.buses()[i].id + "', snapshot " + std::to_string(t);
    };
    auto line_at = [&](std::size_t l, std::size_t t) {
        return "line '" + net.lines()[l].id + "', snapshot " + std::to_string(t);
    };
    auto outage_at = [&](std::size_t l, std::size_t t, std::size_t k) {
        return line_at(l, t) + ", outage '" + net.lines()[k].id + "'";
    };

    // Net injection per bus and snapshot.
    Eigen::MatrixXd injection = -net.demand_matrix();
    for (std::size_t s = 0; s < S; ++s) injection.row(ix(net.generator_bus(s))) += plan.dispatch.row(ix(s));

    VerificationReport report;
    report.tolerance = tolerance;

    {
        Tracker balance("nodal_balance");
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> residual(N);
            for (std::size_t i = 0; i < N; ++i) residual[i] = injection(ix(i), ix(t));
            for (std::size_t l = 0; l < L; ++l) {
                residual[net.line_from(l)] -= plan.line_flow(ix(l), ix(t));
                residual[net.line_to(l)] += plan.line_flow(ix(l), ix(t));
            }
            for (std::size_t i = 0; i < N; ++i) balance.see(std::abs(residual[i]), [&] { return bus_at(i, t); });
        }
        report.checks.push_back(balance.take());
    }
    {
        Tracker angle("flow_angle");
        Tracker ptdf("flow_ptdf");
        const Eigen::MatrixXd ptdf_flows = sens.ptdf * injection;
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t t = 0; t < T; ++t) {
                const double f = plan.line_flow(ix(l), ix(t));
                const double physical = net.susceptance_mw(l) * (plan.angles(ix(net.line_from(l)), ix(t)) -
                                                                 plan.angles(ix(net.line_to(l)), ix(t)));
                angle.see(std::abs(f - physical), [&] { return line_at(l, t); });
                ptdf.see(std::abs(f - ptdf_flows(ix(l), ix(t))), [&] { return line_at(l, t); });
            }
        report.checks.push_back(angle.take());
        report.checks.push_back(ptdf.take());
    }
    {
        Tracker patl("patl_base");
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t t = 0; t < T; ++t)
                patl.see(excess(plan.line_flow(ix(l), ix(t)), net.lines()[l].patl_mw), [&] { return line_at(l, t); });
        report.checks.push_back(patl.take());
    }
    {
        Tracker tatl("tatl_post_outage");
        Tracker corrected("patl_corrected");
        for (std::size_t c = 0; c < plan.contingencies.size(); ++c) {
            const std::size_t k = plan.contingencies[c];
            for (std::size_t t = 0; t < T; ++t) {
                Eigen::VectorXd nb;
                if (plan.has_boosters())
                    nb = plan.nb_dispatch_up[c].col(ix(t)) - plan.nb_dispatch_down[c].col(ix(t));
                for (std::size_t l = 0; l < L; ++l) {
                    if (l == k) continue;
                    const double post =
                        plan.line_flow(ix(l), ix(t)) + sens.lodf_at(l, k) * plan.line_flow(ix(k), ix(t));
                    tatl.see(excess(post, plan.tatl_factor * net.lines()[l].patl_mw),
                             [&] { return outage_at(l, t, k); });
                    if (!plan.has_boosters()) continue;
                    double shifted = post;
                    for (std::size_t i = 0; i < N; ++i) shifted += sens.post_outage_ptdf(l, k, i) * nb(ix(i));
                    corrected.see(excess(shifted, net.lines()[l].patl_mw), [&] { return outage_at(l, t, k); });
                }
            }
        }
        report.checks.push_back(tatl.take());
        report.checks.push_back(corrected.take());
    }
    {
        Tracker balance("nb_balance");
        Tracker bounds("nb_bounds");
        if (plan.has_boosters()) {
            for (std::size_t i = 0; i < N; ++i) {
                bounds.see(-plan.nb_capacity_up(ix(i)), [&] { return "bus '" + net.buses()[i].id + "' P_plus"; });
                bounds.see(-plan.nb_capacity_down(ix(i)), [&] { return "bus '" + net.buses()[i].id + "' P_minus"; });
            }
            for (std::size_t c = 0; c < plan.contingencies.size(); ++c) {
                const std::string& outage = net.lines()[plan.contingencies[c]].id;
                for (std::size_t t = 0; t < T; ++t) {
                    const double residual =
                        plan.nb_dispatch_up[c].col(ix(t)).sum() - plan.nb_dispatch_down[c].col(ix(t)).sum();
                    balance.see(std::abs(residual),
                                [&] { return "snapshot " + std::to_string(t) + ", outage '" + outage + "'"; });
                    for (std::size_t i = 0; i < N; ++i) {
                        const double up = plan.nb_dispatch_up[c](ix(i), ix(t));
                        const double down = plan.nb_dispatch_down[c](ix(i), ix(t));
                        auto where = [&] { return bus_at(i, t) + ", outage '" + outage + "'"; };
                        bounds.see(std::max({-up, up - plan.nb_capacity_up(ix(i))}), where);
                        bounds.see(std::max({-down, down - plan.nb_capacity_down(ix(i))}), where);
                    }
                }
            }
        }
        report.checks.push_back(balance.take());
        report.checks.push_back(bounds.take());
    }
    {
        Tracker capacity("generator_bounds");
        Tracker dispatch("dispatch_bounds");
        for (std::size_t s = 0; s < S; ++s) {
            const Generator& gen = net.generators()[s];
            const double G = plan.generator_capacity(ix(s));
            const double lower = gen.extendable ? 0.0 : gen.max_capacity_mw;
            capacity.see(std::max({lower - G, G - gen.max_capacity_mw}),
                         [&] { return "generator '" + gen.id + "'"; });
            for (std::size_t t = 0; t < T; ++t) {
                const double g = plan.dispatch(ix(s), ix(t));
                dispatch.see(std::max({-g, g - net.availability(s, t) * G}),
                             [&] { return "generator '" + gen.id + "', snapshot " + std::to_string(t); });
            }
        }
        report.checks.push_back(capacity.take());
        report.checks.push_back(dispatch.take());
    }
    {
        Tracker co2("co2_cap");
        if (auto cap = config.effective_co2_cap()) {
            double emissions = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                const Generator& gen = net.generators()[s];
                for (std::size_t t = 0; t < T; ++t)
                    emissions += net.snapshots()[t].weight_hours * gen.emission_factor / gen.efficiency *
                                 plan.dispatch(ix(s), ix(t));
            }
            co2.see(std::max(0.0, emissions - *cap), [] { return std::string("system"); });
        }
        report.checks.push_back(co2.take());
    }
    return report;
}

}  // namespace nbplan
