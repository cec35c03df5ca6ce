#include "nbplan/planning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "nbplan/log.hpp"

namespace nbplan {

namespace {

using lp::kInf;
using lp::Sense;
using lp::Term;
using lp::VarId;

constexpr double kCoefficientFloor = 1e-12;

std::string join(std::initializer_list<std::string_view> parts) {
    std::string out;
    for (auto p : parts) {
        if (!out.empty()) out += '/';
        out += p;
    }
    return out;
}

std::string num(std::size_t i) { return std::to_string(i); }

// Variable names shared by builders and extraction.
namespace names {
std::string capacity(const Network& n, std::size_t s) { return join({"G", n.generators()[s].id}); }
std::string dispatch(const Network& n, std::size_t s, std::size_t t) {
    return join({"g", n.generators()[s].id, num(t)});
}
std::string flow(const Network& n, std::size_t l, std::size_t t) {
    return join({"f", n.lines()[l].id, num(t)});
}
std::string angle(const Network& n, std::size_t i, std::size_t t) {
    return join({"theta", n.buses()[i].id, num(t)});
}
std::string nb_capacity(const Network& n, std::size_t i, bool up) {
    return join({up ? "P_plus" : "P_minus", n.buses()[i].id});
}
std::string nb_dispatch(const Network& n, std::size_t i, std::size_t t, std::size_t k, bool up) {
    return join({up ? "p_plus" : "p_minus", n.buses()[i].id, num(t), n.lines()[k].id});
}
}  // namespace names

struct FlowVars {
    std::size_t snapshots = 0;
    std::vector<VarId> ids;  // line * T + t
    VarId at(std::size_t line, std::size_t t) const { return ids[line * snapshots + t]; }
};

struct NbVars {
    std::size_t snapshots = 0;
    std::size_t contingencies = 0;
    std::vector<VarId> cap_up, cap_down;  // per bus
    std::vector<VarId> up, down;          // (bus * C + c) * T + t
    std::size_t slot(std::size_t bus, std::size_t c, std::size_t t) const {
        return (bus * contingencies + c) * snapshots + t;
    }
};

// Generation, balance, DC flow, PATL and CO2 rows shared by the investment
// and simultaneous problems.
FlowVars add_generation_block(lp::LinearProgram& lp, const PlanningContext& ctx,
                              const ScenarioConfig& config) {
    const Network& net = ctx.network;
    const std::size_t T = net.snapshot_count();
    const std::size_t slack = ctx.sensitivities.slack;

    std::vector<VarId> capacity(net.generator_count());
    std::vector<VarId> dispatch(net.generator_count() * T);
    for (std::size_t s = 0; s < net.generator_count(); ++s) {
        const Generator& gen = net.generators()[s];
        const double lower = gen.extendable ? 0.0 : gen.max_capacity_mw;
        capacity[s] = lp.add_variable(names::capacity(net, s), lower, gen.max_capacity_mw, gen.capital_cost);
    }
    for (std::size_t s = 0; s < net.generator_count(); ++s)
        for (std::size_t t = 0; t < T; ++t)
            dispatch[s * T + t] = lp.add_variable(names::dispatch(net, s, t), 0.0, kInf,
                                                  net.snapshots()[t].weight_hours *
                                                      net.generators()[s].marginal_cost);

    std::vector<VarId> theta(net.bus_count() * T);
    for (std::size_t i = 0; i < net.bus_count(); ++i)
        for (std::size_t t = 0; t < T; ++t) {
            const bool fixed = i == slack;
            theta[i * T + t] = lp.add_variable(names::angle(net, i, t), fixed ? 0.0 : -kInf,
                                               fixed ? 0.0 : kInf, 0.0);
        }

    FlowVars flows{T, std::vector<VarId>(net.line_count() * T)};
    for (std::size_t l = 0; l < net.line_count(); ++l) {
        const double patl = net.lines()[l].patl_mw;
        for (std::size_t t = 0; t < T; ++t)
            flows.ids[l * T + t] = lp.add_variable(names::flow(net, l, t), -patl, patl, 0.0);
    }

    // Nodal balance: sum of dispatch at i minus net outflow equals demand.
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::vector<Term>> rows(net.bus_count());
        for (std::size_t s = 0; s < net.generator_count(); ++s)
            rows[net.generator_bus(s)].push_back({dispatch[s * T + t], 1.0});
        for (std::size_t l = 0; l < net.line_count(); ++l) {
            rows[net.line_from(l)].push_back({flows.at(l, t), -1.0});
            rows[net.line_to(l)].push_back({flows.at(l, t), 1.0});
        }
        for (std::size_t i = 0; i < net.bus_count(); ++i)
            lp.add_constraint(join({"balance", net.buses()[i].id, num(t)}), std::move(rows[i]),
                              Sense::Equal, net.demand(i, t));
    }

    // DC flow: f = b (theta_from - theta_to).
    for (std::size_t l = 0; l < net.line_count(); ++l) {
        const double b = net.susceptance_mw(l);
        for (std::size_t t = 0; t < T; ++t)
            lp.add_constraint(join({"flow", net.lines()[l].id, num(t)}),
                              {{flows.at(l, t), 1.0},
                               {theta[net.line_from(l) * T + t], -b},
                               {theta[net.line_to(l) * T + t], b}},
                              Sense::Equal, 0.0);
    }

    // Dispatch limited by availability times installed capacity.
    for (std::size_t s = 0; s < net.generator_count(); ++s)
        for (std::size_t t = 0; t < T; ++t)
            lp.add_constraint(join({"avail", net.generators()[s].id, num(t)}),
                              {{dispatch[s * T + t], 1.0}, {capacity[s], -net.availability(s, t)}},
                              Sense::LessEqual, 0.0);

    if (auto cap = config.effective_co2_cap()) {
        std::vector<Term> terms;
        for (std::size_t s = 0; s < net.generator_count(); ++s) {
            const Generator& gen = net.generators()[s];
            if (gen.emission_factor == 0.0) continue;
            for (std::size_t t = 0; t < T; ++t)
                terms.push_back({dispatch[s * T + t], net.snapshots()[t].weight_hours *
                                                          gen.emission_factor / gen.efficiency});
        }
        lp.add_constraint("co2", std::move(terms), Sense::LessEqual, *cap);
    }
    return flows;
}

// |f_l + LODF[l,k] f_k| <= factor * F_l for every snapshot, contingency and l != k.
void add_tatl_rows(lp::LinearProgram& lp, const PlanningContext& ctx, const FlowVars& flows,
                   double factor) {
    const Network& net = ctx.network;
    for (std::size_t t = 0; t < net.snapshot_count(); ++t)
        for (std::size_t k : ctx.contingencies)
            for (std::size_t l = 0; l < net.line_count(); ++l) {
                if (l == k) continue;
                const double limit = factor * net.lines()[l].patl_mw;
                std::vector<Term> terms{{flows.at(l, t), 1.0}};
                const double lodf = ctx.sensitivities.lodf_at(l, k);
                if (std::abs(lodf) > kCoefficientFloor) terms.push_back({flows.at(k, t), lodf});
                lp.add_range(join({"tatl", net.lines()[l].id, num(t), net.lines()[k].id}), terms,
                             -limit, limit);
            }
}

NbVars add_nb_block(lp::LinearProgram& lp, const PlanningContext& ctx, const ScenarioConfig& config) {
    const Network& net = ctx.network;
    NbVars nb;
    nb.snapshots = net.snapshot_count();
    nb.contingencies = ctx.contingencies.size();
    const std::size_t N = net.bus_count();
    for (std::size_t i = 0; i < N; ++i) {
        nb.cap_up.push_back(lp.add_variable(names::nb_capacity(net, i, true), 0.0, kInf,
                                            config.nb_capital_cost_up));
        nb.cap_down.push_back(lp.add_variable(names::nb_capacity(net, i, false), 0.0, kInf,
                                              config.nb_capital_cost_down));
    }
    nb.up.resize(N * nb.contingencies * nb.snapshots);
    nb.down.resize(nb.up.size());
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t c = 0; c < nb.contingencies; ++c)
            for (std::size_t t = 0; t < nb.snapshots; ++t) {
                const std::size_t k = ctx.contingencies[c];
                const double w = net.snapshots()[t].weight_hours;
                nb.up[nb.slot(i, c, t)] = lp.add_variable(names::nb_dispatch(net, i, t, k, true), 0.0,
                                                          kInf, w * config.nb_dispatch_cost_up);
                nb.down[nb.slot(i, c, t)] = lp.add_variable(names::nb_dispatch(net, i, t, k, false),
                                                            0.0, kInf, w * config.nb_dispatch_cost_down);
            }

    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t c = 0; c < nb.contingencies; ++c)
            for (std::size_t t = 0; t < nb.snapshots; ++t) {
                const std::string suffix =
                    join({net.buses()[i].id, num(t), net.lines()[ctx.contingencies[c]].id});
                lp.add_constraint("nb_up/" + suffix,
                                  {{nb.up[nb.slot(i, c, t)], 1.0}, {nb.cap_up[i], -1.0}},
                                  Sense::LessEqual, 0.0);
                lp.add_constraint("nb_down/" + suffix,
                                  {{nb.down[nb.slot(i, c, t)], 1.0}, {nb.cap_down[i], -1.0}},
                                  Sense::LessEqual, 0.0);
            }

    // Booster injections balance for every (t, k).
    for (std::size_t c = 0; c < nb.contingencies; ++c)
        for (std::size_t t = 0; t < nb.snapshots; ++t) {
            std::vector<Term> terms;
            for (std::size_t i = 0; i < N; ++i) {
                terms.push_back({nb.up[nb.slot(i, c, t)], 1.0});
                terms.push_back({nb.down[nb.slot(i, c, t)], -1.0});
            }
            lp.add_constraint(join({"nb_balance", num(t), net.lines()[ctx.contingencies[c]].id}),
                              std::move(terms), Sense::Equal, 0.0);
        }
    return nb;
}

// Corrected post-outage flow within PATL. With `flows` the pre-outage flows are
// variables; otherwise `fixed` supplies them and they move to the bounds.
void add_corrected_rows(lp::LinearProgram& lp, const PlanningContext& ctx, const NbVars& nb,
                        const FlowVars* flows, const FlowTable* fixed) {
    const Network& net = ctx.network;
    const SensitivitySet& sens = ctx.sensitivities;
    for (std::size_t c = 0; c < nb.contingencies; ++c) {
        const std::size_t k = ctx.contingencies[c];
        for (std::size_t l = 0; l < net.line_count(); ++l) {
            if (l == k) continue;
            const double lodf = sens.lodf_at(l, k);
            std::vector<double> coeff(net.bus_count());
            for (std::size_t i = 0; i < net.bus_count(); ++i) {
                coeff[i] = sens.post_outage_ptdf(l, k, i);
                if (std::abs(coeff[i]) < kCoefficientFloor) coeff[i] = 0.0;
            }
            const double patl = net.lines()[l].patl_mw;
            for (std::size_t t = 0; t < nb.snapshots; ++t) {
                std::vector<Term> terms;
                double offset = 0.0;
                if (flows) {
                    terms.push_back({flows->at(l, t), 1.0});
                    if (std::abs(lodf) > kCoefficientFloor) terms.push_back({flows->at(k, t), lodf});
                } else {
                    offset = (*fixed)(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t)) +
                             lodf * (*fixed)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
                }
                for (std::size_t i = 0; i < net.bus_count(); ++i) {
                    if (coeff[i] == 0.0) continue;
                    terms.push_back({nb.up[nb.slot(i, c, t)], coeff[i]});
                    terms.push_back({nb.down[nb.slot(i, c, t)], -coeff[i]});
                }
                lp.add_range(join({"corrected", net.lines()[l].id, num(t), net.lines()[k].id}), terms,
                             -patl - offset, patl - offset);
            }
        }
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string_view to_string(ModelKind model) {
    switch (model) {
        case ModelKind::Preventive: return "preventive";
        case ModelKind::Sequential: return "sequential";
        case ModelKind::Simultaneous: return "simultaneous";
    }
    return "preventive";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "preventive") return ModelKind::Preventive;
    if (text == "sequential") return ModelKind::Sequential;
    if (text == "simultaneous") return ModelKind::Simultaneous;
    throw PlanningError("unknown model '" + std::string(text) +
                        "' (expected preventive, sequential or simultaneous)");
}

void ScenarioConfig::validate() const {
    if (!(tatl_factor >= 1.0)) throw PlanningError("tatl_factor must be at least 1");
    for (double c : {nb_capital_cost_up, nb_capital_cost_down, nb_dispatch_cost_up, nb_dispatch_cost_down})
        if (!(c >= 0.0) || !std::isfinite(c)) throw PlanningError("booster costs must be non-negative");
    if (co2_cap && !(*co2_cap >= 0.0)) throw PlanningError("co2_cap must be non-negative");
    if (co2_reduction) {
        if (!(*co2_reduction >= 0.0 && *co2_reduction < 1.0))
            throw PlanningError("co2_reduction must lie in [0, 1)");
        if (!co2_cap && !co2_baseline)
            throw PlanningError("co2_reduction requires co2_baseline");
    }
    if (co2_baseline && !(*co2_baseline >= 0.0)) throw PlanningError("co2_baseline must be non-negative");
    if (!(verify_tolerance > 0.0)) throw PlanningError("verify_tolerance must be positive");
}

std::optional<double> ScenarioConfig::effective_co2_cap() const {
    if (co2_cap) return co2_cap;
    if (co2_reduction && co2_baseline) return (1.0 - *co2_reduction) * *co2_baseline;
    return std::nullopt;
}

std::vector<std::size_t> resolve_contingencies(const Network& network,
                                               const SensitivitySet& sensitivities,
                                               const ScenarioConfig& config) {
    const auto graph_bridges = find_bridges(network);
    std::vector<std::size_t> result;
    if (config.contingencies) {
        for (const auto& id : *config.contingencies) {
            std::size_t l = 0;
            try {
                l = network.line_index(id);
            } catch (const DataError&) {
                throw PlanningError("contingency line '" + id + "' does not exist");
            }
            if (graph_bridges[l] || sensitivities.is_bridge(l))
                throw PlanningError("contingency line '" + id + "' is a bridge; its outage islands the network");
            if (std::find(result.begin(), result.end(), l) == result.end()) result.push_back(l);
        }
        return result;
    }
    for (std::size_t l = 0; l < network.line_count(); ++l) {
        if (graph_bridges[l] || sensitivities.is_bridge(l)) {
            log::warning("excluding bridge line '" + network.lines()[l].id + "' from the contingency set");
            continue;
        }
        result.push_back(l);
    }
    return result;
}

PlanningContext::PlanningContext(const Network& net, const ScenarioConfig& config)
    : network(net),
      sensitivities(compute_sensitivities(net, config.slack_bus ? net.bus_index(*config.slack_bus) : 0)),
      contingencies(resolve_contingencies(net, sensitivities, config)) {}

PlanningProblem build_investment_lp(const PlanningContext& context, const ScenarioConfig& config) {
    config.validate();
    PlanningProblem problem;
    problem.stage = Stage::Investment;
    problem.tatl_factor = config.tatl_factor;
    FlowVars flows = add_generation_block(problem.lp, context, config);
    add_tatl_rows(problem.lp, context, flows, config.tatl_factor);
    return problem;
}

PlanningProblem build_nb_placement_lp(const PlanningContext& context, const FlowTable& fixed_flows,
                                      const ScenarioConfig& config) {
    config.validate();
    const Network& net = context.network;
    if (fixed_flows.rows() != static_cast<Eigen::Index>(net.line_count()) ||
        fixed_flows.cols() != static_cast<Eigen::Index>(net.snapshot_count()))
        throw PlanningError("fixed flow table must be lines x snapshots");

    for (std::size_t t = 0; t < net.snapshot_count(); ++t)
        for (std::size_t k : context.contingencies)
            for (std::size_t l = 0; l < net.line_count(); ++l) {
                if (l == k) continue;
                const double post = fixed_flows(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t)) +
                                    context.sensitivities.lodf_at(l, k) *
                                        fixed_flows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
                const double limit = config.tatl_factor * net.lines()[l].patl_mw;
                if (std::abs(post) > limit + config.verify_tolerance) {
                    std::ostringstream msg;
                    msg << "stage-one flows violate the TATL limit: line '" << net.lines()[l].id
                        << "' at snapshot " << t << " after outage of '" << net.lines()[k].id
                        << "' carries " << post << " MW (limit " << limit << " MW)";
                    throw PlanningError(msg.str());
                }
            }

    PlanningProblem problem;
    problem.stage = Stage::NbPlacement;
    problem.tatl_factor = config.tatl_factor;
    NbVars nb = add_nb_block(problem.lp, context, config);
    add_corrected_rows(problem.lp, context, nb, nullptr, &fixed_flows);
    return problem;
}

PlanningProblem build_simultaneous_lp(const PlanningContext& context, const ScenarioConfig& config) {
    config.validate();
    PlanningProblem problem;
    problem.stage = Stage::Simultaneous;
    problem.tatl_factor = config.tatl_factor;
    FlowVars flows = add_generation_block(problem.lp, context, config);
    add_tatl_rows(problem.lp, context, flows, config.tatl_factor);
    NbVars nb = add_nb_block(problem.lp, context, config);
    add_corrected_rows(problem.lp, context, nb, &flows, nullptr);
    return problem;
}

double PlanResult::solver_objective() const {
    double total = 0.0;
    for (double v : stage_objectives) total += v;
    return total;
}

PlanResult extract_plan(const PlanningContext& context, const ScenarioConfig& config, ModelKind model,
                        const std::vector<StageSolution>& stages) {
    const Network& net = context.network;
    const std::size_t T = net.snapshot_count();
    for (const auto& s : stages)
        if (!s.solution->optimal()) throw PlanningError("cannot extract a plan from a non-optimal solve");

    auto value = [&](const std::string& name) {
        for (const auto& s : stages)
            if (auto id = s.problem->lp.find_variable(name)) {
                if (id->index >= s.solution->primal.size())
                    throw PlanningError("corrupted solve: no value for variable '" + name + "'");
                return s.solution->primal[id->index];
            }
        throw PlanningError("corrupted solve: missing variable '" + name + "'");
    };

    PlanResult plan;
    plan.model = model;
    plan.tatl_factor = model == ModelKind::Preventive ? 1.0 : config.tatl_factor;
    plan.co2_cap = config.effective_co2_cap();
    plan.contingencies = context.contingencies;
    for (const auto& s : stages) plan.stage_objectives.push_back(s.solution->objective);

    const auto G = static_cast<Eigen::Index>(net.generator_count());
    const auto L = static_cast<Eigen::Index>(net.line_count());
    const auto N = static_cast<Eigen::Index>(net.bus_count());
    const auto TT = static_cast<Eigen::Index>(T);

    plan.generator_capacity.resize(G);
    plan.dispatch.resize(G, TT);
    for (std::size_t s = 0; s < net.generator_count(); ++s) {
        plan.generator_capacity(static_cast<Eigen::Index>(s)) = value(names::capacity(net, s));
        for (std::size_t t = 0; t < T; ++t)
            plan.dispatch(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
                value(names::dispatch(net, s, t));
    }
    plan.line_flow.resize(L, TT);
    for (std::size_t l = 0; l < net.line_count(); ++l)
        for (std::size_t t = 0; t < T; ++t)
            plan.line_flow(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t)) =
                value(names::flow(net, l, t));
    plan.angles.resize(N, TT);
    for (std::size_t i = 0; i < net.bus_count(); ++i)
        for (std::size_t t = 0; t < T; ++t)
            plan.angles(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                value(names::angle(net, i, t));

    CostReport& costs = plan.costs;
    for (std::size_t s = 0; s < net.generator_count(); ++s) {
        const Generator& gen = net.generators()[s];
        costs.capital_generation += gen.capital_cost * plan.generator_capacity(static_cast<Eigen::Index>(s));
        for (std::size_t t = 0; t < T; ++t) {
            const double g = plan.dispatch(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
            const double w = net.snapshots()[t].weight_hours;
            costs.operation_generation += w * gen.marginal_cost * g;
            plan.emissions += w * gen.emission_factor / gen.efficiency * g;
        }
    }

    if (model != ModelKind::Preventive) {
        plan.nb_capacity_up.resize(N);
        plan.nb_capacity_down.resize(N);
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            plan.nb_capacity_up(static_cast<Eigen::Index>(i)) = value(names::nb_capacity(net, i, true));
            plan.nb_capacity_down(static_cast<Eigen::Index>(i)) = value(names::nb_capacity(net, i, false));
        }
        costs.nb_capital = config.nb_capital_cost_up * plan.nb_capacity_up.sum() +
                           config.nb_capital_cost_down * plan.nb_capacity_down.sum();
        for (std::size_t k : context.contingencies) {
            Eigen::MatrixXd up(N, TT), down(N, TT);
            for (std::size_t i = 0; i < net.bus_count(); ++i)
                for (std::size_t t = 0; t < T; ++t) {
                    const double pu = value(names::nb_dispatch(net, i, t, k, true));
                    const double pd = value(names::nb_dispatch(net, i, t, k, false));
                    up(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = pu;
                    down(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = pd;
                    const double w = net.snapshots()[t].weight_hours;
                    costs.nb_operation += w * (config.nb_dispatch_cost_up * pu + config.nb_dispatch_cost_down * pd);
                }
            plan.nb_dispatch_up.push_back(std::move(up));
            plan.nb_dispatch_down.push_back(std::move(down));
        }
    }
    costs.total = costs.capital_generation + costs.operation_generation + costs.nb_capital + costs.nb_operation;
    return plan;
}

ModelRun run_model(const PlanningContext& context, const ScenarioConfig& config, bool keep_problems) {
    config.validate();
    ModelRun run;
    run.model = config.model;
    auto backend = lp::make_backend(config.backend);

    std::vector<PlanningProblem> problems;
    std::vector<lp::Solution> solutions;
    problems.reserve(2);
    solutions.reserve(2);

    auto stage = [&](const std::string& label, auto&& build) -> bool {
        StageLog entry;
        entry.label = label;
        auto start = std::chrono::steady_clock::now();
        problems.push_back(build());
        entry.build_seconds = seconds_since(start);
        const auto& problem = problems.back().lp;
        entry.variables = problem.variable_count();
        entry.constraints = problem.constraint_count();
        start = std::chrono::steady_clock::now();
        solutions.push_back(backend->solve(problem, config.solver));
        entry.solve_seconds = seconds_since(start);
        const lp::Solution& sol = solutions.back();
        entry.status = sol.status;
        entry.objective = sol.objective;
        entry.iterations = sol.iterations;
        entry.message = sol.message;
        std::ostringstream msg;
        msg << to_string(config.model) << " / " << label << ": " << entry.variables << " variables, "
            << entry.constraints << " constraints, build " << entry.build_seconds << " s, solve "
            << entry.solve_seconds << " s, status " << lp::to_string(sol.status);
        if (sol.optimal()) msg << ", objective " << sol.objective;
        log::info(msg.str());
        run.stages.push_back(std::move(entry));
        if (sol.optimal()) return true;
        run.status = sol.status;
        run.message = label + " LP " + std::string(lp::to_string(sol.status)) +
                      (sol.message.empty() ? "" : ": " + sol.message);
        return false;
    };

    auto diagnose = [&](auto&& rebuild) {
        if (run.status != lp::SolveStatus::Infeasible || !config.effective_co2_cap()) return;
        ScenarioConfig relaxed = config;
        relaxed.co2_cap.reset();
        relaxed.co2_reduction.reset();
        PlanningProblem problem = rebuild(relaxed);
        if (backend->solve(problem.lp, config.solver).optimal()) {
            std::ostringstream msg;
            msg << run.message << "; the CO2 cap constraint 'co2' (limit " << *config.effective_co2_cap()
                << " tCO2/a) cannot be met: the problem is feasible without it";
            run.message = msg.str();
        }
    };

    bool ok = false;
    switch (config.model) {
        case ModelKind::Preventive: {
            ScenarioConfig preventive = config;
            preventive.tatl_factor = 1.0;
            auto build = [&](const ScenarioConfig& c) { return build_investment_lp(context, c); };
            ok = stage("investment", [&] { return build(preventive); });
            if (!ok) diagnose([&](ScenarioConfig c) { c.tatl_factor = 1.0; return build(c); });
            break;
        }
        case ModelKind::Sequential: {
            auto build = [&](const ScenarioConfig& c) { return build_investment_lp(context, c); };
            ok = stage("investment", [&] { return build(config); });
            if (!ok) {
                diagnose(build);
                break;
            }
            PlanResult first = extract_plan(context, config, ModelKind::Preventive,
                                            {{&problems[0], &solutions[0]}});
            ok = stage("nb_placement", [&] { return build_nb_placement_lp(context, first.line_flow, config); });
            break;
        }
        case ModelKind::Simultaneous: {
            auto build = [&](const ScenarioConfig& c) { return build_simultaneous_lp(context, c); };
            ok = stage("simultaneous", [&] { return build(config); });
            if (!ok) diagnose(build);
            break;
        }
    }

    if (ok) {
        std::vector<StageSolution> stages;
        for (std::size_t i = 0; i < problems.size(); ++i) stages.push_back({&problems[i], &solutions[i]});
        run.plan = extract_plan(context, config, config.model, stages);
        run.status = lp::SolveStatus::Optimal;
    }
    if (keep_problems) run.problems = std::move(problems);
    return run;
}

}  // namespace nbplan
