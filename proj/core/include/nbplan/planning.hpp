#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nbplan/lp.hpp"
#include "nbplan/network.hpp"
#include "nbplan/sensitivity.hpp"

namespace nbplan {

class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { Preventive, Sequential, Simultaneous };

std::string_view to_string(ModelKind model);
ModelKind parse_model_kind(std::string_view text);

struct ScenarioConfig {
    // CO2 limit: an absolute cap wins over a reduction against the baseline.
    std::optional<double> co2_cap;        // tCO2/a
    std::optional<double> co2_reduction;  // fraction in [0, 1)
    std::optional<double> co2_baseline;   // tCO2/a
    double tatl_factor = 1.3;
    double nb_capital_cost_up = 23000.0;    // EUR/MW/a
    double nb_capital_cost_down = 23000.0;  // EUR/MW/a
    double nb_dispatch_cost_up = 0.01;      // EUR/MWh
    double nb_dispatch_cost_down = 0.01;    // EUR/MWh
    ModelKind model = ModelKind::Sequential;
    std::optional<std::vector<std::string>> contingencies;  // default: every non-bridge line
    std::optional<std::string> slack_bus;                   // default: first bus
    double base_mva = 100.0;
    std::string backend = "simplex";
    lp::SolverOptions solver;
    double verify_tolerance = 1e-6;

    /// Throws PlanningError on out-of-range values.
    void validate() const;
    std::optional<double> effective_co2_cap() const;
};

/// Network plus everything derived from it that the builders share.
struct PlanningContext {
    const Network& network;
    SensitivitySet sensitivities;
    std::vector<std::size_t> contingencies;  // line indices

    PlanningContext(const Network& network, const ScenarioConfig& config);
};

/// Non-bridge lines named in the config, or all of them. Bridges in an
/// explicit list are an error; bridges in the default set are skipped with a
/// warning.
std::vector<std::size_t> resolve_contingencies(const Network& network,
                                               const SensitivitySet& sensitivities,
                                               const ScenarioConfig& config);

enum class Stage { Investment, NbPlacement, Simultaneous };

struct PlanningProblem {
    lp::LinearProgram lp;
    Stage stage = Stage::Investment;
    double tatl_factor = 1.0;
};

/// Lines x snapshots.
using FlowTable = Eigen::MatrixXd;

/// Generation investment with TATL-limited post-outage flows. With a TATL
/// factor of 1 this is the preventive N-1 problem.
PlanningProblem build_investment_lp(const PlanningContext& context, const ScenarioConfig& config);

/// Booster sizing against fixed pre-outage flows. Rejects flows that break the
/// TATL limit.
PlanningProblem build_nb_placement_lp(const PlanningContext& context, const FlowTable& fixed_flows,
                                      const ScenarioConfig& config);

/// Generation and booster investment in one LP.
PlanningProblem build_simultaneous_lp(const PlanningContext& context, const ScenarioConfig& config);

struct CostReport {
    double capital_generation = 0.0;
    double operation_generation = 0.0;
    double nb_capital = 0.0;
    double nb_operation = 0.0;
    double total = 0.0;

    double generation() const noexcept { return capital_generation + operation_generation; }
    double nb() const noexcept { return nb_capital + nb_operation; }
};

struct PlanResult {
    ModelKind model = ModelKind::Preventive;
    double tatl_factor = 1.0;
    std::optional<double> co2_cap;
    std::vector<std::size_t> contingencies;

    Eigen::VectorXd generator_capacity;  // generators
    Eigen::MatrixXd dispatch;            // generators x snapshots
    Eigen::MatrixXd line_flow;           // lines x snapshots
    Eigen::MatrixXd angles;              // buses x snapshots
    // Empty for the preventive model.
    Eigen::VectorXd nb_capacity_up;                // buses
    Eigen::VectorXd nb_capacity_down;              // buses
    std::vector<Eigen::MatrixXd> nb_dispatch_up;   // per contingency: buses x snapshots
    std::vector<Eigen::MatrixXd> nb_dispatch_down;

    CostReport costs;
    double emissions = 0.0;  // weighted tCO2/a
    std::vector<double> stage_objectives;

    bool has_boosters() const noexcept { return nb_capacity_up.size() > 0; }
    double total_nb_up() const { return has_boosters() ? nb_capacity_up.sum() : 0.0; }
    double total_nb_down() const { return has_boosters() ? nb_capacity_down.sum() : 0.0; }
    double solver_objective() const;
};

struct StageSolution {
    const PlanningProblem* problem;
    const lp::Solution* solution;
};

/// Reads every variable family by name from the stage solutions. Costs are
/// recomputed from coefficients and values. Throws PlanningError when a
/// variable the model requires is missing.
PlanResult extract_plan(const PlanningContext& context, const ScenarioConfig& config, ModelKind model,
                        const std::vector<StageSolution>& stages);

struct StageLog {
    std::string label;
    std::size_t variables = 0;
    std::size_t constraints = 0;
    lp::SolveStatus status = lp::SolveStatus::Error;
    double objective = 0.0;
    double build_seconds = 0.0;
    double solve_seconds = 0.0;
    std::size_t iterations = 0;
    std::string message;
};

struct ModelRun {
    ModelKind model = ModelKind::Preventive;
    lp::SolveStatus status = lp::SolveStatus::Error;
    std::string message;
    std::optional<PlanResult> plan;
    std::vector<StageLog> stages;
    std::vector<PlanningProblem> problems;  // kept for LP dumps

    bool optimal() const noexcept { return status == lp::SolveStatus::Optimal && plan.has_value(); }
};

/// Builds, solves and extracts `config.model`. Preventive runs force a TATL
/// factor of 1. Infeasible runs with a CO2 limit are re-solved without it to
/// say whether the limit is the cause.
ModelRun run_model(const PlanningContext& context, const ScenarioConfig& config,
                   bool keep_problems = false);

}  // namespace nbplan
