#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nbplan/network.hpp"
#include "nbplan/planning.hpp"
#include "nbplan/verify.hpp"

namespace nbplan {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with ScenarioConfig field names. Values are
/// numbers, strings (quoted or bare) or ["a", "b"] lists; '#' starts a
/// comment. Unknown keys and repeated keys are errors.
ScenarioConfig parse_config(std::string_view text, std::string_view source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& file);
/// Text that parse_config reads back to the same config.
std::string format_config(const ScenarioConfig& config);

enum class ExitCode : int { Ok = 0, InputError = 1, SolveFailure = 2, VerificationFailure = 3 };

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // nothing is written when unset
    bool dump_lp = false;
    bool dump_sensitivities = false;
};

struct ScenarioOutcome {
    ModelKind model = ModelKind::Preventive;
    ExitCode code = ExitCode::SolveFailure;
    lp::SolveStatus status = lp::SolveStatus::Error;
    std::string message;
    std::optional<PlanResult> plan;
    std::optional<VerificationReport> report;
    std::vector<StageLog> stages;

    bool ok() const noexcept { return code == ExitCode::Ok; }
};

/// Build, solve, extract and verify one model. With an output directory the
/// verification table is always written; plan tables only for verified plans.
ScenarioOutcome run_scenario(const Network& network, const ScenarioConfig& config,
                             const RunOptions& options = {});

enum class SweepAxis { Co2Reduction, TatlFactor, NbCost };

std::string_view to_string(SweepAxis axis);
/// Accepts co2 / co2_reduction, tatl / tatl_factor, nbcost / nb_cost.
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepSpec {
    SweepAxis axis = SweepAxis::TatlFactor;
    std::vector<double> values;
    ScenarioConfig base;
    std::vector<ModelKind> models{ModelKind::Preventive, ModelKind::Sequential, ModelKind::Simultaneous};

    void validate() const;
};

/// Base config with the axis value applied. nb_cost sets both capital costs.
ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value);

struct SummaryRow {
    std::string scenario;
    std::string axis;
    double value = 0.0;
    ModelKind model = ModelKind::Preventive;
    std::string status;  // "optimal" or the failure kind
    double objective = 0.0;
    CostReport costs;
    double nb_up_mw = 0.0;
    double nb_down_mw = 0.0;
    double emissions = 0.0;
    // Tatl sweeps only: preventive generation cost minus this row's.
    std::optional<double> ci_delta_total;
    std::optional<double> ci_delta_capital;
    std::string message;
};

/// One row per (value, model), sorted by value position then model. Failed
/// points are recorded and the sweep continues. `jobs` = 0 picks the
/// hardware concurrency.
std::vector<SummaryRow> run_sweep(const Network& network, const SweepSpec& spec, std::size_t jobs = 1,
                                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string format_summary(const std::vector<SummaryRow>& rows);
void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& file);

struct Comparison {
    std::vector<SummaryRow> rows;  // preventive, sequential, simultaneous
    bool solved = false;
    bool dominance_holds = false;
    std::string message;
};

/// Runs all three models on `config` and checks that the simultaneous total
/// is within `relative_slack * |preventive|` of the better alternative.
Comparison compare_strategies(const Network& network, const ScenarioConfig& config,
                              const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                              double relative_slack = 1e-6);

}  // namespace nbplan
