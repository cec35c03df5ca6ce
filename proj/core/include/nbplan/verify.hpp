#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nbplan/network.hpp"
#include "nbplan/planning.hpp"
#include "nbplan/sensitivity.hpp"

namespace nbplan {

struct CheckResult {
    std::string name;
    double max_violation = 0.0;  // absolute, in the check's unit
    std::string location;        // where the worst violation occurs
    std::size_t evaluated = 0;   // number of individual conditions checked
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    double tolerance = 1e-6;

    bool valid() const;
    /// Throws std::out_of_range for unknown names.
    const CheckResult& check(std::string_view name) const;
    /// Names of checks whose worst violation exceeds the tolerance.
    std::vector<std::string> failures() const;
};

/// Audits a plan against the network directly, without the LP. Checks:
/// nodal_balance, flow_angle, flow_ptdf, patl_base, tatl_post_outage,
/// patl_corrected, nb_balance, nb_bounds, generator_bounds, dispatch_bounds,
/// co2_cap.
VerificationReport verify_plan(const PlanResult& plan, const Network& network,
                               const SensitivitySet& sensitivities, const ScenarioConfig& config,
                               double tolerance = 1e-6);

}  // namespace nbplan
