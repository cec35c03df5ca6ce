#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nbplan/network.hpp"
#include "nbplan/planning.hpp"
#include "nbplan/verify.hpp"

namespace nbplan {

/// Writes capacities.csv, dispatch.csv, flows.csv, nb_capacities.csv,
/// nb_dispatch.csv and costs.json into `dir` (created if missing).
/// `stage_labels` name the entries of plan.stage_objectives in costs.json.
void write_plan(const PlanResult& plan, const Network& network, const std::filesystem::path& dir,
                const std::vector<std::string>& stage_labels = {});

/// check,max_violation,location,evaluated,passed
void write_verification(const VerificationReport& report, const std::filesystem::path& file);

}  // namespace nbplan
