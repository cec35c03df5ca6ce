#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nbplan/network.hpp"

namespace nbplan {

/// Raised when an outage of a bridge line is requested; the post-outage
/// network would be islanded and distribution factors are undefined.
class BridgeContingencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kBridgeTolerance = 1e-6;

struct LodfResult {
    Eigen::MatrixXd lodf;       // lines x lines; bridge columns hold NaN
    std::vector<bool> bridge;   // per line, flagged from the denominator
};

/// PTDF and LODF for one network and slack choice.
struct SensitivitySet {
    Eigen::MatrixXd ptdf;       // lines x buses
    Eigen::MatrixXd lodf;       // lines x lines
    std::vector<bool> bridge;   // per line
    std::size_t slack = 0;

    bool is_bridge(std::size_t line) const { return bridge[line]; }
    double ptdf_at(std::size_t line, std::size_t bus) const {
        return ptdf(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(bus));
    }
    double lodf_at(std::size_t line, std::size_t outage) const {
        return lodf(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(outage));
    }
    /// Sensitivity of the flow on `line` to a bus injection once `outage`
    /// has tripped: PTDF[l,i] + LODF[l,k] * PTDF[k,i].
    double post_outage_ptdf(std::size_t line, std::size_t outage, std::size_t bus) const;
};

/// Flow on each line per MW injected at a bus and withdrawn at `slack`,
/// from the inverse of the susceptance Laplacian with the slack removed.
Eigen::MatrixXd compute_ptdf(const Network& network, std::size_t slack);

/// Line outage distribution factors from PTDF * K. The diagonal is -1.
/// Columns with |1 - [PTDF K]_kk| < tolerance are flagged as bridges.
LodfResult compute_lodf(const Eigen::MatrixXd& ptdf, const Eigen::MatrixXd& incidence,
                        double bridge_tolerance = kBridgeTolerance);

SensitivitySet compute_sensitivities(const Network& network, std::size_t slack = 0);

/// Direct DC power flow: solves the reduced Laplacian for angles and
/// returns line flows in MW. `outage`, when set, removes that line first.
/// Injections must sum to zero within 1e-6 MW.
std::vector<double> dc_flow(const Network& network, std::span<const double> injections,
                            std::optional<std::size_t> outage = std::nullopt);

/// Bus voltage angles (radians, slack bus 0) of the same solve.
std::vector<double> dc_angles(const Network& network, std::span<const double> injections,
                              std::size_t slack = 0,
                              std::optional<std::size_t> outage = std::nullopt);

/// Flows after outage of line `outage`: f_l + LODF[l,k] f_k for l != k.
/// The entry for the outaged line is zero.
std::vector<double> post_outage_flow(std::span<const double> base_flows,
                                     const SensitivitySet& sensitivities, std::size_t outage);

/// Lines whose removal disconnects the graph (Tarjan low-link).
std::vector<bool> find_bridges(const Network& network);

/// Writes ptdf.csv and lodf.csv (bridge columns as "nan").
void write_sensitivities_csv(const Network& network, const SensitivitySet& sensitivities,
                             const std::filesystem::path& dir);

}  // namespace nbplan
