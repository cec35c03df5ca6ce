#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace nbplan {

/// Raised for malformed or inconsistent input data. The message carries the
/// offending file and row when the data came from disk.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Bus {
    std::string id;
    std::string name;
    std::optional<double> x;
    std::optional<double> y;
};

struct Line {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double reactance_pu = 0.0;
    double patl_mw = 0.0;
};

struct Generator {
    std::string id;
    std::string bus;
    double capital_cost = 0.0;      // EUR/MW/a
    double marginal_cost = 0.0;     // EUR/MWh
    double max_capacity_mw = 0.0;
    double emission_factor = 0.0;   // tCO2/MWh of fuel
    double efficiency = 1.0;
    bool extendable = true;
    // Per-snapshot availability factor. Empty means always available (1.0).
    std::vector<double> availability;
};

struct Snapshot {
    std::string label;
    double weight_hours = 1.0;
};

/// Plain aggregate used to assemble a network before validation.
struct NetworkData {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    // demand[bus id] -> MW per snapshot; buses without an entry have zero demand.
    std::unordered_map<std::string, std::vector<double>> demand;
    std::vector<Snapshot> snapshots;
    double base_mva = 100.0;
    // Snapshot weights must sum to this many hours. Unset skips the check.
    std::optional<double> period_hours = 8760.0;
};

/// Immutable, validated power-system description. Buses, lines and
/// generators are addressed by their position in file order.
class Network {
public:
    explicit Network(NetworkData data);

    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Line>& lines() const noexcept { return lines_; }
    const std::vector<Generator>& generators() const noexcept { return generators_; }
    const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }

    std::size_t bus_count() const noexcept { return buses_.size(); }
    std::size_t line_count() const noexcept { return lines_.size(); }
    std::size_t generator_count() const noexcept { return generators_.size(); }
    std::size_t snapshot_count() const noexcept { return snapshots_.size(); }
    double base_mva() const noexcept { return base_mva_; }

    std::size_t bus_index(std::string_view id) const;
    std::size_t line_index(std::string_view id) const;
    std::size_t generator_index(std::string_view id) const;

    std::size_t line_from(std::size_t line) const noexcept { return line_from_[line]; }
    std::size_t line_to(std::size_t line) const noexcept { return line_to_[line]; }
    std::size_t generator_bus(std::size_t gen) const noexcept { return gen_bus_[gen]; }

    /// Series susceptance in MW per radian: base_mva / reactance.
    double susceptance_mw(std::size_t line) const noexcept;

    double demand(std::size_t bus, std::size_t snapshot) const noexcept {
        return demand_(static_cast<Eigen::Index>(bus), static_cast<Eigen::Index>(snapshot));
    }
    double availability(std::size_t gen, std::size_t snapshot) const noexcept;

    /// Demand matrix, buses x snapshots.
    const Eigen::MatrixXd& demand_matrix() const noexcept { return demand_; }

    double total_weight() const noexcept;

    /// Copy of the inputs, for building a modified network. period_hours is
    /// set to the current total weight.
    NetworkData data() const;

private:
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    std::vector<Generator> generators_;
    std::vector<Snapshot> snapshots_;
    Eigen::MatrixXd demand_;
    double base_mva_ = 100.0;

    std::unordered_map<std::string, std::size_t> bus_index_;
    std::unordered_map<std::string, std::size_t> line_index_;
    std::unordered_map<std::string, std::size_t> gen_index_;
    std::vector<std::size_t> line_from_;
    std::vector<std::size_t> line_to_;
    std::vector<std::size_t> gen_bus_;
};

struct LoadOptions {
    double base_mva = 100.0;
    std::optional<double> period_hours = 8760.0;
};

/// Reads buses.csv, lines.csv, generators.csv, availability.csv, loads.csv
/// and snapshots.csv from `dir`.
Network load_network(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the six CSV files so that load_network(dir) reproduces `network`.
void save_network(const Network& network, const std::filesystem::path& dir);

/// Bus x line incidence: +1 at the from bus, -1 at the to bus.
Eigen::MatrixXd incidence_matrix(const Network& network);

/// True when every bus is reachable from the first one, ignoring lines
/// flagged in `removed` (may be empty).
bool is_connected(const Network& network, const std::vector<bool>& removed = {});

/// Identifiers end up inside LP variable names, so they are restricted to
/// letters, digits, '_' and '.'.
bool is_valid_identifier(std::string_view id);

}  // namespace nbplan
