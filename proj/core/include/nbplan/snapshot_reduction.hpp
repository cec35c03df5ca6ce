#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nbplan {

/// Hourly series in the wide loads.csv / availability.csv layout.
struct TimeSeries {
    std::vector<std::string> labels;         // one per hour
    std::vector<std::string> load_columns;   // bus ids
    Eigen::MatrixXd loads;                   // hours x buses
    std::vector<std::string> availability_columns;  // generator ids
    Eigen::MatrixXd availability;            // hours x generators

    std::size_t hours() const noexcept { return labels.size(); }
};

/// Reads loads.csv and, if present, availability.csv from `dir`.
TimeSeries read_time_series(const std::filesystem::path& dir);

struct FeatureMatrix {
    Eigen::MatrixXd values;  // hours x features, each column scaled to [0, 1]
    std::vector<std::string> columns;
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    /// Min-max scaling per column. Constant columns map to 0.
    static FeatureMatrix normalize(const Eigen::MatrixXd& raw, std::vector<std::string> columns);
};

/// Demand columns are prefixed "load:", availability columns "avail:".
FeatureMatrix build_features(const TimeSeries& series);

struct ReductionOptions {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    /// Total weight to distribute; defaults to the number of source hours.
    std::optional<double> period_hours;
    std::size_t max_iterations = 300;
    double tolerance = 1e-6;
};

struct ReductionResult {
    std::vector<std::size_t> representatives;  // source hour per cluster, ascending
    std::vector<double> weights;               // hours represented, same order
    std::vector<std::size_t> assignment;       // cluster per source hour
    Eigen::MatrixXd centroids;                 // clusters x features
    std::size_t iterations = 0;
    bool converged = false;
};

/// k-means with k-means++ seeding and medoid snap-back. Clusters are
/// ordered by their representative hour.
ReductionResult reduce_snapshots(const FeatureMatrix& features, const ReductionOptions& options);

/// Writes snapshots.csv, loads.csv and availability.csv for the
/// representatives. Other network tables in `source_dir` are copied along so
/// the output is a loadable network directory.
void write_reduced_series(const TimeSeries& series, const ReductionResult& result,
                          const std::filesystem::path& source_dir, const std::filesystem::path& out_dir);

}  // namespace nbplan
