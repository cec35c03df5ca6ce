#include "nbplan/snapshot_reduction.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "csv.hpp"
#include "nbplan/network.hpp"

namespace nbplan {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

struct Wide {
    std::vector<std::string> labels;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

Wide read_wide(const std::filesystem::path& file) {
    csv::Table table = csv::read(file);
    if (table.header.empty() || table.header[0] != "snapshot")
        throw DataError(file.filename().string() + ": first column must be 'snapshot'");
    Wide wide;
    wide.columns.assign(table.header.begin() + 1, table.header.end());
    wide.values.resize(ix(table.rows.size()), ix(wide.columns.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        wide.labels.push_back(table.rows[r][0]);
        for (std::size_t c = 0; c < wide.columns.size(); ++c)
            wide.values(ix(r), ix(c)) = csv::parse_double(table, r, c + 1);
    }
    return wide;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Nearest centroid, ties to the lowest index.
std::size_t nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point, double* distance = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
        const double d = (centroids.row(j) - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(j);
        }
    }
    if (distance) *distance = best_d;
    return best;
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& x, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    Eigen::MatrixXd centroids(ix(k), x.cols());
    std::vector<bool> chosen(n, false);
    std::size_t first = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
    centroids.row(0) = x.row(ix(first));
    chosen[first] = true;
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = (x.row(ix(i)) - centroids.row(0)).squaredNorm();

    for (std::size_t j = 1; j < k; ++j) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double running = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] == 0.0) continue;
                running += d2[i];
                pick = i;
                if (running > target) break;
            }
        } else {
            // Every point coincides with a chosen centre.
            for (std::size_t i = 0; i < n && pick == n; ++i)
                if (!chosen[i]) pick = i;
        }
        chosen[pick] = true;
        centroids.row(ix(j)) = x.row(ix(pick));
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], (x.row(ix(i)) - centroids.row(ix(j))).squaredNorm());
    }
    return centroids;
}

}  // namespace

TimeSeries read_time_series(const std::filesystem::path& dir) {
    TimeSeries series;
    Wide loads = read_wide(dir / "loads.csv");
    series.labels = std::move(loads.labels);
    series.load_columns = std::move(loads.columns);
    series.loads = std::move(loads.values);
    if (std::filesystem::exists(dir / "availability.csv")) {
        Wide avail = read_wide(dir / "availability.csv");
        if (avail.labels != series.labels)
            throw DataError("availability.csv: snapshot labels differ from loads.csv");
        series.availability_columns = std::move(avail.columns);
        series.availability = std::move(avail.values);
    } else {
        series.availability.resize(ix(series.hours()), 0);
    }
    if (series.hours() == 0) throw DataError("loads.csv: no hours");
    return series;
}

FeatureMatrix FeatureMatrix::normalize(const Eigen::MatrixXd& raw, std::vector<std::string> columns) {
    FeatureMatrix f;
    f.columns = std::move(columns);
    f.min = raw.colwise().minCoeff().transpose();
    f.max = raw.colwise().maxCoeff().transpose();
    f.values.resize(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const double span = f.max(c) - f.min(c);
        if (span > 0.0)
            f.values.col(c) = ((raw.col(c).array() - f.min(c)) / span).matrix();
        else
            f.values.col(c).setZero();
    }
    return f;
}

FeatureMatrix build_features(const TimeSeries& series) {
    Eigen::MatrixXd raw(ix(series.hours()), series.loads.cols() + series.availability.cols());
    raw << series.loads, series.availability;
    std::vector<std::string> columns;
    for (const auto& c : series.load_columns) columns.push_back("load:" + c);
    for (const auto& c : series.availability_columns) columns.push_back("avail:" + c);
    return FeatureMatrix::normalize(raw, std::move(columns));
}

ReductionResult reduce_snapshots(const FeatureMatrix& features, const ReductionOptions& options) {
    const Eigen::MatrixXd& x = features.values;
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t k = options.k;
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (k > n)
        throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                    " source hours");
    const double period = options.period_hours.value_or(static_cast<double>(n));
    if (!(period > 0.0)) throw std::invalid_argument("period length must be positive");

    std::mt19937_64 rng(options.seed);
    ReductionResult result;
    result.centroids = seed_centroids(x, k, rng);
    result.assignment.assign(n, k);

    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = nearest(result.centroids, x.row(ix(i)));
            changed |= j != result.assignment[i];
            result.assignment[i] = j;
        }
        result.iterations = iter + 1;

        // Re-seed empty clusters with the point farthest from its centroid,
        // taken from a cluster that can spare it.
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t a : result.assignment) ++counts[a];
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[result.assignment[i]] < 2) continue;
                const double d = (x.row(ix(i)) - result.centroids.row(ix(result.assignment[i]))).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[result.assignment[far]];
            result.assignment[far] = j;
            counts[j] = 1;
            result.centroids.row(ix(j)) = x.row(ix(far));
            changed = true;
        }

        Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(ix(k), x.cols());
        for (std::size_t i = 0; i < n; ++i) updated.row(ix(result.assignment[i])) += x.row(ix(i));
        for (std::size_t j = 0; j < k; ++j) updated.row(ix(j)) /= static_cast<double>(counts[j]);
        const double movement = (updated - result.centroids).rowwise().norm().maxCoeff();
        result.centroids = std::move(updated);
        if (!changed && movement <= options.tolerance) {
            result.converged = true;
            break;
        }
    }

    // Medoid snap-back: the member nearest its centroid, ties to the earliest hour.
    std::vector<std::size_t> medoid(k, n);
    std::vector<double> medoid_d(k, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = result.assignment[i];
        const double d = (x.row(ix(i)) - result.centroids.row(ix(j))).squaredNorm();
        if (d < medoid_d[j]) {
            medoid_d[j] = d;
            medoid[j] = i;
        }
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return medoid[a] < medoid[b]; });

    std::vector<std::size_t> relabel(k);
    Eigen::MatrixXd centroids(ix(k), x.cols());
    double assigned = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t j = order[r];
        relabel[j] = r;
        centroids.row(ix(r)) = result.centroids.row(ix(j));
        result.representatives.push_back(medoid[j]);
        double w = static_cast<double>(counts[j]) / static_cast<double>(n) * period;
        if (r + 1 == k) w = period - assigned;
        result.weights.push_back(w);
        assigned += w;
    }
    for (auto& a : result.assignment) a = relabel[a];
    result.centroids = std::move(centroids);
    return result;
}

void write_reduced_series(const TimeSeries& series, const ReductionResult& result,
                          const std::filesystem::path& source_dir, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto open = [](const std::filesystem::path& file) {
        std::ofstream out(file, std::ios::binary);
        if (!out) throw DataError("cannot write " + file.string());
        return out;
    };
    {
        auto out = open(out_dir / "snapshots.csv");
        csv::write_row(out, {"snapshot", "weight_hours"});
        for (std::size_t r = 0; r < result.representatives.size(); ++r)
            csv::write_row(out, {series.labels[result.representatives[r]], csv::format_double(result.weights[r])});
    }
    auto write_wide = [&](const std::filesystem::path& file, const std::vector<std::string>& columns,
                          const Eigen::MatrixXd& values) {
        auto out = open(file);
        std::vector<std::string> row{"snapshot"};
        row.insert(row.end(), columns.begin(), columns.end());
        csv::write_row(out, row);
        for (std::size_t h : result.representatives) {
            row.assign(1, series.labels[h]);
            for (Eigen::Index c = 0; c < values.cols(); ++c) row.push_back(csv::format_double(values(ix(h), c)));
            csv::write_row(out, row);
        }
    };
    write_wide(out_dir / "loads.csv", series.load_columns, series.loads);
    if (!series.availability_columns.empty())
        write_wide(out_dir / "availability.csv", series.availability_columns, series.availability);

    if (std::filesystem::equivalent(source_dir, out_dir)) return;
    for (const char* name : {"buses.csv", "lines.csv", "generators.csv"})
        if (std::filesystem::exists(source_dir / name))
            std::filesystem::copy_file(source_dir / name, out_dir / name,
                                       std::filesystem::copy_options::overwrite_existing);
}

}  // namespace nbplan
