#pragma once

#include <array>
#include <iosfwd>
#include <span>

#include <Eigen/Dense>

#include "eocs/grid.hpp"

namespace eocs {

/// The four parallel node-feature matrices, each N x (N+1). Column N is the
/// protected-line indicator: +1 at the head (measuring) bus, -1 at the
/// fault-end bus.
struct FeatureSet {
    Eigen::MatrixXd p;   // component parameters
    Eigen::MatrixXd t;   // topology
    Eigen::MatrixXd dz;  // electrical distance
    Eigen::MatrixXd d;   // graph distance

    static constexpr std::size_t channel_count = 4;
    const Eigen::MatrixXd& channel(std::size_t c) const;
    Eigen::MatrixXd& channel(std::size_t c);
    Eigen::Index bus_count() const { return p.rows(); }
};

/// Diagonal: component code; off-diagonal: |z| of the in-service branch.
Eigen::MatrixXd component_matrix(const GridModel& grid, const OperatingCondition& tau0);
/// Adjacency of the in-service graph plus identity.
Eigen::MatrixXd topology_matrix(const GridModel& grid, const OperatingCondition& tau0);
/// |Z_ij| off the diagonal, zero on it.
Eigen::MatrixXd electrical_distance_matrix(const GridModel& grid, const OperatingCondition& tau0);
/// Hop counts from Dijkstra on the unit-weight in-service graph.
Eigen::MatrixXd graph_distance_matrix(const GridModel& grid, const OperatingCondition& tau0);

/// Dijkstra shortest paths on an unweighted adjacency list. Throws
/// Disconnected when some pair is unreachable.
Eigen::MatrixXd all_pairs_hops(const std::vector<std::vector<int>>& adj);

double component_code(BusKind kind);

/// Unscaled features with the indicator column appended.
FeatureSet encode_raw(const GridModel& grid, const OperatingCondition& tau0, int protected_line);

/// Per-channel min-max map of off-diagonal entries onto [0,1]. Diagonals and
/// the indicator column pass through unchanged.
struct FeatureScaler {
    std::array<double, 4> lo{0.0, 0.0, 0.0, 0.0};
    std::array<double, 4> hi{1.0, 1.0, 1.0, 1.0};

    static FeatureScaler fit(std::span<const FeatureSet> training);
    void apply(FeatureSet& fs) const;
    void invert(FeatureSet& fs) const;

    bool operator==(const FeatureScaler&) const = default;
};

FeatureSet encode(const GridModel& grid, const OperatingCondition& tau0, int protected_line,
                  const FeatureScaler& scaler);

/// Binary record: u32 channel count, u32 rows, u32 cols, then each channel
/// row-major as little-endian f64.
void write_feature_set(std::ostream& out, const FeatureSet& fs);
FeatureSet read_feature_set(std::istream& in);

}  // namespace eocs
