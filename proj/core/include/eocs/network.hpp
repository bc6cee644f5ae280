#pragma once

#include <filesystem>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "eocs/grid.hpp"

namespace eocs {

using SparseComplex = Eigen::SparseMatrix<Complex>;

/// Positive-sequence bus admittance matrix, source shunts included.
struct YBus {
    SparseComplex matrix;
    Eigen::VectorXcd shunt;  // total shunt admittance per bus

    Eigen::Index dimension() const { return matrix.rows(); }
};

/// Bolted three-phase fault: `magnitude` is added to the faulted diagonal.
struct FaultDelta {
    int bus = 0;
    double magnitude = 1e6;
};

/// Dense node impedance matrix, Z = Y^-1.
struct ZMatrix {
    Eigen::MatrixXcd matrix;
};

YBus build_ybus(const GridModel& grid, const OperatingCondition& tau);

YBus apply_fault(const YBus& y, const FaultDelta& delta);

/// Sparse LU of a Y-bus. Solves apply one step of iterative refinement and
/// verify the relative residual against `residual_tol`.
class YBusFactorization {
  public:
    explicit YBusFactorization(const YBus& y, double residual_tol = 1e-10);
    ~YBusFactorization();
    YBusFactorization(const YBusFactorization&) = delete;
    YBusFactorization& operator=(const YBusFactorization&) = delete;

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    Eigen::Index dimension() const { return matrix_.rows(); }

  private:
    struct Impl;
    SparseComplex matrix_;
    std::unique_ptr<Impl> impl_;
    double residual_tol_;
};

Eigen::VectorXcd solve(const YBus& y, const Eigen::VectorXcd& current);

ZMatrix impedance_matrix(const YBus& y);

/// Matrix Market coordinate dumps for external inspection.
void write_matrix_market(const YBus& y, const std::filesystem::path& path);
void write_matrix_market(const ZMatrix& z, const std::filesystem::path& path);

}  // namespace eocs
