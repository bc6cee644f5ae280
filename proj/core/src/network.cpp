#include "eocs/network.hpp"

#include <fstream>
#include <iomanip>
#include <vector>

#include <Eigen/SparseLU>

#include "eocs/errors.hpp"

namespace eocs {

YBus build_ybus(const GridModel& grid, const OperatingCondition& tau) {
    check_condition(grid, tau);
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(4 * grid.branch_count() + grid.bus_count());
    for (const auto& br : grid.branches()) {
        if (!tau.in_service(static_cast<std::size_t>(br.id))) continue;
        const Complex y = 1.0 / br.z;
        triplets.emplace_back(br.from_bus, br.from_bus, y);
        triplets.emplace_back(br.to_bus, br.to_bus, y);
        triplets.emplace_back(br.from_bus, br.to_bus, -y);
        triplets.emplace_back(br.to_bus, br.from_bus, -y);
    }
    YBus out;
    out.shunt = Eigen::VectorXcd::Zero(n);
    bool any_source = false;
    for (const auto& g : grid.sync_gens()) {
        const Complex y = 1.0 / Complex(0.0, g.x_d2);
        out.shunt(g.bus) += y;
        any_source = true;
    }
    if (!any_source) throw SingularMatrix("Y-bus has no source shunt");
    for (Eigen::Index i = 0; i < n; ++i) {
        // Explicit diagonal keeps the sparsity pattern stable for fault updates.
        triplets.emplace_back(i, i, out.shunt(i));
    }
    out.matrix.resize(n, n);
    out.matrix.setFromTriplets(triplets.begin(), triplets.end());
    out.matrix.makeCompressed();
    return out;
}

YBus apply_fault(const YBus& y, const FaultDelta& delta) {
    if (delta.bus < 0 || delta.bus >= y.dimension()) throw ValidationError("fault bus out of range");
    YBus out = y;
    out.matrix.coeffRef(delta.bus, delta.bus) += delta.magnitude;
    return out;
}

struct YBusFactorization::Impl {
    Eigen::SparseLU<SparseComplex, Eigen::COLAMDOrdering<int>> lu;
};

YBusFactorization::YBusFactorization(const YBus& y, double residual_tol)
    : matrix_(y.matrix), impl_(std::make_unique<Impl>()), residual_tol_(residual_tol) {
    impl_->lu.compute(matrix_);
    if (impl_->lu.info() != Eigen::Success) {
        throw SingularMatrix("Y-bus factorization failed: " + impl_->lu.lastErrorMessage());
    }
}

YBusFactorization::~YBusFactorization() = default;

Eigen::VectorXcd YBusFactorization::solve(const Eigen::VectorXcd& rhs) const {
    if (rhs.size() != matrix_.rows()) throw ValidationError("right-hand side length mismatch");
    const double scale = rhs.cwiseAbs().maxCoeff();
    if (scale == 0.0) return Eigen::VectorXcd::Zero(rhs.size());
    Eigen::VectorXcd v = impl_->lu.solve(rhs);
    Eigen::VectorXcd r = rhs - matrix_ * v;
    v += impl_->lu.solve(r);
    r = rhs - matrix_ * v;
    const double rel = r.cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(rel)) throw SingularMatrix("solve produced non-finite values");
    if (rel > residual_tol_) {
        throw DidNotConverge("relative residual " + std::to_string(rel) + " exceeds tolerance after refinement");
    }
    return v;
}

Eigen::VectorXcd solve(const YBus& y, const Eigen::VectorXcd& current) {
    return YBusFactorization(y).solve(current);
}

ZMatrix impedance_matrix(const YBus& y) {
    const YBusFactorization lu(y);
    const Eigen::Index n = y.dimension();
    ZMatrix z;
    z.matrix.resize(n, n);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e(j) = 1.0;
        z.matrix.col(j) = lu.solve(e);
        e(j) = 0.0;
    }
    return z;
}

namespace {

std::ofstream open_market(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "%%MatrixMarket matrix coordinate complex general\n" << std::setprecision(17);
    return out;
}

}  // namespace

void write_matrix_market(const YBus& y, const std::filesystem::path& path) {
    auto out = open_market(path);
    out << y.matrix.rows() << ' ' << y.matrix.cols() << ' ' << y.matrix.nonZeros() << '\n';
    for (Eigen::Index k = 0; k < y.matrix.outerSize(); ++k) {
        for (SparseComplex::InnerIterator it(y.matrix, k); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value().real() << ' ' << it.value().imag()
                << '\n';
        }
    }
}

void write_matrix_market(const ZMatrix& z, const std::filesystem::path& path) {
    auto out = open_market(path);
    const auto& m = z.matrix;
    out << m.rows() << ' ' << m.cols() << ' ' << m.size() << '\n';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out << i + 1 << ' ' << j + 1 << ' ' << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
        }
    }
}

}  // namespace eocs
