#pragma once

#include <vector>

#include <Eigen/Dense>

#include "eocs/grid.hpp"

namespace eocs {

/// Low-voltage ride-through law shared by both inverter source models.
struct LvrtCurveParams {
    double u_hold = 0.9;  // at or above: pre-fault output
    double u_cut = 0.2;   // below: full reactive (FIPS) or crowbar (PIPS)
    double k_q = 1.5;     // reactive current per unit voltage dip, in units of I_N
};

struct FaultSolverOptions {
    double tol = 1e-6;
    int max_iter = 50;
    int damping_after = 25;
    double damping = 0.5;
    double big_m = 1e6;
    int n_levels = 3;
    // A unit seen below U_cut stays in the deep-fault regime for the rest of
    // the solve. Without this the law's jump at U_cut can leave no fixed point.
    bool latch_deep_regime = true;
    // Newton steps on the unit currents with a residual line search; when a
    // step does not reduce the residual (or with this off) the plain update,
    // damped after `damping_after` iterations, is taken.
    bool newton = true;
    LvrtCurveParams lvrt;
};

/// Throws ValidationError on inconsistent settings.
void validate(const FaultSolverOptions& options);

enum class InjectionSource : unsigned char { zero, sync, renewable };

struct FaultSolution {
    Eigen::VectorXcd voltage;
    Eigen::VectorXcd injection;            // injections used for `voltage`
    std::vector<InjectionSource> provenance;
    Complex line_current;                  // protected line, head end to fault end
    int iterations = 0;
    bool converged = false;
};

// Source models return the current phasor in the terminal-voltage frame
// (real part in phase with the voltage). A negative imaginary part lags the
// voltage, i.e. delivers reactive power to the grid.
Complex fips_current(double u1, const RenewableUnit& unit, const LvrtCurveParams& params);
Complex pips_current(double u, const RenewableUnit& unit, const LvrtCurveParams& params);
Complex renewable_current(double u, const RenewableUnit& unit, const LvrtCurveParams& params);
/// Deep-fault regime at voltage u regardless of U_cut: full reactive (FIPS)
/// or crowbar (PIPS).
Complex deep_regime_current(double u, const RenewableUnit& unit);

/// Buses within `levels` hops of `fault_bus` over in-service branches, ascending.
std::vector<int> neighborhood(const GridModel& grid, const OperatingCondition& tau, int fault_bus, int levels);

/// Fixed-point iteration without the convergence check; `converged` reports
/// the outcome.
FaultSolution iterate_fault(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                            const FaultSolverOptions& options = {});

/// Three-phase fault at the far end of `protected_line`. Throws NotConverged
/// when the renewable injections do not settle within `max_iter`.
FaultSolution solve_fault(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                          const FaultSolverOptions& options = {});

/// |I| through the protected line's head end.
double fault_current_magnitude(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                               const FaultSolverOptions& options = {});

}  // namespace eocs
