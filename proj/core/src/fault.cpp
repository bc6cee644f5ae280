#include "eocs/fault.hpp"

#include <algorithm>
#include <cmath>

#include "eocs/errors.hpp"
#include "eocs/network.hpp"

namespace eocs {

void validate(const FaultSolverOptions& o) {
    if (!(o.tol > 0.0)) throw ValidationError("fault_solver.tol must be positive");
    if (o.max_iter < 1) throw ValidationError("fault_solver.max_iter must be >= 1");
    if (!(o.damping > 0.0 && o.damping <= 1.0)) throw ValidationError("fault_solver.damping must lie in (0,1]");
    if (!(o.big_m > 0.0)) throw ValidationError("fault_solver.M must be positive");
    if (o.n_levels < 0) throw ValidationError("fault_solver.n_levels must be >= 0");
    const auto& p = o.lvrt;
    if (!(0.0 < p.u_cut && p.u_cut < p.u_hold && p.u_hold <= 1.0)) {
        throw ValidationError("LVRT thresholds must satisfy 0 < U_cut < U_hold <= 1");
    }
    if (!(p.k_q >= 0.0)) throw ValidationError("LVRT reactive gain must be non-negative");
}

namespace {

Complex clamp_magnitude(Complex c, double limit) {
    const double mag = std::abs(c);
    return mag > limit ? c * (limit / mag) : c;
}

// Controlled-source regime common to FIPS and PIPS.
Complex controlled_current(double u, double active, const RenewableUnit& unit, const LvrtCurveParams& p) {
    if (u >= p.u_hold) return {std::min(active, unit.i_lim), 0.0};
    const double iq = std::min(p.k_q * (p.u_hold - u) * unit.rated_current, unit.i_lim);
    const double id = std::min(active, std::sqrt(std::max(unit.i_lim * unit.i_lim - iq * iq, 0.0)));
    return {id, -iq};
}

}  // namespace

Complex deep_regime_current(double u, const RenewableUnit& unit) {
    if (unit.kind == SourceKind::fips) return {0.0, -unit.i_lim};
    return clamp_magnitude(u * Complex(unit.i_dcb, unit.i_qcb), unit.i_lim);
}

Complex fips_current(double u1, const RenewableUnit& unit, const LvrtCurveParams& params) {
    if (u1 < params.u_cut) return deep_regime_current(u1, unit);
    return controlled_current(u1, unit.m * unit.rated_current, unit, params);
}

Complex pips_current(double u, const RenewableUnit& unit, const LvrtCurveParams& params) {
    if (u < params.u_cut) return deep_regime_current(u, unit);
    return controlled_current(u, unit.p0 / u, unit, params);
}

Complex renewable_current(double u, const RenewableUnit& unit, const LvrtCurveParams& params) {
    return unit.kind == SourceKind::fips ? fips_current(u, unit, params) : pips_current(u, unit, params);
}

std::vector<int> neighborhood(const GridModel& grid, const OperatingCondition& tau, int fault_bus, int levels) {
    const auto dist = hop_distances(adjacency(grid, tau), fault_bus);
    std::vector<int> out;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] >= 0 && dist[i] <= levels) out.push_back(static_cast<int>(i));
    }
    return out;
}

FaultSolution iterate_fault(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                            const FaultSolverOptions& options) {
    check_condition(grid, tau);
    if (protected_line < 0 || protected_line >= static_cast<int>(grid.branch_count())) {
        throw ValidationError("protected line " + std::to_string(protected_line) + " out of range");
    }
    if (!tau.in_service(static_cast<std::size_t>(protected_line))) {
        throw ProtectedLineOut("protected line " + std::to_string(protected_line) + " is out of service");
    }
    const auto adj = adjacency(grid, tau);
    const Branch& line = grid.branches()[static_cast<std::size_t>(protected_line)];
    const auto dist = hop_distances(adj, line.to_bus);
    if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; })) {
        throw Disconnected("operating condition islands part of the network");
    }

    const YBus y = apply_fault(build_ybus(grid, tau), {line.to_bus, options.big_m});
    const YBusFactorization lu(y);
    const auto n = static_cast<Eigen::Index>(grid.bus_count());

    FaultSolution sol;
    sol.provenance.assign(grid.bus_count(), InjectionSource::zero);
    Eigen::VectorXcd sync_injection = Eigen::VectorXcd::Zero(n);
    for (const auto& g : grid.sync_gens()) {
        sync_injection(g.bus) += Complex(g.emf, 0.0) / Complex(0.0, g.x_d2);
        sol.provenance[static_cast<std::size_t>(g.bus)] = InjectionSource::sync;
    }

    // Buses that still reach a synchronous machine without passing through
    // the faulted bus. A unit outside this set has lost its voltage
    // reference (no phase-locked steady state exists) and is taken as blocked.
    std::vector<char> referenced(grid.bus_count(), 0);
    {
        std::vector<int> queue;
        for (const auto& g : grid.sync_gens()) {
            if (g.bus != line.to_bus && !referenced[static_cast<std::size_t>(g.bus)]) {
                referenced[static_cast<std::size_t>(g.bus)] = 1;
                queue.push_back(g.bus);
            }
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (int nb : adj[static_cast<std::size_t>(queue[head])]) {
                if (nb == line.to_bus || referenced[static_cast<std::size_t>(nb)]) continue;
                referenced[static_cast<std::size_t>(nb)] = 1;
                queue.push_back(nb);
            }
        }
    }

    // Units beyond n levels of the fault keep zero injection throughout.
    std::vector<std::size_t> active;
    std::vector<Complex> unit_current;
    std::vector<char> deep;
    for (std::size_t u = 0; u < grid.renewables().size(); ++u) {
        const auto& unit = grid.renewables()[u];
        const int d = dist[static_cast<std::size_t>(unit.bus)];
        if (d <= options.n_levels && referenced[static_cast<std::size_t>(unit.bus)]) {
            active.push_back(u);
            unit_current.push_back(renewable_current(1.0, unit, options.lvrt));
            deep.push_back(0);
            sol.provenance[static_cast<std::size_t>(unit.bus)] = InjectionSource::renewable;
        }
    }

    // The network is linear given the unit currents x: V = V0 + Zc * x, with
    // Zc the impedance columns of the unit buses. Iterate on x alone.
    const std::size_t r_count = active.size();
    const Eigen::VectorXcd v0 = lu.solve(sync_injection);
    Eigen::MatrixXcd zc(n, static_cast<Eigen::Index>(r_count));
    for (std::size_t a = 0; a < r_count; ++a) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        e(grid.renewables()[active[a]].bus) = 1.0;
        zc.col(static_cast<Eigen::Index>(a)) = lu.solve(e);
    }
    auto unit_bus = [&](std::size_t a) { return grid.renewables()[active[a]].bus; };
    auto unit_voltages = [&](const std::vector<Complex>& x) {
        std::vector<Complex> v(r_count);
        for (std::size_t a = 0; a < r_count; ++a) {
            v[a] = v0(unit_bus(a));
            for (std::size_t b = 0; b < r_count; ++b) v[a] += zc(unit_bus(a), static_cast<Eigen::Index>(b)) * x[b];
        }
        return v;
    };
    // Injection of unit a at terminal voltage v, phase-locked to v.
    auto law = [&](std::size_t a, Complex v) {
        const auto& unit = grid.renewables()[active[a]];
        const double u = std::abs(v);
        const Complex local = deep[a] ? deep_regime_current(u, unit) : renewable_current(u, unit, options.lvrt);
        return local * std::polar(1.0, u > 0.0 ? std::arg(v) : 0.0);
    };
    auto residual = [&](const std::vector<Complex>& x, const std::vector<Complex>& v) {
        std::vector<Complex> r(r_count);
        for (std::size_t a = 0; a < r_count; ++a) r[a] = law(a, v[a]) - x[a];
        return r;
    };
    auto norm = [](const std::vector<Complex>& r) {
        double s = 0.0;
        for (const Complex& c : r) s += std::norm(c);
        return std::sqrt(s);
    };
    auto project = [&](std::vector<Complex>& x) {
        for (std::size_t a = 0; a < r_count; ++a) x[a] = clamp_magnitude(x[a], grid.renewables()[active[a]].i_lim);
    };

    std::vector<Complex> x = unit_current;
    const auto dim = static_cast<Eigen::Index>(2 * r_count);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        sol.iterations = iter;
        const std::vector<Complex> v = unit_voltages(x);
        for (std::size_t a = 0; a < r_count; ++a) {
            if (options.latch_deep_regime && std::abs(v[a]) < options.lvrt.u_cut) deep[a] = 1;
        }
        const std::vector<Complex> r = residual(x, v);
        double change = 0.0;
        for (const Complex& c : r) change = std::max(change, std::abs(c));
        if (change < options.tol) {
            sol.converged = true;
            break;
        }

        const double beta = iter > options.damping_after ? options.damping : 1.0;
        std::vector<Complex> candidate(r_count);
        bool accepted = false;
        if (options.newton) {
            // Jacobian of the residual in real coordinates: d law / d v by
            // central differences, chained with dv / dx = Zc.
            Eigen::MatrixXd jac = -Eigen::MatrixXd::Identity(dim, dim);
            for (std::size_t a = 0; a < r_count; ++a) {
                const double h = 1e-7 * std::max(std::abs(v[a]), 1e-6);
                const Complex d_re = (law(a, v[a] + h) - law(a, v[a] - h)) / (2.0 * h);
                const Complex d_im = (law(a, v[a] + Complex(0.0, h)) - law(a, v[a] - Complex(0.0, h))) / (2.0 * h);
                for (std::size_t b = 0; b < r_count; ++b) {
                    const Complex z = zc(unit_bus(a), static_cast<Eigen::Index>(b));
                    // dv/d(re x_b) = z, dv/d(im x_b) = j z
                    const Complex dre = d_re * z.real() + d_im * z.imag();
                    const Complex dim_ = d_re * (-z.imag()) + d_im * z.real();
                    const auto ra = static_cast<Eigen::Index>(2 * a);
                    const auto cb = static_cast<Eigen::Index>(2 * b);
                    jac(ra, cb) += dre.real();
                    jac(ra + 1, cb) += dre.imag();
                    jac(ra, cb + 1) += dim_.real();
                    jac(ra + 1, cb + 1) += dim_.imag();
                }
            }
            Eigen::VectorXd rv(dim);
            for (std::size_t a = 0; a < r_count; ++a) {
                rv(static_cast<Eigen::Index>(2 * a)) = r[a].real();
                rv(static_cast<Eigen::Index>(2 * a + 1)) = r[a].imag();
            }
            const Eigen::VectorXd delta = jac.partialPivLu().solve(-rv);
            if (delta.allFinite()) {
                const double r_norm = norm(r);
                for (double t = 1.0; t >= 1.0 / 64.0 && !accepted; t /= 2.0) {
                    for (std::size_t a = 0; a < r_count; ++a) {
                        candidate[a] = x[a] + t * Complex(delta(static_cast<Eigen::Index>(2 * a)),
                                                          delta(static_cast<Eigen::Index>(2 * a + 1)));
                    }
                    project(candidate);
                    accepted = norm(residual(candidate, unit_voltages(candidate))) < r_norm;
                }
            }
        }
        if (!accepted) {
            for (std::size_t a = 0; a < r_count; ++a) candidate[a] = x[a] + beta * r[a];
            project(candidate);
        }
        x = std::move(candidate);
    }

    Eigen::VectorXcd injection = sync_injection;
    sol.voltage = v0;
    for (std::size_t a = 0; a < r_count; ++a) {
        injection(unit_bus(a)) += x[a];
        sol.voltage += zc.col(static_cast<Eigen::Index>(a)) * x[a];
    }
    sol.injection = injection;
    sol.line_current = (sol.voltage(line.from_bus) - sol.voltage(line.to_bus)) / line.z;
    return sol;
}

FaultSolution solve_fault(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                          const FaultSolverOptions& options) {
    FaultSolution sol = iterate_fault(grid, tau, protected_line, options);
    if (!sol.converged) {
        throw NotConverged("renewable injections did not converge within " + std::to_string(options.max_iter) +
                           " iterations");
    }
    return sol;
}

double fault_current_magnitude(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                               const FaultSolverOptions& options) {
    return std::abs(solve_fault(grid, tau, protected_line, options).line_current);
}

}  // namespace eocs
