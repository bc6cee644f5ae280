#include "eocs/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eocs/errors.hpp"
#include "eocs/parallel.hpp"

namespace eocs {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTieTol = 1e-12;

// Relative comparison used for every argmax so near-identical currents fall
// back to the outage-count / lexicographic tie-break.
bool strictly_greater(double a, double b) { return a > b + kTieTol * std::max(std::abs(a), std::abs(b)); }

bool preferred(double a_cur, const std::vector<int>& a_out, double b_cur, const std::vector<int>& b_out) {
    if (std::isnan(a_cur)) return false;
    if (std::isnan(b_cur)) return true;
    if (strictly_greater(a_cur, b_cur)) return true;
    if (strictly_greater(b_cur, a_cur)) return false;
    if (a_out.size() != b_out.size()) return a_out.size() < b_out.size();
    return a_out < b_out;
}

std::vector<int> added_between(const OperatingCondition& tau0, const OperatingCondition& tau) {
    std::vector<int> out;
    for (std::size_t b = 0; b < tau.size(); ++b) {
        if (tau0.in_service(b) && !tau.in_service(b)) out.push_back(static_cast<int>(b));
    }
    return out;
}

double evaluate_condition(const GridModel& grid, const OperatingCondition& tau, int line,
                          const FaultSolverOptions& fault) {
    try {
        return fault_current_magnitude(grid, tau, line, fault);
    } catch (const NotConverged&) {
        return kNaN;
    } catch (const DidNotConverge&) {
        return kNaN;
    }
}

std::vector<std::uint8_t> label_of(const GridModel& grid, const std::vector<int>& added) {
    std::vector<std::uint8_t> label(grid.line_count(), 0);
    for (int b : added) label[static_cast<std::size_t>(grid.line_index(b))] = 1;
    return label;
}

SearchResult finish(const GridModel& grid, const EocsProblem& problem, const OperatingCondition& tau_star,
                    double current, std::size_t evaluations, std::size_t failures, Clock::time_point start) {
    SearchResult r;
    r.tau_star = tau_star;
    r.eoc_label = label_of(grid, added_between(problem.tau0, tau_star));
    r.i_max = current;
    r.evaluations = evaluations;
    r.failures = failures;
    r.wall_time = Clock::now() - start;
    return r;
}

SearchResult enumerate_over(const GridModel& grid, const EocsProblem& problem, const std::vector<int>& pool,
                            const SearchOptions& options) {
    const auto start = Clock::now();
    validate(grid, problem);
    const auto conds = candidates(grid, problem, pool);
    std::vector<double> currents(conds.size(), kNaN);
    parallel_for(conds.size(), options.workers, [&](std::size_t i) {
        currents[i] = evaluate_condition(grid, conds[i], problem.protected_line, options.fault);
    });
    // Candidates arrive sorted by (outage count, lexicographic), so keeping
    // the first of equal maxima applies the tie-break.
    std::size_t best = conds.size();
    std::size_t failures = 0;
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (std::isnan(currents[i])) {
            ++failures;
            continue;
        }
        if (best == conds.size() || strictly_greater(currents[i], currents[best])) best = i;
    }
    if (best == conds.size()) throw NoFeasibleCandidate("every candidate condition failed to converge");
    return finish(grid, problem, conds[best], currents[best], conds.size(), failures, start);
}

}  // namespace

void validate(const GridModel& grid, const EocsProblem& problem) {
    check_condition(grid, problem.tau0);
    if (problem.protected_line < 0 || problem.protected_line >= static_cast<int>(grid.branch_count())) {
        throw ValidationError("protected line out of range");
    }
    if (grid.line_index(problem.protected_line) < 0) {
        throw ValidationError("protected branch " + std::to_string(problem.protected_line) + " is not a line");
    }
    if (!problem.tau0.in_service(static_cast<std::size_t>(problem.protected_line))) {
        throw ProtectedLineOut("protected line is out of service in tau0");
    }
    if (problem.k < 0) throw ValidationError("outage budget k must be non-negative");
    if (!is_connected(grid, problem.tau0)) throw Disconnected("tau0 is not connected");
}

void validate(const GaParams& p) {
    if (p.population < 2 || p.population % 2 != 0) throw ValidationError("GA population must be even and >= 2");
    if (p.generations < 0) throw ValidationError("GA generations must be non-negative");
    if (p.tournament < 1) throw ValidationError("GA tournament size must be >= 1");
    if (p.crossover_rate < 0.0 || p.crossover_rate > 1.0) throw ValidationError("GA crossover rate outside [0,1]");
    if (p.mutation_rate < 0.0 || p.mutation_rate > 1.0) throw ValidationError("GA mutation rate outside [0,1]");
}

std::vector<int> outage_pool(const GridModel& grid, const EocsProblem& problem) {
    std::vector<int> pool;
    for (int b : grid.lines()) {
        if (b != problem.protected_line && problem.tau0.in_service(static_cast<std::size_t>(b))) pool.push_back(b);
    }
    return pool;
}

std::vector<OperatingCondition> candidates(const GridModel& grid, const EocsProblem& problem) {
    return candidates(grid, problem, outage_pool(grid, problem));
}

std::vector<OperatingCondition> candidates(const GridModel& grid, const EocsProblem& problem,
                                           const std::vector<int>& pool) {
    std::vector<OperatingCondition> out;
    const int p = static_cast<int>(pool.size());
    const int kmax = std::min(problem.k, p);
    std::vector<int> idx;
    for (int size = 0; size <= kmax; ++size) {
        idx.resize(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (;;) {
            OperatingCondition tau = problem.tau0;
            for (int i : idx) tau.set(static_cast<std::size_t>(pool[static_cast<std::size_t>(i)]), false);
            if (is_connected(grid, tau)) out.push_back(std::move(tau));
            // Advance to the next combination in lexicographic order.
            int pos = size - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == p - size + pos) --pos;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int j = pos + 1; j < size; ++j) {
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    }
    return out;
}

std::vector<int> local_pool(const GridModel& grid, const EocsProblem& problem, int levels) {
    const auto adj = adjacency(grid, problem.tau0);
    const Branch& line = grid.branches()[static_cast<std::size_t>(problem.protected_line)];
    const auto d_from = hop_distances(adj, line.from_bus);
    const auto d_to = hop_distances(adj, line.to_bus);
    auto near = [&](int bus) {
        const auto i = static_cast<std::size_t>(bus);
        const int d = std::min(d_from[i] < 0 ? levels + 1 : d_from[i], d_to[i] < 0 ? levels + 1 : d_to[i]);
        return d <= levels;
    };
    std::vector<int> pool;
    for (int b : outage_pool(grid, problem)) {
        const Branch& br = grid.branches()[static_cast<std::size_t>(b)];
        if (near(br.from_bus) && near(br.to_bus)) pool.push_back(b);
    }
    return pool;
}

SearchResult enumerate_global(const GridModel& grid, const EocsProblem& problem, const SearchOptions& options) {
    validate(grid, problem);
    return enumerate_over(grid, problem, outage_pool(grid, problem), options);
}

SearchResult enumerate_local(const GridModel& grid, const EocsProblem& problem, int levels,
                             const SearchOptions& options) {
    validate(grid, problem);
    return enumerate_over(grid, problem, local_pool(grid, problem, levels), options);
}

SearchResult ga_search(const GridModel& grid, const EocsProblem& problem, const GaParams& params,
                       std::uint64_t seed, const SearchOptions& options) {
    const auto start = Clock::now();
    validate(grid, problem);
    validate(params);
    using Genome = std::vector<std::uint8_t>;

    const auto pool = outage_pool(grid, problem);
    const std::size_t genes = pool.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto condition_of = [&](const Genome& g) {
        OperatingCondition tau = problem.tau0;
        for (std::size_t i = 0; i < genes; ++i) {
            if (g[i]) tau.set(static_cast<std::size_t>(pool[i]), false);
        }
        return tau;
    };
    auto outages_of = [&](const Genome& g) {
        std::vector<int> out;
        for (std::size_t i = 0; i < genes; ++i) {
            if (g[i]) out.push_back(pool[i]);
        }
        return out;
    };
    auto drop_random_outage = [&](Genome& g) {
        std::vector<std::size_t> on;
        for (std::size_t i = 0; i < genes; ++i) {
            if (g[i]) on.push_back(i);
        }
        std::uniform_int_distribution<std::size_t> pick(0, on.size() - 1);
        g[on[pick(rng)]] = 0;
    };
    // Repair: at most k outages, then restore lines until connected.
    auto repair = [&](Genome& g) {
        auto count = static_cast<int>(std::count(g.begin(), g.end(), std::uint8_t{1}));
        while (count > problem.k) {
            drop_random_outage(g);
            --count;
        }
        while (count > 0 && !is_connected(grid, condition_of(g))) {
            drop_random_outage(g);
            --count;
        }
    };

    std::map<Genome, double> fitness;
    auto evaluate = [&](const std::vector<Genome>& population) {
        std::vector<Genome> fresh;
        for (const auto& g : population) {
            if (!fitness.contains(g) && std::find(fresh.begin(), fresh.end(), g) == fresh.end()) fresh.push_back(g);
        }
        std::vector<double> values(fresh.size(), kNaN);
        parallel_for(fresh.size(), options.workers, [&](std::size_t i) {
            values[i] = evaluate_condition(grid, condition_of(fresh[i]), problem.protected_line, options.fault);
        });
        for (std::size_t i = 0; i < fresh.size(); ++i) fitness.emplace(fresh[i], values[i]);
    };
    auto score = [&](const Genome& g) {
        const double f = fitness.at(g);
        return std::isnan(f) ? -std::numeric_limits<double>::infinity() : f;
    };

    std::vector<Genome> population;
    population.reserve(static_cast<std::size_t>(params.population));
    for (int i = 0; i < params.population; ++i) {
        Genome g(genes, 0);
        const int want = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(problem.k), genes));
        std::uniform_int_distribution<int> count_dist(0, want);
        std::vector<std::size_t> order(genes);
        for (std::size_t j = 0; j < genes; ++j) order[j] = j;
        std::shuffle(order.begin(), order.end(), rng);
        const int c = count_dist(rng);
        for (int j = 0; j < c; ++j) g[order[static_cast<std::size_t>(j)]] = 1;
        repair(g);
        population.push_back(std::move(g));
    }
    evaluate(population);

    Genome best;
    double best_fit = kNaN;
    std::vector<int> best_out;
    auto track_best = [&] {
        for (const auto& g : population) {
            const double f = fitness.at(g);
            auto out = outages_of(g);
            if (preferred(f, out, best_fit, best_out)) {
                best = g;
                best_fit = f;
                best_out = std::move(out);
            }
        }
    };
    track_best();

    std::uniform_int_distribution<std::size_t> pick_member(0, population.size() - 1);
    auto tournament = [&]() -> const Genome& {
        std::size_t winner = pick_member(rng);
        for (int t = 1; t < params.tournament; ++t) {
            const std::size_t challenger = pick_member(rng);
            if (score(population[challenger]) > score(population[winner])) winner = challenger;
        }
        return population[winner];
    };

    for (int gen = 0; gen < params.generations; ++gen) {
        std::vector<Genome> next;
        next.reserve(population.size());
        if (!std::isnan(best_fit)) next.push_back(best);
        while (next.size() < population.size()) {
            Genome a = tournament();
            Genome b = tournament();
            if (genes >= 2 && unit(rng) < params.crossover_rate) {
                std::uniform_int_distribution<std::size_t> cut_dist(1, genes - 1);
                const std::size_t cut = cut_dist(rng);
                for (std::size_t i = cut; i < genes; ++i) std::swap(a[i], b[i]);
            }
            for (Genome* child : {&a, &b}) {
                for (std::size_t i = 0; i < genes; ++i) {
                    if (unit(rng) < params.mutation_rate) (*child)[i] ^= 1;
                }
                repair(*child);
            }
            next.push_back(std::move(a));
            if (next.size() < population.size()) next.push_back(std::move(b));
        }
        population = std::move(next);
        evaluate(population);
        track_best();
    }

    if (std::isnan(best_fit)) throw NoFeasibleCandidate("GA found no converging condition");
    std::size_t failures = 0;
    for (const auto& [g, f] : fitness) {
        if (std::isnan(f)) ++failures;
    }
    return finish(grid, problem, condition_of(best), best_fit, fitness.size(), failures, start);
}

bool satisfies_constraints(const GridModel& grid, const EocsProblem& problem, const SearchResult& result) {
    const auto& tau0 = problem.tau0;
    const auto& tau = result.tau_star;
    if (tau.size() != tau0.size()) return false;
    int added = 0;
    for (std::size_t b = 0; b < tau.size(); ++b) {
        if (tau.in_service(b) && !tau0.in_service(b)) return false;
        if (tau0.in_service(b) && !tau.in_service(b)) {
            if (grid.line_index(static_cast<int>(b)) < 0) return false;
            ++added;
        }
    }
    if (added > problem.k) return false;
    if (!tau.in_service(static_cast<std::size_t>(problem.protected_line))) return false;
    if (!is_connected(grid, tau)) return false;
    return apply_label(grid, tau0, result.eoc_label) == tau;
}

OperatingCondition apply_label(const GridModel& grid, const OperatingCondition& tau0,
                               const std::vector<std::uint8_t>& label) {
    if (label.size() != grid.line_count()) throw ShapeMismatch("label length differs from line count");
    OperatingCondition tau = tau0;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (label[i]) tau.set(static_cast<std::size_t>(grid.lines()[i]), false);
    }
    return tau;
}

OperatingCondition parse_condition_spec(const GridModel& grid, const std::string& spec) {
    OperatingCondition tau = grid.base_condition();
    if (spec.empty() || spec == "none") return tau;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int id = 0;
        try {
            id = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ParseError("bad branch id '" + item + "' in condition spec");
        }
        if (used != item.size() || id < 0 || id >= static_cast<int>(grid.branch_count())) {
            throw ParseError("bad branch id '" + item + "' in condition spec");
        }
        tau.set(static_cast<std::size_t>(id), false);
    }
    check_condition(grid, tau);
    return tau;
}

std::string to_json(const GridModel& grid, const EocsProblem& problem, const SearchResult& result,
                    bool include_timing) {
    nlohmann::json j;
    j["case"] = grid.name();
    j["protected_line"] = problem.protected_line;
    j["k"] = problem.k;
    j["tau0_outages"] = problem.tau0.outages();
    j["eoc_outages"] = added_between(problem.tau0, result.tau_star);
    j["eoc_label"] = result.eoc_label;
    j["tau_star_outages"] = result.tau_star.outages();
    j["i_max"] = result.i_max;
    j["evaluations"] = result.evaluations;
    j["failures"] = result.failures;
    if (include_timing) j["wall_time_s"] = result.wall_time.count();
    return j.dump(2);
}

}  // namespace eocs
