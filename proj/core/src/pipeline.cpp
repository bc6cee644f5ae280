#include "eocs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eocs/binary_io.hpp"
#include "eocs/errors.hpp"
#include "eocs/parallel.hpp"

namespace eocs {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint32_t kDatasetVersion = 1;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        m = (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
    }
    return m;
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::validation: return "validation";
    }
    return "train";
}

Split parse_split(const std::string& text) {
    if (text == "train") return Split::train;
    if (text == "test") return Split::test;
    if (text == "validation") return Split::validation;
    throw ParseError("unknown split '" + text + "'");
}

std::set<SampleKey> Dataset::keys() const {
    std::set<SampleKey> out;
    for (const auto& s : samples) out.emplace(s.tau0, s.protected_line);
    return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t dataset_hash(const GridModel& grid, const DatasetSpec& spec, const FaultSolverOptions& fault) {
    std::ostringstream s;
    s << std::setprecision(17) << dump_case(grid) << '|' << spec.k << ',' << spec.min_outages << ',' << spec.max_outages
      << ',' << spec.seed << '|' << fault.tol << ',' << fault.max_iter << ',' << fault.damping_after << ','
      << fault.damping << ',' << fault.big_m << ',' << fault.n_levels << ',' << fault.lvrt.u_hold << ','
      << fault.lvrt.u_cut << ',' << fault.lvrt.k_q;
    return fnv1a(s.str());
}

Dataset generate_dataset(const GridModel& grid, const DatasetSpec& spec, const SearchOptions& options,
                         const std::set<SampleKey>& exclude) {
    if (spec.count < 0) throw ValidationError("sample count must be >= 0");
    if (spec.k < 0) throw ValidationError("outage budget must be >= 0");
    if (spec.min_outages < 0 || spec.max_outages < spec.min_outages) throw ValidationError("empty outage range");
    const auto& lines = grid.lines();
    if (lines.empty()) throw ExhaustedSampling("case has no switchable lines");

    Dataset data;
    data.split = spec.split;
    data.k = spec.k;
    data.seed = spec.seed;
    data.config_hash = dataset_hash(grid, spec, options.fault);
    data.branch_count = grid.branch_count();
    data.line_count = grid.line_count();

    std::mt19937_64 rng(spec.seed);
    std::set<SampleKey> seen;
    const std::size_t target = static_cast<std::size_t>(spec.count);
    const std::size_t max_draws = 1000 + 200 * target;
    std::size_t draws = 0;
    std::vector<int> shuffled(lines.begin(), lines.end());

    while (data.samples.size() < target) {
        std::vector<SampleKey> round;
        while (round.size() < target - data.samples.size()) {
            if (++draws > max_draws) {
                throw ExhaustedSampling("drew " + std::to_string(max_draws) + " keys but found only " +
                                        std::to_string(data.samples.size() + round.size()) + " of " +
                                        std::to_string(target) + " distinct valid samples");
            }
            std::uniform_int_distribution<int> outage_count(spec.min_outages, spec.max_outages);
            const auto outages = std::min<std::size_t>(static_cast<std::size_t>(outage_count(rng)), lines.size() - 1);
            OperatingCondition tau = grid.base_condition();
            for (std::size_t i = 0; i < outages; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, shuffled.size() - 1);
                std::swap(shuffled[i], shuffled[pick(rng)]);
                tau.set(static_cast<std::size_t>(shuffled[i]), false);
            }
            if (!is_connected(grid, tau)) continue;
            std::vector<int> in_service;
            for (int b : lines) {
                if (tau.in_service(static_cast<std::size_t>(b))) in_service.push_back(b);
            }
            std::uniform_int_distribution<std::size_t> pick_line(0, in_service.size() - 1);
            SampleKey key{tau, in_service[pick_line(rng)]};
            if (exclude.count(key) || !seen.insert(key).second) continue;
            round.push_back(std::move(key));
        }

        std::vector<std::optional<Sample>> labelled(round.size());
        SearchOptions inner = options;
        inner.workers = 1;
        parallel_for(round.size(), options.workers, [&](std::size_t i) {
            const EocsProblem problem{round[i].first, round[i].second, spec.k};
            try {
                SearchResult r = enumerate_global(grid, problem, inner);
                labelled[i] = Sample{problem.tau0, problem.protected_line, std::move(r.eoc_label), r.i_max};
            } catch (const NoFeasibleCandidate&) {
            }
        });
        for (auto& s : labelled) {
            if (s) data.samples.push_back(std::move(*s));
        }
    }
    return data;
}

void write_dataset(std::ostream& out, const Dataset& data) {
    binary::write_magic(out, "EOCD");
    binary::write<std::uint32_t>(out, kDatasetVersion);
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(data.split));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(data.k));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(data.branch_count));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(data.line_count));
    binary::write<std::uint64_t>(out, data.seed);
    binary::write<std::uint64_t>(out, data.config_hash);
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(data.samples.size()));
    for (const auto& s : data.samples) {
        if (s.tau0.size() != data.branch_count || s.label.size() != data.line_count) {
            throw ShapeMismatch("sample does not match dataset dimensions");
        }
        for (std::uint8_t f : s.tau0.flags()) binary::write<std::uint8_t>(out, f);
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(s.protected_line));
        for (std::uint8_t f : s.label) binary::write<std::uint8_t>(out, f);
        binary::write<double>(out, s.i_max);
    }
}

Dataset read_dataset(std::istream& in) {
    if (!binary::read_magic(in, "EOCD")) throw VersionMismatch("not a dataset file (bad magic)");
    const auto version = binary::read<std::uint32_t>(in);
    if (version != kDatasetVersion) throw VersionMismatch("dataset version " + std::to_string(version) + " unsupported");
    Dataset d;
    const auto split = binary::read<std::uint32_t>(in);
    if (split > 2) throw VersionMismatch("unknown split tag");
    d.split = static_cast<Split>(split);
    d.k = static_cast<int>(binary::read<std::uint32_t>(in));
    d.branch_count = binary::read<std::uint32_t>(in);
    d.line_count = binary::read<std::uint32_t>(in);
    d.seed = binary::read<std::uint64_t>(in);
    d.config_hash = binary::read<std::uint64_t>(in);
    const auto count = binary::read<std::uint32_t>(in);
    d.samples.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Sample s;
        std::vector<std::uint8_t> flags(d.branch_count);
        for (auto& f : flags) f = binary::read<std::uint8_t>(in);
        s.tau0 = OperatingCondition(std::move(flags));
        s.protected_line = static_cast<int>(binary::read<std::uint32_t>(in));
        s.label.resize(d.line_count);
        for (auto& f : s.label) f = binary::read<std::uint8_t>(in);
        s.i_max = binary::read<double>(in);
        d.samples.push_back(std::move(s));
    }
    return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset " + path.string());
    write_dataset(out, data);
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset " + path.string());
    return read_dataset(in);
}

void check_dataset(const GridModel& grid, const Dataset& data) {
    if (data.branch_count != grid.branch_count() || data.line_count != grid.line_count()) {
        throw ShapeMismatch("dataset has " + std::to_string(data.branch_count) + " branches / " +
                            std::to_string(data.line_count) + " lines, case has " +
                            std::to_string(grid.branch_count()) + " / " + std::to_string(grid.line_count()));
    }
}

// ---------------------------------------------------------------------------
// Training

std::vector<FeatureSet> encode_samples(const GridModel& grid, const Dataset& data, int workers) {
    check_dataset(grid, data);
    std::vector<FeatureSet> out(data.samples.size());
    parallel_for(out.size(), workers, [&](std::size_t i) {
        out[i] = encode_raw(grid, data.samples[i].tau0, data.samples[i].protected_line);
    });
    return out;
}

namespace {

double holdout_oc_acc(const nn::PgnnModel& model, const GridModel& grid, const std::vector<FeatureSet>& features,
                      const Dataset& holdout) {
    if (features.empty()) return 0.0;
    constexpr std::size_t kChunk = 256;
    std::size_t hits = 0;
    std::vector<const FeatureSet*> batch;
    for (std::size_t start = 0; start < features.size(); start += kChunk) {
        const std::size_t end = std::min(features.size(), start + kChunk);
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(&features[i]);
        const nn::RowMatrix scores = nn::forward_batch(model, batch, nullptr);
        for (std::size_t i = start; i < end; ++i) {
            const Eigen::VectorXd v = scores.row(static_cast<Eigen::Index>(i - start)).transpose();
            const Sample& s = holdout.samples[i];
            if (decode_feasible(grid, s.tau0, s.protected_line, v, model.architecture().k) == s.label) ++hits;
        }
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(features.size());
}

}  // namespace

TrainResult train(nn::PgnnModel model, const GridModel& grid, const Dataset& train_set, const Dataset& holdout,
                  const nn::TrainConfig& config, const EpochCallback& on_epoch, int workers) {
    if (train_set.samples.empty()) throw ValidationError("training set is empty");
    const auto& arch = model.architecture();
    if (arch.buses != static_cast<int>(grid.bus_count()) || arch.lines != static_cast<int>(grid.line_count())) {
        throw ShapeMismatch("model dimensions do not match the case");
    }
    if (config.batch_size < 1 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
        throw ValidationError("invalid training configuration");
    }

    std::vector<FeatureSet> features = encode_samples(grid, train_set, workers);
    const FeatureScaler scaler = FeatureScaler::fit(features);
    for (auto& fs : features) scaler.apply(fs);
    model.set_scaler(scaler);

    std::vector<FeatureSet> held = encode_samples(grid, holdout, workers);
    for (auto& fs : held) scaler.apply(fs);

    TrainResult result;
    nn::AdamState state = nn::AdamState::for_model(model);
    nn::Gradients grads;
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const FeatureSet*> batch;
    std::vector<const std::vector<std::uint8_t>*> labels;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&features[order[i]]);
                labels.push_back(&train_set.samples[order[i]].label);
            }
            const double loss = nn::backward(model, batch, labels, grads);
            nn::adam_step(model, grads, state, config);
            loss_sum += loss * static_cast<double>(end - start);
        }
        CurvePoint point{epoch, loss_sum / static_cast<double>(order.size()), holdout_oc_acc(model, grid, held, holdout)};
        result.curves.push_back(point);
        if (point.oc_acc > result.best_oc_acc) {
            result.best_oc_acc = point.oc_acc;
            result.best_epoch = epoch;
            result.best = model;
        }
        if (on_epoch) on_epoch(point);
    }
    if (result.best_epoch == 0) result.best = std::move(model);
    return result;
}

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& curves) {
    out << "epoch,loss,oc_acc\n";
    out << std::setprecision(10);
    for (const auto& p : curves) out << p.epoch << ',' << p.loss << ',' << p.oc_acc << '\n';
}

std::vector<CurvePoint> read_curves_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("epoch,loss,oc_acc", 0) != 0) {
        throw ParseError("curves file must start with 'epoch,loss,oc_acc'");
    }
    std::vector<CurvePoint> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        CurvePoint p;
        char c1 = 0;
        char c2 = 0;
        std::istringstream s(line);
        if (!(s >> p.epoch >> c1 >> p.loss >> c2 >> p.oc_acc) || c1 != ',' || c2 != ',') {
            throw ParseError("curves file: malformed row " + std::to_string(row));
        }
        out.push_back(p);
    }
    return out;
}

std::string curves_svg(const std::vector<CurvePoint>& curves) {
    constexpr double kW = 640;
    constexpr double kH = 260;
    constexpr double kPad = 48;
    std::ostringstream svg;
    svg << std::fixed << std::setprecision(2);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << 2 * kH
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto panel = [&](double top, const char* title, const char* colour, auto value) {
        double lo = 0.0;
        double hi = 1.0;
        if (!curves.empty()) {
            lo = hi = value(curves.front());
            for (const auto& p : curves) {
                lo = std::min(lo, value(p));
                hi = std::max(hi, value(p));
            }
            if (hi == lo) hi = lo + 1.0;
        }
        const double last_epoch = curves.empty() ? 1.0 : std::max(1, curves.back().epoch);
        const double x0 = kPad;
        const double x1 = kW - kPad / 2;
        const double y0 = top + kH - kPad;
        const double y1 = top + kPad / 2;
        svg << "<text x=\"" << x0 << "\" y=\"" << top + 16 << "\">" << title << "</text>\n";
        svg << "<polyline fill=\"none\" stroke=\"black\" points=\"" << x0 << ',' << y1 << ' ' << x0 << ',' << y0 << ' '
            << x1 << ',' << y0 << "\"/>\n";
        svg << "<text x=\"4\" y=\"" << y1 + 4 << "\">" << std::setprecision(3) << hi << "</text>\n";
        svg << "<text x=\"4\" y=\"" << y0 << "\">" << lo << "</text>\n" << std::setprecision(2);
        svg << "<text x=\"" << x1 - 40 << "\" y=\"" << y0 + 16 << "\">" << static_cast<int>(last_epoch)
            << "</text>\n";
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
        for (const auto& p : curves) {
            const double x = x0 + (x1 - x0) * p.epoch / last_epoch;
            const double y = y0 - (y0 - y1) * (value(p) - lo) / (hi - lo);
            svg << x << ',' << y << ' ';
        }
        svg << "\"/>\n";
    };
    panel(0.0, "training loss", "#c0392b", [](const CurvePoint& p) { return p.loss; });
    panel(kH, "held-out OC-Acc (%)", "#2c6fbb", [](const CurvePoint& p) { return p.oc_acc; });
    svg << "</svg>\n";
    return svg.str();
}

// ---------------------------------------------------------------------------
// Metrics

MethodReport score(const std::string& method, const std::vector<Sample>& oracle, const std::vector<Outcome>& outcomes,
                   const MetricOptions& options) {
    if (oracle.size() != outcomes.size()) throw ShapeMismatch("outcome count differs from oracle count");
    std::vector<double> tolerances = options.tolerances;
    std::sort(tolerances.begin(), tolerances.end());

    MethodReport r;
    r.method = method;
    r.problems = outcomes.size();
    std::size_t exact = 0;
    std::size_t scc = 0;
    std::size_t ps = 0;
    std::vector<std::size_t> within(tolerances.size(), 0);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const Outcome& o = outcomes[i];
        if (!o.valid) {
            ++r.invalid;
            continue;
        }
        const double ref = oracle[i].i_max;
        const double diff = std::abs(o.i_pred - ref);
        if (o.exact) ++exact;
        if (diff <= options.exact_tol * std::max(1.0, std::abs(ref))) ++scc;
        for (std::size_t e = 0; e < tolerances.size(); ++e) {
            if (diff <= tolerances[e] * std::abs(ref)) ++within[e];
        }
        if (options.ps_factor * o.i_pred > ref) ++ps;
    }
    const double n = std::max<double>(1.0, static_cast<double>(outcomes.size()));
    auto pct = [&](std::size_t c) { return outcomes.empty() ? 0.0 : 100.0 * static_cast<double>(c) / n; };
    r.oc_acc = pct(exact);
    r.scc_acc = pct(scc);
    r.ps_acc = pct(ps);
    for (std::size_t e = 0; e < tolerances.size(); ++e) r.e_scc_acc.emplace_back(tolerances[e], pct(within[e]));

    // Nested pass conditions: a tighter band implies the looser one, and a
    // band e with ps_factor * (1 - e) > 1 implies the selectivity check.
    bool ordered = r.scc_acc >= r.oc_acc;
    double previous = r.scc_acc;
    for (const auto& [e, acc] : r.e_scc_acc) {
        ordered = ordered && (e < options.exact_tol || acc >= previous);
        previous = acc;
        if (options.ps_factor * (1.0 - e) > 1.0) ordered = ordered && r.ps_acc >= acc;
    }
    if (!ordered) throw std::logic_error("metric ordering violated for method " + method);
    return r;
}

Outcome assess_label(const GridModel& grid, const Sample& oracle, const std::vector<std::uint8_t>& label, int k,
                     const FaultSolverOptions& fault) {
    Outcome o;
    o.exact = label == oracle.label;
    if (label.size() != grid.line_count()) return o;
    int extra = 0;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (!label[i]) continue;
        const int b = grid.lines()[i];
        if (b == oracle.protected_line || !oracle.tau0.in_service(static_cast<std::size_t>(b))) return o;
        ++extra;
    }
    if (extra > k) return o;
    const OperatingCondition tau = apply_label(grid, oracle.tau0, label);
    if (!is_connected(grid, tau)) return o;
    try {
        o.i_pred = fault_current_magnitude(grid, tau, oracle.protected_line, fault);
        o.valid = true;
    } catch (const NotConverged&) {
    } catch (const DidNotConverge&) {
    }
    return o;
}

std::vector<std::uint8_t> decode_feasible(const GridModel& grid, const OperatingCondition& tau0, int protected_line,
                                          const Eigen::VectorXd& scores, int k) {
    const auto& lines = grid.lines();
    if (static_cast<std::size_t>(scores.size()) != lines.size()) throw ShapeMismatch("score length differs from line count");
    std::vector<std::size_t> order(lines.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
    });
    std::vector<std::uint8_t> label(lines.size(), 0);
    OperatingCondition tau = tau0;
    int taken = 0;
    for (std::size_t i : order) {
        if (taken >= k || scores(static_cast<Eigen::Index>(i)) < 0.5) break;
        const auto b = static_cast<std::size_t>(lines[i]);
        if (lines[i] == protected_line || !tau.in_service(b)) continue;
        tau.set(b, false);
        if (!is_connected(grid, tau)) {
            tau.set(b, true);
            continue;
        }
        label[i] = 1;
        ++taken;
    }
    return label;
}

std::vector<std::uint8_t> predict(const nn::PgnnModel& model, const GridModel& grid, const OperatingCondition& tau0,
                                  int protected_line) {
    const FeatureSet fs = encode(grid, tau0, protected_line, model.scaler());
    return decode_feasible(grid, tau0, protected_line, nn::pgnn_forward(model, fs), model.architecture().k);
}

MethodReport evaluate(const nn::PgnnModel& model, const GridModel& grid, const Dataset& data,
                      const EvalOptions& options) {
    check_dataset(grid, data);
    const std::size_t n = data.samples.size();
    std::vector<Outcome> outcomes(n);
    std::vector<double> times(n);
    parallel_for(n, options.workers, [&](std::size_t i) {
        const Sample& s = data.samples[i];
        const auto start = Clock::now();
        const auto label = predict(model, grid, s.tau0, s.protected_line);
        times[i] = seconds_since(start);
        outcomes[i] = assess_label(grid, s, label, data.k, options.fault);
    });
    MethodReport r = score("pgnn", data.samples, outcomes, options.metrics);
    r.mean_time_s = mean_of(times);
    r.median_time_s = median_of(times);
    return r;
}

// ---------------------------------------------------------------------------
// Comparison

std::string to_string(Method method) {
    switch (method) {
        case Method::global: return "global";
        case Method::local: return "local";
        case Method::ga: return "ga";
        case Method::pgnn: return "pgnn";
    }
    return "global";
}

Method parse_method(const std::string& text) {
    if (text == "global") return Method::global;
    if (text == "local") return Method::local;
    if (text == "ga") return Method::ga;
    if (text == "pgnn") return Method::pgnn;
    throw ParseError("unknown method '" + text + "'");
}

Timing time_calls(const std::function<void(std::size_t)>& fn, int repetitions, int warmup) {
    for (int i = 0; i < warmup; ++i) fn(static_cast<std::size_t>(i));
    std::vector<double> times;
    const int reps = std::max(repetitions, 1);
    for (int i = 0; i < reps; ++i) {
        const auto start = Clock::now();
        fn(static_cast<std::size_t>(i));
        times.push_back(seconds_since(start));
    }
    return {median_of(times), mean_of(times)};
}

std::vector<MethodReport> compare(const GridModel& grid, const Dataset& problems, const nn::PgnnModel* model,
                                  const CompareOptions& options) {
    check_dataset(grid, problems);
    const auto& samples = problems.samples;
    SearchOptions inner = options.search;
    inner.workers = 1;

    auto run = [&](Method method, const Sample& s) -> std::optional<std::vector<std::uint8_t>> {
        const EocsProblem problem{s.tau0, s.protected_line, problems.k};
        try {
            switch (method) {
                case Method::global: return enumerate_global(grid, problem, inner).eoc_label;
                case Method::local: return enumerate_local(grid, problem, options.levels, inner).eoc_label;
                case Method::ga: return ga_search(grid, problem, options.ga, options.ga_seed, inner).eoc_label;
                case Method::pgnn: return predict(*model, grid, s.tau0, s.protected_line);
            }
        } catch (const NoFeasibleCandidate&) {
        }
        return std::nullopt;
    };

    std::vector<MethodReport> rows;
    for (Method method : options.methods) {
        if (method == Method::pgnn && !model) throw ValidationError("pgnn comparison needs a trained model");
        std::vector<Outcome> outcomes(samples.size());
        parallel_for(samples.size(), options.search.workers, [&](std::size_t i) {
            const auto label = run(method, samples[i]);
            if (label) outcomes[i] = assess_label(grid, samples[i], *label, problems.k, options.search.fault);
        });
        MethodReport r = score(to_string(method), samples, outcomes, options.metrics);
        if (!samples.empty()) {
            const Timing t = time_calls([&](std::size_t i) { (void)run(method, samples[i % samples.size()]); },
                                        std::max(options.timing_repetitions, static_cast<int>(samples.size())),
                                        options.timing_warmup);
            r.median_time_s = t.median_s;
            r.mean_time_s = t.mean_s;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string report_json(const std::vector<MethodReport>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j["method"] = r.method;
        j["problems"] = r.problems;
        j["invalid"] = r.invalid;
        j["oc_acc"] = r.oc_acc;
        j["scc_acc"] = r.scc_acc;
        nlohmann::json bands = nlohmann::json::object();
        for (const auto& [e, acc] : r.e_scc_acc) {
            char key[32];
            std::snprintf(key, sizeof key, "%g", e);
            bands[key] = acc;
        }
        j["e_scc_acc"] = bands;
        j["ps_acc"] = r.ps_acc;
        j["mean_time_s"] = r.mean_time_s;
        j["median_time_s"] = r.median_time_s;
        out.push_back(std::move(j));
    }
    return out.dump(2);
}

std::string report_table(const std::vector<MethodReport>& rows) {
    std::ostringstream t;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %8s %8s", "method", "OC-Acc", "SCC-Acc");
    t << buf;
    if (!rows.empty()) {
        for (const auto& [e, acc] : rows.front().e_scc_acc) {
            std::snprintf(buf, sizeof buf, " %9s", (std::to_string(static_cast<int>(std::lround(e * 100))) + "%-SCC").c_str());
            t << buf;
        }
    }
    std::snprintf(buf, sizeof buf, " %8s %12s %8s\n", "PS-Acc", "median time", "invalid");
    t << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-8s %7.2f%% %7.2f%%", r.method.c_str(), r.oc_acc, r.scc_acc);
        t << buf;
        for (const auto& [e, acc] : r.e_scc_acc) {
            std::snprintf(buf, sizeof buf, " %8.2f%%", acc);
            t << buf;
        }
        const double ms = r.median_time_s * 1e3;
        std::snprintf(buf, sizeof buf, " %7.2f%% %10.3fms %8zu\n", r.ps_acc, ms, r.invalid);
        t << buf;
    }
    return t.str();
}

}  // namespace eocs
