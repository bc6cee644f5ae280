#include "eocs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml++/toml.hpp>

#include "eocs/errors.hpp"

namespace eocs {

namespace {

class Section {
  public:
    Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

    template <class T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!table_) return;
        const toml::node* node = table_->get(key);
        if (!node) return;
        if constexpr (std::is_same_v<T, bool>) {
            auto v = node->value<bool>();
            if (!v) fail(key, "boolean");
            out = *v;
        } else if constexpr (std::is_integral_v<T>) {
            auto v = node->value<std::int64_t>();
            if (!v) fail(key, "integer");
            if (std::is_unsigned_v<T> && *v < 0) fail(key, "non-negative integer");
            out = static_cast<T>(*v);
        } else if constexpr (std::is_floating_point_v<T>) {
            auto v = node->value<double>();
            if (!v) fail(key, "number");
            out = *v;
        } else if constexpr (std::is_same_v<T, std::string>) {
            auto v = node->value<std::string>();
            if (!v) fail(key, "string");
            out = *v;
        } else {
            const toml::array* arr = node->as_array();
            if (!arr) fail(key, "array");
            out.clear();
            for (const auto& item : *arr) {
                auto v = item.value<typename T::value_type>();
                if (!v) fail(key, "array of numbers");
                out.push_back(*v);
            }
        }
    }

    void finish() const {
        if (!table_) return;
        for (const auto& [key, value] : *table_) {
            if (!seen_.count(std::string(key.str()))) {
                throw ParseError("config: unknown key [" + name_ + "]." + std::string(key.str()));
            }
        }
    }

  private:
    [[noreturn]] void fail(const char* key, const char* expected) const {
        throw ParseError("config: [" + name_ + "]." + key + " must be a " + expected);
    }

    const toml::table* table_;
    std::string name_;
    std::set<std::string> seen_;
};

}  // namespace

Config parse_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config: " << e.description() << " at line " << e.source().begin.line;
        throw ParseError(msg.str());
    }
    static const std::set<std::string> known{"grid", "fault_solver", "search", "ga", "model", "train", "data", "eval"};
    for (const auto& [key, value] : root) {
        if (!known.count(std::string(key.str()))) throw ParseError("config: unknown section [" + std::string(key.str()) + "]");
    }

    Config c;
    {
        Section s(root["grid"].as_table(), "grid");
        std::string case_path;
        std::string kind = to_string(c.grid.kind);
        s.read("case", case_path);
        s.read("replace", c.grid.replace);
        s.read("kind", kind);
        s.read("m", c.grid.defaults.m);
        s.read("fips_headroom", c.grid.defaults.fips_headroom);
        s.read("pips_headroom", c.grid.defaults.pips_headroom);
        s.read("crowbar_d", c.grid.defaults.crowbar_d);
        s.read("crowbar_q", c.grid.defaults.crowbar_q);
        s.finish();
        if (!case_path.empty()) {
            std::filesystem::path p(case_path);
            c.grid.case_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        }
        c.grid.kind = parse_source_kind(kind);
    }
    {
        Section s(root["fault_solver"].as_table(), "fault_solver");
        s.read("tol", c.fault.tol);
        s.read("max_iter", c.fault.max_iter);
        s.read("damping_after", c.fault.damping_after);
        s.read("damping", c.fault.damping);
        s.read("M", c.fault.big_m);
        s.read("n_levels", c.fault.n_levels);
        s.read("u_hold", c.fault.lvrt.u_hold);
        s.read("u_cut", c.fault.lvrt.u_cut);
        s.read("k_q", c.fault.lvrt.k_q);
        s.read("latch_deep_regime", c.fault.latch_deep_regime);
        s.read("newton", c.fault.newton);
        s.finish();
        validate(c.fault);
    }
    {
        Section s(root["search"].as_table(), "search");
        s.read("k", c.k);
        s.read("levels", c.levels);
        s.read("workers", c.workers);
        s.finish();
        if (c.k < 0) throw ParseError("config: [search].k must be >= 0");
        if (c.levels < 0) throw ParseError("config: [search].levels must be >= 0");
    }
    {
        Section s(root["ga"].as_table(), "ga");
        s.read("population", c.ga.population);
        s.read("generations", c.ga.generations);
        s.read("tournament", c.ga.tournament);
        s.read("crossover_rate", c.ga.crossover_rate);
        s.read("mutation_rate", c.ga.mutation_rate);
        s.read("seed", c.ga_seed);
        s.finish();
        validate(c.ga);
    }
    {
        Section s(root["model"].as_table(), "model");
        std::string agg = nn::to_string(c.model.aggregator);
        s.read("mlp_depth", c.model.mlp_depth);
        s.read("hidden_cap", c.model.hidden_cap);
        s.read("aggregator", agg);
        s.read("sage_layers", c.model.sage_layers);
        s.read("hidden", c.model.hidden);
        s.read("seed", c.model.seed);
        s.finish();
        c.model.aggregator = nn::parse_aggregator(agg);
    }
    {
        Section s(root["train"].as_table(), "train");
        s.read("learning_rate", c.train.learning_rate);
        s.read("beta1", c.train.beta1);
        s.read("beta2", c.train.beta2);
        s.read("epsilon", c.train.epsilon);
        s.read("epochs", c.train.epochs);
        s.read("batch_size", c.train.batch_size);
        s.read("seed", c.train.seed);
        s.finish();
        if (!(c.train.learning_rate > 0.0)) throw ParseError("config: [train].learning_rate must be > 0");
        if (c.train.batch_size < 1) throw ParseError("config: [train].batch_size must be >= 1");
    }
    {
        Section s(root["data"].as_table(), "data");
        s.read("train", c.data.train);
        s.read("test", c.data.test);
        s.read("validation", c.data.validation);
        s.read("min_outages", c.data.min_outages);
        s.read("max_outages", c.data.max_outages);
        s.read("seed", c.data.seed);
        s.finish();
        if (c.data.min_outages < 0 || c.data.max_outages < c.data.min_outages) {
            throw ParseError("config: [data] outage range is empty");
        }
    }
    {
        Section s(root["eval"].as_table(), "eval");
        s.read("tolerances", c.eval.tolerances);
        s.read("ps_factor", c.eval.ps_factor);
        s.read("timing_repetitions", c.eval.timing_repetitions);
        s.read("timing_warmup", c.eval.timing_warmup);
        s.finish();
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

GridModel build_grid(const Config& config) {
    if (config.grid.case_path.empty()) throw ParseError("config: [grid].case is required");
    GridModel base = load_case(config.grid.case_path);
    return apply_replacement(base, config.grid.replace, config.grid.kind, config.grid.defaults);
}

nn::PgnnArchitecture architecture_for(const GridModel& grid, const Config& config) {
    return nn::make_architecture(static_cast<int>(grid.bus_count()), static_cast<int>(grid.line_count()), config.k,
                                 config.model.mlp_depth, config.model.hidden_cap, config.model.aggregator,
                                 config.model.sage_layers, config.model.hidden);
}

}  // namespace eocs
