#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI11.hpp>

#include "eocs/config.hpp"
#include "eocs/errors.hpp"
#include "eocs/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

void add_globals(CLI::App& app, Globals& g) {
    app.add_option("--config", g.config_path, "TOML configuration file");
    app.add_option("--seed", g.seed, "Overrides every seed in the configuration");
    app.add_option("--workers", g.workers, "Worker threads");
}

eocs::Config resolve(const Globals& g) {
    eocs::Config c = g.config_path.empty() ? eocs::Config{} : eocs::load_config(g.config_path);
    if (g.seed) {
        c.data.seed = *g.seed;
        c.train.seed = *g.seed;
        c.model.seed = *g.seed;
        c.ga_seed = *g.seed;
    }
    if (g.workers) c.workers = *g.workers;
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw eocs::IoError("cannot write " + path.string());
    out << text;
}

eocs::SearchOptions search_options(const eocs::Config& c) { return {c.fault, c.workers}; }

int cmd_gen_data(const Globals& g, const fs::path& out_dir, std::optional<int> train_n, std::optional<int> test_n,
                 std::optional<int> val_n) {
    const eocs::Config c = resolve(g);
    const eocs::GridModel grid = eocs::build_grid(c);
    fs::create_directories(out_dir);

    struct Part {
        eocs::Split split;
        int count;
        std::uint64_t seed_offset;
    };
    const Part parts[] = {{eocs::Split::train, train_n.value_or(c.data.train), 0},
                          {eocs::Split::validation, val_n.value_or(c.data.validation), 1},
                          {eocs::Split::test, test_n.value_or(c.data.test), 2}};
    std::set<eocs::SampleKey> taken;
    for (const Part& part : parts) {
        eocs::DatasetSpec spec{part.count, c.k, c.data.min_outages, c.data.max_outages, c.data.seed + part.seed_offset,
                               part.split};
        const eocs::Dataset d = eocs::generate_dataset(grid, spec, search_options(c), taken);
        const auto keys = d.keys();
        taken.insert(keys.begin(), keys.end());
        const fs::path path = out_dir / (eocs::to_string(part.split) + ".eocd");
        eocs::save_dataset(d, path);
        std::cout << eocs::to_string(part.split) << ": " << d.samples.size() << " samples -> " << path.string() << '\n';
    }
    return 0;
}

int cmd_train(const Globals& g, const fs::path& data_dir, const fs::path& model_out, const fs::path& curves_out,
              std::optional<int> epochs, int log_every) {
    eocs::Config c = resolve(g);
    if (epochs) c.train.epochs = *epochs;
    const eocs::GridModel grid = eocs::build_grid(c);
    const eocs::Dataset train_set = eocs::load_dataset(data_dir / "train.eocd");
    const eocs::Dataset holdout = eocs::load_dataset(data_dir / "validation.eocd");
    if (train_set.k != c.k) throw eocs::ValidationError("dataset k differs from configured k");

    eocs::nn::PgnnModel model(eocs::architecture_for(grid, c), c.model.seed);
    std::cerr << "model: " << model.parameter_count() << " weights, " << train_set.samples.size()
              << " training samples, " << c.train.epochs << " epochs\n";
    auto result = eocs::train(
        std::move(model), grid, train_set, holdout, c.train,
        [&](const eocs::CurvePoint& p) {
            if (log_every > 0 && (p.epoch % log_every == 0 || p.epoch == c.train.epochs)) {
                std::cerr << "epoch " << p.epoch << "  loss " << p.loss << "  held-out OC-Acc " << p.oc_acc << "%\n";
            }
        },
        c.workers);
    eocs::nn::save_checkpoint(result.best, model_out);
    std::ofstream curves(curves_out);
    if (!curves) throw eocs::IoError("cannot write " + curves_out.string());
    eocs::write_curves_csv(curves, result.curves);
    std::cout << "best epoch " << result.best_epoch << " (held-out OC-Acc " << result.best_oc_acc << "%) -> "
              << model_out.string() << '\n';
    return 0;
}

eocs::MetricOptions metric_options(const eocs::Config& c) {
    eocs::MetricOptions m;
    m.tolerances = c.eval.tolerances;
    m.ps_factor = c.eval.ps_factor;
    return m;
}

int cmd_eval(const Globals& g, const fs::path& model_path, const fs::path& data_path, const std::string& json_out) {
    const eocs::Config c = resolve(g);
    const eocs::GridModel grid = eocs::build_grid(c);
    const auto model = eocs::nn::load_checkpoint(model_path);
    const auto data = eocs::load_dataset(data_path);
    const auto report = eocs::evaluate(model, grid, data, {metric_options(c), c.fault, c.workers});
    std::cout << eocs::report_table({report});
    if (!json_out.empty()) write_text(json_out, eocs::report_json({report}) + "\n");
    return 0;
}

int cmd_compare(const Globals& g, const std::string& model_path, const fs::path& data_path,
                const std::vector<std::string>& methods, int limit, const std::string& json_out) {
    const eocs::Config c = resolve(g);
    const eocs::GridModel grid = eocs::build_grid(c);
    eocs::Dataset data = eocs::load_dataset(data_path);
    if (limit > 0 && static_cast<std::size_t>(limit) < data.samples.size()) data.samples.resize(static_cast<std::size_t>(limit));

    eocs::CompareOptions opt;
    opt.methods.clear();
    for (const auto& m : methods) opt.methods.push_back(eocs::parse_method(m));
    opt.metrics = metric_options(c);
    opt.search = search_options(c);
    opt.levels = c.levels;
    opt.ga = c.ga;
    opt.ga_seed = c.ga_seed;
    opt.timing_repetitions = c.eval.timing_repetitions;
    opt.timing_warmup = c.eval.timing_warmup;

    std::optional<eocs::nn::PgnnModel> model;
    if (!model_path.empty()) model = eocs::nn::load_checkpoint(model_path);
    const auto rows = eocs::compare(grid, data, model ? &*model : nullptr, opt);
    std::cout << eocs::report_table(rows);
    if (!json_out.empty()) write_text(json_out, eocs::report_json(rows) + "\n");
    return 0;
}

struct SearchArgs {
    std::string method = "global";
    std::string case_path;
    std::string tau0 = "none";
    int line = -1;
    std::optional<int> k;
    std::optional<int> levels;
    bool timing = false;
};

int cmd_search(const Globals& g, const SearchArgs& a) {
    eocs::Config c = resolve(g);
    if (!a.case_path.empty()) c.grid.case_path = a.case_path;
    if (a.k) c.k = *a.k;
    if (a.levels) c.levels = *a.levels;
    const eocs::GridModel grid = eocs::build_grid(c);
    const eocs::EocsProblem problem{eocs::parse_condition_spec(grid, a.tau0), a.line, c.k};
    const auto method = eocs::parse_method(a.method);
    eocs::SearchResult r;
    switch (method) {
        case eocs::Method::global: r = eocs::enumerate_global(grid, problem, search_options(c)); break;
        case eocs::Method::local: r = eocs::enumerate_local(grid, problem, c.levels, search_options(c)); break;
        case eocs::Method::ga: r = eocs::ga_search(grid, problem, c.ga, c.ga_seed, search_options(c)); break;
        case eocs::Method::pgnn: throw eocs::ValidationError("search supports global, local and ga");
    }
    std::cout << eocs::to_json(grid, problem, r, a.timing) << '\n';
    return 0;
}

int cmd_plot(const fs::path& curves_path, const fs::path& out) {
    std::ifstream in(curves_path);
    if (!in) throw eocs::IoError("cannot open " + curves_path.string());
    write_text(out, eocs::curves_svg(eocs::read_curves_csv(in)));
    std::cout << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extreme operating condition search for line overcurrent protection"};
    app.require_subcommand(1);
    Globals g;
    add_globals(app, g);

    auto* gen = app.add_subcommand("gen-data", "Generate labelled train/validation/test datasets");
    add_globals(*gen, g);
    std::string out_dir = "data/generated";
    std::optional<int> n_train, n_test, n_val;
    gen->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    gen->add_option("--train", n_train, "Training sample count");
    gen->add_option("--test", n_test, "Test sample count");
    gen->add_option("--validation", n_val, "Validation sample count");

    auto* tr = app.add_subcommand("train", "Train the PGNN on a generated dataset");
    add_globals(*tr, g);
    std::string data_dir = "data/generated";
    std::string model_out = "model.pgnn";
    std::string curves_out = "curves.csv";
    std::optional<int> epochs;
    int log_every = 50;
    tr->add_option("--data-dir", data_dir, "Directory holding train.eocd and validation.eocd")->capture_default_str();
    tr->add_option("--out", model_out, "Checkpoint path")->capture_default_str();
    tr->add_option("--curves", curves_out, "Curves CSV path")->capture_default_str();
    tr->add_option("--epochs", epochs, "Overrides [train].epochs");
    tr->add_option("--log-every", log_every, "Progress line every N epochs (0: silent)")->capture_default_str();

    auto* ev = app.add_subcommand("eval", "Score a checkpoint on a dataset");
    add_globals(*ev, g);
    std::string model_path;
    std::string data_path;
    std::string json_out;
    ev->add_option("--model", model_path, "Checkpoint")->required();
    ev->add_option("--data", data_path, "Dataset file")->required();
    ev->add_option("--json", json_out, "Also write the report as JSON");

    auto* cmp = app.add_subcommand("compare", "Compare search methods against the enumeration oracle");
    add_globals(*cmp, g);
    std::vector<std::string> methods{"global", "local", "ga", "pgnn"};
    int limit = 0;
    cmp->add_option("--model", model_path, "Checkpoint (needed for pgnn)");
    cmp->add_option("--data", data_path, "Dataset file")->required();
    cmp->add_option("--methods", methods, "Methods to run")->delimiter(',')->capture_default_str();
    cmp->add_option("--limit", limit, "Use only the first N problems");
    cmp->add_option("--json", json_out, "Also write the report as JSON");

    auto* se = app.add_subcommand("search", "Solve one problem and print the result as JSON");
    add_globals(*se, g);
    SearchArgs sa;
    se->add_option("--method", sa.method, "global, local or ga")->check(CLI::IsMember({"global", "local", "ga"}))
        ->capture_default_str();
    se->add_option("--case", sa.case_path, "Case file (overrides [grid].case)");
    se->add_option("--tau0", sa.tau0, "'none' or comma-separated out-of-service branch ids")->capture_default_str();
    se->add_option("--line", sa.line, "Protected line (branch id)")->required();
    se->add_option("--k", sa.k, "Outage budget");
    se->add_option("--levels", sa.levels, "Local enumeration radius");
    se->add_flag("--timing", sa.timing, "Include wall time in the output");

    auto* pl = app.add_subcommand("plot-curves", "Render a curves CSV as SVG");
    std::string curves_in;
    std::string svg_out = "curves.svg";
    pl->add_option("--curves", curves_in, "Curves CSV")->required();
    pl->add_option("--out", svg_out, "SVG path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return cmd_gen_data(g, out_dir, n_train, n_test, n_val);
        if (*tr) return cmd_train(g, data_dir, model_out, curves_out, epochs, log_every);
        if (*ev) return cmd_eval(g, model_path, data_path, json_out);
        if (*cmp) return cmd_compare(g, model_path, data_path, methods, limit, json_out);
        if (*se) return cmd_search(g, sa);
        if (*pl) return cmd_plot(curves_in, svg_out);
    } catch (const eocs::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
