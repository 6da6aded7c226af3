#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "symrewrite/datagen.hpp"
#include "symrewrite/errors.hpp"
#include "symrewrite/evaluation.hpp"
#include "symrewrite/grammar.hpp"
#include "symrewrite/hashing.hpp"
#include "symrewrite/model.hpp"
#include "symrewrite/report.hpp"
#include "symrewrite/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace symrewrite;

namespace {

constexpr const char* kToolVersion = "symrewrite 1.0.0";

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct TrainFlags {
    double lr = 0.125;
    int batch_size = 64;
    double max_grad_norm = 5.0;
    double dropout = 0.1;
    double init_range = 0.1;
    int max_epochs = 100;

    void attach(CLI::App* cmd) {
        cmd->add_option("--lr", lr, "SGD learning rate")->capture_default_str();
        cmd->add_option("--batch-size", batch_size, "Batch size")->capture_default_str();
        cmd->add_option("--max-grad-norm", max_grad_norm, "Global gradient norm clip")
            ->capture_default_str();
        cmd->add_option("--dropout", dropout, "Dropout probability")->capture_default_str();
        cmd->add_option("--init-range", init_range, "Uniform init half-width")
            ->capture_default_str();
        cmd->add_option("--max-epochs", max_epochs, "Epoch cap")->capture_default_str();
    }

    TrainConfig to_config(uint64_t seed) const {
        TrainConfig c;
        c.learning_rate = lr;
        c.batch_size = batch_size;
        c.max_grad_norm = max_grad_norm;
        c.dropout_p = dropout;
        c.init_range = init_range;
        c.max_epochs = max_epochs;
        c.seed = seed;
        return c;
    }

    std::string digest_string() const {
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "lr=%a batch=%d clip=%a dropout=%a init=%a max_epochs=%d", lr, batch_size,
                      max_grad_norm, dropout, init_range, max_epochs);
        return buf;
    }
};

struct DataDir {
    Grammar grammar;
    std::map<std::string, Dataset> splits;
};

Grammar load_grammar_from(const std::string& dir) { return Grammar::load(dir + "/grammar.txt"); }

Dataset load_split(const std::string& dir, const Grammar& g, const std::string& name) {
    return read_dataset(dir + "/" + name + ".txt", g);
}

int run_gen(const std::string& out_dir, uint64_t seed, int inputs, int alphabet, int k,
            const std::string& policy, int train_size) {
    const Grammar g(inputs, alphabet, k, block_policy_from_string(policy));
    fs::create_directories(out_dir);
    g.save(out_dir + "/grammar.txt");

    auto splits = paper_splits(g, SplitRng(seed), train_size);
    json manifest;
    manifest["tool"] = kToolVersion;
    manifest["command"] = "gen";
    manifest["created_utc"] = utc_now();
    manifest["seed"] = seed;
    {
        char cfg[160];
        std::snprintf(cfg, sizeof(cfg), "inputs=%d alphabet=%d k=%d policy=%s train_size=%d",
                      inputs, alphabet, k, policy.c_str(), train_size);
        manifest["config_digest"] = hex64(fnv1a64(cfg));
    }
    manifest["grammar"] = {{"file", "grammar.txt"},
                           {"fingerprint", file_fingerprint(out_dir + "/grammar.txt")}};
    json datasets = json::object();
    for (const std::string& name : kSplitNames) {
        const std::string file = name + ".txt";
        write_dataset(out_dir + "/" + file, g, splits.at(name));
        datasets[name] = {{"file", file},
                          {"fingerprint", file_fingerprint(out_dir + "/" + file)},
                          {"size", splits.at(name).spec.size}};
    }
    manifest["datasets"] = datasets;
    write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote grammar + " << kSplitNames.size() << " splits to " << out_dir << "\n";
    return 0;
}

int run_train(const std::string& data_dir, uint64_t seed, const std::string& out_ckpt,
              const TrainFlags& flags) {
    const Grammar g = load_grammar_from(data_dir);
    const Dataset train_set = load_split(data_dir, g, "train");
    const Dataset val_set = load_split(data_dir, g, "val_standard");

    const ModelConfig mc = ModelConfig::for_grammar(g);
    const TrainConfig tc = flags.to_config(seed);

    std::ostringstream log;
    auto progress = [&](const EpochRecord& r) {
        const std::string line = format_epoch_record(r);
        std::cout << line << std::endl;
        log << line << "\n";
    };

    const auto start = std::chrono::steady_clock::now();
    auto [params, report] = train(g, train_set, val_set, mc, tc, progress);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    log << "stopped=" << to_string(report.stopped_reason)
        << " selected_epoch=" << report.selected_epoch << " epochs_run=" << report.epochs_run
        << "\n";
    if (const auto parent = fs::path(out_ckpt).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    save_checkpoint(out_ckpt, params, g);
    write_file(out_ckpt + ".log", log.str());

    std::cout << "stopped=" << to_string(report.stopped_reason)
              << " selected_epoch=" << report.selected_epoch
              << " epochs_run=" << report.epochs_run << "\n";
    std::cout << "checkpoint written to " << out_ckpt << " (" << wall << " s)\n";
    return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_dir, const std::string& set) {
    auto [params, meta] = load_checkpoint(ckpt_path);
    const Grammar g = load_grammar_from(data_dir);
    if (meta.grammar_hash != grammar_fingerprint(g)) {
        throw CompatError("checkpoint was trained on grammar " + meta.grammar_hash +
                          " but " + data_dir + " holds " + grammar_fingerprint(g));
    }

    std::vector<std::string> sets;
    if (set == "all") {
        sets = kTestSetNames;
    } else if (std::find(kTestSetNames.begin(), kTestSetNames.end(), set) != kTestSetNames.end()) {
        sets = {set};
    } else {
        throw ConfigError("unknown test set '" + set + "' (expected standard|repeat|short|long|all)");
    }

    for (const std::string& name : sets) {
        const Dataset d = load_split(data_dir, g, "test_" + name);
        const int valid = count_valid_decodes(params, g, d);
        const auto n = static_cast<int>(d.samples.size());
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-8s %d/%d %.6f %.2f%%\n", name.c_str(), valid, n,
                      double(valid) / n, 100.0 * valid / n);
        std::cout << buf;
    }
    return 0;
}

std::vector<uint64_t> load_seed_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open seed list: " + path);
    }
    std::vector<uint64_t> seeds;
    uint64_t s;
    while (in >> s) {
        seeds.push_back(s);
    }
    if (seeds.empty()) {
        throw ParseError("seed list is empty: " + path);
    }
    return seeds;
}

int run_sweep(const std::string& data_dir, int num_seeds, const std::string& seed_list_file,
              int workers, const std::string& out_dir, const TrainFlags& flags) {
    const Grammar g = load_grammar_from(data_dir);
    std::map<std::string, Dataset> splits;
    for (const std::string& name : kSplitNames) {
        if (name == "val_tuning") {
            continue;  // generated for manual re-tuning, unused here
        }
        splits.emplace(name, load_split(data_dir, g, name));
    }

    std::vector<uint64_t> seeds;
    if (!seed_list_file.empty()) {
        seeds = load_seed_list(seed_list_file);
    } else {
        for (int i = 1; i <= num_seeds; ++i) {
            seeds.push_back(static_cast<uint64_t>(i));
        }
    }

    const ModelConfig mc = ModelConfig::for_grammar(g);
    const TrainConfig tc = flags.to_config(0);

    const auto start = std::chrono::steady_clock::now();
    auto on_result = [](const EvalResult& r) {
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "seed=%llu standard=%.2f repeat=%.2f short=%.2f long=%.2f epochs=%d\n",
                      static_cast<unsigned long long>(r.seed), 100.0 * r.accuracy.at("standard"),
                      100.0 * r.accuracy.at("repeat"), 100.0 * r.accuracy.at("short"),
                      100.0 * r.accuracy.at("long"), r.epochs_run);
        std::cout << buf << std::flush;
    };
    const SweepResult res = sweep(g, splits, mc, tc, seeds, workers, on_result);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(out_dir);
    write_file(out_dir + "/results.tsv", results_table(res.results, res.failures));

    std::string summary;
    if (res.results.size() >= 2) {
        summary = summary_text(summarize(res.results));
    } else if (res.results.size() == 1) {
        // Too few runs for spread statistics; report the single row verbatim.
        const EvalResult& r = res.results.front();
        std::ostringstream ss;
        ss << "summary runs=1 stddev=insufficient-data pearson_repeat_long=insufficient-data\n";
        char buf[160];
        for (const std::string& name : kTestSetNames) {
            std::snprintf(buf, sizeof(buf), "%-8s mean=%.2f std=n/a min=%.2f max=%.2f\n",
                          name.c_str(), 100.0 * r.accuracy.at(name), 100.0 * r.accuracy.at(name),
                          100.0 * r.accuracy.at(name));
            ss << buf;
        }
        summary = ss.str();
    } else {
        summary = "summary runs=0 (all seeds failed)\n";
    }
    write_file(out_dir + "/summary.txt", summary);

    json manifest;
    manifest["tool"] = kToolVersion;
    manifest["command"] = "sweep";
    manifest["created_utc"] = utc_now();
    manifest["data_dir"] = data_dir;
    manifest["grammar_fingerprint"] = grammar_fingerprint(g);
    manifest["config_digest"] = hex64(fnv1a64(flags.digest_string()));
    manifest["seeds"] = seeds;
    manifest["workers"] = workers;
    manifest["wall_time_s"] = wall;
    manifest["failures"] = res.failures.size();
    write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

    std::cout << summary;
    if (!res.failures.empty()) {
        std::cout << res.failures.size() << " seed(s) failed; see results.tsv\n";
    }
    return 0;
}

int run_report(const std::string& results_dir, const std::vector<std::string>& outs) {
    const std::vector<EvalResult> results =
        parse_results_table(read_file(results_dir + "/results.tsv"));
    if (results.empty()) {
        throw InsufficientDataError("results table holds no successful runs");
    }
    for (const std::string& out : outs) {
        if (out.size() > 4 && out.substr(out.size() - 4) == ".csv") {
            write_file(out, results_csv(results));
            std::cout << "wrote " << out << "\n";
        } else if (out.size() > 4 && out.substr(out.size() - 4) == ".svg") {
            write_file(out, results_boxplot_svg(results));
            std::cout << "wrote " << out << "\n";
        } else {
            throw ConfigError("--out must end in .csv or .svg: " + out);
        }
    }
    return 0;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbol-rewriting generalization experiment"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate grammar and all dataset splits");
    std::string gen_out;
    uint64_t gen_seed = 0;
    int gen_inputs = 40, gen_alphabet = 16, gen_k = 3, gen_train_size = 100000;
    std::string gen_policy = "distinct";
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Master RNG seed")->required();
    gen->add_option("--inputs", gen_inputs, "Input alphabet size |X|")->capture_default_str();
    gen->add_option("--alphabet", gen_alphabet, "Output alphabet size |Y|")->capture_default_str();
    gen->add_option("--k", gen_k, "Block length")->capture_default_str();
    gen->add_option("--policy", gen_policy, "Block policy: distinct|replace")
        ->capture_default_str();
    gen->add_option("--train-size", gen_train_size, "Training set size")->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "Train one model");
    std::string tr_data, tr_out;
    uint64_t tr_seed = 0;
    TrainFlags tr_flags;
    tr->add_option("--data", tr_data, "Data directory from gen")->required();
    tr->add_option("--seed", tr_seed, "Random seed")->required();
    tr->add_option("--out", tr_out, "Checkpoint output path")->required();
    tr_flags.attach(tr);

    // eval
    auto* ev = app.add_subcommand("eval", "Score a checkpoint on the test sets");
    std::string ev_ckpt, ev_data, ev_set = "all";
    ev->add_option("--ckpt", ev_ckpt, "Checkpoint path")->required();
    ev->add_option("--data", ev_data, "Data directory")->required();
    ev->add_option("--set", ev_set, "standard|repeat|short|long|all")->capture_default_str();

    // sweep
    auto* sw = app.add_subcommand("sweep", "Train and evaluate many seeds");
    std::string sw_data, sw_out, sw_seed_list;
    int sw_seeds = 50, sw_workers = 1;
    TrainFlags sw_flags;
    sw->add_option("--data", sw_data, "Data directory")->required();
    sw->add_option("--out", sw_out, "Results output directory")->required();
    sw->add_option("--seeds", sw_seeds, "Number of seeds (1..N)")->capture_default_str();
    sw->add_option("--seed-list", sw_seed_list, "File with one seed per line");
    sw->add_option("--workers", sw_workers, "Parallel training runs")->capture_default_str();
    sw_flags.attach(sw);

    // report
    auto* rp = app.add_subcommand("report", "Emit CSV / SVG box plot from sweep results");
    std::string rp_results;
    std::vector<std::string> rp_outs;
    rp->add_option("--results", rp_results, "Directory with results.tsv")->required();
    rp->add_option("--out", rp_outs, "Output file(s), .csv or .svg")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (gen->parsed()) {
        return guarded([&] {
            return run_gen(gen_out, gen_seed, gen_inputs, gen_alphabet, gen_k, gen_policy,
                           gen_train_size);
        });
    }
    if (tr->parsed()) {
        return guarded([&] { return run_train(tr_data, tr_seed, tr_out, tr_flags); });
    }
    if (ev->parsed()) {
        return guarded([&] { return run_eval(ev_ckpt, ev_data, ev_set); });
    }
    if (sw->parsed()) {
        return guarded([&] {
            return run_sweep(sw_data, sw_seeds, sw_seed_list, sw_workers, sw_out, sw_flags);
        });
    }
    if (rp->parsed()) {
        return guarded([&] { return run_report(rp_results, rp_outs); });
    }
    return 1;
}
