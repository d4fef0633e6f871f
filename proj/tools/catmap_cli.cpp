// catmap_cli <experiment> --config <path> --out <dir> [--threads k] [--verbose]
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <catmap/harness/config.hpp>
#include <catmap/harness/experiments.hpp>
#include <catmap/harness/manifest.hpp>
#include <catmap/harness/table.hpp>

namespace fs = std::filesystem;
using namespace catmap;
using namespace catmap::harness;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& experiment, const std::string& config_path, std::string out_dir, unsigned threads,
        bool verbose)
{
    const std::string text = read_file(config_path);
    ExperimentConfig cfg = parse_config(text);
    if (out_dir.empty())
        out_dir = cfg.output_dir.empty() ? "out" : cfg.output_dir;
    cfg.output_dir = out_dir;

    if (verbose)
        std::cerr << "catmap: " << experiment << " with " << threads << " thread(s), output in " << out_dir << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult r = run_experiment(experiment, cfg, threads);
    if (verbose)
        std::cerr << "catmap: " << r.table.rows.size() << " rows in "
                  << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    nlohmann::json outputs = nlohmann::json::object();
    const std::string csv = to_csv(r.table);
    write_file(fs::path(out_dir) / (experiment + ".csv"), csv);
    outputs[experiment + ".csv"] = git_blob_hash(csv);
    for (const ExtraFile& f : r.files) {
        write_file(fs::path(out_dir) / f.name, f.content);
        outputs[f.name] = git_blob_hash(f.content);
    }

    nlohmann::json manifest;
    manifest["experiment"] = experiment;
    manifest["config"] = to_json(cfg);
    manifest["config_hash"] = git_blob_hash(text);
    manifest["versions"] = library_versions();
    manifest["outputs"] = outputs;
    manifest["summary"] = r.summary;
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    if (verbose)
        std::cerr << "catmap: wrote " << outputs.size() << " data file(s) and manifest.json\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum cat map experiments"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir;
    unsigned threads = 1;
    bool verbose = false;
    for (const std::string& name : experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir in the config)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_flag("--verbose", verbose, "progress on stderr");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();
    try {
        return run(experiment, config_path, out_dir, threads, verbose);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
}
