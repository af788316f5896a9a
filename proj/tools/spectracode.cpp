// spectracode <kind> --config path.json [--out dir] [--seed u64] [--threads k] [--<field> value ...]
//
// Every config field can be overridden by a flag of the same name; nested
// fields use dotted names, e.g. --reference.trials 16.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectracode/experiment.hpp"

namespace {

namespace ex = spectracode::experiment;

int run(int argc, char** argv)
{
    CLI::App app{"Spectral statistics of products of code-based random matrices"};
    std::string kind;
    std::string config_path;
    app.add_option("kind", kind, "esd | moments | sweep | dual-distance | reference")->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    app.allow_extras();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::ifstream in(config_path);
    if (!in) throw spectracode::UsageError("cannot open config " + config_path);
    ex::json root = ex::json::parse(in, nullptr, false);
    if (root.is_discarded()) throw spectracode::UsageError("config " + config_path + " is not valid JSON");

    const auto extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& flag = extras[i];
        if (flag.rfind("--", 0) != 0) throw spectracode::UsageError("unexpected argument '" + flag + "'");
        std::string key = flag.substr(2), value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.resize(eq);
        } else {
            if (i + 1 >= extras.size()) throw spectracode::UsageError("flag " + flag + " needs a value");
            value = extras[++i];
        }
        ex::apply_override(root, key, value);
    }

    const auto config = ex::parse_config(root, kind);
    const auto artifacts = ex::run_experiment(config);
    ex::write_artifacts(artifacts, config.out);
    std::cout << artifacts.summary.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const spectracode::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const spectracode::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const spectracode::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 3;
    } catch (const spectracode::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
