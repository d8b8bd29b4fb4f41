#include "padic/harness.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace padic;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io-failure: cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out || !(out << text)) throw std::runtime_error("io-failure: cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-adic correspondence toolkit: checks and reports"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "text";
    std::vector<std::string> suites;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "run the selected suites and emit a report");
    run->add_option("--config", config_path, "flat key = value config file");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--suite", suites, "suite name (repeatable, or comma separated)")->delimiter(',');
    run->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    run->add_option("--out", out_path, "write the report here instead of stdout");

    auto* show = app.add_subcommand("show-config", "print the effective configuration");
    show->add_option("--config", config_path, "flat key = value config file");
    show->add_option("--seed", seed, "RNG seed");

    std::string check_name;
    auto* explain = app.add_subcommand("explain", "print the anchor and formula of a check");
    explain->add_option("check", check_name, "check name, with or without the suite prefix")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config(read_file(config_path));
        if (seed) cfg.seed = *seed;
        if (!suites.empty()) {
            std::string joined;
            for (const auto& s : suites) joined += (joined.empty() ? "" : ",") + s;
            cfg = parse_config("suite = " + joined, cfg);
        }

        if (*show) {
            validate_config(cfg);
            std::cout << "# config " << config_hash(cfg) << "\n" << format_config(cfg);
            return 0;
        }
        if (*explain) {
            auto info = find_check(check_name);
            if (!info) {
                std::cerr << "unknown check '" << check_name << "'; known checks:\n";
                for (const auto& c : check_catalog()) std::cerr << "  " << c.suite << "/" << c.name << "\n";
                return 2;
            }
            std::cout << info->suite << "/" << info->name << "\n"
                      << "anchor:  " << info->anchor << "\n"
                      << "formula: " << info->formula << "\n";
            return 0;
        }
        Report rep = run_suite(cfg);
        write_output(emit_report(rep, format == "json" ? ReportFormat::json : ReportFormat::text), out_path);
        return rep.failed == 0 ? 0 : 1;
    } catch (const ConfigInvalid& e) {
        std::cerr << "config-invalid\n";
        for (const auto& d : e.diagnostics()) std::cerr << "  " << d << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
