#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ftn/report.hpp"
#include "ftn/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

int write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return kExitRuntime;
    }
    out << content;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ftnsim: hierarchical-network fault tolerance simulator"};
    app.require_subcommand(1);

    std::string out_path;
    bool quiet = false;
    bool stamp = false;
    app.add_option("--out", out_path, "output path for generated files");
    app.add_flag("--quiet", quiet, "suppress the run summary");
    app.add_flag("--stamp", stamp, "append a generated-by line to emitted files");

    auto* cmd_run = app.add_subcommand("run", "run a scenario file");
    std::string scenario_path;
    std::string protocol_override;
    cmd_run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    cmd_run->add_option("--protocol", protocol_override,
                        "override the scenario's protocol (ftn|conventional)");

    auto* cmd_tables = app.add_subcommand("tables", "reproduce a result table as CSV");
    int table_no = 0;
    cmd_tables->add_option("which", table_no, "table number (4, 5 or 6)")->required();

    auto* cmd_buffer = app.add_subcommand("buffer", "buffer-size calculator");
    double b_lambda = 0, b_t = 0, b_y = 10, b_packet = 500;
    std::int64_t b_n = 0, b_devices = 1;
    std::string b_schedule;
    cmd_buffer->add_option("--lambda", b_lambda, "mean arrival rate")->required();
    cmd_buffer->add_option("--t", b_t, "observation window (same unit as lambda)")
        ->required();
    cmd_buffer->add_option("--n", b_n, "packet count")->required();
    cmd_buffer->add_option("--devices", b_devices, "device count (default 1)");
    cmd_buffer->add_option("--schedule", b_schedule,
                           "fault schedule, duration:faulty pairs, e.g. 200:1,200:4");
    cmd_buffer->add_option("--safety-y", b_y, "safety factor Y (default 10)");
    cmd_buffer->add_option("--packet-bits", b_packet, "packet size in bits (default 500)");

    auto* cmd_plot = app.add_subcommand("plot-data", "emit a figure's series as CSV");
    int figure_no = 0;
    cmd_plot->add_option("figure", figure_no, "figure number (4, 6 or 7)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    const std::string stamp_line = stamp ? "# generated by ftnsim\n" : "";

    try {
        if (*cmd_run) {
            ftn::scenario::Loaded loaded;
            try {
                loaded = ftn::scenario::load_file(scenario_path);
                if (!protocol_override.empty()) {
                    if (protocol_override == "ftn")
                        loaded.scenario.protocol = ftn::protocol::ProtocolKind::Ftn;
                    else if (protocol_override == "conventional")
                        loaded.scenario.protocol =
                            ftn::protocol::ProtocolKind::Conventional;
                    else
                        throw ftn::engine::ValidationError(
                            {"--protocol: one of ftn|conventional"});
                }
            } catch (const ftn::engine::ValidationError& e) {
                for (const auto& issue : e.issues()) std::cerr << issue << "\n";
                return kExitValidation;
            }
            auto result = ftn::engine::run(loaded.scenario);
            std::string trace_path = !out_path.empty() ? out_path
                                     : loaded.trace_path ? *loaded.trace_path
                                                         : "trace.csv";
            int rc = write_file(trace_path,
                                ftn::engine::trace_to_csv(result.trace) + stamp_line);
            if (rc != kExitOk) return rc;
            if (!quiet) {
                std::cout << ftn::scenario::summary_text(result);
                std::cout << "trace: " << trace_path << "\n";
            }
            return kExitOk;
        }

        std::string output;
        if (*cmd_tables) {
            if (table_no == 4) output = ftn::report::table4_csv();
            else if (table_no == 5) output = ftn::report::table5_csv();
            else if (table_no == 6) output = ftn::report::table6_csv();
            else {
                std::cerr << "tables: expected 4, 5 or 6\n";
                return kExitValidation;
            }
        } else if (*cmd_plot) {
            if (figure_no == 4) output = ftn::report::fig4_csv();
            else if (figure_no == 6) output = ftn::report::fig6_csv();
            else if (figure_no == 7) output = ftn::report::fig7_csv();
            else {
                std::cerr << "plot-data: expected 4, 6 or 7\n";
                return kExitValidation;
            }
        } else if (*cmd_buffer) {
            try {
                output = ftn::report::buffer_report(b_lambda, b_t, b_n, b_devices,
                                                    b_schedule, b_y, b_packet);
            } catch (const std::domain_error& e) {
                std::cerr << "buffer: " << e.what() << "\n";
                return kExitValidation;
            } catch (const std::invalid_argument& e) {
                std::cerr << "buffer: " << e.what() << "\n";
                return kExitValidation;
            }
        }
        output += stamp_line;
        if (!out_path.empty()) return write_file(out_path, output);
        std::cout << output;
        return kExitOk;
    } catch (const ftn::engine::ValidationError& e) {
        for (const auto& issue : e.issues()) std::cerr << issue << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
