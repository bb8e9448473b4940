#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cmot/report_io.hpp"

namespace {

struct Cli {
    std::string scenario_path;
    std::string plan_path;
    std::string emit_plan;
    std::string emit_path;
    std::string format = "json";
    double tol = -1.0;
    double sigma = -1.0;
    int steps = -1;
    unsigned seed = 0;
    bool dual = false;
    bool timings = false;
};

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path);
    if (!out) throw cmot::IoError("cannot write " + path);
    out << bytes;
}

int run(cmot::ProblemKind kind, const Cli& cli) {
    cmot::Scenario scenario = cmot::load_scenario(cli.scenario_path);
    if (kind == cmot::ProblemKind::Monotone) {
        scenario.problem = cmot::ProblemKind::Monotone;  // accept solve-shaped scenarios
    } else if (scenario.problem != kind) {
        throw cmot::SchemaViolationError("scenario problem is '" + to_string(scenario.problem) +
                                         "', expected '" + to_string(kind) + "'");
    }
    if (cli.tol > 0.0) scenario.options.tol = cli.tol;
    if (cli.sigma > 0.0) scenario.options.sigma = cli.sigma;
    if (cli.steps > 0) scenario.options.steps = cli.steps;
    scenario.options.seed = cli.seed ? cli.seed : scenario.options.seed;
    if (cli.dual) scenario.options.dual = true;

    cmot::Coupling plan;
    bool has_plan = false;
    if (!cli.plan_path.empty()) {
        std::ifstream in(cli.plan_path);
        if (!in) throw cmot::IoError("cannot open plan file: " + cli.plan_path);
        std::stringstream buf;
        buf << in.rdbuf();
        plan = cmot::plan_from_csv(buf.str());
        has_plan = true;
    }

    cmot::PathMeasure path;
    auto started = std::chrono::steady_clock::now();
    cmot::RunReport report =
        cmot::run_scenario(scenario, has_plan ? &plan : nullptr,
                           cli.emit_path.empty() ? nullptr : &path);
    report.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();

    cmot::ReportFormat format =
        cli.format == "csv" ? cmot::ReportFormat::Csv : cmot::ReportFormat::Json;
    std::cout << cmot::emit_report(report, format, cli.timings);

    if (!cli.emit_plan.empty())
        write_file(cli.emit_plan, cmot::emit_report(report, cmot::ReportFormat::Csv, false));
    if (!cli.emit_path.empty() && !path.grids.empty())
        write_file(cli.emit_path, cmot::path_to_json(path));
    return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained martingale transport toolkit"};
    app.require_subcommand(1);

    Cli cli;
    int exit_code = 0;
    struct Sub {
        const char* name;
        const char* help;
        cmot::ProblemKind kind;
    };
    const Sub subs[] = {
        {"feasibility", "decide existence of an admissible coupling", cmot::ProblemKind::Feasibility},
        {"solve", "minimize the cost over admissible couplings", cmot::ProblemKind::Solve},
        {"dual", "solve and report the dual potentials", cmot::ProblemKind::Solve},
        {"envelope", "evaluate the restricted convex envelope", cmot::ProblemKind::Envelope},
        {"multiperiod", "pairwise feasibility of a marginal curve plus pasting", cmot::ProblemKind::Multiperiod},
        {"skorokhod", "bounded-variance embedding feasibility (discrete analogue)", cmot::ProblemKind::Skorokhod},
        {"capacity", "capacity-constrained transport with extremality report", cmot::ProblemKind::Capacity},
        {"check-monotone", "left-monotonicity and exchange checks of a plan", cmot::ProblemKind::Monotone},
    };

    for (const Sub& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->add_option("scenario", cli.scenario_path, "scenario JSON file")->required();
        if (sub.kind == cmot::ProblemKind::Monotone)
            cmd->add_option("plan", cli.plan_path, "plan CSV file (x,y,mass)")->required();
        cmd->add_option("--format", cli.format, "output format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--tol", cli.tol, "solver tolerance");
        cmd->add_option("--seed", cli.seed, "seed recorded in the scenario options");
        cmd->add_option("--emit-plan", cli.emit_plan, "write the coupling as CSV");
        cmd->add_flag("--timings", cli.timings, "include elapsed time in the report");
        if (sub.kind == cmot::ProblemKind::Multiperiod || sub.kind == cmot::ProblemKind::Skorokhod)
            cmd->add_option("--emit-path", cli.emit_path, "write the path measure as JSON");
        if (sub.kind == cmot::ProblemKind::Skorokhod) {
            cmd->add_option("--sigma", cli.sigma, "total quadratic budget");
            cmd->add_option("--steps", cli.steps, "number of steps");
        }
        if (std::string(sub.name) == "solve")
            cmd->add_flag("--dual", cli.dual, "also report the dual side");
        cmot::ProblemKind kind = sub.kind;
        bool is_dual_alias = std::string(sub.name) == "dual";
        cmd->callback([&cli, &exit_code, kind, is_dual_alias]() {
            if (is_dual_alias) cli.dual = true;
            exit_code = run(kind, cli);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
