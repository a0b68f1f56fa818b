// Scenario runner for the constellation routing simulator.
//
//   satnet run <scenario.json>                 write plan/stability/traffic/summary
//   satnet compare <scenario.json>...          per-update series + aggregates (stdout)
//   satnet compare ... --boundary-sweep ...    rerun over polar boundary values (stdout)
//   satnet sweep-weights <scenario.json> ...   update counts across one weight (stdout)
//   satnet events <scenario.json>              connectivity event schedule (stdout)
//
// Exit codes: 0 success, 2 invalid configuration, 3 infeasible zeta.
// SATNET_OUTPUT_DIR overrides the scenario's output directory for `run`.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satnet/scenario.hpp"

namespace {

int run_command(const std::string& scenario_path) {
    const satnet::Scenario scn = satnet::load_scenario_file(scenario_path);
    std::string override_dir;
    if (const char* env = std::getenv("SATNET_OUTPUT_DIR")) override_dir = env;
    const satnet::RunResult result = satnet::run_scenario(scn, override_dir);
    std::cout << result.summary.dump(2) << std::endl;
    return 0;
}

int compare_command(const std::vector<std::string>& paths, const std::vector<double>& boundaries) {
    std::vector<satnet::Scenario> scenarios;
    for (const auto& p : paths) scenarios.push_back(satnet::load_scenario_file(p));
    if (!boundaries.empty()) {
        const auto rows = satnet::boundary_sweep(scenarios, boundaries);
        std::cout << satnet::boundary_sweep_csv(rows);
        return 0;
    }
    std::vector<satnet::CompareEntry> entries;
    for (const auto& scn : scenarios)
        entries.push_back({scn.name, satnet::run_pipeline(scn)});
    std::cout << satnet::compare_csv(entries);
    return 0;
}

int sweep_weights_command(const std::string& scenario_path, const std::string& which,
                          const std::vector<double>& values) {
    const satnet::Scenario scn = satnet::load_scenario_file(scenario_path);
    if (scn.planner.kind != satnet::PlannerKind::Dp)
        throw satnet::ConfigError("sweep-weights requires a dp planner scenario");
    const auto timeline = satnet::Timeline::build(scn.constellation, scn.metric,
                                                  scn.planner.base_interval);
    const satnet::ErrorComponents components(timeline, scn.planner.em_reference);
    const auto sweep_which = which == "wn" ? satnet::SweepWhich::WN : satnet::SweepWhich::WM;
    const auto sweep = satnet::weight_sweep(timeline, components, sweep_which, values,
                                            scn.planner.weights.w_c);
    std::cout << satnet::weight_sweep_csv(sweep, which == "wn" ? "w_n" : "w_m");
    return 0;
}

int events_command(const std::string& scenario_path) {
    const satnet::Scenario scn = satnet::load_scenario_file(scenario_path);
    std::cout << satnet::events_csv(scn.constellation);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LEO constellation routing-stability simulator"};
    app.require_subcommand(1);

    std::string run_path;
    auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
    run->add_option("scenario", run_path, "scenario JSON file")->required();

    std::vector<std::string> compare_paths;
    std::vector<double> boundaries;
    auto* compare = app.add_subcommand("compare", "side-by-side stability comparison");
    compare->add_option("scenarios", compare_paths, "scenario JSON files")->required();
    compare->add_option("--boundary-sweep", boundaries,
                        "polar boundary latitudes to rerun each scenario with");

    std::string sweep_path, sweep_which;
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep-weights", "update counts across one error weight");
    sweep->add_option("scenario", sweep_path, "scenario JSON file")->required();
    sweep->add_option("--which", sweep_which, "wn or wm")
        ->required()
        ->check(CLI::IsMember({"wn", "wm"}));
    sweep->add_option("--values", sweep_values, "weight values to try")->required();

    std::string events_path;
    auto* events = app.add_subcommand("events", "dump the connectivity event schedule");
    events->add_option("scenario", events_path, "scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(run_path);
        if (compare->parsed()) return compare_command(compare_paths, boundaries);
        if (sweep->parsed()) return sweep_weights_command(sweep_path, sweep_which, sweep_values);
        if (events->parsed()) return events_command(events_path);
    } catch (const satnet::ZetaError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const satnet::ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
