#include "priomac/config.h"
#include "priomac/experiment.h"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <map>
#include <optional>
#include <string>

using namespace priomac;

namespace
{

/// Config file plus one optional flag per config key.
struct ConfigFlags
{
    std::optional<std::string> file;
    std::map<std::string, std::string> values;

    void Register(CLI::App& app)
    {
        app.add_option("-c,--config", file, "key = value configuration file")->check(CLI::ExistingFile);
        for (const auto& key : ConfigKeys())
        {
            app.add_option("--" + key.name, values[key.name], key.help);
        }
    }

    SimConfig Resolve(CLI::App& app) const
    {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const auto& key : ConfigKeys())
        {
            if (app.count("--" + key.name) > 0)
            {
                overrides.emplace_back(key.name, values.at(key.name));
            }
        }
        return ParseConfig(file, overrides);
    }
};

std::string
Us(const std::optional<double>& v)
{
    return v ? fmt::format("{:.1f} us", *v) : std::string("NA");
}

void
PrintReport(const SimConfig& config, const RunReport& r)
{
    fmt::print("protocol {} n_nodes {} n_emergency {} seed {} duration {} s\n",
               ToString(config.protocol),
               config.nNodes,
               config.nEmergency,
               config.seed,
               config.duration.count() / 1'000'000);
    for (auto [name, s] : {std::pair<const char*, const ClassStats*>{"emergency", &r.emergency},
                           {"normal", &r.normal},
                           {"all", &r.all}})
    {
        fmt::print("{:<10} generated {:>7} delivered {:>7} dropped {:>5} in-flight {:>4}  mean {}  median {}  p95 {}\n",
                   name,
                   s->generated,
                   s->delivered,
                   s->dropped,
                   s->inFlight,
                   Us(s->meanUs),
                   Us(s->medianUs),
                   Us(s->p95Us));
    }
    fmt::print("member energy {:.1f} uJ, per delivered packet {}\n",
               r.memberEnergyUj,
               r.energyPerDeliveredUj ? fmt::format("{:.3f} uJ", *r.energyPerDeliveredUj) : "NA");
    const auto& c = r.counters;
    fmt::print("data tx {} collisions {} ack losses {}", c.dataTransmissions, c.dataCollisions, c.ackLosses);
    if (config.protocol == Protocol::Fps)
    {
        fmt::print(" frames {} emergency frames {} eis collisions {}", c.frames, c.emergencyFrames, c.eisCollisions);
    }
    fmt::print("\n");
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Priority MAC simulator: fragmentation preemption vs. fuzzy-scheduled TDMA"};
    app.require_subcommand(0, 1);

    bool printConfig = false;
    ConfigFlags topFlags;
    app.add_flag("--print-config", printConfig, "print every effective configuration value and exit");
    topFlags.Register(app);

    auto* run = app.add_subcommand("run", "run one simulation and print its report");
    ConfigFlags runFlags;
    runFlags.Register(*run);

    auto* trace = app.add_subcommand("trace", "run one simulation and write its event trace");
    ConfigFlags traceFlags;
    std::string traceOut;
    traceFlags.Register(*trace);
    trace->add_option("-o,--out", traceOut, "trace file")->required();

    auto* sweep = app.add_subcommand("sweep", "run an experiment sweep and write CSV and plot data");
    ConfigFlags sweepFlags;
    std::string experiment;
    std::uint64_t seeds = 10;
    std::string outDir;
    unsigned threads = 0;
    sweep->add_option("-e,--experiment", experiment, "fig4 or fig5")->required()->check(CLI::IsMember({"fig4", "fig5"}));
    sweep->add_option("-s,--seeds", seeds, "seeds 1..N per point")->check(CLI::Range(1, 100000));
    sweep->add_option("-o,--out", outDir, "output directory")->required();
    sweep->add_option("-j,--threads", threads, "worker threads (0: all cores)");
    sweepFlags.Register(*sweep);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            const SimConfig config = runFlags.Resolve(*run);
            PrintReport(config, RunOnce(config));
        }
        else if (*trace)
        {
            const SimConfig config = traceFlags.Resolve(*trace);
            const RunReport report = EmitTrace(config, traceOut);
            fmt::print("trace written to {} ({} packets delivered)\n", traceOut, report.all.delivered);
        }
        else if (*sweep)
        {
            SweepSpec spec;
            spec.experiment = ExperimentFromString(experiment);
            spec.base = sweepFlags.Resolve(*sweep);
            spec.base.fragmentSize.reset();
            spec.threads = threads;
            for (std::uint64_t s = 1; s <= seeds; ++s)
            {
                spec.seeds.push_back(s);
            }
            const auto rows = RunSweep(spec);
            const auto csv = WriteSweep(spec, rows, outDir);
            fmt::print("{} rows written to {}\n", rows.size(), csv.string());
        }
        else if (printConfig)
        {
            PrintConfig(topFlags.Resolve(app), std::cout);
        }
        else
        {
            std::cout << app.help();
        }
    }
    catch (const std::exception& e)
    {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
