// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "priomac/config.h"
#include "priomac/experiment.h"
#include "priomac/fragmentation.h"
#include "priomac/fuzzy.h"

#include "fuzzy-oracle.h"
#include "scenarios.h"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

using namespace priomac;

namespace
{

int g_failures = 0;

void
Report(int id, const std::string& name, bool ok, const std::string& detail)
{
    fmt::print("{} criterion {}: {} ({})\n", ok ? "PASS" : "FAIL", id, name, detail);
    std::fflush(stdout);
    if (!ok)
    {
        ++g_failures;
    }
}

struct Run
{
    SimConfig config;
    RunReport report;
};

std::vector<Run>
RunAll(const SweepSpec& spec)
{
    std::vector<Run> out;
    for (const auto& c : spec.Points())
    {
        out.push_back(Run{c, RunOnce(c)});
    }
    return out;
}

std::string
Csv(std::span<const SweepRow> rows)
{
    std::ostringstream os;
    WriteCsv(rows, os);
    return os.str();
}

std::vector<SweepRow>
Rows(const std::vector<Run>& runs)
{
    std::vector<SweepRow> rows;
    for (const auto& r : runs)
    {
        rows.push_back(SweepRow::From(r.config, r.report));
    }
    return rows;
}

const PlotPoint*
Find(std::span<const PlotPoint> points, Protocol p, std::uint32_t n, std::optional<std::uint32_t> frag)
{
    for (const auto& pt : points)
    {
        if (pt.protocol == p && pt.nEmergency == n && pt.fragmentSize == frag)
        {
            return &pt;
        }
    }
    return nullptr;
}

std::string
Slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void
Criterion1(const std::vector<Run>& fig5, double seconds)
{
    std::map<std::pair<std::uint32_t, std::uint64_t>, std::pair<std::optional<double>, std::optional<double>>> pairs;
    for (const auto& r : fig5)
    {
        auto& slot = pairs[{r.config.nEmergency, r.config.seed}];
        (r.config.protocol == Protocol::Frog ? slot.first : slot.second) = r.report.emergency.meanUs;
    }
    int bad = 0;
    double worstRatio = 0.0;
    for (const auto& [key, v] : pairs)
    {
        if (!v.first || !v.second || !(*v.first < *v.second))
        {
            ++bad;
            continue;
        }
        worstRatio = std::max(worstRatio, *v.first / *v.second);
    }
    Report(1,
           "emergency delay FROG < FPS at every fig5 point and seed",
           bad == 0 && seconds < 300.0,
           fmt::format("{} of {} pairs violate, worst FROG/FPS ratio {:.4f}, sweep took {:.1f} s",
                       bad,
                       pairs.size(),
                       worstRatio,
                       seconds));
}

void
Criterion2(std::span<const PlotPoint> points)
{
    bool ok = true;
    std::string detail;
    for (Protocol p : {Protocol::Frog, Protocol::Fps})
    {
        const std::optional<std::uint32_t> frag = p == Protocol::Frog ? std::optional<std::uint32_t>(8) : std::nullopt;
        std::vector<double> curve;
        for (std::uint32_t n : SweepSpec::kEmergencyGrid)
        {
            const auto* pt = Find(points, p, n, frag);
            curve.push_back(pt && pt->emergency.mean ? *pt->emergency.mean : std::nan(""));
        }
        int inversions = 0;
        double worst = 0.0;
        for (std::size_t i = 1; i < curve.size(); ++i)
        {
            if (std::isnan(curve[i]) || std::isnan(curve[i - 1]))
            {
                inversions += 2;
                continue;
            }
            if (curve[i] < curve[i - 1])
            {
                ++inversions;
                worst = std::max(worst, (curve[i - 1] - curve[i]) / curve[i - 1]);
            }
        }
        const bool protocolOk = inversions == 0 || (inversions == 1 && worst <= 0.05);
        ok = ok && protocolOk;
        std::string series;
        for (double v : curve)
        {
            series += fmt::format("{}{:.0f}", series.empty() ? "" : " ", v);
        }
        detail += fmt::format("{}{}: [{}] us, {} inversions, largest {:.2f}%",
                              detail.empty() ? "" : "; ",
                              ToString(p),
                              series,
                              inversions,
                              100.0 * worst);
    }
    Report(2, "mean emergency delay non-decreasing in n_emergency (one inversion <= 5% allowed)", ok, detail);
}

void
Criterion3(std::span<const PlotPoint> points)
{
    bool ok = true;
    double maxSpread = 0.0;
    double minNormalRatio = std::numeric_limits<double>::infinity();
    for (std::uint32_t n : SweepSpec::kEmergencyGrid)
    {
        const auto* f2 = Find(points, Protocol::Frog, n, 2);
        const auto* f32 = Find(points, Protocol::Frog, n, 32);
        if (!f2 || !f32 || !f2->normal.mean || !f32->normal.mean)
        {
            ok = false;
            continue;
        }
        ok = ok && *f2->normal.mean > *f32->normal.mean;
        minNormalRatio = std::min(minNormalRatio, *f2->normal.mean / *f32->normal.mean);
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::uint32_t f : SweepSpec::kFragmentGrid)
        {
            const auto* pt = Find(points, Protocol::Frog, n, f);
            if (!pt || !pt->emergency.mean)
            {
                ok = false;
                continue;
            }
            lo = std::min(lo, *pt->emergency.mean);
            hi = std::max(hi, *pt->emergency.mean);
        }
        const double spread = (hi - lo) / lo;
        maxSpread = std::max(maxSpread, spread);
        ok = ok && spread <= 0.5;
    }
    Report(3,
           "FROG normal delay larger at fragment 2 than 32; emergency spread within 50%",
           ok,
           fmt::format("smallest normal-delay ratio size2/size32 {:.3f}, largest emergency spread {:.2f}%",
                       minNormalRatio,
                       100.0 * maxSpread));
}

void
Criterion4(std::span<const PlotPoint> points)
{
    bool ok = true;
    double worst = 0.0;
    for (std::uint32_t n : SweepSpec::kEmergencyGrid)
    {
        const auto* frog = Find(points, Protocol::Frog, n, 8);
        const auto* fps = Find(points, Protocol::Fps, n, std::nullopt);
        if (!frog || !fps || !frog->energy.mean || !fps->energy.mean)
        {
            ok = false;
            continue;
        }
        ok = ok && *frog->energy.mean < *fps->energy.mean;
        worst = std::max(worst, *frog->energy.mean / *fps->energy.mean);
    }
    Report(4, "energy per delivered packet FROG < FPS at every fig5 point", ok,
           fmt::format("worst FROG/FPS ratio {:.3f}", worst));
}

void
Criterion5()
{
    bool ok = true;
    std::string detail;
    for (std::uint32_t size : SweepSpec::kFragmentGrid)
    {
        const std::size_t count = (34 + size - 1) / size;
        std::vector<std::size_t> targets{0};
        if (count > 2)
        {
            targets.push_back(count - 2);
        }
        for (std::size_t frag : targets)
        {
            const auto r = priomac::testing::RunPreemption(size, frag);
            const bool pass = r.gapStart >= 0 && r.urgentTxNode == 2 && r.urgentTxFrame == "data-whole" &&
                              r.urgentTxStart >= r.gapStart && r.urgentTxStart < r.gapEnd && r.urgentDelivered &&
                              r.normalDelivered && r.collisions == 0;
            ok = ok && pass;
            if (frag == 0)
            {
                detail += fmt::format("{}size {}: +{} us", detail.empty() ? "" : ", ", size,
                                      r.urgentTxStart - r.gapStart);
            }
        }
    }
    Report(5, "emergency frame takes the very next inter-fragment gap", ok,
           "gap start to emergency tx: " + detail);
}

void
Criterion6()
{
    bool ok = true;
    for (std::uint32_t size = 1; size <= 34; ++size)
    {
        Packet p;
        p.id = size;
        p.src = 1;
        const auto frags = FragmentPacket(p, size, 5);
        std::uint32_t sum = 0;
        Reassembler r;
        Reassembler::Result last;
        std::vector<std::uint8_t> payload(34);
        std::iota(payload.begin(), payload.end(), std::uint8_t{1});
        for (auto it = frags.rbegin(); it != frags.rend(); ++it)
        {
            sum += it->payloadBytes;
            last = r.Accept(1, p.id, it->index, it->count, it->payloadBytes,
                            std::span<const std::uint8_t>(payload.data() + it->offset, it->payloadBytes));
        }
        ok = ok && frags.size() == (34 + size - 1) / size && sum == 34 &&
             last.status == Reassembler::Status::Completed && last.payload == payload;
    }
    Report(6, "fragment count, byte sum and reassembly for sizes 1..34", ok, "34 sizes checked");
}

void
Criterion7()
{
    std::mt19937_64 gen(99);
    const FuzzyScales scales;
    std::uniform_real_distribution<double> dist(0.0, scales.areaDiagonalM);
    std::uniform_real_distribution<double> energy(0.0, scales.initialEnergyJ);
    std::uniform_int_distribution<std::uint32_t> slots(0, 40);
    int dominanceBad = 0;
    for (int i = 0; i < 10000; ++i)
    {
        const FuzzyInputs a{dist(gen), energy(gen), slots(gen), true};
        const FuzzyInputs b{dist(gen), energy(gen), slots(gen), false};
        dominanceBad += Priority(a, scales) < Priority(b, scales);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double maxErr = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const double d = unit(gen);
        const double e = unit(gen);
        const double s = unit(gen);
        maxErr = std::max(maxErr, std::abs(FuzzyCore(d, e, s) - priomac::testing::OracleCore(d, e, s)));
    }
    const double centre = FuzzyCore(0.5, 0.5, 0.5);
    Report(7,
           "fuzzy priority dominance, oracle agreement, centre value",
           dominanceBad == 0 && maxErr <= 1e-9 && std::abs(centre - 0.5) <= 1e-9,
           fmt::format("{} dominance violations, max oracle error {:.2e}, core(0.5,0.5,0.5) = {:.12f}",
                       dominanceBad,
                       maxErr,
                       centre));
}

void
Criterion8(const std::vector<Run>& runs)
{
    std::uint64_t fpsCollisions = 0;
    std::uint64_t slotViolations = 0;
    std::uint64_t frogCorrupted = 0;
    int conservation = 0;
    for (const auto& r : runs)
    {
        const auto& c = r.report.counters;
        if (r.config.protocol == Protocol::Fps)
        {
            fpsCollisions += c.dataCollisions;
            slotViolations += c.slotViolations;
        }
        else
        {
            frogCorrupted += c.corruptedAccepted;
        }
        for (const auto* s : {&r.report.emergency, &r.report.normal, &r.report.all})
        {
            conservation += s->delivered + s->dropped + s->inFlight != s->generated;
        }
    }
    Report(8,
           "no FPS slot collisions, no corrupted FROG deliveries, packet conservation",
           fpsCollisions == 0 && slotViolations == 0 && frogCorrupted == 0 && conservation == 0,
           fmt::format("{} full runs: FPS data collisions {}, slot violations {}, FROG corrupted accepted {}, "
                       "conservation breaks {}",
                       runs.size(),
                       fpsCollisions,
                       slotViolations,
                       frogCorrupted,
                       conservation));
}

void
Criterion9(const std::string& fig5Csv)
{
    const auto dir = std::filesystem::temp_directory_path() / "priomac-acceptance";
    std::filesystem::create_directories(dir);
    bool tracesOk = true;
    std::uintmax_t bytes = 0;
    for (Protocol p : {Protocol::Frog, Protocol::Fps})
    {
        SimConfig c;
        c.protocol = p;
        c.nEmergency = 9;
        EmitTrace(c, dir / "a.trace");
        EmitTrace(c, dir / "b.trace");
        const auto a = Slurp(dir / "a.trace");
        tracesOk = tracesOk && !a.empty() && a == Slurp(dir / "b.trace");
        bytes += a.size();
    }
    std::filesystem::remove_all(dir);

    SweepSpec spec;
    spec.experiment = Experiment::Fig5;
    spec.threads = 1;
    const auto sequential = Csv(RunSweep(spec));
    spec.threads = 4;
    const auto concurrent = Csv(RunSweep(spec));
    const bool csvOk = sequential == concurrent && sequential == fig5Csv;
    Report(9,
           "identical traces and CSV for identical seeds, sequential == concurrent sweep",
           tracesOk && csvOk,
           fmt::format("traces {} ({} bytes each pair), fig5 CSV {} ({} bytes)",
                       tracesOk ? "identical" : "differ",
                       bytes,
                       csvOk ? "identical" : "differ",
                       sequential.size()));
}

} // namespace

int
main()
{
    using Clock = std::chrono::steady_clock;

    SweepSpec fig5;
    fig5.experiment = Experiment::Fig5;
    const auto t0 = Clock::now();
    const auto fig5Runs = RunAll(fig5);
    const double fig5Seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    const auto fig5Rows = Rows(fig5Runs);
    const auto fig5Points = Aggregate(fig5Rows);

    SweepSpec fig4;
    fig4.experiment = Experiment::Fig4;
    const auto fig4Runs = RunAll(fig4);
    const auto fig4Points = Aggregate(Rows(fig4Runs));

    Criterion1(fig5Runs, fig5Seconds);
    Criterion2(fig5Points);
    Criterion3(fig4Points);
    Criterion4(fig5Points);
    Criterion5();
    Criterion6();
    Criterion7();
    std::vector<Run> all = fig5Runs;
    all.insert(all.end(), fig4Runs.begin(), fig4Runs.end());
    Criterion8(all);
    Criterion9(Csv(fig5Rows));

    fmt::print("{} of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
