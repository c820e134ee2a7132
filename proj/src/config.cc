#include "priomac/config.h"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace priomac
{

const char*
ToString(Protocol p)
{
    return p == Protocol::Frog ? "frog" : "fps";
}

Protocol
ProtocolFromString(std::string_view name)
{
    if (name == "frog" || name == "FROG")
    {
        return Protocol::Frog;
    }
    if (name == "fps" || name == "FPS")
    {
        return Protocol::Fps;
    }
    throw ConfigError("protocol", fmt::format("unknown protocol '{}' (expected frog or fps)", name));
}

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::invalid_argument(fmt::format("{}: {}", key, what)),
      m_key(std::move(key))
{
}

namespace
{

std::string_view
Trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T
ParseNumber(std::string_view key, std::string_view text)
{
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
    {
        throw ConfigError(std::string(key), fmt::format("cannot parse '{}' as a number", text));
    }
    if constexpr (std::is_floating_point_v<T>)
    {
        if (!std::isfinite(value))
        {
            throw ConfigError(std::string(key), fmt::format("'{}' is not finite", text));
        }
    }
    return value;
}

SimTime
ParseSeconds(std::string_view key, std::string_view text)
{
    const double s = ParseNumber<double>(key, text);
    if (s < 0.0 || s > 1e9)
    {
        throw ConfigError(std::string(key), "out of range");
    }
    return Micros(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

SimTime
ParseMicros(std::string_view key, std::string_view text)
{
    const auto us = ParseNumber<std::int64_t>(key, text);
    if (us < 0)
    {
        throw ConfigError(std::string(key), "must be non-negative");
    }
    return Micros(us);
}

std::string
FormatSeconds(SimTime t)
{
    return fmt::format("{}", static_cast<double>(t.count()) / 1e6);
}

std::string
FormatDouble(double v)
{
    return fmt::format("{}", v);
}

// Key builders over a member accessor.
template <typename Access>
ConfigKey
Unsigned(std::string name, std::string help, Access access)
{
    auto key = name;
    return ConfigKey{
        std::move(name),
        std::move(help),
        [access, key](SimConfig& c, std::string_view v) { access(c) = ParseNumber<std::uint32_t>(key, v); },
        [access](const SimConfig& c) { return fmt::format("{}", access(c)); }};
}

template <typename Access>
ConfigKey
Real(std::string name, std::string help, Access access)
{
    auto key = name;
    return ConfigKey{std::move(name),
                     std::move(help),
                     [access, key](SimConfig& c, std::string_view v) { access(c) = ParseNumber<double>(key, v); },
                     [access](const SimConfig& c) { return FormatDouble(access(c)); }};
}

template <typename Access>
ConfigKey
MicrosKey(std::string name, std::string help, Access access)
{
    auto key = name;
    return ConfigKey{std::move(name),
                     std::move(help),
                     [access, key](SimConfig& c, std::string_view v) { access(c) = ParseMicros(key, v); },
                     [access](const SimConfig& c) {
                         return fmt::format("{}", access(c).count());
                     }};
}

template <typename Access>
ConfigKey
SecondsKey(std::string name, std::string help, Access access)
{
    auto key = name;
    return ConfigKey{std::move(name),
                     std::move(help),
                     [access, key](SimConfig& c, std::string_view v) { access(c) = ParseSeconds(key, v); },
                     [access](const SimConfig& c) { return FormatSeconds(access(c)); }};
}

std::vector<ConfigKey>
BuildKeys()
{
    std::vector<ConfigKey> k;
    k.push_back(ConfigKey{"protocol",
                          "frog or fps",
                          [](SimConfig& c, std::string_view v) { c.protocol = ProtocolFromString(v); },
                          [](const SimConfig& c) { return std::string(ToString(c.protocol)); }});
    k.push_back(Unsigned("n_nodes", "member nodes (the sink is extra)", [](auto& c) -> auto& { return c.nNodes; }));
    k.push_back(Unsigned("n_emergency", "members that also generate EMERGENCY traffic",
                         [](auto& c) -> auto& { return c.nEmergency; }));
    k.push_back(ConfigKey{"fragment_size",
                          "FROG fragment payload bytes (default 8)",
                          [](SimConfig& c, std::string_view v) {
                              c.fragmentSize = ParseNumber<std::uint32_t>("fragment_size", v);
                          },
                          [](const SimConfig& c) {
                              return c.protocol == Protocol::Frog ? fmt::format("{}", c.EffectiveFragmentSize())
                                                                  : std::string("NA");
                          }});
    k.push_back(SecondsKey("duration_s", "simulated time in seconds", [](auto& c) -> auto& { return c.duration; }));
    k.push_back(ConfigKey{"seed",
                          "master seed",
                          [](SimConfig& c, std::string_view v) { c.seed = ParseNumber<std::uint64_t>("seed", v); },
                          [](const SimConfig& c) { return fmt::format("{}", c.seed); }});
    k.push_back(Real("area_m", "side of the square deployment area", [](auto& c) -> auto& { return c.traffic.areaM; }));
    k.push_back(Unsigned("payload_bytes", "application payload per packet",
                         [](auto& c) -> auto& { return c.payloadBytes; }));
    k.push_back(SecondsKey("normal_interval_s", "NORMAL generation period",
                           [](auto& c) -> auto& { return c.traffic.normalInterval; }));
    k.push_back(SecondsKey("emergency_interval_s", "EMERGENCY generation period",
                           [](auto& c) -> auto& { return c.traffic.emergencyInterval; }));
    k.push_back(Unsigned("bitrate_bps", "radio bit rate", [](auto& c) -> auto& { return c.radio.bitrateBps; }));
    k.push_back(MicrosKey("cca_us", "clear channel assessment time", [](auto& c) -> auto& { return c.radio.cca; }));

    k.push_back(Unsigned("frog_header_bytes", "FROG per-fragment header", [](auto& c) -> auto& { return c.frog.headerBytes; }));
    k.push_back(MicrosKey("ifs_high_us", "FROG urgent inter-frame space",
                          [](auto& c) -> auto& { return c.frog.timing.ifsHigh; }));
    k.push_back(MicrosKey("ifs_low_us", "FROG normal inter-frame space",
                          [](auto& c) -> auto& { return c.frog.timing.ifsLow; }));
    k.push_back(MicrosKey("gap_us", "FROG inter-fragment gap",
                          [](auto& c) -> auto& { return c.frog.timing.interFragmentGap; }));
    k.push_back(MicrosKey("backoff_unit_us", "FROG backoff slot",
                          [](auto& c) -> auto& { return c.frog.timing.backoffUnit; }));
    k.push_back(Unsigned("high_backoff_max", "FROG urgent backoff window (slots)",
                         [](auto& c) -> auto& { return c.frog.timing.highBackoffMax; }));
    k.push_back(Unsigned("low_backoff_max", "FROG normal backoff window (slots)",
                         [](auto& c) -> auto& { return c.frog.timing.lowBackoffMax; }));
    k.push_back(Unsigned("frog_ack_bytes", "FROG ack frame", [](auto& c) -> auto& { return c.frog.timing.ackBytes; }));
    k.push_back(Unsigned("frog_max_retries", "FROG retransmissions per unit",
                         [](auto& c) -> auto& { return c.frog.timing.maxRetries; }));
    k.push_back(MicrosKey("frog_ack_turnaround_us", "FROG sink turnaround before the ack",
                          [](auto& c) -> auto& { return c.frog.timing.ackTurnaround; }));

    k.push_back(Unsigned("slots_per_frame", "FPS data slots per frame",
                         [](auto& c) -> auto& { return c.fps.slotsPerFrame; }));
    k.push_back(Unsigned("fps_header_bytes", "FPS data frame header", [](auto& c) -> auto& { return c.fps.headerBytes; }));
    k.push_back(Unsigned("fps_ack_bytes", "FPS ack frame", [](auto& c) -> auto& { return c.fps.ackBytes; }));
    k.push_back(Unsigned("indication_bytes", "FPS emergency indication frame",
                         [](auto& c) -> auto& { return c.fps.indicationBytes; }));
    k.push_back(Unsigned("schedule_bytes", "FPS schedule broadcast frame",
                         [](auto& c) -> auto& { return c.fps.scheduleBytes; }));
    k.push_back(MicrosKey("guard_us", "FPS guard time per window and slot", [](auto& c) -> auto& { return c.fps.guard; }));
    k.push_back(MicrosKey("fps_ack_turnaround_us", "FPS head turnaround before the ack",
                          [](auto& c) -> auto& { return c.fps.ackTurnaround; }));
    k.push_back(Real("eis_persistence", "probability of sending an indication in the EIS",
                     [](auto& c) -> auto& { return c.fps.persistence; }));
    k.push_back(Real("ack_loss_prob", "FPS acknowledgment loss probability",
                     [](auto& c) -> auto& { return c.fps.ackLossProb; }));
    k.push_back(Unsigned("fps_max_retries", "FPS failed attempts before a drop",
                         [](auto& c) -> auto& { return c.fps.maxRetries; }));
    k.push_back(Real("initial_energy_j", "battery at start, fuzzy energy scale",
                     [](auto& c) -> auto& { return c.fps.scales.initialEnergyJ; }));

    k.push_back(Real("p_tx_mw", "transmit power", [](auto& c) -> auto& { return c.power.txMw; }));
    k.push_back(Real("p_rx_mw", "receive/listen power", [](auto& c) -> auto& { return c.power.rxMw; }));
    k.push_back(Real("p_idle_mw", "idle power", [](auto& c) -> auto& { return c.power.idleMw; }));
    k.push_back(Real("p_sleep_mw", "sleep power", [](auto& c) -> auto& { return c.power.sleepMw; }));
    return k;
}

} // namespace

const std::vector<ConfigKey>&
ConfigKeys()
{
    static const std::vector<ConfigKey> keys = BuildKeys();
    return keys;
}

void
SetConfigValue(SimConfig& config, std::string_view key, std::string_view value)
{
    const auto& keys = ConfigKeys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (it == keys.end())
    {
        throw ConfigError(std::string(key), "unknown key");
    }
    it->set(config, Trim(value));
}

void
ApplyConfigText(SimConfig& config, std::istream& in, std::string_view origin)
{
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos)
        {
            view = view.substr(0, hash);
        }
        view = Trim(view);
        if (view.empty())
        {
            continue;
        }
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError(std::string(view), fmt::format("{}:{}: expected 'key = value'", origin, lineNo));
        }
        SetConfigValue(config, Trim(view.substr(0, eq)), Trim(view.substr(eq + 1)));
    }
}

void
ApplyConfigFile(SimConfig& config, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error(fmt::format("cannot open config file '{}'", path));
    }
    ApplyConfigText(config, in, path);
}

void
SimConfig::Validate() const
{
    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok)
        {
            throw ConfigError(key, what);
        }
    };
    require(nNodes >= 1, "n_nodes", "at least one member is required");
    require(nEmergency <= nNodes, "n_emergency", "cannot exceed n_nodes");
    require(!(fragmentSize && protocol == Protocol::Fps), "fragment_size", "only valid with protocol frog");
    require(payloadBytes >= 1 && payloadBytes <= 65535, "payload_bytes", "must lie in 1..65535");
    if (fragmentSize)
    {
        require(*fragmentSize >= 1 && *fragmentSize <= payloadBytes, "fragment_size", "must lie in 1..payload_bytes");
    }
    require(duration > SimTime{0}, "duration_s", "must be positive");
    require(traffic.areaM > 0.0, "area_m", "must be positive");
    require(traffic.normalInterval > SimTime{0}, "normal_interval_s", "must be positive");
    require(traffic.emergencyInterval > SimTime{0}, "emergency_interval_s", "must be positive");
    require(radio.bitrateBps > 0, "bitrate_bps", "must be positive");
    require(radio.cca > SimTime{0}, "cca_us", "must be positive");
    require(frog.timing.ifsHigh >= radio.cca, "ifs_high_us", "must cover a clear channel assessment");
    require(frog.timing.backoffUnit > SimTime{0}, "backoff_unit_us", "must be positive");
    require(frog.timing.ackBytes >= 1, "frog_ack_bytes", "must be positive");
    require(frog.timing.ifsHigh + frog.timing.backoffUnit * frog.timing.highBackoffMax < frog.timing.interFragmentGap,
            "gap_us",
            "must exceed ifs_high_us + high_backoff_max * backoff_unit_us");
    require(frog.timing.ifsLow > frog.timing.interFragmentGap, "ifs_low_us", "must exceed gap_us");
    require(fps.slotsPerFrame >= 1, "slots_per_frame", "must be positive");
    require(fps.ackBytes >= 1, "fps_ack_bytes", "must be positive");
    require(fps.indicationBytes >= 1, "indication_bytes", "must be positive");
    require(fps.scheduleBytes >= 1, "schedule_bytes", "must be positive");
    require(fps.persistence > 0.0 && fps.persistence <= 1.0, "eis_persistence", "must lie in (0, 1]");
    require(fps.ackLossProb >= 0.0 && fps.ackLossProb < 1.0, "ack_loss_prob", "must lie in [0, 1)");
    require(fps.scales.initialEnergyJ > 0.0, "initial_energy_j", "must be positive");
    for (auto [v, key] : {std::pair{power.txMw, "p_tx_mw"},
                          std::pair{power.rxMw, "p_rx_mw"},
                          std::pair{power.idleMw, "p_idle_mw"},
                          std::pair{power.sleepMw, "p_sleep_mw"}})
    {
        require(v >= 0.0, key, "must be non-negative");
    }
}

SimConfig
ParseConfig(const std::optional<std::string>& file, const std::vector<std::pair<std::string, std::string>>& overrides)
{
    SimConfig config;
    if (file)
    {
        ApplyConfigFile(config, *file);
    }
    for (const auto& [key, value] : overrides)
    {
        SetConfigValue(config, key, value);
    }
    config.Validate();
    return config;
}

void
PrintConfig(const SimConfig& config, std::ostream& out)
{
    for (const auto& key : ConfigKeys())
    {
        const std::string value = key.get(config);
        if (value == "NA")
        {
            out << "# " << key.name << " not used by protocol " << ToString(config.protocol) << '\n';
            continue;
        }
        out << key.name << " = " << value << '\n';
    }
}

} // namespace priomac
