#pragma once

#include "priomac/channel.h"
#include "priomac/energy.h"
#include "priomac/fps-mac.h"
#include "priomac/frog-mac.h"
#include "priomac/traffic.h"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace priomac
{

enum class Protocol : std::uint8_t
{
    Frog,
    Fps,
};

const char* ToString(Protocol p);
Protocol ProtocolFromString(std::string_view name);

/// Everything one simulation run needs. Defaults reproduce the reference settings.
struct SimConfig
{
    Protocol protocol = Protocol::Frog;
    std::uint32_t nNodes = 20;
    std::uint32_t nEmergency = 3;
    std::optional<std::uint32_t> fragmentSize; // FROG only; unset means kDefaultFragmentSize
    SimTime duration = Seconds(5000);
    std::uint64_t seed = 1;
    std::uint32_t payloadBytes = 34;

    TrafficParams traffic;
    RadioParams radio;
    PowerModel power;
    FrogParams frog;
    FpsParams fps;

    static constexpr std::uint32_t kDefaultFragmentSize = 8;

    std::uint32_t EffectiveFragmentSize() const { return fragmentSize.value_or(kDefaultFragmentSize); }

    /// Throws ConfigError naming the first offending key.
    void Validate() const;
};

class ConfigError : public std::invalid_argument
{
  public:
    ConfigError(std::string key, const std::string& what);

    const std::string& Key() const { return m_key; }

  private:
    std::string m_key;
};

/// One settable key: its name, a help line, a parser and a printer.
struct ConfigKey
{
    std::string name;
    std::string help;
    std::function<void(SimConfig&, std::string_view)> set;
    std::function<std::string(const SimConfig&)> get;
};

const std::vector<ConfigKey>& ConfigKeys();

/// Assign one key from text. Unknown keys and malformed values throw ConfigError.
void SetConfigValue(SimConfig& config, std::string_view key, std::string_view value);

/// Apply `key = value` lines; blank lines and `#` comments are skipped.
void ApplyConfigText(SimConfig& config, std::istream& in, std::string_view origin = "<input>");
void ApplyConfigFile(SimConfig& config, const std::string& path);

/// Defaults, then the file (if any), then the overrides in order; validated.
SimConfig ParseConfig(const std::optional<std::string>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

/// Every effective value as `key = value` lines, parseable by ApplyConfigText.
void PrintConfig(const SimConfig& config, std::ostream& out);

} // namespace priomac
