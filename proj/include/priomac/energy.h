#pragma once

#include "priomac/sim-time.h"

#include <array>
#include <cstdint>
#include <string_view>

namespace priomac
{

enum class RadioState : std::uint8_t
{
    Transmit,
    Receive, // also covers listening / carrier sensing
    Idle,
    Sleep,
};

constexpr std::size_t kRadioStateCount = 4;

const char* ToString(RadioState state);
/// Throws std::invalid_argument for an unknown name.
RadioState RadioStateFromString(std::string_view name);

/// Radio power draw per state, milliwatts.
struct PowerModel
{
    double txMw = 52.2;
    double rxMw = 59.1;
    double idleMw = 1.28;
    double sleepMw = 0.02;

    double Power(RadioState state) const;
};

/// Cumulative time and energy per radio state for one node.
class EnergyLedger
{
  public:
    explicit EnergyLedger(PowerModel power = {})
        : m_power(power)
    {
    }

    /// Charge dt in the given state; returns the node's accumulated energy in microjoules.
    double Update(RadioState state, SimTime dt);

    double TotalUj() const;
    double StateUj(RadioState s) const { return m_energyUj[Index(s)]; }
    SimTime StateTime(RadioState s) const { return m_time[Index(s)]; }
    SimTime TotalTime() const;

  private:
    static std::size_t Index(RadioState s);

    PowerModel m_power;
    std::array<SimTime, kRadioStateCount> m_time{};
    std::array<double, kRadioStateCount> m_energyUj{};
};

/// Tracks a node's current radio state and charges its ledger on every switch.
class RadioMeter
{
  public:
    RadioMeter(PowerModel power, RadioState initial, SimTime start = SimTime{0})
        : m_ledger(power),
          m_state(initial),
          m_since(start)
    {
    }

    void Switch(SimTime now, RadioState next);
    /// Charge the open interval up to end. Further switches are still allowed.
    void Flush(SimTime end);

    RadioState State() const { return m_state; }
    const EnergyLedger& Ledger() const { return m_ledger; }

  private:
    EnergyLedger m_ledger;
    RadioState m_state;
    SimTime m_since;
};

} // namespace priomac
