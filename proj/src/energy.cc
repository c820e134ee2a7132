#include "priomac/energy.h"

#include <fmt/format.h>

#include <stdexcept>
#include <string>

namespace priomac
{

const char*
ToString(RadioState state)
{
    switch (state)
    {
    case RadioState::Transmit:
        return "tx";
    case RadioState::Receive:
        return "rx";
    case RadioState::Idle:
        return "idle";
    case RadioState::Sleep:
        return "sleep";
    }
    return "unknown";
}

RadioState
RadioStateFromString(std::string_view name)
{
    if (name == "tx")
    {
        return RadioState::Transmit;
    }
    if (name == "rx")
    {
        return RadioState::Receive;
    }
    if (name == "idle")
    {
        return RadioState::Idle;
    }
    if (name == "sleep")
    {
        return RadioState::Sleep;
    }
    throw std::invalid_argument(fmt::format("unknown radio state '{}'", name));
}

double
PowerModel::Power(RadioState state) const
{
    switch (state)
    {
    case RadioState::Transmit:
        return txMw;
    case RadioState::Receive:
        return rxMw;
    case RadioState::Idle:
        return idleMw;
    case RadioState::Sleep:
        return sleepMw;
    }
    throw std::invalid_argument(fmt::format("unknown radio state {}", static_cast<int>(state)));
}

std::size_t
EnergyLedger::Index(RadioState s)
{
    const auto i = static_cast<std::size_t>(s);
    if (i >= kRadioStateCount)
    {
        throw std::invalid_argument(fmt::format("unknown radio state {}", i));
    }
    return i;
}

double
EnergyLedger::Update(RadioState state, SimTime dt)
{
    if (dt < SimTime{0})
    {
        throw std::invalid_argument("EnergyLedger::Update: negative duration");
    }
    const std::size_t i = Index(state);
    if (dt > SimTime{0})
    {
        m_time[i] += dt;
        // mW * us = nJ
        m_energyUj[i] += m_power.Power(state) * static_cast<double>(dt.count()) / 1000.0;
    }
    return TotalUj();
}

double
EnergyLedger::TotalUj() const
{
    double sum = 0.0;
    for (double e : m_energyUj)
    {
        sum += e;
    }
    return sum;
}

SimTime
EnergyLedger::TotalTime() const
{
    SimTime sum{0};
    for (auto t : m_time)
    {
        sum += t;
    }
    return sum;
}

void
RadioMeter::Switch(SimTime now, RadioState next)
{
    if (now < m_since)
    {
        throw std::logic_error("RadioMeter: time went backwards");
    }
    m_ledger.Update(m_state, now - m_since);
    m_since = now;
    m_state = next;
}

void
RadioMeter::Flush(SimTime end)
{
    Switch(end, m_state);
}

} // namespace priomac
