#include "priomac/fuzzy.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace priomac
{

double
TriangularSet::Membership(double x) const
{
    if (x < left || x > right)
    {
        return 0.0;
    }
    if (x <= peak)
    {
        return peak == left ? 1.0 : (x - left) / (peak - left);
    }
    return right == peak ? 1.0 : (right - x) / (right - peak);
}

MamdaniSystem::MamdaniSystem(std::vector<LinguisticVariable> inputs,
                             LinguisticVariable output,
                             std::vector<FuzzyRule> rules,
                             std::size_t samples)
    : m_inputs(std::move(inputs)),
      m_output(output),
      m_rules(std::move(rules)),
      m_samples(samples)
{
    if (m_samples < 2)
    {
        throw std::invalid_argument("MamdaniSystem: need at least two defuzzification samples");
    }
    for (const auto& rule : m_rules)
    {
        for (const auto& clause : rule.clauses)
        {
            for (const auto& a : clause)
            {
                if (a.input >= m_inputs.size())
                {
                    throw std::invalid_argument("MamdaniSystem: rule refers to a missing input");
                }
            }
        }
    }
}

std::array<double, 3>
MamdaniSystem::Fire(std::span<const double> inputs) const
{
    if (inputs.size() != m_inputs.size())
    {
        throw std::invalid_argument(
            fmt::format("MamdaniSystem: expected {} inputs, got {}", m_inputs.size(), inputs.size()));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i)
    {
        if (!(inputs[i] >= 0.0 && inputs[i] <= 1.0))
        {
            throw std::invalid_argument(fmt::format("MamdaniSystem: input {} = {} outside [0, 1]", i, inputs[i]));
        }
    }

    std::array<double, 3> strength{0.0, 0.0, 0.0};
    for (const auto& rule : m_rules)
    {
        double fired = 0.0;
        for (const auto& clause : rule.clauses)
        {
            double c = 1.0;
            for (const auto& a : clause)
            {
                c = std::min(c, m_inputs[a.input][a.level].Membership(inputs[a.input]));
            }
            fired = std::max(fired, c);
        }
        auto& slot = strength[static_cast<std::size_t>(rule.consequent)];
        slot = std::max(slot, fired);
    }
    return strength;
}

double
MamdaniSystem::Evaluate(std::span<const double> inputs) const
{
    const auto strength = Fire(inputs);

    double num = 0.0;
    double den = 0.0;
    const double step = 1.0 / static_cast<double>(m_samples - 1);
    for (std::size_t i = 0; i < m_samples; ++i)
    {
        const double y = static_cast<double>(i) * step;
        double mu = 0.0;
        for (std::size_t l = 0; l < 3; ++l)
        {
            mu = std::max(mu, std::min(strength[l], m_output.terms[l].Membership(y)));
        }
        num += y * mu;
        den += mu;
    }
    // No rule fired: neutral score.
    if (den == 0.0)
    {
        return 0.5;
    }
    return num / den;
}

const MamdaniSystem&
SchedulingFuzzySystem()
{
    static const MamdaniSystem system = [] {
        const LinguisticVariable in{{TriangularSet{0.0, 0.0, 0.5}, TriangularSet{0.0, 0.5, 1.0}, TriangularSet{0.5, 1.0, 1.0}}};
        const LinguisticVariable out{
            {TriangularSet{0.0, 0.0, 0.5}, TriangularSet{0.25, 0.5, 0.75}, TriangularSet{0.5, 1.0, 1.0}}};
        std::vector<FuzzyRule> rules{
            // near and backlogged, or well-charged and backlogged
            FuzzyRule{{{{kDistance, Level::Low}, {kSlots, Level::High}}, {{kEnergy, Level::High}, {kSlots, Level::High}}},
                      Level::High},
            FuzzyRule{{{{kEnergy, Level::Mid}}, {{kSlots, Level::Mid}}}, Level::Mid},
            // drained and idle, or far away
            FuzzyRule{{{{kEnergy, Level::Low}, {kSlots, Level::Low}}, {{kDistance, Level::High}}}, Level::Low},
        };
        return MamdaniSystem({in, in, in}, out, std::move(rules), 1001);
    }();
    return system;
}

double
FuzzyCore(double distance, double energy, double slots)
{
    const std::array<double, 3> x{distance, energy, slots};
    return SchedulingFuzzySystem().Evaluate(x);
}

NormalizedInputs
Normalize(const FuzzyInputs& in, const FuzzyScales& scales)
{
    if (scales.areaDiagonalM <= 0.0 || scales.initialEnergyJ <= 0.0 || scales.slotsPerFrame == 0)
    {
        throw std::invalid_argument("Normalize: scales must be positive");
    }
    if (in.distanceM < 0.0 || in.distanceM > scales.areaDiagonalM)
    {
        throw std::invalid_argument(fmt::format("Normalize: distance {} m outside the cluster area", in.distanceM));
    }
    NormalizedInputs n;
    n.distance = in.distanceM / scales.areaDiagonalM;
    n.energy = std::clamp(in.residualEnergyJ / scales.initialEnergyJ, 0.0, 1.0);
    n.slots = static_cast<double>(std::min(in.slotsRequired, scales.slotsPerFrame)) /
              static_cast<double>(scales.slotsPerFrame);
    return n;
}

double
PriorityFromCore(double core, bool emergencyBit)
{
    return emergencyBit ? 0.5 + 0.5 * core : 0.5 * core;
}

double
Priority(const FuzzyInputs& in, const FuzzyScales& scales)
{
    const NormalizedInputs n = Normalize(in, scales);
    return PriorityFromCore(FuzzyCore(n.distance, n.energy, n.slots), in.emergencyBit);
}

} // namespace priomac
