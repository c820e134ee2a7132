#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace priomac
{

/// Triangle (left, peak, right); left == peak or peak == right gives a shoulder.
struct TriangularSet
{
    double left = 0.0;
    double peak = 0.0;
    double right = 0.0;

    double Membership(double x) const;
};

enum class Level : std::uint8_t
{
    Low,
    Mid,
    High,
};

/// Three-term linguistic variable on [0, 1].
struct LinguisticVariable
{
    std::array<TriangularSet, 3> terms;

    const TriangularSet& operator[](Level l) const { return terms[static_cast<std::size_t>(l)]; }
};

struct Antecedent
{
    std::size_t input = 0;
    Level level = Level::Low;
};

/// Consequent fires with max over clauses of min over each clause's antecedents.
struct FuzzyRule
{
    std::vector<std::vector<Antecedent>> clauses;
    Level consequent = Level::Low;
};

/**
 * Mamdani inference: min for AND, max for OR and aggregation, clipped output
 * sets, centroid defuzzification sampled on a uniform grid over [0, 1].
 */
class MamdaniSystem
{
  public:
    MamdaniSystem(std::vector<LinguisticVariable> inputs,
                  LinguisticVariable output,
                  std::vector<FuzzyRule> rules,
                  std::size_t samples);

    /// Inputs must lie in [0, 1]; anything else (including NaN) throws std::invalid_argument.
    double Evaluate(std::span<const double> inputs) const;

    /// Rule strengths per output level for the given inputs.
    std::array<double, 3> Fire(std::span<const double> inputs) const;

    std::size_t Samples() const { return m_samples; }

  private:
    std::vector<LinguisticVariable> m_inputs;
    LinguisticVariable m_output;
    std::vector<FuzzyRule> m_rules;
    std::size_t m_samples;
};

/// Input order of the scheduling system.
enum FuzzyInput : std::size_t
{
    kDistance = 0,
    kEnergy = 1,
    kSlots = 2,
};

/// The three-input scheduling system (distance, residual energy, slots required).
const MamdaniSystem& SchedulingFuzzySystem();

/// Crisp score in [0, 1] for normalized distance, residual energy and slots required.
double FuzzyCore(double distance, double energy, double slots);

struct FuzzyInputs
{
    double distanceM = 0.0;
    double residualEnergyJ = 0.0;
    std::uint32_t slotsRequired = 0; // queued packets
    bool emergencyBit = false;
};

/// Scales that map FuzzyInputs onto [0, 1].
struct FuzzyScales
{
    double areaDiagonalM = 70.71067811865476;
    double initialEnergyJ = 27000.0;
    std::uint32_t slotsPerFrame = 20;
};

struct NormalizedInputs
{
    double distance = 0.0;
    double energy = 0.0;
    double slots = 0.0;
};

NormalizedInputs Normalize(const FuzzyInputs& in, const FuzzyScales& scales);

/**
 * Node priority. The emergency bit splits the range: flagged nodes score in
 * [0.5, 1], others in [0, 0.5].
 */
double Priority(const FuzzyInputs& in, const FuzzyScales& scales);
double PriorityFromCore(double core, bool emergencyBit);

} // namespace priomac
