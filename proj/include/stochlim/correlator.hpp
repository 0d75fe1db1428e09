// correlator.hpp: finite-λ vacuum correlators of the rescaled fields
// a_λ(t, k), a†_λ(t, k) on a discrete momentum table.
//
// Rewrite rules, with q(t, x) = q_λ(t, x) and D(k, p) = ω(|k|) - k·p + k²/2:
//   a(t,k) a†(t',k') = a†(t',k') a(t,k) q(t - t', k·k') + λ^{-2} q(t - t', D(k, p)) δ_{kk'}/vol
//   a(t,k) a(t',k')  = a(t',k') a(t,k) q^{-1}(t - t', k·k')
//   a(t,k) f(p) = f(p - k) a(t,k),   a†(t,k) f(p) = f(p + k) a†(t,k)
// The conditioning particle momentum p̄ is applied at the left end of the word.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stochlim/model.hpp"
#include "stochlim/qlimit.hpp"
#include "stochlim/vec3.hpp"

namespace stochlim {

enum class Eps { annihilator, creator };

struct OperatorSymbol {
    Eps eps{Eps::annihilator};
    double time{0.0};
    std::size_t label{0};  // index into the word's momentum table

    friend bool operator==(const OperatorSymbol&, const OperatorSymbol&) = default;
};

struct MomentumCell {
    Vec3 k{};
    double volume{1.0};

    friend bool operator==(const MomentumCell&, const MomentumCell&) = default;
};

inline constexpr std::size_t kMaxWordLength = 8;

struct OperatorWord {
    std::vector<OperatorSymbol> symbols;
    std::vector<MomentumCell> momentum_table;
    Vec3 particle_momentum{};

    // throws std::invalid_argument on bad labels, volumes or length
    void validate() const;
    bool balanced() const noexcept;  // equal creator and annihilator counts

    friend bool operator==(const OperatorWord&, const OperatorWord&) = default;
};

using ParticleFunction = std::function<std::complex<double>(const Vec3&)>;

// f(p - Σk) for annihilator momenta passed through
std::complex<double> shift_particle_function(std::span<const Vec3> prefix, const ParticleFunction& f, const Vec3& p);

struct SignedMomentum {
    Eps eps{Eps::annihilator};
    Vec3 k{};
};

// f(p - Σ±k): annihilators subtract their momentum, creators add it
std::complex<double> shift_particle_function(std::span<const SignedMomentum> prefix, const ParticleFunction& f,
                                             const Vec3& p);

using Pairing = std::vector<std::pair<std::size_t, std::size_t>>;  // (annihilator, creator) word positions

struct PairingTerm {
    Pairing pairing;
    std::complex<double> phase;  // product of q_λ factors, unimodular
    double weight{0.0};          // λ^{-2n} / Π cell volumes
};

// λ-independent form of a pairing term: phase = exp(-i Σ_m ν_m t_m / λ²).
struct FrequencyTerm {
    Pairing pairing;
    std::vector<double> frequencies;   // ν_m, one per word position
    std::vector<double> shell_values;  // D at the annihilator's place in the word, one per pair
    double inverse_volume{1.0};        // Π 1/vol over the pairs
};

struct CorrelatorValue {
    std::complex<double> value;
    bool balanced{true};  // false: unbalanced word, value is the structured zero
};

// Leftmost annihilator swept right through the word; contraction functions are
// moved to the left end where p = p̄.
std::vector<PairingTerm> pairing_terms(const OperatorWord& word, const Dispersion& omega, double lambda);
std::vector<FrequencyTerm> pairing_expansion(const OperatorWord& word, const Dispersion& omega);
CorrelatorValue vacuum_correlator_finite_lambda(const OperatorWord& word, const Dispersion& omega, double lambda);

// The recurrence with each contraction function carried to the right end of
// the word: exchange phases for the symbols behind the contracted creator are
// taken at the creator's time.
CorrelatorValue recurrence_formula_correlator(const OperatorWord& word, const Dispersion& omega, double lambda);

// Time-smeared correlator ∫Π dt_m φ_m(t_m) <word> for words of length 2 or 4.
// Contractions whose shell value vanishes are smeared over the shell variable
// with χ. The target keeps the terms whose phases cancel on the contracted
// diagonal, each pair contributing 2π χ(-ν) ∫φ_a φ_c / vol.
ConvergenceReport master_correlator_smeared(const OperatorWord& word, const std::vector<TestFunction>& time_smearings,
                                            const TestFunction& chi, const Dispersion& omega,
                                            const std::vector<double>& lambdas);

}  // namespace stochlim
