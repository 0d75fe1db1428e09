#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracles/normal_order.hpp"
#include "stochlim/correlator.hpp"
#include "stochlim/errors.hpp"

using namespace stochlim;
using cd = std::complex<double>;

namespace {

const Dispersion kOmega = Dispersion::constant(1.0);

std::vector<MomentumCell> two_cells() { return {{{1.0, 0.2, 0.0}, 1.0}, {{-0.3, 0.9, 0.4}, 0.5}}; }

// all words of the given length over two labels, random times
std::vector<OperatorWord> all_words(std::size_t n, std::mt19937_64& rng, bool balanced_only) {
    std::uniform_real_distribution<double> ut(-1.0, 1.0);
    std::vector<OperatorWord> out;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (balanced_only && std::popcount(mask) * 2 != static_cast<int>(n)) continue;
        for (unsigned labels = 0; labels < (1u << n); ++labels) {
            OperatorWord w;
            w.momentum_table = two_cells();
            w.particle_momentum = {0.2, -0.1, 0.3};
            for (std::size_t j = 0; j < n; ++j)
                w.symbols.push_back({(mask >> j) & 1u ? Eps::creator : Eps::annihilator, ut(rng), (labels >> j) & 1u});
            out.push_back(std::move(w));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("single contraction is λ^-2 q(t - t', D)/vol") {
    OperatorWord w;
    w.momentum_table = {{{0.4, -0.2, 1.1}, 0.25}};
    w.particle_momentum = {0.3, 0.3, -0.5};
    w.symbols = {{Eps::annihilator, 0.7, 0}, {Eps::creator, -0.2, 0}};
    const Vec3 k = w.momentum_table[0].k;
    const double D = 1.0 - dot(k, w.particle_momentum) + 0.5 * dot(k, k);
    for (double l : {1.0, 0.5, 0.2}) {
        const cd ref = std::exp(cd(0.0, -0.9 * D / (l * l))) / (l * l * 0.25);
        const CorrelatorValue v = vacuum_correlator_finite_lambda(w, kOmega, l);
        CHECK(v.balanced);
        CHECK(std::abs(v.value - ref) <= 1e-13 * std::abs(ref));
    }
    // creator first annihilates the vacuum
    std::swap(w.symbols[0], w.symbols[1]);
    CHECK(vacuum_correlator_finite_lambda(w, kOmega, 0.5).value == cd(0.0, 0.0));
}

TEST_CASE("evaluators agree with brute-force normal ordering") {
    std::mt19937_64 rng(5);
    for (std::size_t n : {2u, 4u}) {
        for (const OperatorWord& w : all_words(n, rng, true)) {
            for (double l : {1.0, 0.6, 0.35}) {
                const cd ref = oracle::normal_ordered_vacuum(w, kOmega, l);
                const cd a = vacuum_correlator_finite_lambda(w, kOmega, l).value;
                const cd b = recurrence_formula_correlator(w, kOmega, l).value;
                const double scale = std::max(1.0, std::abs(ref));
                CHECK(std::abs(a - ref) <= 1e-12 * scale);
                CHECK(std::abs(b - ref) <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("length-six words agree with brute force") {
    std::mt19937_64 rng(17);
    const auto words = all_words(6, rng, true);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int i = 0; i < 40; ++i) {
        const OperatorWord& w = words[pick(rng)];
        const cd ref = oracle::normal_ordered_vacuum(w, kOmega, 0.7);
        const cd a = vacuum_correlator_finite_lambda(w, kOmega, 0.7).value;
        CHECK(std::abs(a - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("unbalanced words give the structured zero") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {1u, 3u}) {
        for (const OperatorWord& w : all_words(n, rng, false)) {
            CHECK_FALSE(w.balanced());
            const CorrelatorValue v = vacuum_correlator_finite_lambda(w, kOmega, 0.5);
            CHECK_FALSE(v.balanced);
            CHECK(v.value == cd(0.0, 0.0));
            CHECK(recurrence_formula_correlator(w, kOmega, 0.5).value == cd(0.0, 0.0));
        }
    }
}

TEST_CASE("pairing terms and frequency expansion describe the same sum") {
    std::mt19937_64 rng(11);
    for (const OperatorWord& w : all_words(4, rng, true)) {
        const double l = 0.6;
        const auto terms = pairing_terms(w, kOmega, l);
        const auto freq = pairing_expansion(w, kOmega);
        REQUIRE(terms.size() == freq.size());
        cd sum{};
        for (std::size_t i = 0; i < terms.size(); ++i) {
            CHECK(terms[i].pairing == freq[i].pairing);
            CHECK(std::abs(terms[i].phase) == doctest::Approx(1.0).epsilon(1e-14));
            double arg = 0.0;
            for (std::size_t m = 0; m < w.symbols.size(); ++m) arg -= freq[i].frequencies[m] * w.symbols[m].time;
            CHECK(std::abs(terms[i].phase - std::polar(1.0, arg / (l * l))) < 1e-12);
            CHECK(terms[i].weight == doctest::Approx(freq[i].inverse_volume / std::pow(l, 4)));
            sum += terms[i].weight * terms[i].phase;
        }
        const cd v = vacuum_correlator_finite_lambda(w, kOmega, l).value;
        CHECK(std::abs(sum - v) <= 1e-12 * std::max(1.0, std::abs(v)));
    }
}

TEST_CASE("particle functions shift by signed momenta") {
    const ParticleFunction f = [](const Vec3& p) { return cd(p[0], p[1] + 2.0 * p[2]); };
    const std::vector<SignedMomentum> pre{{Eps::annihilator, {1.0, 0.0, 0.0}}, {Eps::creator, {0.0, 0.5, 0.25}}};
    const cd v = shift_particle_function(pre, f, {2.0, 1.0, 1.0});
    // p - k1 + k2 = (1, 1.5, 1.25)
    CHECK(v == cd(1.0, 4.0));
    const std::vector<Vec3> ann{{1.0, 1.0, 0.0}};
    CHECK(shift_particle_function(ann, f, {2.0, 1.0, 1.0}) == cd(1.0, 2.0));
}

TEST_CASE("off-shell smeared correlator vanishes") {
    OperatorWord w;
    w.momentum_table = {{{1.0, 0.2, 0.0}, 1.0}};
    w.particle_momentum = {0.2, -0.1, 0.3};
    w.symbols = {{Eps::annihilator, 0.0, 0}, {Eps::creator, 0.0, 0}};
    const std::vector<TestFunction> phis{TestFunction::gaussian(0.0, 1.0), TestFunction::gaussian(0.5, 1.0)};
    const ConvergenceReport r =
        master_correlator_smeared(w, phis, TestFunction::gaussian(0.5, 1.0), kOmega, geometric_lambdas(0.5, 0.5, 5));
    CHECK(r.limit_target == cd(0.0, 0.0));
    for (std::size_t i = 1; i < r.log_abs_values.size(); ++i) {
        CHECK(std::isfinite(r.log_abs_values[i]));
        CHECK(r.log_abs_values[i] < r.log_abs_values[i - 1]);
    }
    CHECK(r.log_abs_values.back() < -100.0);
}

TEST_CASE("on-shell smeared contraction is the smeared delta limit") {
    const Vec3 k{1.0, 0.2, 0.0};
    const double s = (1.0 + 0.5 * dot(k, k)) / dot(k, k);
    OperatorWord w;
    w.momentum_table = {{k, 2.0}};
    w.particle_momentum = s * k;
    w.symbols = {{Eps::annihilator, 0.0, 0}, {Eps::creator, 0.0, 0}};
    REQUIRE(std::abs(resonance_energy(kOmega, k, w.particle_momentum)) < 1e-14);
    const auto phi = TestFunction::gaussian(0.0, 1.0);
    const auto psi = TestFunction::gaussian(0.5, 1.0);
    const auto chi = TestFunction::gaussian(0.0, 0.8);  // even, so the sign of the shell variable is moot
    const auto lambdas = geometric_lambdas(0.5, 0.5, 4);
    const ConvergenceReport r = master_correlator_smeared(w, {phi, psi}, chi, kOmega, lambdas);
    const ConvergenceReport d = smeared_delta_limit(phi, psi, chi, lambdas);
    CHECK(std::abs(r.limit_target - 0.5 * d.limit_target) <= 1e-12 * std::abs(d.limit_target));
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        CHECK(std::abs(r.values[i] - 0.5 * d.values[i]) <= 1e-8 * std::abs(d.limit_target));
    CHECK(r.fitted_order > 1.5);
}

TEST_CASE("validation and unsupported shapes") {
    OperatorWord w;
    w.momentum_table = {{{1.0, 0.0, 0.0}, 1.0}};
    w.symbols = {{Eps::annihilator, 0.0, 1}};
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w.symbols = {{Eps::annihilator, 0.0, 0}};
    w.momentum_table[0].volume = 0.0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w.momentum_table[0].volume = 1.0;
    w.symbols.assign(kMaxWordLength + 2, {Eps::annihilator, 0.0, 0});
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    CHECK_THROWS_AS(vacuum_correlator_finite_lambda(OperatorWord{}, kOmega, 0.0), std::invalid_argument);

    w.symbols.assign(6, {Eps::annihilator, 0.0, 0});
    for (std::size_t i = 3; i < 6; ++i) w.symbols[i].eps = Eps::creator;
    const std::vector<TestFunction> six(6, TestFunction::gaussian(0.0, 1.0));
    CHECK_THROWS_AS(master_correlator_smeared(w, six, six[0], kOmega, {0.5}), UnsupportedError);
    w.symbols.resize(2);
    w.symbols[1].eps = Eps::creator;
    CHECK_THROWS_AS(master_correlator_smeared(w, {six[0]}, six[0], kOmega, {0.5}), std::invalid_argument);
}
