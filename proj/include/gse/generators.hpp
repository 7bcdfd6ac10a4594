#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gse {

enum class FamilyKind { Normal, StudentT, Logistic, Laplace };

struct GeneratorFamily {
    FamilyKind kind = FamilyKind::Normal;
    double df = 0.0;  // StudentT only

    static GeneratorFamily normal() { return {FamilyKind::Normal, 0.0}; }
    static GeneratorFamily student_t(double m) { return {FamilyKind::StudentT, m}; }
    static GeneratorFamily logistic() { return {FamilyKind::Logistic, 0.0}; }
    static GeneratorFamily laplace() { return {FamilyKind::Laplace, 0.0}; }
};

// Base: g_n, Cumulative: Ḡ_n, DoubleCumulative: 𝒢̄_n.
enum class Level { Base, Cumulative, DoubleCumulative };

const char* to_string(FamilyKind kind);
FamilyKind family_from_string(const std::string& s);

// Throws unless the family is usable in dimension n at the given level.
void check_family(const GeneratorFamily& fam, std::size_t n, Level level);

double g(const GeneratorFamily& fam, std::size_t n, double u);
double g_bar(const GeneratorFamily& fam, std::size_t n, double t);
double g_dbar(const GeneratorFamily& fam, std::size_t n, double t);
double generator(const GeneratorFamily& fam, std::size_t n, Level level, double t);

// Vectorized generator evaluation, in place: t[i] <- G(t[i]).
void generator_batch(const GeneratorFamily& fam, std::size_t n, Level level, double* t,
                     std::size_t count);

// c_n, c_n*, c_n**: closed form where one exists.
double norm_const(const GeneratorFamily& fam, std::size_t n, Level level);

// Same constants from 1-D quadrature of the defining integral.
double norm_const_quadrature(const GeneratorFamily& fam, std::size_t n, Level level);

// ∫_{R^k} G(½|w|² + t) dw for the level's generator in dimension n.
double tail_mass(const GeneratorFamily& fam, std::size_t n, Level level, std::size_t k, double t);

// Quadrature-only route to tail_mass.
double tail_mass_quadrature(const GeneratorFamily& fam, std::size_t n, Level level, std::size_t k,
                            double t);

// c_n / c_{n-s, shifts} where s = shifts.size(): the factor multiplying a pinned
// expectation. Any infinite shift gives 0.
double shifted_ratio(const GeneratorFamily& fam, std::size_t n, Level level,
                     std::span<const double> shifts);

// The shifted constant itself, 1 / tail_mass.
double shifted_const(const GeneratorFamily& fam, std::size_t n, Level level,
                     std::span<const double> shifts);

// Ψ*_μ(z, s, a) = 1/Γ(s) ∫_0^∞ t^{s-1} e^{-at} / (1 - z e^{-t})^μ dt
double hurwitz_lerch_psi(int mu, double z, double s, double a);

// Radius R of a spherical law in dimension n: density ∝ r^{n-1} g_n(r²/2).
class RadialSampler {
public:
    RadialSampler(const GeneratorFamily& fam, std::size_t n);

    double operator()(std::mt19937_64& rng) const;

    // CDF of R, used by tests.
    double cdf(double r) const;

private:
    GeneratorFamily fam_;
    std::size_t n_;
    std::shared_ptr<const std::vector<double>> r_nodes_;
    std::shared_ptr<const std::vector<double>> p_nodes_;
    std::shared_ptr<const std::vector<double>> slopes_;
};

}  // namespace gse
