#pragma once

#include "gse/generators.hpp"
#include "gse/linalg.hpp"
#include "gse/skewing.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gse {

// lower < upper componentwise; entries may be infinite.
class Rectangle {
public:
    Rectangle(Vector lower, Vector upper);

    static Rectangle whole(std::size_t n);

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }

    // The rectangle on the remaining axes after removing the listed ones.
    Rectangle drop(std::span<const std::size_t> axes) const;

private:
    Vector lower_;
    Vector upper_;
};

enum class QuadMethod { Auto, Tensor, LowDiscrepancy };

const char* to_string(QuadMethod m);
QuadMethod quad_method_from_string(const std::string& s);

struct IntegrationPlan {
    QuadMethod method = QuadMethod::Auto;
    double rel_tol = 1e-5;
    double abs_tol = 1e-13;
    std::size_t node_budget = std::size_t{1} << 24;
    std::uint64_t seed = 0;
};

void validate_plan(const IntegrationPlan& plan);

struct IntegralEstimate {
    std::vector<double> values;
    double error = 0.0;
    std::size_t nodes = 0;
    QuadMethod method = QuadMethod::Tensor;
};

// A block of integration nodes, coordinate d of node i at coords[d * stride + i].
struct NodeBlock {
    std::size_t dim = 0;
    std::size_t count = 0;
    std::size_t stride = 0;
    const double* coords = nullptr;
};

// Fills out[o * block.count + i] with output o at node i.
using BatchIntegrand = std::function<void(const NodeBlock& block, double* out)>;

// Per-axis law whose restricted cdf places the nodes. Its tails should be no lighter
// than the integrand's.
enum class AxisShape { StudentT2, Cauchy, Normal, Logistic };

struct AxisLaw {
    AxisShape shape = AxisShape::StudentT2;
    double scale = 1.0;
};

struct NodePlacement {
    AxisLaw tensor;
    AxisLaw low_discrepancy;
    // Tensor rule splits straddling axes at 0, where the generator may have a cusp.
    bool split_at_origin = false;
};

// Node placement matched to a generator at a given level.
NodePlacement node_placement(const GeneratorFamily& fam, Level level);

// ∫_rect h(x) dx for a vector-valued h. Dimension 0 evaluates h once.
IntegralEstimate integrate(const Rectangle& rect, std::size_t outputs, const BatchIntegrand& h,
                           const IntegrationPlan& plan, const NodePlacement& place = NodePlacement{});

// Elliptical law on R^{n-s} with density c · G(½|w|² + ½Σ shifts²), G at the given level.
struct AuxLaw {
    GeneratorFamily family;
    std::size_t n = 1;
    Level level = Level::Base;
    std::vector<double> shifts;

    std::size_t dim() const { return n - shifts.size(); }
};

// Ē_W[h(W)] over rect: ∫_rect h(w) f_W(w) dw with f_W the normalized AuxLaw density.
IntegralEstimate trunc_expect(const AuxLaw& law, std::size_t outputs, const BatchIntegrand& h,
                              const Rectangle& rect, const IntegrationPlan& plan);

// ∫_rect 2 c G(½|z|²) H(z) dz for the standardized GSE law; Base level gives F_Z,
// Cumulative gives F_{Z*}.
IntegralEstimate rect_prob_gse(const GeneratorFamily& fam, const SkewFunction& skew,
                               const Rectangle& rect, const IntegrationPlan& plan,
                               Level level = Level::Base);

// Elliptical rectangle probability ∫_rect c G(½|z|²) dz.
IntegralEstimate rect_prob_elliptical(const GeneratorFamily& fam, std::size_t n,
                                      const Rectangle& rect, const IntegrationPlan& plan,
                                      Level level = Level::Base);

struct Pin {
    std::size_t index;
    double value;
};

// n-vector with pins placed and the base point filling the other slots in order.
Vector coordinate_insert(const Vector& base, std::span<const Pin> pins, std::size_t n);

// Indices in [0, n) not pinned, ascending.
std::vector<std::size_t> free_indices(std::size_t n, std::span<const Pin> pins);

// Gauss–Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(std::size_t order);

}  // namespace gse
