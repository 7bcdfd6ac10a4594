#include "gse/distribution.hpp"

#include "gse/errors.hpp"

namespace gse {

GseDistribution::GseDistribution(Vector mu, ScaleMatrix sigma, GeneratorFamily family,
                                 SkewFunction skew, RootConvention root)
    : mu_(location_vector(mu)),
      sigma_(std::move(sigma)),
      family_(family),
      skew_(std::move(skew)),
      conv_(root),
      root_(make_root(sigma_, root)) {
    const std::size_t n = dim();
    if (n == 0) throw ValidationError("distribution dimension must be at least 1");
    if (sigma_.dim() != n) throw ValidationError("sigma dimension does not match mu");
    if (skew_.dim() != n) throw ValidationError("gamma dimension does not match mu");
    check_family(family_, n, Level::Base);
}

GseDistribution GseDistribution::shifted(const Vector& c) const {
    return GseDistribution(mu_ + c, sigma_, family_, skew_, conv_);
}

}  // namespace gse
