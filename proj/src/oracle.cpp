#include "gse/oracle.hpp"

#include "gse/errors.hpp"
#include "gse/kernels.hpp"
#include "gse/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <thread>

namespace gse {

namespace {

constexpr std::size_t kPartitions = 100;
constexpr std::size_t kChunk = 256;

// Accepted standardized draws arrive in SoA blocks of at most kChunk points.
using BlockSink = std::function<void(const double* z, std::size_t count)>;

std::size_t draw_partition(const GseDistribution& dist, const RadialSampler& radial,
                           std::size_t quota, std::uint64_t seed, const BlockSink& sink) {
    const auto& kt = kernels::active();
    const std::size_t n = dist.dim();
    const SkewFunction& skew = dist.skew();
    std::mt19937_64 rng(seed);
    boost::random::normal_distribution<double> normal;
    boost::random::uniform_01<double> unif;

    std::vector<double> x(n * kChunk), sq(kChunk), proj(kChunk), rad(kChunk), u(kChunk);
    std::vector<double> acc(n * kChunk);
    std::size_t accepted = 0, proposals = 0, filled = 0;
    while (accepted < quota) {
        for (std::size_t i = 0; i < kChunk; ++i) {
            for (std::size_t d = 0; d < n; ++d) x[d * kChunk + i] = normal(rng);
            rad[i] = radial(rng);
            u[i] = unif(rng);
        }
        kt.half_sq_norm(x.data(), n, kChunk, kChunk, 0.0, sq.data());
        for (std::size_t i = 0; i < kChunk; ++i) {
            const double s = rad[i] / std::sqrt(2.0 * sq[i]);
            for (std::size_t d = 0; d < n; ++d) x[d * kChunk + i] *= s;
        }
        kt.project(x.data(), n, kChunk, kChunk, skew.gamma().data(), 0.0, proj.data());
        skew.j_batch(0, proj.data(), kChunk);
        for (std::size_t i = 0; i < kChunk && accepted < quota; ++i) {
            ++proposals;
            if (!(u[i] < proj[i])) continue;
            for (std::size_t d = 0; d < n; ++d) acc[d * kChunk + filled] = x[d * kChunk + i];
            ++filled;
            ++accepted;
            if (filled == kChunk) {
                sink(acc.data(), filled);
                filled = 0;
            }
        }
    }
    if (filled > 0) {
        // Compact to a dense SoA block of `filled` points.
        std::vector<double> tail(n * filled);
        for (std::size_t d = 0; d < n; ++d)
            std::copy_n(acc.data() + d * kChunk, filled, tail.data() + d * filled);
        sink(tail.data(), filled);
    }
    return proposals;
}

std::vector<std::size_t> quotas(std::size_t m) {
    const std::size_t parts = std::min(kPartitions, m);
    std::vector<std::size_t> q(parts, m / parts);
    for (std::size_t p = 0; p < m % parts; ++p) ++q[p];
    return q;
}

template <class Fn>
void run_parallel(std::size_t tasks, Fn fn) {
    const unsigned threads = std::max(1u, std::min<unsigned>(worker_threads(), static_cast<unsigned>(tasks)));
    if (threads == 1) {
        for (std::size_t t = 0; t < tasks; ++t) fn(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t t = next++; t < tasks; t = next++) fn(t);
        });
    for (auto& th : pool) th.join();
}

struct Sums {
    std::size_t draws = 0;
    double s0 = 0.0;
    std::vector<double> s1z, s2z, s1y, s2y;

    explicit Sums(std::size_t n) : s1z(n, 0.0), s2z(n * n, 0.0), s1y(n, 0.0), s2y(n * n, 0.0) {}

    void add(const Sums& o, double sign) {
        draws = sign > 0 ? draws + o.draws : draws - o.draws;
        s0 += sign * o.s0;
        for (std::size_t i = 0; i < s1z.size(); ++i) {
            s1z[i] += sign * o.s1z[i];
            s1y[i] += sign * o.s1y[i];
        }
        for (std::size_t i = 0; i < s2z.size(); ++i) {
            s2z[i] += sign * o.s2z[i];
            s2y[i] += sign * o.s2y[i];
        }
    }
};

// prob, delta, omega, mean, second, cov flattened in that order.
std::vector<double> estimates(const Sums& s, std::size_t n) {
    std::vector<double> out;
    const double m = static_cast<double>(s.draws);
    out.push_back(s.s0 / m);
    for (std::size_t i = 0; i < n; ++i) out.push_back(s.s1z[i] / m);
    auto sym = [n](const std::vector<double>& v, std::size_t i, std::size_t j) {
        return i <= j ? v[i * n + j] : v[j * n + i];
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.push_back(sym(s.s2z, i, j) / m);
    std::vector<double> mean(n);
    for (std::size_t i = 0; i < n; ++i) {
        mean[i] = s.s1y[i] / s.s0;
        out.push_back(mean[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.push_back(sym(s.s2y, i, j) / s.s0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.push_back(sym(s.s2y, i, j) / s.s0 - mean[i] * mean[j]);
    return out;
}

void unpack(const std::vector<double>& v, std::size_t n, double& prob, Vector& delta, Matrix& omega,
            Vector& mean, Matrix& second, Matrix& cov) {
    const auto nn = static_cast<Eigen::Index>(n);
    std::size_t p = 0;
    prob = v[p++];
    delta.resize(nn);
    for (Eigen::Index i = 0; i < nn; ++i) delta(i) = v[p++];
    auto mat = [&](Matrix& m) {
        m.resize(nn, nn);
        for (Eigen::Index i = 0; i < nn; ++i)
            for (Eigen::Index j = 0; j < nn; ++j) m(i, j) = v[p++];
    };
    mat(omega);
    mean.resize(nn);
    for (Eigen::Index i = 0; i < nn; ++i) mean(i) = v[p++];
    mat(second);
    mat(cov);
}

}  // namespace

unsigned worker_threads() {
    if (const char* env = std::getenv("GSE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

SampleBatch sample_gse(const GseDistribution& dist, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw ValidationError("sample count must be at least 1");
    const std::size_t n = dist.dim();
    const RadialSampler radial(dist.family(), n);
    const auto q = quotas(m);
    std::vector<std::size_t> offset(q.size(), 0);
    for (std::size_t p = 1; p < q.size(); ++p) offset[p] = offset[p - 1] + q[p - 1];
    SampleBatch batch;
    batch.seed = seed;
    batch.draws.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    std::vector<std::size_t> proposals(q.size(), 0);
    const Matrix& R = dist.root();
    const Vector& mu = dist.mu();
    run_parallel(q.size(), [&](std::size_t p) {
        std::size_t row = offset[p];
        proposals[p] = draw_partition(dist, radial, q[p], derive_seed(seed, p), [&](const double* z, std::size_t count) {
            for (std::size_t i = 0; i < count; ++i, ++row) {
                Vector zi(static_cast<Eigen::Index>(n));
                for (std::size_t d = 0; d < n; ++d) zi(static_cast<Eigen::Index>(d)) = z[d * count + i];
                batch.draws.row(static_cast<Eigen::Index>(row)) = (mu + R * zi).transpose();
            }
        });
    });
    for (std::size_t p : proposals) batch.proposals += p;
    batch.accepted_fraction = static_cast<double>(m) / static_cast<double>(batch.proposals);
    return batch;
}

std::vector<OracleEstimate> oracle_run(const GseDistribution& dist, std::span<const OracleEvent> events,
                                       std::size_t m, std::uint64_t seed) {
    if (m < 2) throw ValidationError("oracle needs at least 2 draws");
    const std::size_t n = dist.dim();
    for (const auto& e : events)
        if (e.rect.dim() != n) throw ValidationError("oracle event dimension does not match distribution");
    const RadialSampler radial(dist.family(), n);
    const auto q = quotas(m);
    const std::size_t parts = q.size();
    const std::size_t ne = events.size();
    std::vector<std::vector<Sums>> sums(parts, std::vector<Sums>(ne, Sums(n)));
    std::vector<std::size_t> proposals(parts, 0);
    const Matrix& R = dist.root();
    const Vector& mu = dist.mu();
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) rows[r][c] = R(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));

    run_parallel(parts, [&](std::size_t p) {
        const auto& kt = kernels::active();
        std::vector<double> y(n * kChunk), ind(kChunk);
        auto& local = sums[p];
        for (auto& s : local) s.draws = q[p];
        proposals[p] = draw_partition(dist, radial, q[p], derive_seed(seed, p), [&](const double* z, std::size_t count) {
            for (std::size_t r = 0; r < n; ++r) {
                kt.project(z, n, count, count, rows[r].data(), mu(static_cast<Eigen::Index>(r)), y.data() + r * count);
            }
            for (std::size_t e = 0; e < ne; ++e) {
                const auto& ev = events[e];
                const double* pts = ev.space == EventSpace::Standardized ? z : y.data();
                kt.box_indicator(pts, n, count, count, ev.rect.lower().data(), ev.rect.upper().data(), ind.data());
                double s0 = 0.0;
                kt.accumulate_moments(z, n, count, count, ind.data(), &s0, local[e].s1z.data(), local[e].s2z.data());
                local[e].s0 += s0;
                double dummy = 0.0;
                kt.accumulate_moments(y.data(), n, count, count, ind.data(), &dummy, local[e].s1y.data(),
                                      local[e].s2y.data());
            }
        });
    });

    std::size_t total_prop = 0;
    for (std::size_t p : proposals) total_prop += p;
    std::vector<OracleEstimate> out;
    for (std::size_t e = 0; e < ne; ++e) {
        Sums total(n);
        for (std::size_t p = 0; p < parts; ++p) total.add(sums[p][e], 1.0);
        if (total.s0 < 1.0) throw InsufficientMass("no accepted draws fall in the event");
        const auto full = estimates(total, n);
        std::vector<std::vector<double>> loo;
        for (std::size_t p = 0; p < parts && parts > 1; ++p) {
            Sums s = total;
            s.add(sums[p][e], -1.0);
            if (s.s0 < 1.0) throw InsufficientMass("event hits concentrate in a single block");
            loo.push_back(estimates(s, n));
        }
        std::vector<double> se(full.size(), 0.0);
        if (!loo.empty()) {
            const double b = static_cast<double>(loo.size());
            for (std::size_t k = 0; k < full.size(); ++k) {
                double mean = 0.0;
                for (const auto& v : loo) mean += v[k];
                mean /= b;
                double ss = 0.0;
                for (const auto& v : loo) ss += (v[k] - mean) * (v[k] - mean);
                se[k] = std::sqrt((b - 1.0) / b * ss);
            }
        }
        OracleEstimate est;
        est.draws = m;
        est.hits = static_cast<std::size_t>(std::llround(total.s0));
        est.accepted_fraction = static_cast<double>(m) / static_cast<double>(total_prop);
        unpack(full, n, est.prob, est.delta, est.omega, est.mean, est.second, est.cov);
        unpack(se, n, est.prob_se, est.delta_se, est.omega_se, est.mean_se, est.second_se, est.cov_se);
        out.push_back(std::move(est));
    }
    return out;
}

OracleEstimate oracle_truncated_report(const GseDistribution& dist, const Rectangle& rect_std,
                                       std::size_t m, std::uint64_t seed) {
    const OracleEvent ev{EventSpace::Standardized, rect_std};
    return oracle_run(dist, std::span<const OracleEvent>(&ev, 1), m, seed).front();
}

}  // namespace gse
