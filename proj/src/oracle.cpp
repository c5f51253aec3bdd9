#include "gmq/oracle.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "gmq/error.hpp"
#include "gmq/special.hpp"

namespace gmq {
namespace {

constexpr std::size_t kBlockSize = 8192;
constexpr double kTruncation = 12.0;
constexpr double kQuadratureTol = 1e-11;

void require_samples(std::size_t samples) {
  if (samples < kMinMcSamples) {
    throw Error(ErrorKind::InvalidArgument, "Monte-Carlo estimates need at least 1000 samples");
  }
}

// Runs body(rng, count, sums) for every block of samples with a per-block
// derived seed, then reduces the per-block sums in block order. Results do not
// depend on the number of worker threads.
std::vector<double> run_blocks(std::size_t samples, std::uint64_t seed, std::size_t width,
                               const std::function<void(Rng&, std::size_t, std::vector<double>&)>& body) {
  const std::size_t blocks = (samples + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(width, 0.0));
  std::vector<std::exception_ptr> failures(blocks);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < blocks; b += stride) {
      try {
        Rng rng(derive_seed(seed, b));
        const std::size_t count = std::min(kBlockSize, samples - b * kBlockSize);
        body(rng, count, partial[b]);
      } catch (...) {
        failures[b] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), blocks);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  std::vector<double> total(width, 0.0);
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < width; ++k) total[k] += p[k];
  }
  return total;
}

McEstimate cost_estimate(double sum, double sum_sq, std::size_t samples, std::uint64_t seed) {
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / (n - 1.0);
  const double se_sq = std::sqrt(var / n);
  McEstimate e;
  e.samples = samples;
  e.seed = seed;
  e.value = std::sqrt(std::max(mean, 0.0));
  e.std_error = e.value > 0.0 ? se_sq / (2.0 * e.value) : std::sqrt(se_sq);
  return e;
}

McEstimate binomial_estimate(double hits, std::size_t samples, std::uint64_t seed) {
  const double n = static_cast<double>(samples);
  const double p = hits / n;
  return McEstimate{p, std::sqrt(p * (1.0 - p) / n), samples, seed};
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double truncated_integral(const std::function<double(double)>& f, double a, double b) {
  if (std::isnan(a) || std::isnan(b) || a > b) throw Error(ErrorKind::InvalidInterval, "invalid interval");
  a = std::clamp(a, -kTruncation, kTruncation);
  b = std::clamp(b, -kTruncation, kTruncation);
  if (a >= b) return 0.0;
  // Unit-width panels so no feature of the integrand is skipped.
  const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * width;
    const double hi = k + 1 == panels ? b : lo + width;
    total += adaptive_simpson(f, lo, hi, kQuadratureTol / panels);
  }
  return total;
}

double gaussian_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double Rng::uniform() {
  // 53 high bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double quadrature_cell_cost(double a, double b, double c) {
  return truncated_integral([c](double x) { return (x - c) * (x - c) * gaussian_pdf(x); }, a, b);
}

double quadrature_cell_prob(double a, double b) {
  return truncated_integral(gaussian_pdf, a, b);
}

MixtureSampler::MixtureSampler(const GaussianMixture& mix) : dim_(mix.dim()) {
  double running = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    running += mix.weight(i);
    cumulative_.push_back(running);
    means_.push_back(mix.component(i).mean());
    factors_.push_back(mix.component(i).spectrum().sqrt_factor());
  }
  cumulative_.back() = std::numeric_limits<double>::infinity();
}

std::size_t MixtureSampler::draw(Rng& rng, Vector& out) const {
  std::size_t i = 0;
  if (cumulative_.size() > 1) {
    const double u = rng.uniform();
    i = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                 cumulative_.begin());
    i = std::min(i, cumulative_.size() - 1);
  }
  const Matrix& f = factors_[i];
  Vector z(f.cols());
  for (Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  out = means_[i];
  if (f.cols() > 0) out.noalias() += f * z;
  return i;
}

McEstimate mc_coupling_cost(const GaussianMixture& mix, const Matrix& locations,
                            std::size_t samples, std::uint64_t seed) {
  require_samples(samples);
  if (locations.cols() != mix.dim() || locations.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "locations do not match the mixture dimension");
  }
  const MixtureSampler sampler(mix);
  const auto sums = run_blocks(samples, seed, 2, [&](Rng& rng, std::size_t count, std::vector<double>& acc) {
    Vector x(sampler.dim());
    for (std::size_t s = 0; s < count; ++s) {
      sampler.draw(rng, x);
      const double best = (locations.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff();
      acc[0] += best;
      acc[1] += best * best;
    }
  });
  return cost_estimate(sums[0], sums[1], samples, seed);
}

McEstimate mc_transport_cost(const GaussianMixture& mix,
                             const std::function<Vector(const Vector&, std::size_t)>& transport,
                             std::size_t samples, std::uint64_t seed) {
  require_samples(samples);
  const MixtureSampler sampler(mix);
  const auto sums = run_blocks(samples, seed, 2, [&](Rng& rng, std::size_t count, std::vector<double>& acc) {
    Vector x(sampler.dim());
    for (std::size_t s = 0; s < count; ++s) {
      const std::size_t i = sampler.draw(rng, x);
      const double cost = (x - transport(x, i)).squaredNorm();
      acc[0] += cost;
      acc[1] += cost * cost;
    }
  });
  return cost_estimate(sums[0], sums[1], samples, seed);
}

McEstimate mc_region_prob(const GaussianComponent& component,
                          const std::function<bool(const Vector&)>& inside, std::size_t samples,
                          std::uint64_t seed) {
  require_samples(samples);
  const MixtureSampler sampler{GaussianMixture(component)};
  const auto sums = run_blocks(samples, seed, 1, [&](Rng& rng, std::size_t count, std::vector<double>& acc) {
    Vector x(sampler.dim());
    for (std::size_t s = 0; s < count; ++s) {
      sampler.draw(rng, x);
      if (inside(x)) acc[0] += 1.0;
    }
  });
  return binomial_estimate(sums[0], samples, seed);
}

std::vector<McEstimate> mc_partition_probs(const GaussianComponent& component,
                                           const std::function<std::size_t(const Vector&)>& classify,
                                           std::size_t regions, std::size_t samples,
                                           std::uint64_t seed) {
  require_samples(samples);
  const MixtureSampler sampler{GaussianMixture(component)};
  const auto counts = run_blocks(samples, seed, regions, [&](Rng& rng, std::size_t count, std::vector<double>& acc) {
    Vector x(sampler.dim());
    for (std::size_t s = 0; s < count; ++s) {
      sampler.draw(rng, x);
      const std::size_t k = classify(x);
      if (k >= regions) throw Error(ErrorKind::IndexOutOfRange, "region index out of range");
      acc[k] += 1.0;
    }
  });
  std::vector<McEstimate> out;
  out.reserve(regions);
  for (double c : counts) out.push_back(binomial_estimate(c, samples, seed));
  return out;
}

}  // namespace gmq
