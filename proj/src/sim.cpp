#include "lln/sim.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "lln/errors.hpp"

namespace lln {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double draw_one(const Rademacher&, ReplicaStream& s) {
  return s.next_uniform() < 0.5 ? -1.0 : 1.0;
}

double draw_one(const UniformSym& u, ReplicaStream& s) {
  return u.half_width * (2.0 * s.next_uniform() - 1.0);
}

double draw_one(const WeibullSym& w, ReplicaStream& s) {
  const double sign = s.next_uniform() < 0.5 ? -1.0 : 1.0;
  return sign * sample_weibull_magnitude(w.q, s.next_uniform());
}

double draw_one(const IidDiscrete& d, ReplicaStream& s) {
  return d.dist.sample(s.next_uniform());
}

double draw_base(const BaseGenerator& g, ReplicaStream& s) {
  return std::visit([&](const auto& b) { return draw_one(b, s); }, g);
}

// Walks one path, calling step(k, S(k)) for k = 1..n.
template <class Step>
void walk(const MartingaleSpec& spec, ReplicaStream& s, Step&& step) {
  double sum = 0.0;
  const long n = spec.n;
  std::visit(
      Overloaded{
          [&](const ProductAdversarial& p) {
            const double sign = s.next_uniform() < 0.5 ? -1.0 : 1.0;
            const double eta = sign * sample_weibull_magnitude(p.q, s.next_uniform());
            for (long k = 1; k <= n; ++k) {
              sum += eta * p.zeta.sample(s.next_uniform());
              step(k, sum);
            }
          },
          [&](const ConditionalSubPhi& c) {
            for (long k = 1; k <= n; ++k) {
              double eps = 1.0;
              if (c.rule == SignRule::FollowSign) {
                eps = sum < 0.0 ? -1.0 : 1.0;
              } else if (c.rule == SignRule::OpposeSign) {
                eps = sum < 0.0 ? 1.0 : -1.0;
              }
              sum += eps * draw_base(c.base, s);
              step(k, sum);
            }
          },
          [&](const auto& base) {
            for (long k = 1; k <= n; ++k) {
              sum += draw_one(base, s);
              step(k, sum);
            }
          }},
      spec.generator);
}

void require_centred(const DiscreteDist& d, const char* what) {
  if (std::abs(d.mean()) > 1e-12 * std::max(1.0, d.max_abs())) {
    throw DomainError(std::string(what) + " must have mean zero");
  }
}

void validate_base(const BaseGenerator& g) {
  std::visit(Overloaded{[](const Rademacher&) {},
                        [](const UniformSym& u) {
                          if (!(u.half_width > 0.0)) {
                            throw DomainError("uniform half-width must be > 0");
                          }
                        },
                        [](const WeibullSym& w) {
                          if (!(w.q > 0.0)) {
                            throw DomainError("weibull q must be > 0");
                          }
                        },
                        [](const IidDiscrete& d) {
                          require_centred(d.dist, "discrete law");
                        }},
             g);
}

// Splits [0, replicas) into contiguous chunks and runs body(begin, end, slot)
// on up to `threads` workers.
template <class Body>
void parallel_chunks(std::uint64_t replicas, unsigned threads, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::max<std::uint64_t>(
      1, std::min<std::uint64_t>(threads == 0 ? default_threads() : threads,
                                 replicas)));
  const std::uint64_t chunk = (replicas + workers - 1) / workers;
  if (workers == 1) {
    body(0, replicas, 0u);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min(replicas, chunk * w);
    const std::uint64_t end = std::min(replicas, begin + chunk);
    pool.emplace_back([&body, begin, end, w] { body(begin, end, w); });
  }
  for (auto& t : pool) {
    t.join();
  }
}

// Probabilists' Hermite polynomial He_m and He_{m-1} at x.
std::pair<long double, long double> hermite(int m, long double x) {
  long double prev = 1.0L;
  long double cur = x;
  if (m == 0) {
    return {1.0L, 0.0L};
  }
  for (int k = 1; k < m; ++k) {
    const long double next = x * cur - static_cast<long double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<double> values, std::vector<double> probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
  if (values_.empty() || values_.size() != probs_.size()) {
    throw DomainError("discrete law needs matching, non-empty atoms");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DomainError("discrete law atoms must be finite");
    }
    if (!(probs_[i] > 0.0)) {
      throw DomainError("discrete law probabilities must be positive");
    }
    total += probs_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("discrete law probabilities must sum to 1");
  }
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

double DiscreteDist::sample(double u) const {
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return values_[static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cdf_.begin(),
                               static_cast<std::ptrdiff_t>(cdf_.size()) - 1))];
}

double DiscreteDist::moment(int k) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += probs_[i] * std::pow(values_[i], k);
  }
  return acc;
}

double DiscreteDist::max_abs() const {
  double m = 0.0;
  for (double v : values_) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

DiscreteDist gauss_hermite_distribution(int m) {
  if (m < 1) {
    throw DomainError("Gauss-Hermite law needs m >= 1");
  }
  if (m == 1) {
    return DiscreteDist({0.0}, {1.0});
  }
  // Golub-Welsch: eigenvalues of the Jacobi matrix of He_k are the nodes.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  std::vector<long double> nodes(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    long double x = solver.eigenvalues()(i);
    // Newton polish in extended precision; He_m' = m He_{m-1}.
    for (int it = 0; it < 8; ++it) {
      const auto [h, hm1] = hermite(m, x);
      x -= h / (static_cast<long double>(m) * hm1);
    }
    nodes[static_cast<std::size_t>(i)] = x;
  }
  std::sort(nodes.begin(), nodes.end());

  long double factorial = 1.0L;
  for (int k = 2; k <= m; ++k) {
    factorial *= k;
  }
  std::vector<long double> weights(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const long double hm1 = hermite(m, nodes[i]).second;
    weights[i] = factorial / (static_cast<long double>(m) * m * hm1 * hm1);
  }
  // Enforce exact symmetry.
  for (std::size_t i = 0; i < nodes.size() / 2; ++i) {
    const std::size_t j = nodes.size() - 1 - i;
    const long double x = 0.5L * (nodes[j] - nodes[i]);
    const long double w = 0.5L * (weights[i] + weights[j]);
    nodes[i] = -x;
    nodes[j] = x;
    weights[i] = weights[j] = w;
  }
  if (nodes.size() % 2 == 1) {
    nodes[nodes.size() / 2] = 0.0L;
  }
  const long double total =
      std::accumulate(weights.begin(), weights.end(), 0.0L);
  std::vector<double> values(nodes.size());
  std::vector<double> probs(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    values[i] = static_cast<double>(nodes[i]);
    probs[i] = static_cast<double>(weights[i] / total);
  }
  return DiscreteDist(std::move(values), std::move(probs));
}

int select_matching_order(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) {
    throw DomainError("moment matching order needs q > 1");
  }
  return static_cast<int>(std::ceil(q)) - 1;
}

int matching_atoms(int s) { return (s + 4) / 2; }

double sample_weibull_magnitude(double q, double u) {
  if (!(q > 0.0)) {
    throw DomainError("weibull magnitude needs q > 0");
  }
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("weibull magnitude needs u in (0, 1)");
  }
  return std::pow(-std::log(u), 1.0 / q);
}

void validate_spec(const MartingaleSpec& spec) {
  if (spec.n < 1) {
    throw DomainError("horizon n must be >= 1");
  }
  std::visit(Overloaded{[](const ProductAdversarial& p) {
                          if (!(p.q > 0.0)) {
                            throw DomainError("adversarial q must be > 0");
                          }
                          require_centred(p.zeta, "zeta law");
                          if (!(p.zeta.max_abs() > 0.0)) {
                            throw DomainError("zeta law must be non-trivial");
                          }
                        },
                        [](const ConditionalSubPhi& c) { validate_base(c.base); },
                        [](const auto& base) { validate_base(BaseGenerator(base)); }},
             spec.generator);
}

std::string describe(const Generator& g) {
  std::ostringstream out;
  out.precision(17);
  auto base_name = [&](const BaseGenerator& b) {
    std::visit(Overloaded{[&](const Rademacher&) { out << "rademacher"; },
                          [&](const UniformSym& u) {
                            out << "uniform(" << u.half_width << ")";
                          },
                          [&](const WeibullSym& w) {
                            out << "weibull_sym(" << w.q << ")";
                          },
                          [&](const IidDiscrete& d) {
                            out << "discrete(" << d.dist.values().size()
                                << " atoms)";
                          }},
               b);
  };
  std::visit(Overloaded{[&](const ProductAdversarial& p) {
                          out << "product_adversarial(q=" << p.q << ", "
                              << p.zeta.values().size() << " zeta atoms)";
                        },
                        [&](const ConditionalSubPhi& c) {
                          out << "conditional_sub_phi(";
                          base_name(c.base);
                          out << ", rule="
                              << (c.rule == SignRule::None ? "none"
                                  : c.rule == SignRule::FollowSign
                                      ? "follow_sign"
                                      : "oppose_sign")
                              << ")";
                        },
                        [&](const auto& b) { base_name(BaseGenerator(b)); }},
             g);
  return out.str();
}

std::vector<double> generate_path(const MartingaleSpec& spec,
                                  ReplicaStream& stream) {
  validate_spec(spec);
  std::vector<double> path(static_cast<std::size_t>(spec.n));
  walk(spec, stream,
       [&](long k, double s) { path[static_cast<std::size_t>(k - 1)] = s; });
  return path;
}

double simulate_sum(const MartingaleSpec& spec, ReplicaStream& stream) {
  double last = 0.0;
  walk(spec, stream, [&](long, double s) { last = s; });
  return last;
}

std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n,
                                          double confidence) {
  if (n == 0 || k > n) {
    throw DomainError("Clopper-Pearson needs 0 <= successes <= trials, trials > 0");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw DomainError("confidence must lie in (0, 1)");
  }
  const double alpha = 1.0 - confidence;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const double lo =
      k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  const double hi =
      k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return {lo, hi};
}

unsigned default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<MonteCarloEstimate> estimate_Q_grid(const MartingaleSpec& spec,
                                                std::span<const double> xs,
                                                std::uint64_t replicas,
                                                std::uint64_t master_seed,
                                                double confidence,
                                                unsigned threads) {
  validate_spec(spec);
  if (replicas < 1) {
    throw DomainError("replicas must be >= 1");
  }
  const std::uint64_t key = derive_key(master_seed, static_cast<std::uint64_t>(spec.n));
  const double nd = static_cast<double>(spec.n);
  const unsigned workers = threads == 0 ? default_threads() : threads;
  std::vector<std::vector<std::uint64_t>> counts(
      std::max(1u, workers), std::vector<std::uint64_t>(xs.size(), 0));
  parallel_chunks(replicas, workers,
                  [&](std::uint64_t begin, std::uint64_t end, unsigned slot) {
                    auto& local = counts[slot];
                    for (std::uint64_t r = begin; r < end; ++r) {
                      ReplicaStream stream(key, r);
                      const double mean = simulate_sum(spec, stream) / nd;
                      for (std::size_t i = 0; i < xs.size(); ++i) {
                        if (mean > xs[i]) {
                          ++local[i];
                        }
                      }
                    }
                  });
  std::vector<MonteCarloEstimate> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::uint64_t k = 0;
    for (const auto& c : counts) {
      k += c[i];
    }
    auto& e = out[i];
    e.successes = k;
    e.replicas = replicas;
    e.point = static_cast<double>(k) / static_cast<double>(replicas);
    std::tie(e.ci_low, e.ci_high) = clopper_pearson(k, replicas, confidence);
    e.confidence = confidence;
    e.seed = master_seed;
    e.n = spec.n;
    e.x = xs[i];
  }
  return out;
}

MonteCarloEstimate estimate_Q(const MartingaleSpec& spec, double x,
                              std::uint64_t replicas, std::uint64_t master_seed,
                              double confidence, unsigned threads) {
  const double xs[] = {x};
  return estimate_Q_grid(spec, xs, replicas, master_seed, confidence, threads)
      .front();
}

LpEstimate estimate_lp_norm(const MartingaleSpec& spec, double p,
                            std::uint64_t replicas, std::uint64_t master_seed,
                            Normalization normalization, unsigned threads) {
  validate_spec(spec);
  if (!(p >= 1.0)) {
    throw DomainError("L_p norm needs p >= 1");
  }
  if (replicas < 1) {
    throw DomainError("replicas must be >= 1");
  }
  const double nd = static_cast<double>(spec.n);
  const double scale = normalization == Normalization::SqrtN ? std::sqrt(nd) : nd;
  const std::uint64_t key = derive_key(master_seed, static_cast<std::uint64_t>(spec.n));
  std::vector<double> powered(replicas);
  parallel_chunks(replicas, threads,
                  [&](std::uint64_t begin, std::uint64_t end, unsigned) {
                    for (std::uint64_t r = begin; r < end; ++r) {
                      ReplicaStream stream(key, r);
                      powered[r] = std::pow(std::abs(simulate_sum(spec, stream) / scale), p);
                    }
                  });
  auto lp = [&](double total) {
    return std::pow(total / static_cast<double>(replicas), 1.0 / p);
  };
  // Pairwise-stable summation order: fixed left-to-right over replicas.
  const double total = std::accumulate(powered.begin(), powered.end(), 0.0);

  constexpr int kResamples = 200;
  const std::uint64_t boot_key = derive_key(master_seed, 0xB007'5742'0000'0000ull);
  std::vector<double> boot(kResamples);
  for (int b = 0; b < kResamples; ++b) {
    ReplicaStream stream(boot_key, static_cast<std::uint64_t>(b));
    double acc = 0.0;
    for (std::uint64_t i = 0; i < replicas; ++i) {
      acc += powered[stream.next_u64() % replicas];
    }
    boot[static_cast<std::size_t>(b)] = lp(acc);
  }
  const double mean = std::accumulate(boot.begin(), boot.end(), 0.0) / kResamples;
  double ss = 0.0;
  for (double v : boot) {
    ss += (v - mean) * (v - mean);
  }
  return {lp(total), std::sqrt(ss / (kResamples - 1)), replicas};
}

}  // namespace lln
