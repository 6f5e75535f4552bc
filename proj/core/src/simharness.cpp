#include "bilatrr/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "bilatrr/errors.hpp"
#include "bilatrr/estimation.hpp"
#include "bilatrr/model.hpp"

namespace bilatrr {

namespace {

enum class Outcome : std::uint8_t { Failed, Covered, Above, Below };

struct RepRecord {
  std::array<Outcome, 5> outcome{};
  std::array<double, 5> width{};
};

constexpr std::size_t slot(CiMethod m) {
  switch (m) {
    case CiMethod::W: return 0;
    case CiMethod::PL: return 1;
    case CiMethod::SC: return 2;
    case CiMethod::MV: return 3;
    case CiMethod::GE: return 4;
  }
  return 0;
}

GroupCounts draw_group(Engine& rng, double pi, double r, std::int64_t m, std::int64_t n) {
  const CellProbs p = cell_probabilities(pi, r);
  GroupCounts g;
  g.m0 = sample_binomial(rng, m, p.p0);
  const double rest = p.p1 + p.p2;
  g.m1 = rest > 0.0 ? sample_binomial(rng, m - g.m0, std::min(p.p1 / rest, 1.0)) : 0;
  g.m2 = m - g.m0 - g.m1;
  g.n1 = sample_binomial(rng, n, pi);
  g.n0 = n - g.n1;
  return g;
}

RepRecord run_replication(const SimSetting& s, std::int64_t rep, const SearchOptions& search) {
  Engine rng = make_engine(replication_key(s, rep));
  const Dataset data = generate_dataset(s, rng);
  RepRecord rec;
  rec.outcome.fill(Outcome::Failed);

  auto record = [&](CiMethod m, const CiResult& ci) {
    const std::size_t k = slot(m);
    if (!std::isfinite(ci.lower) || !std::isfinite(ci.upper)) return;
    rec.width[k] = ci.width();
    if (s.delta0 <= ci.lower) {
      rec.outcome[k] = Outcome::Above;
    } else if (s.delta0 >= ci.upper) {
      rec.outcome[k] = Outcome::Below;
    } else {
      rec.outcome[k] = Outcome::Covered;
    }
  };
  auto attempt = [&](CiMethod m, auto&& compute) {
    try {
      record(m, compute());
    } catch (const Error&) {
    }
  };

  std::optional<MleResult> mle;
  try {
    mle = fit_unconstrained(data, search.fit);
  } catch (const Error&) {
  }
  if (mle && mle->converged) {
    attempt(CiMethod::W, [&] { return ci_wald(data, *mle, s.alpha); });
    attempt(CiMethod::PL, [&] { return ci_profile(data, *mle, s.alpha, search); });
    attempt(CiMethod::SC, [&] { return ci_score(data, *mle, s.alpha, search); });
  }
  attempt(CiMethod::MV, [&] { return ci_mover(data, s.alpha); });
  attempt(CiMethod::GE, [&] { return ci_gee(data, s.alpha); });
  return rec;
}

SimMetrics aggregate(const std::vector<RepRecord>& records) {
  SimMetrics out;
  for (std::size_t k = 0; k < 5; ++k) {
    std::int64_t ok = 0;
    std::int64_t covered = 0;
    std::int64_t above = 0;
    std::int64_t below = 0;
    double width = 0.0;
    for (const RepRecord& r : records) {
      if (r.outcome[k] == Outcome::Failed) continue;
      ++ok;
      width += r.width[k];
      if (r.outcome[k] == Outcome::Covered) ++covered;
      if (r.outcome[k] == Outcome::Above) ++above;
      if (r.outcome[k] == Outcome::Below) ++below;
    }
    MethodMetrics& mm = out.methods[k];
    mm.successes = ok;
    mm.failures = static_cast<std::int64_t>(records.size()) - ok;
    mm.above = above;
    mm.below = below;
    if (ok > 0) {
      mm.ecp = static_cast<double>(covered) / static_cast<double>(ok);
      mm.miw = width / static_cast<double>(ok);
    }
    if (ok > covered) mm.rmncp = static_cast<double>(above) / static_cast<double>(ok - covered);
  }
  return out;
}

unsigned resolve_threads(unsigned threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

const MethodMetrics& SimMetrics::operator[](CiMethod m) const { return methods[slot(m)]; }

void validate(const SimSetting& s) {
  if (!(s.pi1 > 0.0 && s.pi1 < 1.0)) throw DomainError("pi1 must lie in (0, 1)");
  if (!(s.delta0 > 0.0)) throw DomainError("delta0 must be positive");
  if (!(s.delta0 * s.pi1 < 1.0)) throw AdmissibilityError("delta0*pi1 must be < 1");
  if (!(s.r > 0.0)) throw AdmissibilityError("R must be positive");
  if (!is_admissible(s.pi1, s.delta0 * s.pi1, s.r)) {
    const RRange range = admissible_r_range(s.pi1, s.delta0 * s.pi1);
    throw AdmissibilityError("R must lie in the admissible range [" + std::to_string(range.lower) + ", " +
                             std::to_string(range.upper) + "] for max(pi1, pi2)");
  }
  if (s.m < 0 || s.n < 0 || s.m + s.n == 0) throw DomainError("m and n must be nonnegative and not both 0");
  if (s.reps <= 0) throw DomainError("reps must be positive");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

std::uint64_t replication_key(const SimSetting& s, std::int64_t rep) {
  return derive_seed(derive_seed(s.seed, s.cell_index), static_cast<std::uint64_t>(rep));
}

Dataset generate_dataset(const SimSetting& s, Engine& rng) {
  Dataset d;
  d.group1 = draw_group(rng, s.pi1, s.r, s.m, s.n);
  d.group2 = draw_group(rng, s.delta0 * s.pi1, s.r, s.m, s.n);
  return d;
}

SimMetrics run_cell(const SimSetting& s, unsigned threads, const SearchOptions& search) {
  validate(s);
  std::vector<RepRecord> records(static_cast<std::size_t>(s.reps));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t i = next++; i < s.reps; i = next++) {
      records[static_cast<std::size_t>(i)] = run_replication(s, i, search);
    }
  };
  const unsigned count = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(
                                                                          std::min<std::int64_t>(s.reps, 1 << 16)));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return aggregate(records);
}

std::vector<CellResult> run_grid(const std::vector<SimSetting>& settings, unsigned threads,
                                 const SearchOptions& search) {
  std::vector<CellResult> out;
  out.reserve(settings.size());
  for (const SimSetting& s : settings) {
    CellResult c{s, std::nullopt, {}};
    try {
      c.metrics = run_cell(s, threads, search);
    } catch (const Error& e) {
      c.error = e.what();
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SimSetting> sample_random_settings(const RandomSweep& sw) {
  if (sw.count <= 0) throw DomainError("count must be positive");
  if (!(sw.lo_pi > 0.0 && sw.lo_pi <= sw.hi_pi && sw.hi_pi < 1.0)) throw DomainError("invalid pi1 range");
  if (!(sw.lo_delta > 0.0 && sw.lo_delta <= sw.hi_delta)) throw DomainError("invalid delta0 range");
  if (!(sw.margin >= 0.0 && sw.margin < 1.0)) throw DomainError("margin must lie in [0, 1)");
  if (!(sw.lo_delta * sw.lo_pi < 1.0 - sw.margin)) {
    throw AdmissibilityError("delta0*pi1 must be < 1 - margin for some point of the ranges");
  }
  Engine rng = make_engine(derive_seed(sw.seed, 0x72616e646f6dULL));
  std::vector<SimSetting> out;
  out.reserve(static_cast<std::size_t>(sw.count));
  for (std::int64_t i = 0; i < sw.count; ++i) {
    SimSetting s;
    s.m = sw.m;
    s.n = sw.n;
    s.reps = sw.reps;
    s.alpha = sw.alpha;
    s.seed = sw.seed;
    s.cell_index = static_cast<std::uint64_t>(i);
    do {
      s.pi1 = sample_uniform(rng, sw.lo_pi, sw.hi_pi);
      s.delta0 = sample_uniform(rng, sw.lo_delta, sw.hi_delta);
    } while (s.delta0 * s.pi1 >= 1.0 - sw.margin);
    const RRange range = admissible_r_range(s.pi1, s.delta0 * s.pi1);
    do {
      s.r = sample_uniform(rng, range.lower, range.upper);
    } while (!range.contains(s.r));
    out.push_back(s);
  }
  return out;
}

std::vector<CellResult> run_random(const RandomSweep& sweep, unsigned threads, const SearchOptions& search) {
  return run_grid(sample_random_settings(sweep), threads, search);
}

std::vector<SimSetting> paper_grid(std::int64_t m, std::int64_t n, std::int64_t reps, double alpha,
                                   std::uint64_t seed) {
  struct Row {
    double pi1, delta0, r;
  };
  static constexpr Row rows[] = {
      {0.2, 1.0, 1.0}, {0.2, 1.0, 2.0}, {0.2, 1.0, 3.0}, {0.2, 1.5, 1.0}, {0.2, 1.5, 2.0},
      {0.2, 1.5, 3.0}, {0.2, 2.0, 1.0}, {0.2, 2.0, 2.0}, {0.3, 1.0, 1.0}, {0.3, 1.0, 2.0},
      {0.3, 1.5, 1.0}, {0.3, 1.5, 2.0}, {0.3, 2.0, 1.0},
  };
  std::vector<SimSetting> out;
  std::uint64_t index = 0;
  for (const Row& row : rows) out.push_back({row.pi1, row.delta0, row.r, m, n, reps, alpha, seed, index++});
  return out;
}

std::vector<SimSetting> r_sweep(const SimSetting& base, double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("R sweep needs lo <= hi and step > 0");
  const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<SimSetting> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    SimSetting s = base;
    s.r = lo + static_cast<double>(i) * step;
    s.cell_index = static_cast<std::uint64_t>(i);
    out.push_back(s);
  }
  return out;
}

}  // namespace bilatrr
