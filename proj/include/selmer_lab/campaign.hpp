#pragma once

// Campaigns: sweep (p, m) cells, generate seeded instances, and run every
// check the library offers against each one. Per-instance seeds depend only
// on (campaign seed, cell index, instance index), so the report does not
// depend on scheduling.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "selmer_lab/bipartite.hpp"
#include "selmer_lab/error.hpp"
#include "selmer_lab/generate.hpp"
#include "selmer_lab/oracle.hpp"
#include "selmer_lab/rng.hpp"
#include "selmer_lab/selmer.hpp"
#include "selmer_lab/serialize.hpp"

namespace selmer_lab {

enum class ParityMode { Match, Mismatch, Both };

inline const char* to_string(ParityMode m) {
  switch (m) {
    case ParityMode::Match: return "match";
    case ParityMode::Mismatch: return "mismatch";
    case ParityMode::Both: return "both";
  }
  return "?";
}

inline ParityMode parse_parity_mode(const std::string& s) {
  if (s == "match") return ParityMode::Match;
  if (s == "mismatch") return ParityMode::Mismatch;
  if (s == "both") return ParityMode::Both;
  throw Error(ErrorCode::InvalidArgument, "parity mode must be match, mismatch or both, got '" + s + "'");
}

struct CampaignConfig {
  std::vector<std::uint32_t> primes{3};
  std::size_t m_min = 2;
  std::size_t m_max = 2;  // m_min > m_max is an empty range
  std::size_t instances_per_cell = 1;
  std::optional<std::size_t> bound;  // per cell: min(bound, m); default m
  std::uint64_t seed = 0;
  std::uint64_t oracle_ceiling = kDefaultOracleCeiling;
  ParityMode parity_mode = ParityMode::Both;
  std::size_t paths_per_instance = 20;
  std::size_t max_support_heart = 12;
  std::size_t threads = 0;  // 0: SELMER_LAB_THREADS, else hardware concurrency
  bool require_oracle = false;
};

inline void validate_config(const CampaignConfig& c) {
  for (auto p : c.primes) FieldPrime{p};
  if (c.m_min == 0) throw Error(ErrorCode::InvalidArgument, "m range must start at 1 or more");
  if (c.m_max > 20) throw Error(ErrorCode::InvalidArgument, "m above 20 is out of reach for exhaustive sweeps");
  if (c.require_oracle) {
    for (auto p : c.primes) {
      for (auto m = c.m_min; m <= c.m_max; ++m) {
        if (!oracle_fits(p, m, c.oracle_ceiling)) {
          throw Error(ErrorCode::CeilingExceeded, "cell p=" + std::to_string(p) + ", m=" + std::to_string(m) +
                                                      " exceeds the oracle ceiling");
        }
      }
    }
  }
}

struct CellStats {
  std::uint32_t p = 0;
  std::size_t m = 0;
  std::size_t bound = 0;
  std::uint64_t instances = 0;
  std::uint64_t parity_match_instances = 0;
  std::uint64_t rhombus_checks = 0;
  std::uint64_t oracle_instances = 0;
  std::uint64_t oracle_cells = 0;
  std::uint64_t rl_checks = 0;
  std::uint64_t equivalence_checks = 0;
  std::uint64_t nontriviality_checks = 0;
  std::uint64_t uniqueness_checks = 0;
  std::uint64_t contrapositive_checks = 0;
  std::uint64_t contrapositive_skipped = 0;
  std::uint64_t path_attempts = 0;
  std::uint64_t path_successes = 0;
  std::uint64_t path_primes_exhausted = 0;
  std::uint64_t path_bound_exceeded = 0;
  std::uint64_t path_attempts_wide = 0;  // instances with m >= 2 dim Sel + 2
  std::uint64_t path_primes_exhausted_wide = 0;
  std::uint64_t basis_attempts = 0;
  std::uint64_t basis_successes = 0;
  std::uint64_t basis_primes_exhausted = 0;
  std::uint64_t primes_exhausted = 0;
  std::uint64_t violations = 0;
  double wall_clock_ms = 0.0;

  void merge(const CellStats& o) {
    instances += o.instances;
    parity_match_instances += o.parity_match_instances;
    rhombus_checks += o.rhombus_checks;
    oracle_instances += o.oracle_instances;
    oracle_cells += o.oracle_cells;
    rl_checks += o.rl_checks;
    equivalence_checks += o.equivalence_checks;
    nontriviality_checks += o.nontriviality_checks;
    uniqueness_checks += o.uniqueness_checks;
    contrapositive_checks += o.contrapositive_checks;
    contrapositive_skipped += o.contrapositive_skipped;
    path_attempts += o.path_attempts;
    path_successes += o.path_successes;
    path_primes_exhausted += o.path_primes_exhausted;
    path_bound_exceeded += o.path_bound_exceeded;
    path_attempts_wide += o.path_attempts_wide;
    path_primes_exhausted_wide += o.path_primes_exhausted_wide;
    basis_attempts += o.basis_attempts;
    basis_successes += o.basis_successes;
    basis_primes_exhausted += o.basis_primes_exhausted;
    primes_exhausted += o.primes_exhausted;
    violations += o.violations;
    wall_clock_ms += o.wall_clock_ms;
  }
};

struct CampaignViolation {
  std::uint32_t p = 0;
  std::size_t m = 0;
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::string kind;
  std::string detail;
};

struct ExhaustedEvent {
  std::uint32_t p = 0;
  std::size_t m = 0;
  std::size_t instance = 0;
  std::string argument;  // which construction asked for the prime
  std::string detail;
};

struct CampaignReport {
  CampaignConfig config;
  std::vector<CellStats> cells;
  std::vector<CampaignViolation> violations;
  std::vector<ExhaustedEvent> primes_exhausted_log;

  CellStats totals() const {
    CellStats t;
    for (const auto& c : cells) t.merge(c);
    return t;
  }
  bool passed() const { return violations.empty(); }
};

namespace campaign_detail {

struct Outcome {
  CellStats stats;
  std::vector<CampaignViolation> violations;
  std::vector<ExhaustedEvent> exhausted;
};

inline std::string describe(const SelmerInstance& inst, SquarefreeProduct l) {
  std::string s = "{";
  for (const auto& label : inst.product_labels(l)) s += (s.size() > 1 ? "," : "") + label;
  return s + "}";
}

class InstanceRun {
 public:
  InstanceRun(const CampaignConfig& cfg, std::uint32_t p, std::size_t m, std::size_t cell, std::size_t index)
      : cfg_(cfg), p_(p), m_(m), index_(index), seed_(derive_seed(cfg.seed, cell, index)) {
    out_.stats.p = p;
    out_.stats.m = m;
    out_.stats.bound = std::min(cfg.bound.value_or(m), m);
  }

  Outcome run() {
    const auto started = std::chrono::steady_clock::now();
    const EpsilonMode mode = cfg_.parity_mode == ParityMode::Both
                                 ? (index_ % 2 == 0 ? EpsilonMode::Match : EpsilonMode::Mismatch)
                                 : (cfg_.parity_mode == ParityMode::Match ? EpsilonMode::Match
                                                                          : EpsilonMode::Mismatch);
    try {
      const auto inst = generate_instance(p_, m_, mode, seed_);
      out_.stats.instances = 1;
      check_instance(inst, mode);
    } catch (const Error& e) {
      violation("generation", e.what());
    }
    out_.stats.wall_clock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return std::move(out_);
  }

 private:
  void violation(const std::string& kind, const std::string& detail) {
    ++out_.stats.violations;
    out_.violations.push_back({p_, m_, index_, seed_, kind, detail});
  }
  void exhausted(const std::string& argument, const std::string& detail) {
    ++out_.stats.primes_exhausted;
    out_.exhausted.push_back({p_, m_, index_, argument, detail});
  }

  template <typename F>
  void guarded(const std::string& kind, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      violation(kind, e.what());
    }
  }

  void check_instance(const SelmerInstance& inst, EpsilonMode mode) {
    const auto bound = out_.stats.bound;
    const auto sel_rank = selmer_group(inst, SquarefreeProduct{}).dim();

    guarded("rhombus", [&] { rhombus_sweep(inst, bound, sel_rank); });
    if (oracle_fits(p_, m_, cfg_.oracle_ceiling)) guarded("oracle", [&] { oracle_sweep(inst, bound); });

    bool match = false;
    guarded("parity", [&] {
      const auto parity = parity_class(inst, bound);
      match = parity.parity_match;
      if (match != (mode == EpsilonMode::Match)) violation("parity", "generator produced the wrong parity status");
    });
    out_.stats.parity_match_instances = match ? 1 : 0;

    std::optional<BipartiteSystem> system;
    if (match) {
      guarded("canonical", [&] { system = canonical_system(inst, bound, derive_seed(seed_, 1)); });
      if (system) check_system(inst, *system, bound, sel_rank);
    } else {
      guarded("contrapositive", [&] { contrapositive(inst, bound); });
    }
    guarded("path", [&] { sample_paths(inst, bound, sel_rank, system ? &*system : nullptr); });
  }

  void rhombus_sweep(const SelmerInstance& inst, std::size_t bound, std::size_t sel_rank) {
    for (auto l : products_up_to(m_, bound)) {
      const auto d = selmer_group(inst, l).dim();
      if (d + l.size() < sel_rank) {
        violation("nontr_sel", "dim Sel_" + describe(inst, l) + " below dim Sel - j");
      }
      for (std::size_t prime = 0; prime < m_; ++prime) {
        if (l.divisible_by(prime)) continue;
        ++out_.stats.rhombus_checks;
        try {
          const auto r = rhombus(inst, l, prime);
          if (r.relaxed_dim != r.strict_dim + 1) violation("duality", describe(inst, l));
          if (r.extended_dim + 1 != r.selmer_dim && r.selmer_dim + 1 != r.extended_dim) {
            violation("parity_change", describe(inst, l) + " at " + inst.labels()[prime]);
          }
        } catch (const Error& e) {
          violation("rhombus", describe(inst, l) + " at " + inst.labels()[prime] + ": " + e.what());
        }
      }
    }
  }

  void oracle_sweep(const SelmerInstance& inst, std::size_t bound) {
    const auto table = brute_oracle(inst, bound, cfg_.oracle_ceiling);
    ++out_.stats.oracle_instances;
    for (const auto& row : table.selmer) {
      ++out_.stats.oracle_cells;
      if (row.selmer_dim != selmer_group(inst, row.product).dim()) {
        violation("oracle", "Selmer dimension disagrees at " + describe(inst, row.product));
      }
    }
    for (const auto& row : table.rhombus) {
      ++out_.stats.oracle_cells;
      const auto r = rhombus(inst, row.product, row.prime);
      if (!row.dichotomy_case || *row.dichotomy_case != r.dichotomy_case || row.relaxed_dim != r.relaxed_dim ||
          row.strict_dim != r.strict_dim || row.extended_dim != r.extended_dim) {
        violation("oracle", "rhombus disagrees at " + describe(inst, row.product) + " / " +
                                inst.labels()[row.prime]);
      }
    }
  }

  void check_system(const SelmerInstance& inst, const BipartiteSystem& z, std::size_t bound,
                    std::size_t sel_rank) {
    ++out_.stats.rl_checks;
    for (const auto& c : verify_rl1(inst, z)) violation("rl1", describe(inst, c.product));
    for (const auto& c : verify_rl2(inst, z)) violation("rl2", describe(inst, c.product));

    ++out_.stats.equivalence_checks;
    const auto eq = check_equivalences(inst, z, bound);
    for (const auto& f : eq.failures) violation("equivalence", std::string(to_string(f.direction)) + " at " +
                                                                   describe(inst, f.product));

    guarded("uniqueness", [&] {
      ++out_.stats.uniqueness_checks;
      const auto other = canonical_system(inst, bound, derive_seed(seed_, 2));
      if (!uniqueness_check(inst, z, other)) violation("uniqueness", "supports differ between seeds");
    });

    if (!z.trivial()) {
      ++out_.stats.nontriviality_checks;
      try {
        const auto rep = nontriviality(inst, z);
        if (rep.trivial || !rep.plus_witness || !rep.minus_witness) {
          violation("nontriviality", "missing witness");
        } else if (inst.sign(*rep.plus_witness) != Sign::Plus || inst.sign(*rep.minus_witness) != Sign::Minus ||
                   !z.nonzero(*rep.plus_witness) || !z.nonzero(*rep.minus_witness)) {
          violation("nontriviality", "witness does not re-verify");
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PrimesExhausted) throw;
        exhausted("nontriviality", e.what());
      }
    }

    if (sel_rank + 1 <= m_ && sel_rank <= bound && !z.trivial()) {
      ++out_.stats.basis_attempts;
      try {
        const auto b = basis_extract(inst, z);
        const auto sel = selmer_group(inst, SquarefreeProduct{});
        bool ok = b.classes.size() == sel_rank &&
                  FpSubspace::span(inst.field(), inst.space().ambient_dim(), b.classes).dim() == sel_rank;
        for (std::size_t i = 0; ok && i < b.classes.size(); ++i) {
          ok = sel.contains(b.classes[i]);
          for (std::size_t j = 0; ok && j < b.primes.size(); ++j) {
            const auto u = b.classes[i][HyperbolicSpace::u_index(b.primes[j])];
            ok = (i == j) == (u != 0);
          }
        }
        if (ok) {
          ++out_.stats.basis_successes;
        } else {
          violation("basis", "extracted classes fail re-verification");
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PrimesExhausted) throw;
        ++out_.stats.basis_primes_exhausted;
        exhausted("basis", e.what());
      }
    }
  }

  void contrapositive(const SelmerInstance& inst, std::size_t bound) {
    bool refused = false;
    try {
      canonical_system(inst, bound, derive_seed(seed_, 1));
    } catch (const Error& e) {
      refused = e.code() == ErrorCode::ParityMismatch;
    }
    if (!refused) violation("contrapositive", "canonical construction accepted a parity mismatch");
    if (heart(inst, bound).size() > cfg_.max_support_heart) {
      ++out_.stats.contrapositive_skipped;
      return;
    }
    ++out_.stats.contrapositive_checks;
    const auto search = consistent_supports(inst, bound, cfg_.max_support_heart);
    for (const auto& support : search.consistent_nonzero) {
      violation("contrapositive", "nontrivial support of size " + std::to_string(support.size()) +
                                      " satisfies both reciprocity laws");
    }
  }

  void sample_paths(const SelmerInstance& inst, std::size_t bound, std::size_t sel_rank,
                    const BipartiteSystem* z) {
    const auto core = heart(inst, bound);
    if (core.empty()) return;
    const bool wide = m_ >= 2 * sel_rank + 2;
    Rng rng(derive_seed(seed_, 3));
    for (std::size_t k = 0; k < cfg_.paths_per_instance; ++k) {
      const auto a = core[rng.below(core.size())];
      const auto b = core[rng.below(core.size())];
      ++out_.stats.path_attempts;
      out_.stats.path_attempts_wide += wide ? 1 : 0;
      try {
        const auto path = connect_path(inst, a, b, bound);
        bool ok = path_is_valid(inst, path, bound) && path.nodes.front() == a && path.nodes.back() == b;
        if (ok && z != nullptr) {
          ok = std::all_of(path.nodes.begin(), path.nodes.end(), [&](SquarefreeProduct l) { return z->nonzero(l); });
        }
        if (ok) {
          ++out_.stats.path_successes;
        } else {
          violation("path", "path from " + describe(inst, a) + " to " + describe(inst, b) + " fails re-validation");
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::PrimesExhausted) {
          ++out_.stats.path_primes_exhausted;
          out_.stats.path_primes_exhausted_wide += wide ? 1 : 0;
          exhausted("path", describe(inst, a) + " -> " + describe(inst, b) + ": " + e.what());
        } else if (e.code() == ErrorCode::BoundExceeded) {
          ++out_.stats.path_bound_exceeded;
        } else {
          throw;
        }
      }
    }
  }

  const CampaignConfig& cfg_;
  std::uint32_t p_;
  std::size_t m_;
  std::size_t index_;
  std::uint64_t seed_;
  Outcome out_;
};

}  // namespace campaign_detail

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  if (const char* env = std::getenv("SELMER_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

inline CampaignReport run_campaign(const CampaignConfig& config) {
  validate_config(config);
  struct Task {
    std::size_t cell;
    std::uint32_t p;
    std::size_t m;
    std::size_t index;
  };
  CampaignReport report;
  report.config = config;
  std::vector<Task> tasks;
  for (auto p : config.primes) {
    for (auto m = config.m_min; m <= config.m_max; ++m) {
      const auto cell = report.cells.size();
      CellStats stats;
      stats.p = p;
      stats.m = m;
      stats.bound = std::min(config.bound.value_or(m), m);
      report.cells.push_back(stats);
      for (std::size_t i = 0; i < config.instances_per_cell; ++i) tasks.push_back({cell, p, m, i});
    }
  }

  std::vector<campaign_detail::Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      outcomes[i] = campaign_detail::InstanceRun(config, t.p, t.m, t.cell, t.index).run();
    }
  };
  const auto threads = std::min(resolve_threads(config.threads), std::max<std::size_t>(1, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& o = outcomes[i];
    report.cells[tasks[i].cell].merge(o.stats);
    report.violations.insert(report.violations.end(), o.violations.begin(), o.violations.end());
    report.primes_exhausted_log.insert(report.primes_exhausted_log.end(), o.exhausted.begin(), o.exhausted.end());
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

inline json config_to_json(const CampaignConfig& c) {
  json j{{"primes", c.primes},
         {"m_min", c.m_min},
         {"m_max", c.m_max},
         {"instances_per_cell", c.instances_per_cell},
         {"seed", c.seed},
         {"oracle_ceiling", c.oracle_ceiling},
         {"parity_mode", to_string(c.parity_mode)},
         {"paths_per_instance", c.paths_per_instance},
         {"max_support_heart", c.max_support_heart},
         {"require_oracle", c.require_oracle}};
  j["bound"] = c.bound ? json(*c.bound) : json(nullptr);
  return j;
}

inline CampaignConfig config_from_json(const json& j) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, "campaign config: " + what);
  };
  require(j.is_object(), "expected an object");
  CampaignConfig c;
  try {
    if (j.contains("primes")) c.primes = j["primes"].get<std::vector<std::uint32_t>>();
    if (j.contains("m_min")) c.m_min = j["m_min"].get<std::size_t>();
    if (j.contains("m_max")) c.m_max = j["m_max"].get<std::size_t>();
    if (j.contains("instances_per_cell")) c.instances_per_cell = j["instances_per_cell"].get<std::size_t>();
    if (j.contains("bound") && !j["bound"].is_null()) c.bound = j["bound"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("oracle_ceiling")) c.oracle_ceiling = j["oracle_ceiling"].get<std::uint64_t>();
    if (j.contains("parity_mode")) c.parity_mode = parse_parity_mode(j["parity_mode"].get<std::string>());
    if (j.contains("paths_per_instance")) c.paths_per_instance = j["paths_per_instance"].get<std::size_t>();
    if (j.contains("max_support_heart")) c.max_support_heart = j["max_support_heart"].get<std::size_t>();
    if (j.contains("require_oracle")) c.require_oracle = j["require_oracle"].get<bool>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("campaign config: ") + e.what());
  }
  return c;
}

inline json stats_to_json(const CellStats& s, bool include_timing, bool with_cell = true) {
  json j = with_cell ? json{{"p", s.p}, {"m", s.m}, {"bound", s.bound}} : json::object();
  j.update(json{{"instances", s.instances},
         {"parity_match_instances", s.parity_match_instances},
         {"rhombus_checks", s.rhombus_checks},
         {"oracle_instances", s.oracle_instances},
         {"oracle_cells", s.oracle_cells},
         {"rl_checks", s.rl_checks},
         {"equivalence_checks", s.equivalence_checks},
         {"nontriviality_checks", s.nontriviality_checks},
         {"uniqueness_checks", s.uniqueness_checks},
         {"contrapositive_checks", s.contrapositive_checks},
         {"contrapositive_skipped", s.contrapositive_skipped},
         {"path_attempts", s.path_attempts},
         {"path_successes", s.path_successes},
         {"path_primes_exhausted", s.path_primes_exhausted},
         {"path_bound_exceeded", s.path_bound_exceeded},
         {"path_attempts_wide", s.path_attempts_wide},
         {"path_primes_exhausted_wide", s.path_primes_exhausted_wide},
         {"basis_attempts", s.basis_attempts},
         {"basis_successes", s.basis_successes},
         {"basis_primes_exhausted", s.basis_primes_exhausted},
         {"primes_exhausted", s.primes_exhausted},
         {"violations", s.violations}});
  if (include_timing) j["wall_clock_ms"] = s.wall_clock_ms;
  return j;
}

inline json report_to_json(const CampaignReport& r, bool include_timing = true) {
  json cells = json::array();
  for (const auto& c : r.cells) cells.push_back(stats_to_json(c, include_timing));
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"p", v.p}, {"m", v.m}, {"instance", v.instance}, {"seed", v.seed},
                          {"kind", v.kind}, {"detail", v.detail}});
  }
  json exhausted = json::array();
  for (const auto& e : r.primes_exhausted_log) {
    exhausted.push_back(
        {{"p", e.p}, {"m", e.m}, {"instance", e.instance}, {"argument", e.argument}, {"detail", e.detail}});
  }
  const auto t = r.totals();
  const double wide_rate = t.path_attempts_wide == 0
                               ? 0.0
                               : static_cast<double>(t.path_primes_exhausted_wide) / t.path_attempts_wide;
  return json{{"format_version", kFormatVersion},
              {"config", config_to_json(r.config)},
              {"passed", r.passed()},
              {"totals", stats_to_json(t, include_timing, false)},
              {"path_primes_exhausted_rate_wide", wide_rate},
              {"cells", cells},
              {"violations", violations},
              {"primes_exhausted_log", exhausted}};
}

}  // namespace selmer_lab
