// selmer_lab: command-line front end.
//
//   gen        emit a seeded instance
//   check      verify a system file against an instance file
//   canonical  construct the canonical system of an instance
//   path       connect two heart indices
//   basis      extract a Selmer basis from a system
//   campaign   run a seeded sweep and emit its report
//
// Exit codes: 0 pass, 1 violations found, 2 configuration error,
// 3 oracle ceiling exceeded.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "selmer_lab/selmer_lab.hpp"

using namespace selmer_lab;

namespace {

constexpr int kPass = 0;
constexpr int kViolations = 1;
constexpr int kConfigError = 2;
constexpr int kCeilingExceeded = 3;

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << dump(j);
  } else {
    write_text_file(out, dump(j));
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

SquarefreeProduct parse_product(const SelmerInstance& inst, const std::string& s) {
  if (s == "1" || s.empty()) return {};
  return inst.product(split(s, ','));
}

json product_json(const SelmerInstance& inst, SquarefreeProduct l) { return json(inst.product_labels(l)); }

std::size_t bound_or_m(const SelmerInstance& inst, std::optional<std::size_t> bound) {
  return bound.value_or(inst.m());
}

// "2..6", "2-6" or "4"
std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  auto sep = s.find("..");
  std::size_t skip = 2;
  if (sep == std::string::npos) {
    sep = s.find('-');
    skip = 1;
  }
  try {
    if (sep == std::string::npos) {
      const auto v = std::stoul(s);
      return {v, v};
    }
    return {std::stoul(s.substr(0, sep)), std::stoul(s.substr(sep + skip))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad m range '" + s + "'");
  }
}

json certificates_json(const SelmerInstance& inst, const std::vector<ViolationCertificate>& certs) {
  json out = json::array();
  for (const auto& c : certs) {
    out.push_back({{"law", to_string(c.law)},
                   {"product", product_json(inst, c.product)},
                   {"prime", inst.labels()[c.prime]},
                   {"loc_zero", c.loc_zero},
                   {"neighbour_zero", c.neighbour_zero}});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bipartite Kolyvagin systems over synthetic mod-p Selmer data"};
  app.require_subcommand(1);

  std::string out;
  std::string format = "json";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Write output to this file instead of stdout");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json"}));
  };

  // gen
  std::uint32_t p = 3;
  std::size_t m = 2;
  std::uint64_t seed = 0;
  std::string epsilon_mode = "match";
  auto* gen = app.add_subcommand("gen", "Emit a seeded instance");
  gen->add_option("--p", p, "Field characteristic")->required();
  gen->add_option("--m", m, "Number of primes")->required();
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--epsilon-mode", epsilon_mode, "match or mismatch");
  add_common(gen);

  // shared file inputs
  std::string instance_path;
  std::string system_path;
  std::optional<std::size_t> bound;
  std::uint64_t ceiling = kDefaultOracleCeiling;

  auto* check = app.add_subcommand("check", "Verify a system file against an instance file");
  check->add_option("--instance", instance_path, "Instance JSON")->required();
  check->add_option("--system", system_path, "System JSON")->required();
  bool with_oracle = false;
  check->add_flag("--oracle", with_oracle, "Also cross-check Selmer dimensions by brute force");
  check->add_option("--oracle-ceiling", ceiling, "Largest p^(2m) the brute-force oracle may enumerate");
  add_common(check);

  auto* canonical = app.add_subcommand("canonical", "Construct and emit the canonical system");
  canonical->add_option("--instance", instance_path, "Instance JSON")->required();
  canonical->add_option("--bound", bound, "Support bound (default m)");
  canonical->add_option("--seed", seed, "Value picker seed");
  add_common(canonical);

  std::string from;
  std::string to;
  auto* path = app.add_subcommand("path", "Connect two heart indices");
  path->add_option("--instance", instance_path, "Instance JSON")->required();
  path->add_option("--from", from, "Comma-separated labels, or 1")->required();
  path->add_option("--to", to, "Comma-separated labels, or 1")->required();
  path->add_option("--bound", bound, "Support bound (default m)");
  add_common(path);

  auto* basis = app.add_subcommand("basis", "Extract a basis of Sel from a system");
  basis->add_option("--instance", instance_path, "Instance JSON")->required();
  basis->add_option("--system", system_path, "System JSON (default: canonical system)");
  basis->add_option("--bound", bound, "Bound for the canonical system (default m)");
  basis->add_option("--seed", seed, "Value picker seed for the canonical system");
  add_common(basis);

  std::string config_path;
  std::string primes_list = "3";
  std::string m_range = "2..4";
  std::size_t instances = 10;
  std::size_t threads = 0;
  std::size_t paths = 20;
  std::string parity_mode = "both";
  bool require_oracle = false;
  bool no_timing = false;
  auto* campaign = app.add_subcommand("campaign", "Run a seeded campaign and emit its report");
  campaign->add_option("--config", config_path, "Campaign config JSON (flags below are ignored)");
  campaign->add_option("--p", primes_list, "Comma-separated primes");
  campaign->add_option("--m", m_range, "Range of m, e.g. 2..6");
  campaign->add_option("--instances", instances, "Instances per (p, m) cell");
  campaign->add_option("--seed", seed, "Campaign seed");
  campaign->add_option("--bound", bound, "Support bound (default m)");
  campaign->add_option("--epsilon-mode", parity_mode, "match, mismatch or both");
  campaign->add_option("--oracle-ceiling", ceiling, "Largest p^(2m) the brute-force oracle may enumerate");
  campaign->add_option("--paths", paths, "Heart pairs sampled per instance");
  campaign->add_option("--threads", threads, "Worker threads (default: SELMER_LAB_THREADS or all cores)");
  campaign->add_flag("--require-oracle", require_oracle, "Fail with exit 3 if a cell is beyond the ceiling");
  campaign->add_flag("--no-timing", no_timing, "Omit wall-clock fields");
  add_common(campaign);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*gen) {
      const auto inst = generate_instance(p, m, parse_epsilon_mode(epsilon_mode), seed);
      emit(instance_to_json(inst), out);
      return kPass;
    }

    if (*campaign) {
      CampaignConfig config;
      if (!config_path.empty()) {
        config = config_from_json(read_json_file(config_path));
      } else {
        config.primes.clear();
        for (const auto& s : split(primes_list, ',')) {
          try {
            config.primes.push_back(static_cast<std::uint32_t>(std::stoul(s)));
          } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "bad prime '" + s + "'");
          }
        }
        std::tie(config.m_min, config.m_max) = parse_range(m_range);
        config.instances_per_cell = instances;
        config.seed = seed;
        config.bound = bound;
        config.parity_mode = parse_parity_mode(parity_mode);
        config.oracle_ceiling = ceiling;
        config.paths_per_instance = paths;
        config.threads = threads;
        config.require_oracle = require_oracle;
      }
      const auto report = run_campaign(config);
      emit(report_to_json(report, !no_timing), out);
      return report.passed() ? kPass : kViolations;
    }

    const auto inst = instance_from_json(read_json_file(instance_path));

    if (*check) {
      const auto z = system_from_json(inst, read_json_file(system_path));
      json report{{"well_formed", true}};
      try {
        validate_system(inst, z);
      } catch (const Error& e) {
        report["well_formed"] = false;
        report["error"] = e.what();
        report["passed"] = false;
        emit(report, out);
        return kViolations;
      }
      const auto rl1 = verify_rl1(inst, z);
      const auto rl2 = verify_rl2(inst, z);
      const auto eq = check_equivalences(inst, z, z.bound());
      json failures = json::array();
      for (const auto& f : eq.failures) {
        failures.push_back({{"direction", to_string(f.direction)}, {"product", product_json(inst, f.product)}});
      }
      bool passed = rl1.empty() && rl2.empty() && eq.passed();
      report["nontrivial"] = !z.trivial();
      report["rl1"] = certificates_json(inst, rl1);
      report["rl2"] = certificates_json(inst, rl2);
      report["equivalences"] = {{"converse_active", eq.converse_active},
                                {"indices_checked", eq.indices_checked},
                                {"failures", failures}};
      if (with_oracle) {
        const auto table = brute_oracle(inst, z.bound(), ceiling);
        std::size_t disagreements = 0;
        for (const auto& row : table.selmer) {
          disagreements += row.selmer_dim != selmer_group(inst, row.product).dim() ? 1 : 0;
        }
        report["oracle"] = {{"vectors_enumerated", table.vectors_enumerated},
                            {"disagreements", disagreements},
                            {"duality_violations", table.violations()}};
        passed = passed && disagreements == 0 && table.violations() == 0;
      }
      report["passed"] = passed;
      emit(report, out);
      return passed ? kPass : kViolations;
    }

    if (*canonical) {
      const auto z = canonical_system(inst, bound_or_m(inst, bound), seed);
      emit(system_to_json(inst, z), out);
      return kPass;
    }

    if (*path) {
      const auto b = bound_or_m(inst, bound);
      const auto result = connect_path(inst, parse_product(inst, from), parse_product(inst, to), b);
      json nodes = json::array();
      for (auto l : result.nodes) {
        nodes.push_back({{"primes", product_json(inst, l)}, {"selmer_dim", selmer_group(inst, l).dim()}});
      }
      emit(json{{"length", result.length()}, {"valid", path_is_valid(inst, result, b)}, {"nodes", nodes}}, out);
      return kPass;
    }

    if (*basis) {
      const auto z = system_path.empty() ? canonical_system(inst, bound_or_m(inst, bound), seed)
                                         : system_from_json(inst, read_json_file(system_path));
      if (!system_path.empty()) validate_system(inst, z);
      const auto b = basis_extract(inst, z);
      json primes = json::array();
      for (auto i : b.primes) primes.push_back(inst.labels()[i]);
      emit(json{{"rank", b.classes.size()},
                {"product", product_json(inst, b.product)},
                {"primes", primes},
                {"classes", b.classes},
                {"loc_matrix", b.loc_matrix}},
           out);
      return kPass;
    }
  } catch (const Error& e) {
    std::cerr << "selmer_lab: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::Format:
      case ErrorCode::UnknownPrime:
      case ErrorCode::BoundExceeded:
        return kConfigError;
      case ErrorCode::CeilingExceeded:
        return kCeilingExceeded;
      default:
        return kViolations;
    }
  }

  return kConfigError;
}
