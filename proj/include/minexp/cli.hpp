// Scenario-file loading (strict JSON schema) and the CLI command
// implementations, factored as library functions so tests can drive them
// in-process.
//
// Exit codes: 0 ok, 2 invalid input, 3 training divergence, 4 invalid mode
// (e.g. shooting on a time-varying field).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minexp/pmp.hpp"
#include "minexp/trainer.hpp"

namespace minexp {

struct ScenarioFile {
  Scenario scenario;
  std::uint64_t seed = 1;

  struct TrainOverrides {
    std::optional<int> collocation;
    std::optional<int> max_epochs;
    std::optional<double> learning_rate;
    std::optional<double> lr_decay_factor;
    std::optional<int> lr_decay_epoch;
    std::optional<double> anneal_alpha;
    std::optional<int> anneal_every;
    std::optional<int> anneal_start;
    std::optional<double> stop_threshold;  // applied to all of L1..L9
    std::optional<bool> use_stop_criteria;
    std::optional<int> conditioned_initial_states;
  } train;

  void apply(TrainConfig& config) const;
};

// Throws std::runtime_error with a field-path diagnostic on any schema
// violation (unknown key, wrong type, invalid value).
ScenarioFile load_scenario_file(const std::string& path);
ScenarioFile parse_scenario_json(const std::string& text);

struct CliExit {
  static constexpr int kOk = 0;
  static constexpr int kBadInput = 2;
  static constexpr int kDivergence = 3;
  static constexpr int kInvalidMode = 4;
};

int cmd_train(const std::string& scenario_path, const std::string& profile,
              const std::string& out_dir, std::optional<std::uint64_t> seed,
              bool conditioned, std::ostream& out, std::ostream& err);
int cmd_shoot(const std::string& scenario_path, const std::string& out_dir,
              std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& scenario_path, int trials,
                std::optional<std::uint64_t> seed, const std::string& profile,
                const std::string& out_dir, std::ostream& out,
                std::ostream& err);
int cmd_plotdata(const std::string& run_dir, const std::string& out_dir,
                 std::ostream& out, std::ostream& err);
int cmd_validate(const std::string& scenario_path, std::ostream& out,
                 std::ostream& err);

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace minexp
