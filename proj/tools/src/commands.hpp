#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace maskguard::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> dataset;  // train
  std::optional<std::filesystem::path> model;    // simulate, eval, roc
};

void cmd_simulate(const CommandOptions& o);
void cmd_dataset(const CommandOptions& o);
void cmd_train(const CommandOptions& o);
void cmd_eval(const CommandOptions& o);
void cmd_roc(const CommandOptions& o);

// 2 for configuration problems, 3 for everything else.
int exit_code_for(const std::exception& e);

}  // namespace maskguard::cli
