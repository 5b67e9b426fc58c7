// The check / simulate / synthesize workflows behind the switchstab binary.
// Exit codes: 0 success, 1 domain-level failure, 2 usage or parse error.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace switchstab::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Options {
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<double> tail_start;
  std::vector<double> eps;
  std::filesystem::path out_dir = ".";
  /// synthesize: write the controller here and stop.
  std::optional<std::filesystem::path> emit_controller;
  /// simulate: also export the switching path and state trajectory of this run.
  std::optional<std::size_t> export_trajectory;
  unsigned threads = 0;
};

int run_check(const std::filesystem::path& scenario, std::ostream& out, std::ostream& err);
int run_simulate(const std::filesystem::path& scenario, const Options& options, std::ostream& out,
                 std::ostream& err);
int run_synthesize(const std::filesystem::path& scenario, const Options& options, std::ostream& out,
                   std::ostream& err);

}  // namespace switchstab::app
