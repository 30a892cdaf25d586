#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aim/aim_engine.hpp"
#include "aim/problem.hpp"

namespace aim::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int numeric = 2;
inline constexpr int mismatch = 3;
}  // namespace exit_code

enum class Format { Json, Csv, Text };
enum class BackendChoice { Jet, Symbolic, Both };

/// Everything a run needs; filled from flags and an optional key=value file.
struct RunConfig {
  std::string alpha = "2";
  std::string lambda = "0";
  std::optional<std::string> gamma;
  std::optional<int> l;
  std::optional<int> dim;
  int state = 0;
  std::optional<std::string> r0;
  std::optional<int> target_digits;
  std::optional<int> start_digits;
  std::optional<int> max_digits;
  std::optional<int> max_n;
  int k_confirm = 3;
  Format format = Format::Text;
  std::string out;
  BackendChoice backend = BackendChoice::Jet;
  std::filesystem::path data_dir;
  bool timing = false;

  /// Throws ConfigurationError / DomainError on bad values.
  ProblemSpec problem() const;
  PrecisionPolicy policy() const;
  int target() const { return target_digits.value_or(7); }
  int n_max() const { return max_n.value_or(500); }
};

/// Full command line (without the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aim::cli
