#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aim/aim_engine.hpp"
#include "aim/bigreal.hpp"

namespace aim {

/// Reference data file: `key = value` metadata, whitespace-separated rows,
/// `#` comments. The `columns` entry names the row fields.
struct RefTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Throws ConfigurationError when the key is missing.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  /// Index of a named column; throws ConfigurationError when absent.
  std::size_t column(std::string_view name) const;
};

RefTable load_reference(const std::filesystem::path& path);

/// Directory holding table1.txt .. table4.txt: $AIM_DATA_DIR, else the
/// path compiled into the build.
std::filesystem::path default_data_dir();

/// |value - ref| against half a unit in the `sig`-th significant digit of ref.
struct Agreement {
  double abs_diff = 0;
  double tolerance = 0;
  bool ok = false;
};
Agreement agree_sig(const BigReal& value, std::string_view ref, int sig);

/// Fixed notation with `decimals` digits after the point; "nan" when not finite.
std::string fixed(const BigReal& v, int decimals);
/// Up to eight decimals, trailing zeros dropped ("3", "6.5").
std::string compact(const BigReal& v);

enum class CellStatus { Pass, Fail, ExpectedFail, Report };
std::string_view status_name(CellStatus s);

struct CellResult {
  std::string cell;
  std::string reference;
  std::string energy;
  std::optional<double> abs_diff;
  std::optional<double> tolerance;
  int iterations = 0;
  int reference_n = 0;
  int digits_used = 0;
  std::string r0;
  std::string termination;
  CellStatus status = CellStatus::Report;
  std::string note;
};

/// Overrides shared by every table; unset fields take the table's own values.
struct TableOptions {
  std::filesystem::path data_dir = default_data_dir();
  std::string rows;  // table-specific selector, empty = default cells
  std::optional<int> max_n;
  std::optional<int> target_digits;
  std::optional<int> start_digits;
  std::optional<int> max_digits;
  Backend backend = Backend::Jet;
};

/// Re-runs one reference table. Throws ConfigurationError for an unknown
/// table or a bad row selector.
std::vector<CellResult> run_table(int which, const TableOptions& options);

/// True when no asserted cell failed.
bool table_passed(const std::vector<CellResult>& cells);

}  // namespace aim
