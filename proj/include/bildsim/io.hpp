#pragma once

// File formats: matrix JSON, CSV tables, atomic writes and the trajectory
// container.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bildsim/brownian.hpp"
#include "bildsim/hilbert.hpp"

namespace bildsim::io {

using Json = nlohmann::ordered_json;

/// Accepts a nested array of reals, {"dim", "re", "im"} (im optional), or the
/// string "identity" (needs `dim`). `field` names the entry in errors.
hilbert::Matrix matrix_from_json(const Json& j, std::string_view field, long dim_hint = -1);
Json matrix_to_json(const hilbert::Matrix& m);

/// Throws ValidationError naming the first key of `object` not in `allowed`.
void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

/// Typed lookups that turn JSON type errors into ValidationError(field).
double get_number(const Json& object, const std::string& key, std::string_view context);
double get_number(const Json& object, const std::string& key, std::string_view context,
                  double fallback);
std::uint64_t get_count(const Json& object, const std::string& key, std::string_view context);
std::uint64_t get_count(const Json& object, const std::string& key, std::string_view context,
                        std::uint64_t fallback);
std::vector<double> get_numbers(const Json& object, const std::string& key,
                                std::string_view context);

/// Shortest round-trip decimal; empty for NaN so missing values never read
/// as numbers.
std::string format_double(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Appends a row; throws if the width differs from the header.
  void add_row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Newline-terminated JSON text.
std::string dump_json(const Json& j);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Trajectory container: the magic line "BILDSIM-TRAJ\n", an 8-byte
// little-endian header length, a JSON header, then the columns times,
// positions and (underdamped only) momenta as little-endian doubles in the
// ensemble layout [trajectory][snapshot][particle].
inline constexpr int kTrajectorySchemaVersion = 1;

std::string encode_trajectories(const brownian::TrajectoryEnsemble& e);
brownian::TrajectoryEnsemble decode_trajectories(std::string_view bytes);

/// Long format: trajectory, snapshot, time, particle, x[, p].
std::string trajectories_csv(const brownian::TrajectoryEnsemble& e);

}  // namespace bildsim::io
