#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gpec/field.hpp"
#include "gpec/propagator.hpp"

namespace gpec {

/// Binary field file, little-endian throughout:
///
///   offset  size  content
///        0     5  magic "GPEC1"
///        5     2  u16 format version (1)
///        7     1  u8 kind (FieldKind)
///        8     1  u8 dtype (1 = f64 real, 2 = f64 complex as re, im)
///        9     4  u32 N (spatial points)
///       13     4  u32 steps (0 for a single wave field)
///       17     8  f64 L
///       25     8  f64 T (0 for a single wave field)
///       33     .  payload, row-major: one row of N values for a wave field,
///                 steps + 1 rows otherwise (one per time node)
///      end     4  u32 CRC-32 (zlib polynomial) of all preceding bytes
namespace field_file {
inline constexpr char magic[5] = {'G', 'P', 'E', 'C', '1'};
inline constexpr std::uint16_t version = 1;
inline constexpr std::size_t header_size = 33;
}  // namespace field_file

enum class FieldKind : std::uint8_t {
  wave_field = 1,
  trajectory = 2,
  potential_control = 3,
  nonlinearity_control = 4,
};

enum class FieldDtype : std::uint8_t { real64 = 1, complex128 = 2 };

struct FieldFileHeader {
  std::uint16_t version = field_file::version;
  FieldKind kind = FieldKind::wave_field;
  FieldDtype dtype = FieldDtype::complex128;
  std::uint32_t points = 0;
  std::uint32_t steps = 0;
  double length = 0.0;
  double duration = 0.0;

  std::size_t rows() const noexcept { return kind == FieldKind::wave_field ? 1 : std::size_t{steps} + 1; }
  std::size_t payload_bytes() const noexcept {
    return rows() * points * (dtype == FieldDtype::complex128 ? 16 : 8);
  }
};

std::vector<std::uint8_t> encode(const WaveField& field);
std::vector<std::uint8_t> encode(const ControlField& field);
std::vector<std::uint8_t> encode(const Trajectory& trajectory);

/// Validates magic, version, size and checksum. Throws IoError otherwise.
FieldFileHeader decode_header(std::span<const std::uint8_t> bytes);
WaveField decode_wave_field(std::span<const std::uint8_t> bytes);
ControlField decode_control(std::span<const std::uint8_t> bytes);
Trajectory decode_trajectory(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_field(const std::filesystem::path& path, const WaveField& field);
void write_field(const std::filesystem::path& path, const ControlField& field);
void write_field(const std::filesystem::path& path, const Trajectory& trajectory);
FieldFileHeader read_header(const std::filesystem::path& path);
WaveField read_wave_field(const std::filesystem::path& path);
ControlField read_control(const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

/// Shortest-round-trip text for a double with 17 significant digits.
std::string format_double(double value);

/// Comma-separated table with a mandatory header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  void add_row(std::vector<std::string> cells);
  void add_row(std::span<const double> values);
  /// Index of a header column; throws IoError when absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;

  std::string str() const;
  void write(const std::filesystem::path& path) const;
  static CsvTable parse(const std::string& text);
  static CsvTable read(const std::filesystem::path& path);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a double written by format_double (or any plain decimal). Throws
/// IoError on trailing characters.
double parse_double(const std::string& text);

}  // namespace gpec
