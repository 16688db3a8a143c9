#include "gpec/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gpec/error.hpp"

namespace gpec {

namespace {

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  template <typename U>
  void unsigned_le(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
  }
  void f64(double value) { unsigned_le(std::bit_cast<std::uint64_t>(value)); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t offset = 0) : bytes_(bytes), pos_(offset) {}
  template <typename U>
  U unsigned_le() {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return value;
  }
  double f64() { return std::bit_cast<double>(unsigned_le<std::uint64_t>()); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

ByteWriter header(FieldKind kind, FieldDtype dtype, std::size_t points, std::size_t steps, double length,
                  double duration) {
  ByteWriter w;
  w.raw(field_file::magic, sizeof field_file::magic);
  w.unsigned_le<std::uint16_t>(field_file::version);
  w.unsigned_le<std::uint8_t>(static_cast<std::uint8_t>(kind));
  w.unsigned_le<std::uint8_t>(static_cast<std::uint8_t>(dtype));
  w.unsigned_le<std::uint32_t>(static_cast<std::uint32_t>(points));
  w.unsigned_le<std::uint32_t>(static_cast<std::uint32_t>(steps));
  w.f64(length);
  w.f64(duration);
  return w;
}

std::vector<std::uint8_t> finish(ByteWriter& w) {
  const std::uint32_t crc = crc32_of(w.bytes());
  w.unsigned_le<std::uint32_t>(crc);
  return std::move(w.bytes());
}

void write_complex(ByteWriter& w, std::span<const Complex> values) {
  for (const Complex& z : values) {
    w.f64(z.real());
    w.f64(z.imag());
  }
}

std::vector<Complex> read_complex(std::span<const std::uint8_t> bytes, std::size_t count) {
  ByteReader r(bytes, field_file::header_size);
  std::vector<Complex> out(count);
  for (Complex& z : out) {
    const double re = r.f64();
    const double im = r.f64();
    z = Complex(re, im);
  }
  return out;
}

std::vector<double> read_real(std::span<const std::uint8_t> bytes, std::size_t count) {
  ByteReader r(bytes, field_file::header_size);
  std::vector<double> out(count);
  for (double& v : out) v = r.f64();
  return out;
}

void expect(const FieldFileHeader& h, FieldKind kind, FieldDtype dtype) {
  if (h.kind != kind || h.dtype != dtype) {
    throw IoError("field file holds kind " + std::to_string(static_cast<int>(h.kind)) + ", expected " +
                  std::to_string(static_cast<int>(kind)));
  }
}

}  // namespace

std::vector<std::uint8_t> encode(const WaveField& field) {
  ByteWriter w = header(FieldKind::wave_field, FieldDtype::complex128, field.size(), 0, field.grid().length(), 0.0);
  write_complex(w, field.values());
  return finish(w);
}

std::vector<std::uint8_t> encode(const ControlField& field) {
  const FieldKind kind =
      field.kind() == ControlKind::potential ? FieldKind::potential_control : FieldKind::nonlinearity_control;
  ByteWriter w = header(kind, FieldDtype::real64, field.space().size(), field.time().steps(), field.space().length(),
                        field.time().duration());
  for (double v : field.values()) w.f64(v);
  return finish(w);
}

std::vector<std::uint8_t> encode(const Trajectory& trajectory) {
  ByteWriter w = header(FieldKind::trajectory, FieldDtype::complex128, trajectory.space().size(),
                        trajectory.time().steps(), trajectory.space().length(), trajectory.time().duration());
  write_complex(w, trajectory.data());
  return finish(w);
}

FieldFileHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < field_file::header_size + 4) {
    throw IoError("field file truncated (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), field_file::magic, sizeof field_file::magic) != 0) {
    throw IoError("not a field file (bad magic)");
  }
  ByteReader r(bytes, sizeof field_file::magic);
  FieldFileHeader h;
  h.version = r.unsigned_le<std::uint16_t>();
  if (h.version != field_file::version) {
    throw IoError("unsupported field file version " + std::to_string(h.version));
  }
  const auto kind = r.unsigned_le<std::uint8_t>();
  const auto dtype = r.unsigned_le<std::uint8_t>();
  if (kind < 1 || kind > 4 || dtype < 1 || dtype > 2) {
    throw IoError("field file header has an unknown kind or dtype");
  }
  h.kind = static_cast<FieldKind>(kind);
  h.dtype = static_cast<FieldDtype>(dtype);
  h.points = r.unsigned_le<std::uint32_t>();
  h.steps = r.unsigned_le<std::uint32_t>();
  h.length = r.f64();
  h.duration = r.f64();
  if (bytes.size() != field_file::header_size + h.payload_bytes() + 4) {
    throw IoError("field file payload size does not match its header");
  }
  const std::uint32_t stored = ByteReader(bytes, bytes.size() - 4).unsigned_le<std::uint32_t>();
  if (stored != crc32_of(bytes.first(bytes.size() - 4))) {
    throw IoError("field file checksum mismatch");
  }
  return h;
}

WaveField decode_wave_field(std::span<const std::uint8_t> bytes) {
  const FieldFileHeader h = decode_header(bytes);
  expect(h, FieldKind::wave_field, FieldDtype::complex128);
  try {
    return WaveField(SpatialGrid(h.length, h.points), read_complex(bytes, h.points));
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("field file header is inconsistent: ") + e.what());
  }
}

ControlField decode_control(std::span<const std::uint8_t> bytes) {
  const FieldFileHeader h = decode_header(bytes);
  if (h.kind != FieldKind::potential_control && h.kind != FieldKind::nonlinearity_control) {
    throw IoError("field file does not hold a control field");
  }
  expect(h, h.kind, FieldDtype::real64);
  const ControlKind kind = h.kind == FieldKind::potential_control ? ControlKind::potential : ControlKind::nonlinearity;
  try {
    return ControlField(SpatialGrid(h.length, h.points), TimeGrid(h.duration, h.steps), kind,
                        read_real(bytes, h.rows() * h.points));
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("field file header is inconsistent: ") + e.what());
  }
}

Trajectory decode_trajectory(std::span<const std::uint8_t> bytes) {
  const FieldFileHeader h = decode_header(bytes);
  expect(h, FieldKind::trajectory, FieldDtype::complex128);
  try {
    Trajectory out(SpatialGrid(h.length, h.points), TimeGrid(h.duration, h.steps));
    const std::vector<Complex> values = read_complex(bytes, h.rows() * h.points);
    for (std::size_t k = 0; k < h.rows(); ++k) {
      std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(k * h.points), h.points, out.snapshot(k).begin());
    }
    return out;
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("field file header is inconsistent: ") + e.what());
  }
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("cannot read " + path.string());
  }
  return out;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

void write_field(const std::filesystem::path& path, const WaveField& field) { write_bytes(path, encode(field)); }
void write_field(const std::filesystem::path& path, const ControlField& field) { write_bytes(path, encode(field)); }
void write_field(const std::filesystem::path& path, const Trajectory& trajectory) {
  write_bytes(path, encode(trajectory));
}

FieldFileHeader read_header(const std::filesystem::path& path) { return decode_header(read_bytes(path)); }
WaveField read_wave_field(const std::filesystem::path& path) { return decode_wave_field(read_bytes(path)); }
ControlField read_control(const std::filesystem::path& path) { return decode_control(read_bytes(path)); }
Trajectory read_trajectory(const std::filesystem::path& path) { return decode_trajectory(read_bytes(path)); }

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    throw IoError("not a number: '" + text + "'");
  }
  return value;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) {
    throw IoError("CSV header must not be empty");
  }
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw IoError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                  std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(std::span<const double> values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) {
    throw IoError("CSV has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header_.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const { return parse_double(text(row, name)); }

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  return rows_.at(row)[column(name)];
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& row : rows_) line(row);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  const std::string text = str();
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

CsvTable CsvTable::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) {
    throw IoError("CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table(split(line));
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.add_row(split(line));
  }
  return table;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  return parse(std::string(bytes.begin(), bytes.end()));
}

}  // namespace gpec
