#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "gpec/error.hpp"
#include "gpec/io.hpp"
#include "oracles.hpp"

using namespace gpec;

namespace {

const SpatialGrid space(20.0, 16);
const TimeGrid time_grid(2.5, 7);

ControlField sample_control(ControlKind kind) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  ControlField c(space, time_grid, kind);
  for (auto& v : c.values()) v = n(rng);
  c.values()[5] = -0.0;
  c.values()[6] = std::numeric_limits<double>::denorm_min();
  return c;
}

template <typename A, typename B>
bool same_bits(const A& a, const B& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(a[0])) == 0;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("wave field round trip") {
    const WaveField psi(space, oracle::random_complex(16, 1));
    const auto bytes = encode(psi);
    CHECK(bytes.size() == field_file::header_size + 16 * 16 + 4);
    CHECK(std::memcmp(bytes.data(), "GPEC1", 5) == 0);
    const FieldFileHeader header = decode_header(bytes);
    CHECK(header.kind == FieldKind::wave_field);
    CHECK(header.dtype == FieldDtype::complex128);
    CHECK(header.points == 16);
    CHECK(header.steps == 0);
    CHECK(header.length == 20.0);
    const WaveField back = decode_wave_field(bytes);
    CHECK(back.grid() == space);
    CHECK(same_bits(back.values(), psi.values()));
    CHECK(encode(back) == bytes);
  }

  TEST_CASE("control and trajectory round trip") {
    for (ControlKind kind : {ControlKind::potential, ControlKind::nonlinearity}) {
      const ControlField c = sample_control(kind);
      const auto bytes = encode(c);
      CHECK(decode_header(bytes).kind == (kind == ControlKind::potential ? FieldKind::potential_control
                                                                          : FieldKind::nonlinearity_control));
      const ControlField back = decode_control(bytes);
      CHECK(back.kind() == kind);
      CHECK(back.same_grids(c));
      CHECK(same_bits(back.values(), c.values()));
    }
    Trajectory traj(space, time_grid);
    const auto data = oracle::random_complex(16 * 8, 4);
    for (std::size_t k = 0; k < 8; ++k) {
      for (std::size_t j = 0; j < 16; ++j) traj.snapshot(k)[j] = data[k * 16 + j];
    }
    const auto bytes = encode(traj);
    const Trajectory back = decode_trajectory(bytes);
    CHECK(back.time() == time_grid);
    CHECK(same_bits(back.data(), traj.data()));
  }

  TEST_CASE("files on disk") {
    const auto dir = oracle::scratch_dir("io");
    const ControlField c = sample_control(ControlKind::potential);
    write_field(dir / "c.gpec", c);
    CHECK(read_header(dir / "c.gpec").steps == 7);
    CHECK(same_bits(read_control(dir / "c.gpec").values(), c.values()));
    CHECK_THROWS_AS(read_wave_field(dir / "c.gpec"), IoError);
    CHECK_THROWS_AS(read_control(dir / "missing.gpec"), IoError);
  }

  TEST_CASE("corruption is detected") {
    const auto good = encode(WaveField(space, oracle::random_complex(16, 2)));
    auto flipped = good;
    flipped[40] ^= 0x10;
    CHECK_THROWS_AS(decode_wave_field(flipped), IoError);
    auto truncated = good;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_wave_field(truncated), IoError);
    auto magic = good;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_header(magic), IoError);
    CHECK_THROWS_AS(decode_header(std::vector<std::uint8_t>(10, 0)), IoError);
  }

  TEST_CASE("version mismatch is rejected even with a valid checksum") {
    auto bytes = encode(WaveField(space, oracle::random_complex(16, 2)));
    bytes[5] = 2;
    bytes.resize(bytes.size() - 4);
    const std::uint32_t crc = [&] {
      // Bitwise CRC-32 (reflected, polynomial 0xEDB88320).
      std::uint32_t c = 0xFFFFFFFFu;
      for (std::uint8_t b : bytes) {
        c ^= b;
        for (int i = 0; i < 8; ++i) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
      }
      return ~c;
    }();
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
    try {
      decode_header(bytes);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }

  TEST_CASE("doubles in text round trip") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(rng) * std::pow(10.0, i % 40 - 20);
      CHECK(parse_double(format_double(x)) == x);
    }
    CHECK(parse_double(format_double(0.1)) == 0.1);
    CHECK(format_double(0.5) == "0.5");
    CHECK_THROWS_AS(parse_double("1.5x"), IoError);
  }

  TEST_CASE("csv tables") {
    CsvTable t({"a", "b"});
    t.add_row(std::vector<double>{1.0 / 3.0, -2.0});
    t.add_row(std::vector<std::string>{"x", "1e-300"});
    CHECK(t.str() == "a,b\n0.33333333333333331,-2\nx,1e-300\n");
    const CsvTable back = CsvTable::parse(t.str());
    CHECK(back.header() == t.header());
    CHECK(back.rows() == t.rows());
    CHECK(back.number(0, "a") == 1.0 / 3.0);
    CHECK(back.text(1, "a") == "x");
    CHECK_THROWS_AS(back.column("c"), IoError);
    CHECK_THROWS_AS(t.add_row(std::vector<std::string>{"1"}), IoError);
    CHECK_THROWS_AS(CsvTable::parse(""), IoError);
    CHECK_THROWS_AS(CsvTable::parse("a,b\n1\n"), IoError);
  }
}
