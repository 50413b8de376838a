// SPDX-License-Identifier: Apache-2.0
#include "rmap/grid_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string_view>
#include <system_error>
#include <vector>

#include "rmap/error.hpp"

namespace rmap {

static_assert(std::endian::native == std::endian::little,
              "grid codecs assume a little-endian host");

namespace {

constexpr std::size_t kRmgHeaderBytes = 12;  // magic + two uint32 dims
constexpr std::size_t kMaxCells = std::size_t(1) << 28;
constexpr std::string_view kSamplesHeader = "row,col,psd";

std::string loc(const std::filesystem::path& path, std::size_t offset) {
  return path.string() + " (byte offset " + std::to_string(offset) + ")";
}

void append_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t read_u32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

std::string encode_rmg(const Grid& g) {
  std::string out;
  out.reserve(kRmgHeaderBytes + 4 * g.size());
  out.append("RMG1", 4);
  append_u32(out, static_cast<std::uint32_t>(g.height));
  append_u32(out, static_cast<std::uint32_t>(g.width));
  for (double d : g.values) {
    const float f = static_cast<float>(d);
    char b[4];
    std::memcpy(b, &f, 4);
    out.append(b, 4);
  }
  return out;
}

Grid decode_rmg(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < kRmgHeaderBytes) {
    fail(ErrorKind::format, loc(path, bytes.size()) + ": truncated header, " +
                                std::to_string(bytes.size()) + " bytes total");
  }
  if (bytes.compare(0, 4, "RMG1") != 0) {
    fail(ErrorKind::format, loc(path, 0) + ": bad magic, expected \"RMG1\"");
  }
  const std::uint32_t h = read_u32(bytes, 4);
  const std::uint32_t w = read_u32(bytes, 8);
  if (h == 0 || w == 0 || std::size_t(h) * std::size_t(w) > kMaxCells) {
    fail(ErrorKind::format,
         loc(path, 4) + ": implausible dimensions " + std::to_string(h) + "x" +
             std::to_string(w));
  }
  const std::size_t expected =
      kRmgHeaderBytes + 4 * std::size_t(h) * std::size_t(w);
  if (bytes.size() != expected) {
    fail(ErrorKind::format,
         loc(path, bytes.size()) + ": payload size mismatch, expected " +
             std::to_string(expected) + " bytes for " + std::to_string(h) +
             "x" + std::to_string(w) + ", got " +
             std::to_string(bytes.size()));
  }
  Grid g = Grid::zeros(static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < g.size(); ++i) {
    float f = 0.0f;
    std::memcpy(&f, bytes.data() + kRmgHeaderBytes + 4 * i, 4);
    if (!std::isfinite(f)) {
      fail(ErrorKind::format,
           loc(path, kRmgHeaderBytes + 4 * i) + ": non-finite value");
    }
    g.values[i] = static_cast<double>(f);
  }
  return g;
}

std::string encode_pgm(const Grid& g) {
  std::string out = "P5\n" + std::to_string(g.width) + " " +
                    std::to_string(g.height) + "\n255\n";
  out.reserve(out.size() + g.size());
  for (double v : g.values) {
    const long pixel = std::lround(v * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(pixel)));
  }
  return out;
}

// Tokenizer for the PGM header: skips whitespace and '#' comment lines.
struct PgmCursor {
  const std::string& bytes;
  const std::filesystem::path& path;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t begin = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(
                                     bytes[pos]))) {
      ++pos;
    }
    if (begin == pos) {
      fail(ErrorKind::format, loc(path, begin) + ": unexpected end of header");
    }
    return std::string_view(bytes).substr(begin, pos - begin);
  }

  int int_token(const char* what) {
    const std::size_t begin_before = pos;
    const std::string_view t = token();
    int value = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || value < 0) {
      fail(ErrorKind::format, loc(path, begin_before) + ": bad " + what +
                                  " \"" + std::string(t) + "\"");
    }
    return value;
  }
};

Grid decode_pgm(const std::string& bytes, const std::filesystem::path& path) {
  PgmCursor cur{bytes, path};
  if (cur.token() != "P5") {
    fail(ErrorKind::format, loc(path, 0) + ": not a binary PGM (no P5 magic)");
  }
  const int w = cur.int_token("width");
  const int h = cur.int_token("height");
  const std::size_t maxval_at = cur.pos;
  const int maxval = cur.int_token("maxval");
  if (maxval != 255) {
    fail(ErrorKind::format, loc(path, maxval_at) + ": unsupported maxval " +
                                std::to_string(maxval) + ", expected 255");
  }
  if (w <= 0 || h <= 0 || std::size_t(w) * std::size_t(h) > kMaxCells) {
    fail(ErrorKind::format, loc(path, 3) + ": implausible dimensions " +
                                std::to_string(h) + "x" + std::to_string(w));
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (cur.pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[cur.pos]))) {
    fail(ErrorKind::format,
         loc(path, cur.pos) + ": missing raster separator");
  }
  ++cur.pos;
  const std::size_t need = std::size_t(w) * std::size_t(h);
  if (bytes.size() - cur.pos != need) {
    fail(ErrorKind::format,
         loc(path, cur.pos) + ": raster size mismatch, expected " +
             std::to_string(need) + " bytes, got " +
             std::to_string(bytes.size() - cur.pos));
  }
  Grid g = Grid::zeros(h, w);
  for (std::size_t i = 0; i < need; ++i) {
    g.values[i] =
        static_cast<unsigned char>(bytes[cur.pos + i]) / 255.0;
  }
  return g;
}

double parse_double_at(const std::string& bytes, std::size_t begin,
                       std::size_t end, const std::filesystem::path& path) {
  double value = 0.0;
  const auto res =
      std::from_chars(bytes.data() + begin, bytes.data() + end, value);
  if (res.ec != std::errc() || res.ptr != bytes.data() + end || begin == end) {
    fail(ErrorKind::format,
         loc(path, begin) + ": bad decimal value \"" +
             bytes.substr(begin, end - begin) + "\"");
  }
  if (!std::isfinite(value)) {
    fail(ErrorKind::format, loc(path, begin) + ": non-finite value");
  }
  return value;
}

long parse_long_at(const std::string& bytes, std::size_t begin,
                   std::size_t end, const std::filesystem::path& path) {
  long value = 0;
  const auto res =
      std::from_chars(bytes.data() + begin, bytes.data() + end, value);
  if (res.ec != std::errc() || res.ptr != bytes.data() + end || begin == end) {
    fail(ErrorKind::format,
         loc(path, begin) + ": bad integer value \"" +
             bytes.substr(begin, end - begin) + "\"");
  }
  return value;
}

// Splits one text line into [begin, end) field ranges on ','.
void split_fields(const std::string& bytes, std::size_t line_begin,
                  std::size_t line_end,
                  std::vector<std::pair<std::size_t, std::size_t>>& out) {
  out.clear();
  std::size_t field_begin = line_begin;
  for (std::size_t i = line_begin; i <= line_end; ++i) {
    if (i == line_end || bytes[i] == ',') {
      out.emplace_back(field_begin, i);
      field_begin = i + 1;
    }
  }
}

// Invokes fn(line_begin, line_end) for each '\n'-terminated line; a final
// line without trailing newline is included, a trailing empty line is not.
template <typename Fn>
void for_each_line(const std::string& bytes, Fn&& fn) {
  std::size_t begin = 0;
  while (begin < bytes.size()) {
    std::size_t end = bytes.find('\n', begin);
    if (end == std::string::npos) end = bytes.size();
    fn(begin, end);
    begin = end + 1;
  }
}

Grid decode_csv(const std::string& bytes, const std::filesystem::path& path) {
  std::vector<double> values;
  std::vector<std::pair<std::size_t, std::size_t>> fields;
  int width = -1;
  int rows = 0;
  for_each_line(bytes, [&](std::size_t lb, std::size_t le) {
    split_fields(bytes, lb, le, fields);
    if (width < 0) {
      width = static_cast<int>(fields.size());
    } else if (static_cast<int>(fields.size()) != width) {
      fail(ErrorKind::format,
           loc(path, lb) + ": row " + std::to_string(rows) + " has " +
               std::to_string(fields.size()) + " fields, expected " +
               std::to_string(width));
    }
    for (const auto& [fb, fe] : fields) {
      values.push_back(parse_double_at(bytes, fb, fe, path));
    }
    ++rows;
  });
  if (rows == 0 || width <= 0) {
    fail(ErrorKind::format, loc(path, 0) + ": empty csv grid");
  }
  Grid g;
  g.height = rows;
  g.width = width;
  g.values = std::move(values);
  return g;
}

std::string encode_csv(const Grid& g) {
  std::string out;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (c) out.push_back(',');
      out += format_double(g.at(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

GridFormat format_from_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".rmg") return GridFormat::rmg;
  if (ext == ".pgm") return GridFormat::pgm;
  if (ext == ".csv") return GridFormat::csv;
  fail(ErrorKind::parameter,
       "unknown grid file extension \"" + ext + "\" for " + path.string());
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorKind::io, "cannot open " + path.string() + " for reading");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) {
    fail(ErrorKind::io, "read failure on " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      fail(ErrorKind::io, "cannot create directory " +
                              path.parent_path().string() + ": " +
                              ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    fail(ErrorKind::io, "write failure on " + path.string());
  }
}

Grid read_grid(const std::filesystem::path& path, GridFormat format) {
  const std::string bytes = read_file_bytes(path);
  switch (format) {
    case GridFormat::rmg: return decode_rmg(bytes, path);
    case GridFormat::pgm: return decode_pgm(bytes, path);
    case GridFormat::csv: return decode_csv(bytes, path);
  }
  fail(ErrorKind::parameter, "unknown grid format");
}

void write_grid(const Grid& g, const std::filesystem::path& path,
                GridFormat format) {
  if (format == GridFormat::pgm) {
    validate_normalized(g, "pgm grid");
  } else {
    validate_grid(g, "grid");
  }
  switch (format) {
    case GridFormat::rmg: write_file_bytes(path, encode_rmg(g)); return;
    case GridFormat::pgm: write_file_bytes(path, encode_pgm(g)); return;
    case GridFormat::csv: write_file_bytes(path, encode_csv(g)); return;
  }
  fail(ErrorKind::parameter, "unknown grid format");
}

Grid read_grid(const std::filesystem::path& path) {
  return read_grid(path, format_from_extension(path));
}

void write_grid(const Grid& g, const std::filesystem::path& path) {
  write_grid(g, path, format_from_extension(path));
}

SparseSamples read_samples_csv(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  SparseSamples samples;
  std::vector<std::pair<std::size_t, std::size_t>> fields;
  bool first = true;
  for_each_line(bytes, [&](std::size_t lb, std::size_t le) {
    const std::string_view line = std::string_view(bytes).substr(lb, le - lb);
    if (first) {
      first = false;
      if (line == kSamplesHeader) return;  // optional header
    }
    split_fields(bytes, lb, le, fields);
    if (fields.size() != 3) {
      fail(ErrorKind::format,
           loc(path, lb) + ": sample row needs 3 fields (row,col,psd), got " +
               std::to_string(fields.size()));
    }
    Coord p;
    p.row = static_cast<int>(
        parse_long_at(bytes, fields[0].first, fields[0].second, path));
    p.col = static_cast<int>(
        parse_long_at(bytes, fields[1].first, fields[1].second, path));
    samples.coords.push_back(p);
    samples.psd.push_back(
        parse_double_at(bytes, fields[2].first, fields[2].second, path));
  });
  return samples;
}

void write_samples_csv(const SparseSamples& samples,
                       const std::filesystem::path& path) {
  if (samples.coords.size() != samples.psd.size()) {
    fail(ErrorKind::validation, "sample coord/value count mismatch");
  }
  std::string out(kSamplesHeader);
  out.push_back('\n');
  for (std::size_t i = 0; i < samples.coords.size(); ++i) {
    out += std::to_string(samples.coords[i].row);
    out.push_back(',');
    out += std::to_string(samples.coords[i].col);
    out.push_back(',');
    out += format_double(samples.psd[i]);
    out.push_back('\n');
  }
  write_file_bytes(path, out);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<std::vector<std::string>> read_csv_rows(
    const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::size_t, std::size_t>> fields;
  for_each_line(bytes, [&](std::size_t lb, std::size_t le) {
    split_fields(bytes, lb, le, fields);
    std::vector<std::string> row;
    row.reserve(fields.size());
    for (const auto& [fb, fe] : fields) {
      row.push_back(bytes.substr(fb, fe - fb));
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

}  // namespace rmap
