// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "rmap/grid.hpp"

namespace rmap {

// On-disk grid formats.
//
//   rmg  binary: magic "RMG1", uint32 LE height, uint32 LE width, then
//        height*width IEEE-754 binary32 LE values in row-major order.
//        Lossless for float-representable values; doubles are quantized
//        to the nearest binary32 on write.
//   pgm  binary P5, maxval 255, pixel = round(value * 255). Write-side
//        values must already be normalized to [0, 1].
//   csv  one text row per grid row, comma-separated decimal values,
//        shortest round-trip formatting, '\n' line endings.
enum class GridFormat { rmg, pgm, csv };

// Maps .rmg/.pgm/.csv (case-sensitive) to the format enum; anything else is
// a parameter error.
GridFormat format_from_extension(const std::filesystem::path& path);

Grid read_grid(const std::filesystem::path& path, GridFormat format);
void write_grid(const Grid& g, const std::filesystem::path& path,
                GridFormat format);

// Convenience wrappers that pick the format from the file extension.
Grid read_grid(const std::filesystem::path& path);
void write_grid(const Grid& g, const std::filesystem::path& path);

// Sparse sample sets as CSV with the fixed header "row,col,psd".
// The reader accepts files with or without that header line.
SparseSamples read_samples_csv(const std::filesystem::path& path);
void write_samples_csv(const SparseSamples& samples,
                       const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly the same double.
// All text output in the project goes through this so that reruns are
// byte-identical.
std::string format_double(double value);

// Minimal CSV splitter for the small bookkeeping files (meta, manifest,
// split): '\n' rows, ',' fields, no quoting or escaping.
std::vector<std::vector<std::string>> read_csv_rows(
    const std::filesystem::path& path);

// Whole-file helpers with uniform io error reporting.
std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes);

}  // namespace rmap
