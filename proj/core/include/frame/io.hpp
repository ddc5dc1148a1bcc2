#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "frame/tensor.hpp"

namespace frame::io {

// Little-endian binary primitives. Streams must be opened in binary mode;
// short reads and write failures throw DataError.
void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
void write_bytes(std::ostream& os, const void* data, std::size_t n);
void write_string(std::ostream& os, const std::string& s); // u32 length + bytes

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
float read_f32(std::istream& is);
double read_f64(std::istream& is);
void read_bytes(std::istream& is, void* data, std::size_t n);
std::string read_string(std::istream& is);

// CSV with stable formatting: doubles printed with up to 9 significant
// digits, so identical values always render identically.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& cols);
    void row(const std::vector<std::string>& cells);
    void flush();

private:
    struct Impl;
    Impl* impl_;
};

std::string format_real(double v);

// Plain (ASCII, P2) portable graymap. Values are clipped to [0, maxval].
void write_pgm(const std::filesystem::path& path, const std::vector<int>& values,
               std::int64_t width, std::int64_t height, int maxval);

// Minimal standalone bar chart, one bar per (label, value).
void write_svg_bars(const std::filesystem::path& path, const std::string& title,
                    const std::vector<std::pair<std::string, double>>& bars);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace frame::io
