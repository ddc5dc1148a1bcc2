#include "frame/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace frame::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms unsupported");

template <typename T>
void write_le(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
    if (!os) throw DataError("write failed");
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (is.gcount() != static_cast<std::streamsize>(sizeof(T))) {
        throw DataError("unexpected end of file");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace

void write_u8(std::ostream& os, std::uint8_t v) { write_le(os, v); }
void write_u32(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_le(os, v); }
void write_f32(std::ostream& os, float v) { write_le(os, v); }
void write_f64(std::ostream& os, double v) { write_le(os, v); }

void write_bytes(std::ostream& os, const void* data, std::size_t n) {
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!os) throw DataError("write failed");
}

void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    if (!s.empty()) write_bytes(os, s.data(), s.size());
}

std::uint8_t read_u8(std::istream& is) { return read_le<std::uint8_t>(is); }
std::uint32_t read_u32(std::istream& is) { return read_le<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return read_le<std::uint64_t>(is); }
float read_f32(std::istream& is) { return read_le<float>(is); }
double read_f64(std::istream& is) { return read_le<double>(is); }

void read_bytes(std::istream& is, void* data, std::size_t n) {
    is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (is.gcount() != static_cast<std::streamsize>(n)) {
        throw DataError("unexpected end of file");
    }
}

std::string read_string(std::istream& is) {
    const std::uint32_t n = read_u32(is);
    if (n > (1u << 20)) throw DataError("implausible string length in file");
    std::string s(n, '\0');
    if (n) read_bytes(is, s.data(), n);
    return s;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream os;
};

CsvWriter::CsvWriter(const std::filesystem::path& path) : impl_(new Impl) {
    impl_->os.open(path);
    if (!impl_->os) throw DataError("cannot open for writing: " + path.string());
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::header(const std::vector<std::string>& cols) { row(cols); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) impl_->os << ',';
        impl_->os << cells[i];
    }
    impl_->os << '\n';
    if (!impl_->os) throw DataError("csv write failed");
}

void CsvWriter::flush() { impl_->os.flush(); }

void write_pgm(const std::filesystem::path& path, const std::vector<int>& values,
               std::int64_t width, std::int64_t height, int maxval) {
    if (static_cast<std::int64_t>(values.size()) != width * height) {
        throw ShapeError("pgm: " + std::to_string(values.size()) + " values for " +
                         std::to_string(width) + "x" + std::to_string(height));
    }
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os << "P2\n" << width << ' ' << height << '\n' << maxval << '\n';
    for (std::int64_t r = 0; r < height; ++r) {
        for (std::int64_t c = 0; c < width; ++c) {
            const int v = std::clamp(values[static_cast<std::size_t>(r * width + c)], 0, maxval);
            os << v << (c + 1 == width ? '\n' : ' ');
        }
    }
    if (!os) throw DataError("pgm write failed");
}

void write_svg_bars(const std::filesystem::path& path, const std::string& title,
                    const std::vector<std::pair<std::string, double>>& bars) {
    const int bar_w = 48, gap = 16, chart_h = 240, margin = 48;
    const int width = margin * 2 + static_cast<int>(bars.size()) * (bar_w + gap);
    const int height = chart_h + margin * 2;
    double vmax = 1e-12;
    for (const auto& [label, v] : bars) vmax = std::max(vmax, std::abs(v));

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    int x = margin;
    for (const auto& [label, v] : bars) {
        const int h = static_cast<int>(std::abs(v) / vmax * chart_h);
        const int y = margin + chart_h - h;
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w << "\" height=\"" << h
            << "\" fill=\"#4878a8\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << margin + chart_h + 16
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << label << "</text>\n";
        svg << "<text x=\"" << x << "\" y=\"" << y - 4
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << format_real(v) << "</text>\n";
        x += bar_w + gap;
    }
    svg << "</svg>\n";
    write_text_file(path, svg.str());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os << text;
    if (!os) throw DataError("write failed: " + path.string());
}

} // namespace frame::io
