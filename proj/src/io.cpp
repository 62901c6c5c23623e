#include "sphereflow/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sphereflow/core.hpp"

namespace sphereflow {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void write_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw std::runtime_error("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_u32le(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_u64le(std::ostream& os, std::uint64_t v) { write_le(os, v); }
std::uint32_t read_u32le(std::istream& is) { return read_le<std::uint32_t>(is); }
std::uint64_t read_u64le(std::istream& is) { return read_le<std::uint64_t>(is); }

void write_f64le(std::ostream& os, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), std::streamsize(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) write_le(os, data[i]);
  }
}

void read_f64le(std::istream& is, double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(data), std::streamsize(count * sizeof(double)));
    if (!is) throw std::runtime_error("unexpected end of file");
  } else {
    for (std::size_t i = 0; i < count; ++i) data[i] = read_le<double>(is);
  }
}

std::string format_double(double v) {
  char buf[48];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void write_mapfile(const std::string& path, const MapFile& f) {
  if (f.payload.size() != f.n_maps * f.n_channels * f.n_pix()) {
    throw ShapeError("write_mapfile: payload length inconsistent with header");
  }
  nlohmann::json header = {
      {"dtype", "f64"},
      {"n_channels", f.n_channels},
      {"n_maps", f.n_maps},
      {"n_side", f.n_side},
      {"ordering", to_string(f.ordering)},
  };
  std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write("SMAP", 4);
  write_u32le(os, 1);
  write_u64le(os, hs.size());
  os.write(hs.data(), std::streamsize(hs.size()));
  write_f64le(os, f.payload.data(), f.payload.size());
  if (!os) throw std::runtime_error("write failed: " + path);
}

MapFile read_mapfile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SMAP", 4) != 0) {
    throw std::runtime_error("not a map file (bad magic): " + path);
  }
  std::uint32_t version = read_u32le(is);
  if (version != 1) throw std::runtime_error("unsupported map file version");
  std::uint64_t hlen = read_u64le(is);
  std::string hs(hlen, '\0');
  is.read(hs.data(), std::streamsize(hlen));
  if (!is) throw std::runtime_error("truncated map file header");
  nlohmann::json header = nlohmann::json::parse(hs);

  MapFile f;
  f.n_side = header.at("n_side").get<int>();
  f.ordering = ordering_from_string(header.at("ordering").get<std::string>());
  f.n_channels = header.at("n_channels").get<std::size_t>();
  f.n_maps = header.at("n_maps").get<std::size_t>();
  if (header.at("dtype").get<std::string>() != "f64") {
    throw std::runtime_error("unsupported map dtype");
  }
  f.payload.resize(f.n_maps * f.n_channels * f.n_pix());
  read_f64le(is, f.payload.data(), f.payload.size());
  return f;
}

void write_spectrum_csv(const std::string& path, const std::vector<double>& c) {
  std::ostringstream os;
  os << "ell,C\n";
  for (std::size_t l = 0; l < c.size(); ++l) os << l << "," << format_double(c[l]) << "\n";
  write_text_file(path, os.str());
}

std::vector<double> read_spectrum_csv(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty spectrum file: " + path);
  std::vector<double> c;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed spectrum row: " + line);
    std::size_t ell = std::stoul(line.substr(0, comma));
    double v = std::stod(line.substr(comma + 1));
    if (ell != c.size()) throw std::runtime_error("spectrum rows must be consecutive from ell=0");
    c.push_back(v);
  }
  return c;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::ostringstream os;
  os << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) os << i << "," << labels[i] << "\n";
  write_text_file(path, os.str());
}

std::vector<int> read_labels_csv(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty labels file: " + path);
  std::vector<int> labels;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed label row: " + line);
    labels.push_back(std::stoi(line.substr(comma + 1)));
  }
  return labels;
}

void write_eigenvalues_csv(const std::string& path, const std::vector<double>& values) {
  std::ostringstream os;
  os << "index,lambda\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << i << "," << format_double(values[i]) << "\n";
  write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(content.data(), std::streamsize(content.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace sphereflow
