#ifndef SPHEREFLOW_IO_HPP
#define SPHEREFLOW_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sphereflow/sampling.hpp"

namespace sphereflow {

// Little-endian scalar/array serialization (portable, byte-exact).
void write_u32le(std::ostream& os, std::uint32_t v);
void write_u64le(std::ostream& os, std::uint64_t v);
std::uint32_t read_u32le(std::istream& is);
std::uint64_t read_u64le(std::istream& is);
void write_f64le(std::ostream& os, const double* data, std::size_t count);
void read_f64le(std::istream& is, double* data, std::size_t count);

// Binary container for batches of full-sphere maps. Layout: magic `SMAP`,
// version u32, u64 header length, JSON header {n_side, ordering, n_channels,
// n_maps, dtype:"f64"}, then little-endian float64 payload in map-major,
// channel-major, pixel order.
struct MapFile {
  int n_side = 1;
  Ordering ordering = Ordering::NESTED;
  std::size_t n_channels = 1;
  std::size_t n_maps = 0;
  std::vector<double> payload;

  std::size_t n_pix() const { return std::size_t(12) * std::size_t(n_side) * std::size_t(n_side); }
  double* map_channel(std::size_t map, std::size_t channel) {
    return payload.data() + (map * n_channels + channel) * n_pix();
  }
  const double* map_channel(std::size_t map, std::size_t channel) const {
    return payload.data() + (map * n_channels + channel) * n_pix();
  }
};

void write_mapfile(const std::string& path, const MapFile& f);
MapFile read_mapfile(const std::string& path);

// `ell,C` rows with a header line.
void write_spectrum_csv(const std::string& path, const std::vector<double>& c);
std::vector<double> read_spectrum_csv(const std::string& path);

// `index,label` rows with a header line.
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path);

// `index,lambda` rows with a header line.
void write_eigenvalues_csv(const std::string& path, const std::vector<double>& values);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace sphereflow

#endif  // SPHEREFLOW_IO_HPP
