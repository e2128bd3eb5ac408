#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cbho/observables.hpp"
#include "cbho/propagator.hpp"

namespace cbho::io {

// Decimal with 17 significant digits; parses back to the identical double.
std::string fmt(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

// t,norm,mean_n,sigma_n,v_g,k_c
Table series_table(std::span<const ObservableRecord> series);
std::vector<ObservableRecord> series_from_table(const Table& table);

// Header "t,<coordinate_0>,...", one row per snapshot.
void write_snapshots(const std::filesystem::path& path, std::span<const double> coordinates,
                     std::span<const DensitySnapshot> snapshots);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cbho::io
