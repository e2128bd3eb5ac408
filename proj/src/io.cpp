#include "cbho/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cbho/errors.hpp"

namespace cbho::io {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("table has no column '" + name + "'");
}

std::vector<double> Table::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i)
    os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
    os << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw IoError(path.string() + ": empty table");
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw IoError(path.string() + ": non-numeric cell '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw IoError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table series_table(std::span<const ObservableRecord> series) {
  Table t;
  t.header = {"t", "norm", "mean_n", "sigma_n", "v_g", "k_c"};
  t.rows.reserve(series.size());
  for (const auto& r : series) t.rows.push_back({r.t, r.norm, r.mean_n, r.sigma_n, r.v_g, r.k_c});
  return t;
}

std::vector<ObservableRecord> series_from_table(const Table& table) {
  const std::size_t ct = table.column("t"), cn = table.column("norm"),
                    cm = table.column("mean_n"), cs = table.column("sigma_n"),
                    cv = table.column("v_g"), ck = table.column("k_c");
  std::vector<ObservableRecord> out;
  out.reserve(table.rows.size());
  for (const auto& r : table.rows) out.push_back({r[ct], r[cn], r[cm], r[cs], r[cv], r[ck]});
  return out;
}

void write_snapshots(const std::filesystem::path& path, std::span<const double> coordinates,
                     std::span<const DensitySnapshot> snapshots) {
  Table t;
  t.header.push_back("t");
  for (double c : coordinates) t.header.push_back(fmt(c));
  for (const auto& s : snapshots) {
    std::vector<double> row;
    row.reserve(s.density.size() + 1);
    row.push_back(s.t);
    row.insert(row.end(), s.density.begin(), s.density.end());
    t.rows.push_back(std::move(row));
  }
  write_table(path, t);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace cbho::io
