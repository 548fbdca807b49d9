// Copyright 2026 The rabi-dark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "rabi/export.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace rabi {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> metadata_header(const std::string& command, const ConfigFile& file) {
  std::vector<std::string> h;
  h.push_back(std::string("rabi-dark ") + kVersion);
  h.push_back("command " + command);
  h.push_back("config " + std::filesystem::path(file.source()).filename().string());
  for (const auto& e : file.entries()) h.push_back(e.key + " = " + e.value + (e.line == 0 ? "  (override)" : ""));
  return h;
}

void write_table(std::ostream& os, const std::vector<std::string>& header, const Table& table) {
  for (const auto& line : header) os << "# " << line << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (Index r = 0; r < table.data.rows(); ++r) {
    for (Index c = 0; c < table.data.cols(); ++c) os << (c ? "," : "") << format_number(table.data(r, c));
    os << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

namespace {

std::vector<Index> strided(Index n, int stride) {
  std::vector<Index> rows;
  for (Index k = 0; k < n; k += stride) rows.push_back(k);
  if (rows.empty() || rows.back() != n - 1) rows.push_back(n - 1);
  return rows;
}

}  // namespace

Table trajectory_table(const TrajectoryResult& r, int stride) {
  Table t;
  t.columns.push_back("t_periods");
  const bool fid = r.fidelity.size() > 0;
  if (fid) t.columns.push_back("fidelity");
  for (const auto& n : r.population_names) t.columns.push_back("pop_" + n);
  const auto rows = strided(static_cast<Index>(r.times.size()), stride);
  t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.columns.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index i = rows[k], row = static_cast<Index>(k);
    Index c = 0;
    t.data(row, c++) = time_to_periods(r.times[static_cast<std::size_t>(i)]);
    if (fid) t.data(row, c++) = r.fidelity(i);
    for (Index s = 0; s < r.populations.cols(); ++s) t.data(row, c++) = r.populations(i, s);
  }
  return t;
}

Table open_trajectory_table(const OpenTrajectoryResult& r, int stride) {
  Table t;
  t.columns.push_back("t_periods");
  const bool fid = r.fidelity.size() > 0;
  if (fid) t.columns.push_back("fidelity");
  for (const auto& n : r.population_names) t.columns.push_back("pop_" + n);
  const Index m = r.photon_numbers.cols();
  for (Index i = 0; i < m; ++i) t.columns.push_back("n_" + std::to_string(i));
  for (Index i = 0; i < m; ++i) t.columns.push_back("emission_rate_" + std::to_string(i));
  const auto rows = strided(static_cast<Index>(r.times.size()), stride);
  t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.columns.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index i = rows[k], row = static_cast<Index>(k);
    Index c = 0;
    t.data(row, c++) = time_to_periods(r.times[static_cast<std::size_t>(i)]);
    if (fid) t.data(row, c++) = r.fidelity(i);
    for (Index s = 0; s < r.populations.cols(); ++s) t.data(row, c++) = r.populations(i, s);
    for (Index j = 0; j < m; ++j) t.data(row, c++) = r.photon_numbers(i, j);
    for (Index j = 0; j < m; ++j) t.data(row, c++) = r.emission_rates(i, j);
  }
  return t;
}

Table spectrum_table(const SpectrumSweep& sweep, const std::vector<double>& x) {
  if (static_cast<Index>(x.size()) != sweep.n_points()) throw ShapeError("axis length differs from the sweep");
  Table t;
  t.columns = {"point", "x", "track", "energy", "parity", "photons", "free_occupation"};
  const int nt = sweep.n_tracks();
  t.data.resize(sweep.n_points() * nt, 7);
  Index row = 0;
  for (Index p = 0; p < sweep.n_points(); ++p) {
    for (int k = 0; k < nt; ++k, ++row) {
      t.data(row, 0) = static_cast<double>(p);
      t.data(row, 1) = x[static_cast<std::size_t>(p)];
      t.data(row, 2) = k;
      t.data(row, 3) = sweep.energy(k, p);
      t.data(row, 4) = sweep.track_parity(k);
      t.data(row, 5) = sweep.photon_number.size() ? sweep.photon_number(k, p) : 0.0;
      t.data(row, 6) = sweep.nb_labels.empty() ? 0.0 : sweep.free_occupation(k)(p);
    }
  }
  return t;
}

}  // namespace rabi
