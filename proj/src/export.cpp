#include "spgg/export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spgg {

namespace {

void append_fixed(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string format_r(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", r);
  return buf;
}

std::string format_timeseries(const Trajectory& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  std::string out = "iteration,coop_fraction,def_fraction,mean_reward,policy_loss,value_loss,entropy\n";
  for (const auto& row : trajectory) {
    out += std::to_string(row.iteration);
    for (double v : {row.coop_fraction, 1.0 - row.coop_fraction, row.mean_reward, row.policy_loss,
                     row.value_loss, row.entropy}) {
      out += ',';
      append_fixed(out, v);
    }
    out += '\n';
  }
  return out;
}

void export_timeseries(const Trajectory& trajectory, const std::filesystem::path& path) {
  write_text(path, format_timeseries(trajectory));
}

std::string format_snapshot(const StrategyGrid& grid) {
  std::string out = "P5\n" + std::to_string(grid.side()) + " " + std::to_string(grid.side()) + "\n255\n";
  for (auto c : grid.cells()) out += static_cast<char>(c ? 255 : 0);
  return out;
}

void export_snapshot(const StrategyGrid& grid, const std::filesystem::path& path) {
  write_text(path, format_snapshot(grid));
}

StrategyGrid read_snapshot(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w != h || maxval != 255) throw std::runtime_error("unsupported PGM " + path.string());
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (data.size() != offset + w * h) throw std::runtime_error("PGM size mismatch " + path.string());
  std::vector<std::uint8_t> cells(w * h);
  for (std::size_t i = 0; i < cells.size(); ++i)
    cells[i] = static_cast<unsigned char>(data[offset + i]) >= 128 ? 1 : 0;
  return StrategyGrid(w, std::move(cells));
}

std::string format_payoff(const PayoffGrid& field) {
  std::string out;
  for (std::size_t row = 0; row < field.side; ++row) {
    for (std::size_t col = 0; col < field.side; ++col) {
      if (col) out += ',';
      append_fixed(out, field.values[row * field.side + col]);
    }
    out += '\n';
  }
  return out;
}

void export_payoff(const PayoffGrid& field, const std::filesystem::path& path) {
  write_text(path, format_payoff(field));
}

PayoffGrid read_payoff(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  PayoffGrid field;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ls, cell, ',')) {
      field.values.push_back(std::stod(cell));
      ++cols;
    }
    if (rows == 0) field.side = cols;
    if (cols != field.side) throw std::runtime_error("ragged payoff CSV " + path.string());
    ++rows;
  }
  if (rows != field.side) throw std::runtime_error("payoff CSV is not square " + path.string());
  return field;
}

std::string format_summary(std::span<const SummaryRow> rows) {
  std::string out = "algorithm,r,mean,std,ci_low,ci_high,n\n";
  for (const auto& row : rows) {
    out += row.algorithm;
    for (double v : {row.stats.r, row.stats.mean, row.stats.std, row.stats.ci_low, row.stats.ci_high}) {
      out += ',';
      append_fixed(out, v);
    }
    out += ',' + std::to_string(row.stats.n) + '\n';
  }
  return out;
}

std::string format_finals(std::span<const FinalRecord> rows) {
  std::string out = "algorithm,r,run,seed,final_coop_fraction\n";
  for (const auto& row : rows) {
    out += row.algorithm + ',';
    append_fixed(out, row.r);
    out += ',' + std::to_string(row.run) + ',' + std::to_string(row.seed) + ',';
    append_fixed(out, row.final_coop_fraction);
    out += '\n';
  }
  return out;
}

}  // namespace spgg
