#include "voisyn/samples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace voisyn {

SampleTable::SampleTable(std::vector<std::string> names, Eigen::MatrixXd draws)
    : names_(std::move(names)), draws_(std::move(draws)) {
  if (static_cast<Eigen::Index>(names_.size()) != draws_.cols()) {
    throw std::invalid_argument("SampleTable: " + std::to_string(names_.size()) +
                                " names but " + std::to_string(draws_.cols()) +
                                " columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) {
      throw std::invalid_argument("SampleTable: duplicate column name '" + n + "'");
    }
  }
  if (!draws_.allFinite()) {
    throw std::invalid_argument("SampleTable: non-finite entries");
  }
}

bool SampleTable::has(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Eigen::Index SampleTable::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw std::out_of_range("SampleTable: no column named '" + name + "'");
  }
  return static_cast<Eigen::Index>(it - names_.begin());
}

Eigen::VectorXd SampleTable::col(const std::string& name) const {
  return draws_.col(index_of(name));
}

SampleTable SampleTable::select(const std::vector<std::string>& names) const {
  Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = draws_.col(index_of(names[j]));
  }
  SampleTable t(names, std::move(out));
  t.meta = meta;
  return t;
}

SampleTable SampleTable::with_columns(const SampleTable& extra) const {
  if (extra.rows() != rows()) {
    throw std::invalid_argument("with_columns: row count mismatch");
  }
  std::vector<std::string> names = names_;
  names.insert(names.end(), extra.names().begin(), extra.names().end());
  Eigen::MatrixXd out(rows(), cols() + extra.cols());
  out.leftCols(cols()) = draws_;
  out.rightCols(extra.cols()) = extra.draws();
  SampleTable t(std::move(names), std::move(out));
  t.meta = meta;
  return t;
}

double quantile_type7(Eigen::VectorXd values, double p) {
  const Eigen::Index n = values.size();
  if (n == 0) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.data(), values.data() + n);
  if (n == 1) return values[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * values[lo] + w * values[hi];
}

double sample_variance(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  if (n < 2) throw std::invalid_argument("variance needs at least 2 draws");
  const double mean = values.mean();
  return (values.array() - mean).square().sum() / static_cast<double>(n - 1);
}

std::vector<SummaryRow> summarize(const SampleTable& table) {
  if (table.rows() == 0 || table.cols() == 0) {
    throw std::invalid_argument("summarize: no draws");
  }
  if (table.rows() < 2) {
    throw std::invalid_argument("summarize: need K >= 2 draws");
  }
  std::vector<SummaryRow> rows;
  rows.reserve(static_cast<std::size_t>(table.cols()));
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    Eigen::VectorXd c = table.draws().col(j);
    SummaryRow r;
    r.name = table.names()[static_cast<std::size_t>(j)];
    r.mean = c.mean();
    r.sd = std::sqrt(sample_variance(c));
    r.median = quantile_type7(c, 0.5);
    r.q025 = quantile_type7(c, 0.025);
    r.q975 = quantile_type7(c, 0.975);
    rows.push_back(r);
  }
  return rows;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::filesystem::path meta_path_for(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

}  // namespace

void write_csv(const SampleTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < table.names().size(); ++j) {
    if (j) out << ',';
    out << table.names()[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      if (j) out << ',';
      out << format_double(table.draws()(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
  if (table.meta) {
    nlohmann::json m;
    m["seed"] = table.meta->seed;
    m["chains"] = table.meta->chains;
    m["burnin"] = table.meta->burnin;
    m["thin"] = table.meta->thin;
    m["scenario"] = table.meta->scenario;
    m["synthetic_fields"] = table.meta->synthetic_fields;
    std::ofstream ms(meta_path_for(path));
    ms << m.dump(2) << '\n';
  }
}

SampleTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) names.push_back(field);
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
      if (!seen.insert(n).second) {
        throw std::runtime_error(path.string() + ":1: duplicate header '" + n + "'");
      }
    }
  }
  const std::size_t ncol = names.size();
  if (ncol == 0) throw std::runtime_error(path.string() + ":1: empty header");

  std::vector<double> flat;
  std::size_t nrow = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
      ++col;
      if (col > ncol) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": row has more than " + std::to_string(ncol) +
                                 " fields");
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": column " + std::to_string(col) +
                                 ": non-numeric cell '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": column " + std::to_string(col) +
                                 ": non-finite cell '" + cell + "'");
      }
      flat.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != ncol) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(ncol) + " fields, got " +
                               std::to_string(col));
    }
    ++nrow;
  }

  Eigen::MatrixXd draws(static_cast<Eigen::Index>(nrow), static_cast<Eigen::Index>(ncol));
  for (std::size_t i = 0; i < nrow; ++i) {
    for (std::size_t j = 0; j < ncol; ++j) {
      draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          flat[i * ncol + j];
    }
  }
  SampleTable t(std::move(names), std::move(draws));

  const auto mp = meta_path_for(path);
  if (std::filesystem::exists(mp)) {
    std::ifstream ms(mp);
    nlohmann::json m = nlohmann::json::parse(ms);
    TableMeta meta;
    meta.seed = m.value("seed", std::uint64_t{0});
    meta.chains = m.value("chains", 0);
    meta.burnin = m.value("burnin", 0);
    meta.thin = m.value("thin", 1);
    meta.scenario = m.value("scenario", std::string{});
    if (m.contains("synthetic_fields")) {
      meta.synthetic_fields = m["synthetic_fields"].get<std::vector<std::string>>();
    }
    t.meta = meta;
  }
  return t;
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "name,mean,sd,median,q2.5,q97.5\n";
  for (const auto& r : rows) {
    out << r.name << ',' << format_double(r.mean) << ',' << format_double(r.sd) << ','
        << format_double(r.median) << ',' << format_double(r.q025) << ','
        << format_double(r.q975) << '\n';
  }
}

}  // namespace voisyn
