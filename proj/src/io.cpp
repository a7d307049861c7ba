#include "qcpulse/io.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qcp {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0;
  size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double parse_double(const std::string& token, const std::string& path, int line_number) {
  size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(line_number) +
                             ": expected a number, got '" + token + "'");
  }
  if (consumed != token.size()) {
    throw std::runtime_error(path + ":" + std::to_string(line_number) +
                             ": trailing characters after number '" + token + "'");
  }
  return value;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_controls_csv(const std::string& path, const ControlSequence& u) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "step,t_start";
  for (int j = 0; j < u.n_controllers(); ++j) out << ",u_" << (j + 1);
  out << "\n";
  for (int k = 0; k < u.n_steps(); ++k) {
    out << k << "," << format_double(k * u.dt);
    for (int j = 0; j < u.n_controllers(); ++j) {
      out << "," << format_double(u.values(j, k));
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

ControlSequence read_controls_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  const std::vector<std::string> header = split_csv_row(line);
  if (header.size() < 3 || header[0] != "step" || header[1] != "t_start") {
    throw std::runtime_error(path + ":1: expected header 'step,t_start,u_1,...'");
  }
  const int n = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < n; ++j) {
    const std::string expected = "u_" + std::to_string(j + 1);
    if (header[static_cast<size_t>(j) + 2] != expected) {
      throw std::runtime_error(path + ":1: expected column '" + expected + "', got '" +
                               header[static_cast<size_t>(j) + 2] + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> starts;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    const double step_index = parse_double(fields[0], path, line_number);
    if (step_index != static_cast<double>(rows.size())) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": step numbers must count up from zero");
    }
    starts.push_back(parse_double(fields[1], path, line_number));
    std::vector<double> row(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      row[static_cast<size_t>(j)] = parse_double(fields[static_cast<size_t>(j) + 2], path, line_number);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw std::runtime_error(path + ": need at least two steps to recover the step length");
  }

  ControlSequence u;
  u.dt = starts[1] - starts[0];
  if (!(u.dt > 0.0)) {
    throw std::runtime_error(path + ": t_start column must increase");
  }
  u.values = Eigen::MatrixXd(n, static_cast<Eigen::Index>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    for (int j = 0; j < n; ++j) {
      u.values(j, static_cast<Eigen::Index>(k)) = rows[k][static_cast<size_t>(j)];
    }
  }
  return u;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  ConfigMap config;
  std::string section;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                 ": unterminated section header");
      }
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) {
        throw std::runtime_error(path + ":" + std::to_string(line_number) + ": empty section name");
      }
      config[section];  // a section may be present but empty
      continue;
    }
    const size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": expected 'key = value'");
    }
    if (section.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": key outside any [section]");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": empty key");
    }
    auto [it, inserted] = config[section].emplace(key, value);
    (void)it;
    if (!inserted) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": duplicate key '" +
                               key + "' in [" + section + "]");
    }
  }
  return config;
}

void ensure_writable(const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw std::runtime_error("'" + path + "' already exists; pass --force to overwrite");
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

}  // namespace qcp
