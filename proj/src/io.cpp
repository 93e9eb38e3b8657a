#include "slra/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace slra {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

constexpr char kMagic[4] = {'S', 'L', 'R', 'A'};

}  // namespace

void write_matrix_text(const DenseMatrix& a, const std::string& path) {
  auto f = open_out(path);
  f << a.rows() << ' ' << a.cols() << '\n';
  f << std::setprecision(17);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (j) f << ' ';
      f << a(i, j);
    }
    f << '\n';
  }
}

DenseMatrix read_matrix_text(const std::string& path) {
  auto f = open_in(path);
  int n = 0, d = 0;
  if (!(f >> n >> d)) throw std::runtime_error("bad matrix header in " + path);
  if (n < 0 || d < 0) throw std::runtime_error("negative dimension in " + path);
  std::vector<double> data(std::size_t(n) * d);
  for (double& v : data)
    if (!(f >> v)) throw std::runtime_error("truncated matrix payload in " + path);
  return DenseMatrix(n, d, std::move(data));
}

void write_matrix_binary(const DenseMatrix& a, const std::string& path) {
  auto f = open_out(path, true);
  f.write(kMagic, 4);
  std::uint32_t version = 1;
  std::uint64_t rows = a.rows(), cols = a.cols();
  f.write(reinterpret_cast<const char*>(&version), sizeof version);
  f.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  f.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  f.write(reinterpret_cast<const char*>(a.data().data()),
          std::streamsize(a.data().size() * sizeof(double)));
}

DenseMatrix read_matrix_binary(const std::string& path) {
  auto f = open_in(path, true);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad magic in " + path);
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof version);
  f.read(reinterpret_cast<char*>(&rows), sizeof rows);
  f.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!f || version != 1) throw std::runtime_error("unsupported container version in " + path);
  std::vector<double> data(std::size_t(rows * cols));
  f.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
  if (!f) throw std::runtime_error("truncated payload in " + path);
  return DenseMatrix(int(rows), int(cols), std::move(data));
}

void write_factor(const SparseRankKFactor& fac, int n, int d, const std::string& path) {
  auto f = open_out(path);
  f << std::setprecision(17);
  f << fac.k << ' ' << fac.s << ' ' << n << ' ' << d << '\n';
  for (const auto& c : fac.components) {
    f << c.tau << '\n';
    for (std::size_t i = 0; i < c.x.idx.size(); ++i)
      f << (i ? " " : "") << c.x.idx[i] << ':' << c.x.val[i];
    f << '\n';
    for (std::size_t i = 0; i < c.y.idx.size(); ++i)
      f << (i ? " " : "") << c.y.idx[i] << ':' << c.y.val[i];
    f << '\n';
  }
}

namespace {

SparseVec parse_sparse_line(const std::string& line) {
  SparseVec v;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) throw std::runtime_error("bad idx:val token: " + tok);
    v.idx.push_back(std::stoi(tok.substr(0, colon)));
    v.val.push_back(std::stod(tok.substr(colon + 1)));
  }
  return v;
}

}  // namespace

SparseRankKFactor read_factor(const std::string& path, int* n_out, int* d_out) {
  auto f = open_in(path);
  SparseRankKFactor fac;
  int n = 0, d = 0;
  std::string header;
  if (!std::getline(f, header)) throw std::runtime_error("empty factor file " + path);
  {
    std::istringstream ss(header);
    if (!(ss >> fac.k >> fac.s >> n >> d)) throw std::runtime_error("bad factor header in " + path);
  }
  std::string tau_line, x_line, y_line;
  while (std::getline(f, tau_line)) {
    if (tau_line.empty()) continue;
    if (!std::getline(f, x_line) || !std::getline(f, y_line))
      throw std::runtime_error("truncated factor component in " + path);
    RankOneComponent c;
    c.tau = std::stod(tau_line);
    c.x = parse_sparse_line(x_line);
    c.y = parse_sparse_line(y_line);
    fac.components.push_back(std::move(c));
  }
  if (n_out) *n_out = n;
  if (d_out) *d_out = d;
  return fac;
}

void write_stream(const std::vector<StreamUpdate>& updates, const std::string& path) {
  auto f = open_out(path);
  f << std::setprecision(17);
  for (const auto& u : updates) f << u.row << ' ' << u.col << ' ' << u.delta << '\n';
}

std::vector<StreamUpdate> read_stream(const std::string& path) {
  auto f = open_in(path);
  std::vector<StreamUpdate> updates;
  std::string line;
  while (std::getline(f, line)) {
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ss(line);
    StreamUpdate u;
    if (!(ss >> u.row >> u.col >> u.delta))
      throw std::runtime_error("bad stream line: " + line);
    updates.push_back(u);
  }
  return updates;
}

std::vector<StreamUpdate> matrix_to_stream(const DenseMatrix& a) {
  std::vector<StreamUpdate> updates;
  updates.reserve(std::size_t(a.rows()) * a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) updates.push_back({i, j, a(i, j)});
  return updates;
}

}  // namespace slra
