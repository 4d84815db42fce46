#include "symrfm/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace symrfm {

static_assert(std::endian::native == std::endian::little,
              "matrix dumps are defined little-endian; add byte swapping for this platform");

void write_matrix_dump(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open matrix dump for writing: " + path.string());
  out << "MDUMP1\n" << M.rows() << ' ' << M.cols() << " f64 row-major little-endian\n";
  std::vector<double> row(M.cols());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) row[j] = M(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("short write on matrix dump: " + path.string());
}

Eigen::MatrixXd read_matrix_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open matrix dump: " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != "MDUMP1") throw std::runtime_error("bad matrix dump magic in " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream fields(header);
  Eigen::Index rows = 0, cols = 0;
  std::string type, order, endian;
  fields >> rows >> cols >> type >> order >> endian;
  if (!fields || type != "f64" || order != "row-major" || endian != "little-endian")
    throw std::runtime_error("unsupported matrix dump header in " + path.string());

  Eigen::MatrixXd M(rows, cols);
  std::vector<double> row(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated matrix dump: " + path.string());
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = row[j];
  }
  return M;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open csv for writing: " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << M(i, j);
    }
    out << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& gray,
               double lo, double hi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open pgm for writing: " + path.string());
  out << "P5\n" << gray.cols() << ' ' << gray.rows() << "\n255\n";
  const double span = hi - lo;
  std::vector<unsigned char> row(gray.cols());
  for (Eigen::Index i = 0; i < gray.rows(); ++i) {
    for (Eigen::Index j = 0; j < gray.cols(); ++j) {
      double v = span > 0 ? (gray(i, j) - lo) / span : 0.0;
      v = v < 0 ? 0 : (v > 1 ? 1 : v);
      row[j] = static_cast<unsigned char>(v * 255.0 + 0.5);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace symrfm
