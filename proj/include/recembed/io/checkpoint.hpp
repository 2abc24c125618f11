#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "recembed/model/params.hpp"

namespace recembed::io {

// Self-describing container: a text header per tensor (name, rows, cols)
// followed by its raw row-major payload. Raw bytes round-trip bit-exactly.
//
//   RECEMBED-CKPT 1 <f32|f64> <tensor_count>
//   <meta json line>
//   <name> <rows> <cols>\n<payload>\n   ... per tensor

template <typename S>
const char* scalar_tag() {
  if constexpr (std::is_same_v<S, float>)
    return "f32";
  else
    return "f64";
}

template <typename S>
void save_checkpoint(const std::filesystem::path& path, model::Model<S>& m,
                     const nlohmann::json& meta = nlohmann::json::object()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  auto params = m.params();
  out << "RECEMBED-CKPT 1 " << scalar_tag<S>() << ' ' << params.size() << '\n';
  out << meta.dump() << '\n';
  for (auto& p : params) {
    const auto& v = p.var.value();
    out << p.name << ' ' << v.rows() << ' ' << v.cols() << '\n';
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const S s = v(i, j);
        out.write(reinterpret_cast<const char*>(&s), sizeof(S));
      }
    out << '\n';
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

struct CheckpointHeader {
  std::string scalar;
  std::size_t tensor_count = 0;
  nlohmann::json meta;
};

inline CheckpointHeader read_checkpoint_header(std::istream& in, const std::string& origin) {
  std::string magic;
  int version = 0;
  CheckpointHeader h;
  in >> magic >> version >> h.scalar >> h.tensor_count;
  in.ignore();  // newline
  if (!in || magic != "RECEMBED-CKPT" || version != 1)
    throw std::runtime_error("not a checkpoint file: " + origin);
  std::string meta_line;
  std::getline(in, meta_line);
  h.meta = nlohmann::json::parse(meta_line);
  return h;
}

inline CheckpointHeader peek_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  return read_checkpoint_header(in, path.string());
}

template <typename S>
void load_checkpoint(const std::filesystem::path& path, model::Model<S>& m) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  const auto header = read_checkpoint_header(in, path.string());
  if (header.scalar != scalar_tag<S>())
    throw std::runtime_error("checkpoint precision is " + header.scalar + ", expected " +
                             scalar_tag<S>());
  auto params = m.params();
  if (header.tensor_count != params.size())
    throw std::runtime_error("checkpoint tensor count mismatch in " + path.string());
  for (auto& p : params) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    in >> name >> rows >> cols;
    in.ignore();
    if (!in || name != p.name)
      throw std::runtime_error("checkpoint tensor order mismatch: expected '" + p.name +
                               "', found '" + name + "'");
    auto& v = p.var.value();
    if (rows != v.rows() || cols != v.cols())
      throw std::runtime_error("checkpoint shape mismatch for '" + name + "'");
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        S s;
        in.read(reinterpret_cast<char*>(&s), sizeof(S));
        v(i, j) = s;
      }
    in.ignore();
    if (!in) throw std::runtime_error("checkpoint payload truncated at '" + name + "'");
  }
}

// Standalone matrix container (pretrained embedding tables and similar).
inline void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path.string());
  out << "RECEMBED-MAT 1 f64 " << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
}

inline Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read matrix file: " + path.string());
  std::string magic, scalar;
  int version = 0;
  Eigen::Index rows = 0, cols = 0;
  in >> magic >> version >> scalar >> rows >> cols;
  in.ignore();
  if (!in || magic != "RECEMBED-MAT" || version != 1 || scalar != "f64")
    throw std::runtime_error("not a matrix file: " + path.string());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      m(i, j) = v;
    }
  if (!in) throw std::runtime_error("matrix payload truncated: " + path.string());
  return m;
}

}  // namespace recembed::io
