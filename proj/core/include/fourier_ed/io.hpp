#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fourier_ed/modelgen.hpp"
#include "fourier_ed/tensornet.hpp"

namespace fourier_ed {

using Bytes = std::vector<std::uint8_t>;

/// Little-endian byte encoder.
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void str(const std::string& s);
  /// rows, cols, then entries row-major.
  void matrix(const Matrix& m);
  void vector(const Vector& v);
  void raw(const Bytes& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const Bytes& b) : b_(b) {}
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::string str();
  Matrix matrix();
  Vector vector();
  Bytes raw(std::size_t n);
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const;
  const Bytes& b_;
  std::size_t pos_ = 0;
};

/// Tagged record file: magic "FEDC", version, then (tag, length, payload) records.
class Container {
 public:
  void put(const std::string& tag, Bytes payload) { records_[tag] = std::move(payload); }
  bool has(const std::string& tag) const { return records_.count(tag) != 0; }
  const Bytes& get(const std::string& tag) const;
  const std::map<std::string, Bytes>& records() const { return records_; }

  void write(const std::string& path) const;
  static Container read(const std::string& path);
  Bytes serialize() const;
  static Container deserialize(const Bytes& bytes);

 private:
  std::map<std::string, Bytes> records_;
};

Bytes encode(const BasisSpec& spec);
BasisSpec decode_spec(const Bytes& b);
/// Shape header (D, K, N, M, d, d̃), then U, S, V row-major.
Bytes encode(const BasisSpec& spec, const SvdFactors& f);
SvdFactors decode_factors(const Bytes& b, BasisSpec* spec = nullptr);
/// Tag "tt", M, d̃, bonds, then cores.
Bytes encode(const TensorTrain& tt);
TensorTrain decode_tensor_train(const Bytes& b);
/// Tag "mpo", N, d, then the d²×d² blocks (cores are rebuilt from them).
Bytes encode(const StaircaseMpo& mpo);
StaircaseMpo decode_mpo(const Bytes& b);
/// Tag "ttn", leaves, leaf dim, χ, then nodes level by level.
Bytes encode(const TreeIsometry& tree);
TreeIsometry decode_tree(const Bytes& b);

void save_model(const std::string& path, const BasisSpec& spec, const SvdFactors& f);
SvdFactors load_model(const std::string& path, BasisSpec* spec = nullptr);

struct StoredGenerator {
  DataGenerator gen;
  double delta_data = 0.0;
};
void save_generator(const std::string& path, const DataGenerator& gen, double delta_data = 0.0);
StoredGenerator load_generator(const std::string& path);

void save_tensorized(const std::string& path, const TensorizedModel& model);
TensorizedModel load_tensorized(const std::string& path);

struct StoredTensorizedGenerator {
  TensorizedGenerator gen;
  double delta_data = 0.0;
};
void save_tensorized_generator(const std::string& path, const TensorizedGenerator& gen,
                               double delta_data = 0.0);
StoredTensorizedGenerator load_tensorized_generator(const std::string& path);

/// Human-readable dumps for debugging.
void dump_text(std::ostream& os, const BasisSpec& spec, const SvdFactors& f);
void dump_text(std::ostream& os, const TensorizedModel& model);

}  // namespace fourier_ed
