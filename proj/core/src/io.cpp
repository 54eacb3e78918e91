#include "fourier_ed/io.hpp"

#include <bit>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <stdexcept>

namespace fourier_ed {

namespace {

const Bytes kMagic{'F', 'E', 'D', 'C'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void corrupt(const std::string& what) {
  throw std::runtime_error("binary container: " + what);
}

void expect_tag(ByteReader& r, const std::string& tag) {
  const std::string got = r.str();
  if (got != tag) corrupt("expected format tag '" + tag + "', found '" + got + "'");
}

}  // namespace

// ------------------------------------------------------------------ bytes

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteWriter::matrix(const Matrix& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) f64(m(i, j));
}

void ByteWriter::vector(const Vector& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) f64(v[i]);
}

void ByteReader::need(std::size_t n) const {
  if (b_.size() - pos_ < n) corrupt("truncated record");
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
                b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return s;
}

Bytes ByteReader::raw(std::size_t n) {
  need(n);
  Bytes out(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
            b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

Matrix ByteReader::matrix() {
  const std::uint64_t r = u64(), c = u64();
  if (r != 0 && c > (b_.size() - pos_) / 8 / r) corrupt("matrix larger than record");
  Matrix m(static_cast<Index>(r), static_cast<Index>(c));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  return m;
}

Vector ByteReader::vector() {
  const std::uint64_t n = u64();
  if (n > (b_.size() - pos_) / 8) corrupt("vector larger than record");
  Vector v(static_cast<Index>(n));
  for (Index i = 0; i < v.size(); ++i) v[i] = f64();
  return v;
}

// -------------------------------------------------------------- container

const Bytes& Container::get(const std::string& tag) const {
  auto it = records_.find(tag);
  if (it == records_.end()) corrupt("missing record '" + tag + "'");
  return it->second;
}

Bytes Container::serialize() const {
  ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(records_.size()));
  for (const auto& [tag, payload] : records_) {
    w.str(tag);
    w.u64(payload.size());
    w.raw(payload);
  }
  return w.take();
}

Container Container::deserialize(const Bytes& bytes) {
  ByteReader r(bytes);
  if (r.raw(kMagic.size()) != kMagic) corrupt("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) corrupt("unsupported version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  Container c;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string tag = r.str();
    const std::uint64_t len = r.u64();
    c.put(tag, r.raw(static_cast<std::size_t>(len)));
  }
  if (!r.done()) corrupt("trailing bytes");
  return c;
}

void Container::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const Bytes b = serialize();
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

Container Container::read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  Bytes b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(b);
}

// ---------------------------------------------------------------- objects

Bytes encode(const BasisSpec& spec) {
  ByteWriter w;
  w.str("spec");
  w.i64(spec.n_features);
  w.i64(spec.n_params);
  w.u32(static_cast<std::uint32_t>(spec.input_freqs.size()));
  for (int f : spec.input_freqs) w.i64(f);
  w.u32(static_cast<std::uint32_t>(spec.param_freqs.size()));
  for (int f : spec.param_freqs) w.i64(f);
  w.u32(spec.input_constant ? 1 : 0);
  w.u32(spec.param_constant ? 1 : 0);
  return w.take();
}

BasisSpec decode_spec(const Bytes& b) {
  ByteReader r(b);
  expect_tag(r, "spec");
  BasisSpec s;
  s.n_features = static_cast<int>(r.i64());
  s.n_params = static_cast<int>(r.i64());
  s.input_freqs.resize(r.u32());
  for (int& f : s.input_freqs) f = static_cast<int>(r.i64());
  s.param_freqs.resize(r.u32());
  for (int& f : s.param_freqs) f = static_cast<int>(r.i64());
  s.input_constant = r.u32() != 0;
  s.param_constant = r.u32() != 0;
  s.validate();
  return s;
}

Bytes encode(const BasisSpec& spec, const SvdFactors& f) {
  ByteWriter w;
  w.str("factors");
  w.i64(f.u.rows());
  w.i64(f.v.rows());
  w.i64(spec.n_features);
  w.i64(spec.n_params);
  w.i64(spec.local_input_dim());
  w.i64(spec.local_param_dim());
  w.matrix(f.u);
  w.vector(f.s);
  w.matrix(f.v);
  return w.take();
}

SvdFactors decode_factors(const Bytes& b, BasisSpec* spec) {
  ByteReader r(b);
  expect_tag(r, "factors");
  const std::int64_t dim = r.i64(), k = r.i64(), n = r.i64(), m = r.i64(), d = r.i64(), dt = r.i64();
  SvdFactors f{r.matrix(), r.vector(), r.matrix()};
  if (f.u.rows() != dim || f.v.rows() != k) corrupt("factor shapes disagree with header");
  if (spec != nullptr) {
    if (spec->n_features != n || spec->n_params != m || spec->local_input_dim() != d ||
        spec->local_param_dim() != dt)
      corrupt("factor header disagrees with basis spec");
  }
  return f;
}

Bytes encode(const TensorTrain& tt) {
  ByteWriter w;
  w.str("tt");
  w.i64(tt.n_sites());
  w.i64(tt.phys);
  w.u32(static_cast<std::uint32_t>(tt.bonds.size()));
  for (int b : tt.bonds) w.i64(b);
  for (const Matrix& c : tt.cores) w.matrix(c);
  return w.take();
}

TensorTrain decode_tensor_train(const Bytes& b) {
  ByteReader r(b);
  expect_tag(r, "tt");
  TensorTrain tt;
  const auto m = static_cast<int>(r.i64());
  tt.phys = static_cast<int>(r.i64());
  tt.bonds.resize(r.u32());
  if (static_cast<int>(tt.bonds.size()) != m + 1) corrupt("tensor train bond count");
  for (int& x : tt.bonds) x = static_cast<int>(r.i64());
  for (int i = 0; i < m; ++i) {
    tt.cores.push_back(r.matrix());
    const Matrix& c = tt.cores.back();
    if (c.rows() != tt.bonds[static_cast<std::size_t>(i)] ||
        c.cols() != static_cast<Index>(tt.phys) * tt.bonds[static_cast<std::size_t>(i + 1)])
      corrupt("tensor train core shape");
  }
  return tt;
}

Bytes encode(const StaircaseMpo& mpo) {
  ByteWriter w;
  w.str("mpo");
  w.i64(mpo.n_sites);
  w.i64(mpo.phys);
  for (const Matrix& bl : mpo.blocks) w.matrix(bl);
  return w.take();
}

StaircaseMpo decode_mpo(const Bytes& b) {
  ByteReader r(b);
  expect_tag(r, "mpo");
  const auto n = static_cast<int>(r.i64());
  const auto d = static_cast<int>(r.i64());
  std::vector<Matrix> blocks;
  for (int i = 0; i + 1 < n; ++i) blocks.push_back(r.matrix());
  return mpo_from_blocks(n, d, std::move(blocks));
}

Bytes encode(const TreeIsometry& tree) {
  ByteWriter w;
  w.str("ttn");
  w.i64(tree.n_leaves);
  w.i64(tree.leaf_dim);
  w.i64(tree.chi);
  w.u32(static_cast<std::uint32_t>(tree.levels.size()));
  for (const auto& level : tree.levels) {
    w.u32(static_cast<std::uint32_t>(level.size()));
    for (const Matrix& node : level) w.matrix(node);
  }
  return w.take();
}

TreeIsometry decode_tree(const Bytes& b) {
  ByteReader r(b);
  expect_tag(r, "ttn");
  TreeIsometry t;
  t.n_leaves = static_cast<int>(r.i64());
  t.leaf_dim = static_cast<int>(r.i64());
  t.chi = static_cast<int>(r.i64());
  t.levels.resize(r.u32());
  for (auto& level : t.levels) {
    level.resize(r.u32());
    for (Matrix& node : level) node = r.matrix();
  }
  return t;
}

// ------------------------------------------------------------------ files

void save_model(const std::string& path, const BasisSpec& spec, const SvdFactors& f) {
  Container c;
  c.put("spec", encode(spec));
  c.put("factors", encode(spec, f));
  c.write(path);
}

SvdFactors load_model(const std::string& path, BasisSpec* spec) {
  const Container c = Container::read(path);
  BasisSpec s = decode_spec(c.get("spec"));
  SvdFactors f = decode_factors(c.get("factors"), &s);
  if (spec != nullptr) *spec = s;
  return f;
}

namespace {

Bytes encode_meta(const Vector& theta_star, int rank, double epsilon, double delta) {
  ByteWriter w;
  w.str("generator");
  w.vector(theta_star);
  w.i64(rank);
  w.f64(epsilon);
  w.f64(delta);
  return w.take();
}

void decode_meta(const Bytes& b, Vector& theta_star, int& rank, double& epsilon, double& delta) {
  ByteReader r(b);
  expect_tag(r, "generator");
  theta_star = r.vector();
  rank = static_cast<int>(r.i64());
  epsilon = r.f64();
  delta = r.f64();
}

}  // namespace

void save_generator(const std::string& path, const DataGenerator& gen, double delta_data) {
  Container c;
  c.put("spec", encode(gen.spec));
  c.put("factors", encode(gen.spec, gen.factors));
  c.put("generator", encode_meta(gen.theta_star, gen.rank, gen.epsilon, delta_data));
  c.write(path);
}

StoredGenerator load_generator(const std::string& path) {
  const Container c = Container::read(path);
  StoredGenerator out;
  out.gen.spec = decode_spec(c.get("spec"));
  out.gen.factors = decode_factors(c.get("factors"), &out.gen.spec);
  decode_meta(c.get("generator"), out.gen.theta_star, out.gen.rank, out.gen.epsilon,
              out.delta_data);
  return out;
}

namespace {

void put_tensorized(Container& c, const TensorizedModel& m) {
  c.put("spec", encode(m.spec));
  ByteWriter s;
  s.str("spectrum");
  s.vector(m.s);
  c.put("spectrum", s.take());
  c.put("tt", encode(m.v));
  if (m.u) c.put("mpo", encode(*m.u));
  if (m.t) c.put("ttn", encode(*m.t));
}

TensorizedModel get_tensorized(const Container& c) {
  TensorizedModel m;
  m.spec = decode_spec(c.get("spec"));
  ByteReader r(c.get("spectrum"));
  expect_tag(r, "spectrum");
  m.s = r.vector();
  m.v = decode_tensor_train(c.get("tt"));
  if (c.has("mpo")) m.u = decode_mpo(c.get("mpo"));
  if (c.has("ttn")) m.t = decode_tree(c.get("ttn"));
  m.validate();
  return m;
}

}  // namespace

void save_tensorized(const std::string& path, const TensorizedModel& model) {
  Container c;
  put_tensorized(c, model);
  c.write(path);
}

TensorizedModel load_tensorized(const std::string& path) {
  return get_tensorized(Container::read(path));
}

void save_tensorized_generator(const std::string& path, const TensorizedGenerator& gen,
                               double delta_data) {
  Container c;
  put_tensorized(c, gen.model);
  c.put("generator", encode_meta(gen.theta_star, gen.rank, gen.epsilon, delta_data));
  c.write(path);
}

StoredTensorizedGenerator load_tensorized_generator(const std::string& path) {
  const Container c = Container::read(path);
  StoredTensorizedGenerator out;
  out.gen.model = get_tensorized(c);
  decode_meta(c.get("generator"), out.gen.theta_star, out.gen.rank, out.gen.epsilon,
              out.delta_data);
  return out;
}

// ------------------------------------------------------------------- text

namespace {

void dump_matrix(std::ostream& os, const char* name, const Matrix& m) {
  os << name << " " << m.rows() << "x" << m.cols() << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    os << "\n";
  }
}

void dump_spec(std::ostream& os, const BasisSpec& s) {
  os << "N=" << s.n_features << " M=" << s.n_params << " d=" << s.local_input_dim()
     << " d~=" << s.local_param_dim() << "\n";
}

}  // namespace

void dump_text(std::ostream& os, const BasisSpec& spec, const SvdFactors& f) {
  const auto flags = os.flags();
  os << std::setprecision(17);
  dump_spec(os, spec);
  os << "D=" << f.u.rows() << " K=" << f.v.rows() << "\n";
  dump_matrix(os, "U", f.u);
  dump_matrix(os, "S", f.s.transpose());
  dump_matrix(os, "V", f.v);
  os.flags(flags);
}

void dump_text(std::ostream& os, const TensorizedModel& model) {
  const auto flags = os.flags();
  os << std::setprecision(17);
  dump_spec(os, model.spec);
  dump_matrix(os, "S", model.s.transpose());
  os << "TT bonds";
  for (int b : model.v.bonds) os << " " << b;
  os << "\n";
  for (std::size_t m = 0; m < model.v.cores.size(); ++m)
    dump_matrix(os, ("core" + std::to_string(m)).c_str(), model.v.cores[m]);
  if (model.u)
    for (std::size_t n = 0; n < model.u->blocks.size(); ++n)
      dump_matrix(os, ("mpo_block" + std::to_string(n)).c_str(), model.u->blocks[n]);
  if (model.t)
    for (std::size_t l = 0; l < model.t->levels.size(); ++l)
      for (std::size_t k = 0; k < model.t->levels[l].size(); ++k)
        dump_matrix(os, ("ttn_" + std::to_string(l) + "_" + std::to_string(k)).c_str(),
                    model.t->levels[l][k]);
  os.flags(flags);
}

}  // namespace fourier_ed
