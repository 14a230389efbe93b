#include "onda/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace onda {

namespace {

// Explicit little-endian binary encoding, independent of host order.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write file: " + path);
  }

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le(bits);
  }
  void matrix(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  void vector(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }

 private:
  template <typename T>
  void put_le(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    bytes(buf, sizeof(T));
  }
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path)
      : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw DataError("cannot read file: " + path);
  }

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw DataError("truncated file: " + path_);
    }
  }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(get_le<std::uint64_t>()); }
  double f64() {
    const std::uint64_t bits = get_le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
    return m;
  }
  Vector vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }

 private:
  template <typename T>
  T get_le() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(buf[i]) << (8 * i);
    }
    return v;
  }
  std::ifstream in_;
  std::string path_;
};

constexpr char kGraphMagic[8] = {'O', 'N', 'D', 'A', 'G', 'R', 'P', 'H'};
constexpr char kModelMagic[8] = {'O', 'N', 'D', 'A', 'C', 'K', 'P', 'T'};

void check_magic(BinReader& in, const char (&magic)[8], const char* what) {
  char buf[8];
  in.bytes(buf, 8);
  if (std::memcmp(buf, magic, 8) != 0) {
    throw DataError(std::string(what) + ": bad magic header");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ": cannot parse number '" + s + "'");
  }
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix read_numeric_rows(std::istream& in, const std::string& path,
                         Eigen::Index expect_cols) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, path));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(path + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  if (expect_cols > 0 &&
      static_cast<Eigen::Index>(rows.front().size()) != expect_cols) {
    throw DataError(path + ": unexpected column count");
  }
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError(path + ": empty file");
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  Table t;
  t.header = split_csv_line(header_line);
  t.data = read_numeric_rows(in, path, static_cast<Eigen::Index>(t.header.size()));
  return t;
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Matrix& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      out << (j ? "," : "") << format_value(data(i, j));
    }
    out << '\n';
  }
}

void write_signals_csv(const std::string& path, const IrregularGrid& grid,
                       const Matrix& signals) {
  if (signals.cols() != grid.vertex_count()) {
    throw DataError("write_signals_csv: signal width != vertex count");
  }
  std::vector<std::string> header;
  header.reserve(grid.coords.size());
  for (const auto& [r, c] : grid.coords) {
    header.push_back("v" + std::to_string(r) + "_" + std::to_string(c));
  }
  write_table(path, header, signals);
}

Matrix read_signals_csv(const std::string& path) {
  return read_table(path).data;
}

FeatureFile read_features_csv(const std::string& path) {
  const Table t = read_table(path);
  if (t.header.size() < 2 || t.header[0] != "t") {
    throw DataError(path + ": feature file must start with a 't' column");
  }
  FeatureFile f;
  f.has_labels = t.header.size() > 1 && t.header[1] == "label";
  const int skip = f.has_labels ? 2 : 1;
  f.features = t.data.rightCols(t.data.cols() - skip);
  if (f.has_labels) {
    f.labels.resize(t.data.rows());
    for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
      const double y = t.data(i, 1);
      if (y != 1.0 && y != -1.0) {
        throw DataError(path + ": labels must be +1 or -1");
      }
      f.labels[i] = static_cast<int>(y);
    }
  }
  return f;
}

void write_features_csv(const std::string& path, const Matrix& features,
                        const std::vector<int>* labels) {
  if (labels != nullptr &&
      static_cast<Eigen::Index>(labels->size()) != features.rows()) {
    throw DataError("write_features_csv: label count mismatch");
  }
  std::vector<std::string> header{"t"};
  if (labels != nullptr) header.emplace_back("label");
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    header.push_back("f" + std::to_string(j));
  }
  Matrix data(features.rows(), features.cols() + (labels ? 2 : 1));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    data(i, 0) = static_cast<double>(i);
    if (labels != nullptr) data(i, 1) = (*labels)[static_cast<std::size_t>(i)];
    data.row(i).tail(features.cols()) = features.row(i);
  }
  write_table(path, header, data);
}

Mask read_mask(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot read file: " + path);
  char m0 = 0, m1 = 0;
  probe.get(m0).get(m1);
  probe.close();

  Mask mask;
  if (m0 == 'P' && (m1 == '2' || m1 == '5')) {
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    in >> magic;
    auto next_int = [&in, &path]() {
      // Skip whitespace and '#' comment lines between header tokens.
      while (true) {
        const int c = in.peek();
        if (c == '#') {
          std::string junk;
          std::getline(in, junk);
        } else if (std::isspace(c)) {
          in.get();
        } else {
          break;
        }
      }
      long v = -1;
      in >> v;
      if (!in || v < 0) throw DataError(path + ": malformed PGM header");
      return v;
    };
    const long width = next_int();
    const long height = next_int();
    const long maxval = next_int();
    if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
      throw DataError(path + ": unsupported PGM header (8-bit only)");
    }
    mask.bits.resize(height, width);
    if (magic == "P2") {
      for (long r = 0; r < height; ++r) {
        for (long c = 0; c < width; ++c) {
          long v = -1;
          in >> v;
          if (!in || v < 0) throw DataError(path + ": truncated PGM data");
          mask.bits(r, c) = v > 0 ? 1 : 0;
        }
      }
    } else {
      in.get();  // the single whitespace after maxval
      std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
      if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
        throw DataError(path + ": truncated PGM data");
      }
      for (long r = 0; r < height; ++r)
        for (long c = 0; c < width; ++c)
          mask.bits(r, c) = buf[static_cast<std::size_t>(r) * width + c] > 0;
    }
  } else {
    std::ifstream in(path);
    const Matrix values = read_numeric_rows(in, path, 0);
    mask.bits.resize(values.rows(), values.cols());
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double v = values(r, c);
        if (v != 0.0 && v != 1.0) {
          throw DataError(path + ": mask entries must be 0 or 1");
        }
        mask.bits(r, c) = v != 0.0;
      }
    }
  }
  if (mask.region_size() < 1) throw DataError(path + ": mask has empty support");
  return mask;
}

std::vector<Frame> read_frames(const std::string& path, int rows, int cols) {
  namespace fs = std::filesystem;
  std::vector<Frame> frames;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError(path + ": no frame CSV files");
    for (const auto& file : files) {
      std::ifstream in(file);
      if (!in) throw DataError("cannot read file: " + file.string());
      Frame frame{read_numeric_rows(in, file.string(), 0)};
      if (frame.pixels.rows() != rows || frame.pixels.cols() != cols) {
        throw DataError(file.string() + ": frame shape mismatch");
      }
      frames.push_back(std::move(frame));
    }
  } else {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path);
    const Matrix flat =
        read_numeric_rows(in, path, static_cast<Eigen::Index>(rows) * cols);
    frames.reserve(flat.rows());
    for (Eigen::Index i = 0; i < flat.rows(); ++i) {
      Frame frame{Matrix(rows, cols)};
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          frame.pixels(r, c) = flat(i, static_cast<Eigen::Index>(r) * cols + c);
      frames.push_back(std::move(frame));
    }
  }
  return frames;
}

void save_graph_cache(const std::string& path, const GraphCache& cache) {
  const int m = cache.grid.vertex_count();
  if (cache.basis.size() != m) {
    throw DataError("save_graph_cache: grid and basis sizes differ");
  }
  BinWriter out(path);
  out.bytes(kGraphMagic, 8);
  out.u32(1);
  out.u64(static_cast<std::uint64_t>(m));
  for (const auto& [r, c] : cache.grid.coords) {
    out.i64(r);
    out.i64(c);
  }
  out.f64(cache.sigma);
  out.vector(cache.basis.values);
  out.matrix(cache.basis.vectors);
}

GraphCache load_graph_cache(const std::string& path) {
  BinReader in(path);
  check_magic(in, kGraphMagic, "graph cache");
  const std::uint32_t version = in.u32();
  if (version != 1) throw DataError("graph cache: unsupported version");
  const auto m = static_cast<Eigen::Index>(in.u64());
  if (m < 1 || m > 100000) throw DataError("graph cache: implausible size");

  GraphCache cache;
  cache.grid.coords.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto r = static_cast<int>(in.i64());
    const auto c = static_cast<int>(in.i64());
    cache.grid.coords.emplace_back(r, c);
  }
  cache.sigma = in.f64();
  cache.basis.values = in.vector(m);
  cache.basis.vectors = in.matrix(m, m);
  return cache;
}

void save_checkpoint(const std::string& path, const DaState& state) {
  BinWriter out(path);
  out.bytes(kModelMagic, 8);
  out.u32(1);
  const Hyperparams& hp = state.hp;
  out.f64(hp.lambda);
  out.f64(hp.lambda1);
  out.f64(hp.lambda2);
  out.f64(hp.l1);
  out.f64(hp.l2);
  out.f64(hp.w1);
  out.f64(hp.w2);
  out.f64(hp.tol);
  out.f64(hp.delta);
  out.f64(state.kernel.config().bandwidth);  // the effective bandwidth
  out.i64(hp.r);
  out.i64(hp.m);
  out.i64(hp.iters);
  out.i64(state.time_index);
  out.i64(state.n_source());
  out.i64(state.n_target());
  out.i64(state.kernel.feature_dim());
  out.matrix(state.kernel.source_features());
  out.vector(state.source_labels);
  out.matrix(state.kernel.target_features());
  out.matrix(state.factor.v);
  out.matrix(state.w);
  out.matrix(state.w_time_prev);
  out.vector(state.u);
}

DaState load_checkpoint(const std::string& path) {
  BinReader in(path);
  check_magic(in, kModelMagic, "checkpoint");
  const std::uint32_t version = in.u32();
  if (version != 1) throw DataError("checkpoint: unsupported version");

  DaState state;
  Hyperparams hp;
  hp.lambda = in.f64();
  hp.lambda1 = in.f64();
  hp.lambda2 = in.f64();
  hp.l1 = in.f64();
  hp.l2 = in.f64();
  hp.w1 = in.f64();
  hp.w2 = in.f64();
  hp.tol = in.f64();
  hp.delta = in.f64();
  hp.gamma = in.f64();
  hp.r = static_cast<int>(in.i64());
  hp.m = static_cast<int>(in.i64());
  hp.iters = static_cast<int>(in.i64());
  hp.validate();
  state.hp = hp;
  state.time_index = in.i64();
  const auto n_s = static_cast<Eigen::Index>(in.i64());
  const auto n_t = static_cast<Eigen::Index>(in.i64());
  const auto d = static_cast<Eigen::Index>(in.i64());
  if (n_s < 2 || n_t < 0 || d < 1) throw DataError("checkpoint: bad dimensions");

  const Matrix source = in.matrix(n_s, d);
  state.source_labels = in.vector(n_s);
  const Matrix target = in.matrix(n_t, d);
  state.kernel = JointKernel(source, target, KernelConfig{hp.gamma});
  state.factor.v = in.matrix(n_s, hp.r);
  state.w = in.matrix(n_s + n_t, hp.m);
  state.w_time_prev = in.matrix(n_s + n_t, hp.m);
  state.u = in.vector(hp.r + 1);
  rebuild_source_solver(state);
  return state;
}

}  // namespace onda
