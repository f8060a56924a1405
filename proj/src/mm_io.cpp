#include "spz/mm_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace spz {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

bool parse_u64(const std::string& t, std::uint64_t& v) {
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  return ec == std::errc{} && p == t.data() + t.size();
}

bool parse_f64(const std::string& t, double& v) {
  // from_chars for double is not reliable across stdlib versions; strtod is.
  char* end = nullptr;
  v = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && !t.empty();
}

}  // namespace

CooMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw parse_error("empty input", 1);
  ++lineno;
  auto head = tokens(lower(line));
  if (head.size() < 4 || head[0] != "%%matrixmarket" || head[1] != "matrix")
    throw parse_error("malformed MatrixMarket header", lineno);
  if (head[2] != "coordinate")
    throw parse_error("unsupported format '" + head[2] + "' (only coordinate)", lineno);
  const std::string field = head[3];
  if (field != "real" && field != "integer" && field != "pattern")
    throw parse_error("unsupported field '" + field + "'", lineno);
  std::string symmetry = head.size() >= 5 ? head[4] : "general";
  if (symmetry != "general" && symmetry != "symmetric")
    throw parse_error("unsupported symmetry '" + symmetry + "'", lineno);

  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  // Size line: rows cols nnz (comments and blank lines skipped).
  std::uint64_t rows = 0, cols = 0, nnz = 0;
  for (;;) {
    if (!std::getline(in, line)) throw parse_error("missing size line", lineno + 1);
    ++lineno;
    if (blank(line) || line[0] == '%') continue;
    auto ts = tokens(line);
    if (ts.size() != 3 || !parse_u64(ts[0], rows) || !parse_u64(ts[1], cols) ||
        !parse_u64(ts[2], nnz))
      throw parse_error("malformed size line", lineno);
    break;
  }
  if (rows > std::numeric_limits<std::uint32_t>::max() || cols >= kInvalidKey)
    throw parse_error("matrix dimensions exceed 32-bit indexability", lineno);

  CooMatrix m;
  m.rows = static_cast<std::uint32_t>(rows);
  m.cols = static_cast<std::uint32_t>(cols);
  m.entries.reserve(symmetric ? nnz * 2 : nnz);

  std::uint64_t seen = 0;
  while (seen < nnz) {
    if (!std::getline(in, line))
      throw parse_error("expected " + std::to_string(nnz) + " entries, got " +
                            std::to_string(seen),
                        lineno + 1);
    ++lineno;
    if (blank(line) || line[0] == '%') continue;
    auto ts = tokens(line);
    const std::size_t want = pattern ? 2 : 3;
    if (ts.size() < want) throw parse_error("malformed entry", lineno);
    std::uint64_t r = 0, c = 0;
    if (!parse_u64(ts[0], r) || !parse_u64(ts[1], c))
      throw parse_error("malformed entry indices", lineno);
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw parse_error("index out of declared bounds", lineno);
    double v = 1.0;
    if (!pattern && !parse_f64(ts[2], v)) throw parse_error("malformed entry value", lineno);
    const auto ri = static_cast<std::uint32_t>(r - 1);
    const auto ci = static_cast<std::uint32_t>(c - 1);
    m.entries.push_back({ri, ci, static_cast<float>(v)});
    if (symmetric && ri != ci) m.entries.push_back({ci, ri, static_cast<float>(v)});
    ++seen;
  }
  return m;
}

CooMatrix parse_matrix_market(const std::string& text) {
  std::istringstream is(text);
  return parse_matrix_market(is);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows << " " << m.cols << " " << m.nnz() << "\n";
  std::ostringstream line;
  line.precision(9);  // float round-trips at 9 significant digits
  for (std::uint32_t i = 0; i < m.rows; ++i) {
    auto cs = m.row_cols(i);
    auto vs = m.row_vals(i);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      line.str("");
      line << (i + 1) << " " << (cs[k] + 1) << " " << vs[k] << "\n";
      out << line.str();
    }
  }
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'Z', 'C', 'S', 'R', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw error("binary cache truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw error("binary cache truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void save_csr_binary(std::ostream& out, const CsrMatrix& m) {
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, m.rows);
  put_u64(out, m.cols);
  put_u64(out, m.nnz());
  for (auto p : m.row_ptr) put_u64(out, p);
  for (auto c : m.col_idx) put_u32(out, c);
  for (float v : m.values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
  }
}

CsrMatrix load_csr_binary(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw error("binary cache: bad magic/version");
  CsrMatrix m;
  m.rows = static_cast<std::uint32_t>(get_u64(in));
  m.cols = static_cast<std::uint32_t>(get_u64(in));
  const std::uint64_t nnz = get_u64(in);
  m.row_ptr.resize(static_cast<std::size_t>(m.rows) + 1);
  for (auto& p : m.row_ptr) p = get_u64(in);
  m.col_idx.resize(nnz);
  for (auto& c : m.col_idx) c = get_u32(in);
  m.values.resize(nnz);
  for (auto& v : m.values) {
    std::uint32_t bits = get_u32(in);
    std::memcpy(&v, &bits, 4);
  }
  m.validate();
  return m;
}

CsrMatrix load_matrix(const std::string& path) {
  const bool binary = path.size() > 5 && path.substr(path.size() - 5) == ".spzb";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw error("cannot open '" + path + "'");
  if (binary) return load_csr_binary(in);
  return coo_to_csr(parse_matrix_market(in));
}

void save_matrix(const std::string& path, const CsrMatrix& m) {
  const bool binary = path.size() > 5 && path.substr(path.size() - 5) == ".spzb";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw error("cannot open '" + path + "' for writing");
  if (binary)
    save_csr_binary(out, m);
  else
    write_matrix_market(out, m);
}

}  // namespace spz
