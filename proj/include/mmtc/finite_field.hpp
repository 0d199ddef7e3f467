#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/rng.hpp"

namespace mmtc {

using FfElem = std::uint32_t;

struct FieldSpec {
  std::uint32_t p = 2;
  unsigned n = 1;

  std::uint64_t order() const {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < n; ++i) q *= p;
    return q;
  }

  std::string to_string() const {
    if (n == 1) return "GF(" + std::to_string(p) + ")";
    return "GF(" + std::to_string(p) + "^" + std::to_string(n) + ")";
  }

  // Accepts "GF(257)", "GF(2^8)", "gf(4)" (powers of two are read as extensions).
  static FieldSpec parse(const std::string& text) {
    std::string t;
    for (char c : text)
      if (c != ' ') t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (t.size() < 5 || t.rfind("GF(", 0) != 0 || t.back() != ')')
      throw std::invalid_argument("bad field spec '" + text + "'");
    std::string body = t.substr(3, t.size() - 4);
    FieldSpec f;
    auto caret = body.find('^');
    try {
      if (caret != std::string::npos) {
        f.p = static_cast<std::uint32_t>(std::stoul(body.substr(0, caret)));
        f.n = static_cast<unsigned>(std::stoul(body.substr(caret + 1)));
      } else {
        std::uint64_t q = std::stoull(body);
        if (q >= 4 && (q & (q - 1)) == 0) {
          f.p = 2;
          f.n = 0;
          while ((1ULL << f.n) < q) ++f.n;
        } else {
          f.p = static_cast<std::uint32_t>(q);
          f.n = 1;
        }
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad field spec '" + text + "'");
    }
    return f;
  }

  bool operator==(const FieldSpec&) const = default;
};

inline bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

// Primitive polynomials for GF(2^n), bit i = coefficient of x^i.
inline std::uint32_t primitive_polynomial(unsigned n) {
  static constexpr std::uint32_t table[17] = {
      0,      0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x83,   0x11D,
      0x211,  0x409,  0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B};
  if (n < 1 || n > 16) throw std::invalid_argument("GF(2^n) supported for 1 <= n <= 16");
  return table[n];
}

class Field {
 public:
  explicit Field(FieldSpec spec = {}) : spec_(spec) {
    if (!is_prime(spec.p)) throw std::invalid_argument(spec.to_string() + ": characteristic not prime");
    if (spec.n == 0) throw std::invalid_argument("extension degree must be >= 1");
    if (spec.n > 1 && spec.p != 2)
      throw std::invalid_argument(spec.to_string() + ": only prime fields and GF(2^n) are supported");
    if (spec.p >= (1u << 31)) throw std::invalid_argument("characteristic too large");
    q_ = static_cast<std::uint32_t>(spec.order());
    if (spec.p == 2 && spec.n > 1) build_tables();
    if (spec.p != 2 && q_ < (1u << 16)) fastmod_ = UINT64_MAX / q_ + 1;
  }

  const FieldSpec& spec() const { return spec_; }
  std::uint32_t order() const { return q_; }
  bool binary_extension() const { return tables_ != nullptr; }

  FfElem add(FfElem a, FfElem b) const {
    if (spec_.p == 2) return a ^ b;
    std::uint32_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  FfElem neg(FfElem a) const {
    if (spec_.p == 2) return a;
    return a == 0 ? 0 : q_ - a;
  }
  FfElem sub(FfElem a, FfElem b) const { return add(a, neg(b)); }

  FfElem mul(FfElem a, FfElem b) const {
    if (a == 0 || b == 0) return 0;
    if (tables_) {
      const auto& t = *tables_;
      return t.exp[t.log[a] + t.log[b]];
    }
    if (spec_.p == 2) return a & b;
    if (fastmod_) {
      // Lemire's fastmod; valid because a * b fits in 32 bits.
      std::uint64_t low = fastmod_ * (static_cast<std::uint32_t>(a) * b);
      return static_cast<FfElem>((static_cast<unsigned __int128>(low) * q_) >> 64);
    }
    return static_cast<FfElem>((static_cast<std::uint64_t>(a) * b) % q_);
  }

  // dst[j] -= factor * src[j] for j in cols; the row update of Gaussian elimination.
  void sub_scaled(FfElem* dst, const FfElem* src, const std::vector<std::size_t>& cols, FfElem factor) const {
    if (factor == 0) return;
    if (fastmod_) {
      const std::uint32_t nf = q_ - factor;
      for (std::size_t j : cols) {
        std::uint64_t low = fastmod_ * (dst[j] + nf * src[j]);
        dst[j] = static_cast<FfElem>((static_cast<unsigned __int128>(low) * q_) >> 64);
      }
      return;
    }
    for (std::size_t j : cols) dst[j] = sub(dst[j], mul(factor, src[j]));
  }

  FfElem pow(FfElem a, std::uint64_t e) const {
    FfElem r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  FfElem inv(FfElem a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    if (tables_) {
      const auto& t = *tables_;
      return t.exp[(q_ - 1 - t.log[a]) % (q_ - 1)];
    }
    return pow(a, q_ - 2);
  }

  FfElem div(FfElem a, FfElem b) const { return mul(a, inv(b)); }

  bool valid(FfElem a) const { return a < q_; }

  FfElem random(Rng& rng) const { return static_cast<FfElem>(uniform_int(rng, 0, q_ - 1)); }
  FfElem random_nonzero(Rng& rng) const { return static_cast<FfElem>(uniform_int(rng, 1, q_ - 1)); }

  // Generator of the multiplicative group used by the log tables (x for GF(2^n)).
  FfElem generator() const {
    if (tables_) return 2;
    std::vector<std::uint32_t> primes;
    std::uint32_t m = q_ - 1;
    for (std::uint32_t d = 2; d * d <= m; ++d) {
      if (m % d) continue;
      primes.push_back(d);
      while (m % d == 0) m /= d;
    }
    if (m > 1) primes.push_back(m);
    for (FfElem g = 1; g < q_; ++g) {
      bool ok = true;
      for (auto pr : primes)
        if (pow(g, (q_ - 1) / pr) == 1) ok = false;
      if (ok) return g;
    }
    return 1;
  }

 private:
  struct Tables {
    std::vector<std::uint32_t> log;
    std::vector<FfElem> exp;  // doubled so log sums need no reduction
  };

  void build_tables() {
    auto t = std::make_shared<Tables>();
    const std::uint32_t poly = primitive_polynomial(spec_.n);
    t->log.assign(q_, 0);
    t->exp.assign(2 * static_cast<std::size_t>(q_), 0);
    std::uint32_t x = 1;
    for (std::uint32_t i = 0; i < q_ - 1; ++i) {
      if (i > 0 && x == 1) throw std::logic_error("polynomial is not primitive");
      t->exp[i] = x;
      t->log[x] = i;
      x <<= 1;
      if (x & q_) x ^= poly;
    }
    for (std::uint32_t i = q_ - 1; i < 2 * (q_ - 1); ++i) t->exp[i] = t->exp[i - (q_ - 1)];
    tables_ = std::move(t);
  }

  FieldSpec spec_;
  std::uint32_t q_ = 2;
  std::uint64_t fastmod_ = 0;
  std::shared_ptr<const Tables> tables_;
};

class FfMatrix {
 public:
  FfMatrix() = default;
  FfMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  FfMatrix(std::size_t rows, std::size_t cols, std::vector<FfElem> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw std::invalid_argument("FfMatrix: size mismatch");
  }

  static FfMatrix identity(std::size_t n) {
    FfMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static FfMatrix random(const Field& f, std::size_t rows, std::size_t cols, Rng& rng) {
    FfMatrix m(rows, cols);
    for (auto& v : m.data_) v = f.random(rng);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  FfElem& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  FfElem operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<FfElem>& data() const { return data_; }

  void append_row(const std::vector<FfElem>& row) {
    if (rows_ == 0 && cols_ == 0) cols_ = row.size();
    if (row.size() != cols_) throw std::invalid_argument("append_row: width mismatch");
    data_.insert(data_.end(), row.begin(), row.end());
    ++rows_;
  }

  std::vector<FfElem> row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }

  bool operator==(const FfMatrix&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<FfElem> data_;
};

inline void check_entries(const Field& f, const FfMatrix& m) {
  for (FfElem v : m.data())
    if (!f.valid(v)) throw std::invalid_argument("matrix entry outside " + f.spec().to_string());
}

inline FfMatrix ff_mul(const Field& f, const FfMatrix& a, const FfMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("ff_mul: dimension mismatch");
  FfMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      FfElem av = a(i, k);
      if (!av) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = f.add(out(i, j), f.mul(av, b(k, j)));
    }
  return out;
}

struct Rref {
  FfMatrix matrix;
  std::vector<std::size_t> pivot_cols;  // one per nonzero row, in row order
};

// Reduced row echelon form over the first `ncols_eliminate` columns (all if 0).
inline Rref ff_rref(const Field& f, FfMatrix m, std::size_t ncols_eliminate = 0) {
  if (ncols_eliminate == 0 || ncols_eliminate > m.cols()) ncols_eliminate = m.cols();
  Rref out;
  std::vector<std::size_t> nz;
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncols_eliminate && r < m.rows(); ++c) {
    std::size_t piv = r;
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    m.swap_rows(r, piv);
    // Row r is zero left of c, so only its nonzero tail takes part in the updates.
    FfElem s = f.inv(m(r, c));
    nz.clear();
    for (std::size_t j = c; j < m.cols(); ++j)
      if (m(r, j) != 0) {
        m(r, j) = f.mul(m(r, j), s);
        nz.push_back(j);
      }
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      f.sub_scaled(&m(i, 0), &m(r, 0), nz, m(i, c));
    }
    out.pivot_cols.push_back(c);
    ++r;
  }
  out.matrix = std::move(m);
  return out;
}

inline std::size_t ff_rank(const Field& f, const FfMatrix& m) { return ff_rref(f, m).pivot_cols.size(); }

// Unknown j is determined by A x = b iff e_j lies in the row space of A.
inline std::vector<bool> ff_determined_unknowns(const Field& f, const FfMatrix& a) {
  Rref r = ff_rref(f, a);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto c : r.pivot_cols) is_pivot[c] = true;
  std::vector<bool> det(a.cols(), false);
  for (std::size_t i = 0; i < r.pivot_cols.size(); ++i) {
    bool clean = true;
    for (std::size_t c = 0; c < a.cols() && clean; ++c)
      if (!is_pivot[c] && r.matrix(i, c) != 0) clean = false;
    det[r.pivot_cols[i]] = clean;
  }
  return det;
}

struct EquationSystem {
  FfMatrix coefficients;  // B x M
  FfMatrix rhs;           // B x k, row b holds u_b
};

enum class SolveStatus { Solved, RankDeficient, Inconsistent };

struct SolveResult {
  SolveStatus status = SolveStatus::Solved;
  std::size_t rank = 0;
  std::size_t unknowns = 0;
  FfMatrix messages;            // M x k; rows of undetermined unknowns are zero
  std::vector<bool> determined; // per unknown

  bool solved() const { return status == SolveStatus::Solved; }
};

inline SolveResult ff_solve(const Field& f, const EquationSystem& sys) {
  const auto& B = sys.coefficients;
  const auto& U = sys.rhs;
  if (B.rows() != U.rows()) throw std::invalid_argument("ff_solve: row count mismatch");
  check_entries(f, B);
  check_entries(f, U);
  const std::size_t M = B.cols(), k = U.cols();
  FfMatrix aug(B.rows(), M + k);
  for (std::size_t i = 0; i < B.rows(); ++i) {
    for (std::size_t j = 0; j < M; ++j) aug(i, j) = B(i, j);
    for (std::size_t j = 0; j < k; ++j) aug(i, M + j) = U(i, j);
  }
  Rref r = ff_rref(f, aug, M);
  SolveResult out;
  out.unknowns = M;
  out.rank = r.pivot_cols.size();
  for (std::size_t i = out.rank; i < B.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (r.matrix(i, M + j) != 0) out.status = SolveStatus::Inconsistent;

  std::vector<bool> is_pivot(M, false);
  for (auto c : r.pivot_cols) is_pivot[c] = true;
  out.determined.assign(M, false);
  out.messages = FfMatrix(M, k);
  for (std::size_t i = 0; i < out.rank; ++i) {
    bool clean = true;
    for (std::size_t c = 0; c < M && clean; ++c)
      if (!is_pivot[c] && r.matrix(i, c) != 0) clean = false;
    if (!clean) continue;
    std::size_t col = r.pivot_cols[i];
    out.determined[col] = true;
    for (std::size_t j = 0; j < k; ++j) out.messages(col, j) = r.matrix(i, M + j);
  }
  if (out.status == SolveStatus::Inconsistent) return out;
  if (out.rank < M) {
    out.status = SolveStatus::RankDeficient;
    return out;
  }
  if (!(ff_mul(f, B, out.messages) == U)) throw std::logic_error("ff_solve: re-substitution failed");
  return out;
}

inline std::vector<FfElem> precode(const Field& f, const std::vector<FfElem>& msg, FfElem alpha) {
  if (alpha == 0) throw std::invalid_argument("precode: zero coefficient");
  std::vector<FfElem> out(msg.size());
  for (std::size_t i = 0; i < msg.size(); ++i) out[i] = f.mul(msg[i], alpha);
  return out;
}

inline std::vector<FfElem> unprecode(const Field& f, const std::vector<FfElem>& sym, FfElem alpha) {
  return precode(f, sym, f.inv(alpha));
}

// CSV: "field=GF(2^8),rows=R,cols=C" then R lines of decimal coefficients.
inline void write_matrix_csv(std::ostream& os, const Field& f, const FfMatrix& m) {
  os << "field=" << f.spec().to_string() << ",rows=" << m.rows() << ",cols=" << m.cols() << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << "\n";
  }
}

struct FieldMatrix {
  FieldSpec field;
  FfMatrix matrix;
};

inline FieldMatrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("matrix csv: missing header");
  FieldSpec spec;
  std::size_t rows = 0, cols = 0;
  bool have_field = false, have_rows = false, have_cols = false;
  std::stringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("matrix csv: bad header token '" + tok + "'");
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "field") spec = FieldSpec::parse(val), have_field = true;
    else if (key == "rows") rows = std::stoul(val), have_rows = true;
    else if (key == "cols") cols = std::stoul(val), have_cols = true;
    else throw std::runtime_error("matrix csv: unknown header key '" + key + "'");
  }
  if (!have_field || !have_rows || !have_cols) throw std::runtime_error("matrix csv: incomplete header");
  Field f(spec);
  FfMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("matrix csv: missing row " + std::to_string(i + 2));
    std::stringstream rs(line);
    for (std::size_t j = 0; j < cols; ++j) {
      if (!std::getline(rs, tok, ','))
        throw std::runtime_error("matrix csv: short row at line " + std::to_string(i + 2));
      unsigned long v = std::stoul(tok);
      if (v >= f.order()) throw std::runtime_error("matrix csv: entry out of field at line " + std::to_string(i + 2));
      m(i, j) = static_cast<FfElem>(v);
    }
  }
  return {spec, std::move(m)};
}

}  // namespace mmtc
