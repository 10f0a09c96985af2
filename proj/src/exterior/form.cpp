#include "g2flow/form.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <mutex>
#include <string>

namespace g2flow {

namespace {

void require_dim(int n) {
  if (n < 1 || n > kMaxFrameDim) throw DimensionError("frame dimension must be 1..7");
}

}  // namespace

BasisTable::BasisTable(int n, int k) : slots_(1u << n, -1) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > n) return;
  while (true) {
    IndexMask m = 0;
    for (int i : idx) m |= 1u << i;
    slots_[m] = static_cast<int>(masks_.size());
    masks_.push_back(m);
    int p = k - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == n - k + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
}

const BasisTable& BasisTable::get(int n, int k) {
  static std::array<std::array<const BasisTable*, kMaxFrameDim + 1>, kMaxFrameDim + 1> tables{};
  static std::once_flag once;
  std::call_once(once, [] {
    for (int nn = 1; nn <= kMaxFrameDim; ++nn) {
      for (int kk = 0; kk <= nn; ++kk) tables[nn][kk] = new BasisTable(nn, kk);  // lives for the process
    }
  });
  require_dim(n);
  if (k < 0 || k > n) throw DimensionError("form degree out of range");
  return *tables[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

std::vector<int> BasisTable::indices(int slot) const {
  std::vector<int> out;
  IndexMask m = mask(slot);
  for (int i = 0; m != 0; ++i, m >>= 1) {
    if (m & 1u) out.push_back(i);
  }
  return out;
}

int wedge_sign(IndexMask a, IndexMask b) {
  if (a & b) return 0;
  int swaps = 0;
  for (IndexMask rest = b; rest != 0; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

Form::Form(int n, int k) : n_(n), k_(k) {
  c_.assign(static_cast<std::size_t>(BasisTable::get(n, k).size()), Coefficient(0.0));
}

Form Form::monomial(int n, std::span<const int> indices, const Coefficient& c) {
  Form f(n, static_cast<int>(indices.size()));
  // Bubble sort tracking the permutation sign; repeated indices give zero.
  std::vector<int> idx(indices.begin(), indices.end());
  int sign = 1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= n) throw DimensionError("frame index out of range");
    for (std::size_t j = 0; j + 1 < idx.size() - i; ++j) {
      if (idx[j] > idx[j + 1]) {
        std::swap(idx[j], idx[j + 1]);
        sign = -sign;
      }
    }
  }
  IndexMask m = 0;
  for (int i : idx) {
    if (m & (1u << i)) return f;
    m |= 1u << i;
  }
  f.at_mask(m) = sign > 0 ? c : -c;
  return f;
}

Form Form::monomial(int n, std::initializer_list<int> indices, const Coefficient& c) {
  return monomial(n, std::span<const int>(indices.begin(), indices.size()), c);
}

Form Form::parse(int n, std::string_view expr) {
  std::vector<std::pair<double, std::vector<int>>> terms;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < expr.size() && std::isspace(static_cast<unsigned char>(expr[pos]))) ++pos;
  };
  int degree = -1;
  while (true) {
    skip();
    if (pos >= expr.size()) break;
    double sign = 1.0;
    while (pos < expr.size() && (expr[pos] == '+' || expr[pos] == '-')) {
      if (expr[pos] == '-') sign = -sign;
      ++pos;
      skip();
    }
    double scale = 1.0;
    std::vector<int> idx;
    if (pos < expr.size() && (std::isdigit(static_cast<unsigned char>(expr[pos])) || expr[pos] == '.')) {
      std::size_t used = 0;
      scale = std::stod(std::string(expr.substr(pos)), &used);
      pos += used;
      skip();
      if (pos < expr.size() && expr[pos] == '*') {
        ++pos;
        skip();
      } else if (pos < expr.size() && expr[pos] == 'e') {
        throw DimensionError("expected '*' between scalar and monomial");
      }
    }
    if (pos < expr.size() && expr[pos] == 'e') {
      ++pos;
      while (pos < expr.size() && std::isdigit(static_cast<unsigned char>(expr[pos]))) {
        idx.push_back(expr[pos] - '1');
        ++pos;
      }
      if (idx.empty()) throw DimensionError("monomial without indices");
    }
    const int deg = static_cast<int>(idx.size());
    if (degree >= 0 && deg != degree) throw DimensionError("mixed degrees in form expression");
    degree = deg;
    terms.emplace_back(sign * scale, std::move(idx));
  }
  if (degree < 0) throw DimensionError("empty form expression");
  Form f(n, degree);
  for (const auto& [s, idx] : terms) f += monomial(n, std::span<const int>(idx), s);
  return f;
}

Coefficient Form::coeff(std::initializer_list<int> indices) const {
  IndexMask m = 0;
  for (int i : indices) m |= 1u << i;
  if (std::popcount(m) != k_ || static_cast<int>(indices.size()) != k_) {
    throw DimensionError("index list does not match form degree");
  }
  return at_mask(m);
}

const Coefficient& Form::at_mask(IndexMask m) const {
  const int s = BasisTable::get(n_, k_).slot(m);
  if (s < 0) throw DimensionError("mask does not match form degree");
  return c_[static_cast<std::size_t>(s)];
}

Coefficient& Form::at_mask(IndexMask m) {
  const int s = BasisTable::get(n_, k_).slot(m);
  if (s < 0) throw DimensionError("mask does not match form degree");
  return c_[static_cast<std::size_t>(s)];
}

const Coefficient& Form::top() const {
  if (k_ != n_) throw DimensionError("top() requires a top-degree form");
  return c_[0];
}

GridPtr Form::grid() const {
  GridPtr g;
  for (const auto& c : c_) g = common_grid(g, c.grid());
  return g;
}

bool Form::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](const Coefficient& c) { return c.is_zero(); });
}

double Form::max_abs() const {
  double m = 0.0;
  for (const auto& c : c_) m = std::max(m, c.max_abs());
  return m;
}

Form Form::at_sample(int i) const {
  Form f = *this;
  for (auto& c : f.c_) c = c.at_sample(i);
  return f;
}

void Form::check_same_shape(const Form& o) const {
  if (n_ != o.n_ || k_ != o.k_) throw DimensionError("form shape mismatch");
}

Form& Form::operator+=(const Form& o) {
  check_same_shape(o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Form& Form::operator-=(const Form& o) {
  check_same_shape(o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Form& Form::operator*=(const Coefficient& s) {
  for (auto& c : c_) c *= s;
  return *this;
}

Vector frame_vector(int n, int i, const Coefficient& scale) {
  Vector v(static_cast<std::size_t>(n), Coefficient(0.0));
  v[static_cast<std::size_t>(i)] = scale;
  return v;
}

Form wedge(const Form& a, const Form& b) {
  if (a.dim() != b.dim()) throw DimensionError("wedge of forms on different frames");
  const int n = a.dim();
  const int k = a.degree() + b.degree();
  if (k > n) throw DimensionError("wedge degree exceeds frame dimension");
  Form out(n, k);
  for (int i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    const IndexMask ma = a.mask(i);
    for (int j = 0; j < b.size(); ++j) {
      if (b[j].is_zero()) continue;
      const IndexMask mb = b.mask(j);
      const int s = wedge_sign(ma, mb);
      if (s == 0) continue;
      Coefficient term = a[i] * b[j];
      if (s > 0) {
        out.at_mask(ma | mb) += term;
      } else {
        out.at_mask(ma | mb) -= term;
      }
    }
  }
  return out;
}

Form contract(int i, const Form& a) {
  if (a.degree() < 1) throw DimensionError("contraction of a 0-form");
  if (i < 0 || i >= a.dim()) throw DimensionError("frame index out of range");
  Form out(a.dim(), a.degree() - 1);
  const IndexMask bit = 1u << i;
  for (int s = 0; s < a.size(); ++s) {
    const IndexMask m = a.mask(s);
    if (!(m & bit) || a[s].is_zero()) continue;
    const int before = std::popcount(m & (bit - 1));
    if (before & 1) {
      out.at_mask(m & ~bit) -= a[s];
    } else {
      out.at_mask(m & ~bit) += a[s];
    }
  }
  return out;
}

Form contract(const Vector& v, const Form& a) {
  if (static_cast<int>(v.size()) != a.dim()) throw DimensionError("vector/frame dimension mismatch");
  if (a.degree() < 1) throw DimensionError("contraction of a 0-form");
  Form out(a.dim(), a.degree() - 1);
  for (int i = 0; i < a.dim(); ++i) {
    if (v[static_cast<std::size_t>(i)].is_zero()) continue;
    out += v[static_cast<std::size_t>(i)] * contract(i, a);
  }
  return out;
}

Form drop_index(const Form& a, int removed) {
  const int n = a.dim();
  const IndexMask bit = 1u << removed;
  Form out(n - 1, a.degree());
  for (int s = 0; s < a.size(); ++s) {
    const IndexMask m = a.mask(s);
    if (m & bit) {
      if (!a[s].is_zero() && a[s].max_abs() > 0.0) {
        throw DimensionError("drop_index: form has a component along the removed direction");
      }
      continue;
    }
    const IndexMask low = m & (bit - 1);
    const IndexMask high = (m & ~(bit - 1)) >> 1;
    out.at_mask(low | high) = a[s];
  }
  return out;
}

Form strip_index(const Form& a, int removed) {
  Form out = a;
  const IndexMask bit = 1u << removed;
  for (int s = 0; s < a.size(); ++s) {
    if (a.mask(s) & bit) out[s] = 0.0;
  }
  return out;
}

Form insert_index(const Form& a, int inserted) {
  const int n = a.dim() + 1;
  const IndexMask bit = 1u << inserted;
  Form out(n, a.degree());
  for (int s = 0; s < a.size(); ++s) {
    const IndexMask m = a.mask(s);
    const IndexMask low = m & (bit - 1);
    const IndexMask high = (m & ~(bit - 1)) << 1;
    out.at_mask(low | high) = a[s];
  }
  return out;
}

double max_abs(const Form& a) { return a.max_abs(); }

}  // namespace g2flow
