#pragma once

#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "g2flow/coefficient.hpp"

namespace g2flow {

inline constexpr int kMaxFrameDim = 7;

/// Bit mask of frame indices (bit i <=> e^{i+1}).
using IndexMask = unsigned;

/// Lexicographic enumeration of increasing k-tuples of {0..n-1}.
class BasisTable {
 public:
  static const BasisTable& get(int n, int k);

  [[nodiscard]] int size() const { return static_cast<int>(masks_.size()); }
  [[nodiscard]] IndexMask mask(int slot) const { return masks_[static_cast<std::size_t>(slot)]; }
  /// Slot of a mask of popcount k, or -1.
  [[nodiscard]] int slot(IndexMask m) const { return slots_[m]; }
  [[nodiscard]] std::vector<int> indices(int slot) const;

 private:
  BasisTable(int n, int k);
  std::vector<IndexMask> masks_;
  std::vector<int> slots_;
};

/// Sign of e^A ∧ e^B for disjoint masks (0 if they overlap).
int wedge_sign(IndexMask a, IndexMask b);

/// Degree-k exterior form over an n-dimensional coframe, dense over increasing multi-indices.
class Form {
 public:
  Form() = default;
  Form(int n, int k);

  /// c · e^{i_1} ∧ ... ∧ e^{i_k}; indices are 0-based and need not be sorted.
  static Form monomial(int n, std::span<const int> indices, const Coefficient& c = 1.0);
  static Form monomial(int n, std::initializer_list<int> indices, const Coefficient& c = 1.0);
  /// Parses sums like "e123 + e145 - 2*e257" with 1-based single-digit indices; "1" is the 0-form.
  static Form parse(int n, std::string_view expr);

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] int degree() const { return k_; }
  [[nodiscard]] int size() const { return static_cast<int>(c_.size()); }
  [[nodiscard]] IndexMask mask(int slot) const { return BasisTable::get(n_, k_).mask(slot); }

  [[nodiscard]] const Coefficient& operator[](int slot) const { return c_[static_cast<std::size_t>(slot)]; }
  Coefficient& operator[](int slot) { return c_[static_cast<std::size_t>(slot)]; }
  /// Coefficient of e^{indices} (sorted increasing, 0-based).
  [[nodiscard]] Coefficient coeff(std::initializer_list<int> indices) const;
  [[nodiscard]] const Coefficient& at_mask(IndexMask m) const;
  Coefficient& at_mask(IndexMask m);

  /// Coefficient of e^{1..n} for a top-degree form.
  [[nodiscard]] const Coefficient& top() const;

  [[nodiscard]] GridPtr grid() const;
  [[nodiscard]] bool is_zero() const;
  /// Largest |coefficient| over all slots and samples.
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] Form at_sample(int i) const;

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  Form& operator*=(const Coefficient& s);

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator-(Form a) { return a *= -1.0; }
  friend Form operator*(const Coefficient& s, Form a) { return a *= s; }
  friend Form operator*(Form a, const Coefficient& s) { return a *= s; }

 private:
  void check_same_shape(const Form& o) const;

  int n_ = 0;
  int k_ = 0;
  std::vector<Coefficient> c_;
};

/// Vector with coefficient components in the frame dual to the coframe.
using Vector = std::vector<Coefficient>;

/// Frame vector e_i.
Vector frame_vector(int n, int i, const Coefficient& scale = 1.0);

Form wedge(const Form& a, const Form& b);
/// e_i ⌟ a.
Form contract(int i, const Form& a);
/// v ⌟ a.
Form contract(const Vector& v, const Form& a);

/// Drops the frame index `removed` from a form that has no component along it.
Form drop_index(const Form& a, int removed);
/// Inverse of drop_index: embeds an (n-1)-frame form into the n-frame.
Form insert_index(const Form& a, int inserted);
/// Part of a with no e^{removed} factor.
Form strip_index(const Form& a, int removed);

double max_abs(const Form& a);

}  // namespace g2flow
