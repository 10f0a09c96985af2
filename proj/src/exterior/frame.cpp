#include "g2flow/frame.hpp"

#include <bit>

namespace g2flow {

FrameStructure::FrameStructure(std::vector<Form> structure, std::optional<int> u_index, std::string name)
    : de_(std::move(structure)), u_index_(u_index), name_(std::move(name)) {
  const int n = dim();
  if (n < 1 || n > kMaxFrameDim) throw DimensionError("frame dimension must be 1..7");
  for (const auto& f : de_) {
    if (f.dim() != n || f.degree() != 2) throw DimensionError("structure equations must be 2-forms on the frame");
    if (f.grid()) throw ConfigurationError("structure constants must be constant");
  }
  if (u_index_) {
    if (*u_index_ < 0 || *u_index_ >= n) throw DimensionError("u index out of range");
    if (!de_[static_cast<std::size_t>(*u_index_)].is_zero()) throw ConfigurationError("d(du) must vanish");
  }
  d_table_.resize(static_cast<std::size_t>(n + 1));
  d_table_[0].assign(1, Form(n, 1));
  for (int k = 1; k < n; ++k) {
    const BasisTable& t = BasisTable::get(n, k);
    auto& row = d_table_[static_cast<std::size_t>(k)];
    row.reserve(static_cast<std::size_t>(t.size()));
    for (int s = 0; s < t.size(); ++s) {
      const IndexMask m = t.mask(s);
      const int first = std::countr_zero(m);
      if (k == 1) {
        row.push_back(de(first));
        continue;
      }
      // d(e^i ∧ e^R) = de^i ∧ e^R − e^i ∧ d(e^R)
      const IndexMask rest = m & ~(1u << first);
      Form er(n, k - 1);
      er.at_mask(rest) = 1.0;
      const Form& drest = d_table_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(BasisTable::get(n, k - 1).slot(rest))];
      row.push_back(wedge(de(first), er) - wedge(Form::monomial(n, {first}), drest));
    }
  }
  d_table_[static_cast<std::size_t>(n)].assign(1, Form(n, n));
}

const Form& FrameStructure::d_monomial(int k, int slot) const {
  return d_table_[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)];
}

double FrameStructure::jacobi_defect() const {
  double m = 0.0;
  for (const auto& f : de_) m = std::max(m, d(f, *this).max_abs());
  return m;
}

FrameStructure FrameStructure::quotient(int y) const {
  std::vector<Form> de;
  for (int i = 0; i < dim(); ++i) {
    if (i == y) continue;
    de.push_back(drop_index(de_[static_cast<std::size_t>(i)], y));
  }
  std::optional<int> u;
  if (u_index_) {
    if (*u_index_ != y) u = *u_index_ > y ? *u_index_ - 1 : *u_index_;
  }
  return FrameStructure(std::move(de), u, name_.empty() ? std::string{} : name_ + "/e" + std::to_string(y + 1));
}

Form d(const Form& a, const FrameStructure& fs) {
  const int n = a.dim();
  if (fs.dim() != n) throw DimensionError("form and frame dimension differ");
  const int k = a.degree();
  if (k == n) throw DimensionError("exterior derivative of a top-degree form");
  Form out(n, k + 1);
  Form du_part(n, k);
  bool has_field = false;
  for (int s = 0; s < a.size(); ++s) {
    const Coefficient& c = a[s];
    if (c.is_zero()) continue;
    const Form& dm = fs.d_monomial(k, s);
    if (!dm.is_zero()) out += c * dm;
    if (!c.is_constant()) {
      has_field = true;
      du_part[s] = du(c);
    }
  }
  if (has_field) {
    if (!fs.u_index()) throw ConfigurationError("field coefficients require a frame with a u direction");
    out += wedge(Form::monomial(n, {*fs.u_index()}), du_part);
  }
  return out;
}

Form lie_derivative(const Vector& v, const Form& a, const FrameStructure& fs) {
  if (a.degree() == 0) return contract(v, d(a, fs));
  Form out = d(contract(v, a), fs);
  if (a.degree() < a.dim()) out += contract(v, d(a, fs));
  return out;
}

namespace {

FrameStructure build(int n, std::initializer_list<std::pair<int, const char*>> eqs, std::optional<int> u,
                     std::string name) {
  std::vector<Form> de(static_cast<std::size_t>(n), Form(n, 2));
  for (const auto& [i, expr] : eqs) de[static_cast<std::size_t>(i - 1)] = Form::parse(n, expr);
  return FrameStructure(std::move(de), u, std::move(name));
}

}  // namespace

FrameStructure frame_from_key(std::string_view key) {
  if (key == "fernandez7") return build(7, {{6, "e12"}, {7, "e13"}}, std::nullopt, "fernandez7");
  if (key == "as7") return build(7, {{5, "e13 - e24"}, {6, "e14 + e23"}}, 6, "as7");
  if (key == "flat7") return build(7, {}, 6, "flat7");
  if (key == "flat6") return build(6, {}, 5, "flat6");
  throw ConfigurationError("unknown frame key: " + std::string(key));
}

std::vector<std::string> frame_keys() { return {"fernandez7", "as7", "flat7", "flat6"}; }

}  // namespace g2flow
