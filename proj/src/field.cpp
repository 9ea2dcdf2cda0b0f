#include "ckn/field.hpp"

#include <algorithm>
#include <cmath>

#include "ckn/error.hpp"

namespace ckn {

Field::Field(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw InvalidSizeError("field size does not match grid");
}

Field Field::sample(GridPtr grid, const std::function<double(double, double)>& f) {
  Field out(grid);
  const auto s = grid->s_nodes();
  const auto phi = grid->phi_nodes();
  for (int i = 0; i < grid->n_s(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j) out(i, j) = f(s[i], phi[j]);
  return out;
}

Field& Field::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

Field Field::scaled(double c) const {
  Field out(*this);
  out *= c;
  return out;
}

void Field::apply_boundary_conditions() {
  const int ns = grid_->n_s();
  const int np = grid_->n_phi();
  for (int j = 0; j < np; ++j) {
    (*this)(0, j) = 0.0;
    (*this)(ns - 1, j) = 0.0;
  }
  for (int i = 0; i < ns; ++i) {
    (*this)(i, 0) = (*this)(i, 1);
    (*this)(i, np - 1) = (*this)(i, np - 2);
  }
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace ckn
