#include "aim/epoly.hpp"

#include <algorithm>

namespace aim {

EPoly::EPoly(std::vector<BigReal> coeffs) : coeffs_(std::move(coeffs)) {
  trim();
}

EPoly::EPoly(std::initializer_list<double> coeffs) {
  coeffs_.reserve(coeffs.size());
  for (double c : coeffs) coeffs_.emplace_back(c);
  trim();
}

EPoly EPoly::constant(const BigReal& c) { return EPoly(std::vector<BigReal>{c}); }

EPoly EPoly::linear(const BigReal& a, const BigReal& b) {
  return EPoly(std::vector<BigReal>{a, b});
}

void EPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

BigReal EPoly::coeff(int k) const {
  if (k < 0 || k > degree()) return BigReal(0);
  return coeffs_[static_cast<std::size_t>(k)];
}

BigReal EPoly::operator()(const BigReal& e) const {
  BigReal acc(0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc *= e;
    acc += *it;
  }
  return acc;
}

BigReal EPoly::derivative_at(const BigReal& e) const {
  BigReal acc(0);
  for (int k = degree(); k >= 1; --k) {
    acc *= e;
    acc += coeffs_[static_cast<std::size_t>(k)] * k;
  }
  return acc;
}

BigReal EPoly::max_abs() const {
  BigReal m(0);
  for (const auto& c : coeffs_) {
    if (abs(c) > m) m = abs(c);
  }
  return m;
}

EPoly& EPoly::operator+=(const EPoly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), BigReal(0));
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  trim();
  return *this;
}

EPoly& EPoly::operator-=(const EPoly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), BigReal(0));
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  trim();
  return *this;
}

EPoly& EPoly::operator*=(const BigReal& s) {
  if (s == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& c : coeffs_) c *= s;
  return *this;
}

void EPoly::add_scaled(const BigReal& s, const EPoly& x) {
  if (x.coeffs_.size() > coeffs_.size()) coeffs_.resize(x.coeffs_.size(), BigReal(0));
  for (std::size_t k = 0; k < x.coeffs_.size(); ++k) {
    mpfr_fma(coeffs_[k].backend().data(), s.backend().data(),
             x.coeffs_[k].backend().data(), coeffs_[k].backend().data(), MPFR_RNDN);
  }
  trim();
}

void EPoly::add_scaled_shifted(const BigReal& s, const EPoly& x) {
  if (x.coeffs_.empty()) return;
  if (x.coeffs_.size() + 1 > coeffs_.size()) coeffs_.resize(x.coeffs_.size() + 1, BigReal(0));
  for (std::size_t k = 0; k < x.coeffs_.size(); ++k) {
    mpfr_fma(coeffs_[k + 1].backend().data(), s.backend().data(),
             x.coeffs_[k].backend().data(), coeffs_[k + 1].backend().data(), MPFR_RNDN);
  }
  trim();
}

void EPoly::add_product(const EPoly& a, const EPoly& b) {
  if (a.is_zero() || b.is_zero()) return;
  const std::size_t need = a.coeffs_.size() + b.coeffs_.size() - 1;
  if (need > coeffs_.size()) coeffs_.resize(need, BigReal(0));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      mpfr_fma(coeffs_[i + j].backend().data(), a.coeffs_[i].backend().data(),
               b.coeffs_[j].backend().data(), coeffs_[i + j].backend().data(), MPFR_RNDN);
    }
  }
  trim();
}

EPoly operator*(const EPoly& a, const EPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<BigReal> out(a.coeffs_.size() + b.coeffs_.size() - 1, BigReal(0));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      mpfr_fma(out[i + j].backend().data(), a.coeffs_[i].backend().data(),
               b.coeffs_[j].backend().data(), out[i + j].backend().data(), MPFR_RNDN);
    }
  }
  return EPoly(std::move(out));
}

EPoly EPoly::operator-() const {
  EPoly r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

bool EPoly::has_non_finite() const {
  return std::any_of(coeffs_.begin(), coeffs_.end(),
                     [](const BigReal& c) { return !is_finite(c); });
}

}  // namespace aim
