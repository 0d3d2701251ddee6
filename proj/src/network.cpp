#include "lnafim/network.hpp"

#include <set>

#include "lnafim/errors.hpp"

namespace lnafim {

namespace {

void check_expr_symbols(const Expr& e, int n, int l, int reaction) {
  switch (e.op()) {
    case Op::Species:
      if (e.index() < 0 || e.index() >= n)
        throw InputError("reaction " + std::to_string(reaction + 1) +
                         ": rate references an undeclared species");
      return;
    case Op::Param:
      if (e.index() < 0 || e.index() >= l)
        throw InputError("reaction " + std::to_string(reaction + 1) +
                         ": rate references an undeclared parameter");
      return;
    default: break;
  }
  for (const auto& a : e.args()) check_expr_symbols(a, n, l, reaction);
}

std::string side_to_dsl(const std::vector<std::pair<int, int>>& side,
                        const std::vector<std::string>& names) {
  if (side.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (i > 0) out += " + ";
    if (side[i].second != 1) out += std::to_string(side[i].second) + "*";
    out += names[static_cast<std::size_t>(side[i].first)];
  }
  return out;
}

}  // namespace

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<std::string> params,
                                 std::vector<Reaction> reactions)
    : species_(std::move(species)), params_(std::move(params)), reactions_(std::move(reactions)) {
  std::set<std::string> seen;
  for (const auto& name : species_)
    if (!seen.insert(name).second) throw InputError("duplicate name " + name);
  for (const auto& name : params_)
    if (!seen.insert(name).second) throw InputError("duplicate name " + name);

  const int n = num_species();
  const int r = num_reactions();
  stoich_ = Eigen::MatrixXi::Zero(n, r);
  for (int j = 0; j < r; ++j) {
    const auto& rx = reactions_[static_cast<std::size_t>(j)];
    for (auto [s, m] : rx.reactants) {
      if (s < 0 || s >= n || m < 1)
        throw InputError("reaction " + std::to_string(j + 1) + ": invalid reactant");
      stoich_(s, j) -= m;
    }
    for (auto [s, m] : rx.products) {
      if (s < 0 || s >= n || m < 1)
        throw InputError("reaction " + std::to_string(j + 1) + ": invalid product");
      stoich_(s, j) += m;
    }
    if (stoich_.col(j).isZero())
      throw InputError("reaction " + std::to_string(j + 1) +
                       " has an all-zero stoichiometry column");
    check_expr_symbols(rx.rate, n, num_params(), j);
  }
  stoich_real_ = stoich_.cast<double>();
  kinetics_ = std::make_shared<const Kinetics>(*this);
}

int ReactionNetwork::species_index(std::string_view name) const {
  for (std::size_t i = 0; i < species_.size(); ++i)
    if (species_[i] == name) return static_cast<int>(i);
  return -1;
}

int ReactionNetwork::param_index(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i] == name) return static_cast<int>(i);
  return -1;
}

std::string ReactionNetwork::to_dsl() const {
  std::string out = "species";
  for (const auto& s : species_) out += " " + s;
  out += "\n";
  if (!params_.empty()) {
    out += "params";
    for (const auto& p : params_) out += " " + p;
    out += "\n";
  }
  const SymbolNames names{species_, params_};
  for (const auto& rx : reactions_) {
    out += "reaction " + side_to_dsl(rx.reactants, species_) + " -> " +
           side_to_dsl(rx.products, species_) + " @ " + to_string(rx.rate, names) + "\n";
  }
  return out;
}

bool operator==(const ReactionNetwork& a, const ReactionNetwork& b) {
  if (a.species_ != b.species_ || a.params_ != b.params_) return false;
  if (a.stoich_.rows() != b.stoich_.rows() || a.stoich_.cols() != b.stoich_.cols()) return false;
  if (a.stoich_ != b.stoich_) return false;
  for (int j = 0; j < a.num_reactions(); ++j)
    if (!(a.rate(j) == b.rate(j))) return false;
  return true;
}

Kinetics::Kinetics(const ReactionNetwork& net)
    : n_(net.num_species()), r_(net.num_reactions()), l_(net.num_params()) {
  const auto nn = static_cast<std::size_t>(n_);
  const auto nl = static_cast<std::size_t>(l_);
  const auto nr = static_cast<std::size_t>(r_);
  f_.reserve(nr);
  dfdx_sym_.resize(nr * nn);
  dfdth_sym_.resize(nr * nl);
  dfdx_.resize(nr * nn);
  dfdth_.resize(nr * nl);
  d2xx_.resize(nr * nn * nn);
  d2xth_.resize(nr * nn * nl);
  for (int j = 0; j < r_; ++j) {
    const Expr& f = net.rate(j);
    f_.emplace_back(f);
    for (int l = 0; l < l_; ++l) {
      dfdth_sym_[idx(j, l, l_)] = differentiate(f, Symbol::param(l));
      dfdth_[idx(j, l, l_)] = CompiledExpr(dfdth_sym_[idx(j, l, l_)]);
    }
    for (int k = 0; k < n_; ++k) {
      const Expr dk = differentiate(f, Symbol::species(k));
      dfdx_sym_[idx(j, k, n_)] = dk;
      dfdx_[idx(j, k, n_)] = CompiledExpr(dk);
      for (int m = k; m < n_; ++m)
        d2xx_[(idx(j, k, n_)) * nn + static_cast<std::size_t>(m)] =
            CompiledExpr(differentiate(dk, Symbol::species(m)));
      for (int l = 0; l < l_; ++l)
        d2xth_[idx(j, k, n_) * nl + static_cast<std::size_t>(l)] =
            CompiledExpr(differentiate(dk, Symbol::param(l)));
    }
  }
}

void Kinetics::rates(const double* x, const double* theta, double t, Vector& out) const {
  out.resize(r_);
  for (int j = 0; j < r_; ++j) out[j] = f_[static_cast<std::size_t>(j)](x, theta, t);
}

void Kinetics::rate_jacobian_x(const double* x, const double* theta, double t, Matrix& out) const {
  out.resize(r_, n_);
  for (int j = 0; j < r_; ++j)
    for (int k = 0; k < n_; ++k) {
      const auto& c = dfdx_[idx(j, k, n_)];
      out(j, k) = c.is_zero() ? 0.0 : c(x, theta, t);
    }
}

void Kinetics::rate_jacobian_theta(const double* x, const double* theta, double t,
                                   Matrix& out) const {
  out.resize(r_, l_);
  for (int j = 0; j < r_; ++j)
    for (int l = 0; l < l_; ++l) {
      const auto& c = dfdth_[idx(j, l, l_)];
      out(j, l) = c.is_zero() ? 0.0 : c(x, theta, t);
    }
}

void Kinetics::rate_hessian_xx(const double* x, const double* theta, double t,
                               std::vector<Matrix>& out) const {
  out.resize(static_cast<std::size_t>(n_));
  for (auto& m : out) m.setZero(r_, n_);
  const auto nn = static_cast<std::size_t>(n_);
  for (int j = 0; j < r_; ++j)
    for (int k = 0; k < n_; ++k)
      for (int m = k; m < n_; ++m) {
        const auto& c = d2xx_[idx(j, k, n_) * nn + static_cast<std::size_t>(m)];
        if (c.is_zero()) continue;
        const double v = c(x, theta, t);
        out[static_cast<std::size_t>(m)](j, k) = v;
        out[static_cast<std::size_t>(k)](j, m) = v;
      }
}

void Kinetics::rate_hessian_xtheta(const double* x, const double* theta, double t,
                                   std::vector<Matrix>& out) const {
  out.resize(static_cast<std::size_t>(l_));
  for (auto& m : out) m.setZero(r_, n_);
  const auto nl = static_cast<std::size_t>(l_);
  for (int j = 0; j < r_; ++j)
    for (int k = 0; k < n_; ++k)
      for (int l = 0; l < l_; ++l) {
        const auto& c = d2xth_[idx(j, k, n_) * nl + static_cast<std::size_t>(l)];
        if (!c.is_zero()) out[static_cast<std::size_t>(l)](j, k) = c(x, theta, t);
      }
}

namespace {

void check_sizes(const ReactionNetwork& net, const Vector& x, const Vector& theta) {
  if (x.size() != net.num_species())
    throw InputError("state vector has " + std::to_string(x.size()) + " entries, model has " +
                     std::to_string(net.num_species()) + " species");
  if (theta.size() != net.num_params())
    throw InputError("parameter vector has " + std::to_string(theta.size()) +
                     " entries, model has " + std::to_string(net.num_params()) + " parameters");
}

}  // namespace

Vector drift_F(const ReactionNetwork& net, const Vector& x, const Vector& theta, double t) {
  check_sizes(net, x, theta);
  Vector f;
  net.kinetics().rates(x.data(), theta.data(), t, f);
  return f;
}

Matrix jacobian_A(const ReactionNetwork& net, const Vector& phi, const Vector& theta, double t) {
  check_sizes(net, phi, theta);
  Matrix dfdx;
  net.kinetics().rate_jacobian_x(phi.data(), theta.data(), t, dfdx);
  return net.stoichiometry_real() * dfdx;
}

Matrix diffusion_from_rates(const Matrix& stoich, const Vector& rates, int* clamped) {
  Vector f = rates;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (f[j] >= 0.0) continue;
    if (f[j] < -kRateClampTolerance)
      throw NumericalError("diffusion_D", "negative transition rate " + std::to_string(f[j]) +
                                              " for reaction " + std::to_string(j + 1));
    f[j] = 0.0;
    if (clamped != nullptr) ++*clamped;
  }
  return stoich * f.asDiagonal() * stoich.transpose();
}

Matrix diffusion_D(const ReactionNetwork& net, const Vector& phi, const Vector& theta, double t,
                   int* clamped) {
  return diffusion_from_rates(net.stoichiometry_real(), drift_F(net, phi, theta, t), clamped);
}

}  // namespace lnafim
