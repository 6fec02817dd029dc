#include "liefam/numint.hpp"

#include <algorithm>
#include <cmath>

#include "liefam/program.hpp"

namespace liefam {

Expr bind_realizations(const Expr& e, const Realizations& r) {
  Substitution s;
  for (const auto& sym : free_symbols(e)) {
    if (!sym.is_opaque()) continue;
    auto it = r.find(sym.name);
    if (it == r.end()) throw UnboundSymbolError("no realization bound for '" + sym.name + "'");
    if (max_opaque_order(it->second) >= 0)
      throw InvalidArgument("realization of '" + sym.name + "' must not contain opaque symbols");
    Expr d = it->second;
    for (int k = 0; k < sym.order; ++k) d = differentiate(d, Symbol::time());
    s[sym] = d;
  }
  return substitute(e, s);
}

TDVectorField bind_realizations(const TDVectorField& y, const Realizations& r) {
  std::vector<Expr> c;
  for (const auto& e : y.coeffs) c.push_back(bind_realizations(e, r));
  return TDVectorField(std::move(c));
}

ODEProblem make_problem(const TDVectorField& field, const Realizations& r, std::vector<double> x0,
                        double t0, double t1) {
  if (static_cast<int>(x0.size()) != field.n)
    throw InvalidArgument("initial state has " + std::to_string(x0.size()) + " entries, field has " +
                          std::to_string(field.n));
  for (const auto& [name, e] : r)
    if (!is_time_only(e)) throw InvalidArgument("realization of '" + name + "' may only depend on t");
  ODEProblem p{bind_realizations(field, r), std::move(x0), t0, t1};
  for (const auto& e : p.field.coeffs)
    for (const auto& s : free_symbols(e))
      if (s.is_param()) throw UnboundSymbolError("parameter '" + s.name + "' is not bound");
  return p;
}

std::vector<double> Trajectory::sample(double t) const {
  const double lo = std::min(ts_.front(), ts_.back()), hi = std::max(ts_.front(), ts_.back());
  if (!(t >= lo && t <= hi))
    throw InvalidArgument("t = " + std::to_string(t) + " outside trajectory span [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const bool forward = ts_.back() >= ts_.front();
  // First mesh index with ts_[i] "after or at" t in integration direction.
  auto it = forward ? std::lower_bound(ts_.begin(), ts_.end(), t)
                    : std::lower_bound(ts_.begin(), ts_.end(), t, std::greater<double>());
  std::size_t i = static_cast<std::size_t>(it - ts_.begin());
  if (i < ts_.size() && ts_[i] == t) return xs_[i];
  std::size_t step = i - 1;
  const double h = ts_[step + 1] - ts_[step];
  const double th = (t - ts_[step]) / h, th1 = 1.0 - th;
  const auto& rc = dense_[step];
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (int k = 0; k < n_; ++k) {
    const double* c = &rc[static_cast<std::size_t>(5 * k)];
    x[k] = c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
  }
  return x;
}

class Dopri5 {
 public:
  Dopri5(const RHS& f, int n, const IntegratorConfig& cfg) : f_(f), n_(n), cfg_(cfg) {}

  Trajectory run(std::vector<double> x0, double t0, double t1) {
    Trajectory tr;
    tr.n_ = n_;
    tr.ts_.push_back(t0);
    tr.xs_.push_back(x0);
    if (t0 == t1) return tr;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double hmax = std::min(cfg_.max_step, span);
    const std::size_t n = static_cast<std::size_t>(n_);

    std::vector<double> y = std::move(x0), y1(n), ys(n), err(n);
    std::vector<std::vector<double>> k(7, std::vector<double>(n));
    double t = t0;
    eval(tr, t, y.data(), k[0].data(), t, true);

    double h = cfg_.initial_step > 0 ? std::min(cfg_.initial_step, hmax) : initial_step(tr, t, y, k[0], hmax, dir);
    double facold = 1e-4;
    bool last_rejected = false;
    std::optional<DomainError> last_domain;

    while (dir * (t1 - t) > 0) {
      if (tr.stats_.accepted + tr.stats_.rejected >= cfg_.max_steps)
        throw Error("integration step limit reached at t = " + std::to_string(t));
      if (0.1 * h <= std::abs(t) * kUround || h < 1e-300) {
        if (last_domain) throw IntegrationDomainError(*last_domain, t);
        throw StepSizeUnderflow(t, h);
      }
      bool last = false;
      if (h >= std::abs(t1 - t) * (1.0 - 1e-12)) {
        h = std::abs(t1 - t);
        last = true;
      }
      const double hs = dir * h;
      double errn;
      try {
        stages(tr, t, hs, y, k, y1, ys);
        errn = error_norm(hs, y, y1, k, err);
        last_domain.reset();
      } catch (const DomainError& e) {
        last_domain = e;
        errn = std::numeric_limits<double>::infinity();
      }
      if (!std::isfinite(errn)) {
        h *= 0.2;
        last_rejected = true;
        ++tr.stats_.rejected;
        continue;
      }
      double fac11 = std::pow(errn, kExpo1);
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::max(1.0 / kFac2, std::min(1.0 / kFac1, fac / kSafe));
      double hnew = h / fac;
      if (errn <= 1.0) {
        facold = std::max(errn, 1e-4);
        ++tr.stats_.accepted;
        std::vector<double> rc(5 * n);
        for (std::size_t i = 0; i < n; ++i) {
          double ydiff = y1[i] - y[i];
          double bspl = hs * k[0][i] - ydiff;
          rc[5 * i + 0] = y[i];
          rc[5 * i + 1] = ydiff;
          rc[5 * i + 2] = bspl;
          rc[5 * i + 3] = ydiff - hs * k[6][i] - bspl;
          rc[5 * i + 4] = hs * (kD1 * k[0][i] + kD3 * k[2][i] + kD4 * k[3][i] + kD5 * k[4][i] +
                                kD6 * k[5][i] + kD7 * k[6][i]);
        }
        k[0] = k[6];
        y = y1;
        t = last ? t1 : t + hs;
        tr.ts_.push_back(t);
        tr.xs_.push_back(y);
        tr.dense_.push_back(std::move(rc));
        hnew = std::min(hnew, hmax);
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        h = hnew;
      } else {
        h = h / std::min(1.0 / kFac1, fac11 / kSafe);
        last_rejected = true;
        ++tr.stats_.rejected;
      }
    }
    return tr;
  }

 private:
  static constexpr double kUround = 2.3e-16;
  static constexpr double kSafe = 0.9, kFac1 = 0.2, kFac2 = 10.0, kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double kD1 = -12715105075.0 / 11282082432.0,
                          kD3 = 87487479700.0 / 32700410799.0,
                          kD4 = -10690763975.0 / 1880347072.0,
                          kD5 = 701980252875.0 / 199316789632.0,
                          kD6 = -1453857185.0 / 822651844.0, kD7 = 69997945.0 / 29380423.0;

  void eval(Trajectory& tr, double t, const double* x, double* dx, double t_report, bool base) {
    ++tr.stats_.evaluations;
    try {
      f_(t, x, dx);
    } catch (const DomainError& e) {
      if (base) throw IntegrationDomainError(e, t_report);
      throw;
    }
  }

  void stages(Trajectory& tr, double t, double h, const std::vector<double>& y,
              std::vector<std::vector<double>>& k, std::vector<double>& y1,
              std::vector<double>& ys) {
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * a21 * k[0][i];
    eval(tr, t + c2 * h, ys.data(), k[1].data(), t, false);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    eval(tr, t + c3 * h, ys.data(), k[2].data(), t, false);
    for (std::size_t i = 0; i < n; ++i)
      ys[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    eval(tr, t + c4 * h, ys.data(), k[3].data(), t, false);
    for (std::size_t i = 0; i < n; ++i)
      ys[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    eval(tr, t + c5 * h, ys.data(), k[4].data(), t, false);
    for (std::size_t i = 0; i < n; ++i)
      ys[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] +
                          a65 * k[4][i]);
    eval(tr, t + h, ys.data(), k[5].data(), t, false);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] +
                          a76 * k[5][i]);
    eval(tr, t + h, y1.data(), k[6].data(), t, false);
  }

  double error_norm(double h, const std::vector<double>& y, const std::vector<double>& y1,
                    const std::vector<std::vector<double>>& k, std::vector<double>& err) const {
    double s = 0.0;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                    e7 * k[6][i]);
      double sk = cfg_.atol + cfg_.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      double q = err[i] / sk;
      s += q * q;
      if (!std::isfinite(y1[i])) return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(s / static_cast<double>(n));
  }

  double initial_step(Trajectory& tr, double t, const std::vector<double>& y,
                      const std::vector<double>& f0, double hmax, double dir) {
    const std::size_t n = y.size();
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = cfg_.atol + cfg_.rtol * std::abs(y[i]);
      dnf += (f0[i] / sk) * (f0[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + dir * h * f0[i];
    try {
      eval(tr, t + dir * h, y1.data(), f1.data(), t, false);
    } catch (const DomainError&) {
      return std::min(h, 1e-6);
    }
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = cfg_.atol + cfg_.rtol * std::abs(y[i]);
      der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100 * h, h1, hmax});
  }

  const RHS& f_;
  int n_;
  IntegratorConfig cfg_;
};

Trajectory integrate(const RHS& f, int n, std::vector<double> x0, double t0, double t1,
                     const IntegratorConfig& cfg) {
  if (static_cast<int>(x0.size()) != n) throw InvalidArgument("initial state has wrong dimension");
  if (!(cfg.rtol > 0) || !(cfg.atol >= 0)) throw InvalidArgument("tolerances must be positive");
  Dopri5 solver(f, n, cfg);
  return solver.run(std::move(x0), t0, t1);
}

Trajectory integrate(const ODEProblem& p, const IntegratorConfig& cfg) {
  const int n = p.field.n;
  std::vector<Symbol> inputs{Symbol::time()};
  for (int i = 1; i <= n; ++i) inputs.push_back(Symbol::state(0, i));
  for (const auto& e : p.field.coeffs)
    for (const auto& s : free_symbols(e))
      if (std::find(inputs.begin(), inputs.end(), s) == inputs.end())
        throw UnboundSymbolError("symbol '" + to_string(s) + "' has no value in the ODE problem");
  Program prog(p.field.coeffs, inputs);
  std::vector<double> in(static_cast<std::size_t>(n + 1));
  RHS f = [&](double t, const double* x, double* dx) {
    in[0] = t;
    std::copy(x, x + n, in.begin() + 1);
    prog.run(in, std::span<double>(dx, static_cast<std::size_t>(n)));
  };
  return integrate(f, n, p.x0, p.t0, p.t1, cfg);
}

}  // namespace liefam
