#pragma once

// A from-scratch margin-softmax trainer on plain std::vector storage with one tanh
// hidden layer and unweighted batch-mean loss. Used to check the library trainer when
// every extra term is switched off.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct PlainNet {
  std::size_t d = 0, h = 0, l = 0, k = 0;
  std::vector<double> w1, b1, w2, b2, c;  // row-major: w1 h*d, w2 l*h, c k*l
};

class PlainTrainer {
 public:
  PlainTrainer(PlainNet net, double s, double m, double lr, double momentum)
      : p_(std::move(net)), v_(zeros(p_)), s_(s), m_(m), lr_(lr), mu_(momentum) {}

  /// One step on the batch (rows of `x`, each of length d); returns the loss before the update.
  double step(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y) {
    PlainNet g = zeros(p_);
    const double inv_n = 1.0 / static_cast<double>(x.size());
    double total = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      std::vector<double> hid(p_.h), f(p_.l, 0.0);
      for (std::size_t a = 0; a < p_.h; ++a) {
        double z = p_.b1[a];
        for (std::size_t b = 0; b < p_.d; ++b) z += p_.w1[a * p_.d + b] * x[n][b];
        hid[a] = std::tanh(z);
      }
      for (std::size_t a = 0; a < p_.l; ++a) {
        f[a] = p_.b2[a];
        for (std::size_t b = 0; b < p_.h; ++b) f[a] += p_.w2[a * p_.h + b] * hid[b];
      }
      double norm = 0.0;
      for (const double v : f) norm += v * v;
      norm = std::sqrt(norm);
      std::vector<double> u(p_.l);
      for (std::size_t a = 0; a < p_.l; ++a) u[a] = f[a] / norm;

      std::vector<double> cos(p_.k), logit(p_.k);
      for (std::size_t q = 0; q < p_.k; ++q) {
        double dot = 0.0;
        for (std::size_t a = 0; a < p_.l; ++a) dot += u[a] * p_.c[q * p_.l + a];
        cos[q] = std::clamp(dot, -1.0, 1.0);
        logit[q] = s_ * cos[q];
      }
      const std::size_t t = y[n];
      const double theta = std::acos(cos[t]);
      logit[t] = s_ * std::cos(theta + m_);
      const double top = *std::max_element(logit.begin(), logit.end());
      double z = 0.0;
      for (const double v : logit) z += std::exp(v - top);
      total += (std::log(z) - (logit[t] - top)) * inv_n;

      // d loss / d cos_q
      std::vector<double> dc(p_.k);
      for (std::size_t q = 0; q < p_.k; ++q) dc[q] = (std::exp(logit[q] - top) / z - (q == t ? 1.0 : 0.0)) * s_;
      const double sin_t = std::sin(theta);
      dc[t] *= sin_t > 1e-12 ? std::sin(theta + m_) / sin_t : std::cos(m_);
      for (auto& v : dc) v *= inv_n;

      std::vector<double> du(p_.l, 0.0);
      for (std::size_t q = 0; q < p_.k; ++q)
        for (std::size_t a = 0; a < p_.l; ++a) {
          g.c[q * p_.l + a] += dc[q] * u[a];
          du[a] += dc[q] * p_.c[q * p_.l + a];
        }
      double u_du = 0.0;
      for (std::size_t a = 0; a < p_.l; ++a) u_du += u[a] * du[a];
      std::vector<double> df(p_.l);
      for (std::size_t a = 0; a < p_.l; ++a) df[a] = (du[a] - u[a] * u_du) / norm;

      std::vector<double> dh(p_.h, 0.0);
      for (std::size_t a = 0; a < p_.l; ++a) {
        g.b2[a] += df[a];
        for (std::size_t b = 0; b < p_.h; ++b) {
          g.w2[a * p_.h + b] += df[a] * hid[b];
          dh[b] += df[a] * p_.w2[a * p_.h + b];
        }
      }
      for (std::size_t a = 0; a < p_.h; ++a) {
        const double dz = dh[a] * (1.0 - hid[a] * hid[a]);
        g.b1[a] += dz;
        for (std::size_t b = 0; b < p_.d; ++b) g.w1[a * p_.d + b] += dz * x[n][b];
      }
    }

    update(p_.w1, v_.w1, g.w1);
    update(p_.b1, v_.b1, g.b1);
    update(p_.w2, v_.w2, g.w2);
    update(p_.b2, v_.b2, g.b2);
    update(p_.c, v_.c, g.c);
    for (std::size_t q = 0; q < p_.k; ++q) {
      double norm = 0.0;
      for (std::size_t a = 0; a < p_.l; ++a) norm += p_.c[q * p_.l + a] * p_.c[q * p_.l + a];
      norm = std::sqrt(norm);
      for (std::size_t a = 0; a < p_.l; ++a) p_.c[q * p_.l + a] /= norm;
    }
    return total;
  }

  const PlainNet& net() const { return p_; }

 private:
  static PlainNet zeros(const PlainNet& p) {
    PlainNet z = p;
    for (auto* v : {&z.w1, &z.b1, &z.w2, &z.b2, &z.c}) std::fill(v->begin(), v->end(), 0.0);
    return z;
  }

  void update(std::vector<double>& param, std::vector<double>& vel, const std::vector<double>& grad) const {
    for (std::size_t q = 0; q < param.size(); ++q) {
      vel[q] = mu_ * vel[q] + grad[q];
      param[q] -= lr_ * vel[q];
    }
  }

  PlainNet p_;
  PlainNet v_;
  double s_, m_, lr_, mu_;
};

}  // namespace oracle
