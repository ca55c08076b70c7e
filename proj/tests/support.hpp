// Independent reference computations used by the test suites. Nothing here
// calls the library's evolution code: the interferometer is a path sum and
// multi-photon outputs are expanded as polynomials in creation operators.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline const cplx I{0.0, 1.0};

/// Output mode of the time-bin interferometer: arm 0 = straight, 1 = down.
struct Port {
  int arm;
  int bin;
  auto operator<=>(const Port&) const = default;
};

/// Single photon entering at bin t: the first splitter sends it to the short
/// arm (transmit) or the long arm (reflect, picks up i), the long arm adds
/// e^{i phi} and one bin of delay, and the second splitter sends the short arm
/// to s by transmission and the long arm to s by reflection.
inline std::map<Port, cplx> mach_zehnder_path_sum(int t, double phi) {
  const double h = 1.0 / std::sqrt(2.0);
  const cplx trans = h, refl = I * h;
  const cplx short_arm = trans;
  const cplx long_arm = refl * std::polar(1.0, phi);
  std::map<Port, cplx> out;
  out[{0, t}] += short_arm * trans;
  out[{1, t}] += short_arm * refl;
  out[{0, t + 1}] += long_arm * refl;
  out[{1, t + 1}] += long_arm * trans;
  return out;
}

/// Occupation vector over output modes 0..n-1.
using Occ = std::vector<int>;

/// Multi-photon image of prod_k (a_k^dag)^{n_k} / sqrt(n_k!) under the mode
/// map u (columns = inputs), by expanding the product term by term and
/// normalizing each output monomial.
inline std::map<Occ, cplx> expand(const Eigen::MatrixXcd& u, const Occ& in) {
  const auto n = static_cast<int>(u.rows());
  std::map<Occ, cplx> poly{{Occ(static_cast<std::size_t>(n), 0), 1.0}};
  double in_norm = 1.0;
  for (int k = 0; k < static_cast<int>(in.size()); ++k) {
    for (int c = 0; c < in[static_cast<std::size_t>(k)]; ++c) {
      std::map<Occ, cplx> next;
      for (const auto& [mono, amp] : poly) {
        for (int j = 0; j < n; ++j) {
          if (u(j, k) == cplx{}) continue;
          auto m = mono;
          ++m[static_cast<std::size_t>(j)];
          next[m] += amp * u(j, k);
        }
      }
      poly = std::move(next);
    }
    in_norm *= std::tgamma(in[static_cast<std::size_t>(k)] + 1.0);
  }
  std::map<Occ, cplx> out;
  for (const auto& [mono, amp] : poly) {
    double f = 1.0;
    for (int m : mono) f *= std::tgamma(m + 1.0);
    const cplx a = amp * std::sqrt(f / in_norm);
    if (std::abs(a) >= 1e-12) out[mono] = a;
  }
  return out;
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = {g(rng), g(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

/// Every occupation vector over n modes with exactly `photons` photons.
inline std::vector<Occ> occupations(int n, int photons) {
  std::vector<Occ> out;
  Occ cur(static_cast<std::size_t>(n), 0);
  auto rec = [&](auto&& self, int mode, int left) -> void {
    if (mode == n - 1) {
      cur[static_cast<std::size_t>(mode)] = left;
      out.push_back(cur);
      return;
    }
    for (int k = left; k >= 0; --k) {
      cur[static_cast<std::size_t>(mode)] = k;
      self(self, mode + 1, left - k);
    }
  };
  rec(rec, 0, photons);
  return out;
}

/// Permanent by brute force over permutations (n <= 6).
inline cplx permanent_brute(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  cplx s = 0.0;
  do {
    cplx t = 1.0;
    for (int i = 0; i < n; ++i) t *= a(i, p[static_cast<std::size_t>(i)]);
    s += t;
  } while (std::next_permutation(p.begin(), p.end()));
  return n == 0 ? cplx{1.0} : s;
}

/// Binomial three-sigma band check for an observed count.
inline bool within_3_sigma(std::uint64_t count, std::uint64_t n, double p) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  return std::abs(static_cast<double>(count) - mean) <= 3.0 * sd + 1e-9;
}

}  // namespace oracle
