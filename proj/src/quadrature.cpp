#include "pipeflow/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace pipeflow {

namespace {

QuadratureRule segment_rule(int degree) {
  // Gauss-Legendre on [0,1]; n points are exact to degree 2n-1.
  QuadratureRule r;
  r.dim = 1;
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> x, w;  // on [-1,1]
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("segment quadrature: degree > 9 not provided");
  }
  r.degree = 2 * n - 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.points.push_back({0.5 * (x[i] + 1.0), 0.0, 0.0});
    r.weights.push_back(0.5 * w[i]);
  }
  return r;
}

void tri_orbit3(QuadratureRule& r, double a, double w) {
  // Symmetric orbit (a, a), (1-2a, a), (a, 1-2a); w is relative to area 1.
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({a, a, 0.0});
  r.points.push_back({b, a, 0.0});
  r.points.push_back({a, b, 0.0});
  for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
}

void tri_orbit6(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const double pts[6][2] = {{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}};
  for (auto& p : pts) {
    r.points.push_back({p[0], p[1], 0.0});
    r.weights.push_back(0.5 * w);
  }
}

QuadratureRule triangle_rule(int degree) {
  QuadratureRule r;
  r.dim = 2;
  if (degree <= 1) {
    r.degree = 1;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 0.0});
    r.weights.push_back(0.5);
  } else if (degree <= 2) {
    r.degree = 2;
    tri_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
  } else if (degree <= 4) {
    // Two 3-point orbits (Strang), positive weights, exact to degree 4.
    r.degree = 4;
    tri_orbit3(r, 0.445948490915965, 0.223381589678011);
    tri_orbit3(r, 0.091576213509771, 0.109951743655322);
  } else if (degree <= 5) {
    r.degree = 5;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 0.0});
    r.weights.push_back(0.5 * 9.0 / 40.0);
    const double s15 = std::sqrt(15.0);
    tri_orbit3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
    tri_orbit3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
  } else if (degree <= 6) {
    // 12 points, positive weights, exact to degree 6.
    r.degree = 6;
    tri_orbit3(r, 0.063089014491502, 0.050844906370207);
    tri_orbit3(r, 0.249286745170910, 0.116786275726379);
    tri_orbit6(r, 0.310352451033785, 0.053145049844816, 0.082851075618374);
  } else {
    throw std::invalid_argument("triangle quadrature: degree > 6 not provided");
  }
  return r;
}

// Grundmann-Moller rule of index s on the unit simplex of dimension n,
// exact for polynomials of total degree 2s+1.
QuadratureRule gm_rule(int n, int s) {
  QuadratureRule r;
  r.dim = n;
  r.degree = 2 * s + 1;
  const int d = 2 * s + 1;
  double volume = 1.0;
  for (int i = 2; i <= n; ++i) volume /= i;

  for (int i = 0; i <= s; ++i) {
    // coef = (-1)^i 2^{-2s} (d+n-2i)^d / (i! (d+n-i)!)
    double coef = (i % 2 == 0) ? 1.0 : -1.0;
    coef *= std::pow(2.0, -2.0 * s);
    coef *= std::pow(static_cast<double>(d + n - 2 * i), d);
    for (int j = 2; j <= i; ++j) coef /= j;
    for (int j = 2; j <= d + n - i; ++j) coef /= j;

    // All compositions k of (s - i) into n+1 parts.
    std::vector<int> k(static_cast<std::size_t>(n) + 1, 0);
    k[0] = s - i;
    while (true) {
      Vec3 p;
      const double denom = static_cast<double>(d + n - 2 * i);
      for (int c = 0; c < n; ++c) p[c] = (2.0 * k[static_cast<std::size_t>(c) + 1] + 1.0) / denom;
      r.points.push_back(p);
      r.weights.push_back(coef);

      // next composition in colex order
      int j = 0;
      while (j < n && k[static_cast<std::size_t>(j)] == 0) ++j;
      if (j >= n) break;
      const int v = k[static_cast<std::size_t>(j)];
      k[static_cast<std::size_t>(j)] = 0;
      k[0] = v - 1;
      ++k[static_cast<std::size_t>(j) + 1];
    }
  }
  // The construction integrates against the unit-content simplex; rescale so
  // weights sum to the reference volume 1/n!.
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  const double scale = volume / wsum;
  for (auto& w : r.weights) w *= scale;
  return r;
}

QuadratureRule tet_rule(int degree) {
  if (degree > 9) throw std::invalid_argument("tetrahedron quadrature: degree > 9 not provided");
  const int s = std::max(0, (degree - 1 + 1) / 2);  // smallest s with 2s+1 >= degree
  return gm_rule(3, s);
}

}  // namespace

const QuadratureRule& simplex_rule(int dim, int degree) {
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  QuadratureRule r;
  switch (dim) {
    case 1: r = segment_rule(degree); break;
    case 2: r = triangle_rule(degree); break;
    case 3: r = tet_rule(degree); break;
    default: throw std::invalid_argument("quadrature: dim must be 1, 2 or 3");
  }
  return cache.emplace(key, std::move(r)).first->second;
}

}  // namespace pipeflow
