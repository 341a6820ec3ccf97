#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvmfem/fespace.hpp"

namespace mvmfem {

// Exact solution bundle: solenoidal velocity q (curl of a bubble potential),
// polynomial pressure p vanishing on the boundary, vorticity r = mu curl q,
// body force g = curl r + grad p, and curl r itself for energy-norm errors.
struct ExactFields {
  AnalyticField q;
  AnalyticField p;
  AnalyticField r;
  AnalyticField g;
  AnalyticField curl_r;
};

namespace detail {

// 1D building blocks: a(t) = t^2 (t-1)^2 and its derivatives, u(t) = t(1-t).
inline double bub(double t) { return t * t * (t - 1.0) * (t - 1.0); }
inline double bub1(double t) { return 4.0 * t * t * t - 6.0 * t * t + 2.0 * t; }
inline double bub2(double t) { return 12.0 * t * t - 12.0 * t + 2.0; }
inline double bub3(double t) { return 24.0 * t - 12.0; }
inline double lin(double t) { return t - t * t; }
inline double lin1(double t) { return 1.0 - 2.0 * t; }

}  // namespace detail

// Closed forms, derived and verified against a symbolic oracle; the
// finite-difference checks live in the test suite.
inline ExactFields exact_fields(int dim, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("exact_fields: mu must be > 0");
  using namespace detail;
  ExactFields f;
  if (dim == 2) {
    // potential psi = a(x) a(y); q = [d_y psi, -d_x psi]
    f.q = {2, 2, 7, [](const Vec3& x) -> Vec3 {
             return {bub(x.x) * bub1(x.y), -bub1(x.x) * bub(x.y), 0.0};
           }};
    f.p = {2, 1, 4, [](const Vec3& x) -> Vec3 { return {lin(x.x) * lin(x.y), 0.0, 0.0}; }};
    f.r = {2, 1, 6, [mu](const Vec3& x) -> Vec3 {
             return {-mu * (bub2(x.x) * bub(x.y) + bub(x.x) * bub2(x.y)), 0.0, 0.0};
           }};
    f.curl_r = {2, 2, 5, [mu](const Vec3& x) -> Vec3 {
                  return {-mu * (bub2(x.x) * bub1(x.y) + bub(x.x) * bub3(x.y)),
                          mu * (bub3(x.x) * bub(x.y) + bub1(x.x) * bub2(x.y)), 0.0};
                }};
    f.g = {2, 2, 5, [mu](const Vec3& x) -> Vec3 {
             return {-mu * (bub2(x.x) * bub1(x.y) + bub(x.x) * bub3(x.y)) +
                         lin1(x.x) * lin(x.y),
                     mu * (bub3(x.x) * bub(x.y) + bub1(x.x) * bub2(x.y)) +
                         lin(x.x) * lin1(x.y),
                     0.0};
           }};
  } else if (dim == 3) {
    // potential Phi = [u(x) a(y) a(z), 0, 0]; q = curl Phi
    f.q = {3, 3, 9, [](const Vec3& x) -> Vec3 {
             return {0.0, lin(x.x) * bub(x.y) * bub1(x.z), -lin(x.x) * bub1(x.y) * bub(x.z)};
           }};
    f.p = {3, 1, 6, [](const Vec3& x) -> Vec3 {
             return {lin(x.x) * lin(x.y) * lin(x.z), 0.0, 0.0};
           }};
    f.r = {3, 3, 8, [mu](const Vec3& x) -> Vec3 {
             return {-mu * lin(x.x) * (bub2(x.y) * bub(x.z) + bub(x.y) * bub2(x.z)),
                     mu * lin1(x.x) * bub1(x.y) * bub(x.z),
                     mu * lin1(x.x) * bub(x.y) * bub1(x.z)};
           }};
    f.curl_r = {3, 3, 7, [mu](const Vec3& x) -> Vec3 {
                  return {0.0,
                          mu * (-lin(x.x) * (bub2(x.y) * bub1(x.z) + bub(x.y) * bub3(x.z)) +
                                2.0 * bub(x.y) * bub1(x.z)),
                          mu * (-2.0 * bub1(x.y) * bub(x.z) +
                                lin(x.x) * (bub3(x.y) * bub(x.z) + bub1(x.y) * bub2(x.z)))};
                }};
    f.g = {3, 3, 7, [mu, cr = f.curl_r](const Vec3& x) -> Vec3 {
             Vec3 v = cr(x);
             return {v.x + lin1(x.x) * lin(x.y) * lin(x.z),
                     v.y + lin(x.x) * lin1(x.y) * lin(x.z),
                     v.z + lin(x.x) * lin(x.y) * lin1(x.z)};
           }};
  } else {
    throw std::invalid_argument("exact_fields: dim must be 2 or 3");
  }
  return f;
}

// grad(phi) with phi = sin(pi x) sin(pi y) (sin(pi z) in 3D); phi vanishes on
// the boundary. Non-polynomial: the declared degree is the quadrature target.
inline AnalyticField gradient_perturbation(int dim) {
  constexpr double pi = std::numbers::pi;
  if (dim == 2)
    return {2, 2, 13, [](const Vec3& x) -> Vec3 {
              return {pi * std::cos(pi * x.x) * std::sin(pi * x.y),
                      pi * std::sin(pi * x.x) * std::cos(pi * x.y), 0.0};
            }};
  if (dim == 3)
    return {3, 3, 13, [](const Vec3& x) -> Vec3 {
              return {pi * std::cos(pi * x.x) * std::sin(pi * x.y) * std::sin(pi * x.z),
                      pi * std::sin(pi * x.x) * std::cos(pi * x.y) * std::sin(pi * x.z),
                      pi * std::sin(pi * x.x) * std::sin(pi * x.y) * std::cos(pi * x.z)};
            }};
  throw std::invalid_argument("gradient_perturbation: dim must be 2 or 3");
}

// The scalar potential itself, for tests that integrate by parts.
inline AnalyticField perturbation_potential(int dim) {
  constexpr double pi = std::numbers::pi;
  if (dim == 2)
    return {2, 1, 13, [](const Vec3& x) -> Vec3 {
              return {std::sin(pi * x.x) * std::sin(pi * x.y), 0.0, 0.0};
            }};
  return {3, 1, 13, [](const Vec3& x) -> Vec3 {
            return {std::sin(pi * x.x) * std::sin(pi * x.y) * std::sin(pi * x.z), 0.0, 0.0};
          }};
}

inline AnalyticField zero_field(int dim, int components) {
  return {dim, components, 0, [](const Vec3&) -> Vec3 { return {}; }};
}

}  // namespace mvmfem
