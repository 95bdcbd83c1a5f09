#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "pekar/pt_functional.hpp"
#include "pekar/simd/kernels.hpp"

using namespace pekar;
namespace sd = pekar::simd;

namespace {

struct Data {
  std::vector<double> v, w;
  std::vector<cplx> a, b, c;
};

Data make(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.v.push_back(nd(rng));
    d.w.push_back(std::abs(nd(rng)));
    d.a.emplace_back(nd(rng), nd(rng));
    d.b.emplace_back(nd(rng), nd(rng));
    d.c.emplace_back(nd(rng), nd(rng));
  }
  return d;
}

bool same_bits(const std::vector<cplx>& x, const std::vector<cplx>& y) {
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(cplx)) == 0;
}
bool same_bits(const std::vector<double>& x, const std::vector<double>& y) {
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels match their definitions") {
  const auto& k = sd::scalar_kernels();
  const Data d = make(37, 3);
  std::vector<cplx> out(37);
  k.real_times(d.v.data(), d.a.data(), out.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(out[i] == d.v[i] * d.a[i]);
  k.conj_times(d.a.data(), d.b.data(), out.data(), 37);
  for (std::size_t i = 0; i < 37; ++i) CHECK(std::abs(out[i] - std::conj(d.a[i]) * d.b[i]) < 1e-15);
  cplx dot = 0;
  double wn = 0, dr = 0;
  for (std::size_t i = 0; i < 37; ++i) {
    dot += std::conj(d.a[i]) * d.b[i];
    wn += d.w[i] * std::norm(d.a[i]);
    dr += d.v[i] * d.w[i];
  }
  CHECK(std::abs(k.dot(d.a.data(), d.b.data(), 37) - dot) < 1e-13);
  CHECK(std::abs(k.weighted_norm2(d.w.data(), d.a.data(), 37) - wn) < 1e-13);
  CHECK(std::abs(k.dot_real(d.v.data(), d.w.data(), 37) - dr) < 1e-13);
}

TEST_CASE("avx2 elementwise kernels are bitwise equal to scalar") {
  const sd::KernelTable* v = sd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 unavailable on this host; equivalence not exercised");
    return;
  }
  const auto& s = sd::scalar_kernels();
  for (std::size_t n : {1u, 2u, 3u, 7u, 8u, 63u, 1000u, 4097u}) {
    const Data d = make(n, n);
    std::vector<cplx> o1(n), o2(n);
    s.real_times(d.v.data(), d.a.data(), o1.data(), n);
    v->real_times(d.v.data(), d.a.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    o1 = d.c;
    o2 = d.c;
    s.real_times_acc(d.v.data(), d.a.data(), o1.data(), n);
    v->real_times_acc(d.v.data(), d.a.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    s.conj_times(d.a.data(), d.b.data(), o1.data(), n);
    v->conj_times(d.a.data(), d.b.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    o1 = d.c;
    o2 = d.c;
    s.axpy(cplx(0.3, -1.7), d.a.data(), o1.data(), n);
    v->axpy(cplx(0.3, -1.7), d.a.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));

    std::vector<double> r1 = d.w, r2 = d.w;
    s.norm2_acc(d.a.data(), r1.data(), n);
    v->norm2_acc(d.a.data(), r2.data(), n);
    CHECK(same_bits(r1, r2));
  }
}

TEST_CASE("avx2 reductions agree with scalar to rounding") {
  const sd::KernelTable* v = sd::avx2_kernels();
  if (!v) return;
  const auto& s = sd::scalar_kernels();
  for (std::size_t n : {1u, 5u, 16u, 1001u, 65536u}) {
    const Data d = make(n, 100 + n);
    // Summation error grows like sqrt(n) ulps of the absolute sum.
    const double tol = 1.2e-16 * std::max(4.0, std::sqrt(static_cast<double>(n)));
    double scale_c = 0, scale_r = 0, scale_w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scale_c += std::abs(d.a[i]) * std::abs(d.b[i]);
      scale_r += std::abs(d.v[i] * d.w[i]);
      scale_w += d.w[i] * std::norm(d.a[i]);
    }
    CHECK(std::abs(s.dot(d.a.data(), d.b.data(), n) - v->dot(d.a.data(), d.b.data(), n)) <= tol * scale_c);
    CHECK(std::abs(s.dot_real(d.v.data(), d.w.data(), n) - v->dot_real(d.v.data(), d.w.data(), n)) <=
          tol * scale_r);
    CHECK(std::abs(s.weighted_norm2(d.w.data(), d.a.data(), n) - v->weighted_norm2(d.w.data(), d.a.data(), n)) <=
          tol * scale_w);
    // Fixed lane layout: repeated calls give identical bits.
    CHECK(v->dot(d.a.data(), d.b.data(), n) == v->dot(d.a.data(), d.b.data(), n));
  }
}

TEST_CASE("energies agree across kernel sets") {
  if (!sd::avx2_kernels()) return;
  const Grid3 g({16, 16, 16}, 0.8);
  std::mt19937_64 rng(9);
  const SlaterState st = testutil::random_state(g, 2, rng);
  PTParams p;
  p.alpha = 1.3;
  p.U = 2.6;
  p.A = linear_vector_potential(g, {0.0, 0.0, 0.2});
  const sd::Isa before = sd::active_isa();
  sd::select(sd::Isa::scalar);
  const EnergyBreakdown e1 = pt_energy(st, p);
  sd::select(sd::Isa::avx2);
  const EnergyBreakdown e2 = pt_energy(st, p);
  sd::select(before);
  CHECK(testutil::rel(e1.total, e2.total) < 1e-13);
  CHECK(testutil::rel(e1.kinetic, e2.kinetic) < 1e-13);
  CHECK(testutil::rel(e1.self_interaction, e2.self_interaction) < 1e-13);
}
