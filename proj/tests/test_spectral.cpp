#include <catch2/catch_amalgamated.hpp>

#include <specdyn/spectral.hpp>

using namespace specdyn;
using namespace specdyn::spectral;

TEST_CASE("sector decomposition partitions the truncated basis") {
  // small enumeration, n=2, N_max=2
  const auto cov = decompose_sectors(2, 2);
  REQUIRE(cov.size() == 5);
  const auto find = [&](int kappa, int s) -> const SectorCoverage& {
    for (const auto& c : cov)
      if (c.label.kappa == kappa && c.label.s == s) return c;
    FAIL("sector not enumerated");
    return cov.front();
  };
  CHECK(find(0, 0).complete);
  CHECK(find(0, 0).states_in_basis == 1);
  // (0,1): both |0,1> and |2,0> have total <= 2, so the sector is complete
  CHECK(find(0, 1).complete);
  CHECK(find(0, 1).states_in_basis == 2);
  CHECK_FALSE(find(0, 2).complete);  // |2,1>, |4,0> exceed the truncation
  CHECK(find(0, 2).states_in_basis == 1);
  CHECK(find(1, 0).complete);
  CHECK_FALSE(find(1, 1).complete);
  CHECK(coverage_total(cov) == 6);  // C(4, 2)

  // bookkeeping against an exhaustive state scan, n=2, N_max=6
  const auto cov6 = decompose_sectors(2, 6);
  const auto basis = fock::build_basis(2, 6);
  CHECK(coverage_total(cov6) == basis->size());
  std::map<std::pair<int, int>, int> counts;
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto& occ = basis->state(i);
    const auto sec = sector_of_state(2, occ[0], occ[1]);
    counts[{sec.kappa, sec.s}] += 1;
  }
  for (const auto& c : cov6) {
    CHECK(counts[{c.label.kappa, c.label.s}] == c.states_in_basis);
    if (c.complete) CHECK(c.states_in_basis == c.label.dim());
  }

  // unbounded-s structure: complete sectors have dim s+1
  for (const auto& c : decompose_sectors(3, 30)) {
    if (c.complete) CHECK(c.states_in_basis == c.label.s + 1);
  }
}

TEST_CASE("harmonics Hamiltonian, two equivalent builds") {
  const ModelParams p{2, 1.0, 2.0, Cplx(1.0, 0.0)};  // resonant: a = 0
  const SectorLabel sec(2, 0, 1);

  // hand evaluation of both forms: a=0, c=3, l1=2/3 -> diag 2, off-diag sqrt(2)
  const Mat h = build_hhg(p, sec);
  CHECK(h(0, 0).real() == Catch::Approx(2.0).margin(1e-14));
  CHECK(h(1, 1).real() == Catch::Approx(2.0).margin(1e-14));
  CHECK(h(1, 0).real() == Catch::Approx(std::sqrt(2.0)).margin(1e-14));
  CHECK(fock::max_abs(h - h.adjoint()) == 0.0);

  // free field: diagonal with entries w1 n1 + w0 n0
  const ModelParams free{2, 1.3, 0.4, Cplx(0.0, 0.0)};
  const SectorLabel sec2(2, 1, 3);
  const Mat hfree = build_hhg(free, sec2);
  for (int eta = 0; eta <= 3; ++eta) {
    const auto occ = polyalg::sector_occupation(sec2, eta);
    CHECK(hfree(eta, eta).real() ==
          Catch::Approx(1.3 * occ[0] + 0.4 * occ[1]).margin(1e-12));
  }
  CHECK(hfree.cwiseAbs().sum() == Catch::Approx(hfree.diagonal().cwiseAbs().sum()).margin(1e-14));

  // vacuum sector: scalar 0
  const Mat h00 = build_hhg(ModelParams{2, 1.0, 2.0, Cplx(1.0, 0.0)}, SectorLabel(2, 0, 0));
  REQUIRE(h00.rows() == 1);
  CHECK(std::abs(h00(0, 0)) == 0.0);

  // form agreement across a sweep with complex coupling
  const ModelParams pc{3, 0.7, 1.9, Cplx(0.4, -0.3)};
  for (int kappa = 0; kappa < 3; ++kappa)
    for (int s = 1; s <= 8; ++s) {
      const SectorLabel sc(3, kappa, s);
      CHECK(fock::max_abs(build_hhg_linear(pc, polyalg::build_supd2_rep(sc)) -
                          build_hhg_fock(pc, sc)) <= 1e-12);
    }
}

TEST_CASE("quasi-spin form is the same operator") {
  const ModelParams p{2, 1.0, 2.0, Cplx(1.0, 0.0)};
  const SectorLabel sec(2, 0, 1);
  const auto rep = polyalg::build_supd2_rep(sec);

  const Mat hqs = build_hqs(p, rep);
  const auto spec = diagonalize(hqs);
  CHECK(spec.eigenvalues(0) == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-12));
  CHECK(spec.eigenvalues(1) == Catch::Approx(2.0 + std::sqrt(2.0)).margin(1e-12));

  // b = 0: spectrum is the diagonal a(l0+eta) + c l1
  const ModelParams pfree{2, 0.8, 0.5, Cplx(0.0, 0.0)};
  const SectorLabel sec3(2, 1, 3);
  const auto rep3 = polyalg::build_supd2_rep(sec3);
  const Mat hqs_free = build_hqs(pfree, rep3);
  std::vector<double> expected;
  for (int eta = 0; eta <= 3; ++eta) {
    expected.push_back(pfree.a() * (rep3.l0 + Rational(eta)).to_double() +
                       pfree.c() * rep3.r1.to_double());
  }
  std::sort(expected.begin(), expected.end());
  const auto specf = diagonalize(hqs_free);
  for (int k = 0; k <= 3; ++k) {
    CHECK(specf.eigenvalues(k) == Catch::Approx(expected[static_cast<std::size_t>(k)]).margin(1e-12));
  }

  // spectra of the quasi-spin and linear forms agree, (1,4), n=3
  const ModelParams p3{3, 1.1, 2.9, Cplx(0.6, 0.2)};
  const SectorLabel sec14(3, 1, 4);
  const auto rep14 = polyalg::build_supd2_rep(sec14);
  const auto e1 = diagonalize(build_hhg(p3, sec14)).eigenvalues;
  const auto e2 = diagonalize(build_hqs(p3, rep14)).eigenvalues;
  CHECK((e1 - e2).cwiseAbs().maxCoeff() <= 1e-9);

  // in fact the matrices coincide in the shared basis
  CHECK(fock::max_abs(build_hqs(p3, rep14) - build_hhg(p3, sec14)) <= 1e-12);
}

TEST_CASE("one-mode multi-boson model") {
  // g = 0: diagonal w1 (kappa + n nu)
  const Mat hfree = build_hn_multiboson(0.9, Cplx(0.0, 0.0), 2, 1, 21);
  for (int nu = 0; nu <= 10; ++nu) {
    CHECK(hfree(nu, nu).real() == Catch::Approx(0.9 * (1 + 2 * nu)).margin(1e-13));
  }

  // matrix element <2|H|0> = g sqrt(2) for n=2, kappa=0
  const Cplx g(0.1, 0.05);
  const Mat h = build_hn_multiboson(1.0, g, 2, 0, 40);
  CHECK(std::abs(h(1, 0) - g * std::sqrt(2.0)) <= 1e-14);

  // truncation convergence: lowest 5 eigenvalues shift <= 1e-6 from N_max 40 to 60
  const auto e40 = diagonalize(build_hn_multiboson(1.0, Cplx(0.1, 0.0), 2, 0, 40)).eigenvalues;
  const auto e60 = diagonalize(build_hn_multiboson(1.0, Cplx(0.1, 0.0), 2, 0, 60)).eigenvalues;
  for (int k = 0; k < 5; ++k) CHECK(std::abs(e40(k) - e60(k)) <= 1e-6);
}

TEST_CASE("general multiphoton model") {
  // m = 1 reduces to the harmonics Fock form on the full two-mode basis
  const ModelParams p{2, 1.0, 2.0, Cplx(0.3, 0.4)};
  const auto hmp = build_hmp_general({1.0}, 2.0, {{{1, 1}, Cplx(0.3, 0.4)}}, 2, 8);
  const auto hhg = build_hhg_full(p, 8);
  CHECK(fock::max_abs(hmp.mat - hhg.mat) == 0.0);

  // frequency conversion m = n = 2, only g_12: N_1 - N_2 is conserved
  const auto hfc = build_hmp_general({1.0, 1.5}, 2.5, {{{1, 2}, Cplx(0.7, -0.1)}}, 2, 8);
  const auto n1 = fock::number_op(hfc.basis, 0);
  const auto n2 = fock::number_op(hfc.basis, 1);
  CHECK(fock::max_abs(fock::commutator(hfc, n1 - n2).mat) <= 1e-12);

  // all couplings zero: free diagonal
  const auto hfree = build_hmp_general({1.0, 1.5}, 2.5, {}, 2, 6);
  CHECK(hfree.mat.cwiseAbs().sum() ==
        Catch::Approx(hfree.mat.diagonal().cwiseAbs().sum()).margin(1e-14));

  CHECK_THROWS_AS(build_hmp_general({1.0}, 2.0, {{{1}, Cplx(1.0, 0.0)}}, 2, 6),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_hmp_general({1.0}, 2.0, {{{2, 1}, Cplx(1.0, 0.0)}}, 2, 6),
                  std::invalid_argument);
}

TEST_CASE("diagonalize contract") {
  Mat h(2, 2);
  h << 2.0, std::sqrt(2.0), std::sqrt(2.0), 2.0;
  const auto spec = diagonalize(h);
  CHECK(spec.eigenvalues(0) == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-14));
  CHECK(spec.eigenvalues(1) == Catch::Approx(2.0 + std::sqrt(2.0)).margin(1e-14));

  // diagonal input: sorted diagonal
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = -1.0;
  d(2, 2) = 0.5;
  const auto sd = diagonalize(d);
  CHECK(sd.eigenvalues(0) == -1.0);
  CHECK(sd.eigenvalues(1) == 0.5);
  CHECK(sd.eigenvalues(2) == 3.0);

  // 11-dim sector (0,10): eigenvector residuals and unitarity
  const ModelParams p{2, 1.0, 2.0, Cplx(0.8, 0.3)};
  const Mat hs = build_hhg(p, SectorLabel(2, 0, 10));
  const auto ss = diagonalize(hs);
  CHECK(fock::max_abs(ss.eigenvectors.adjoint() * ss.eigenvectors - Mat::Identity(11, 11)) <= 1e-10);
  for (int k = 0; k < 11; ++k) {
    const Vec r = hs * ss.eigenvectors.col(k) - ss.eigenvalues(k) * ss.eigenvectors.col(k);
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, std::abs(ss.eigenvalues(k))));
  }

  // non-Hermitian input rejected
  Mat bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(diagonalize(bad), std::invalid_argument);
}

TEST_CASE("evolution by spectral resolution") {
  // eigenvector of a diagonal H: constant expectations
  {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 3.0;
    Vec psi0 = Vec::Zero(2);
    psi0(0) = 1.0;
    Mat obs = Mat::Zero(2, 2);
    obs(0, 0) = 5.0;
    const auto res = evolve(h, psi0, {0.0, 0.3, 1.7}, {{"o", obs}});
    for (const auto& v : res.expectations.at("o")) CHECK(std::abs(v - Cplx(5.0, 0.0)) <= 1e-14);
  }

  // resonant Rabi flopping on (0,1), n=2: <Y0>(t) = l0 + sin^2(sqrt(2) b t),
  // oscillating at angular frequency 2 sqrt(2) b
  {
    const double b = 0.7;
    const ModelParams p{2, 1.0, 2.0, Cplx(b, 0.0)};
    const SectorLabel sec(2, 0, 1);
    const Mat h = build_hhg(p, sec);
    Vec psi0 = Vec::Zero(2);
    psi0(0) = 1.0;
    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(0.05 * k);
    const auto res = evolve(h, psi0, grid, sector_observables(sec));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double expected = -1.0 / 3.0 + std::pow(std::sin(std::sqrt(2.0) * b * grid[i]), 2);
      CHECK(std::abs(res.expectations.at("Y0")[i] - Cplx(expected, 0.0)) <= 1e-9);
    }
    CHECK(res.max_norm_drift <= 1e-9);
  }

  CHECK_THROWS_AS(evolve(Mat::Identity(2, 2), Vec::Ones(2) / std::sqrt(2.0), {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve(Mat::Identity(2, 2), 2.0 * Vec::Ones(2), {0.0}),
                  std::invalid_argument);
}

TEST_CASE("dynamic constant R1 and sector confinement") {
  const ModelParams p{2, 1.0, 2.0, Cplx(0.6, 0.3)};
  const auto h = build_hhg_full(p, 10);
  const auto r1 = r1_operator(h.basis, 2);

  // [H, R1] = 0 exactly at matrix level
  CHECK(fock::max_abs(fock::commutator(h, r1).mat) == 0.0);

  // a state spread over two sectors keeps its per-sector norm under evolution
  const auto basis = h.basis;
  Vec psi0 = Vec::Zero(static_cast<Eigen::Index>(basis->size()));
  psi0(static_cast<Eigen::Index>(*basis->index_of({0, 1}))) = std::sqrt(0.3);  // sector (0,1)
  psi0(static_cast<Eigen::Index>(*basis->index_of({1, 1}))) = std::sqrt(0.7);  // sector (1,1)

  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.2 * k);
  const auto res = evolve(h.mat, psi0, grid);

  const auto sector_norm = [&](const Vec& psi, int kappa, int s) {
    double out = 0.0;
    for (std::size_t i = 0; i < basis->size(); ++i) {
      const auto& occ = basis->state(i);
      const auto sec = sector_of_state(2, occ[0], occ[1]);
      if (sec.kappa == kappa && sec.s == s) out += std::norm(psi(static_cast<Eigen::Index>(i)));
    }
    return out;
  };
  for (const auto& psi : res.states) {
    CHECK(std::abs(sector_norm(psi, 0, 1) - 0.3) <= 1e-10);
    CHECK(std::abs(sector_norm(psi, 1, 1) - 0.7) <= 1e-10);
  }
  CHECK(res.max_norm_drift <= 1e-9);

  // energy expectation is conserved
  std::vector<Observable> eobs = {{"H", h.mat}};
  const auto rese = evolve(h.mat, psi0, grid, eobs);
  const Cplx e0 = rese.expectations.at("H").front();
  for (const auto& e : rese.expectations.at("H")) {
    CHECK(std::abs(e - e0) <= 1e-9 * std::max(1.0, std::abs(e0)));
  }
}
