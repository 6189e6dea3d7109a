use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::generators::{complete, cycle, petersen, random_regular};
use crate::graph::Graph;
use crate::paths::DirectedEdgeSpace;
use crate::spectral::{eigensystem, nb_apply, walk_spectral_gap};
use crate::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn space(g: &Graph, k: usize) -> DirectedEdgeSpace {
    DirectedEdgeSpace::new(g, k).unwrap()
}

fn rand_vec(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn one(d: &DirectedEdgeSpace, k: usize, seed: u64) -> Vec<C64> {
    rand_vec(d.len(k), seed)
}

#[test]
fn nabla_kills_constants_and_is_adjoint() {
    let g = random_regular(50, 3, 11).unwrap();
    let d = space(&g, 5);
    for j in 0..5 {
        let z = nabla(&d, j, &vec![c(2.5); d.len(j)]).unwrap();
        assert!(z.iter().all(|v| v.norm() < 1e-15));
        let k1 = one(&d, j, 1 + j as u64);
        let k2 = one(&d, j + 1, 100 + j as u64);
        let lhs = inner(&nabla(&d, j, &k1).unwrap(), &k2);
        let rhs = inner(&k1, &nabla_star(&d, j, &k2).unwrap());
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "grade {j}: {lhs} vs {rhs}");
    }
    assert!(matches!(nabla(&d, 5, &one(&d, 5, 0)), Err(crate::Error::GradeUnavailable(6))));
}

#[test]
fn nabla_star_of_zero_grade_matches_formula() {
    let g = petersen();
    let d = space(&g, 1);
    let k = one(&d, 1, 3);
    let out = nabla_star(&d, 0, &k).unwrap();
    for x in 0..10 {
        let mut want = C64::new(0.0, 0.0);
        for &y in g.neighbours(x) {
            want += k[d.edge_index(y as usize, x).unwrap()] - k[d.edge_index(x, y as usize).unwrap()];
        }
        assert!((out[x] - want).norm() < 1e-14);
    }
}

#[test]
fn m_star_reverses_gradient_on_regular_graphs() {
    let g = random_regular(40, 4, 2).unwrap();
    let d = space(&g, 6);
    for j in 0..4 {
        let k = one(&d, j, 7 + j as u64);
        let lhs = nabla_star(&d, j + 1, &m_star(&d, j, &k).unwrap()).unwrap();
        let rhs = nabla(&d, j, &k).unwrap();
        let neg: Vec<C64> = lhs.iter().map(|z| -z).collect();
        assert!(max_diff(&neg, &rhs) < 1e-13, "grade {j}");
    }
}

#[test]
fn transfer_identities() {
    let g = random_regular(60, 3, 5).unwrap();
    let d = space(&g, 5);
    let q = 2.0;
    for j in 0..4 {
        let ones = vec![c(1.0); d.len(j)];
        assert!(max_diff(&transfer(&d, j, &ones).unwrap(), &ones) < 1e-15);
        let k = one(&d, j, 40 + j as u64);
        // Decomposition K = (I − 𝒮)𝒮_T K + S̃_T K.
        let st = s_t(&d, j, &k, 8).unwrap();
        let sst = transfer(&d, j, &st).unwrap();
        let rem = s_tilde_t(&d, j, &k, 8).unwrap();
        let rebuilt: Vec<C64> = st.iter().zip(&sst).zip(&rem).map(|((a, b), r)| a - b + r).collect();
        assert!(max_diff(&rebuilt, &k) < 1e-12, "grade {j}");
        // ∇* i_k = c(𝒮 − I).
        let cst = if j == 0 { q + 1.0 } else { q };
        let lhs = nabla_star(&d, j, &extend(&d, j, &k).unwrap()).unwrap();
        let sk = transfer(&d, j, &k).unwrap();
        let rhs: Vec<C64> = sk.iter().zip(&k).map(|(s, x)| (s - x) * cst).collect();
        assert!(max_diff(&lhs, &rhs) < 1e-12, "grade {j}");
        // Adjoint.
        let k2 = one(&d, j, 90 + j as u64);
        let a = inner(&transfer(&d, j, &k).unwrap(), &k2);
        let b = inner(&k, &transfer_adjoint(&d, j, &k2).unwrap());
        assert!((a - b).norm() < 1e-12);
    }
    let irregular = crate::generators::complete_bipartite(2, 3).unwrap();
    let di = space(&irregular, 1);
    assert!(matches!(transfer(&di, 1, &one(&di, 1, 0)), Err(crate::Error::NotRegular)));
}

#[test]
fn transfer_norm_on_mean_zero_kernels() {
    let g = random_regular(60, 3, 8).unwrap();
    let d = space(&g, 2);
    let gap = walk_spectral_gap(&g).unwrap();
    let s0 = s_norm_meanzero(&d, 0, 1, 1).unwrap();
    assert!((s0 - (1.0 - gap.beta)).abs() < 1e-6, "{s0} vs {}", 1.0 - gap.beta);
    assert!(s0 < 1.0);
    // Grade 1: one step is an isometry on kernels of x0 alone, two steps contract.
    let s1 = s_norm_meanzero(&d, 1, 1, 1).unwrap();
    assert!((s1 - 1.0).abs() < 1e-6, "{s1}");
    let s2 = s_norm_meanzero(&d, 1, 2, 1).unwrap();
    assert!(s2 < 1.0 - 1e-3, "{s2}");
}

#[test]
fn sigma_n_closed_form_and_pythagoras() {
    let g = random_regular(40, 3, 21).unwrap();
    let q = 2.0;
    for j in [0usize, 1, 2] {
        for n in 1..=3usize {
            let d = space(&g, j + 2 * n);
            let k = one(&d, j, 5 * n as u64 + j as u64);
            let direct = nabla_star_sigma_n(&d, j, &k, n).unwrap();
            let closed = nabla_star_sigma_n_closed(&d, j, &k, n).unwrap();
            for (gr, v) in direct.grades() {
                assert!(max_diff(v, closed.grade(gr).unwrap()) < 1e-13, "j={j} n={n} grade {gr}");
            }
            let grad = nabla(&d, j, &k).unwrap();
            let grad_sq = norm_sq(&grad) / 40.0;
            let total = h_norm(&d, &direct).unwrap().powi(2);
            let mut pyth = 0.0;
            for (_, v) in direct.grades() {
                pyth += norm_sq(v) / 40.0;
            }
            assert!((total - pyth).abs() < 1e-12 * total.max(1.0));
            assert!((total - grad_sq / n as f64).abs() < 1e-12 * total.max(1.0));
            let kh = norm_sq(&k) / 40.0;
            assert!(total <= 4.0 * q / n as f64 * kh + 1e-12);
            let ksup = NbKernel::single(j, k.clone()).sup_norm();
            assert!(direct.sup_norm() <= 2.0 / n as f64 * ksup + 1e-12);
        }
    }
}

#[test]
fn kg_of_constants() {
    let g = petersen();
    let d = space(&g, 2);
    let id = kg_matrix(&d, &NbKernel::constant(&d, 0, c(1.0)).unwrap()).unwrap().to_dense();
    let adj = kg_matrix(&d, &NbKernel::constant(&d, 1, c(1.0)).unwrap()).unwrap().to_dense();
    for x in 0..10 {
        for y in 0..10 {
            assert_eq!(id[x * 10 + y], c(if x == y { 1.0 } else { 0.0 }));
            assert_eq!(adj[x * 10 + y], c(if g.has_edge(x, y) { 1.0 } else { 0.0 }));
        }
    }
}

#[test]
fn kg_forms_agree() {
    let g = random_regular(30, 3, 4).unwrap();
    let d = space(&g, 3);
    let k = NbKernel::random(&d, 2, 1).unwrap().with_grade(3, one(&d, 3, 2)).with_grade(0, one(&d, 0, 3));
    let kg = kg_matrix(&d, &k).unwrap();
    let phi = rand_vec(30, 8);
    let psi = rand_vec(30, 9);
    let direct = kg_form(&d, &k, &phi, &psi).unwrap();
    let via = inner(&phi, &kg.apply(&psi));
    assert!((direct - via).norm() < 1e-12);
    assert!(max_diff(&kg_apply(&d, &k, &psi).unwrap(), &kg.apply(&psi)) < 1e-12);
    assert!(kg_form(&d, &k, &phi[..29], &psi).is_err());
}

#[test]
fn large_injectivity_radius_gives_single_paths_and_equal_norms() {
    // C10 has radius 4 everywhere, Petersen radius 2.
    for (g, k) in [(cycle(10).unwrap(), 4usize), (petersen(), 2)] {
        let d = space(&g, k);
        let ones = NbKernel::constant(&d, k, c(1.0)).unwrap();
        let kg = kg_matrix(&d, &ones).unwrap();
        assert!(kg.entries().iter().all(|e| e.2 == c(1.0)));
        let r = NbKernel::random(&d, k, 5).unwrap();
        let nm = norms(&d, &r).unwrap();
        assert!((nm.h - nm.hsn).abs() < 1e-14);
    }
}

#[test]
fn two_norm_inequality() {
    let g = complete(4).unwrap();
    let d = space(&g, 2);
    let k = NbKernel::constant(&d, 2, c(1.0)).unwrap();
    let chk = check_2norms(&d, &k).unwrap();
    assert!((chk.hsn_sq - 12.0).abs() < 1e-12);
    assert!((chk.h_sq - 6.0).abs() < 1e-12);
    assert_eq!(chk.c_kq, 100.0);
    assert!(chk.residual >= 0.0);
    let zero = NbKernel::constant(&d, 2, c(0.0)).unwrap();
    let nm = norms(&d, &zero).unwrap();
    assert_eq!((nm.h, nm.hsn, nm.sup), (0.0, 0.0, 0.0));
    let g = random_regular(40, 3, 3).unwrap();
    let d = space(&g, 4);
    for k in 1..=4 {
        let r = NbKernel::random(&d, k, k as u64).unwrap().with_grade(k - 1, one(&d, k - 1, 9));
        assert!(check_2norms(&d, &r).unwrap().residual >= -1e-12);
    }
}

#[test]
fn edge_operator_identities() {
    let g = random_regular(30, 3, 6).unwrap();
    let d = space(&g, 5);
    let m = d.edge_count();
    let f = rand_vec(m, 1);
    let id = kb_apply(&d, &NbKernel::constant(&d, 1, c(1.0)).unwrap(), &f).unwrap();
    assert!(max_diff(&id, &f) < 1e-15);
    assert!(matches!(
        kb_apply(&d, &NbKernel::constant(&d, 0, c(1.0)).unwrap(), &f),
        Err(crate::Error::KernelContract(_))
    ));
    let tp = |v: &[C64]| -> Vec<C64> { (0..m).map(|e| v[d.head(e)]).collect() };
    let tm = |v: &[C64]| -> Vec<C64> { (0..m).map(|e| v[d.tail(e)]).collect() };
    for j in 1..=3 {
        let kv = one(&d, j + 1, 20 + j as u64);
        let kk = NbKernel::single(j + 1, kv.clone());
        let phi = rand_vec(30, 2);
        let psi = rand_vec(30, 3);
        let star = NbKernel::single(j, nabla_star(&d, j, &kv).unwrap());
        let lhs = kg_form(&d, &star, &phi, &psi).unwrap();
        let rhs = kb_form(&d, &kk, &tp(&phi), &tp(&psi)).unwrap() - kb_form(&d, &kk, &tm(&phi), &tm(&psi)).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "grade {j}");
        // ⟨f,(ℳ*K)_B g⟩ = q⁻¹⟨f, ℬK_Bℬg⟩.
        let kj = NbKernel::single(j, one(&d, j, 50 + j as u64));
        let ms = NbKernel::single(j + 2, m_star(&d, j, kj.grade(j).unwrap()).unwrap());
        let gv = rand_vec(m, 4);
        let a = kb_form(&d, &ms, &f, &gv).unwrap();
        let bkb = nb_apply(&d, &kb_apply(&d, &kj, &nb_apply(&d, &gv)).unwrap());
        let b = inner(&f, &bkb) / 2.0;
        assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "grade {j}");
    }
}

#[test]
fn spherical_function_values() {
    for q in 2..5usize {
        for &l in &[-2.5, -0.3, 0.0, 1.1, 2.7] {
            assert_eq!(spherical_phi(q, l, 0), 1.0);
            assert!((spherical_phi(q, l, 1) - l / (q as f64 + 1.0)).abs() < 1e-15);
            for r in 0..12 {
                let a = spherical_phi(q, l, r);
                let b = spherical_phi_closed(q, l, r).unwrap();
                assert!((a - b).abs() < 1e-12, "q={q} λ={l} r={r}: {a} {b}");
            }
        }
        assert!((spherical_phi(q, 0.0, 2) + 1.0 / q as f64).abs() < 1e-15);
        assert!(spherical_phi_closed(q, 2.0 * (q as f64).sqrt() + 0.1, 3).is_none());
    }
}

#[test]
fn sphere_kernels_are_spherical_polynomials() {
    for g in [random_regular(30, 3, 1).unwrap(), petersen(), random_regular(24, 4, 2).unwrap()] {
        let d = space(&g, 5);
        for k in 0..=5 {
            let sk = kg_matrix(&d, &sphere_kernel(&d, k).unwrap()).unwrap().to_dense();
            let phi = spherical_polynomial_matrix(&g, k).unwrap();
            let err = sk.iter().zip(&phi).map(|(a, b)| (a.re - b).abs() + a.im.abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "k={k}: {err}");
        }
    }
}

#[test]
fn quantum_variance_examples() {
    let g = random_regular(40, 3, 9).unwrap();
    let es = eigensystem(&g).unwrap();
    let d = space(&g, 3);
    let v = quantum_variance(&es, &d, &NbKernel::constant(&d, 0, c(1.0)).unwrap()).unwrap();
    assert!((v.value - 1.0).abs() < 1e-12);
    let mut delta = vec![c(0.0); 40];
    delta[7] = c(1.0);
    let v = quantum_variance(&es, &d, &NbKernel::single(0, delta)).unwrap();
    let want: f64 = (0..40).map(|j| es.vector(j)[7].powi(4)).sum::<f64>() / 40.0;
    assert!((v.value - want).abs() < 1e-14);
    for k in 1..=3 {
        let r = NbKernel::random(&d, k, k as u64).unwrap();
        let hsn = kg_matrix(&d, &r).unwrap().hsn_norm();
        assert!(quantum_variance(&es, &d, &r).unwrap().value <= hsn * hsn + 1e-12);
    }
}

#[test]
fn variance_invariance_under_sigma_n() {
    let g = random_regular(200, 3, 17).unwrap();
    let es = eigensystem(&g).unwrap();
    let d = space(&g, 7);
    let k = one(&d, 1, 4);
    let base = quantum_variance(&es, &d, &NbKernel::single(0, nabla_star(&d, 0, &k).unwrap())).unwrap().value;
    for n in 1..=3 {
        let s = nabla_star_sigma_n(&d, 1, &k, n).unwrap();
        let v = quantum_variance(&es, &d, &s).unwrap().value;
        assert!((v - base).abs() < 1e-9, "n={n}: {v} vs {base}");
    }
    for j in 1..=3 {
        let kj = one(&d, j, 30 + j as u64);
        assert!(smuggle_gap(&es, &d, j, &kj).unwrap() < 1e-9);
    }
}

#[test]
fn commutator_identity_for_any_vector() {
    let g = random_regular(30, 3, 12).unwrap();
    let d = space(&g, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for k in 1..=3 {
        let t = commutator_terms(&d, k, &one(&d, k, k as u64), &psi).unwrap();
        assert!(t.identity_residual() < 1e-12, "k={k}");
    }
    // On eigenvectors the commutator vanishes.
    let es = eigensystem(&g).unwrap();
    let t = commutator_terms(&d, 2, &one(&d, 2, 3), es.vector(5)).unwrap();
    assert!(t.commutator.norm() < 1e-12);
}

#[test]
fn reduction_inequality() {
    let g = random_regular(60, 3, 2).unwrap();
    let es = eigensystem(&g).unwrap();
    let d = space(&g, 3);
    for k in 0..=2 {
        let kv = NbKernel::random(&d, k, 10 + k as u64).unwrap().centred();
        assert!(kv.is_mean_zero(60));
        let (lhs, rhs) = reduction_check(&es, &d, k, kv.grade(k).unwrap(), 6).unwrap();
        assert!(lhs <= rhs + 1e-12, "k={k}: {lhs} > {rhs}");
    }
}

#[test]
fn discrepancy_examples() {
    let g = random_regular(60, 3, 3).unwrap();
    let es = eigensystem(&g).unwrap();
    let id = qe_discrepancy(&es, &g, &BoundedKernel::identity(60), 0).unwrap();
    assert!(id.value < 1e-24);
    let order: Vec<usize> = (0..60).collect();
    let half = BoundedKernel::centred_half_indicator(&order);
    let rep = qe_discrepancy(&es, &g, &half, 0).unwrap();
    let d = space(&g, 0);
    let a: Vec<C64> = half.entries.iter().map(|e| e.2).collect();
    let var = quantum_variance(&es, &d, &NbKernel::single(0, a)).unwrap().value;
    assert!((rep.value - var).abs() < 1e-14);
    assert!(rep.max_grade_gap < 1e-14);
    // Range-2 kernel on Petersen: every vertex has radius 2, so both forms agree.
    let p = petersen();
    let pes = eigensystem(&p).unwrap();
    let mut entries = Vec::new();
    for x in 0..10 {
        let dist = p.distances_from(x);
        for y in 0..10 {
            if dist[y] <= 2 {
                entries.push((x, y, C64::new(0.5 * ((x + 2 * y) % 3) as f64 - 0.4, 0.1)));
            }
        }
    }
    let bk = BoundedKernel { n: 10, entries };
    let r = qe_discrepancy(&pes, &p, &bk, 2).unwrap();
    assert_eq!(r.bad_fraction, 0.0);
    assert!(r.max_grade_gap < 1e-12);
    assert!((r.value - r.grade_value).abs() < 1e-12);
    assert!(qe_discrepancy(&pes, &p, &bk, 1).is_err());
    let big = BoundedKernel { n: 10, entries: vec![(0, 0, c(1.5))] };
    assert!(qe_discrepancy(&pes, &p, &big, 0).is_err());
}

fn constant_zeta(d: &DirectedEdgeSpace, q: f64, gamma: C64) -> Vec<C64> {
    vec![regular_tree_zeta(q, gamma); d.edge_count()]
}

#[test]
fn regular_tree_zeta_root() {
    for &(re, im) in &[(0.3, 0.1), (1.0, 0.0), (-2.0, 0.01), (3.5, 0.0), (-3.5, 0.2)] {
        let g = C64::new(re, im);
        let z = regular_tree_zeta(2.0, g);
        assert!((2.0 * z * z - g * z + 1.0).norm() < 1e-13);
        if im > 0.0 || re.abs() < 2.0 * 2f64.sqrt() {
            assert!(z.im < 0.0);
        } else {
            assert!(z.norm() < 1.0);
        }
    }
}

#[test]
fn edge_functions_transport() {
    let g = random_regular(60, 3, 14).unwrap();
    let es = eigensystem(&g).unwrap();
    let d = space(&g, 2);
    let bulk: Vec<usize> = (0..60).filter(|&j| es.values[j].abs() < 2.7).collect();
    let at0 = nb_eigenvectors(&es, &d, 0.0, &bulk, |gm| Ok(constant_zeta(&d, 2.0, gm))).unwrap();
    for r in &at0.residuals {
        assert!(r.forward < 1e-9 && r.adjoint < 1e-9);
        assert!(r.forward_defect < 1e-9);
    }
    let at1 = nb_eigenvectors(&es, &d, 0.01, &bulk, |gm| Ok(constant_zeta(&d, 2.0, gm))).unwrap();
    for r in &at1.residuals {
        assert!(r.forward < 1e-9 && r.adjoint < 1e-9);
        assert!(r.forward_defect <= r.forward_bound + 1e-9);
        assert!(r.adjoint_defect <= r.adjoint_bound + 1e-9);
    }
    // A random unit vector is not transported.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut v: Vec<f64> = (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    let z = constant_zeta(&d, 2.0, C64::new(0.5, 0.0));
    assert!(nb_residual(&d, &v, 0.0, &z).unwrap().forward > 0.1);
    // Transport invariance of the edge form at η₀ = 0.
    let j = bulk[bulk.len() / 2];
    let z = constant_zeta(&d, 2.0, C64::new(es.values[j], 0.0));
    let (f, fs) = nb_pair(&d, es.vector(j), &z).unwrap();
    let k = NbKernel::random(&d, 2, 3).unwrap();
    let base = nb_transported_form(&d, &k, &f, &fs, &z, 0, 0).unwrap();
    for (a, b) in [(1, 0), (0, 2), (3, 1)] {
        let t = nb_transported_form(&d, &k, &f, &fs, &z, a, b).unwrap();
        assert!((t - base).norm() < 1e-9, "{a},{b}");
    }
    let var = nb_variance(&es, &d, &k, (-2.0, 2.0), 0.0, |gm| Ok(constant_zeta(&d, 2.0, gm))).unwrap();
    assert!(var.value >= 0.0 && var.per_eigenfunction_terms.len() <= 60);
    assert_eq!(var.interval, Some((-2.0, 2.0)));
    let none = nb_eigenvectors(&es, &d, 0.0, &[0], |_| Ok(Vec::new()));
    assert!(matches!(none, Err(crate::Error::KernelContract(_))));
}

#[test]
fn s_gamma_on_regular_data() {
    let g = random_regular(30, 3, 4).unwrap();
    let d = space(&g, 3);
    let gm = C64::new(1.0, 0.01);
    let z = constant_zeta(&d, 2.0, gm);
    for k in 1..=3 {
        let rep = s_gamma_diagnostics(&d, k, &z, gm).unwrap();
        assert!(rep.max_sumzeta_residual < 1e-12);
        assert!(rep.row_sums.iter().all(|&s| s < 1.0 && s > 0.9));
        assert!(rep.max_phase_modulus_error < 1e-12);
    }
    let g0 = C64::new(1.0, 0.0);
    let z0 = constant_zeta(&d, 2.0, g0);
    for k in 1..=3 {
        let rep = s_gamma_diagnostics(&d, k, &z0, g0).unwrap();
        assert!(rep.max_sumzeta_residual < 1e-12);
        assert!(rep.row_sums.iter().all(|&s| (s - 1.0).abs() < 1e-10));
        let nu = s_gamma_invariant_measure(&d, k, &z0, 400).unwrap();
        let u = 1.0 / d.len(k) as f64;
        assert!(nu.iter().all(|&x| (x - u).abs() < 1e-9));
    }
    let outside = constant_zeta(&d, 2.0, C64::new(3.5, 0.0));
    assert!(matches!(s_gamma_diagnostics(&d, 1, &outside, C64::new(3.5, 0.0)), Err(crate::Error::ZeroImaginaryPart(_))));
}
