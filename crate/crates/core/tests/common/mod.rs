//! Shared generators for the randomized suites: bi-graded complexes with
//! prescribed rank patterns (via conjugated staircase normal forms, so the
//! square-zero relations hold exactly), and involution-equipped complexes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use torsionlab_core::bicomplex::BiGradedComplex;
use torsionlab_core::chirality::ChiralityComplex;
use torsionlab_core::linalg::{self, CMatrix, ToleranceConfig};

pub fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        complex(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random invertible matrix, regenerated until comfortably nonsingular.
pub fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    loop {
        let m = random_matrix(n, n, rng);
        let sv = m.clone().singular_values();
        if sv[sv.len() - 1] > 0.1 * sv[0] && sv[sv.len() - 1] > 1e-3 {
            return m;
        }
    }
}

/// Staircase map of the given rank: the last `rank` coordinates of the
/// source map onto the first `rank` coordinates of the target.
fn staircase(rows: usize, cols: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rank {
        // A random nonzero pivot keeps the spectra spread out.
        let pivot = complex(rng.gen_range(0.3..1.5), rng.gen_range(-0.5..0.5));
        m[(i, cols - rank + i)] = pivot;
    }
    m
}

/// Degree-increasing differential with exact `d^2 = 0` and prescribed edge
/// ranks, conjugated by random invertible changes of basis per degree.
fn conjugated_differentials(
    dims: &[usize],
    ranks: &[usize],
    rng: &mut ChaCha8Rng,
) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let n = dims.len() - 1;
    let basis: Vec<CMatrix> = dims.iter().map(|&m| random_invertible(m, rng)).collect();
    let inverses: Vec<CMatrix> = basis
        .iter()
        .map(|p| {
            if p.nrows() == 0 {
                CMatrix::zeros(0, 0)
            } else {
                p.clone().try_inverse().expect("invertible by construction")
            }
        })
        .collect();
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        let hat = staircase(dims[j + 1], dims[j], ranks[j], rng);
        d.push(&basis[j + 1] * hat * &inverses[j]);
    }
    (d, basis)
}

/// The staircase normal form nests images in kernels when consecutive ranks
/// fit: `rank[j] + rank[j+1] <= dims[j+1]` must hold, and the image block of
/// degree `j` (the first `rank[j]` coordinates) must avoid the lift block of
/// degree `j + 1` (the last `rank[j+1]` coordinates).
fn ranks_fit(dims: &[usize], ranks: &[usize]) -> bool {
    let n = dims.len() - 1;
    for j in 0..n {
        if ranks[j] > dims[j].min(dims[j + 1]) {
            return false;
        }
        if j + 1 < n && ranks[j] + ranks[j + 1] > dims[j + 1] {
            return false;
        }
    }
    true
}

/// Random bi-graded complex with the given dimensions and edge ranks for the
/// two differentials. `dstar` edge rank `r*[e]` is the rank of the map from
/// degree `e + 1` down to degree `e`.
pub fn random_bigraded(
    dims: &[usize],
    d_ranks: &[usize],
    dstar_ranks: &[usize],
    rng: &mut ChaCha8Rng,
) -> BiGradedComplex {
    assert!(ranks_fit(dims, d_ranks), "d ranks {d_ranks:?} do not fit {dims:?}");
    let reversed_dims: Vec<usize> = dims.iter().rev().copied().collect();
    let reversed_ranks: Vec<usize> = dstar_ranks.iter().rev().copied().collect();
    assert!(
        ranks_fit(&reversed_dims, &reversed_ranks),
        "dstar ranks {dstar_ranks:?} do not fit {dims:?}"
    );
    let (d, _) = conjugated_differentials(dims, d_ranks, rng);
    // Build dstar as a degree-increasing complex on the reversed grading,
    // then flip it back.
    let (rev_d, _) = conjugated_differentials(&reversed_dims, &reversed_ranks, rng);
    let n = dims.len() - 1;
    let dstar: Vec<CMatrix> = (0..n).map(|e| rev_d[n - 1 - e].clone()).collect();
    BiGradedComplex::new(dims.to_vec(), d, dstar).expect("consistent shapes")
}

/// Smallest sharp-Laplacian eigenvalue modulus across all degrees.
pub fn min_laplacian_modulus(x: &BiGradedComplex) -> f64 {
    let mut min = f64::INFINITY;
    for j in 0..=x.top_degree() {
        let lap = x.sharp_laplacian(j).unwrap();
        if lap.nrows() == 0 {
            continue;
        }
        for mu in linalg::eigenvalues(&lap).unwrap() {
            min = min.min(mu.norm());
        }
    }
    min
}

/// Random acyclic complex (both differentials have saturated ranks) with all
/// sharp Laplacians comfortably invertible.
pub fn random_acyclic(top_degree: usize, max_rank: usize, rng: &mut ChaCha8Rng) -> BiGradedComplex {
    loop {
        // Saturated staircase: dims[j] = r[j-1] + r[j] forces acyclicity of
        // d; the dstar ranks must then mirror them (r*[e] = r[e]).
        let ranks: Vec<usize> = (0..top_degree)
            .map(|_| rng.gen_range(1..=max_rank))
            .collect();
        let mut dims = Vec::with_capacity(top_degree + 1);
        for j in 0..=top_degree {
            let below = if j > 0 { ranks[j - 1] } else { 0 };
            let here = if j < top_degree { ranks[j] } else { 0 };
            dims.push(below + here);
        }
        let x = random_bigraded(&dims, &ranks, &ranks, rng);
        if min_laplacian_modulus(&x) > 1e-3 {
            return x;
        }
    }
}

/// Random acyclic complex whose `dstar` is the conjugate transpose of `d`.
pub fn random_selfadjoint_acyclic(
    top_degree: usize,
    max_rank: usize,
    rng: &mut ChaCha8Rng,
) -> BiGradedComplex {
    loop {
        let base = random_acyclic(top_degree, max_rank, rng);
        let dstar: Vec<CMatrix> = base.d_maps().iter().map(|m| m.adjoint()).collect();
        let x = BiGradedComplex::new(base.dims().to_vec(), base.d_maps().to_vec(), dstar)
            .expect("consistent shapes");
        if min_laplacian_modulus(&x) > 1e-3 {
            return x;
        }
    }
}

/// Random complex with nontrivial cohomology on both sides, plus ambient
/// representatives for its cohomology and homology bases.
pub fn random_with_cohomology(rng: &mut ChaCha8Rng) -> BiGradedComplex {
    let tol = ToleranceConfig::default();
    loop {
        let top = rng.gen_range(1..=3usize);
        let mut dims: Vec<usize> = (0..=top).map(|_| rng.gen_range(1..=4usize)).collect();
        let mut d_ranks: Vec<usize> = vec![0; top];
        let mut dstar_ranks: Vec<usize> = vec![0; top];
        for j in 0..top {
            let max_d = dims[j].min(dims[j + 1]);
            d_ranks[j] = rng.gen_range(0..=max_d);
            dstar_ranks[j] = rng.gen_range(0..=max_d);
        }
        // Trim until both staircases fit.
        for j in 0..top {
            while j + 1 < top && d_ranks[j] + d_ranks[j + 1] > dims[j + 1] {
                d_ranks[j + 1] -= 1;
            }
            while j + 1 < top && dstar_ranks[j] + dstar_ranks[j + 1] > dims[j + 1] {
                dstar_ranks[j + 1] -= 1;
            }
        }
        dims.iter_mut().for_each(|m| *m = (*m).max(1));
        let x = random_bigraded(&dims, &d_ranks, &dstar_ranks, rng);
        if x.validate(&tol).is_valid() {
            return x;
        }
    }
}

/// A second chirality complex over the same graded space and involution as
/// `reference`, with an independent differential.
pub fn random_chirality_matching(
    reference: &ChiralityComplex,
    rng: &mut ChaCha8Rng,
) -> ChiralityComplex {
    let tol = ToleranceConfig::default();
    let dims = reference.dims().to_vec();
    let n = dims.len() - 1;
    let gamma: Vec<CMatrix> = (0..=n).map(|k| reference.gamma(k).clone()).collect();
    loop {
        let d = if n == 1 {
            vec![random_matrix(dims[1], dims[0], rng)]
        } else {
            let r0 = rng.gen_range(0..=dims[0].min(dims[1]));
            let r1 = rng.gen_range(0..=(dims[1] - r0).min(dims[2]));
            let r2 = rng.gen_range(0..=(dims[2] - r1).min(dims[3]));
            let (d, _) = conjugated_differentials(&dims, &[r0, r1, r2], rng);
            d
        };
        if let Ok(xg) = ChiralityComplex::new(dims.clone(), d, gamma.clone(), &tol) {
            return xg;
        }
    }
}

/// Random chirality complex of top degree 1 or 3 with palindromic dims,
/// exact involution, and exact `d^2 = 0`.
pub fn random_chirality(top_degree: usize, rng: &mut ChaCha8Rng) -> ChiralityComplex {
    let tol = ToleranceConfig::default();
    assert!(top_degree == 1 || top_degree == 3);
    loop {
        let (dims, d) = if top_degree == 1 {
            let m = rng.gen_range(1..=3usize);
            (vec![m, m], vec![random_matrix(m, m, rng)])
        } else {
            let a = rng.gen_range(1..=2usize);
            let b = rng.gen_range(1..=3usize);
            let dims = vec![a, b, b, a];
            let r0 = rng.gen_range(0..=a.min(b));
            let r1 = rng.gen_range(0..=(b - r0).min(b));
            let r2 = rng.gen_range(0..=(b - r1).min(a));
            let (d, _) = conjugated_differentials(&dims, &[r0, r1, r2], rng);
            (dims, d)
        };
        let n = dims.len() - 1;
        let mut gamma: Vec<Option<CMatrix>> = vec![None; n + 1];
        for k in 0..=n / 2 {
            let g = random_invertible(dims[k], rng);
            if k == n - k {
                // Middle degree needs a genuine involution.
                let s = random_invertible(dims[k], rng);
                let s_inv = s.clone().try_inverse().unwrap();
                let mut diag = CMatrix::identity(dims[k], dims[k]);
                for i in 0..dims[k] {
                    if rng.gen_bool(0.5) {
                        diag[(i, i)] = complex(-1.0, 0.0);
                    }
                }
                gamma[k] = Some(&s * diag * s_inv);
            } else {
                gamma[n - k] = Some(g.clone().try_inverse().unwrap());
                gamma[k] = Some(g);
            }
        }
        let gamma: Vec<CMatrix> = gamma.into_iter().map(|g| g.unwrap()).collect();
        if let Ok(xg) = ChiralityComplex::new(dims, d, gamma, &tol) {
            return xg;
        }
    }
}
