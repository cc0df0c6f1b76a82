//! Dense complex linear algebra with rank-revealing kernels and
//! generalized-eigenspace spectral projectors for non-normal matrices.
//!
//! Everything here is double precision and dense; the intended matrix sizes
//! are small (well under ~200). Spectral projectors are computed from
//! generalized eigenspaces, so they are valid for defective and non-normal
//! inputs alike.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Tolerances shared by the rank-revealing and spectral routines.
///
/// * `rank_tol`: relative singular-value threshold for numerical rank;
/// * `cluster_tol`: eigenvalue clustering radius, relative to the matrix norm;
/// * `check_tol`: threshold used when verifying identities such as
///   idempotency of projectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub rank_tol: f64,
    pub cluster_tol: f64,
    pub check_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            cluster_tol: 1e-8,
            check_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    /// Validates that all tolerances are strictly positive and below one.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("cluster_tol", self.cluster_tol),
            ("check_tol", self.check_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {v} must lie strictly between 0 and 1"
                )));
            }
        }
        Ok(())
    }
}

/// A cluster of eigenvalues together with the spectral projector onto the
/// sum of their generalized eigenspaces.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub center: Complex64,
    pub algebraic_multiplicity: usize,
    pub projector: CMatrix,
}

/// Rejects matrices containing NaN or infinite entries.
pub fn check_finite(a: &CMatrix) -> Result<()> {
    for row in 0..a.nrows() {
        for col in 0..a.ncols() {
            let z = a[(row, col)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

fn check_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

/// Spectral norm estimate via the largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values()[0]
}

/// Orthonormal basis of the numerical kernel of `a`.
///
/// Singular values below `rank_tol` times the largest one count as zero; the
/// returned vectors are the corresponding right singular vectors, so they are
/// orthonormal and their count is `cols - rank`.
pub fn kernel_basis(a: &CMatrix, tol: &ToleranceConfig) -> Result<Vec<CVector>> {
    check_finite(a)?;
    tol.validate()?;
    let cols = a.ncols();
    if cols == 0 {
        return Ok(Vec::new());
    }
    if a.nrows() == 0 {
        // No constraints: the kernel is all of the domain.
        return Ok((0..cols)
            .map(|j| CVector::from_fn(cols, |i, _| complex(if i == j { 1.0 } else { 0.0 }, 0.0)))
            .collect());
    }
    // The thin SVD only returns min(rows, cols) right singular vectors; pad
    // with zero rows so V^H is square and spans the whole domain.
    let work = if a.nrows() < cols {
        let mut padded = CMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values[0];
    let cutoff = tol.rank_tol * smax.max(1e-300);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let mut basis = Vec::with_capacity(cols - rank);
    for i in rank..cols {
        basis.push(v_t.row(i).conjugate().transpose());
    }
    Ok(basis)
}

/// Numerical rank with the same threshold rule as [`kernel_basis`].
pub fn numerical_rank(a: &CMatrix, tol: &ToleranceConfig) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let cutoff = tol.rank_tol * sv[0].max(1e-300);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormal basis of the column space of `a`.
pub fn column_space_basis(a: &CMatrix, tol: &ToleranceConfig) -> Vec<CVector> {
    column_space_basis_floor(a, 0.0, tol)
}

/// Column-space basis with an absolute scale floor on the rank threshold.
///
/// The cutoff is `rank_tol * max(sigma_max, floor)`; a positive floor keeps
/// rounding noise in a nearly-zero matrix from being counted as rank when the
/// relevant scale is known externally (e.g. projections of orthonormal sets,
/// whose genuine singular values are 1).
pub fn column_space_basis_floor(a: &CMatrix, floor: f64, tol: &ToleranceConfig) -> Vec<CVector> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let cutoff = tol.rank_tol * svd.singular_values[0].max(floor).max(1e-300);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    (0..rank).map(|i| u.column(i).into_owned()).collect()
}

/// Determinant via LU with partial pivoting.
pub fn determinant(a: &CMatrix) -> Result<Complex64> {
    check_finite(a)?;
    check_square(a)?;
    if a.nrows() == 0 {
        return Ok(complex(1.0, 0.0));
    }
    Ok(a.clone().lu().determinant())
}

/// Eigenvalues with algebraic multiplicity, via the complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    check_finite(a)?;
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 10_000)
        .ok_or(Error::EigenFailure)?;
    let vals = schur.eigenvalues().ok_or(Error::EigenFailure)?;
    Ok(vals.iter().copied().collect())
}

/// Single-linkage clustering of eigenvalues with the given absolute radius.
///
/// Returns groups of indices into `eigs`; two eigenvalues end up in the same
/// group whenever they are joined by a chain of steps each shorter than
/// `radius`.
pub fn cluster_eigenvalues(eigs: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigs[i] - eigs[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Generalized eigenspace of `a` for the (numerically clustered) eigenvalue
/// `mu`, grown until the kernel dimension stabilizes.
///
/// The space is computed iteratively: `V_1 = ker(a - mu)` and
/// `V_{k+1} = { x : (a - mu) x in V_k }`, which avoids forming explicit high
/// powers of `a - mu`.
fn generalized_eigenspace(
    a: &CMatrix,
    mu: Complex64,
    max_dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<CVector>> {
    let n = a.nrows();
    let shifted = a - CMatrix::identity(n, n) * mu;
    let mut basis = kernel_basis(&shifted, tol)?;
    loop {
        if basis.len() >= max_dim || basis.is_empty() {
            return Ok(basis);
        }
        // (I - V V^H)(a - mu): kernel = preimage of span(V) under (a - mu).
        let v = mat_from_columns(n, &basis);
        let proj = CMatrix::identity(n, n) - &v * v.adjoint();
        let next = kernel_basis(&(proj * &shifted), tol)?;
        if next.len() <= basis.len() {
            return Ok(basis);
        }
        basis = next;
    }
}

/// Assembles column vectors into a matrix. `rows` disambiguates the empty case.
pub fn mat_from_columns(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Spectral projector onto the sum of generalized eigenspaces for the
/// eigenvalues nearest the requested `cluster_centers`.
///
/// The projector is the orthogonal-complement-free one determined by the
/// invariant splitting: its image is the requested generalized eigenspace and
/// its kernel is the complementary one, so it commutes with `a` but is not
/// Hermitian in general. Requires the requested cluster to be separated from
/// the remaining spectrum by more than `cluster_tol`.
pub fn generalized_eigenprojector(
    a: &CMatrix,
    cluster_centers: &[Complex64],
    tol: &ToleranceConfig,
) -> Result<SpectralCluster> {
    check_finite(a)?;
    check_square(a)?;
    tol.validate()?;
    let eigs = eigenvalues(a)?;
    let radius = cluster_radius(a, tol);
    let groups = cluster_eigenvalues(&eigs, radius);

    // A group is selected when any requested center lies within the linkage
    // radius of one of its eigenvalues.
    let mut selected = vec![false; groups.len()];
    for center in cluster_centers {
        let mut hit = false;
        for (g, group) in groups.iter().enumerate() {
            if group.iter().any(|&i| (eigs[i] - center).norm() <= radius) {
                selected[g] = true;
                hit = true;
            }
        }
        if !hit {
            return Err(Error::ClusterNotSeparated(format!(
                "no eigenvalue within clustering radius of requested center {center}"
            )));
        }
    }
    split_by_groups(a, &eigs, &groups, &selected, tol)
}

fn cluster_radius(a: &CMatrix, tol: &ToleranceConfig) -> f64 {
    tol.cluster_tol * spectral_norm(a).max(1.0)
}

/// Builds the spectral projector for the union of the selected eigenvalue
/// groups, verifying separation and the projector identities.
fn split_by_groups(
    a: &CMatrix,
    eigs: &[Complex64],
    groups: &[Vec<usize>],
    selected: &[bool],
    tol: &ToleranceConfig,
) -> Result<SpectralCluster> {
    let n = a.nrows();
    let radius = cluster_radius(a, tol);

    // Separation between the selected and unselected parts of the spectrum.
    for (g, group) in groups.iter().enumerate() {
        if !selected[g] {
            continue;
        }
        for (h, other) in groups.iter().enumerate() {
            if selected[h] {
                continue;
            }
            for &i in group {
                for &j in other {
                    let gap = (eigs[i] - eigs[j]).norm();
                    if gap <= radius {
                        return Err(Error::ClusterNotSeparated(format!(
                            "gap {gap:.3e} between {} and {} is below the clustering radius {radius:.3e}",
                            eigs[i], eigs[j]
                        )));
                    }
                }
            }
        }
    }

    let mut inside: Vec<CVector> = Vec::new();
    let mut outside: Vec<CVector> = Vec::new();
    let mut multiplicity = 0usize;
    let mut center_acc = Complex64::new(0.0, 0.0);
    for (g, group) in groups.iter().enumerate() {
        let mu = group.iter().map(|&i| eigs[i]).sum::<Complex64>() / complex(group.len() as f64, 0.0);
        let space = generalized_eigenspace(a, mu, group.len(), tol)?;
        if space.len() != group.len() {
            return Err(Error::ClusterNotSeparated(format!(
                "generalized eigenspace at {mu} has dimension {} but algebraic multiplicity {}",
                space.len(),
                group.len()
            )));
        }
        if selected[g] {
            multiplicity += group.len();
            center_acc += mu * complex(group.len() as f64, 0.0);
            inside.extend(space);
        } else {
            outside.extend(space);
        }
    }

    if inside.len() + outside.len() != n {
        return Err(Error::ClusterNotSeparated(format!(
            "generalized eigenspaces span dimension {} of {n}",
            inside.len() + outside.len()
        )));
    }

    // P = [K | 0] [K | L]^{-1}: identity on the selected generalized
    // eigenspace, zero on the complementary one.
    let projector = if inside.is_empty() {
        CMatrix::zeros(n, n)
    } else if outside.is_empty() {
        CMatrix::identity(n, n)
    } else {
        let mut full = mat_from_columns(n, &inside);
        let l = mat_from_columns(n, &outside);
        full = CMatrix::from_columns(
            &full
                .column_iter()
                .chain(l.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
        let inv = full
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::ClusterNotSeparated("combined eigenbasis is singular".into()))?;
        let mut padded = mat_from_columns(n, &inside);
        padded = CMatrix::from_columns(
            &padded
                .column_iter()
                .map(|c| c.into_owned())
                .chain((0..outside.len()).map(|_| CVector::zeros(n)))
                .collect::<Vec<_>>(),
        );
        padded * inv
    };

    let center = if multiplicity > 0 {
        center_acc / complex(multiplicity as f64, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    };

    verify_projector(a, &projector, multiplicity, tol)?;
    Ok(SpectralCluster {
        center,
        algebraic_multiplicity: multiplicity,
        projector,
    })
}

/// Checks idempotency, commutation with `a`, and the trace rule.
fn verify_projector(
    a: &CMatrix,
    p: &CMatrix,
    multiplicity: usize,
    tol: &ToleranceConfig,
) -> Result<()> {
    let scale = spectral_norm(p).max(1.0);
    let idem = spectral_norm(&(p * p - p));
    if idem > tol.check_tol * scale {
        return Err(Error::ClusterNotSeparated(format!(
            "projector not idempotent: residual {idem:.3e}"
        )));
    }
    let comm = spectral_norm(&(p * a - a * p));
    if comm > tol.check_tol * spectral_norm(a).max(1.0) {
        return Err(Error::ClusterNotSeparated(format!(
            "projector does not commute with the matrix: residual {comm:.3e}"
        )));
    }
    let trace = p.trace();
    if (trace - complex(multiplicity as f64, 0.0)).norm() > tol.check_tol * (multiplicity as f64).max(1.0) {
        return Err(Error::ClusterNotSeparated(format!(
            "projector trace {trace} differs from multiplicity {multiplicity}"
        )));
    }
    Ok(())
}

/// Splits the space into the generalized eigenspaces of `a` with eigenvalue
/// modulus at most `lambda_cut` (low) and above it (high).
///
/// The interval `[0, lambda_cut]` is closed, so `lambda_cut = 0` selects the
/// numerical generalized kernel: eigenvalues within the clustering radius of
/// zero count as zero. For a positive cut, an eigenvalue modulus within the
/// clustering radius of the cut circle is rejected as ill-posed.
pub fn invariant_split(
    a: &CMatrix,
    lambda_cut: f64,
    tol: &ToleranceConfig,
) -> Result<(CMatrix, CMatrix)> {
    check_finite(a)?;
    check_square(a)?;
    tol.validate()?;
    let n = a.nrows();
    let eigs = eigenvalues(a)?;
    let radius = cluster_radius(a, tol);
    let is_low = |modulus: f64| {
        if lambda_cut <= 0.0 {
            modulus <= radius
        } else {
            modulus <= lambda_cut
        }
    };
    if lambda_cut > 0.0 {
        for mu in &eigs {
            if (mu.norm() - lambda_cut).abs() <= radius {
                return Err(Error::EigenvalueOnCut {
                    modulus: mu.norm(),
                    cut: lambda_cut,
                });
            }
        }
    }
    let groups = cluster_eigenvalues(&eigs, radius);
    let selected: Vec<bool> = groups.iter().map(|g| is_low(eigs[g[0]].norm())).collect();
    // A single-linkage group straddling the cut circle would be ill-posed.
    for (g, group) in groups.iter().enumerate() {
        for &i in group {
            if is_low(eigs[i].norm()) != selected[g] {
                return Err(Error::EigenvalueOnCut {
                    modulus: eigs[i].norm(),
                    cut: lambda_cut,
                });
            }
        }
    }
    let cluster = split_by_groups(a, &eigs, &groups, &selected, tol)?;
    let p_low = cluster.projector;
    let p_high = CMatrix::identity(n, n) - &p_low;
    Ok((p_low, p_high))
}

/// Convenience constructor for a complex scalar.
pub fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
