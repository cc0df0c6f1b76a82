//! Determinant-line algebra: wedge coordinates, the torsion isomorphisms of a
//! based complex, fusion of determinant lines, and the flip isomorphism.
//!
//! A determinant-line element is stored as a scalar coordinate against
//! explicitly chosen bases, plus a signature describing the tensor-factor
//! lines. Every identity downstream is a statement about such coordinates
//! once bases are fixed.
//!
//! Conventions are pinned by the two-term anchors: the acyclic complex
//! `0 -> C -(a)-> C -> 0` has torsion coordinate `a`, and the degree-
//! decreasing two-term complex with map `(b)` has coordinate `1/b`, so that
//! the combined bi-graded torsion of the pair is `a * b`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, complex, mat_from_columns, spectral_norm, CMatrix, CVector, ToleranceConfig,
};

/// A subspace given by an explicit list of basis vectors in ambient
/// coordinates.
#[derive(Debug, Clone)]
pub struct BasedSpace {
    basis: Vec<CVector>,
}

impl BasedSpace {
    /// Builds a based space, checking that the vectors are linearly
    /// independent at the configured rank tolerance.
    pub fn new(basis: Vec<CVector>, tol: &ToleranceConfig) -> Result<Self> {
        if let Some(first) = basis.first() {
            let ambient = first.len();
            if basis.iter().any(|v| v.len() != ambient) {
                return Err(Error::DimensionMismatch(
                    "basis vectors with unequal ambient dimensions".into(),
                ));
            }
            let m = mat_from_columns(ambient, &basis);
            if linalg::numerical_rank(&m, tol) != basis.len() {
                return Err(Error::DimensionMismatch(
                    "basis vectors are not linearly independent".into(),
                ));
            }
        }
        Ok(Self { basis })
    }

    /// The standard basis of an `n`-dimensional coordinate space.
    pub fn standard(n: usize) -> Self {
        Self {
            basis: (0..n)
                .map(|j| CVector::from_fn(n, |i, _| complex(if i == j { 1.0 } else { 0.0 }, 0.0)))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dimension(&self) -> usize {
        self.basis.first().map_or(0, |v| v.len())
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> CMatrix {
        mat_from_columns(self.ambient_dimension(), &self.basis)
    }
}

/// One tensor factor of a determinant line: a label, the dimension of the
/// underlying space, and the exponent (+1 for the line, -1 for its dual).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineFactor {
    pub label: String,
    pub dimension: usize,
    pub exponent: i8,
}

impl LineFactor {
    pub fn new(label: impl Into<String>, dimension: usize, exponent: i8) -> Self {
        assert!(exponent == 1 || exponent == -1, "exponent must be +1 or -1");
        Self {
            label: label.into(),
            dimension,
            exponent,
        }
    }

    fn parity(&self) -> usize {
        self.dimension % 2
    }
}

/// An element of a tensor product of determinant lines, stored as a scalar
/// coordinate plus the signature of the factors.
#[derive(Debug, Clone)]
pub struct DetLineElement {
    pub coordinate: Complex64,
    pub signature: Vec<LineFactor>,
    pub degenerate: bool,
}

impl DetLineElement {
    pub fn new(coordinate: Complex64, signature: Vec<LineFactor>) -> Result<Self> {
        if !coordinate.re.is_finite() || !coordinate.im.is_finite() {
            return Err(Error::DegenerateTorsion("non-finite coordinate".into()));
        }
        if coordinate.norm() == 0.0 {
            return Err(Error::DegenerateTorsion(
                "zero coordinate requires the degenerate flag".into(),
            ));
        }
        Ok(Self {
            coordinate,
            signature,
            degenerate: false,
        })
    }

    /// Marks a degenerate construction, where a zero coordinate is allowed.
    pub fn degenerate(coordinate: Complex64, signature: Vec<LineFactor>) -> Self {
        Self {
            coordinate,
            signature,
            degenerate: true,
        }
    }

    /// The multiplicative identity on the empty tensor product.
    pub fn unit() -> Self {
        Self {
            coordinate: complex(1.0, 0.0),
            signature: Vec::new(),
            degenerate: false,
        }
    }
}

/// Sign conventions for the global sign of a torsion element.
///
/// `Plain` applies no extra sign. `CmSign` and `BkSign` are pluggable hooks
/// for sign-refined conventions defined in external work; unless a hook is
/// installed they also apply no sign, and results that depend on such a
/// choice are compared through moduli or ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMode {
    Plain,
    CmSign,
    BkSign,
}

impl SignMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignMode::Plain => "plain",
            SignMode::CmSign => "cm_sign",
            SignMode::BkSign => "bk_sign",
        }
    }
}

/// Summary data handed to a sign hook: per-degree dimensions and cohomology
/// dimensions of the complex the sign is evaluated on.
#[derive(Debug, Clone, Default)]
pub struct SignSummary {
    pub dims: Vec<usize>,
    pub d_cohomology: Vec<usize>,
    pub dstar_homology: Vec<usize>,
}

type SignHook = Arc<dyn Fn(&SignSummary) -> i8 + Send + Sync>;

#[derive(Clone)]
pub struct SignConvention {
    pub mode: SignMode,
    hook: Option<SignHook>,
}

impl std::fmt::Debug for SignConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SignConvention")
            .field("mode", &self.mode)
            .field("hook", &self.hook.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl Default for SignConvention {
    fn default() -> Self {
        Self {
            mode: SignMode::Plain,
            hook: None,
        }
    }
}

impl SignConvention {
    pub fn plain() -> Self {
        Self::default()
    }

    /// A convention with the given mode and no hook installed; refined modes
    /// without a hook apply no sign.
    pub fn with_mode(mode: SignMode) -> Self {
        Self { mode, hook: None }
    }

    pub fn with_hook(
        mode: SignMode,
        hook: impl Fn(&SignSummary) -> i8 + Send + Sync + 'static,
    ) -> Self {
        Self {
            mode,
            hook: Some(Arc::new(hook)),
        }
    }

    /// Evaluates the sign for the given summary; always +1 or -1.
    pub fn value(&self, summary: &SignSummary) -> f64 {
        match (self.mode, &self.hook) {
            (SignMode::Plain, _) | (_, None) => 1.0,
            (_, Some(hook)) => {
                if hook(summary) >= 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Coordinate of the wedge of `vectors` relative to the wedge of the basis of
/// `space`: the determinant of the change-of-basis matrix. Antisymmetric
/// under swaps and multilinear.
pub fn wedge_coordinate(
    vectors: &[CVector],
    space: &BasedSpace,
    tol: &ToleranceConfig,
) -> Result<Complex64> {
    if vectors.len() != space.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "wedge of {} vectors against a space of dimension {}",
            vectors.len(),
            space.dimension()
        )));
    }
    if vectors.is_empty() {
        return Ok(complex(1.0, 0.0));
    }
    let ambient = space.ambient_dimension();
    if vectors.iter().any(|v| v.len() != ambient) {
        return Err(Error::DimensionMismatch(
            "wedge vectors live in the wrong ambient space".into(),
        ));
    }
    let w = mat_from_columns(ambient, vectors);
    let x = express_in_basis(&space.basis_matrix(), &w, tol)?;
    linalg::determinant(&x)
}

/// Solves `B X = W` by SVD pseudo-inverse and verifies the residual, i.e.
/// expresses the columns of `W` in the (possibly rectangular) basis `B`.
pub fn express_in_basis(b: &CMatrix, w: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    if b.nrows() != w.nrows() {
        return Err(Error::DimensionMismatch(
            "basis and vectors have different ambient dimensions".into(),
        ));
    }
    if b.ncols() == 0 {
        if w.ncols() == 0 {
            return Ok(CMatrix::zeros(0, 0));
        }
        return Err(Error::DimensionMismatch("empty basis".into()));
    }
    let svd = b.clone().svd(true, true);
    let x = svd
        .solve(w, tol.rank_tol * spectral_norm(b).max(1e-300))
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let residual = spectral_norm(&(b * &x - w));
    let scale = spectral_norm(w).max(1.0);
    if residual > tol.check_tol * scale {
        return Err(Error::DimensionMismatch(format!(
            "vectors do not lie in the span of the basis (residual {residual:.3e})"
        )));
    }
    Ok(x)
}

/// Orthonormal lifts complementary to the kernel of each map, taken from the
/// leading right singular vectors.
fn svd_lifts(dims: &[usize], maps_out: &[CMatrix], tol: &ToleranceConfig) -> Vec<CMatrix> {
    maps_out
        .iter()
        .enumerate()
        .map(|(j, d)| {
            if d.nrows() == 0 || d.ncols() == 0 {
                return CMatrix::zeros(dims[j], 0);
            }
            let svd = d.clone().svd(false, true);
            let v_t = svd.v_t.expect("requested V^H");
            let cutoff = tol.rank_tol * svd.singular_values[0].max(1e-300);
            let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
            let mut lift = CMatrix::zeros(dims[j], rank);
            for i in 0..rank {
                lift.set_column(i, &v_t.row(i).conjugate().transpose());
            }
            lift
        })
        .collect()
}

/// Core torsion recipe shared by the two directions.
///
/// `maps_out[j]` is the differential out of degree `j`; `maps_in[j]` the one
/// arriving there, with `incoming_lift[j]` the lift it is applied to. In each
/// degree the ordered collection `{image of incoming lift, representatives,
/// lift}` is expressed in the chain basis; the result is the alternating
/// product of the determinants with exponent `(-1)^(j+1)`.
fn torsion_of_based_complex(
    dims: &[usize],
    incoming_image: impl Fn(usize) -> Option<CMatrix>,
    lifts: &[CMatrix],
    chain_bases: &[BasedSpace],
    representative_bases: &[BasedSpace],
    tol: &ToleranceConfig,
) -> Result<Complex64> {
    let n_deg = dims.len();
    let mut torsion = complex(1.0, 0.0);
    for j in 0..n_deg {
        let mut columns: Vec<CVector> = Vec::with_capacity(dims[j]);
        if let Some(image) = incoming_image(j) {
            columns.extend(image.column_iter().map(|c| c.into_owned()));
        }
        columns.extend(representative_bases[j].basis().iter().cloned());
        columns.extend(lifts[j].column_iter().map(|c| c.into_owned()));
        if columns.len() != dims[j] {
            return Err(Error::DimensionMismatch(format!(
                "degree {j}: stated homology dimension {} is inconsistent with rank accounting \
                 ({} assembled vectors in dimension {})",
                representative_bases[j].dimension(),
                columns.len(),
                dims[j]
            )));
        }
        if dims[j] == 0 {
            continue;
        }
        let m = mat_from_columns(dims[j], &columns);
        let x = express_in_basis(&chain_bases[j].basis_matrix(), &m, tol)?;
        let det = linalg::determinant(&x)?;
        if det.norm() == 0.0 {
            return Err(Error::DegenerateTorsion(format!(
                "degree {j}: assembled collection is not a basis"
            )));
        }
        if j % 2 == 1 {
            torsion *= det;
        } else {
            torsion /= det;
        }
    }
    Ok(torsion)
}

fn validate_shapes_and_square_zero(
    dims: &[usize],
    maps_out: &[CMatrix],
    targets: impl Fn(usize) -> Option<usize>,
    composes_with: impl Fn(usize) -> Option<usize>,
    tol: &ToleranceConfig,
    label: &str,
) -> Result<()> {
    for j in 0..dims.len() {
        if maps_out[j].ncols() != dims[j] {
            return Err(Error::DimensionMismatch(format!(
                "{label} out of degree {j} has {} columns, expected {}",
                maps_out[j].ncols(),
                dims[j]
            )));
        }
        if let Some(t) = targets(j) {
            if maps_out[j].nrows() != dims[t] {
                return Err(Error::DimensionMismatch(format!(
                    "{label} out of degree {j} has {} rows, expected {}",
                    maps_out[j].nrows(),
                    dims[t]
                )));
            }
        }
    }
    for j in 0..dims.len() {
        let Some(next) = composes_with(j) else { continue };
        let a = &maps_out[next];
        let b = &maps_out[j];
        if a.nrows() == 0 || b.ncols() == 0 || a.ncols() == 0 {
            continue;
        }
        let res = spectral_norm(&(a * b));
        let scale = spectral_norm(a).max(1.0) * spectral_norm(b).max(1.0);
        if res > tol.check_tol * scale {
            return Err(Error::InvalidComplex {
                degree: j,
                detail: format!("{label}^2 residual {res:.3e}"),
            });
        }
    }
    Ok(())
}

/// Maps out of each degree for the degree-increasing differential: `d[j]` for
/// `j < n`, and an empty map out of the top degree.
fn maps_out_increasing(dims: &[usize], d: &[CMatrix]) -> Vec<CMatrix> {
    let n_deg = dims.len();
    (0..n_deg)
        .map(|j| {
            if j + 1 < n_deg {
                d[j].clone()
            } else {
                CMatrix::zeros(0, dims[j])
            }
        })
        .collect()
}

/// Maps out of each degree for the degree-decreasing differential:
/// `dstar[j - 1]` maps degree `j` to degree `j - 1`; degree zero maps out to
/// nothing.
fn maps_out_decreasing(dims: &[usize], dstar: &[CMatrix]) -> Vec<CMatrix> {
    let n_deg = dims.len();
    (0..n_deg)
        .map(|j| {
            if j > 0 {
                dstar[j - 1].clone()
            } else {
                CMatrix::zeros(0, dims[j])
            }
        })
        .collect()
}

/// Torsion coordinate of the degree-increasing based complex `(C, d)`.
///
/// `d[j]` maps degree `j` to degree `j + 1` (so `d.len() = dims.len() - 1`),
/// and `cohomology_bases[j]` holds representatives of a basis of `H^j(d)`.
/// Pinned so the acyclic two-term complex with `d = (a)` returns `a`.
pub fn torsion_tau(
    dims: &[usize],
    d: &[CMatrix],
    chain_bases: &[BasedSpace],
    cohomology_bases: &[BasedSpace],
    tol: &ToleranceConfig,
) -> Result<Complex64> {
    let maps_out = maps_out_increasing(dims, d);
    let lifts = svd_lifts(dims, &maps_out, tol);
    torsion_tau_with_lifts(dims, d, chain_bases, cohomology_bases, &lifts, tol)
}

/// [`torsion_tau`] with caller-supplied lifts; each `lifts[j]` must span a
/// complement of `ker d_j`. Exposed so invariance under the choice of lift
/// can be exercised directly.
pub fn torsion_tau_with_lifts(
    dims: &[usize],
    d: &[CMatrix],
    chain_bases: &[BasedSpace],
    cohomology_bases: &[BasedSpace],
    lifts: &[CMatrix],
    tol: &ToleranceConfig,
) -> Result<Complex64> {
    let n_deg = dims.len();
    let maps_out = maps_out_increasing(dims, d);
    validate_shapes_and_square_zero(
        dims,
        &maps_out,
        |j| if j + 1 < n_deg { Some(j + 1) } else { None },
        |j| if j + 2 < n_deg { Some(j + 1) } else { None },
        tol,
        "d",
    )?;
    torsion_of_based_complex(
        dims,
        |j| {
            if j > 0 && lifts[j - 1].ncols() > 0 {
                Some(&maps_out[j - 1] * &lifts[j - 1])
            } else {
                None
            }
        },
        lifts,
        chain_bases,
        cohomology_bases,
        tol,
    )
}

/// Torsion coordinate of the degree-decreasing based complex `(C, d*)`.
///
/// `dstar[j]` maps degree `j + 1` to degree `j`, and `homology_bases[j]`
/// holds representatives of a basis of `H_j(d*)`. Pinned so the two-term
/// complex with `d* = (b)` returns `1/b`; combined with [`torsion_tau`] as
/// `tau / tau'` the two-term pair `(a, b)` yields `a * b`.
pub fn torsion_tau_prime(
    dims: &[usize],
    dstar: &[CMatrix],
    chain_bases: &[BasedSpace],
    homology_bases: &[BasedSpace],
    tol: &ToleranceConfig,
) -> Result<Complex64> {
    let maps_out = maps_out_decreasing(dims, dstar);
    let lifts = svd_lifts(dims, &maps_out, tol);
    torsion_tau_prime_with_lifts(dims, dstar, chain_bases, homology_bases, &lifts, tol)
}

/// [`torsion_tau_prime`] with caller-supplied lifts.
pub fn torsion_tau_prime_with_lifts(
    dims: &[usize],
    dstar: &[CMatrix],
    chain_bases: &[BasedSpace],
    homology_bases: &[BasedSpace],
    lifts: &[CMatrix],
    tol: &ToleranceConfig,
) -> Result<Complex64> {
    let n_deg = dims.len();
    let maps_out = maps_out_decreasing(dims, dstar);
    validate_shapes_and_square_zero(
        dims,
        &maps_out,
        |j| if j > 0 { Some(j - 1) } else { None },
        |j| if j >= 2 { Some(j - 1) } else { None },
        tol,
        "d*",
    )?;
    torsion_of_based_complex(
        dims,
        |j| {
            if j + 1 < n_deg && lifts[j + 1].ncols() > 0 {
                Some(&maps_out[j + 1] * &lifts[j + 1])
            } else {
                None
            }
        },
        lifts,
        chain_bases,
        homology_bases,
        tol,
    )
}

/// Fuses two determinant-line elements into the element of the merged line.
///
/// Signatures are merged stably by label; carrying an odd-dimensional factor
/// past another odd-dimensional factor contributes a Koszul sign of -1, so
/// the coordinate is the product of the two coordinates times the sign
/// determined by the graded dimensions. Labels must be disjoint.
pub fn fuse(a: &DetLineElement, b: &DetLineElement) -> Result<DetLineElement> {
    for fa in &a.signature {
        if b.signature.iter().any(|fb| fb.label == fa.label) {
            return Err(Error::LineMismatch(format!(
                "label {:?} appears in both factors",
                fa.label
            )));
        }
    }
    // odd_remaining[i] = number of odd-dimensional factors in a.signature[i..].
    let odd_remaining: Vec<usize> = {
        let mut acc = vec![0usize; a.signature.len() + 1];
        for i in (0..a.signature.len()).rev() {
            acc[i] = acc[i + 1] + a.signature[i].parity();
        }
        acc
    };
    let mut merged: Vec<LineFactor> = Vec::with_capacity(a.signature.len() + b.signature.len());
    let mut swaps = 0usize;
    let (mut ai, mut bi) = (0usize, 0usize);
    while ai < a.signature.len() || bi < b.signature.len() {
        let take_a = match (a.signature.get(ai), b.signature.get(bi)) {
            (Some(fa), Some(fb)) => fa.label <= fb.label,
            (Some(_), None) => true,
            _ => false,
        };
        if take_a {
            merged.push(a.signature[ai].clone());
            ai += 1;
        } else {
            // The b-factor jumps over every remaining a-factor.
            if b.signature[bi].parity() == 1 {
                swaps += odd_remaining[ai];
            }
            merged.push(b.signature[bi].clone());
            bi += 1;
        }
    }
    let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
    Ok(DetLineElement {
        coordinate: a.coordinate * b.coordinate * complex(sign, 0.0),
        signature: merged,
        degenerate: a.degenerate || b.degenerate,
    })
}

/// Flip isomorphism on a quadruple `(v1 (x) w1) (x) (w2 (x) v2)`, reordering
/// to `(v1 (x) w2) (x) (w1 (x) v2)`. Scalar coordinates multiply
/// commutatively, so the coordinate is unchanged.
pub fn flip(t: &DetLineElement) -> Result<DetLineElement> {
    if t.signature.len() != 4 {
        return Err(Error::LineMismatch(format!(
            "flip requires exactly four factors, got {}",
            t.signature.len()
        )));
    }
    let mut signature = t.signature.clone();
    signature.swap(1, 2);
    Ok(DetLineElement {
        coordinate: t.coordinate,
        signature,
        degenerate: t.degenerate,
    })
}
