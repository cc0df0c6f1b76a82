//! One-dimensional cellular models with flat coefficients: circles with
//! holonomy, intervals with relative or absolute boundary conditions, spliced
//! complexes with transmission conditions, and the determinant-line
//! isomorphisms induced by the Mayer-Vietoris long exact sequences.
//!
//! Cochains carry a fiber of rank `r` at each cell; the twisted differential
//! over an edge `t -> h` is `(df)(e) = f(h) - T_e f(t)` with `T_e` the
//! parallel transport. The degree-decreasing differential is built from a
//! Hermitian weight as `h0^{-1} d^H h1`, so a non-constant weight produces a
//! genuinely non-self-adjoint sharp Laplacian.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bicomplex::{self, BiGradedComplex, Side};
use crate::detline::{self, BasedSpace};
use crate::error::{Error, Result};
use crate::linalg::{
    self, complex, mat_from_columns, spectral_norm, CMatrix, CVector, ToleranceConfig,
};

/// A one-dimensional cell complex: vertices, oriented edges, and a designated
/// set of boundary vertices.
#[derive(Debug, Clone)]
pub struct CellComplex1D {
    pub vertex_count: usize,
    /// Oriented edges as (tail, head).
    pub edges: Vec<(usize, usize)>,
    pub boundary_vertices: Vec<usize>,
}

impl CellComplex1D {
    /// A path with `n` edges: vertices `0..=n`, boundary `{0, n}`.
    pub fn path(n: usize) -> Self {
        Self {
            vertex_count: n + 1,
            edges: (0..n).map(|i| (i, i + 1)).collect(),
            boundary_vertices: vec![0, n],
        }
    }

    /// A cycle with `n` edges: vertices `0..n`, edge `i` from `i` to
    /// `(i + 1) mod n`, no boundary.
    pub fn cycle(n: usize) -> Self {
        Self {
            vertex_count: n,
            edges: (0..n).map(|i| (i, (i + 1) % n)).collect(),
            boundary_vertices: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &(t, h) in &self.edges {
            if t >= self.vertex_count || h >= self.vertex_count {
                return Err(Error::InvalidModel(format!(
                    "edge ({t}, {h}) references a vertex outside 0..{}",
                    self.vertex_count
                )));
            }
        }
        for &v in &self.boundary_vertices {
            if v >= self.vertex_count {
                return Err(Error::InvalidModel(format!(
                    "boundary vertex {v} outside 0..{}",
                    self.vertex_count
                )));
            }
        }
        Ok(())
    }
}

/// Parallel-transport data: one invertible matrix per edge.
#[derive(Debug, Clone)]
pub struct Holonomy {
    pub rank: usize,
    pub edge_matrices: Vec<CMatrix>,
}

impl Holonomy {
    pub fn trivial(rank: usize, edges: usize) -> Self {
        Self {
            rank,
            edge_matrices: (0..edges).map(|_| CMatrix::identity(rank, rank)).collect(),
        }
    }

    /// Identity transport on all edges except the last, which carries `total`;
    /// the product around a cycle is then `total`.
    pub fn concentrated(total: CMatrix, edges: usize) -> Self {
        let rank = total.nrows();
        let mut m = Self::trivial(rank, edges);
        if edges > 0 {
            m.edge_matrices[edges - 1] = total;
        }
        m
    }

    /// Rank-one holonomy `e^(2 pi i theta)` concentrated on the last edge.
    pub fn phase(theta: f64, edges: usize) -> Self {
        let q = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta);
        Self::concentrated(CMatrix::from_element(1, 1, q), edges)
    }

    pub fn validate(&self, edges: usize, tol: &ToleranceConfig) -> Result<()> {
        if self.edge_matrices.len() != edges {
            return Err(Error::InvalidModel(format!(
                "holonomy provides {} edge matrices for {} edges",
                self.edge_matrices.len(),
                edges
            )));
        }
        for (i, m) in self.edge_matrices.iter().enumerate() {
            if m.nrows() != self.rank || m.ncols() != self.rank {
                return Err(Error::InvalidModel(format!(
                    "edge matrix {i} is {}x{}, expected rank {}",
                    m.nrows(),
                    m.ncols(),
                    self.rank
                )));
            }
            let det = linalg::determinant(m)?;
            if det.norm() <= tol.rank_tol {
                return Err(Error::InvalidModel(format!(
                    "edge matrix {i} is singular (|det| = {:.3e})",
                    det.norm()
                )));
            }
        }
        Ok(())
    }
}

/// Positive-definite Hermitian weights on the two cochain degrees.
#[derive(Debug, Clone)]
pub struct HermitianWeight {
    pub vertex_weight: CMatrix,
    pub edge_weight: CMatrix,
}

impl HermitianWeight {
    pub fn identity(vertex_dim: usize, edge_dim: usize) -> Self {
        Self {
            vertex_weight: CMatrix::identity(vertex_dim, vertex_dim),
            edge_weight: CMatrix::identity(edge_dim, edge_dim),
        }
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> Result<()> {
        for (name, h) in [("vertex", &self.vertex_weight), ("edge", &self.edge_weight)] {
            let herm = spectral_norm(&(h - h.adjoint()));
            if herm > tol.check_tol * spectral_norm(h).max(1.0) {
                return Err(Error::InvalidModel(format!(
                    "{name} weight is not Hermitian (residual {herm:.3e})"
                )));
            }
            if h.nrows() > 0 {
                for mu in linalg::eigenvalues(h)? {
                    if mu.re <= tol.rank_tol {
                        return Err(Error::InvalidModel(format!(
                            "{name} weight has non-positive eigenvalue {mu}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assembles the twisted cochain complex of a 1D cell complex, dropping the
/// vertices listed in `deleted` (the relative boundary condition), with
/// `dstar = h0^{-1} d^H h1`.
fn assemble_complex(
    cells: &CellComplex1D,
    holonomy: &Holonomy,
    weight: Option<&HermitianWeight>,
    deleted: &[usize],
    tol: &ToleranceConfig,
) -> Result<BiGradedComplex> {
    cells.validate()?;
    holonomy.validate(cells.edges.len(), tol)?;
    let r = holonomy.rank;

    // Positions of the kept vertices.
    let mut kept = BTreeMap::new();
    for v in 0..cells.vertex_count {
        if !deleted.contains(&v) {
            let idx = kept.len();
            kept.insert(v, idx);
        }
    }
    let dim0 = kept.len() * r;
    let dim1 = cells.edges.len() * r;

    let mut d = CMatrix::zeros(dim1, dim0);
    for (e, &(t, h)) in cells.edges.iter().enumerate() {
        if let Some(&hp) = kept.get(&h) {
            for i in 0..r {
                d[(e * r + i, hp * r + i)] += complex(1.0, 0.0);
            }
        }
        if let Some(&tp) = kept.get(&t) {
            let transport = &holonomy.edge_matrices[e];
            for i in 0..r {
                for j in 0..r {
                    d[(e * r + i, tp * r + j)] -= transport[(i, j)];
                }
            }
        }
    }

    let weight = match weight {
        Some(w) => {
            w.validate(tol)?;
            if w.vertex_weight.nrows() != dim0 || w.edge_weight.nrows() != dim1 {
                return Err(Error::InvalidModel(format!(
                    "weight dimensions ({}, {}) do not match cochain dimensions ({dim0}, {dim1})",
                    w.vertex_weight.nrows(),
                    w.edge_weight.nrows()
                )));
            }
            w.clone()
        }
        None => HermitianWeight::identity(dim0, dim1),
    };
    let h0_inv = weight
        .vertex_weight
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidModel("vertex weight is singular".into()))?;
    let dstar = h0_inv * d.adjoint() * &weight.edge_weight;

    BiGradedComplex::new(vec![dim0, dim1], vec![d], vec![dstar])
}

/// Cochain complex of the circle with `n` subdivisions and the given
/// holonomy: `C^0` and `C^1` both have dimension `n * rank`.
pub fn circle_complex(
    subdivisions: usize,
    holonomy: &Holonomy,
    weight: Option<&HermitianWeight>,
    tol: &ToleranceConfig,
) -> Result<BiGradedComplex> {
    if subdivisions == 0 {
        return Err(Error::InvalidModel("circle needs at least one edge".into()));
    }
    assemble_complex(&CellComplex1D::cycle(subdivisions), holonomy, weight, &[], tol)
}

/// Boundary condition for the interval: `Rel` deletes the boundary-vertex
/// cochains, `Abs` keeps everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Rel,
    Abs,
}

/// Cochain complex of the interval with `n` subdivisions.
pub fn interval_complex(
    subdivisions: usize,
    bc: BoundaryCondition,
    holonomy: &Holonomy,
    weight: Option<&HermitianWeight>,
    tol: &ToleranceConfig,
) -> Result<BiGradedComplex> {
    if subdivisions == 0 {
        return Err(Error::InvalidModel("interval needs at least one edge".into()));
    }
    let cells = CellComplex1D::path(subdivisions);
    let deleted: Vec<usize> = match bc {
        BoundaryCondition::Rel => cells.boundary_vertices.clone(),
        BoundaryCondition::Abs => Vec::new(),
    };
    assemble_complex(&cells, holonomy, weight, &deleted, tol)
}

/// One glued piece: a cell complex with its transport and optional weight
/// (weights are given on the full, undeleted cochain spaces).
#[derive(Debug, Clone)]
pub struct ModelPiece {
    pub cells: CellComplex1D,
    pub holonomy: Holonomy,
    pub weight: Option<HermitianWeight>,
}

impl ModelPiece {
    pub fn interval(subdivisions: usize, holonomy: Holonomy) -> Self {
        Self {
            cells: CellComplex1D::path(subdivisions),
            holonomy,
            weight: None,
        }
    }
}

/// How the inner product behaves on the cochains shared by the two pieces.
///
/// `Common` keeps the (required equal) piece weight once, so splicing two
/// pieces reassembles exactly the cochain complex of the glued cell complex;
/// the splitting formula then has no anomaly. `Summed` adds the two piece
/// weights on the interface, discretizing the transmission inner product of
/// the analytic picture; the splitting formula then carries the anomaly
/// `2^chi(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfaceWeight {
    #[default]
    Common,
    Summed,
}

/// Two pieces with an identification of boundary vertices (the hypersurface).
#[derive(Debug, Clone)]
pub struct SpliceScenario {
    pub piece1: ModelPiece,
    pub piece2: ModelPiece,
    /// Pairs (vertex of piece 1, vertex of piece 2) to identify.
    pub identification: Vec<(usize, usize)>,
    pub interface_weight: InterfaceWeight,
}

impl SpliceScenario {
    /// A circle with holonomy `e^(2 pi i theta)` split into two intervals
    /// with `n1` and `n2` subdivisions; the twist sits on an edge of the
    /// second piece.
    pub fn circle_split(theta: f64, n1: usize, n2: usize) -> Self {
        Self {
            piece1: ModelPiece::interval(n1, Holonomy::trivial(1, n1)),
            piece2: ModelPiece::interval(n2, Holonomy::phase(theta, n2)),
            identification: vec![(0, 0), (n1, n2)],
            interface_weight: InterfaceWeight::Common,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.piece1.cells.validate()?;
        self.piece2.cells.validate()?;
        if self.piece1.holonomy.rank != self.piece2.holonomy.rank {
            return Err(Error::InvalidModel("pieces have different fiber ranks".into()));
        }
        let b1 = &self.piece1.cells.boundary_vertices;
        let b2 = &self.piece2.cells.boundary_vertices;
        let mut seen1 = Vec::new();
        let mut seen2 = Vec::new();
        for &(v1, v2) in &self.identification {
            if !b1.contains(&v1) || !b2.contains(&v2) {
                return Err(Error::InvalidModel(format!(
                    "identification ({v1}, {v2}) is not between boundary vertices"
                )));
            }
            if seen1.contains(&v1) || seen2.contains(&v2) {
                return Err(Error::InvalidModel(
                    "identification is not a bijection".into(),
                ));
            }
            seen1.push(v1);
            seen2.push(v2);
        }
        Ok(())
    }

    fn rank(&self) -> usize {
        self.piece1.holonomy.rank
    }
}

/// The spliced complex together with the two short exact sequences it sits
/// in: `0 -> rel1 -> spliced -> abs2 -> 0` (maps `alpha`, `beta`) and
/// `0 -> rel2 -> spliced -> abs1 -> 0` (maps `alpha_prime`, `beta_prime`).
#[derive(Debug, Clone)]
pub struct SpliceAssembly {
    pub spliced: BiGradedComplex,
    pub rel1: BiGradedComplex,
    pub abs1: BiGradedComplex,
    pub rel2: BiGradedComplex,
    pub abs2: BiGradedComplex,
    /// Per-degree inclusion `rel1 -> spliced`.
    pub alpha: Vec<CMatrix>,
    /// Per-degree restriction `spliced -> abs2`.
    pub beta: Vec<CMatrix>,
    /// Per-degree inclusion `rel2 -> spliced`.
    pub alpha_prime: Vec<CMatrix>,
    /// Per-degree restriction `spliced -> abs1`.
    pub beta_prime: Vec<CMatrix>,
    /// Per-degree weights of the spliced complex (shared cochains carry the
    /// sum of the piece weights).
    pub spliced_weight: [CMatrix; 2],
    pub rel1_weight: [CMatrix; 2],
    pub abs1_weight: [CMatrix; 2],
    pub rel2_weight: [CMatrix; 2],
    pub abs2_weight: [CMatrix; 2],
}

/// Builds the transmission-condition complex: vertex spaces of the two pieces
/// identified along the hypersurface, edges disjoint, weights added where
/// cochains are shared.
pub fn splice(s: &SpliceScenario, tol: &ToleranceConfig) -> Result<BiGradedComplex> {
    splice_assembly(s, tol).map(|a| a.spliced)
}

pub fn splice_assembly(s: &SpliceScenario, tol: &ToleranceConfig) -> Result<SpliceAssembly> {
    s.validate()?;
    let r = s.rank();
    let n1v = s.piece1.cells.vertex_count;
    let n2v = s.piece2.cells.vertex_count;
    let e1 = s.piece1.cells.edges.len();
    let e2 = s.piece2.cells.edges.len();
    s.piece1.holonomy.validate(e1, tol)?;
    s.piece2.holonomy.validate(e2, tol)?;

    // Merged vertex set: all of piece 1, then the unidentified of piece 2.
    let ident: BTreeMap<usize, usize> = s.identification.iter().map(|&(a, b)| (b, a)).collect();
    let mut merged_of_p2 = BTreeMap::new();
    let mut merged_count = n1v;
    for v in 0..n2v {
        if let Some(&v1) = ident.get(&v) {
            merged_of_p2.insert(v, v1);
        } else {
            merged_of_p2.insert(v, merged_count);
            merged_count += 1;
        }
    }
    let dim0 = merged_count * r;
    let dim1 = (e1 + e2) * r;

    // Restriction maps onto the full cochain spaces of the pieces.
    let mut restrict1_v = CMatrix::zeros(n1v * r, dim0);
    for v in 0..n1v {
        for i in 0..r {
            restrict1_v[(v * r + i, v * r + i)] = complex(1.0, 0.0);
        }
    }
    let mut restrict2_v = CMatrix::zeros(n2v * r, dim0);
    for v in 0..n2v {
        let m = merged_of_p2[&v];
        for i in 0..r {
            restrict2_v[(v * r + i, m * r + i)] = complex(1.0, 0.0);
        }
    }
    let mut restrict1_e = CMatrix::zeros(e1 * r, dim1);
    for e in 0..e1 * r {
        restrict1_e[(e, e)] = complex(1.0, 0.0);
    }
    let mut restrict2_e = CMatrix::zeros(e2 * r, dim1);
    for e in 0..e2 * r {
        restrict2_e[(e, e1 * r + e)] = complex(1.0, 0.0);
    }

    // Differential: both pieces' twisted differences on the merged vertices.
    let mut d = CMatrix::zeros(dim1, dim0);
    let mut put_edges = |edges: &[(usize, usize)],
                         transports: &[CMatrix],
                         edge_offset: usize,
                         vertex_of: &dyn Fn(usize) -> usize| {
        for (e, &(t, h)) in edges.iter().enumerate() {
            let (hm, tm) = (vertex_of(h), vertex_of(t));
            for i in 0..r {
                d[((edge_offset + e) * r + i, hm * r + i)] += complex(1.0, 0.0);
                for j in 0..r {
                    d[((edge_offset + e) * r + i, tm * r + j)] -= transports[e][(i, j)];
                }
            }
        }
    };
    put_edges(&s.piece1.cells.edges, &s.piece1.holonomy.edge_matrices, 0, &|v| v);
    put_edges(
        &s.piece2.cells.edges,
        &s.piece2.holonomy.edge_matrices,
        e1,
        &|v| merged_of_p2[&v],
    );

    // The natural inner product sums the piece inner products, so shared
    // vertices carry the sum of the two weights.
    let w1 = s
        .piece1
        .weight
        .clone()
        .unwrap_or_else(|| HermitianWeight::identity(n1v * r, e1 * r));
    let w2 = s
        .piece2
        .weight
        .clone()
        .unwrap_or_else(|| HermitianWeight::identity(n2v * r, e2 * r));
    w1.validate(tol)?;
    w2.validate(tol)?;
    let mut h0 = restrict1_v.adjoint() * &w1.vertex_weight * &restrict1_v
        + restrict2_v.adjoint() * &w2.vertex_weight * &restrict2_v;
    if s.interface_weight == InterfaceWeight::Common {
        // Keep the piece weight once on each identified vertex; this requires
        // the two pieces to weight the interface identically.
        for &(v1, v2) in &s.identification {
            for i in 0..r {
                for j in 0..r {
                    let a = w1.vertex_weight[(v1 * r + i, v1 * r + j)];
                    let b = w2.vertex_weight[(v2 * r + i, v2 * r + j)];
                    if (a - b).norm() > tol.check_tol * a.norm().max(b.norm()).max(1.0) {
                        return Err(Error::InvalidModel(format!(
                            "piece weights disagree on identified vertices ({v1}, {v2})"
                        )));
                    }
                    h0[(v1 * r + i, v1 * r + j)] -= b;
                }
            }
        }
    }
    let h1 = restrict1_e.adjoint() * &w1.edge_weight * &restrict1_e
        + restrict2_e.adjoint() * &w2.edge_weight * &restrict2_e;
    let h0_inv = h0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidModel("merged vertex weight is singular".into()))?;
    let dstar = h0_inv * d.adjoint() * &h1;
    let spliced = BiGradedComplex::new(vec![dim0, dim1], vec![d], vec![dstar])?;

    // Boundary-condition complexes of the pieces, with weights restricted to
    // the kept cochains.
    let sub_weight = |w: &HermitianWeight, kept: &[usize], r: usize| -> HermitianWeight {
        let idx: Vec<usize> = kept
            .iter()
            .flat_map(|&v| (0..r).map(move |i| v * r + i))
            .collect();
        HermitianWeight {
            vertex_weight: CMatrix::from_fn(idx.len(), idx.len(), |a, b| {
                w.vertex_weight[(idx[a], idx[b])]
            }),
            edge_weight: w.edge_weight.clone(),
        }
    };
    let piece_complex = |piece: &ModelPiece,
                         weight: &HermitianWeight,
                         bc: BoundaryCondition|
     -> Result<(BiGradedComplex, [CMatrix; 2])> {
        let deleted: Vec<usize> = match bc {
            BoundaryCondition::Rel => piece.cells.boundary_vertices.clone(),
            BoundaryCondition::Abs => Vec::new(),
        };
        let kept: Vec<usize> = (0..piece.cells.vertex_count)
            .filter(|v| !deleted.contains(v))
            .collect();
        let w = match bc {
            BoundaryCondition::Rel => sub_weight(weight, &kept, r),
            BoundaryCondition::Abs => weight.clone(),
        };
        let x = assemble_complex(&piece.cells, &piece.holonomy, Some(&w), &deleted, tol)?;
        Ok((x, [w.vertex_weight, w.edge_weight]))
    };
    let (rel1, rel1_weight) = piece_complex(&s.piece1, &w1, BoundaryCondition::Rel)?;
    let (abs1, abs1_weight) = piece_complex(&s.piece1, &w1, BoundaryCondition::Abs)?;
    let (rel2, rel2_weight) = piece_complex(&s.piece2, &w2, BoundaryCondition::Rel)?;
    let (abs2, abs2_weight) = piece_complex(&s.piece2, &w2, BoundaryCondition::Abs)?;

    // alpha: extension by zero from the interior of a piece; beta: restriction.
    let interior_inclusion = |piece: &ModelPiece, vertex_of: &dyn Fn(usize) -> usize| -> CMatrix {
        let kept: Vec<usize> = (0..piece.cells.vertex_count)
            .filter(|v| !piece.cells.boundary_vertices.contains(v))
            .collect();
        let mut m = CMatrix::zeros(dim0, kept.len() * r);
        for (col, &v) in kept.iter().enumerate() {
            let vm = vertex_of(v);
            for i in 0..r {
                m[(vm * r + i, col * r + i)] = complex(1.0, 0.0);
            }
        }
        m
    };
    let alpha = vec![
        interior_inclusion(&s.piece1, &|v| v),
        restrict1_e.adjoint(),
    ];
    let alpha_prime = vec![
        interior_inclusion(&s.piece2, &|v| merged_of_p2[&v]),
        restrict2_e.adjoint(),
    ];
    let beta = vec![restrict2_v, restrict2_e];
    let beta_prime = vec![restrict1_v, restrict1_e];

    Ok(SpliceAssembly {
        spliced,
        rel1,
        abs1,
        rel2,
        abs2,
        alpha,
        beta,
        alpha_prime,
        beta_prime,
        spliced_weight: [h0, h1],
        rel1_weight,
        abs1_weight,
        rel2_weight,
        abs2_weight,
    })
}

/// Coordinates of the class of the cocycle `w` (degree `k`) in the given
/// cohomology basis: solve against `[basis | image of d_{k-1}]`.
fn class_coordinates(
    x: &BiGradedComplex,
    k: usize,
    w: &CVector,
    basis: &BasedSpace,
    tol: &ToleranceConfig,
) -> Result<CVector> {
    let h = basis.dimension();
    let mut columns: Vec<CVector> = basis.basis().to_vec();
    if k >= 1 {
        columns.extend(linalg::column_space_basis(&x.d_maps()[k - 1], tol));
    }
    if h == 0 {
        return Ok(CVector::zeros(0));
    }
    let b = mat_from_columns(x.dim(k), &columns);
    let coeffs = detline::express_in_basis(&b, &mat_from_columns(x.dim(k), &[w.clone()]), tol)?;
    Ok(CVector::from_fn(h, |i, _| coeffs[(i, 0)]))
}

/// The long exact sequence of a short exact sequence of (degree-increasing)
/// complexes, returned as a based acyclic complex.
///
/// `alpha: X -> Y` and `beta: Y -> Z` are per-degree chain maps; the bases
/// hold cohomology representatives. The sequence reads
/// `... -> H^k(X) -> H^k(Y) -> H^k(Z) -> H^(k+1)(X) -> ...` and exactness is
/// verified within `check_tol`.
pub struct LesComplex {
    pub dims: Vec<usize>,
    pub maps: Vec<CMatrix>,
}

#[allow(clippy::too_many_arguments)]
pub fn les_of_ses(
    x: &BiGradedComplex,
    y: &BiGradedComplex,
    z: &BiGradedComplex,
    alpha: &[CMatrix],
    beta: &[CMatrix],
    basis_x: &[BasedSpace],
    basis_y: &[BasedSpace],
    basis_z: &[BasedSpace],
    tol: &ToleranceConfig,
) -> Result<LesComplex> {
    let n = x.top_degree();
    // Chain-map residuals.
    for k in 0..n {
        let res_a = spectral_norm(&(&y.d_maps()[k] * &alpha[k] - &alpha[k + 1] * &x.d_maps()[k]));
        let res_b = spectral_norm(&(&z.d_maps()[k] * &beta[k] - &beta[k + 1] * &y.d_maps()[k]));
        let scale = spectral_norm(&y.d_maps()[k]).max(1.0);
        if res_a > tol.check_tol * scale || res_b > tol.check_tol * scale {
            return Err(Error::ExactnessFailure(format!(
                "alpha/beta are not chain maps in degree {k} (residuals {res_a:.3e}, {res_b:.3e})"
            )));
        }
    }

    let mut dims = Vec::with_capacity(3 * (n + 1));
    for k in 0..=n {
        dims.push(basis_x[k].dimension());
        dims.push(basis_y[k].dimension());
        dims.push(basis_z[k].dimension());
    }

    // Class-coordinate maps have O(1) scale for normalized bases; exactness
    // forces maps below the check tolerance to be exactly zero, so rounding
    // noise is flushed rather than mistaken for rank.
    let clean = |m: CMatrix| -> CMatrix {
        if spectral_norm(&m) <= tol.check_tol {
            CMatrix::zeros(m.nrows(), m.ncols())
        } else {
            m
        }
    };
    let map_classes = |source: &BasedSpace,
                       target: &BasedSpace,
                       target_complex: &BiGradedComplex,
                       k: usize,
                       f: &CMatrix|
     -> Result<CMatrix> {
        let cols: Result<Vec<CVector>> = source
            .basis()
            .iter()
            .map(|u| class_coordinates(target_complex, k, &(f * u), target, tol))
            .collect();
        Ok(mat_from_columns(target.dimension(), &cols?))
    };

    let mut maps = Vec::with_capacity(3 * (n + 1) - 1);
    for k in 0..=n {
        maps.push(clean(map_classes(&basis_x[k], &basis_y[k], y, k, &alpha[k])?));
        maps.push(clean(map_classes(&basis_y[k], &basis_z[k], z, k, &beta[k])?));
        if k < n {
            // Connecting map: lift a cocycle of Z through beta (least
            // squares), apply d in Y, pull back through alpha.
            let cols: Result<Vec<CVector>> = basis_z[k]
                .basis()
                .iter()
                .map(|zrep| {
                    let lift = detline::express_in_basis(
                        &beta[k],
                        &mat_from_columns(z.dim(k), &[zrep.clone()]),
                        tol,
                    )?;
                    let dy = &y.d_maps()[k] * CVector::from_fn(y.dim(k), |i, _| lift[(i, 0)]);
                    let back = detline::express_in_basis(
                        &alpha[k + 1],
                        &mat_from_columns(y.dim(k + 1), &[dy]),
                        tol,
                    )
                    .map_err(|_| {
                        Error::ExactnessFailure(format!(
                            "connecting map image in degree {k} does not come from the subcomplex"
                        ))
                    })?;
                    class_coordinates(
                        x,
                        k + 1,
                        &CVector::from_fn(x.dim(k + 1), |i, _| back[(i, 0)]),
                        &basis_x[k + 1],
                        tol,
                    )
                })
                .collect();
            maps.push(clean(mat_from_columns(basis_x[k + 1].dimension(), &cols?)));
        }
    }

    // Exactness: consecutive composites must vanish.
    for i in 0..maps.len().saturating_sub(1) {
        if maps[i].ncols() == 0 || maps[i + 1].nrows() == 0 || maps[i + 1].ncols() == 0 {
            continue;
        }
        let res = spectral_norm(&(&maps[i + 1] * &maps[i]));
        let scale = spectral_norm(&maps[i]).max(1.0) * spectral_norm(&maps[i + 1]).max(1.0);
        if res > tol.check_tol * scale {
            return Err(Error::ExactnessFailure(format!(
                "composite of maps {i} and {} has residual {res:.3e}",
                i + 1
            )));
        }
    }
    Ok(LesComplex { dims, maps })
}

/// Torsion of the long exact sequence regarded as a based acyclic complex.
pub fn les_torsion(les: &LesComplex, tol: &ToleranceConfig) -> Result<Complex64> {
    let chain: Vec<BasedSpace> = les.dims.iter().map(|&m| BasedSpace::standard(m)).collect();
    let empty: Vec<BasedSpace> = les.dims.iter().map(|_| BasedSpace::standard(0)).collect();
    detline::torsion_tau(&les.dims, &les.maps, &chain, &empty, tol).map_err(|e| match e {
        Error::DimensionMismatch(msg) => {
            Error::ExactnessFailure(format!("long exact sequence is not exact: {msg}"))
        }
        other => other,
    })
}

/// Which determinant-line isomorphism of the splitting to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LesSide {
    /// `Det H_rel(M1) (x) Det H_abs(M2) -> Det H(spliced)`.
    Psi,
    /// `Det H_rel(M2) (x) Det H_abs(M1) -> Det H(spliced)`.
    PsiPrime,
}

/// The determinant-line isomorphism induced by one of the two splitting
/// sequences, reported as the coordinate by which it maps the chosen piece
/// bases to the chosen spliced basis. Pinned to the torsion of the long
/// exact sequence in the grading used here (zero end terms included).
#[derive(Debug, Clone)]
pub struct LesIso {
    pub coordinate: Complex64,
    pub les_torsion: Complex64,
    pub dims: Vec<usize>,
}

pub fn les_determinant_iso(
    s: &SpliceScenario,
    side: LesSide,
    tol: &ToleranceConfig,
) -> Result<LesIso> {
    let assembly = splice_assembly(s, tol)?;
    let bases = |x: &BiGradedComplex| -> Result<Vec<BasedSpace>> {
        (0..=x.top_degree())
            .map(|k| x.cohomology_basis(k, Side::D, tol))
            .collect()
    };
    let by = bases(&assembly.spliced)?;
    let les = match side {
        LesSide::Psi => les_of_ses(
            &assembly.rel1,
            &assembly.spliced,
            &assembly.abs2,
            &assembly.alpha,
            &assembly.beta,
            &bases(&assembly.rel1)?,
            &by,
            &bases(&assembly.abs2)?,
            tol,
        )?,
        LesSide::PsiPrime => les_of_ses(
            &assembly.rel2,
            &assembly.spliced,
            &assembly.abs1,
            &assembly.alpha_prime,
            &assembly.beta_prime,
            &bases(&assembly.rel2)?,
            &by,
            &bases(&assembly.abs1)?,
            tol,
        )?,
    };
    let torsion = les_torsion(&les, tol)?;
    Ok(LesIso {
        coordinate: torsion,
        les_torsion: torsion,
        dims: les.dims,
    })
}

/// Reverses the grading of a degree-decreasing complex so the long-exact-
/// sequence machinery (written for increasing complexes) applies to the
/// `dstar` side. Degree `j` becomes `n - j`.
fn reversed_dstar_complex(x: &BiGradedComplex) -> Result<BiGradedComplex> {
    let n = x.top_degree();
    let dims: Vec<usize> = (0..=n).map(|j| x.dim(n - j)).collect();
    // Map out of reversed degree j' is dstar out of degree n - j'.
    let d: Vec<CMatrix> = (0..n).map(|jp| x.dstar_maps()[n - jp - 1].clone()).collect();
    let dstar: Vec<CMatrix> = (0..n).map(|jp| x.d_maps()[n - jp - 1].clone()).collect();
    BiGradedComplex::new(dims, d, dstar)
}

/// Weighted adjoint `h_source^{-1} M^H h_target` of a chain map
/// `M: source -> target`; it maps the target complex back to the source and
/// is a chain map for the weighted dstar differentials.
fn weighted_adjoint(m: &CMatrix, h_source: &CMatrix, h_target: &CMatrix) -> Result<CMatrix> {
    let inv = h_source
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidModel("singular weight in adjoint".into()))?;
    Ok(inv * m.adjoint() * h_target)
}

/// Multiplicativity check for the splitting at the cochain level: the image
/// of the piece torsions under the two determinant-line isomorphisms against
/// the spliced torsion. Returns the modulus ratio, which is 1 for
/// [`InterfaceWeight::Common`] (no anomaly at the cochain level) and
/// `2^chi(N)` for [`InterfaceWeight::Summed`], the discrete counterpart of
/// the analytic transmission inner product.
pub fn combinatorial_splitting_check(s: &SpliceScenario, tol: &ToleranceConfig) -> Result<f64> {
    let assembly = splice_assembly(s, tol)?;
    let d_bases = |x: &BiGradedComplex| -> Result<Vec<BasedSpace>> {
        (0..=x.top_degree())
            .map(|k| x.cohomology_basis(k, Side::D, tol))
            .collect()
    };
    let dstar_bases = |x: &BiGradedComplex| -> Result<Vec<BasedSpace>> {
        (0..=x.top_degree())
            .map(|k| x.cohomology_basis(k, Side::Dstar, tol))
            .collect()
    };

    let torsion = |x: &BiGradedComplex| -> Result<Complex64> {
        let t = bicomplex::cm_torsion(
            x,
            0.0,
            &detline::SignConvention::plain(),
            &d_bases(x)?,
            &dstar_bases(x)?,
            tol,
        )?;
        Ok(t.coordinate)
    };
    let t1 = torsion(&assembly.rel1)?;
    let t2 = torsion(&assembly.abs2)?;
    let t_spliced = torsion(&assembly.spliced)?;
    if t_spliced.norm() == 0.0 {
        return Err(Error::DegenerateTorsion("spliced torsion vanishes".into()));
    }

    // Degree-increasing side: the sequence rel1 -> spliced -> abs2.
    let les_d = les_of_ses(
        &assembly.rel1,
        &assembly.spliced,
        &assembly.abs2,
        &assembly.alpha,
        &assembly.beta,
        &d_bases(&assembly.rel1)?,
        &d_bases(&assembly.spliced)?,
        &d_bases(&assembly.abs2)?,
        tol,
    )?;
    let tau_h = les_torsion(&les_d, tol)?;

    // Degree-decreasing side: the weighted-adjoint sequence
    // abs2 -> spliced -> rel1 on the dstar complexes, with reversed grading
    // (both the bases and the per-degree maps flip order).
    let rx = reversed_dstar_complex(&assembly.abs2)?;
    let ry = reversed_dstar_complex(&assembly.spliced)?;
    let rz = reversed_dstar_complex(&assembly.rel1)?;
    let rev = |bases: Vec<BasedSpace>| -> Vec<BasedSpace> {
        bases.into_iter().rev().collect()
    };
    let mut beta_w = Vec::new();
    let mut alpha_w = Vec::new();
    for k in (0..=assembly.spliced.top_degree()).rev() {
        beta_w.push(weighted_adjoint(
            &assembly.beta[k],
            &assembly.spliced_weight[k],
            &assembly.abs2_weight[k],
        )?);
        alpha_w.push(weighted_adjoint(
            &assembly.alpha[k],
            &assembly.rel1_weight[k],
            &assembly.spliced_weight[k],
        )?);
    }
    let les_dstar = les_of_ses(
        &rx,
        &ry,
        &rz,
        &beta_w,
        &alpha_w,
        &rev(dstar_bases(&assembly.abs2)?),
        &rev(dstar_bases(&assembly.spliced)?),
        &rev(dstar_bases(&assembly.rel1)?),
        tol,
    )?;
    let tau_h_star = les_torsion(&les_dstar, tol)?;

    let ratio = t1.norm() * t2.norm() * tau_h.norm() * tau_h_star.norm() / t_spliced.norm();
    Ok(ratio)
}

/// Subdivision-stable cohomology representatives for a 1D model complex.
///
/// Degree 0 uses flat sections rescaled so the fiber value at vertex 0 has
/// unit norm; degree 1 uses single-edge indicator cochains (independent
/// classes picked greedily). Both choices represent the same classes across
/// subdivisions, unlike cochain-orthonormal representatives whose scale
/// depends on the number of cells.
pub fn geometric_cohomology_bases(
    x: &BiGradedComplex,
    rank: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<BasedSpace>> {
    let harmonic0 = x.cohomology_basis(0, Side::D, tol)?;
    let mut degree0: Vec<CVector> = Vec::with_capacity(harmonic0.dimension());
    for v in harmonic0.basis() {
        let mut head = 0.0_f64;
        for i in 0..rank.min(v.len()) {
            head += v[i].norm_sqr();
        }
        let head = head.sqrt();
        if head <= tol.rank_tol {
            return Err(Error::DegenerateTorsion(
                "flat section vanishes at the base vertex".into(),
            ));
        }
        degree0.push(v / complex(head, 0.0));
    }

    let harmonic1 = x.cohomology_basis(1, Side::D, tol)?;
    let h1 = harmonic1.dimension();
    let mut degree1: Vec<CVector> = Vec::new();
    let mut class_coords: Vec<CVector> = Vec::new();
    let dim1 = x.dim(1);
    for e in 0..dim1 {
        if degree1.len() == h1 {
            break;
        }
        let indicator = CVector::from_fn(dim1, |i, _| complex(if i == e { 1.0 } else { 0.0 }, 0.0));
        let coords = class_coordinates(x, 1, &indicator, &harmonic1, tol)?;
        // Keep the indicator when it enlarges the span of the classes.
        let mut trial = class_coords.clone();
        trial.push(coords.clone());
        let m = mat_from_columns(h1, &trial);
        if linalg::numerical_rank(&m, tol) == trial.len() {
            class_coords = trial;
            degree1.push(indicator);
        }
    }
    if degree1.len() != h1 {
        return Err(Error::DegenerateTorsion(
            "single-edge indicators do not span the degree-one cohomology".into(),
        ));
    }
    Ok(vec![
        BasedSpace::new(degree0, tol)?,
        BasedSpace::new(degree1, tol)?,
    ])
}

/// Homology representatives dual to the given cohomology bases under the
/// pairing `<k, h>` (well defined on classes), taken inside the harmonic
/// space of the degree-decreasing differential. With these, the torsion
/// coordinate is stable under the same class-preserving maps as the
/// cohomology choice.
pub fn paired_homology_bases(
    x: &BiGradedComplex,
    cohomology_bases: &[BasedSpace],
    tol: &ToleranceConfig,
) -> Result<Vec<BasedSpace>> {
    let mut result = Vec::with_capacity(cohomology_bases.len());
    for (j, h_basis) in cohomology_bases.iter().enumerate() {
        let harmonic = x.cohomology_basis(j, Side::Dstar, tol)?;
        if harmonic.dimension() != h_basis.dimension() {
            return Err(Error::LineMismatch(format!(
                "degree {j}: homology dimension {} differs from cohomology dimension {}",
                harmonic.dimension(),
                h_basis.dimension()
            )));
        }
        if harmonic.dimension() == 0 {
            result.push(BasedSpace::standard(0));
            continue;
        }
        let w = harmonic.basis_matrix();
        let h = h_basis.basis_matrix();
        let pairing = w.adjoint() * &h;
        let gram = pairing
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateTorsion(format!("degree {j}: degenerate pairing")))?;
        let k = &w * gram.adjoint();
        result.push(BasedSpace::new(
            k.column_iter().map(|c| c.into_owned()).collect(),
            tol,
        )?);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detline::SignConvention;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn d_bases(x: &BiGradedComplex) -> Vec<BasedSpace> {
        (0..=x.top_degree())
            .map(|k| x.cohomology_basis(k, Side::D, &tol()).unwrap())
            .collect()
    }

    fn dstar_bases(x: &BiGradedComplex) -> Vec<BasedSpace> {
        (0..=x.top_degree())
            .map(|k| x.cohomology_basis(k, Side::Dstar, &tol()).unwrap())
            .collect()
    }

    /// Torsion modulus against the subdivision-stable bases.
    fn torsion_modulus(x: &BiGradedComplex) -> f64 {
        let h = geometric_cohomology_bases(x, 1, &tol()).unwrap();
        let k = paired_homology_bases(x, &h, &tol()).unwrap();
        bicomplex::cm_torsion(x, 0.0, &SignConvention::plain(), &h, &k, &tol())
            .unwrap()
            .coordinate
            .norm()
    }

    #[test]
    fn trivial_circle_has_full_cohomology() {
        let x = circle_complex(4, &Holonomy::trivial(1, 4), None, &tol()).unwrap();
        assert_eq!(x.cohomology_dims(Side::D, &tol()).unwrap(), vec![1, 1]);
        assert_eq!(x.cohomology_dims(Side::Dstar, &tol()).unwrap(), vec![1, 1]);
    }

    #[test]
    fn twisted_circle_torsion_matches_closed_form() {
        for theta in [0.5, 1.0 / 3.0] {
            let expected = 4.0 * (std::f64::consts::PI * theta).sin().powi(2);
            for n in [1usize, 8, 32] {
                let x = circle_complex(n, &Holonomy::phase(theta, n), None, &tol()).unwrap();
                assert_eq!(x.cohomology_dims(Side::D, &tol()).unwrap(), vec![0, 0]);
                let t = bicomplex::cm_torsion(
                    &x,
                    0.0,
                    &SignConvention::plain(),
                    &[BasedSpace::standard(0), BasedSpace::standard(0)],
                    &[BasedSpace::standard(0), BasedSpace::standard(0)],
                    &tol(),
                )
                .unwrap();
                assert!(
                    (t.coordinate - complex(expected, 0.0)).norm() < 1e-8 * expected,
                    "theta {theta}, n {n}: {} vs {expected}",
                    t.coordinate
                );
            }
        }
    }

    #[test]
    fn interval_cohomology_dimensions() {
        let rel = interval_complex(3, BoundaryCondition::Rel, &Holonomy::trivial(1, 3), None, &tol())
            .unwrap();
        assert_eq!(rel.cohomology_dims(Side::D, &tol()).unwrap(), vec![0, 1]);
        let abs = interval_complex(3, BoundaryCondition::Abs, &Holonomy::trivial(1, 3), None, &tol())
            .unwrap();
        assert_eq!(abs.cohomology_dims(Side::D, &tol()).unwrap(), vec![1, 0]);
    }

    #[test]
    fn interval_rel_single_edge_is_degenerate_but_defined() {
        let x = interval_complex(1, BoundaryCondition::Rel, &Holonomy::trivial(1, 1), None, &tol())
            .unwrap();
        assert_eq!(x.dims(), &[0, 1]);
        assert_eq!(x.cohomology_dims(Side::D, &tol()).unwrap(), vec![0, 1]);
    }

    #[test]
    fn interval_torsion_subdivision_invariant() {
        for bc in [BoundaryCondition::Rel, BoundaryCondition::Abs] {
            let reference = torsion_modulus(
                &interval_complex(2, bc, &Holonomy::trivial(1, 2), None, &tol()).unwrap(),
            );
            for n in [3usize, 8, 16] {
                let x = interval_complex(n, bc, &Holonomy::trivial(1, n), None, &tol()).unwrap();
                let t = torsion_modulus(&x);
                assert!(
                    (t - reference).abs() < 1e-8 * reference,
                    "bc {bc:?}, n {n}: {t} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn circle_torsion_subdivision_invariant_nonacyclic() {
        let reference =
            torsion_modulus(&circle_complex(2, &Holonomy::trivial(1, 2), None, &tol()).unwrap());
        for n in [3usize, 8, 32] {
            let x = circle_complex(n, &Holonomy::trivial(1, n), None, &tol()).unwrap();
            let t = torsion_modulus(&x);
            assert!(
                (t - reference).abs() < 1e-8 * reference,
                "n {n}: {t} vs {reference}"
            );
        }
    }

    #[test]
    fn circle_torsion_with_nonconstant_weight_is_lambda_independent() {
        // A non-identity weight makes the Laplacian non-self-adjoint; the
        // torsion coordinate must still be independent of the cut.
        let n = 3;
        let mut h0 = CMatrix::identity(n, n);
        h0[(0, 0)] = complex(2.0, 0.0);
        h0[(0, 1)] = complex(0.3, 0.1);
        h0[(1, 0)] = complex(0.3, -0.1);
        h0[(1, 1)] = complex(1.5, 0.0);
        let weight = HermitianWeight {
            vertex_weight: h0,
            edge_weight: CMatrix::identity(n, n),
        };
        let x = circle_complex(n, &Holonomy::phase(0.37, n), Some(&weight), &tol()).unwrap();
        let lap = x.sharp_laplacian(0).unwrap();
        assert!(spectral_norm(&(&lap - lap.adjoint())) > 1e-3);
        let empty = [BasedSpace::standard(0), BasedSpace::standard(0)];
        let t0 = bicomplex::cm_torsion(&x, 0.0, &SignConvention::plain(), &empty, &empty, &tol())
            .unwrap();
        let radius = bicomplex::spectral_radius(&x, &tol()).unwrap();
        let t1 = bicomplex::cm_torsion(
            &x,
            radius * 2.0,
            &SignConvention::plain(),
            &empty,
            &empty,
            &tol(),
        )
        .unwrap();
        assert!(
            (t0.coordinate - t1.coordinate).norm() < 1e-8 * t0.coordinate.norm(),
            "{} vs {}",
            t0.coordinate,
            t1.coordinate
        );
    }

    #[test]
    fn splice_of_two_intervals_is_circle() {
        let s = SpliceScenario::circle_split(0.0, 1, 1);
        let x = splice(&s, &tol()).unwrap();
        assert_eq!(x.dims(), &[2, 2]);
        assert_eq!(x.cohomology_dims(Side::D, &tol()).unwrap(), vec![1, 1]);
    }

    #[test]
    fn splice_with_twist_is_acyclic() {
        let s = SpliceScenario::circle_split(0.3, 2, 2);
        let x = splice(&s, &tol()).unwrap();
        assert_eq!(x.cohomology_dims(Side::D, &tol()).unwrap(), vec![0, 0]);
    }

    #[test]
    fn splice_interval_to_interval_along_one_endpoint() {
        let mut s = SpliceScenario {
            piece1: ModelPiece::interval(2, Holonomy::trivial(1, 2)),
            piece2: ModelPiece::interval(3, Holonomy::trivial(1, 3)),
            identification: vec![(2, 0)],
            interface_weight: InterfaceWeight::Common,
        };
        s.validate().unwrap();
        let x = splice(&s, &tol()).unwrap();
        // A path with 5 edges and 6 vertices: absolute interval cohomology.
        assert_eq!(x.dims(), &[6, 5]);
        assert_eq!(x.cohomology_dims(Side::D, &tol()).unwrap(), vec![1, 0]);
    }

    #[test]
    fn splice_rejects_non_boundary_identification() {
        let s = SpliceScenario {
            piece1: ModelPiece::interval(3, Holonomy::trivial(1, 3)),
            piece2: ModelPiece::interval(3, Holonomy::trivial(1, 3)),
            identification: vec![(1, 0)],
            interface_weight: InterfaceWeight::Common,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn euler_characteristic_bookkeeping() {
        let s = SpliceScenario::circle_split(0.25, 3, 2);
        let a = splice_assembly(&s, &tol()).unwrap();
        let chi = |x: &BiGradedComplex| x.dim(0) as i64 - x.dim(1) as i64;
        assert_eq!(chi(&a.spliced), chi(&a.rel1) + chi(&a.abs2));
    }

    #[test]
    fn les_of_trivial_circle_split() {
        let s = SpliceScenario::circle_split(0.0, 2, 2);
        let iso = les_determinant_iso(&s, LesSide::Psi, &tol()).unwrap();
        assert!(iso.coordinate.norm() > 0.0);
        assert!(iso.coordinate.norm().is_finite());
        // Sequence dimensions: H^0: (0, 1, 1), H^1: (1, 1, 0).
        assert_eq!(iso.dims, vec![0, 1, 1, 1, 1, 0]);
    }

    #[test]
    fn les_degenerate_when_one_piece_is_acyclic_rel() {
        // Twisted piece 2 so only piece 1 contributes relative cohomology.
        let s = SpliceScenario::circle_split(0.5, 2, 2);
        let psi = les_determinant_iso(&s, LesSide::Psi, &tol()).unwrap();
        assert!(psi.coordinate.norm() > 0.0);
    }

    #[test]
    fn splitting_check_on_twisted_circle() {
        for theta in [0.5, 1.0 / 3.0] {
            let s = SpliceScenario::circle_split(theta, 2, 2);
            let ratio = combinatorial_splitting_check(&s, &tol()).unwrap();
            assert!(
                (ratio - 1.0).abs() < 1e-8,
                "theta {theta}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn splitting_check_asymmetric_subdivisions() {
        let s = SpliceScenario::circle_split(1.0 / 3.0, 3, 5);
        let ratio = combinatorial_splitting_check(&s, &tol()).unwrap();
        assert!((ratio - 1.0).abs() < 1e-8, "ratio {ratio}");
    }

    #[test]
    fn summed_interface_weight_reproduces_analytic_anomaly() {
        // With the transmission inner product (weights added on the two
        // interface points) the cochain-level splitting carries exactly the
        // anomaly 2^chi(N) = 4 of the analytic gluing formula.
        for (theta, n1, n2) in [(0.5, 2, 2), (1.0 / 3.0, 3, 5)] {
            let mut s = SpliceScenario::circle_split(theta, n1, n2);
            s.interface_weight = InterfaceWeight::Summed;
            let ratio = combinatorial_splitting_check(&s, &tol()).unwrap();
            assert!((ratio - 4.0).abs() < 1e-8, "ratio {ratio}");
        }
    }

    #[test]
    fn spliced_torsion_matches_circle_closed_form() {
        let theta = 1.0 / 3.0;
        let s = SpliceScenario::circle_split(theta, 2, 3);
        let x = splice(&s, &tol()).unwrap();
        let empty = [BasedSpace::standard(0), BasedSpace::standard(0)];
        let t = bicomplex::cm_torsion(&x, 0.0, &SignConvention::plain(), &empty, &empty, &tol())
            .unwrap();
        let expected = 4.0 * (std::f64::consts::PI * theta).sin().powi(2);
        assert!(
            (t.coordinate - complex(expected, 0.0)).norm() < 1e-8,
            "{} vs {expected}",
            t.coordinate
        );
    }

    #[test]
    fn splitting_check_subdivision_refinement() {
        let base = combinatorial_splitting_check(&SpliceScenario::circle_split(0.5, 2, 2), &tol())
            .unwrap();
        let refined =
            combinatorial_splitting_check(&SpliceScenario::circle_split(0.5, 4, 4), &tol())
                .unwrap();
        assert!((base - 1.0).abs() < 1e-8);
        assert!((refined - 1.0).abs() < 1e-8);
    }
}
