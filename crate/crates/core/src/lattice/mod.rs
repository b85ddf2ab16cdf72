//! Unimodular lattices in `R^{d+1}`, the thinning regions `P_T` and
//! `R_{eps,T}`, the diagonal flow `g_t`, and lattice-point counting.

mod approx;
mod count;
pub(crate) mod enumerate;
pub(crate) mod exact;
mod region;

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contfrac::{CFNumber, ContFracError};

pub use approx::{count_approximates, count_approximates_with, ApproxTarget};
pub use count::{count_region, count_region_with, shell_count, CountOptions};
pub use enumerate::{enumerate_in_box, AxisBox, LatticePoint, DEFAULT_CANDIDATE_BUDGET};
pub use region::{region_contains, region_volume, thinning_cone_contains, Membership, RegionKind, RegionSpec};

/// Tolerance on `|det B| - 1` for a unimodular basis.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("basis is not unimodular: |det| = {det}")]
    NotUnimodular { det: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration needs more than {budget} candidates (reduce t or enlarge the budget)")]
    CandidateBudgetExceeded { budget: u64 },
    #[error("region is unbounded (eps = 0 admits the whole v_2 = 0 layer)")]
    UnboundedRegion,
    #[error("approximate with q = {q} has qx - p = 0; its direction is undefined")]
    DegenerateRational { q: u64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error(transparent)]
    ContFrac(#[from] ContFracError),
}

/// Structural tag of a lattice.
#[derive(Clone, Debug)]
pub enum LatticeKind {
    Generic,
    /// `Λ_x = h_x Z^{d+1}` with `h_x = [[Id_d, x], [0, 1]]`. For `d = 1` an
    /// exact continued-fraction description of `x` may be attached.
    Horospherical { x: Vec<f64>, exact: Option<CFNumber> },
}

/// A unimodular lattice `Λ = B Z^{d+1}`, basis vectors in the columns of `B`.
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: DMatrix<f64>,
    /// The basis entries as exact rationals (every `f64` is a dyadic rational).
    exact_basis: Vec<BigRational>,
    kind: LatticeKind,
}

impl Lattice {
    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self, LatticeError> {
        if basis.nrows() != basis.ncols() || basis.nrows() < 2 {
            return Err(LatticeError::DimensionMismatch {
                expected: basis.nrows().max(2),
                got: basis.ncols(),
            });
        }
        let det = basis.determinant().abs();
        if !((det - 1.0).abs() <= UNIMODULAR_TOLERANCE) {
            return Err(LatticeError::NotUnimodular { det });
        }
        Ok(Lattice::new_unchecked(basis, LatticeKind::Generic))
    }

    fn new_unchecked(basis: DMatrix<f64>, kind: LatticeKind) -> Self {
        let exact_basis = basis.iter().map(|v| exact::rational(*v)).collect();
        Lattice {
            basis,
            exact_basis,
            kind,
        }
    }

    /// `Z^n`.
    pub fn integer(n: usize) -> Self {
        Lattice::new_unchecked(DMatrix::identity(n, n), LatticeKind::Generic)
    }

    /// `Λ_x = h_x Z^{d+1} = {(qx - p, q)}`.
    pub fn from_x(x: &[f64]) -> Self {
        let d = x.len();
        let mut h = DMatrix::identity(d + 1, d + 1);
        for (i, xi) in x.iter().enumerate() {
            h[(i, d)] = *xi;
        }
        Lattice::new_unchecked(
            h,
            LatticeKind::Horospherical {
                x: x.to_vec(),
                exact: None,
            },
        )
    }

    /// `Λ_x` for `d = 1` with exact membership decided by continued fractions.
    pub fn from_cf(x: &CFNumber) -> Self {
        let xf = x.to_f64();
        let mut l = Lattice::from_x(&[xf]);
        l.kind = LatticeKind::Horospherical {
            x: vec![xf],
            exact: Some(x.clone()),
        };
        l
    }

    /// The lattice `M Λ` (generic tag).
    pub fn transformed(&self, m: &DMatrix<f64>) -> Result<Self, LatticeError> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim(),
                got: m.nrows(),
            });
        }
        Lattice::from_basis(m * &self.basis)
    }

    /// Ambient dimension `d + 1`.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn is_horospherical(&self) -> bool {
        matches!(self.kind, LatticeKind::Horospherical { .. })
    }

    /// `B n` in floating point.
    pub fn point(&self, n: &[i64]) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.basis[(i, j)] * n[j] as f64).sum())
            .collect()
    }

    /// `B n` exactly.
    pub fn exact_point(&self, n: &[i64]) -> Vec<BigRational> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| &self.exact_basis[i + j * dim] * BigRational::from_integer(n[j].into()))
                    .sum()
            })
            .collect()
    }
}

/// `g_t = diag(e^t Id_d, e^{-dt})`.
pub fn g_flow(t: f64, d: usize) -> DMatrix<f64> {
    g_flow_scale(t.exp(), d)
}

/// `g_t` given `e^t` directly, for flows whose scale is exactly representable
/// (for instance `e^s = 2` with `s = log 2` and `d = 1`).
pub fn g_flow_scale(scale: f64, d: usize) -> DMatrix<f64> {
    let mut g = DMatrix::identity(d + 1, d + 1);
    for i in 0..d {
        g[(i, i)] = scale;
    }
    g[(d, d)] = scale.powi(-(d as i32));
    g
}

/// Outcome of a counting operation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub total: u64,
    /// Points whose direction lies in `A`; absent when no `A` was given.
    #[serde(rename = "in_A", skip_serializing_if = "Option::is_none", default)]
    pub in_a: Option<u64>,
    /// Points with `v_1 = 0`, whose direction is undefined.
    pub degenerate: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witnesses: Option<Vec<Witness>>,
}

impl CountResult {
    pub(crate) fn empty(with_a: bool, with_witnesses: bool) -> Self {
        CountResult {
            total: 0,
            in_a: with_a.then_some(0),
            degenerate: 0,
            witnesses: with_witnesses.then(Vec::new),
        }
    }

    pub(crate) fn merge(&mut self, other: CountResult) {
        self.total += other.total;
        self.degenerate += other.degenerate;
        if let (Some(a), Some(b)) = (self.in_a.as_mut(), other.in_a) {
            *a += b;
        }
        if let (Some(w), Some(o)) = (self.witnesses.as_mut(), other.witnesses) {
            w.extend(o);
        }
    }

    /// `in_A / total`, if both are available and `total > 0`.
    pub fn ratio(&self) -> Option<f64> {
        match self.in_a {
            Some(a) if self.total > 0 => Some(a as f64 / self.total as f64),
            _ => None,
        }
    }
}

/// A counted lattice point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub v: Vec<f64>,
    /// Integer coordinates with respect to the basis.
    pub coords: Vec<i64>,
    /// `q` for points of a horospherical lattice.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<u64>,
    /// `v_1 / ‖v_1‖`, absent for degenerate points.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub in_a: Option<bool>,
}

/// Writes witnesses as CSV rows: `v_1..v_{d+1}, q, u_1..u_d, in_A`.
pub fn write_witness_csv<W: std::io::Write>(w: W, witnesses: &[Witness]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some(first) = witnesses.first() else {
        out.flush()?;
        return Ok(());
    };
    let n = first.v.len();
    let mut header: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    header.push("q".into());
    header.extend((1..n).map(|i| format!("u{i}")));
    header.push("in_A".into());
    out.write_record(&header)?;
    for wit in witnesses {
        let mut row: Vec<String> = wit.v.iter().map(|x| format!("{x:e}")).collect();
        row.push(wit.q.map(|q| q.to_string()).unwrap_or_default());
        match &wit.direction {
            Some(u) => row.extend(u.iter().map(|x| format!("{x:e}"))),
            None => row.extend((1..n).map(|_| String::new())),
        }
        row.push(wit.in_a.map(|b| b.to_string()).unwrap_or_default());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_x_examples() {
        let z = Lattice::from_x(&[0.0]);
        assert_eq!(z.basis(), &DMatrix::<f64>::identity(2, 2));
        let half = Lattice::from_x(&[0.5]);
        assert_eq!(half.point(&[0, 1]), vec![0.5, 1.0]);
        assert_eq!(half.point(&[-1, 1]), vec![-0.5, 1.0]);
        let l = Lattice::from_x(&[0.3, 0.7]);
        assert_eq!(l.point(&[0, 0, 1]), vec![0.3, 0.7, 1.0]);
    }

    #[test]
    fn g_flow_examples() {
        assert_eq!(g_flow(0.0, 2), DMatrix::<f64>::identity(3, 3));
        let g = g_flow(2f64.ln(), 1);
        assert!((g[(0, 0)] - 2.0).abs() < 1e-15 && (g[(1, 1)] - 0.5).abs() < 1e-15);
        for d in 1..=4 {
            assert!((g_flow(0.37, d).determinant() - 1.0).abs() < 1e-12);
        }
        assert_eq!(g_flow_scale(2.0, 1)[(1, 1)], 0.5);
    }

    #[test]
    fn rejects_non_unimodular() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            Lattice::from_basis(b),
            Err(LatticeError::NotUnimodular { .. })
        ));
        let ok = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        assert!(Lattice::from_basis(ok).is_ok());
    }

    #[test]
    fn exact_point_matches_float_for_dyadic_basis() {
        let l = Lattice::from_x(&[0.25]);
        let v = l.exact_point(&[-1, 3]);
        assert_eq!(v[0], BigRational::new((-1).into(), 4.into()));
        assert_eq!(v[1], BigRational::from_integer(3.into()));
    }

    #[test]
    fn count_result_json_shape() {
        let c = CountResult {
            total: 9,
            in_a: Some(0),
            degenerate: 9,
            witnesses: None,
        };
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"total":9,"in_A":0,"degenerate":9}"#
        );
    }
}
