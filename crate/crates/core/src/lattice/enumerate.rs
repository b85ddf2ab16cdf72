use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Lattice, LatticeError};

/// Default cap on candidate vectors (or search-tree nodes) examined by one
/// enumeration.
pub const DEFAULT_CANDIDATE_BUDGET: u64 = 100_000_000;

/// Above this many bounding-box candidates the enumerator switches to a
/// depth-first search over the box's circumscribed ellipsoid.
const DIRECT_SCAN_LIMIT: f64 = 1e5;

/// A closed axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "box bounds differ in length");
        AxisBox { lower, upper }
    }

    /// `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        AxisBox::new(vec![-r; n], vec![r; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(lo, hi)| lo > hi)
    }

    fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }
}

/// A nonzero lattice point `v = B n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
    pub v: Vec<f64>,
}

/// All nonzero points of `lattice` inside `bx`.
pub fn enumerate_in_box(lattice: &Lattice, bx: &AxisBox) -> Result<Vec<LatticePoint>, LatticeError> {
    let mut out = Vec::new();
    visit_box(lattice, bx, DEFAULT_CANDIDATE_BUDGET, |coords, v| {
        out.push(LatticePoint {
            coords: coords.to_vec(),
            v: v.to_vec(),
        })
    })?;
    Ok(out)
}

/// Calls `f(n, Bn)` for every nonzero lattice point in `bx`.
///
/// Small boxes are scanned over the integer hull of the box's preimage.
/// Larger ones are searched depth-first: after scaling each axis so the box
/// becomes `[-1, 1]^n` around the origin, every point of the box satisfies
/// `‖G n - t‖² <= n`, and the QR factor of `G` turns that ellipsoid into
/// nested one-dimensional intervals.
pub(crate) fn visit_box<F>(lattice: &Lattice, bx: &AxisBox, budget: u64, mut f: F) -> Result<(), LatticeError>
where
    F: FnMut(&[i64], &[f64]),
{
    let dim = lattice.dim();
    if bx.dim() != dim {
        return Err(LatticeError::DimensionMismatch {
            expected: dim,
            got: bx.dim(),
        });
    }
    if !bx.is_bounded() {
        return Err(LatticeError::InvalidRegion("box must be bounded".into()));
    }
    if bx.is_empty() {
        return Ok(());
    }
    let b = lattice.basis();
    let inv = b
        .clone()
        .try_inverse()
        .ok_or(LatticeError::NotUnimodular { det: 0.0 })?;
    let (lo, hi) = preimage_hull(&inv, bx);
    let candidates: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as f64).product();
    if candidates <= DIRECT_SCAN_LIMIT.min(budget as f64) {
        scan_hull(b, bx, &lo, &hi, &mut f);
        Ok(())
    } else {
        ellipsoid_search(b, bx, budget, &mut f)
    }
}

fn preimage_hull(inv: &DMatrix<f64>, bx: &AxisBox) -> (Vec<i64>, Vec<i64>) {
    let dim = bx.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    // The preimage of a box is a parallelepiped; for each coordinate the
    // extremes sit at vertices, which linear programming over the box gives
    // directly: pick the bound matching the sign of each entry of inv.
    for i in 0..dim {
        let (mut mn, mut mx) = (0.0, 0.0);
        for j in 0..dim {
            let a = inv[(i, j)];
            let (x, y) = (a * bx.lower[j], a * bx.upper[j]);
            mn += x.min(y);
            mx += x.max(y);
        }
        lo[i] = mn;
        hi[i] = mx;
    }
    let pad = |v: f64| 1e-9 * v.abs().max(1.0);
    (
        lo.iter().map(|v| (v - pad(*v)).floor() as i64).collect(),
        hi.iter().map(|v| (v + pad(*v)).ceil() as i64).collect(),
    )
}

fn apply(b: &DMatrix<f64>, n: &[i64], out: &mut [f64]) {
    let dim = n.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..dim).map(|j| b[(i, j)] * n[j] as f64).sum();
    }
}

fn scan_hull<F: FnMut(&[i64], &[f64])>(b: &DMatrix<f64>, bx: &AxisBox, lo: &[i64], hi: &[i64], f: &mut F) {
    let dim = lo.len();
    let mut n = lo.to_vec();
    let mut v = vec![0.0; dim];
    loop {
        if n.iter().any(|c| *c != 0) {
            apply(b, &n, &mut v);
            if bx.contains(&v) {
                f(&n, &v);
            }
        }
        let mut k = 0;
        loop {
            if k == dim {
                return;
            }
            if n[k] < hi[k] {
                n[k] += 1;
                break;
            }
            n[k] = lo[k];
            k += 1;
        }
    }
}

fn ellipsoid_search<F: FnMut(&[i64], &[f64])>(
    b: &DMatrix<f64>,
    bx: &AxisBox,
    budget: u64,
    f: &mut F,
) -> Result<(), LatticeError> {
    let dim = b.nrows();
    let half: Vec<f64> = (0..dim)
        .map(|i| ((bx.upper[i] - bx.lower[i]) / 2.0).max(f64::MIN_POSITIVE))
        .collect();
    let center: Vec<f64> = (0..dim).map(|i| (bx.upper[i] + bx.lower[i]) / 2.0).collect();
    let mut g = b.clone();
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] /= half[i];
        }
    }
    let t = DVector::from_iterator(dim, (0..dim).map(|i| center[i] / half[i]));
    // A reduced basis keeps the search tree close to the number of points
    // actually inside the ellipsoid.
    let (g, u) = lll_reduce(g);
    let qr = g.qr();
    let r = qr.r();
    let y = qr.q().transpose() * t;
    let radius2 = dim as f64 * (1.0 + 1e-9) + 1e-9;

    let mut m = vec![0i64; dim];
    let mut n = vec![0i64; dim];
    let mut v = vec![0.0; dim];
    let mut nodes = 0u64;
    // Level k fixes m[k] given m[k+1..]; partial[k] is the squared residual
    // accumulated by rows k..dim. Points are n = u m.
    let mut partial = vec![0.0; dim + 1];
    let mut upper = vec![0i64; dim];
    let mut k = dim - 1;
    let mut init = true;
    loop {
        if init {
            let shift: f64 = ((k + 1)..dim).map(|j| r[(k, j)] * m[j] as f64).sum::<f64>() - y[k];
            let rkk = r[(k, k)];
            let room = radius2 - partial[k + 1];
            if room < 0.0 {
                init = false;
                if k + 1 == dim {
                    return Ok(());
                }
                k += 1;
                continue;
            }
            let w = room.sqrt() / rkk.abs();
            let c = -shift / rkk;
            m[k] = (c - w).ceil() as i64;
            upper[k] = (c + w).floor() as i64;
            init = false;
        } else {
            m[k] += 1;
        }
        nodes += 1;
        if nodes > budget {
            return Err(LatticeError::CandidateBudgetExceeded { budget });
        }
        if m[k] > upper[k] {
            if k + 1 == dim {
                return Ok(());
            }
            k += 1;
            continue;
        }
        let shift: f64 = ((k + 1)..dim).map(|j| r[(k, j)] * m[j] as f64).sum::<f64>() - y[k];
        let e = r[(k, k)] * m[k] as f64 + shift;
        partial[k] = partial[k + 1] + e * e;
        if k == 0 {
            if m.iter().any(|c| *c != 0) {
                for (i, ni) in n.iter_mut().enumerate() {
                    *ni = (0..dim).map(|j| u[(i, j)] * m[j]).sum();
                }
                apply(b, &n, &mut v);
                if bx.contains(&v) {
                    f(&n, &v);
                }
            }
        } else {
            k -= 1;
            init = true;
        }
    }
}

/// LLL reduction (`delta = 0.99`) of the columns of `g`. Returns the reduced
/// basis `g u` and the unimodular `u`.
fn lll_reduce(mut g: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<i64>) {
    let n = g.ncols();
    let mut u = DMatrix::<i64>::identity(n, n);
    let delta = 0.99;
    let mut k = 1;
    let mut rounds = 0usize;
    while k < n && rounds < 10_000 {
        rounds += 1;
        let (mut mu, _) = gram_schmidt(&g);
        for j in (0..k).rev() {
            let r = mu[(k, j)].round();
            if r != 0.0 {
                for i in 0..j {
                    mu[(k, i)] -= r * mu[(j, i)];
                }
                mu[(k, j)] -= r;
                let col = g.column(j).clone_owned();
                g.column_mut(k).axpy(-r, &col, 1.0);
                let ucol = u.column(j).clone_owned();
                let ri = r as i64;
                for i in 0..n {
                    u[(i, k)] -= ri * ucol[i];
                }
            }
        }
        let (mu, norms) = gram_schmidt(&g);
        if norms[k] >= (delta - mu[(k, k - 1)] * mu[(k, k - 1)]) * norms[k - 1] {
            k += 1;
        } else {
            g.swap_columns(k, k - 1);
            u.swap_columns(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    (g, u)
}

/// Gram-Schmidt coefficients `mu[(i, j)]` and squared norms of the
/// orthogonalized columns.
fn gram_schmidt(g: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = g.ncols();
    let mut star: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut mu = DMatrix::zeros(n, n);
    let mut norms = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = g.column(i).clone_owned();
        for j in 0..i {
            let m: f64 = g.column(i).dot(&star[j]) / norms[j];
            mu[(i, j)] = m;
            v.axpy(-m, &star[j], 1.0);
        }
        norms.push(v.norm_squared());
        star.push(v);
    }
    (mu, norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::g_flow;

    fn sorted(mut pts: Vec<LatticePoint>) -> Vec<Vec<i64>> {
        pts.sort_by(|a, b| a.coords.cmp(&b.coords));
        pts.into_iter().map(|p| p.coords).collect()
    }

    #[test]
    fn integer_lattice_examples() {
        let z2 = Lattice::integer(2);
        assert_eq!(enumerate_in_box(&z2, &AxisBox::cube(2, 1.5)).unwrap().len(), 8);
        let inner = AxisBox::new(vec![0.2, 0.2], vec![0.8, 0.8]);
        assert!(enumerate_in_box(&z2, &inner).unwrap().is_empty());
    }

    #[test]
    fn half_lattice_example() {
        let l = Lattice::from_x(&[0.5]);
        let bx = AxisBox::new(vec![-0.6, 0.5], vec![0.6, 1.5]);
        let mut vs: Vec<Vec<f64>> = enumerate_in_box(&l, &bx).unwrap().into_iter().map(|p| p.v).collect();
        vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(vs, vec![vec![-0.5, 1.0], vec![0.5, 1.0]]);
    }

    #[test]
    fn ellipsoid_search_matches_direct_scan() {
        let l = Lattice::from_x(&[0.3819660112501051])
            .transformed(&g_flow(3.0, 1))
            .unwrap();
        let bx = AxisBox::new(vec![-3.0, 0.01], vec![3.0, 2.5]);
        let mut direct = Vec::new();
        let inv = l.basis().clone().try_inverse().unwrap();
        let (lo, hi) = preimage_hull(&inv, &bx);
        scan_hull(l.basis(), &bx, &lo, &hi, &mut |n: &[i64], v: &[f64]| {
            direct.push(LatticePoint {
                coords: n.to_vec(),
                v: v.to_vec(),
            })
        });
        let mut searched = Vec::new();
        ellipsoid_search(l.basis(), &bx, u64::MAX, &mut |n: &[i64], v: &[f64]| {
            searched.push(LatticePoint {
                coords: n.to_vec(),
                v: v.to_vec(),
            })
        })
        .unwrap();
        assert!(!direct.is_empty());
        assert_eq!(sorted(direct), sorted(searched));
    }

    #[test]
    fn budget_is_enforced() {
        let l = Lattice::from_x(&[0.1234567, 0.7654321]);
        let bx = AxisBox::cube(3, 60.0);
        let mut count = 0;
        let err = visit_box(&l, &bx, 1000, |_, _| count += 1).unwrap_err();
        assert_eq!(err, LatticeError::CandidateBudgetExceeded { budget: 1000 });
    }
}
