use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A Haar-random element of `SO(n)`.
///
/// QR of a Gaussian matrix, with the columns of `Q` flipped to make the
/// diagonal of `R` positive (which makes `Q` Haar on `O(n)`), and the last
/// column negated when `det Q = -1`.
pub fn haar_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(n >= 2, "rotations need n >= 2");
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(n - 1).neg_mut();
    }
    q
}

/// The random stream used for sample `index` of a run seeded with `seed`.
/// Streams are independent of evaluation order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `‖K^T K - Id‖_max`.
pub fn orthogonality_residual(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    (k.transpose() * k - DMatrix::<f64>::identity(n, n)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_rotations() {
        for i in 0..200 {
            let mut rng = sample_rng(11, i);
            let k = haar_rotation(2 + (i as usize % 4), &mut rng);
            assert!(orthogonality_residual(&k) <= 1e-10);
            assert!((k.determinant() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = haar_rotation(3, &mut sample_rng(5, 17));
        let b = haar_rotation(3, &mut sample_rng(5, 17));
        let c = haar_rotation(3, &mut sample_rng(5, 18));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn first_column_is_centered() {
        let m = 4000;
        let mut sum = [0.0; 3];
        for i in 0..m {
            let k = haar_rotation(3, &mut sample_rng(1, i));
            for (s, x) in sum.iter_mut().zip(k.column(0).iter()) {
                *s += x;
            }
        }
        for s in sum {
            assert!((s / m as f64).abs() <= 4.0 / (m as f64).sqrt());
        }
    }
}
