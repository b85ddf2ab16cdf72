use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::interval::RationalInterval;
use super::ContFracError;

/// Upper bound on the number of continued-fraction terms any refinement may
/// request. Inputs that need more than this behave like rationals at the
/// requested precision and are rejected.
pub const MAX_TERMS: usize = 10_000;

type ElementRule = dyn Fn(u64) -> BigUint + Send + Sync;

/// A real number `x = [0; a_1, a_2, ...]` in `(0, 1)` given by an infinite,
/// lazily generated sequence of continued-fraction elements.
///
/// Elements and convergents are cached behind a lock; cloning is cheap and
/// clones share the cache. Extension is idempotent, so concurrent readers
/// always observe a consistent prefix.
#[derive(Clone)]
pub struct CFNumber {
    inner: Arc<Inner>,
}

struct Inner {
    label: String,
    rule: Box<ElementRule>,
    cache: RwLock<Cache>,
}

struct Cache {
    /// `elements[k]` is `a_{k+1}`.
    elements: Vec<BigUint>,
    /// `p[k]` is `p_{k-1}`, so `p[0] = p_{-1} = 1` and `p[1] = p_0 = 0`.
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

/// The `n`-th convergent `p_n / q_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub n: i64,
    #[serde(with = "crate::bigint_serde::int")]
    pub p: BigInt,
    #[serde(with = "crate::bigint_serde::int")]
    pub q: BigInt,
}

impl Convergent {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// Circle rotation `q·x`: the representative of `qx` in `(-1/2, 1/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotation {
    pub q: BigInt,
    /// The unique integer with `|qx - p| < 1/2`.
    pub p: BigInt,
    /// Exact sign of `qx - p`.
    pub sign: i8,
    pub enclosure: RationalInterval,
}

/// Result of deciding the sign of `a·x - b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Decision {
    pub sign: Ordering,
    /// Convergent level `m` at which the enclosure `[p_m/q_m, p_{m+1}/q_{m+1}]`
    /// settled the sign.
    pub level: usize,
}

impl CFNumber {
    /// Number generated by `rule(n) = a_n` for `n >= 1`. The rule must never
    /// return zero.
    pub fn from_rule<F>(label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(u64) -> BigUint + Send + Sync + 'static,
    {
        CFNumber {
            inner: Arc::new(Inner {
                label: label.into(),
                rule: Box::new(rule),
                cache: RwLock::new(Cache {
                    elements: Vec::new(),
                    p: vec![BigInt::one(), BigInt::zero()],
                    q: vec![BigInt::zero(), BigInt::one()],
                }),
            }),
        }
    }

    /// `[0; k, k, k, ...]`.
    pub fn constant(k: u64) -> Self {
        assert!(k >= 1, "continued-fraction elements must be positive");
        CFNumber::from_rule(format!("const:{k}"), move |_| BigUint::from(k))
    }

    /// `[0; 1, 1, 1, ...]`, the golden-type number `(sqrt 5 - 1)/2`.
    pub fn golden() -> Self {
        CFNumber::constant(1)
    }

    /// Purely periodic expansion repeating `period`.
    pub fn periodic(period: Vec<BigUint>) -> Self {
        assert!(!period.is_empty(), "period must be non-empty");
        assert!(
            period.iter().all(|a| !a.is_zero()),
            "continued-fraction elements must be positive"
        );
        let label = format!(
            "periodic:{}",
            period
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        CFNumber::from_rule(label, move |n| {
            period[((n - 1) as usize) % period.len()].clone()
        })
    }

    /// Explicit leading elements followed by the elements of `tail`
    /// (`tail`'s `a_1` lands at position `prefix.len() + 1`).
    pub fn with_prefix(prefix: Vec<BigUint>, tail: CFNumber) -> Self {
        assert!(
            prefix.iter().all(|a| !a.is_zero()),
            "continued-fraction elements must be positive"
        );
        let label = format!(
            "prefix:[{}]+{}",
            prefix
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
            tail.label()
        );
        let k = prefix.len() as u64;
        CFNumber::from_rule(label, move |n| {
            if n <= k {
                prefix[(n - 1) as usize].clone()
            } else {
                tail.element((n - k) as usize)
            }
        })
    }

    /// The biased number: `a_n = 4` for odd `n`, `a_n = n^n` for even `n`.
    pub fn biased() -> Self {
        CFNumber::from_rule("biased", biased_elements)
    }

    /// `a_n = n^n`.
    pub fn self_power() -> Self {
        CFNumber::from_rule("self-power", |n| BigUint::from(n).pow(n as u32))
    }

    /// `a_n = (2n)^(2n)`; interleaved after `[0; 4, 4, ...]` this yields
    /// [`CFNumber::biased`].
    pub fn even_self_power() -> Self {
        CFNumber::from_rule("even-self-power", |n| {
            BigUint::from(2 * n).pow((2 * n) as u32)
        })
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// The element `a_n`, `n >= 1`.
    pub fn element(&self, n: usize) -> BigUint {
        assert!(n >= 1, "elements are indexed from 1");
        {
            let cache = self.inner.cache.read().unwrap();
            if let Some(a) = cache.elements.get(n - 1) {
                return a.clone();
            }
        }
        let a = (self.inner.rule)(n as u64);
        assert!(!a.is_zero(), "element a_{n} of {} is zero", self.label());
        a
    }

    /// Elements `a_1..=a_n`.
    pub fn prefix(&self, n: usize) -> Vec<BigUint> {
        (1..=n).map(|k| self.element(k)).collect()
    }

    /// Prefix of `n` elements as decimal strings, the JSON interchange form.
    pub fn prefix_strings(&self, n: usize) -> Vec<String> {
        self.prefix(n).iter().map(|a| a.to_string()).collect()
    }

    pub(crate) fn try_ensure(&self, n: usize) -> Result<(), ContFracError> {
        if n > MAX_TERMS {
            return Err(ContFracError::RefinementLimit { terms: MAX_TERMS });
        }
        if self.inner.cache.read().unwrap().elements.len() >= n {
            return Ok(());
        }
        let mut cache = self.inner.cache.write().unwrap();
        while cache.elements.len() < n {
            let k = cache.elements.len() + 1;
            let a = (self.inner.rule)(k as u64);
            assert!(!a.is_zero(), "element a_{k} of {} is zero", self.label());
            let ai = BigInt::from_biguint(Sign::Plus, a.clone());
            let len = cache.p.len();
            let p = &ai * &cache.p[len - 1] + &cache.p[len - 2];
            let q = &ai * &cache.q[len - 1] + &cache.q[len - 2];
            cache.elements.push(a);
            cache.p.push(p);
            cache.q.push(q);
        }
        Ok(())
    }

    /// `(p_m, q_m)` for `m >= -1`.
    fn pq(&self, m: i64) -> Result<(BigInt, BigInt), ContFracError> {
        assert!(m >= -1);
        self.try_ensure(m.max(0) as usize)?;
        let cache = self.inner.cache.read().unwrap();
        let k = (m + 1) as usize;
        Ok((cache.p[k].clone(), cache.q[k].clone()))
    }

    /// The convergent `p_n/q_n` for `n >= -1`.
    ///
    /// Panics if `n` exceeds [`MAX_TERMS`].
    pub fn convergent(&self, n: i64) -> Convergent {
        let (p, q) = self
            .pq(n)
            .unwrap_or_else(|e| panic!("convergent {n} unavailable: {e}"));
        Convergent { n, p, q }
    }

    /// Convergents `0..=n_max`.
    pub fn convergents(&self, n_max: usize) -> Vec<Convergent> {
        (0..=n_max as i64).map(|n| self.convergent(n)).collect()
    }

    pub fn q(&self, n: i64) -> BigInt {
        self.convergent(n).q
    }

    /// Smallest level `m >= 0` with `q_m >= bound`.
    fn level_for(&self, bound: &BigInt) -> Result<usize, ContFracError> {
        let mut m = 0usize;
        loop {
            let (_, q) = self.pq(m as i64)?;
            if &q >= bound {
                return Ok(m);
            }
            m += 1;
        }
    }

    /// The enclosure `[p_m/q_m, p_{m+1}/q_{m+1}]` (order-normalized).
    pub fn enclosure_at(&self, m: usize) -> RationalInterval {
        let a = self.convergent(m as i64).to_rational();
        let b = self.convergent(m as i64 + 1).to_rational();
        RationalInterval::spanning(a, b)
    }

    /// A pair of consecutive convergents bracketing `x` with width at most
    /// `width_bound`.
    pub fn enclose(&self, width_bound: &BigRational) -> Result<RationalInterval, ContFracError> {
        if !width_bound.is_positive() {
            return Err(ContFracError::NonPositiveWidth);
        }
        let mut m = 0usize;
        loop {
            let (_, q0) = self.pq(m as i64)?;
            let (_, q1) = self.pq(m as i64 + 1)?;
            // Consecutive convergents differ by exactly 1/(q_m q_{m+1}).
            let width = BigRational::new(BigInt::one(), q0 * q1);
            if &width <= width_bound {
                return Ok(self.enclosure_at(m));
            }
            m += 1;
        }
    }

    /// Decides the sign of `a·x - b` exactly.
    pub(crate) fn decide_affine(&self, a: &BigInt, b: &BigInt) -> Result<Decision, ContFracError> {
        if a.is_zero() {
            return Ok(Decision {
                sign: BigInt::zero().cmp(b),
                level: 0,
            });
        }
        let mut m = self.level_for(&a.abs())?;
        loop {
            let (p0, q0) = self.pq(m as i64)?;
            let (p1, q1) = self.pq(m as i64 + 1)?;
            let s0 = (a * &p0 - b * &q0).sign();
            let s1 = (a * &p1 - b * &q1).sign();
            // a·x - b = a (x - p_k/q_k) when b/a = p_k/q_k, and x - p_k/q_k
            // has sign (-1)^k.
            for (s, k) in [(s0, m), (s1, m + 1)] {
                if s == Sign::NoSign {
                    let alt = if k % 2 == 0 { 1 } else { -1 };
                    let sa = if a.is_positive() { 1 } else { -1 };
                    return Ok(Decision {
                        sign: (alt * sa).cmp(&0),
                        level: m,
                    });
                }
            }
            if s0 == s1 {
                let sign = if s0 == Sign::Plus {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
                return Ok(Decision { sign, level: m });
            }
            m = (m + 1).max(2 * m);
        }
    }

    /// Exact sign of `a·x - b` for integers `a`, `b`.
    pub fn sign_affine(&self, a: &BigInt, b: &BigInt) -> Result<Ordering, ContFracError> {
        Ok(self.decide_affine(a, b)?.sign)
    }

    /// Enclosure of `a·x - b` over the convergent bracket at `level`.
    pub(crate) fn affine_enclosure(&self, a: &BigInt, b: &BigInt, level: usize) -> RationalInterval {
        let c0 = self.convergent(level as i64);
        let c1 = self.convergent(level as i64 + 1);
        let at = |c: &Convergent| BigRational::new(a * &c.p - b * &c.q, c.q.clone());
        RationalInterval::spanning(at(&c0), at(&c1))
    }

    /// The integer nearest to `q x`.
    pub fn nearest_integer(&self, q: &BigInt) -> Result<BigInt, ContFracError> {
        if q.is_zero() {
            return Ok(BigInt::zero());
        }
        let m = self.level_for(&q.abs())?;
        let (pm, qm) = self.pq(m as i64)?;
        let two = BigInt::from(2);
        let mut p = (&two * q * &pm + &qm).div_floor(&(&two * &qm));
        let two_q = &two * q;
        loop {
            // need 2p - 1 < 2qx < 2p + 1
            if self.sign_affine(&two_q, &(&two * &p - 1))? != Ordering::Greater {
                p -= 1;
            } else if self.sign_affine(&two_q, &(&two * &p + 1))? != Ordering::Less {
                p += 1;
            } else {
                return Ok(p);
            }
        }
    }

    /// The rotation `q·x = qx - round(qx)` with exact sign and an enclosure
    /// that excludes zero.
    pub fn rotation_value(&self, q: &BigInt) -> Result<Rotation, ContFracError> {
        if q.is_zero() {
            return Ok(Rotation {
                q: q.clone(),
                p: BigInt::zero(),
                sign: 0,
                enclosure: RationalInterval::point(BigRational::zero()),
            });
        }
        let p = self.nearest_integer(q)?;
        let d = self.decide_affine(q, &p)?;
        let enclosure = self.tight_enclosure(q, &p, d.level, 40)?;
        let sign = match d.sign {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => 0,
        };
        Ok(Rotation {
            q: q.clone(),
            p,
            sign,
            enclosure,
        })
    }

    /// Enclosure of `a·x - b` (nonzero) starting from bracket `level`,
    /// refined until it excludes zero and has relative width `2^-bits`.
    fn tight_enclosure(&self, a: &BigInt, b: &BigInt, level: usize, bits: usize) -> Result<RationalInterval, ContFracError> {
        let mut level = level;
        let scale = BigRational::from_integer(BigInt::one() << bits);
        loop {
            let enclosure = self.affine_enclosure(a, b, level);
            let tight = enclosure.excludes_zero() && {
                let abs = enclosure.abs();
                abs.width() * &scale <= *abs.lo()
            };
            if tight || level + 2 >= MAX_TERMS {
                return Ok(enclosure);
            }
            level += 1;
            self.try_ensure(level + 2)?;
        }
    }

    /// `a·x - b` rounded to `f64` (relative error about `2^-53`).
    pub fn affine_f64(&self, a: &BigInt, b: &BigInt) -> Result<f64, ContFracError> {
        let d = self.decide_affine(a, b)?;
        if d.sign == Ordering::Equal {
            return Ok(0.0);
        }
        let enclosure = self.tight_enclosure(a, b, d.level, 64)?;
        Ok(enclosure.midpoint().to_f64().unwrap_or(f64::NAN))
    }

    /// Exact sign of the convergent error `q_n x - p_n`.
    pub fn convergent_error_sign(&self, n: i64) -> Result<Ordering, ContFracError> {
        let c = self.convergent(n);
        self.sign_affine(&c.q, &c.p)
    }

    /// Exact enclosure of `|q_{n-1}·x| / |q_n·x|` for `n >= 1`, using the
    /// signed convergent errors `q_k x - p_k`.
    pub fn error_ratio_bounds(&self, n: usize) -> Result<RationalInterval, ContFracError> {
        assert!(n >= 1, "ratio is defined for n >= 1");
        let prev = self.convergent(n as i64 - 1);
        let cur = self.convergent(n as i64);
        // The ratio -(q_{n-1} y - p_{n-1})/(q_n y - p_n) is a Moebius function of
        // y with its pole at p_n/q_n, so it is monotone on brackets of level
        // m >= n + 1; evaluate at both endpoints.
        let tol = BigRational::new(BigInt::one(), BigInt::from(10).pow(30));
        let mut m = n as i64 + 1;
        loop {
            let ratio_at = |c: &Convergent| {
                let num = &prev.q * &c.p - &prev.p * &c.q;
                let den = &cur.q * &c.p - &cur.p * &c.q;
                -BigRational::new(num, den)
            };
            let a = self.convergent(m);
            let b = self.convergent(m + 1);
            let iv = RationalInterval::spanning(ratio_at(&a), ratio_at(&b));
            if iv.width() <= &tol * iv.hi() || m as usize >= MAX_TERMS - 1 {
                return Ok(iv);
            }
            m += 1;
        }
    }

    /// Floating-point approximation, accurate to well below `f64` resolution.
    pub fn to_f64(&self) -> f64 {
        let bound = BigInt::one() << 64;
        let m = self.level_for(&bound).unwrap_or(MAX_TERMS - 1);
        self.convergent(m as i64).to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for CFNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<String> = self.prefix_strings(6);
        write!(f, "CFNumber({}: [0; {}, ...])", self.label(), shown.join(", "))
    }
}

/// The biased element sequence: `4` for odd `n`, `n^n` for even `n`.
pub fn biased_elements(n: u64) -> BigUint {
    assert!(n >= 1, "elements are indexed from 1");
    if n % 2 == 1 {
        BigUint::from(4u32)
    } else {
        BigUint::from(n).pow(n as u32)
    }
}

/// Continued-fraction product: `x1` supplies the odd positions `1, 3, 5, ...`
/// and `x2` the even positions `2, 4, 6, ...`.
pub fn cf_product(x1: &CFNumber, x2: &CFNumber) -> CFNumber {
    let a = x1.clone();
    let b = x2.clone();
    CFNumber::from_rule(format!("({})#({})", x1.label(), x2.label()), move |n| {
        if n % 2 == 1 {
            a.element(n.div_ceil(2) as usize)
        } else {
            b.element((n / 2) as usize)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(bi(n), bi(d))
    }

    #[test]
    fn convergents_of_constant_four() {
        let cf = CFNumber::constant(4);
        let got: Vec<(i64, i64)> = cf
            .convergents(3)
            .iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(got, vec![(0, 1), (1, 4), (4, 17), (17, 72)]);
        assert_eq!(cf.convergent(-1), Convergent { n: -1, p: bi(1), q: bi(0) });
    }

    #[test]
    fn biased_q4() {
        let cf = CFNumber::biased();
        assert_eq!(cf.q(4), bi(18449));
        assert_eq!(biased_elements(1), BigUint::from(4u32));
        assert_eq!(biased_elements(2), BigUint::from(4u32));
        assert_eq!(biased_elements(6), BigUint::from(46656u32));
    }

    #[test]
    fn product_reproduces_biased() {
        let x = cf_product(&CFNumber::constant(4), &CFNumber::even_self_power());
        let b = CFNumber::biased();
        for n in 1..=16 {
            assert_eq!(x.element(n), b.element(n), "n = {n}");
        }
    }

    #[test]
    fn product_interleaves() {
        let x = cf_product(&CFNumber::constant(2), &CFNumber::constant(3));
        let got: Vec<u32> = x.prefix(6).iter().map(|a| a.to_u32().unwrap()).collect();
        assert_eq!(got, vec![2, 3, 2, 3, 2, 3]);
        let g = cf_product(&CFNumber::golden(), &CFNumber::golden());
        assert!(g.prefix(10).iter().all(|a| a.is_one()));
    }

    #[test]
    fn enclose_examples() {
        let cf = CFNumber::constant(4);
        let iv = cf.enclose(&rat(1, 10)).unwrap();
        assert_eq!(iv.lo(), &rat(4, 17));
        assert_eq!(iv.hi(), &rat(1, 4));
        assert_eq!(iv.width(), rat(1, 68));

        let iv = cf.enclose(&rat(1, 1)).unwrap();
        assert_eq!(iv, RationalInterval::spanning(rat(0, 1), rat(1, 4)));

        let b = CFNumber::biased();
        let w = BigRational::new(BigInt::one(), BigInt::from(10).pow(9));
        let iv = b.enclose(&w).unwrap();
        assert!(iv.width() <= w);
        assert!(iv.contains(&rat(0, 1)) == false);
        assert!(cf.enclose(&rat(0, 1)).is_err());
    }

    #[test]
    fn rotation_signs_alternate_for_biased() {
        let b = CFNumber::biased();
        for n in 0..=9 {
            let r = b.rotation_value(&b.q(n)).unwrap();
            let expected = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(r.sign, expected, "n = {n}");
            assert_eq!(r.p, b.convergent(n).p);
            assert_eq!(r.enclosure.sign(), Some(expected));
        }
    }

    #[test]
    fn rotation_of_q1_within_fact4_window() {
        let b = CFNumber::biased();
        let r = b.rotation_value(&bi(4)).unwrap();
        let abs = r.enclosure.abs();
        assert!(abs.inside_open(&rat(1, 21), &rat(1, 17)));
    }

    #[test]
    fn sign_affine_exact_at_convergent() {
        // 17x - 4 has the sign of x - 4/17, which is (-1)^2 > 0.
        let cf = CFNumber::constant(4);
        assert_eq!(cf.sign_affine(&bi(17), &bi(4)).unwrap(), Ordering::Greater);
        assert_eq!(cf.sign_affine(&bi(4), &bi(1)).unwrap(), Ordering::Less);
        assert_eq!(cf.sign_affine(&bi(0), &bi(-3)).unwrap(), Ordering::Greater);
    }

    #[test]
    fn ratio_bounds_golden() {
        let g = CFNumber::golden();
        for n in 1..=20 {
            let iv = g.error_ratio_bounds(n).unwrap();
            assert!(iv.inside_open(&rat(1, 2), &rat(3, 1)), "n = {n}: {iv}");
        }
    }

    #[test]
    fn ratio_bounds_biased() {
        let b = CFNumber::biased();
        for n in 1..=9usize {
            let iv = b.error_ratio_bounds(n).unwrap();
            let a = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, b.element(n + 1)));
            let lo = &a / BigRational::from_integer(bi(2));
            let hi = &a + BigRational::from_integer(bi(2));
            assert!(iv.inside_open(&lo, &hi), "n = {n}");
        }
    }

    #[test]
    fn shared_cache_across_threads() {
        let b = CFNumber::biased();
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let b = b.clone();
                std::thread::spawn(move || b.convergent(6 + k).q)
            })
            .collect();
        let qs: Vec<BigInt> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for (k, q) in qs.iter().enumerate() {
            assert_eq!(q, &b.q(6 + k as i64));
        }
    }

    #[test]
    fn refinement_cap_is_reported() {
        // Growth of 1s is slow enough that q_m never reaches 2^20000 within
        // the term cap.
        let g = CFNumber::golden();
        let huge = BigInt::one() << 20000usize;
        assert!(matches!(
            g.rotation_value(&huge),
            Err(ContFracError::RefinementLimit { .. })
        ));
    }
}
