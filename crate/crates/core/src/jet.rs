//! Truncated multivariate jet arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a smooth function at a point,
//! through a fixed total order K ≤ 3, in `num_vars` variables. Coefficients
//! are Taylor-normalized: `coeffs[α] = ∂^α f / α!`, so multiplication is a
//! plain coefficient convolution and exact partial derivatives come from a
//! factorial rescale. All calculus downstream of this module (directional
//! derivatives, Lie brackets, frame solves) is built on these jets instead of
//! finite differences.
//!
//! Jets are immutable values and all operations are pure; mixing operands of
//! different shape (`num_vars`, `order`) is a programming error and panics.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 3;

/// Values closer to a singular locus than this are treated as degenerate
/// rather than divided through.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Index bookkeeping shared by all jets of one shape.
///
/// Multi-indices are stored in graded order (total degree, then generation
/// order within a degree), so the table of order K−1 is a prefix of the table
/// of order K and truncation is a prefix copy.
struct IndexTable {
    num_vars: usize,
    order: usize,
    indices: Vec<Box<[u8]>>,
    pos: HashMap<Box<[u8]>, u32>,
    /// Triples (i, j, k) with indices\[i\] + indices\[j\] = indices\[k\].
    prod: Vec<(u32, u32, u32)>,
    /// α! for each stored multi-index.
    factorial: Vec<f64>,
}

impl IndexTable {
    fn build(num_vars: usize, order: usize) -> IndexTable {
        let mut indices: Vec<Box<[u8]>> = Vec::new();
        for deg in 0..=order {
            let mut block = Vec::new();
            compositions(deg as u8, num_vars, &mut Vec::new(), &mut block);
            indices.extend(block);
        }
        let pos: HashMap<Box<[u8]>, u32> = indices
            .iter()
            .enumerate()
            .map(|(i, ix)| (ix.clone(), i as u32))
            .collect();
        let mut prod = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            let da: usize = a.iter().map(|&x| x as usize).sum();
            for (j, b) in indices.iter().enumerate() {
                let db: usize = b.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Box<[u8]> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                let k = pos[&sum];
                prod.push((i as u32, j as u32, k));
            }
        }
        let factorial = indices
            .iter()
            .map(|ix| ix.iter().map(|&x| fact(x)).product())
            .collect();
        IndexTable {
            num_vars,
            order,
            indices,
            pos,
            prod,
            factorial,
        }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }
}

fn fact(k: u8) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

/// Enumerate all multi-indices of total degree `deg` over `vars` slots.
fn compositions(deg: u8, vars: usize, prefix: &mut Vec<u8>, out: &mut Vec<Box<[u8]>>) {
    if vars == 1 {
        prefix.push(deg);
        out.push(prefix.clone().into_boxed_slice());
        prefix.pop();
        return;
    }
    for first in 0..=deg {
        prefix.push(first);
        compositions(deg - first, vars - 1, prefix, out);
        prefix.pop();
    }
}

fn table(num_vars: usize, order: usize) -> Arc<IndexTable> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<IndexTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet table cache poisoned");
    guard
        .entry((num_vars, order))
        .or_insert_with(|| Arc::new(IndexTable::build(num_vars, order)))
        .clone()
}

/// Truncated Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    table: Arc<IndexTable>,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Constant jet (value only, all derivatives zero).
    pub fn constant(num_vars: usize, order: usize, value: f64) -> Jet {
        let table = table(num_vars, order);
        let mut coeffs = vec![0.0; table.len()];
        coeffs[0] = value;
        Jet { table, coeffs }
    }

    /// Constant jet with the shape of `like`.
    pub fn constant_like(like: &Jet, value: f64) -> Jet {
        Jet::constant(like.num_vars(), like.order(), value)
    }

    /// Build a jet from raw Taylor-normalized coefficients in table order.
    pub fn from_coeffs(num_vars: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        let table = table(num_vars, order);
        if coeffs.len() != table.len() {
            return Err(Error::Usage(format!(
                "expected {} coefficients for shape ({num_vars}, {order}), got {}",
                table.len(),
                coeffs.len()
            )));
        }
        Ok(Jet { table, coeffs })
    }

    pub fn num_vars(&self) -> usize {
        self.table.num_vars
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    /// Value of the underlying function at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Taylor-normalized coefficient for the multi-index `alpha`.
    pub fn coeff(&self, alpha: &[u8]) -> Result<f64> {
        Ok(self.coeffs[self.index_of(alpha)?])
    }

    /// Exact partial derivative `∂^α f` at the base point (α! · coeff).
    pub fn partial(&self, alpha: &[u8]) -> Result<f64> {
        let idx = self.index_of(alpha)?;
        Ok(self.table.factorial[idx] * self.coeffs[idx])
    }

    fn index_of(&self, alpha: &[u8]) -> Result<usize> {
        if alpha.len() != self.num_vars() {
            return Err(Error::Usage(format!(
                "multi-index has {} slots, jet has {} variables",
                alpha.len(),
                self.num_vars()
            )));
        }
        let deg: usize = alpha.iter().map(|&x| x as usize).sum();
        if deg > self.order() {
            return Err(Error::OrderExceeded {
                requested: deg,
                order: self.order(),
            });
        }
        Ok(self.table.pos[alpha] as usize)
    }

    /// First-order partials (∂_0 f, …, ∂_{m−1} f).
    pub fn gradient(&self) -> Result<Vec<f64>> {
        if self.order() < 1 {
            return Err(Error::OrderExceeded {
                requested: 1,
                order: 0,
            });
        }
        let mut e = vec![0u8; self.num_vars()];
        (0..self.num_vars())
            .map(|v| {
                e[v] = 1;
                let p = self.partial(&e);
                e[v] = 0;
                p
            })
            .collect()
    }

    /// The jet of `∂_v f`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        assert!(var < self.num_vars(), "derivative variable out of range");
        if self.order() == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                order: 0,
            });
        }
        let out_table = table(self.num_vars(), self.order() - 1);
        let mut coeffs = vec![0.0; out_table.len()];
        for (k, beta) in out_table.indices.iter().enumerate() {
            let mut src: Box<[u8]> = beta.clone();
            src[var] += 1;
            let i = self.table.pos[&src] as usize;
            coeffs[k] = (beta[var] as f64 + 1.0) * self.coeffs[i];
        }
        Ok(Jet {
            table: out_table,
            coeffs,
        })
    }

    /// Drop coefficients above `order` (graded storage makes this a prefix copy).
    pub fn truncated(&self, order: usize) -> Jet {
        assert!(order <= self.order(), "truncation cannot raise the order");
        if order == self.order() {
            return self.clone();
        }
        let out_table = table(self.num_vars(), order);
        let coeffs = self.coeffs[..out_table.len()].to_vec();
        Jet {
            table: out_table,
            coeffs,
        }
    }

    /// Evaluate the stored polynomial at a displacement from the base point.
    pub fn polynomial_eval(&self, dx: &[f64]) -> f64 {
        assert_eq!(dx.len(), self.num_vars(), "displacement length mismatch");
        self.table
            .indices
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(dx)
                    .map(|(&a, x)| x.powi(a as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Jet {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Jet {
            table: self.table.clone(),
            coeffs,
        }
    }

    fn plus_const(&self, v: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += v;
        out
    }

    fn assert_same_shape(&self, other: &Jet, op: &str) {
        assert!(
            self.num_vars() == other.num_vars() && self.order() == other.order(),
            "jet {op}: mixed shapes ({}, {}) vs ({}, {})",
            self.num_vars(),
            self.order(),
            other.num_vars(),
            other.order()
        );
    }

    /// Truncated composition f(a₀ + n) where n is the nilpotent part and
    /// `c[k] = f⁽ᵏ⁾(a₀)/k!`.
    fn compose_series(&self, c: &[f64]) -> Jet {
        debug_assert_eq!(c.len(), self.order() + 1);
        let mut nil = self.clone();
        nil.coeffs[0] = 0.0;
        let mut acc = Jet::constant_like(self, c[self.order()]);
        for k in (0..self.order()).rev() {
            acc = (&acc * &nil).plus_const(c[k]);
        }
        acc
    }

    fn singular(what: &str, value: f64) -> Error {
        Error::Singular {
            what: what.to_string(),
            value,
            expr: None,
            point: None,
        }
    }

    /// Multiplicative inverse; fails within `SINGULAR_TOL` of zero.
    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0.abs() <= SINGULAR_TOL {
            return Err(Jet::singular("division", a0));
        }
        let mut c = vec![0.0; self.order() + 1];
        let mut cur = 1.0 / a0;
        for ck in c.iter_mut() {
            *ck = cur;
            cur = -cur / a0;
        }
        Ok(self.compose_series(&c))
    }

    pub fn try_div(&self, rhs: &Jet) -> Result<Jet> {
        self.assert_same_shape(rhs, "div");
        Ok(self * &rhs.recip()?)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut c = vec![0.0; self.order() + 1];
        let mut kfac = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                kfac *= k as f64;
            }
            *ck = e / kfac;
        }
        self.compose_series(&c)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0 <= SINGULAR_TOL {
            return Err(Jet::singular("log", a0));
        }
        let mut c = vec![0.0; self.order() + 1];
        c[0] = a0.ln();
        // f⁽ᵏ⁾/k! = (−1)^{k−1} / (k a₀^k) for k ≥ 1
        let mut p = 1.0;
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            p /= a0;
            *ck = if k % 2 == 1 { p / k as f64 } else { -p / k as f64 };
        }
        Ok(self.compose_series(&c))
    }

    pub fn sin(&self) -> Jet {
        let (s, co) = self.value().sin_cos();
        let cycle = [s, co, -s / 2.0, -co / 6.0];
        self.compose_series(&cycle[..=self.order()])
    }

    pub fn cos(&self) -> Jet {
        let (s, co) = self.value().sin_cos();
        let cycle = [co, -s, -co / 2.0, s / 6.0];
        self.compose_series(&cycle[..=self.order()])
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0 <= SINGULAR_TOL {
            return Err(Jet::singular("sqrt", a0));
        }
        self.powf(0.5)
    }

    /// Real power with positive base (checked with `SINGULAR_TOL` margin).
    pub fn powf(&self, q: f64) -> Result<Jet> {
        let a0 = self.value();
        if a0 <= SINGULAR_TOL {
            return Err(Jet::singular("pow", a0));
        }
        let mut c = vec![0.0; self.order() + 1];
        c[0] = a0.powf(q);
        for k in 1..=self.order() {
            c[k] = c[k - 1] * (q - (k as f64 - 1.0)) / (k as f64 * a0);
        }
        Ok(self.compose_series(&c))
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// `recip` and therefore need a nonzero value part.
    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Jet::constant_like(self, 1.0);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("num_vars", &self.num_vars())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars() == other.num_vars()
            && self.order() == other.order()
            && self.coeffs == other.coeffs
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.assert_same_shape(rhs, "add");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            table: self.table.clone(),
            coeffs,
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.assert_same_shape(rhs, "sub");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            table: self.table.clone(),
            coeffs,
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.assert_same_shape(rhs, "mul");
        let mut coeffs = vec![0.0; self.table.len()];
        for &(i, j, k) in &self.table.prod {
            coeffs[k as usize] += self.coeffs[i as usize] * rhs.coeffs[j as usize];
        }
        Jet {
            table: self.table.clone(),
            coeffs,
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scaled(-1.0)
    }
}

/// Coordinate-function jets at a point: jet i has value `point[i]`, unit
/// first-order coefficient in slot i, and zeros elsewhere.
pub fn seed_point(point: &[f64], order: usize) -> Result<Vec<Jet>> {
    let m = point.len();
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!(
            "jet order must lie in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if m < 3 || m % 2 == 0 {
        return Err(Error::Config(format!(
            "chart dimension must be odd and at least 3, got {m}"
        )));
    }
    if point.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite point {point:?}")));
    }
    let mut out = Vec::with_capacity(m);
    for (i, &v) in point.iter().enumerate() {
        let mut jet = Jet::constant(m, order, v);
        let mut e = vec![0u8; m];
        e[i] = 1;
        let idx = jet.table.pos[e.as_slice()] as usize;
        jet.coeffs[idx] = 1.0;
        out.push(jet);
    }
    Ok(out)
}

/// Truncate both operands to their common order.
pub fn aligned(a: &Jet, b: &Jet) -> (Jet, Jet) {
    let k = a.order().min(b.order());
    (a.truncated(k), b.truncated(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seeds3(p: [f64; 3], order: usize) -> Vec<Jet> {
        seed_point(&p, order).unwrap()
    }

    #[test]
    fn seed_has_unit_slope_and_no_curvature() {
        let s = seeds3([2.0, 0.0, 0.0], 2);
        assert_eq!(s[0].value(), 2.0);
        assert_eq!(s[0].partial(&[1, 0, 0]).unwrap(), 1.0);
        assert_eq!(s[0].partial(&[2, 0, 0]).unwrap(), 0.0);
        assert_eq!(s[0].partial(&[1, 1, 0]).unwrap(), 0.0);
        assert_eq!(s[0].partial(&[0, 0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn seed_polynomial_at_zero_displacement_is_the_point() {
        let p = [0.3, -1.2, 4.0];
        let s = seeds3(p, 3);
        for i in 0..3 {
            assert_eq!(s[i].polynomial_eval(&[0.0, 0.0, 0.0]), p[i]);
        }
    }

    #[test]
    fn cross_partial_of_seed_vanishes() {
        let s = seeds3([1.0, 2.0, 3.0], 2);
        assert_eq!(s[0].partial(&[0, 1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn square_of_coordinate() {
        let s = seeds3([3.0, 0.0, 0.0], 2);
        let sq = &s[0] * &s[0];
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.partial(&[1, 0, 0]).unwrap(), 6.0);
        assert_eq!(sq.partial(&[2, 0, 0]).unwrap(), 2.0);
        // Taylor-normalized second coefficient carries the 1/2! factor.
        assert_eq!(sq.coeff(&[2, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn self_division_is_one() {
        let s = seeds3([5.0, 0.0, 0.0], 2);
        let q = s[0].try_div(&s[0]).unwrap();
        assert!((q.value() - 1.0).abs() < 1e-15);
        assert!(q.partial(&[1, 0, 0]).unwrap().abs() < 1e-15);
        assert!(q.partial(&[2, 0, 0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn division_near_zero_is_singular() {
        let a = Jet::constant(3, 2, 1.0);
        let b = Jet::constant(3, 2, 1e-13);
        match a.try_div(&b) {
            Err(Error::Singular { what, .. }) => assert_eq!(what, "division"),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn product_matches_finite_differences() {
        // d/dx and d²/dx² of sin(x)·exp(x) at 0.7 via central differences.
        let f = |x: f64| x.sin() * x.exp();
        let x0 = 0.7;
        let h = 1e-5;
        let fd1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let fd2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);

        let s = seeds3([x0, 0.0, 0.0], 2);
        let jet = &s[0].sin() * &s[0].exp();
        assert!((jet.value() - f(x0)).abs() < 1e-12);
        assert!((jet.partial(&[1, 0, 0]).unwrap() - fd1).abs() / fd1.abs() < 1e-6);
        assert!((jet.partial(&[2, 0, 0]).unwrap() - fd2).abs() / fd2.abs() < 1e-6);
    }

    #[test]
    fn exp_series_at_zero() {
        let s = seeds3([0.0, 0.0, 0.0], 2);
        let e = s[0].exp();
        assert_eq!(e.value(), 1.0);
        assert_eq!(e.coeff(&[1, 0, 0]).unwrap(), 1.0);
        assert_eq!(e.coeff(&[2, 0, 0]).unwrap(), 0.5);
    }

    #[test]
    fn pythagorean_identity_in_jets() {
        let s = seeds3([0.9, -0.4, 0.2], 3);
        let mix = &(&s[0] * &s[1]) + &s[2];
        let one = &(&mix.sin() * &mix.sin()) + &(&mix.cos() * &mix.cos());
        assert!((one.value() - 1.0).abs() < 1e-12);
        let rest = &one - &Jet::constant_like(&one, 1.0);
        assert!(rest.max_abs() < 1e-12);
    }

    #[test]
    fn extract_partial_examples() {
        let s = seeds3([3.0, 0.0, 0.0], 2);
        let sq = &s[0] * &s[0];
        assert_eq!(sq.partial(&[2, 0, 0]).unwrap(), 2.0);

        let s = seeds3([1.0, 2.0, 0.0], 2);
        let f = &s[0].exp() * &s[1];
        let mixed = f.partial(&[1, 1, 0]).unwrap();
        assert!((mixed - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn order_exceeded_is_an_error_not_zero() {
        let s = seeds3([1.0, 2.0, 3.0], 2);
        match s[0].partial(&[2, 1, 0]) {
            Err(Error::OrderExceeded { requested, order }) => {
                assert_eq!((requested, order), (3, 2));
            }
            other => panic!("expected order-exceeded, got {other:?}"),
        }
    }

    #[test]
    fn seeding_rejects_bad_shapes() {
        assert!(matches!(
            seed_point(&[1.0, 2.0, 3.0], 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            seed_point(&[1.0, 2.0, 3.0], 4),
            Err(Error::Config(_))
        ));
        assert!(matches!(seed_point(&[1.0, 2.0], 2), Err(Error::Config(_))));
        assert!(matches!(
            seed_point(&[1.0, 2.0, 3.0, 4.0], 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn log_domain_check() {
        let s = seeds3([0.0, 1.0, 1.0], 2);
        match s[0].ln() {
            Err(Error::Singular { what, .. }) => assert_eq!(what, "log"),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let s = seeds3([2.0, 5.0, 0.0], 3);
        let f = &(&s[0] * &s[0]) * &s[1]; // x²y
        let fx = f.derivative(0).unwrap(); // 2xy
        assert_eq!(fx.order(), 2);
        assert_eq!(fx.value(), 20.0);
        assert_eq!(fx.partial(&[1, 0, 0]).unwrap(), 10.0);
        assert_eq!(fx.partial(&[0, 1, 0]).unwrap(), 4.0);
    }

    fn arb_jet(order: usize) -> impl Strategy<Value = Jet> {
        let n = table(3, order).len();
        proptest::collection::vec(-2.0..2.0f64, n)
            .prop_map(move |c| Jet::from_coeffs(3, order, c).unwrap())
    }

    proptest! {
        #[test]
        fn log_exp_roundtrip(a in arb_jet(3)) {
            let back = a.exp().ln().unwrap();
            let diff = &back - &a;
            prop_assert!(diff.max_abs() < 1e-12 * (1.0 + a.max_abs()));
        }

        #[test]
        fn distributivity(a in arb_jet(2), b in arb_jet(2), c in arb_jet(2)) {
            let lhs = &(&a + &b) * &c;
            let rhs = &(&a * &c) + &(&b * &c);
            let scale = 1.0_f64.max(lhs.max_abs()).max(rhs.max_abs());
            prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * scale);
        }

        #[test]
        fn truncation_consistency(a in arb_jet(3), b in arb_jet(3)) {
            // Degree ≤ 2 coefficients of a product depend only on degree ≤ 2 inputs.
            let full = (&a * &b).truncated(2);
            let cut = &a.truncated(2) * &b.truncated(2);
            prop_assert!((&full - &cut).max_abs() < 1e-14 * (1.0 + full.max_abs()));

            let full = a.exp().truncated(2);
            let cut = a.truncated(2).exp();
            prop_assert!((&full - &cut).max_abs() < 1e-14 * (1.0 + full.max_abs()));
        }

        #[test]
        fn jet_derivatives_match_finite_differences(
            ax in prop_oneof![10.0..12.0f64, -12.0..-10.0f64],
            by in prop_oneof![10.0..12.0f64, -12.0..-10.0f64],
            cz in prop_oneof![10.0..12.0f64, -12.0..-10.0f64],
            x in -0.1..0.1f64, y in -0.1..0.1f64, z in -0.1..0.1f64,
        ) {
            // f = sin(ax)·sin(by)·exp(cz): every pure second partial is f
            // times a factor of magnitude ≥ 100, which keeps the
            // central-difference oracle (step 1e-5) well above its own
            // roundoff at the 1e-6 relative tolerance. The product form has
            // no additive cancellation and all arguments stay within ±1.2,
            // clear of trig argument reduction.
            let f = |p: &[f64]| (ax * p[0]).sin() * (by * p[1]).sin() * (cz * p[2]).exp();
            let jet_of = |p: &[f64]| {
                let s = seed_point(p, 2).unwrap();
                &(&s[0].scaled(ax).sin() * &s[1].scaled(by).sin()) * &s[2].scaled(cz).exp()
            };
            let p = [x, y, z];
            let jet = jet_of(&p);
            let h = 1e-5;
            for v in 0..3 {
                let mut hi = p; hi[v] += h;
                let mut lo = p; lo[v] -= h;
                let fd1 = (f(&hi) - f(&lo)) / (2.0 * h);
                let mut e = [0u8; 3]; e[v] = 1;
                let j1 = jet.partial(&e).unwrap();
                prop_assert!((j1 - fd1).abs() <= 1e-6 * (1.0 + fd1.abs()));

                let fd2 = (f(&hi) - 2.0 * f(&p) + f(&lo)) / (h * h);
                let mut e2 = [0u8; 3]; e2[v] = 2;
                let j2 = jet.partial(&e2).unwrap();
                prop_assert!((j2 - fd2).abs() <= 1e-6 * (1.0 + fd2.abs()));
            }
        }
    }
}
