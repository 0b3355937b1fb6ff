//! Coordinate-chart tensor calculus.
//!
//! Fields are evaluated once per point into jets; every derived operation
//! (directional derivatives, Lie brackets, exterior derivatives, pairings,
//! frame solves) then works purely on jets. Because linear solves are also
//! carried out in jet arithmetic, solved coefficient fields keep their own
//! derivatives and can be differentiated or bracketed again downstream.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse, ExprAst};
use crate::jet::{aligned, seed_point, Jet, SINGULAR_TOL};

/// Condition-estimate ceiling for frame solves.
pub const COND_MAX: f64 = 1e8;

/// A single coordinate chart: an open box in ℝ^(2n+1).
#[derive(Debug, Clone)]
pub struct Chart {
    names: Vec<String>,
    bounds: Vec<[f64; 2]>,
}

impl Chart {
    pub fn new(names: Vec<String>, bounds: Vec<[f64; 2]>) -> Result<Arc<Chart>> {
        let m = names.len();
        if m < 3 || m % 2 == 0 {
            return Err(Error::Config(format!(
                "chart dimension must be odd and at least 3, got {m}"
            )));
        }
        if bounds.len() != m {
            return Err(Error::Config(format!(
                "sample box has {} intervals for {m} coordinates",
                bounds.len()
            )));
        }
        for (name, b) in names.iter().zip(&bounds) {
            if name.is_empty() || !name.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(Error::Config(format!("invalid coordinate name `{name}`")));
            }
            if !(b[0].is_finite() && b[1].is_finite() && b[0] < b[1]) {
                return Err(Error::Config(format!(
                    "degenerate sample interval {b:?} for coordinate `{name}`"
                )));
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != m {
            return Err(Error::Config("duplicate coordinate names".into()));
        }
        Ok(Arc::new(Chart { names, bounds }))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Rank n of the Legendrean subbundles, with dim = 2n + 1.
    pub fn rank(&self) -> usize {
        (self.dim() - 1) / 2
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.bounds)
                .all(|(x, b)| *x >= b[0] && *x <= b[1])
    }

    pub fn seeds(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        if p.len() != self.dim() {
            return Err(Error::Usage(format!(
                "point has {} coordinates, chart has {}",
                p.len(),
                self.dim()
            )));
        }
        seed_point(p, order)
    }
}

type FieldFn = Arc<dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync>;

#[derive(Clone)]
enum Body {
    Expr(ExprAst),
    Fn(FieldFn),
}

/// Scalar field on a chart, either a parsed expression or a composed closure.
#[derive(Clone)]
pub struct ScalarField {
    num_vars: usize,
    body: Body,
}

impl ScalarField {
    pub fn from_expr(text: &str, chart: &Chart) -> Result<ScalarField> {
        let ast = parse(text, chart.names())?;
        Ok(ScalarField {
            num_vars: chart.dim(),
            body: Body::Expr(ast),
        })
    }

    pub fn from_ast(ast: ExprAst, num_vars: usize) -> ScalarField {
        ScalarField {
            num_vars,
            body: Body::Expr(ast),
        }
    }

    pub fn constant(num_vars: usize, v: f64) -> ScalarField {
        ScalarField {
            num_vars,
            body: Body::Expr(ExprAst::Const(v)),
        }
    }

    pub fn closure<F>(num_vars: usize, f: F) -> ScalarField
    where
        F: Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static,
    {
        ScalarField {
            num_vars,
            body: Body::Fn(Arc::new(f)),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Source text when the field is expression-backed.
    pub fn text(&self) -> Option<String> {
        match &self.body {
            Body::Expr(ast) => Some(ast.to_text()),
            Body::Fn(_) => None,
        }
    }

    pub fn eval(&self, seeds: &[Jet]) -> Result<Jet> {
        if seeds.len() != self.num_vars {
            return Err(Error::Usage(format!(
                "field over {} variables evaluated with {} seeds",
                self.num_vars,
                seeds.len()
            )));
        }
        let jet = match &self.body {
            Body::Expr(ast) => ast.eval_jet(seeds)?,
            Body::Fn(f) => f(seeds)?,
        };
        if !jet.is_finite() {
            return Err(Error::Singular {
                what: "field evaluation".into(),
                value: jet.value(),
                expr: self.text(),
                point: None,
            });
        }
        Ok(jet)
    }

    /// Plain value at a point (order-1 seeds, value slot).
    pub fn eval_value(&self, p: &[f64]) -> Result<f64> {
        Ok(self.eval(&seed_point(p, 1)?)?.value())
    }

    /// Pointwise sum of two scalar fields.
    pub fn sum(a: &ScalarField, b: &ScalarField) -> ScalarField {
        let (a, b) = (a.clone(), b.clone());
        ScalarField::closure(a.num_vars, move |seeds| Ok(&a.eval(seeds)? + &b.eval(seeds)?))
    }
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.body {
            Body::Expr(ast) => write!(f, "ScalarField({})", ast.to_text()),
            Body::Fn(_) => write!(f, "ScalarField(<closure>)"),
        }
    }
}

/// Vector field given by m component scalar fields over the coordinate frame ∂_i.
#[derive(Debug, Clone)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<VectorField> {
        let m = comps.first().map(|c| c.num_vars()).unwrap_or(0);
        if comps.len() != m {
            return Err(Error::Config(format!(
                "vector field has {} components on a {m}-dimensional chart",
                comps.len()
            )));
        }
        Ok(VectorField { comps })
    }

    pub fn from_exprs(texts: &[impl AsRef<str>], chart: &Chart) -> Result<VectorField> {
        let comps = texts
            .iter()
            .map(|t| ScalarField::from_expr(t.as_ref(), chart))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(comps)
    }

    /// The coordinate frame field ∂_i.
    pub fn coordinate(m: usize, i: usize) -> VectorField {
        let comps = (0..m)
            .map(|j| ScalarField::constant(m, if i == j { 1.0 } else { 0.0 }))
            .collect();
        VectorField { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn eval(&self, seeds: &[Jet]) -> Result<TangentJet> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.eval(seeds))
            .collect::<Result<Vec<_>>>()?;
        Ok(TangentJet::new(comps))
    }

    /// The field f·X with a scalar coefficient field.
    pub fn scaled_by(&self, f: &ScalarField) -> VectorField {
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let (c, f) = (c.clone(), f.clone());
                ScalarField::closure(c.num_vars(), move |seeds| {
                    Ok(&c.eval(seeds)? * &f.eval(seeds)?)
                })
            })
            .collect();
        VectorField { comps }
    }
}

/// One-form given by m component scalar fields over dx^i.
#[derive(Debug, Clone)]
pub struct OneForm {
    comps: Vec<ScalarField>,
}

impl OneForm {
    pub fn new(comps: Vec<ScalarField>) -> Result<OneForm> {
        let m = comps.first().map(|c| c.num_vars()).unwrap_or(0);
        if comps.len() != m {
            return Err(Error::Config(format!(
                "one-form has {} components on a {m}-dimensional chart",
                comps.len()
            )));
        }
        Ok(OneForm { comps })
    }

    pub fn from_exprs(texts: &[impl AsRef<str>], chart: &Chart) -> Result<OneForm> {
        let comps = texts
            .iter()
            .map(|t| ScalarField::from_expr(t.as_ref(), chart))
            .collect::<Result<Vec<_>>>()?;
        OneForm::new(comps)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn eval(&self, seeds: &[Jet]) -> Result<Vec<Jet>> {
        self.comps.iter().map(|c| c.eval(seeds)).collect()
    }
}

/// Pointwise value of a vector field: m jet components sharing one shape.
#[derive(Debug, Clone)]
pub struct TangentJet {
    comps: Vec<Jet>,
}

impl TangentJet {
    pub fn new(comps: Vec<Jet>) -> TangentJet {
        assert!(!comps.is_empty(), "empty tangent jet");
        let (m, k) = (comps[0].num_vars(), comps[0].order());
        assert!(
            comps.iter().all(|c| c.num_vars() == m && c.order() == k),
            "tangent jet components must share one shape"
        );
        TangentJet { comps }
    }

    pub fn zero(num_vars: usize, order: usize) -> TangentJet {
        TangentJet::new(vec![Jet::constant(num_vars, order, 0.0); num_vars])
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn order(&self) -> usize {
        self.comps[0].order()
    }

    pub fn comp(&self, i: usize) -> &Jet {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Jet] {
        &self.comps
    }

    pub fn value_vec(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.value()).collect()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.value().abs()))
    }

    pub fn truncated(&self, order: usize) -> TangentJet {
        TangentJet::new(self.comps.iter().map(|c| c.truncated(order)).collect())
    }

    pub fn add(&self, rhs: &TangentJet) -> TangentJet {
        let k = self.order().min(rhs.order());
        let comps = self
            .comps
            .iter()
            .zip(&rhs.comps)
            .map(|(a, b)| &a.truncated(k) + &b.truncated(k))
            .collect();
        TangentJet::new(comps)
    }

    pub fn sub(&self, rhs: &TangentJet) -> TangentJet {
        let k = self.order().min(rhs.order());
        let comps = self
            .comps
            .iter()
            .zip(&rhs.comps)
            .map(|(a, b)| &a.truncated(k) - &b.truncated(k))
            .collect();
        TangentJet::new(comps)
    }

    pub fn neg(&self) -> TangentJet {
        TangentJet::new(self.comps.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, f: &Jet) -> TangentJet {
        let k = self.order().min(f.order());
        let f = f.truncated(k);
        TangentJet::new(self.comps.iter().map(|c| &c.truncated(k) * &f).collect())
    }

    pub fn scale_value(&self, s: f64) -> TangentJet {
        TangentJet::new(self.comps.iter().map(|c| c.scaled(s)).collect())
    }

    /// Σ coeffs\[a\] · basis\[a\], truncated to the common order.
    pub fn lin_comb(coeffs: &[Jet], basis: &[TangentJet]) -> TangentJet {
        assert_eq!(coeffs.len(), basis.len(), "combination length mismatch");
        assert!(!basis.is_empty(), "empty combination");
        let k = coeffs
            .iter()
            .map(|c| c.order())
            .chain(basis.iter().map(|b| b.order()))
            .min()
            .expect("nonempty");
        let mut acc = TangentJet::zero(basis[0].dim(), k).truncated(k);
        for (c, b) in coeffs.iter().zip(basis) {
            acc = acc.add(&b.truncated(k).scale(&c.truncated(k)));
        }
        acc
    }
}

/// Directional derivative Σ X^i ∂_i f, one jet order lower than f.
pub fn dir_deriv(f: &Jet, x: &TangentJet) -> Result<Jet> {
    if f.order() == 0 {
        return Err(Error::OrderExceeded {
            requested: 1,
            order: 0,
        });
    }
    let k = (f.order() - 1).min(x.order());
    let mut acc = Jet::constant(f.num_vars(), k, 0.0);
    for i in 0..f.num_vars() {
        let df = f.derivative(i)?.truncated(k);
        acc = &acc + &(&x.comp(i).truncated(k) * &df);
    }
    Ok(acc)
}

/// Lie bracket [X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i, one jet order lower.
pub fn lie_bracket(x: &TangentJet, y: &TangentJet) -> Result<TangentJet> {
    assert_eq!(x.dim(), y.dim(), "bracket dimension mismatch");
    let comps = (0..x.dim())
        .map(|i| {
            let a = dir_deriv(y.comp(i), x)?;
            let b = dir_deriv(x.comp(i), y)?;
            let (a, b) = aligned(&a, &b);
            Ok(&a - &b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentJet::new(comps))
}

/// Pairing ω(X) = Σ ω_i X^i of a one-form's jets with a tangent jet.
pub fn pair_form(omega: &[Jet], x: &TangentJet) -> Jet {
    assert_eq!(omega.len(), x.dim(), "pairing dimension mismatch");
    let k = omega
        .iter()
        .map(|c| c.order())
        .min()
        .expect("nonempty form")
        .min(x.order());
    let mut acc = Jet::constant(omega[0].num_vars(), k, 0.0);
    for (w, xi) in omega.iter().zip(x.components()) {
        acc = &acc + &(&w.truncated(k) * &xi.truncated(k));
    }
    acc
}

/// Evaluated 2-form: an antisymmetric m×m matrix of jets, with
/// `ω(X, Y) = Σ_{ij} entries[i][j] X^i Y^j`.
#[derive(Debug, Clone)]
pub struct TwoFormJets {
    dim: usize,
    entries: Vec<Jet>,
}

impl TwoFormJets {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.dim + j]
    }

    pub fn order(&self) -> usize {
        self.entries[0].order()
    }

    pub fn apply(&self, x: &TangentJet, y: &TangentJet) -> Jet {
        assert!(
            x.dim() == self.dim && y.dim() == self.dim,
            "2-form applied to vectors of wrong dimension"
        );
        let k = self.order().min(x.order()).min(y.order());
        let mut acc = Jet::constant(self.entries[0].num_vars(), k, 0.0);
        for i in 0..self.dim {
            let xi = x.comp(i).truncated(k);
            for j in 0..self.dim {
                let e = self.entry(i, j);
                if e.max_abs() == 0.0 {
                    continue;
                }
                let term = &(&e.truncated(k) * &xi) * &y.comp(j).truncated(k);
                acc = &acc + &term;
            }
        }
        acc
    }

    /// Interior product ι_X ω as a one-form's jets: (ι_X ω)_j = Σ_i entries[i][j] X^i.
    pub fn contract_left(&self, x: &TangentJet) -> Vec<Jet> {
        assert_eq!(x.dim(), self.dim, "contraction dimension mismatch");
        let k = self.order().min(x.order());
        (0..self.dim)
            .map(|j| {
                let mut acc = Jet::constant(self.entries[0].num_vars(), k, 0.0);
                for i in 0..self.dim {
                    acc = &acc + &(&self.entry(i, j).truncated(k) * &x.comp(i).truncated(k));
                }
                acc
            })
            .collect()
    }
}

/// Exterior derivative of an evaluated one-form: (dω)_{ij} = ∂_i ω_j − ∂_j ω_i.
pub fn exterior_derivative(omega: &[Jet]) -> Result<TwoFormJets> {
    let m = omega.len();
    assert!(m > 0, "empty one-form");
    let mut entries = Vec::with_capacity(m * m);
    // Precompute all partials ∂_i ω_j once.
    let mut partials = Vec::with_capacity(m);
    for w in omega {
        let row = (0..m)
            .map(|i| w.derivative(i))
            .collect::<Result<Vec<_>>>()?;
        partials.push(row); // partials[j][i] = ∂_i ω_j
    }
    for i in 0..m {
        for j in 0..m {
            entries.push(&partials[j][i] - &partials[i][j]);
        }
    }
    Ok(TwoFormJets { dim: m, entries })
}

/// Solution of a linear system solved entirely in jet arithmetic.
pub struct JetSolve {
    pub x: Vec<Jet>,
    /// max |pivot| / min |pivot| over the elimination, a cheap conditioning flag.
    pub cond_estimate: f64,
}

/// Gaussian elimination with partial pivoting over jets.
///
/// All entries are truncated to the common order up front; the solution's
/// coefficients are then the jets of the pointwise-solution field, so solved
/// frames can be differentiated again.
pub fn solve_linear_jets(a: &[Vec<Jet>], b: &[Jet]) -> Result<JetSolve> {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|row| row.len() == n), "matrix must be square");
    assert_eq!(b.len(), n, "rhs length mismatch");
    let k = a
        .iter()
        .flatten()
        .chain(b.iter())
        .map(|j| j.order())
        .min()
        .expect("nonempty system");
    let mut m: Vec<Vec<Jet>> = a
        .iter()
        .map(|row| row.iter().map(|e| e.truncated(k)).collect())
        .collect();
    let mut rhs: Vec<Jet> = b.iter().map(|e| e.truncated(k)).collect();

    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, m[r][col].value().abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty column");
        if piv_abs <= SINGULAR_TOL {
            return Err(Error::DegenerateFrame {
                cond: if min_piv.is_finite() && piv_abs > 0.0 {
                    max_piv / piv_abs
                } else {
                    f64::INFINITY
                },
                point: None,
            });
        }
        max_piv = max_piv.max(piv_abs);
        min_piv = min_piv.min(piv_abs);
        m.swap(col, piv_row);
        rhs.swap(col, piv_row);
        for r in col + 1..n {
            if m[r][col].max_abs() == 0.0 {
                continue;
            }
            let factor = m[r][col].try_div(&m[col][col])?;
            for c in col..n {
                let sub = &m[col][c] * &factor;
                m[r][c] = &m[r][c] - &sub;
            }
            let sub = &rhs[col] * &factor;
            rhs[r] = &rhs[r] - &sub;
        }
    }
    let cond_estimate = max_piv / min_piv;
    if cond_estimate > COND_MAX {
        return Err(Error::DegenerateFrame {
            cond: cond_estimate,
            point: None,
        });
    }
    let mut x = vec![Jet::constant(rhs[0].num_vars(), k, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in row + 1..n {
            acc = &acc - &(&m[row][c] * &x[c]);
        }
        x[row] = acc.try_div(&m[row][row])?;
    }
    Ok(JetSolve { x, cond_estimate })
}

/// Value-level residual |A·x − b|∞ of a jet solve.
pub fn solve_residual(a: &[Vec<Jet>], x: &[Jet], b: &[Jet]) -> f64 {
    let mut worst: f64 = 0.0;
    for (row, bi) in a.iter().zip(b) {
        let mut acc = 0.0;
        for (e, xi) in row.iter().zip(x) {
            acc += e.value() * xi.value();
        }
        worst = worst.max((acc - bi.value()).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::seed_point;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn chart3() -> Arc<Chart> {
        Chart::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![[-1.0, 1.0]; 3],
        )
        .unwrap()
    }

    fn chart5() -> Arc<Chart> {
        Chart::new(
            vec!["x1".into(), "y1".into(), "x2".into(), "y2".into(), "z".into()],
            vec![[-1.0, 1.0]; 5],
        )
        .unwrap()
    }

    #[test]
    fn chart_shape_is_validated() {
        assert!(Chart::new(vec!["x".into(), "y".into()], vec![[-1.0, 1.0]; 2]).is_err());
        assert!(Chart::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![[-1.0, 1.0], [1.0, 1.0], [-1.0, 1.0]],
        )
        .is_err());
        assert!(Chart::new(
            vec!["x".into(), "x".into(), "z".into()],
            vec![[-1.0, 1.0]; 3],
        )
        .is_err());
    }

    #[test]
    fn directional_derivative_examples() {
        let ch = chart3();
        // X = ∂_x + y ∂_z
        let x = VectorField::from_exprs(&["1", "0", "y"], &ch).unwrap();
        let seeds = ch.seeds(&[0.0, 2.0, 0.0], 2).unwrap();
        let xj = x.eval(&seeds).unwrap();

        let f = ScalarField::from_expr("z", &ch).unwrap().eval(&seeds).unwrap();
        assert_eq!(dir_deriv(&f, &xj).unwrap().value(), 2.0);

        let c = ScalarField::constant(3, 7.5).eval(&seeds).unwrap();
        assert_eq!(dir_deriv(&c, &xj).unwrap().value(), 0.0);

        let seeds = ch.seeds(&[1.0, 0.3, 0.0], 2).unwrap();
        let xj = x.eval(&seeds).unwrap();
        let f = ScalarField::from_expr("x^2", &ch).unwrap().eval(&seeds).unwrap();
        assert_eq!(dir_deriv(&f, &xj).unwrap().value(), 2.0);
    }

    #[test]
    fn bracket_of_darboux_frames() {
        let ch = chart3();
        let x = VectorField::from_exprs(&["1", "0", "y"], &ch).unwrap();
        let y = VectorField::from_exprs(&["0", "1", "0"], &ch).unwrap();
        let seeds = ch.seeds(&[0.4, -0.7, 0.1], 2).unwrap();
        let br = lie_bracket(&x.eval(&seeds).unwrap(), &y.eval(&seeds).unwrap()).unwrap();
        assert_eq!(br.value_vec(), vec![0.0, 0.0, -1.0]);
    }

    fn random_poly_field(rng: &mut StdRng, ch: &Chart) -> VectorField {
        // Components are random quadratics in the first two coordinates.
        let comps = (0..ch.dim())
            .map(|_| {
                let (a, b, c, d) = (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let n0 = &ch.names()[0];
                let n1 = &ch.names()[1];
                ScalarField::from_expr(
                    &format!("{a:?} + {b:?}*{n0} + {c:?}*{n1} + {d:?}*{n0}*{n1}"),
                    ch,
                )
                .unwrap()
            })
            .collect();
        VectorField::new(comps).unwrap()
    }

    #[test]
    fn bracket_is_alternating_and_leibniz() {
        let ch = chart3();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let p = [
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
            ];
            let seeds = ch.seeds(&p, 2).unwrap();
            let x = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let y = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let f = ScalarField::from_expr("x*y - 0.3*z", &ch)
                .unwrap()
                .eval(&seeds)
                .unwrap();

            let xx = lie_bracket(&x, &x).unwrap();
            assert!(xx.max_abs_value() < 1e-12);

            // [fX, Y] = f[X,Y] − (Y·f)X
            let fx = x.scale(&f);
            let lhs = lie_bracket(&fx, &y).unwrap();
            let yf = dir_deriv(&f, &y).unwrap();
            let rhs = lie_bracket(&x, &y).unwrap().scale(&f).sub(&x.scale(&yf));
            assert!(lhs.sub(&rhs).max_abs_value() < 1e-10);
        }
    }

    #[test]
    fn jacobi_identity_at_random_points() {
        let ch = chart3();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let p = [
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
            ];
            let seeds = ch.seeds(&p, 3).unwrap();
            let x = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let y = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let z = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let t1 = lie_bracket(&lie_bracket(&x, &y).unwrap(), &z.truncated(2)).unwrap();
            let t2 = lie_bracket(&lie_bracket(&y, &z).unwrap(), &x.truncated(2)).unwrap();
            let t3 = lie_bracket(&lie_bracket(&z, &x).unwrap(), &y.truncated(2)).unwrap();
            let total = t1.add(&t2).add(&t3);
            assert!(total.max_abs_value() < 1e-9, "jacobi residual {}", total.max_abs_value());
        }
    }

    #[test]
    fn exterior_derivative_of_darboux_form() {
        let ch = chart3();
        let theta = OneForm::from_exprs(&["-y", "0", "1"], &ch).unwrap();
        let seeds = ch.seeds(&[0.3, 0.5, -0.2], 2).unwrap();
        let d = exterior_derivative(&theta.eval(&seeds).unwrap()).unwrap();
        // dθ = dx∧dy
        assert_eq!(d.entry(0, 1).value(), 1.0);
        assert_eq!(d.entry(1, 0).value(), -1.0);
        for (i, j) in [(0, 2), (1, 2), (2, 0), (2, 1), (0, 0), (1, 1), (2, 2)] {
            assert_eq!(d.entry(i, j).value(), 0.0);
        }
    }

    #[test]
    fn exterior_derivative_of_exact_form_vanishes() {
        let ch = chart3();
        // ω = df for f = xyz
        let omega = OneForm::from_exprs(&["y*z", "x*z", "x*y"], &ch).unwrap();
        let seeds = ch.seeds(&[0.7, -0.4, 0.9], 2).unwrap();
        let d = exterior_derivative(&omega.eval(&seeds).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(d.entry(i, j).value().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exterior_derivative_on_five_dims() {
        let ch = chart5();
        let theta = OneForm::from_exprs(&["-y1", "0", "-y2", "0", "1"], &ch).unwrap();
        let seeds = ch.seeds(&[0.1, 0.2, 0.3, 0.4, 0.5], 2).unwrap();
        let d = exterior_derivative(&theta.eval(&seeds).unwrap()).unwrap();
        // dθ = dx1∧dy1 + dx2∧dy2
        assert_eq!(d.entry(0, 1).value(), 1.0);
        assert_eq!(d.entry(2, 3).value(), 1.0);
        assert_eq!(d.entry(0, 3).value(), 0.0);
        assert_eq!(d.entry(2, 1).value(), 0.0);
        assert_eq!(d.entry(4, 0).value(), 0.0);
    }

    #[test]
    fn contraction_examples() {
        let ch = chart3();
        let theta = OneForm::from_exprs(&["-y", "0", "1"], &ch).unwrap();
        let seeds = ch.seeds(&[0.3, 0.8, -0.1], 2).unwrap();
        let tj = theta.eval(&seeds).unwrap();
        let dz = VectorField::coordinate(3, 2).eval(&seeds).unwrap();
        assert_eq!(pair_form(&tj, &dz).value(), 1.0);

        let d = exterior_derivative(&tj).unwrap();
        // ∂_z lies in the kernel of dθ.
        let contracted = d.contract_left(&dz);
        assert!(contracted.iter().all(|c| c.value().abs() < 1e-14));

        let f1 = VectorField::from_exprs(&["1", "0", "y"], &ch)
            .unwrap()
            .eval(&seeds)
            .unwrap();
        let e1 = VectorField::coordinate(3, 1).eval(&seeds).unwrap();
        assert_eq!(d.apply(&f1, &e1).value(), 1.0);
    }

    #[test]
    fn cartan_formula() {
        let ch = chart3();
        let omega = OneForm::from_exprs(&["x*y", "cos(z)", "y^2"], &ch).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let p = [
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
            ];
            let seeds = ch.seeds(&p, 2).unwrap();
            let wj = omega.eval(&seeds).unwrap();
            let x = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let y = random_poly_field(&mut rng, &ch).eval(&seeds).unwrap();
            let lhs = exterior_derivative(&wj).unwrap().apply(&x, &y).value();
            let x_wy = dir_deriv(&pair_form(&wj, &y), &x).unwrap().value();
            let y_wx = dir_deriv(&pair_form(&wj, &x), &y).unwrap().value();
            let w_br = pair_form(&wj, &lie_bracket(&x, &y).unwrap()).value();
            assert!((lhs - (x_wy - y_wx - w_br)).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let seeds = seed_point(&[0.2, 0.4, 0.6], 2).unwrap();
        let one = Jet::constant(3, 2, 1.0);
        let zero = Jet::constant(3, 2, 0.0);
        let a = vec![
            vec![one.clone(), zero.clone()],
            vec![zero.clone(), one.clone()],
        ];
        let b = vec![seeds[0].clone(), &seeds[1] * &seeds[2]];
        let sol = solve_linear_jets(&a, &b).unwrap();
        assert_eq!(sol.x[0], b[0].truncated(2));
        assert_eq!(sol.x[1], b[1].truncated(2));
    }

    #[test]
    fn two_by_two_against_closed_form() {
        // Oracle: explicit inverse of [[a, b], [c, d]] applied in jet arithmetic.
        let seeds = seed_point(&[0.3, -0.2, 0.5], 2).unwrap();
        let (x, y, z) = (&seeds[0], &seeds[1], &seeds[2]);
        let a11 = &Jet::constant(3, 2, 2.0) + x;
        let a12 = y.clone();
        let a21 = z.clone();
        let a22 = Jet::constant(3, 2, 3.0);
        let b1 = x.sin();
        let b2 = &x.clone() * y;

        let det = &(&a11 * &a22) - &(&a12 * &a21);
        let ex1 = (&(&a22 * &b1) - &(&a12 * &b2)).try_div(&det).unwrap();
        let ex2 = (&(&a11 * &b2) - &(&a21 * &b1)).try_div(&det).unwrap();

        let sol = solve_linear_jets(
            &[vec![a11, a12], vec![a21, a22]],
            &[b1, b2],
        )
        .unwrap();
        assert!((&sol.x[0] - &ex1).max_abs() < 1e-12);
        assert!((&sol.x[1] - &ex2).max_abs() < 1e-12);
    }

    #[test]
    fn zero_pivot_is_degenerate() {
        let zero = Jet::constant(3, 1, 0.0);
        let one = Jet::constant(3, 1, 1.0);
        let a = vec![
            vec![zero.clone(), one.clone()],
            vec![zero.clone(), one.clone()],
        ];
        let b = vec![one.clone(), one.clone()];
        assert!(matches!(
            solve_linear_jets(&a, &b),
            Err(Error::DegenerateFrame { .. })
        ));
    }

    #[test]
    fn solved_coefficients_carry_correct_derivatives() {
        // Solve A(p) x = b(p) with jets, then compare ∂x against finite
        // differences of pointwise solves at displaced points.
        let ch = chart3();
        let entries = [
            ["2 + x", "y", "0"],
            ["y", "3 + sin(z)", "x"],
            ["0", "x", "2 - y"],
        ];
        let rhs_exprs = ["1 + x*y", "z", "cos(x)"];
        let solve_at = |p: &[f64], order: usize| {
            let seeds = ch.seeds(p, order).unwrap();
            let a: Vec<Vec<Jet>> = entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|t| ScalarField::from_expr(t, &ch).unwrap().eval(&seeds).unwrap())
                        .collect()
                })
                .collect();
            let b: Vec<Jet> = rhs_exprs
                .iter()
                .map(|t| ScalarField::from_expr(t, &ch).unwrap().eval(&seeds).unwrap())
                .collect();
            solve_linear_jets(&a, &b).unwrap().x
        };

        let p = [0.3, -0.4, 0.2];
        let jet_sol = solve_at(&p, 2);
        let h = 1e-5;
        for v in 0..3 {
            let mut hi = p;
            hi[v] += h;
            let mut lo = p;
            lo[v] -= h;
            let shi = solve_at(&hi, 1);
            let slo = solve_at(&lo, 1);
            for i in 0..3 {
                let fd = (shi[i].value() - slo[i].value()) / (2.0 * h);
                let mut e = [0u8; 3];
                e[v] = 1;
                let jd = jet_sol[i].partial(&e).unwrap();
                assert!(
                    (jd - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                    "∂_{v} x_{i}: jet {jd} vs fd {fd}"
                );
            }
        }
    }
}
