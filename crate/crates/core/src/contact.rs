//! Contact structures, Reeb fields, Legendrean splittings, and the
//! θ-dependent scaffolding: pointwise decompositions, the Levi bracket, the
//! rescaling field Υ, and the splitting isomorphism TM/F ≅ Q ⊕ E.
//!
//! Sections of the quotient bundles are represented concretely: a Q-section
//! is stored as the scalar θ(ρ) relative to the active contact form (the
//! Reeb field trivializes Q), and a section of TM/F in the θ-splitting is a
//! [`SplitTractor`] holding that scalar plus E-frame coefficients. Frames are
//! user-supplied data; only r, Υ, and the splitting move under rescaling.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{
    dir_deriv, exterior_derivative, lie_bracket, pair_form, solve_linear_jets, solve_residual,
    Chart, OneForm, ScalarField, TangentJet, TwoFormJets, VectorField,
};
use crate::jet::{aligned, Jet};

/// Determinant floor for dθ restricted to H in the frame basis.
pub const CONTACT_TOL: f64 = 1e-8;

/// Which contact form a splitting refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingTag {
    Base,
    Rescaled,
}

/// A section of TM/F in the θ-splitting: the Q-coefficient w.r.t. π_Q(r)
/// and the E-frame coefficients of the horizontal part.
#[derive(Debug, Clone)]
pub struct SplitTractor {
    pub rho: Jet,
    pub mu: Vec<Jet>,
    pub tag: SplittingTag,
}

impl SplitTractor {
    pub fn rank(&self) -> usize {
        self.mu.len()
    }

    /// Slotwise value-level difference against another tractor.
    pub fn max_value_diff(&self, other: &SplitTractor) -> f64 {
        let mut worst = (self.rho.value() - other.rho.value()).abs();
        for (a, b) in self.mu.iter().zip(&other.mu) {
            worst = worst.max((a.value() - b.value()).abs());
        }
        worst
    }

    pub fn max_abs_value(&self) -> f64 {
        self.mu
            .iter()
            .fold(self.rho.value().abs(), |m, c| m.max(c.value().abs()))
    }
}

/// Contact form θ on a chart, with the accumulated log-factor when the
/// structure was produced by rescaling.
#[derive(Debug, Clone)]
pub struct ContactStructure {
    pub chart: Arc<Chart>,
    pub theta: OneForm,
    pub log_scale: Option<ScalarField>,
}

impl ContactStructure {
    pub fn new(chart: Arc<Chart>, theta: OneForm) -> Result<ContactStructure> {
        if theta.dim() != chart.dim() {
            return Err(Error::Config(format!(
                "contact form has {} components on a {}-dimensional chart",
                theta.dim(),
                chart.dim()
            )));
        }
        Ok(ContactStructure {
            chart,
            theta,
            log_scale: None,
        })
    }

    /// The rescaled structure θ̂ = e^u θ.
    pub fn rescale(&self, u: &ScalarField) -> Result<ContactStructure> {
        let m = self.chart.dim();
        if u.num_vars() != m {
            return Err(Error::Config(format!(
                "rescaling field over {} variables on a {m}-dimensional chart",
                u.num_vars()
            )));
        }
        let comps = self
            .theta
            .components()
            .iter()
            .map(|c| {
                let (c, u) = (c.clone(), u.clone());
                ScalarField::closure(m, move |seeds| Ok(&u.eval(seeds)?.exp() * &c.eval(seeds)?))
            })
            .collect();
        let log_scale = match &self.log_scale {
            None => u.clone(),
            Some(u0) => ScalarField::sum(u0, u),
        };
        Ok(ContactStructure {
            chart: self.chart.clone(),
            theta: OneForm::new(comps)?,
            log_scale: Some(log_scale),
        })
    }
}

/// Frames for the rank-n subbundles E and F of H.
#[derive(Debug, Clone)]
pub struct LegendreanSplitting {
    pub e_frame: Vec<VectorField>,
    pub f_frame: Vec<VectorField>,
}

impl LegendreanSplitting {
    pub fn new(e_frame: Vec<VectorField>, f_frame: Vec<VectorField>, chart: &Chart) -> Result<Self> {
        let n = chart.rank();
        if e_frame.len() != n || f_frame.len() != n {
            return Err(Error::Config(format!(
                "splitting needs {n} frame fields per subbundle, got {} and {}",
                e_frame.len(),
                f_frame.len()
            )));
        }
        for v in e_frame.iter().chain(&f_frame) {
            if v.dim() != chart.dim() {
                return Err(Error::Config(
                    "frame field component count does not match chart dimension".into(),
                ));
            }
        }
        Ok(LegendreanSplitting { e_frame, f_frame })
    }
}

/// Expansion of a tangent vector in the pointwise basis {r, E-frame, F-frame}.
#[derive(Debug, Clone)]
pub struct HDecomposition {
    pub q: Jet,
    pub e: Vec<Jet>,
    pub f: Vec<Jet>,
}

impl HDecomposition {
    /// Recombine q·r + Σ e_a E_a + Σ f_a F_a; used for round-trip checks.
    pub fn recombined(&self, st: &StructureAt) -> TangentJet {
        let mut coeffs = vec![self.q.clone()];
        coeffs.extend(self.e.iter().cloned());
        coeffs.extend(self.f.iter().cloned());
        let mut basis = vec![st.reeb.clone()];
        basis.extend(st.e.iter().cloned());
        basis.extend(st.f.iter().cloned());
        TangentJet::lin_comb(&coeffs, &basis)
    }
}

/// The rescaling field Υ at a point, characterized by dθ(Υ, ξ) = du(ξ) on H
/// together with θ(Υ) = 0.
#[derive(Debug, Clone)]
pub struct Upsilon {
    /// Coefficients over the H-basis (E-frame first, then F-frame).
    pub coeffs: Vec<Jet>,
    pub tangent: TangentJet,
    /// Residual of the defining 2n×2n solve.
    pub residual: f64,
}

impl Upsilon {
    /// E-part coefficients (Υ_E over the E-frame).
    pub fn e_coeffs(&self) -> &[Jet] {
        &self.coeffs[..self.coeffs.len() / 2]
    }
}

/// Levi-bracket coefficient L(X, Y) = c · π_Q(r), evaluated through the form
/// (−dθ) and, when the arguments carry enough jet order, cross-checked
/// against the bracket route θ([X, Y]).
#[derive(Debug, Clone)]
pub struct LeviValue {
    pub coeff: Jet,
    pub cross_residual: Option<f64>,
}

/// Everything about one contact structure + splitting evaluated at a point.
#[derive(Debug)]
pub struct StructureAt {
    pub tag: SplittingTag,
    pub point: Vec<f64>,
    pub order: usize,
    pub seeds: Vec<Jet>,
    /// θ components, full seed order.
    pub theta: Vec<Jet>,
    /// dθ, one order lower.
    pub dtheta: TwoFormJets,
    /// Reeb field, one order lower.
    pub reeb: TangentJet,
    pub reeb_residual: f64,
    pub e: Vec<TangentJet>,
    pub f: Vec<TangentJet>,
    /// Condition estimate of the {r, E, F} frame solve.
    pub basis_cond: f64,
    /// det of dθ restricted to H in the frame basis.
    pub h_determinant: f64,
    basis_matrix: Vec<Vec<Jet>>,
}

/// Solve the stacked system θ(r) = 1, ι_r dθ = 0 by jet-valued normal
/// equations. Rank deficiency means θ is not a contact form at the point.
fn solve_reeb(theta: &[Jet], dtheta: &TwoFormJets) -> Result<(TangentJet, f64)> {
    let m = theta.len();
    let k = dtheta.order();
    let num_vars = theta[0].num_vars();
    let mut rows: Vec<Vec<Jet>> = Vec::with_capacity(m + 1);
    rows.push(theta.iter().map(|t| t.truncated(k)).collect());
    for j in 0..m {
        // equation Σ_i dθ_{ij} r^i = 0
        rows.push((0..m).map(|i| dtheta.entry(i, j).truncated(k)).collect());
    }
    let zero = Jet::constant(num_vars, k, 0.0);
    let mut ata = vec![vec![zero.clone(); m]; m];
    for i in 0..m {
        for l in i..m {
            let mut acc = zero.clone();
            for row in &rows {
                acc = &acc + &(&row[i] * &row[l]);
            }
            ata[l][i] = acc.clone();
            ata[i][l] = acc;
        }
    }
    // Aᵀ b with b = (1, 0, …, 0) is the θ row itself.
    let atb: Vec<Jet> = rows[0].clone();
    let sol = solve_linear_jets(&ata, &atb).map_err(|e| match e {
        Error::DegenerateFrame { cond, .. } => Error::NotContact {
            detail: format!("Reeb system is rank deficient (condition estimate {cond:e})"),
            point: None,
        },
        other => other,
    })?;
    let mut rhs = vec![zero; m + 1];
    rhs[0] = Jet::constant(num_vars, k, 1.0);
    let residual = solve_residual(&rows, &sol.x, &rhs);
    Ok((TangentJet::new(sol.x), residual))
}

/// Evaluate a contact structure and splitting at `p` with seed order `order`.
pub fn evaluate(
    cs: &ContactStructure,
    split: &LegendreanSplitting,
    p: &[f64],
    order: usize,
) -> Result<StructureAt> {
    let chart = &cs.chart;
    let seeds = chart.seeds(p, order)?;
    let theta = cs.theta.eval(&seeds).map_err(|e| e.at_point(p))?;
    let dtheta = exterior_derivative(&theta)?;
    let e: Vec<TangentJet> = split
        .e_frame
        .iter()
        .map(|v| v.eval(&seeds))
        .collect::<Result<_>>()
        .map_err(|e| e.at_point(p))?;
    let f: Vec<TangentJet> = split
        .f_frame
        .iter()
        .map(|v| v.eval(&seeds))
        .collect::<Result<_>>()
        .map_err(|e| e.at_point(p))?;

    // Contact condition: dθ restricted to H = span(E, F) must be nondegenerate.
    let h_basis: Vec<&TangentJet> = e.iter().chain(f.iter()).collect();
    let n2 = h_basis.len();
    let mut gram = vec![vec![0.0; n2]; n2];
    for (a, xa) in h_basis.iter().enumerate() {
        for (b, xb) in h_basis.iter().enumerate() {
            gram[a][b] = dtheta.apply(xa, xb).value();
        }
    }
    let h_determinant = det_values(gram);
    if h_determinant.abs() <= CONTACT_TOL {
        return Err(Error::NotContact {
            detail: format!("det of dθ|_H in the frame basis is {h_determinant:e}"),
            point: Some(p.to_vec()),
        });
    }

    let (reeb, reeb_residual) = solve_reeb(&theta, &dtheta).map_err(|e| e.at_point(p))?;

    // Pointwise basis {r, E, F}: rows of the decompose system.
    let kb = reeb.order();
    let m = chart.dim();
    let mut basis_matrix = vec![Vec::with_capacity(m + 0); m];
    for (i, row) in basis_matrix.iter_mut().enumerate() {
        row.push(reeb.comp(i).clone());
        for ej in &e {
            row.push(ej.comp(i).truncated(kb));
        }
        for fj in &f {
            row.push(fj.comp(i).truncated(kb));
        }
    }
    // Probe solve: the Reeb field must decompose as (1, 0, …, 0).
    let probe: Vec<Jet> = (0..m).map(|i| reeb.comp(i).clone()).collect();
    let sol = solve_linear_jets(&basis_matrix, &probe).map_err(|e| e.at_point(p))?;
    let basis_cond = sol.cond_estimate;

    Ok(StructureAt {
        tag: if cs.log_scale.is_some() {
            SplittingTag::Rescaled
        } else {
            SplittingTag::Base
        },
        point: p.to_vec(),
        order,
        seeds,
        theta,
        dtheta,
        reeb,
        reeb_residual,
        e,
        f,
        basis_cond,
        h_determinant,
        basis_matrix,
    })
}

/// The Reeb field alone (no splitting required).
pub fn reeb_at(cs: &ContactStructure, p: &[f64], order: usize) -> Result<TangentJet> {
    let seeds = cs.chart.seeds(p, order)?;
    let theta = cs.theta.eval(&seeds).map_err(|e| e.at_point(p))?;
    let dtheta = exterior_derivative(&theta)?;
    let (reeb, _) = solve_reeb(&theta, &dtheta).map_err(|e| e.at_point(p))?;
    Ok(reeb)
}

impl StructureAt {
    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn rank(&self) -> usize {
        self.e.len()
    }

    pub fn theta_of(&self, v: &TangentJet) -> Jet {
        pair_form(&self.theta, v)
    }

    pub fn dtheta_of(&self, x: &TangentJet, y: &TangentJet) -> Jet {
        self.dtheta.apply(x, y)
    }

    /// Expand a tangent vector in the basis {r, E-frame, F-frame}.
    pub fn decompose(&self, v: &TangentJet) -> Result<HDecomposition> {
        let n = self.rank();
        let b: Vec<Jet> = v.components().to_vec();
        let sol = solve_linear_jets(&self.basis_matrix, &b)
            .map_err(|e| e.at_point(&self.point))?;
        let mut it = sol.x.into_iter();
        let q = it.next().expect("q coefficient");
        let e: Vec<Jet> = it.by_ref().take(n).collect();
        let f: Vec<Jet> = it.collect();
        Ok(HDecomposition { q, e, f })
    }

    /// Σ coeffs[a] E_a as a tangent jet.
    pub fn e_combination(&self, coeffs: &[Jet]) -> TangentJet {
        TangentJet::lin_comb(coeffs, &self.e)
    }

    /// Σ coeffs over the H-basis (E-frame then F-frame).
    pub fn h_combination(&self, coeffs: &[Jet]) -> TangentJet {
        let basis: Vec<TangentJet> = self.e.iter().chain(self.f.iter()).cloned().collect();
        TangentJet::lin_comb(coeffs, &basis)
    }

    /// Solve dθ(Υ, B_b) = du(B_b) over the H-basis.
    pub fn upsilon(&self, u: &ScalarField) -> Result<Upsilon> {
        let u_jet = u.eval(&self.seeds).map_err(|e| e.at_point(&self.point))?;
        self.upsilon_of_jet(&u_jet)
    }

    pub fn upsilon_of_jet(&self, u_jet: &Jet) -> Result<Upsilon> {
        let basis: Vec<&TangentJet> = self.e.iter().chain(self.f.iter()).collect();
        let n2 = basis.len();
        let mut a = vec![Vec::with_capacity(n2); n2];
        let mut rhs = Vec::with_capacity(n2);
        for (bi, xb) in basis.iter().enumerate() {
            for xc in basis.iter() {
                a[bi].push(self.dtheta.apply(xc, xb));
            }
            rhs.push(dir_deriv(u_jet, xb)?);
        }
        let sol = solve_linear_jets(&a, &rhs).map_err(|e| match e {
            Error::DegenerateFrame { cond, .. } => Error::NotContact {
                detail: format!("dθ|_H is degenerate (condition estimate {cond:e})"),
                point: Some(self.point.clone()),
            },
            other => other,
        })?;
        let residual = solve_residual(&a, &sol.x, &rhs);
        let basis_owned: Vec<TangentJet> = basis.into_iter().cloned().collect();
        let tangent = TangentJet::lin_comb(&sol.x, &basis_owned);
        Ok(Upsilon {
            coeffs: sol.x,
            tangent,
            residual,
        })
    }

    /// Levi-bracket coefficient: L(X, Y) = −dθ(X, Y) · π_Q(r), cross-checked
    /// against θ([X, Y]) when the arguments carry derivatives.
    pub fn levi_coeff(&self, x: &TangentJet, y: &TangentJet) -> Result<LeviValue> {
        for v in [x, y] {
            let tv = self.theta_of(v).value().abs();
            if tv > 1e-9 * (1.0 + v.max_abs_value()) {
                return Err(Error::Usage(format!(
                    "Levi bracket requires horizontal arguments (θ(arg) = {tv:e})"
                )));
            }
        }
        let coeff = -&self.dtheta_of(x, y);
        let cross_residual = if x.order() >= 1 && y.order() >= 1 {
            let br = lie_bracket(x, y)?;
            let via_bracket = self.theta_of(&br);
            Some((via_bracket.value() - coeff.value()).abs())
        } else {
            None
        };
        Ok(LeviValue {
            coeff,
            cross_residual,
        })
    }

    /// The splitting isomorphism: t ↦ (θ(t), E-part coefficients).
    pub fn split_tractor(&self, t: &TangentJet) -> Result<SplitTractor> {
        let rho = self.theta_of(t);
        let d = self.decompose(t)?;
        Ok(SplitTractor {
            rho,
            mu: d.e,
            tag: self.tag,
        })
    }

    /// Residuals max(|q|, |e|∞) of [F_a, F_b] against membership in F,
    /// for every pair a < b.
    pub fn f_involutivity(&self) -> Result<Vec<((usize, usize), f64)>> {
        let n = self.rank();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let br = lie_bracket(&self.f[a], &self.f[b])?;
                let d = self.decompose(&br)?;
                let mut res = d.q.value().abs();
                for c in &d.e {
                    res = res.max(c.value().abs());
                }
                out.push(((a, b), res));
            }
        }
        Ok(out)
    }
}

/// Change of splitting under θ̂ = e^u θ: the stored Q-coefficient converts to
/// θ̂-units and the E-slot picks up the −θ(ρ)·Υ_E correction.
pub fn change_splitting(st: &SplitTractor, u_jet: &Jet, upsilon_e: &[Jet]) -> SplitTractor {
    let (rho, eu) = aligned(&st.rho, &u_jet.exp());
    let rho_hat = &eu * &rho;
    let mu = st
        .mu
        .iter()
        .zip(upsilon_e)
        .map(|(m, ue)| {
            let (corr_a, corr_b) = aligned(&st.rho, ue);
            let corr = &corr_a * &corr_b;
            let (m, corr) = aligned(m, &corr);
            &m - &corr
        })
        .collect();
    SplitTractor {
        rho: rho_hat,
        mu,
        tag: SplittingTag::Rescaled,
    }
}

/// Determinant of a small value matrix by LU with partial pivoting.
fn det_values(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty");
        if piv_abs == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    det
}
