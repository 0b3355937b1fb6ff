//! The codifferential ∂*, the splitting operator S, the Rho tensor P, and
//! the first relative BGG operator D = ∇ ∘ S.
//!
//! D is computed along two independent routes and cross-checked: the proof
//! form D_{ab} = −dθ([F_a, μ] + θ(ρ)[F_a, r], F_b) with μ the solved
//! splitting field, and the operator form ∇^E ∇^Q ρ + θ(ρ)·P pushed through
//! the Levi pairing. Both land in Q-coefficients over the F-frame.

use crate::connect::{nabla_e, rescaled_pair, tractor_connection_of_split, RescaledPair};
use crate::contact::{ContactStructure, LegendreanSplitting, SplitTractor, StructureAt};
use crate::error::{Error, Result};
use crate::fields::{dir_deriv, lie_bracket, solve_linear_jets, ScalarField, TangentJet};
use crate::jet::{aligned, Jet};

/// An element of F* ⊗ (TM/F) at a point: one split tractor per F-direction.
pub type FStarTractor = Vec<SplitTractor>;

/// The Rho tensor at a point: entry (a, b) is the E-frame coefficient b of
/// P(F_a) = [F_a, r]_E.
#[derive(Debug, Clone)]
pub struct RhoValue {
    pub entries: Vec<Vec<Jet>>,
}

impl RhoValue {
    pub fn max_abs_value(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.value().abs()))
    }
}

/// The value of D(ρ) at a point: Q-coefficients over (F_a, F_b), computed
/// along both routes.
#[derive(Debug, Clone)]
pub struct BggValue {
    /// −dθ([F_a, μ] + θ(ρ)[F_a, r], F_b)
    pub entries: Vec<Vec<Jet>>,
    /// L(∇^E_{F_a} μ + θ(ρ)·P(F_a), F_b)
    pub abstract_entries: Vec<Vec<Jet>>,
    /// Max value disagreement between the two routes.
    pub cross_residual: f64,
    /// The splitting tractor S(ρ) = (θ(ρ), μ) the computation went through.
    pub splitting: SplitTractor,
}

impl BggValue {
    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.entries[a][b].value()
    }

    pub fn value_matrix(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|c| c.value()).collect())
            .collect()
    }

    /// max over a < b of |D_{ab} − D_{ba}|.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.rank();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                worst = worst.max((self.value(a, b) - self.value(b, a)).abs());
            }
        }
        worst
    }
}

/// The Levi pairing matrix dθ(E_b, F_a) used by both solves below; row a is
/// the equation for the direction F_a, column b the unknown E-coefficient.
fn levi_matrix(st: &StructureAt, negate: bool) -> Vec<Vec<Jet>> {
    let n = st.rank();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let v = st.dtheta_of(&st.e[b], &st.f[a]);
                    if negate {
                        -&v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// ∂*: extract the Q-slots q_a of Φ, invert the Levi isomorphism E ≅ F*⊗Q
/// by solving L(η, F_a) = q_a, and include η back as the tractor (0, η).
pub fn kostant_codiff(st: &StructureAt, phi: &[SplitTractor]) -> Result<SplitTractor> {
    let n = st.rank();
    if phi.len() != n {
        return Err(Error::Usage(format!(
            "∂* expects one tractor per F-direction ({n}), got {}",
            phi.len()
        )));
    }
    // L(η, F_a) = −dθ(η, F_a), so the matrix is −dθ(E_b, F_a).
    let a = levi_matrix(st, true);
    let rhs: Vec<Jet> = phi.iter().map(|t| t.rho.clone()).collect();
    let sol = solve_linear_jets(&a, &rhs).map_err(|e| match e {
        Error::DegenerateFrame { cond, .. } => Error::NotContact {
            detail: format!("Levi pairing is degenerate (condition estimate {cond:e})"),
            point: Some(st.point.clone()),
        },
        other => other,
    })?;
    let zero = Jet::constant(sol.x[0].num_vars(), sol.x[0].order(), 0.0);
    Ok(SplitTractor {
        rho: zero,
        mu: sol.x,
        tag: st.tag,
    })
}

/// S(ρ) = (ρ, ∇^Q ρ): the unique lift with vanishing upper slot of ∇S(ρ),
/// realized by solving dθ(μ, F_a) = −F_a·θ(ρ) in jet arithmetic.
pub fn splitting_operator(st: &StructureAt, rho_theta: &Jet) -> Result<SplitTractor> {
    let n = st.rank();
    let a = levi_matrix(st, false);
    let rhs: Vec<Jet> = (0..n)
        .map(|i| Ok(-&dir_deriv(rho_theta, &st.f[i])?))
        .collect::<Result<_>>()?;
    let sol = solve_linear_jets(&a, &rhs).map_err(|e| match e {
        Error::DegenerateFrame { cond, .. } => Error::NotContact {
            detail: format!("Levi pairing is degenerate (condition estimate {cond:e})"),
            point: Some(st.point.clone()),
        },
        other => other,
    })?;
    Ok(SplitTractor {
        rho: rho_theta.clone(),
        mu: sol.x,
        tag: st.tag,
    })
}

/// Defect of the splitting solve: max_a |dθ(μ, F_a) + F_a·θ(ρ)| at the point.
pub fn splitting_defect(st: &StructureAt, s: &SplitTractor) -> Result<f64> {
    let mu_vec = st.e_combination(&s.mu);
    let mut worst: f64 = 0.0;
    for fa in &st.f {
        let lhs = st.dtheta_of(&mu_vec, fa).value();
        let rhs = dir_deriv(&s.rho, fa)?.value();
        worst = worst.max((lhs + rhs).abs());
    }
    Ok(worst)
}

/// P(F_a) = [F_a, r]_E for each frame direction.
pub fn rho_tensor(st: &StructureAt) -> Result<RhoValue> {
    let entries = st
        .f
        .iter()
        .map(|fa| {
            let br = lie_bracket(fa, &st.reeb)?;
            Ok(st.decompose(&br)?.e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RhoValue { entries })
}

/// The first relative BGG operator applied to the Q-section with θ(ρ) = `rho_theta`.
pub fn bgg_d(st: &StructureAt, rho_theta: &Jet) -> Result<BggValue> {
    let n = st.rank();
    let splitting = splitting_operator(st, rho_theta)?;
    let mu_vec = st.e_combination(&splitting.mu);
    let p = rho_tensor(st)?;

    let mut entries = Vec::with_capacity(n);
    let mut abstract_entries = Vec::with_capacity(n);
    let mut cross_residual: f64 = 0.0;
    for a in 0..n {
        let fa = &st.f[a];
        // Proof form: −dθ([F_a, μ] + θ(ρ)[F_a, r], F_b).
        let br_mu = lie_bracket(fa, &mu_vec)?;
        let br_r = lie_bracket(fa, &st.reeb)?;
        let w = br_mu.add(&br_r.scale(rho_theta));
        let row: Vec<Jet> = (0..n).map(|b| -&st.dtheta_of(&w, &st.f[b])).collect();

        // Operator form: L(∇^E_{F_a} μ + θ(ρ)·P(F_a), F_b).
        let ne = nabla_e(st, fa, &mu_vec)?;
        let coeffs: Vec<Jet> = ne
            .coeffs
            .iter()
            .zip(&p.entries[a])
            .map(|(c, pc)| {
                let (g, pc) = aligned(rho_theta, pc);
                let term = &g * &pc;
                let (c, term) = aligned(c, &term);
                &c + &term
            })
            .collect();
        let v = st.e_combination(&coeffs);
        let row2: Vec<Jet> = (0..n).map(|b| -&st.dtheta_of(&v, &st.f[b])).collect();

        for (x, y) in row.iter().zip(&row2) {
            cross_residual = cross_residual.max((x.value() - y.value()).abs());
        }
        entries.push(row);
        abstract_entries.push(row2);
    }
    Ok(BggValue {
        entries,
        abstract_entries,
        cross_residual,
        splitting,
    })
}

/// Residual of the d²θ = 0 expansion
/// 0 = dθ([ξ₁, ζ], ξ₂) − dθ([ξ₂, ζ], ξ₁) + ξ₂·dθ(ζ, ξ₁) − ξ₁·dθ(ζ, ξ₂)
///     − dθ([ξ₁, ξ₂], ζ)
/// over all frame pairs ξ₁ = F_a, ξ₂ = F_b.
pub fn five_term_residual(st: &StructureAt, zeta: &TangentJet) -> Result<f64> {
    let n = st.rank();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (fa, fb) = (&st.f[a], &st.f[b]);
            let t1 = st.dtheta_of(&lie_bracket(fa, zeta)?, fb).value();
            let t2 = st.dtheta_of(&lie_bracket(fb, zeta)?, fa).value();
            let s_a = st.dtheta_of(zeta, fa);
            let s_b = st.dtheta_of(zeta, fb);
            let t3 = dir_deriv(&s_a, fb)?.value();
            let t4 = dir_deriv(&s_b, fa)?.value();
            let t5 = st.dtheta_of(&lie_bracket(fa, fb)?, zeta).value();
            worst = worst.max((t1 - t2 + t3 - t4 - t5).abs());
        }
    }
    Ok(worst)
}

/// Residual of the exact symmetry relation
/// D_{ab} − D_{ba} = ([F_a, F_b]_E)·θ(ρ).
///
/// For involutive F the right-hand side vanishes and this reduces to plain
/// symmetry of D; for non-involutive frames the E-part of the F-bracket is a
/// tensor and the relation pins the asymmetry exactly.
pub fn symmetry_defect_residual(
    st: &StructureAt,
    d: &BggValue,
    rho_theta: &Jet,
) -> Result<f64> {
    let n = st.rank();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let br = lie_bracket(&st.f[a], &st.f[b])?;
            let e_part = st.e_combination(&st.decompose(&br)?.e);
            let defect = dir_deriv(rho_theta, &e_part)?.value();
            worst = worst.max((d.value(a, b) - d.value(b, a) - defect).abs());
        }
    }
    Ok(worst)
}

/// Upper-slot and ∂*-residuals of ∇S(ρ): by construction both must vanish.
#[derive(Debug, Clone, Copy)]
pub struct CodiffResiduals {
    /// max_a |upper slot of ∇_{F_a} S(ρ)|
    pub upper_slot: f64,
    /// slotwise max of ∂*(∇S(ρ))
    pub codiff: f64,
}

pub fn codiff_of_nabla_s(st: &StructureAt, rho_theta: &Jet) -> Result<CodiffResiduals> {
    let s = splitting_operator(st, rho_theta)?;
    let phi: FStarTractor = (0..st.rank())
        .map(|a| tractor_connection_of_split(st, &st.f[a], &s))
        .collect::<Result<_>>()?;
    let upper_slot = phi
        .iter()
        .fold(0.0f64, |m, t| m.max(t.rho.value().abs()));
    let cod = kostant_codiff(st, &phi)?;
    Ok(CodiffResiduals {
        upper_slot,
        codiff: cod.max_abs_value(),
    })
}

/// Two-path invariance of D: compute against θ and against θ̂ = e^u θ with
/// the same frames, then compare Q-coefficients in θ-units (the π_Q(r̂)
/// coefficient converts by e^{−u}).
pub fn d_invariance_residual(pair: &RescaledPair, rho_theta: &Jet) -> Result<f64> {
    let d_base = bgg_d(&pair.base, rho_theta)?;
    let (eu, g) = aligned(&pair.u_jet.exp(), rho_theta);
    let rho_hat = &eu * &g;
    let d_hat = bgg_d(&pair.hat, &rho_hat)?;
    let enu = (-pair.u_jet.value()).exp();
    let n = pair.base.rank();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let converted = enu * d_hat.value(a, b);
            worst = worst.max((converted - d_base.value(a, b)).abs());
        }
    }
    Ok(worst)
}

/// Residual of the exact two-path relation for D:
/// e^{−u} D̂_{ab} − D_{ab} = −θ(ρ)·dθ([F_a, Υ_F], F_b).
///
/// The right-hand side vanishes on involutive F, and for any rescaling with
/// du|_E = 0 (which forces Υ_F = 0); in those cases this reduces to plain
/// invariance of D under the change of contact form.
pub fn d_invariance_defect(pair: &RescaledPair, rho_theta: &Jet) -> Result<f64> {
    let d_base = bgg_d(&pair.base, rho_theta)?;
    let (eu, g) = aligned(&pair.u_jet.exp(), rho_theta);
    let rho_hat = &eu * &g;
    let d_hat = bgg_d(&pair.hat, &rho_hat)?;
    let enu = (-pair.u_jet.value()).exp();
    let n = pair.base.rank();
    let ups_f_vec = {
        let f_coeffs = &pair.upsilon.coeffs[n..];
        TangentJet::lin_comb(f_coeffs, &pair.base.f)
    };
    let gv = rho_theta.value();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let br = lie_bracket(&pair.base.f[a], &ups_f_vec)?;
        for b in 0..n {
            let predicted = -gv * pair.base.dtheta_of(&br, &pair.base.f[b]).value();
            let diff = enu * d_hat.value(a, b) - d_base.value(a, b);
            worst = worst.max((diff - predicted).abs());
        }
    }
    Ok(worst)
}

/// Convenience wrapper: full D-invariance check from fields.
pub fn verify_d_invariance(
    cs: &ContactStructure,
    split: &LegendreanSplitting,
    u: &ScalarField,
    rho: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<f64> {
    let pair = rescaled_pair(cs, split, u, p, order)?;
    let g = rho.eval(&pair.base.seeds).map_err(|e| e.at_point(p))?;
    d_invariance_residual(&pair, &g)
}
