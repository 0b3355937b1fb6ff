//! Partial connections in F-directions on Q and E, and the invariant
//! partial connection on the quotient TM/F.
//!
//! In a θ-splitting (ρ, μ) the connection on TM/F reads
//!
//! ```text
//! ∇_ξ t = ( ∇^Q_ξ ρ + L(ξ, μ) ,  ∇^E_ξ μ + θ(ρ)·[ξ, r]_E )
//! ```
//!
//! with ∇^Q_ξ ρ = ξ·θ(ρ) in the Reeb trivialization of Q and
//! ∇^E_ξ η = ([ξ, η] − θ([ξ, η]) r)_E. Both the slotwise transformation laws
//! under θ̂ = e^u θ and the two-path invariance of ∇ are exposed as residual
//! computations so the harness can drive them over sampled points.

use crate::contact::{
    change_splitting, evaluate, ContactStructure, LegendreanSplitting, SplitTractor, StructureAt,
    Upsilon,
};
use crate::error::{Error, Result};
use crate::fields::{dir_deriv, lie_bracket, ScalarField, TangentJet};
use crate::jet::{aligned, Jet};

/// ∇^E result: E-frame coefficients of the Remark formula together with the
/// residual of the defining identity dθ(∇^E_ξ η, F_b) = dθ([ξ, η], F_b).
#[derive(Debug, Clone)]
pub struct NablaE {
    pub coeffs: Vec<Jet>,
    pub cross_residual: f64,
}

fn horizontality(st: &StructureAt, v: &TangentJet) -> f64 {
    st.theta_of(v).value().abs() / (1.0 + v.max_abs_value())
}

/// Check that ξ is (numerically) a section of F: horizontal with no E-part.
pub fn ensure_f_section(st: &StructureAt, xi: &TangentJet) -> Result<()> {
    let tol = 1e-8;
    let th = horizontality(st, xi);
    if th > tol {
        return Err(Error::Usage(format!(
            "direction is not horizontal: θ(ξ) = {th:e}"
        )));
    }
    let d = st.decompose(xi)?;
    let scale = 1.0 + xi.max_abs_value();
    for c in &d.e {
        if c.value().abs() / scale > tol {
            return Err(Error::Usage(format!(
                "direction has an E-component ({:e}); ∇ differentiates in F-directions only",
                c.value()
            )));
        }
    }
    Ok(())
}

/// ∇^Q_ξ ρ in the Reeb trivialization: the Q-coefficient ξ·θ(ρ).
pub fn nabla_q(st: &StructureAt, xi: &TangentJet, rho_theta: &Jet) -> Result<Jet> {
    ensure_f_section(st, xi)?;
    dir_deriv(rho_theta, xi)
}

/// ∇^E_ξ η via the explicit formula ([ξ, η] − θ([ξ, η]) r)_E, cross-checked
/// against the defining dθ-identity.
pub fn nabla_e(st: &StructureAt, xi: &TangentJet, eta: &TangentJet) -> Result<NablaE> {
    ensure_f_section(st, xi)?;
    if horizontality(st, eta) > 1e-8 {
        return Err(Error::Usage(format!(
            "∇^E argument is not horizontal: θ(η) = {:e}",
            st.theta_of(eta).value()
        )));
    }
    let br = lie_bracket(xi, eta)?;
    let d = st.decompose(&br)?;
    let result = st.e_combination(&d.e);
    let mut cross_residual: f64 = 0.0;
    for fb in &st.f {
        let lhs = st.dtheta_of(&result, fb).value();
        let rhs = st.dtheta_of(&br, fb).value();
        cross_residual = cross_residual.max((lhs - rhs).abs());
    }
    Ok(NablaE {
        coeffs: d.e,
        cross_residual,
    })
}

/// The invariant partial connection applied to an evaluated section of TM/F.
pub fn tractor_connection(
    st: &StructureAt,
    xi: &TangentJet,
    t: &TangentJet,
) -> Result<SplitTractor> {
    let sp = st.split_tractor(t)?;
    tractor_connection_of_split(st, xi, &sp)
}

/// Slotwise assembly of ∇_ξ for a section already in the θ-splitting. The
/// μ-coefficients must be jets so the bracket with the reconstituted E-field
/// is defined.
pub fn tractor_connection_of_split(
    st: &StructureAt,
    xi: &TangentJet,
    sp: &SplitTractor,
) -> Result<SplitTractor> {
    ensure_f_section(st, xi)?;
    let mu_vec = st.e_combination(&sp.mu);

    // Upper slot: ξ·θ(ρ) + L(ξ, μ), as a Q-coefficient.
    let dq = dir_deriv(&sp.rho, xi)?;
    let levi = -&st.dtheta_of(xi, &mu_vec);
    let (dq, levi) = aligned(&dq, &levi);
    let upper = &dq + &levi;

    // Lower slot: ∇^E_ξ μ + θ(ρ)·[ξ, r]_E, as E-frame coefficients.
    let ne = nabla_e(st, xi, &mu_vec)?;
    let br = lie_bracket(xi, &st.reeb)?;
    let p_part = st.decompose(&br)?.e;
    let lower = ne
        .coeffs
        .iter()
        .zip(&p_part)
        .map(|(a, p)| {
            let (rho, p) = aligned(&sp.rho, p);
            let term = &rho * &p;
            let (a, term) = aligned(a, &term);
            &a + &term
        })
        .collect();

    Ok(SplitTractor {
        rho: upper,
        mu: lower,
        tag: sp.tag,
    })
}

/// Bott connection π_{TM/F}([ξ, t]) in the θ-splitting; defined only where F
/// is involutive, otherwise refuses naming the failing bracket.
pub fn bott_connection(
    st: &StructureAt,
    xi_index: usize,
    t: &TangentJet,
) -> Result<SplitTractor> {
    for ((a, b), residual) in st.f_involutivity()? {
        if residual > 1e-9 {
            return Err(Error::NonInvolutive {
                a,
                b,
                residual,
                point: st.point.clone(),
            });
        }
    }
    let br = lie_bracket(&st.f[xi_index], t)?;
    st.split_tractor(&br)
}

/// Base and rescaled structure evaluated at one point, with the connecting
/// data (u as a jet and the field Υ of the base structure).
pub struct RescaledPair {
    pub base: StructureAt,
    pub hat: StructureAt,
    pub u_jet: Jet,
    pub upsilon: Upsilon,
}

pub fn rescaled_pair(
    cs: &ContactStructure,
    split: &LegendreanSplitting,
    u: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<RescaledPair> {
    let base = evaluate(cs, split, p, order)?;
    let hat_cs = cs.rescale(u)?;
    let hat = evaluate(&hat_cs, split, p, order)?;
    let u_jet = u.eval(&base.seeds).map_err(|e| e.at_point(p))?;
    let upsilon = base.upsilon_of_jet(&u_jet)?;
    Ok(RescaledPair {
        base,
        hat,
        u_jet,
        upsilon,
    })
}

/// Residuals of the two slotwise transformation laws
/// ∇̂^E_ξ η = ∇^E_ξ η + dθ(ξ, η) Υ_E and ∇̂^Q_ξ ρ = ∇^Q_ξ ρ + du(ξ) ρ,
/// the hatted side computed from scratch against θ̂.
#[derive(Debug, Clone, Copy)]
pub struct TransformLawResiduals {
    pub e_law: f64,
    pub q_law: f64,
}

pub fn verify_transformation_laws(
    pair: &RescaledPair,
    rho_thetas: &[Jet],
) -> Result<TransformLawResiduals> {
    let n = pair.base.rank();
    let ups_e = pair.upsilon.e_coeffs();
    let mut e_law: f64 = 0.0;
    for a in 0..n {
        let xi = &pair.base.f[a];
        for b in 0..n {
            let eta = &pair.base.e[b];
            let lhs = nabla_e(&pair.hat, xi, eta)?.coeffs;
            let base = nabla_e(&pair.base, xi, eta)?.coeffs;
            let corr = pair.base.dtheta_of(xi, eta);
            for (c, (l, bs)) in lhs.iter().zip(base.iter()).enumerate().map(|(c, z)| (c, z)) {
                let rhs = bs.value() + corr.value() * ups_e[c].value();
                e_law = e_law.max((l.value() - rhs).abs());
            }
        }
    }

    let eu = pair.u_jet.exp();
    let enu = (-&pair.u_jet).exp();
    let mut q_law: f64 = 0.0;
    for a in 0..n {
        let xi = &pair.base.f[a];
        let du_xi = dir_deriv(&pair.u_jet, xi)?;
        for g in rho_thetas {
            // Hatted side in θ-units: e^{-u} · ξ·(e^u g).
            let (eu_t, g_t) = aligned(&eu, g);
            let g_hat = &eu_t * &g_t;
            let lhs_hat = nabla_q(&pair.hat, xi, &g_hat)?;
            let lhs = enu.value() * lhs_hat.value();
            let rhs = nabla_q(&pair.base, xi, g)?.value() + du_xi.value() * g.value();
            q_law = q_law.max((lhs - rhs).abs());
        }
    }
    Ok(TransformLawResiduals { e_law, q_law })
}

/// Residuals of the two displayed identities for the bracket of an F-section
/// with the rescaled Reeb field.
#[derive(Debug, Clone, Copy)]
pub struct ReebBracketResiduals {
    pub full: f64,
    pub e_part: f64,
}

pub fn verify_reeb_bracket(pair: &RescaledPair, xi_index: usize) -> Result<ReebBracketResiduals> {
    let xi = &pair.base.f[xi_index];
    let enu = (-&pair.u_jet).exp();

    // [ξ, r̂] = e^{-u} ( [ξ, r + Υ] − du(ξ)(r + Υ) )
    let lhs = lie_bracket(xi, &pair.hat.reeb)?;
    let r_plus = pair.base.reeb.add(&pair.upsilon.tangent);
    let br = lie_bracket(xi, &r_plus)?;
    let du_xi = dir_deriv(&pair.u_jet, xi)?;
    let rhs = br.sub(&r_plus.scale(&du_xi)).scale(&enu);
    let full = lhs.sub(&rhs).max_abs_value();

    // E-part: [ξ, r̂]_E = e^{-u}[ξ, r]_E + e^{-u} dθ(ξ, Υ) Υ_E
    //                    + e^{-u}([ξ, Υ] − θ([ξ, Υ]) r)_E
    let lhs_e = pair.base.decompose(&lhs)?.e;
    let t1 = pair.base.decompose(&lie_bracket(xi, &pair.base.reeb)?)?.e;
    let coef = pair.base.dtheta_of(xi, &pair.upsilon.tangent);
    let ups_e = pair.upsilon.e_coeffs();
    let t3 = pair.base.decompose(&lie_bracket(xi, &pair.upsilon.tangent)?)?.e;
    let mut e_part: f64 = 0.0;
    for b in 0..pair.base.rank() {
        let rhs_b =
            enu.value() * (t1[b].value() + coef.value() * ups_e[b].value() + t3[b].value());
        e_part = e_part.max((lhs_e[b].value() - rhs_b).abs());
    }
    Ok(ReebBracketResiduals { full, e_part })
}

/// Two-path invariance of the tractor connection: compute ∇_ξ t in the
/// θ-splitting and convert, versus computing directly against θ̂; both sides
/// are compared in the θ̂-splitting with the ρ-slot in θ̂-units.
pub fn verify_tractor_invariance(pair: &RescaledPair, t: &TangentJet) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..pair.base.rank() {
        let xi = &pair.base.f[a];
        let via_base = tractor_connection(&pair.base, xi, t)?;
        let converted = change_splitting(&via_base, &pair.u_jet, pair.upsilon.e_coeffs());
        let direct = tractor_connection(&pair.hat, xi, t)?;
        worst = worst.max(converted.max_value_diff(&direct));
    }
    Ok(worst)
}

/// Residual of the exact two-path relation: the ρ-slots agree and the E-slots
/// differ by precisely θ(t)·([ξ, Υ_F])_E, where Υ_F is the F-part of Υ.
///
/// The correction is a tensor supported on non-involutive F with du|_E ≠ 0
/// (that combination makes Υ_F nonzero and its bracket with F-directions leak
/// into E); on involutive F, or whenever du vanishes along E, it is zero and
/// this reduces to plain two-path invariance.
pub fn tractor_invariance_defect(pair: &RescaledPair, t: &TangentJet) -> Result<f64> {
    let n = pair.base.rank();
    let ups_f_vec = {
        let f_coeffs = &pair.upsilon.coeffs[n..];
        let basis: Vec<TangentJet> = pair.base.f.clone();
        crate::fields::TangentJet::lin_comb(f_coeffs, &basis)
    };
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let xi = &pair.base.f[a];
        let via_base = tractor_connection(&pair.base, xi, t)?;
        let converted = change_splitting(&via_base, &pair.u_jet, pair.upsilon.e_coeffs());
        let direct = tractor_connection(&pair.hat, xi, t)?;

        worst = worst.max((direct.rho.value() - converted.rho.value()).abs());
        let c = pair.base.theta_of(t).value();
        let br = lie_bracket(xi, &ups_f_vec)?;
        let predicted = pair.base.decompose(&br)?.e;
        for b in 0..n {
            let diff = direct.mu[b].value() - converted.mu[b].value();
            worst = worst.max((diff - c * predicted[b].value()).abs());
        }
    }
    Ok(worst)
}
