//! The verification suites: each turns one construction's defining identities
//! into residual records over randomized sample points.
//!
//! Every suite draws its own point stream from the run seed, so a standalone
//! run and the same suite inside `all` see identical points and produce
//! identical records. Singularities and degeneracies at a sample point are
//! recorded as property failures, never panics.

use std::time::Instant;

use crate::bgg::{
    bgg_d, codiff_of_nabla_s, d_invariance_residual, five_term_residual, kostant_codiff,
    splitting_defect, splitting_operator, symmetry_defect_residual,
};
use crate::connect::{
    bott_connection, nabla_e, nabla_q, rescaled_pair, tractor_connection,
    verify_reeb_bracket, verify_transformation_laws, RescaledPair,
};
use crate::contact::{change_splitting, evaluate, SplitTractor, StructureAt};
use crate::error::{Error, Result};
use crate::fields::{dir_deriv, ScalarField, VectorField};
use crate::harness::config::Loaded;
use crate::harness::report::{PropertyRecord, SuiteReport, Tracker};
use crate::harness::sample::BoxSampler;
use crate::jet::{aligned, Jet, MAX_ORDER};

pub const SUITE_NAMES: &[&str] = &[
    "structure",
    "reeb-upsilon",
    "splitting",
    "bracket-reeb",
    "connections",
    "tractor",
    "bott",
    "codiff-S",
    "rho",
    "bgg",
];

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub points: usize,
    pub seed: u64,
    pub order: usize,
    /// Replaces every property tolerance when set.
    pub tol_override: Option<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            points: 100,
            seed: 42,
            order: 2,
            tol_override: None,
        }
    }
}

impl SuiteOptions {
    fn tol(&self, default: f64) -> f64 {
        self.tol_override.unwrap_or(default)
    }
}

pub fn run_suite(loaded: &Loaded, suite: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    if !(2..=MAX_ORDER).contains(&opts.order) {
        return Err(Error::Config(format!(
            "verification needs jet order 2 or 3, got {}",
            opts.order
        )));
    }
    if opts.points == 0 {
        return Err(Error::Config("point count must be positive".into()));
    }
    let start = Instant::now();
    let properties = if suite == "all" {
        let mut all = Vec::new();
        for name in SUITE_NAMES {
            all.extend(run_one(loaded, name, opts)?);
        }
        all
    } else if SUITE_NAMES.contains(&suite) {
        run_one(loaded, suite, opts)?
    } else {
        return Err(Error::UnknownSuite(suite.to_string()));
    };
    Ok(SuiteReport::from_properties(
        suite,
        opts.seed,
        opts.points,
        opts.order,
        properties,
        start.elapsed().as_millis() as u64,
    ))
}

fn run_one(loaded: &Loaded, suite: &str, opts: &SuiteOptions) -> Result<Vec<PropertyRecord>> {
    let mut sampler = BoxSampler::new(loaded.chart.bounds(), opts.seed);
    let points = sampler.take(opts.points);
    match suite {
        "structure" => suite_structure(loaded, opts, &points),
        "reeb-upsilon" => suite_reeb_upsilon(loaded, opts, &points),
        "splitting" => suite_splitting(loaded, opts, &points),
        "bracket-reeb" => suite_bracket_reeb(loaded, opts, &points),
        "connections" => suite_connections(loaded, opts, &points),
        "tractor" => suite_tractor(loaded, opts, &points),
        "bott" => suite_bott(loaded, opts, &points),
        "codiff-S" => suite_codiff(loaded, opts, &points),
        "rho" => suite_rho(loaded, opts, &points),
        "bgg" => suite_bgg(loaded, opts, &points, &mut sampler),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

/// True when the F-frame fails involutivity at the probe point; used to pick
/// the documented looser tolerances for the deepest computation graphs.
fn f_is_noninvolutive(loaded: &Loaded, p: &[f64], order: usize) -> bool {
    evaluate(&loaded.contact, &loaded.splitting, p, order)
        .and_then(|st| st.f_involutivity())
        .map(|rs| rs.iter().any(|(_, r)| *r > 1e-6))
        .unwrap_or(false)
}

/// A generic probe vector field: component i is the (i+1)-th coordinate,
/// cyclically. Independent of any configured section.
fn rotated_probe(loaded: &Loaded) -> VectorField {
    let names = loaded.chart.names();
    let m = names.len();
    let texts: Vec<String> = (0..m).map(|i| names[(i + 1) % m].clone()).collect();
    VectorField::from_exprs(&texts, &loaded.chart).expect("coordinate names parse")
}

/// A fixed scalar multiplier for Leibniz/tensoriality checks.
fn test_function(loaded: &Loaded) -> ScalarField {
    let c0 = &loaded.chart.names()[0];
    let c1 = &loaded.chart.names()[1];
    ScalarField::from_expr(&format!("0.5*{c0} + {c0}*{c1}"), &loaded.chart)
        .expect("test function parses")
}

fn base_at<'a>(loaded: &Loaded, p: &[f64], order: usize) -> Result<StructureAt> {
    evaluate(&loaded.contact, &loaded.splitting, p, order)
}

fn pair_at(loaded: &Loaded, u: &ScalarField, p: &[f64], order: usize) -> Result<RescaledPair> {
    rescaled_pair(&loaded.contact, &loaded.splitting, u, p, order)
}

fn finish(trackers: Vec<Tracker>) -> Result<Vec<PropertyRecord>> {
    Ok(trackers.into_iter().map(Tracker::finish).collect())
}

fn observe_all(trackers: &mut [Tracker], point: &[f64]) {
    for t in trackers.iter_mut() {
        t.observe_error(point);
    }
}

// ---------------------------------------------------------------------------
// structure

fn suite_structure(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut trackers = vec![
        Tracker::new(
            "structure_reeb_residual",
            "theta(r) = 1 and dtheta(r, .) = 0",
            opts.tol(1e-10),
        ),
        Tracker::new(
            "structure_horizontality",
            "theta(E_i) = 0 and theta(F_a) = 0",
            opts.tol(1e-10),
        ),
        Tracker::new("structure_isotropy_E", "dtheta(E_i, E_j) = 0", opts.tol(1e-10)),
        Tracker::new("structure_isotropy_F", "dtheta(F_a, F_b) = 0", opts.tol(1e-10)),
        Tracker::new(
            "structure_decompose_roundtrip",
            "v = theta(v) r + v_E + v_F",
            opts.tol(1e-10),
        ),
        Tracker::new(
            "structure_q_consistency",
            "q-coefficient of the frame solve = theta(v)",
            opts.tol(1e-10),
        ),
    ];
    let probe = rotated_probe(loaded);
    for p in points {
        match structure_point(loaded, &probe, p, opts.order) {
            Ok(r) => {
                for (t, v) in trackers.iter_mut().zip(r) {
                    t.observe(v, p);
                }
            }
            Err(_) => observe_all(&mut trackers, p),
        }
    }
    finish(trackers)
}

fn structure_point(
    loaded: &Loaded,
    probe: &VectorField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 6]> {
    let st = base_at(loaded, p, order)?;
    let mut horiz: f64 = 0.0;
    for v in st.e.iter().chain(st.f.iter()) {
        horiz = horiz.max(st.theta_of(v).value().abs());
    }
    let mut iso_e: f64 = 0.0;
    let mut iso_f: f64 = 0.0;
    let n = st.rank();
    for i in 0..n {
        for j in i + 1..n {
            iso_e = iso_e.max(st.dtheta_of(&st.e[i], &st.e[j]).value().abs());
            iso_f = iso_f.max(st.dtheta_of(&st.f[i], &st.f[j]).value().abs());
        }
    }
    let v = probe.eval(&st.seeds)?;
    let d = st.decompose(&v)?;
    let back = d.recombined(&st);
    let roundtrip = back.sub(&v.truncated(back.order())).max_abs_value();
    let qcons = (d.q.value() - st.theta_of(&v).value()).abs();
    Ok([st.reeb_residual, horiz, iso_e, iso_f, roundtrip, qcons])
}

// ---------------------------------------------------------------------------
// reeb-upsilon

fn suite_reeb_upsilon(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut trackers = vec![
        Tracker::new(
            "reeb_upsilon_dtheta",
            "dtheta_hat = e^u (du ^ theta + dtheta)",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "reeb_upsilon_reeb",
            "r_hat = e^{-u} (r + Upsilon)",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "reeb_upsilon_defining",
            "dtheta(Upsilon, xi) = du(xi) for xi in H, theta(Upsilon) = 0",
            opts.tol(1e-9),
        ),
        Tracker::new("reeb_upsilon_du_vanishes", "du(Upsilon) = 0", opts.tol(1e-9)),
    ];
    for p in points {
        for u in &loaded.rescalings {
            match reeb_upsilon_point(loaded, &u.field, p, opts.order) {
                Ok(r) => {
                    for (t, v) in trackers.iter_mut().zip(r) {
                        t.observe(v, p);
                    }
                }
                Err(_) => observe_all(&mut trackers, p),
            }
        }
    }
    finish(trackers)
}

fn reeb_upsilon_point(
    loaded: &Loaded,
    u: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 4]> {
    let pair = pair_at(loaded, u, p, order)?;
    let m = loaded.chart.dim();
    let k = pair.base.dtheta.order();
    let eu = pair.u_jet.exp().truncated(k);

    let mut dtheta_res: f64 = 0.0;
    for i in 0..m {
        let du_i = pair.u_jet.derivative(i)?;
        for j in i + 1..m {
            let du_j = pair.u_jet.derivative(j)?;
            let wedge = &(&du_i * &pair.base.theta[j].truncated(k))
                - &(&du_j * &pair.base.theta[i].truncated(k));
            let rhs = &eu * &(&wedge + &pair.base.dtheta.entry(i, j).truncated(k));
            let lhs = pair.hat.dtheta.entry(i, j);
            dtheta_res = dtheta_res.max((lhs.value() - rhs.value()).abs());
        }
    }

    let enu = (-&pair.u_jet).exp();
    let predicted = pair.base.reeb.add(&pair.upsilon.tangent).scale(&enu);
    let reeb_res = pair.hat.reeb.sub(&predicted).max_abs_value();

    let theta_ups = pair.base.theta_of(&pair.upsilon.tangent).value().abs();
    let defining = pair.upsilon.residual.max(theta_ups);

    let du_vanish = dir_deriv(&pair.u_jet, &pair.upsilon.tangent)?.value().abs();
    Ok([dtheta_res, reeb_res, defining, du_vanish])
}

// ---------------------------------------------------------------------------
// splitting

fn suite_splitting(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut trackers = vec![
        Tracker::new(
            "splitting_rho_slot",
            "t_hat = (rho, mu - theta(rho) Upsilon_E): rho slot in theta_hat units",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "splitting_mu_slot",
            "t_hat = (rho, mu - theta(rho) Upsilon_E): E slot",
            opts.tol(1e-9),
        ),
    ];
    for p in points {
        for u in &loaded.rescalings {
            for t in &loaded.tractors {
                match splitting_point(loaded, &u.field, &t.field, p, opts.order) {
                    Ok([r, mu]) => {
                        trackers[0].observe(r, p);
                        trackers[1].observe(mu, p);
                    }
                    Err(_) => observe_all(&mut trackers, p),
                }
            }
        }
    }
    finish(trackers)
}

fn splitting_point(
    loaded: &Loaded,
    u: &ScalarField,
    t: &VectorField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 2]> {
    let pair = pair_at(loaded, u, p, order)?;
    let tj = t.eval(&pair.base.seeds)?;
    let direct = pair.hat.split_tractor(&tj)?;
    let converted = change_splitting(
        &pair.base.split_tractor(&tj)?,
        &pair.u_jet,
        pair.upsilon.e_coeffs(),
    );
    let rho_res = (direct.rho.value() - converted.rho.value()).abs();
    let mut mu_res: f64 = 0.0;
    for (a, b) in direct.mu.iter().zip(&converted.mu) {
        mu_res = mu_res.max((a.value() - b.value()).abs());
    }
    Ok([rho_res, mu_res])
}

// ---------------------------------------------------------------------------
// bracket-reeb

fn suite_bracket_reeb(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut trackers = vec![
        Tracker::new(
            "bracket_reeb_full",
            "[xi, r_hat] = e^{-u}([xi, r + Upsilon] - du(xi)(r + Upsilon))",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "bracket_reeb_e_part",
            "[xi, r_hat]_E = e^{-u}[xi, r]_E + e^{-u} dtheta(xi, Upsilon) Upsilon_E + e^{-u}([xi, Upsilon] - theta([xi, Upsilon]) r)_E",
            opts.tol(1e-9),
        ),
    ];
    for p in points {
        for u in &loaded.rescalings {
            match bracket_reeb_point(loaded, &u.field, p, opts.order) {
                Ok([full, e_part]) => {
                    trackers[0].observe(full, p);
                    trackers[1].observe(e_part, p);
                }
                Err(_) => observe_all(&mut trackers, p),
            }
        }
    }
    finish(trackers)
}

fn bracket_reeb_point(
    loaded: &Loaded,
    u: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 2]> {
    let pair = pair_at(loaded, u, p, order)?;
    let mut full: f64 = 0.0;
    let mut e_part: f64 = 0.0;
    for a in 0..pair.base.rank() {
        let r = verify_reeb_bracket(&pair, a)?;
        full = full.max(r.full);
        e_part = e_part.max(r.e_part);
    }
    Ok([full, e_part])
}

// ---------------------------------------------------------------------------
// connections

fn suite_connections(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut law_trackers = vec![
        Tracker::new(
            "connections_nabla_e_transform",
            "nabla^E_hat_xi eta = nabla^E_xi eta + dtheta(xi, eta) Upsilon_E",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "connections_nabla_q_transform",
            "nabla^Q_hat_xi rho = nabla^Q_xi rho + du(xi) rho",
            opts.tol(1e-9),
        ),
    ];
    let mut base_trackers = vec![
        Tracker::new(
            "connections_nabla_e_leibniz",
            "nabla^E_xi(f eta) = f nabla^E_xi eta + (xi.f) eta",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "connections_nabla_q_leibniz",
            "nabla^Q_xi(f rho) = (xi.f) rho + f nabla^Q_xi rho",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "connections_nabla_e_tensorial",
            "nabla^E_{f xi} eta = f nabla^E_xi eta",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "connections_nabla_q_tensorial",
            "nabla^Q_{f xi} rho = f nabla^Q_xi rho",
            opts.tol(1e-9),
        ),
        Tracker::new(
            "connections_nabla_e_both_paths",
            "dtheta(nabla^E_xi eta, F_b) = dtheta([xi, eta], F_b)",
            opts.tol(1e-9),
        ),
    ];
    let test_f = test_function(loaded);
    for p in points {
        for u in &loaded.rescalings {
            match connections_laws_point(loaded, &u.field, p, opts.order) {
                Ok([e_law, q_law]) => {
                    law_trackers[0].observe(e_law, p);
                    law_trackers[1].observe(q_law, p);
                }
                Err(_) => observe_all(&mut law_trackers, p),
            }
        }
        match connections_base_point(loaded, &test_f, p, opts.order) {
            Ok(r) => {
                for (t, v) in base_trackers.iter_mut().zip(r) {
                    t.observe(v, p);
                }
            }
            Err(_) => observe_all(&mut base_trackers, p),
        }
    }
    law_trackers.extend(base_trackers);
    finish(law_trackers)
}

fn connections_laws_point(
    loaded: &Loaded,
    u: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 2]> {
    let pair = pair_at(loaded, u, p, order)?;
    let rhos = loaded
        .qsections
        .iter()
        .map(|q| q.field.eval(&pair.base.seeds))
        .collect::<Result<Vec<_>>>()?;
    let laws = verify_transformation_laws(&pair, &rhos)?;
    Ok([laws.e_law, laws.q_law])
}

fn connections_base_point(
    loaded: &Loaded,
    test_f: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 5]> {
    let st = base_at(loaded, p, order)?;
    let fj = test_f.eval(&st.seeds)?;
    let n = st.rank();
    let mut leib_e: f64 = 0.0;
    let mut leib_q: f64 = 0.0;
    let mut tens_e: f64 = 0.0;
    let mut tens_q: f64 = 0.0;
    let mut both: f64 = 0.0;
    let rhos = loaded
        .qsections
        .iter()
        .map(|q| q.field.eval(&st.seeds))
        .collect::<Result<Vec<_>>>()?;
    for a in 0..n {
        let xi = &st.f[a];
        let f_xi = xi.scale(&fj);
        let xi_f = dir_deriv(&fj, xi)?.value();
        for b in 0..n {
            let eta = &st.e[b];
            let ne = nabla_e(&st, xi, eta)?;
            both = both.max(ne.cross_residual);

            let lhs = nabla_e(&st, xi, &eta.scale(&fj))?.coeffs;
            for c in 0..n {
                let delta = if b == c { 1.0 } else { 0.0 };
                let rhs = fj.value() * ne.coeffs[c].value() + xi_f * delta;
                leib_e = leib_e.max((lhs[c].value() - rhs).abs());
            }

            let scaled = nabla_e(&st, &f_xi, eta)?.coeffs;
            for c in 0..n {
                tens_e = tens_e.max((scaled[c].value() - fj.value() * ne.coeffs[c].value()).abs());
            }
        }
        for g in &rhos {
            let base = nabla_q(&st, xi, g)?.value();
            let lhs = nabla_q(&st, xi, &(&fj.truncated(g.order().min(fj.order()))
                * &g.truncated(g.order().min(fj.order()))))?
            .value();
            leib_q = leib_q.max((lhs - (xi_f * g.value() + fj.value() * base)).abs());
            let scaled = nabla_q(&st, &f_xi, g)?.value();
            tens_q = tens_q.max((scaled - fj.value() * base).abs());
        }
    }
    Ok([leib_e, leib_q, tens_e, tens_q, both])
}

// ---------------------------------------------------------------------------
// tractor

fn suite_tractor(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut inv = Tracker::new(
        "tractor_invariance",
        "(nabla_xi t) in the theta_hat splitting = converted (nabla_xi t) from the theta splitting",
        opts.tol(1e-8),
    );
    let mut inv_defect = Tracker::new(
        "tractor_invariance_defect",
        "two-path difference = (0, theta(t) [xi, Upsilon_F]_E) exactly",
        opts.tol(1e-9),
    );
    let mut tens = Tracker::new(
        "tractor_tensorial",
        "nabla_{f xi} t = f nabla_xi t",
        opts.tol(1e-9),
    );
    let mut leib = Tracker::new(
        "tractor_leibniz",
        "nabla_xi(f t) = f nabla_xi t + (xi.f) (t)_theta",
        opts.tol(1e-9),
    );
    let test_f = test_function(loaded);
    for p in points {
        for u in &loaded.rescalings {
            for t in &loaded.tractors {
                match tractor_invariance_point(loaded, &u.field, &t.field, p, opts.order) {
                    Ok([r, d]) => {
                        inv.observe(r, p);
                        inv_defect.observe(d, p);
                    }
                    Err(_) => {
                        inv.observe_error(p);
                        inv_defect.observe_error(p);
                    }
                }
            }
        }
        match tractor_base_point(loaded, &test_f, p, opts.order) {
            Ok([t, l]) => {
                tens.observe(t, p);
                leib.observe(l, p);
            }
            Err(_) => {
                tens.observe_error(p);
                leib.observe_error(p);
            }
        }
    }
    finish(vec![inv, inv_defect, tens, leib])
}

fn tractor_invariance_point(
    loaded: &Loaded,
    u: &ScalarField,
    t: &VectorField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 2]> {
    let pair = pair_at(loaded, u, p, order)?;
    let tj = t.eval(&pair.base.seeds)?;
    Ok([
        crate::connect::verify_tractor_invariance(&pair, &tj)?,
        crate::connect::tractor_invariance_defect(&pair, &tj)?,
    ])
}

fn tractor_base_point(
    loaded: &Loaded,
    test_f: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 2]> {
    let st = base_at(loaded, p, order)?;
    let fj = test_f.eval(&st.seeds)?;
    let mut tens: f64 = 0.0;
    let mut leib: f64 = 0.0;
    for t in &loaded.tractors {
        let tj = t.field.eval(&st.seeds)?;
        for a in 0..st.rank() {
            let xi = &st.f[a];
            let conn = tractor_connection(&st, xi, &tj)?;

            let scaled = tractor_connection(&st, &xi.scale(&fj), &tj)?;
            tens = tens.max((scaled.rho.value() - fj.value() * conn.rho.value()).abs());
            for c in 0..st.rank() {
                tens = tens.max((scaled.mu[c].value() - fj.value() * conn.mu[c].value()).abs());
            }

            let lhs = tractor_connection(&st, xi, &tj.scale(&fj))?;
            let sp = st.split_tractor(&tj)?;
            let xi_f = dir_deriv(&fj, xi)?.value();
            leib = leib.max(
                (lhs.rho.value() - (fj.value() * conn.rho.value() + xi_f * sp.rho.value())).abs(),
            );
            for c in 0..st.rank() {
                leib = leib.max(
                    (lhs.mu[c].value()
                        - (fj.value() * conn.mu[c].value() + xi_f * sp.mu[c].value()))
                    .abs(),
                );
            }
        }
    }
    Ok([tens, leib])
}

// ---------------------------------------------------------------------------
// bott

fn suite_bott(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let noninvolutive = f_is_noninvolutive(loaded, &points[0], opts.order);
    if noninvolutive {
        let mut refusal = Tracker::new(
            "bott_refusal",
            "non-involutive F has no Bott connection",
            opts.tol(0.0),
        );
        for p in points {
            match bott_refusal_point(loaded, p, opts.order) {
                Ok(r) => refusal.observe(r, p),
                Err(_) => refusal.observe_error(p),
            }
        }
        return finish(vec![refusal]);
    }
    let mut agree = Tracker::new(
        "bott_agreement",
        "nabla^B_xi t = nabla_xi t for involutive F",
        opts.tol(1e-9),
    );
    for p in points {
        match bott_agreement_point(loaded, p, opts.order) {
            Ok(r) => agree.observe(r, p),
            Err(_) => agree.observe_error(p),
        }
    }
    finish(vec![agree])
}

fn bott_agreement_point(loaded: &Loaded, p: &[f64], order: usize) -> Result<f64> {
    let st = base_at(loaded, p, order)?;
    let mut worst: f64 = 0.0;
    for t in &loaded.tractors {
        let tj = t.field.eval(&st.seeds)?;
        for a in 0..st.rank() {
            let bott = bott_connection(&st, a, &tj)?;
            let conn = tractor_connection(&st, &st.f[a].clone(), &tj)?;
            worst = worst.max(bott.max_value_diff(&conn));
        }
    }
    Ok(worst)
}

fn bott_refusal_point(loaded: &Loaded, p: &[f64], order: usize) -> Result<f64> {
    let st = base_at(loaded, p, order)?;
    let tj = st.reeb.clone();
    match bott_connection(&st, 0, &tj) {
        Err(Error::NonInvolutive { .. }) => Ok(0.0),
        // A borderline point that happens to be involutive is not a failure
        // of the refusal contract.
        Ok(_) => {
            let max_res = st
                .f_involutivity()?
                .into_iter()
                .fold(0.0f64, |m, (_, r)| m.max(r));
            if max_res <= 1e-9 {
                Ok(0.0)
            } else {
                Ok(f64::MAX)
            }
        }
        Err(_) => Ok(f64::MAX),
    }
}

// ---------------------------------------------------------------------------
// codiff-S

fn suite_codiff(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut trackers = vec![
        Tracker::new(
            "codiff_upper_slot",
            "upper slot of nabla S(rho) = 0",
            opts.tol(1e-9),
        ),
        Tracker::new("codiff_nabla_s", "partial* nabla S(rho) = 0", opts.tol(1e-9)),
        Tracker::new(
            "codiff_splitting_form",
            "dtheta(mu, F_a) = -F_a . theta(rho)",
            opts.tol(1e-10),
        ),
        Tracker::new(
            "codiff_roundtrip",
            "L(partial* Phi, F_a) reproduces the rho slot of Phi_a",
            opts.tol(1e-12),
        ),
        Tracker::new(
            "codiff_linearity",
            "partial*(Phi + Psi) = partial* Phi + partial* Psi",
            opts.tol(1e-12),
        ),
    ];
    for p in points {
        match codiff_point(loaded, p, opts.order) {
            Ok(r) => {
                for (t, v) in trackers.iter_mut().zip(r) {
                    t.observe(v, p);
                }
            }
            Err(_) => observe_all(&mut trackers, p),
        }
    }
    finish(trackers)
}

fn codiff_point(loaded: &Loaded, p: &[f64], order: usize) -> Result<[f64; 5]> {
    let st = base_at(loaded, p, order)?;
    let n = st.rank();
    let gjets = loaded
        .qsections
        .iter()
        .map(|q| q.field.eval(&st.seeds))
        .collect::<Result<Vec<_>>>()?;

    let mut upper: f64 = 0.0;
    let mut codiff: f64 = 0.0;
    let mut form: f64 = 0.0;
    for g in &gjets {
        let r = codiff_of_nabla_s(&st, g)?;
        upper = upper.max(r.upper_slot);
        codiff = codiff.max(r.codiff);
        let s = splitting_operator(&st, g)?;
        form = form.max(splitting_defect(&st, &s)?);
    }

    // Round-trip and linearity of ∂* on synthetic F*⊗(TM/F) elements.
    let zero_mu = vec![Jet::constant(st.dim(), st.seeds[0].order(), 0.0); n];
    let mk = |offset: usize| -> Vec<SplitTractor> {
        (0..n)
            .map(|a| SplitTractor {
                rho: gjets[(a + offset) % gjets.len()].clone(),
                mu: zero_mu.clone(),
                tag: st.tag,
            })
            .collect()
    };
    let phi = mk(0);
    let psi = mk(1);
    let cod_phi = kostant_codiff(&st, &phi)?;
    let eta = st.e_combination(&cod_phi.mu);
    let mut roundtrip: f64 = 0.0;
    for (a, fa) in st.f.iter().enumerate() {
        let back = -st.dtheta_of(&eta, fa).value();
        roundtrip = roundtrip.max((back - phi[a].rho.value()).abs());
    }
    let cod_psi = kostant_codiff(&st, &psi)?;
    let sum: Vec<SplitTractor> = phi
        .iter()
        .zip(&psi)
        .map(|(a, b)| {
            let (x, y) = aligned(&a.rho, &b.rho);
            SplitTractor {
                rho: &x + &y,
                mu: zero_mu.clone(),
                tag: st.tag,
            }
        })
        .collect();
    let cod_sum = kostant_codiff(&st, &sum)?;
    let mut linearity: f64 = 0.0;
    for c in 0..n {
        let lin = cod_phi.mu[c].value() + cod_psi.mu[c].value();
        linearity = linearity.max((cod_sum.mu[c].value() - lin).abs());
    }
    Ok([upper, codiff, form, roundtrip, linearity])
}

// ---------------------------------------------------------------------------
// rho

fn suite_rho(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
) -> Result<Vec<PropertyRecord>> {
    let mut tens = Tracker::new("rho_tensoriality", "P(f xi) = f P(xi)", opts.tol(1e-9));
    let c0 = &loaded.chart.names()[0];
    let c1 = &loaded.chart.names()[1];
    let fs = [
        ScalarField::from_expr(c0, &loaded.chart)?,
        ScalarField::from_expr(&format!("{c0}*{c1}"), &loaded.chart)?,
    ];
    for p in points {
        match rho_point(loaded, &fs, p, opts.order) {
            Ok(r) => tens.observe(r, p),
            Err(_) => tens.observe_error(p),
        }
    }
    finish(vec![tens])
}

fn rho_point(loaded: &Loaded, fs: &[ScalarField], p: &[f64], order: usize) -> Result<f64> {
    let st = base_at(loaded, p, order)?;
    let rho = crate::bgg::rho_tensor(&st)?;
    let mut worst: f64 = 0.0;
    for f in fs {
        let fj = f.eval(&st.seeds)?;
        for a in 0..st.rank() {
            let scaled = st.f[a].scale(&fj);
            let br = crate::fields::lie_bracket(&scaled, &st.reeb)?;
            let lhs = st.decompose(&br)?.e;
            for b in 0..st.rank() {
                let want = fj.value() * rho.entries[a][b].value();
                worst = worst.max((lhs[b].value() - want).abs());
            }
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// bgg

fn suite_bgg(
    loaded: &Loaded,
    opts: &SuiteOptions,
    points: &[Vec<f64>],
    sampler: &mut BoxSampler,
) -> Result<Vec<PropertyRecord>> {
    let noninvolutive = f_is_noninvolutive(loaded, &points[0], opts.order);
    let deep_tol = if noninvolutive { 1e-7 } else { 1e-8 };
    let mut sym = Tracker::new("bgg_symmetry", "D_ab = D_ba", opts.tol(deep_tol));
    let mut defect = Tracker::new(
        "bgg_symmetry_defect",
        "D_ab - D_ba = ([F_a, F_b]_E) . theta(rho)",
        opts.tol(1e-9),
    );
    let mut cross = Tracker::new(
        "bgg_cross_formula",
        "nabla^E nabla^Q rho + theta(rho) P = -dtheta([F_a, mu] + theta(rho) [F_a, r], F_b)",
        opts.tol(1e-9),
    );
    let mut five = Tracker::new(
        "bgg_five_term",
        "0 = dtheta([xi1, z], xi2) - dtheta([xi2, z], xi1) + xi2.dtheta(z, xi1) - xi1.dtheta(z, xi2) - dtheta([xi1, xi2], z)",
        opts.tol(1e-9),
    );
    let mut linearity = Tracker::new(
        "bgg_linearity",
        "D(rho1 + rho2) = D(rho1) + D(rho2)",
        opts.tol(1e-10),
    );
    let mut invariance = Tracker::new(
        "bgg_invariance",
        "e^{-u} D_hat(rho) = D(rho)",
        opts.tol(deep_tol),
    );
    let mut inv_defect = Tracker::new(
        "bgg_invariance_defect",
        "e^{-u} D_hat_ab - D_ab = -theta(rho) dtheta([F_a, Upsilon_F], F_b) exactly",
        opts.tol(1e-9),
    );

    // Random polynomial field for the d²θ = 0 identity, drawn from the tail
    // of the suite's deterministic stream.
    let names = loaded.chart.names();
    let zeta_texts: Vec<String> = (0..loaded.chart.dim())
        .map(|_| {
            let a = sampler.coefficient(-1.0, 1.0);
            let b = sampler.coefficient(-1.0, 1.0);
            let c = sampler.coefficient(-1.0, 1.0);
            format!(
                "{a:?} + {b:?}*{} + {c:?}*{}*{}",
                names[0],
                names[1],
                names[names.len() - 1]
            )
        })
        .collect();
    let zeta_field = VectorField::from_exprs(&zeta_texts, &loaded.chart)?;

    for p in points {
        match bgg_point(loaded, &zeta_field, p, opts.order) {
            Ok(r) => {
                sym.observe(r[0], p);
                defect.observe(r[1], p);
                cross.observe(r[2], p);
                five.observe(r[3], p);
                linearity.observe(r[4], p);
            }
            Err(_) => {
                for t in [&mut sym, &mut defect, &mut cross, &mut five, &mut linearity] {
                    t.observe_error(p);
                }
            }
        }
        for u in &loaded.rescalings {
            match bgg_invariance_point(loaded, &u.field, p, opts.order) {
                Ok([r, d]) => {
                    invariance.observe(r, p);
                    inv_defect.observe(d, p);
                }
                Err(_) => {
                    invariance.observe_error(p);
                    inv_defect.observe_error(p);
                }
            }
        }
    }
    finish(vec![
        sym, defect, cross, five, linearity, invariance, inv_defect,
    ])
}

fn bgg_point(
    loaded: &Loaded,
    zeta_field: &VectorField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 5]> {
    let st = base_at(loaded, p, order)?;
    let gjets = loaded
        .qsections
        .iter()
        .map(|q| q.field.eval(&st.seeds))
        .collect::<Result<Vec<_>>>()?;

    let mut sym: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let mut cross: f64 = 0.0;
    let mut values = Vec::with_capacity(gjets.len());
    for g in &gjets {
        let d = bgg_d(&st, g)?;
        sym = sym.max(d.symmetry_residual());
        defect = defect.max(symmetry_defect_residual(&st, &d, g)?);
        cross = cross.max(d.cross_residual);
        values.push(d);
    }

    // ζ ∈ {r, μ of the first section, random polynomial field}.
    let mut five: f64 = five_term_residual(&st, &st.reeb.clone())?;
    let mu_vec = st.e_combination(&values[0].splitting.mu);
    five = five.max(five_term_residual(&st, &mu_vec)?);
    let zeta = zeta_field.eval(&st.seeds)?;
    five = five.max(five_term_residual(&st, &zeta)?);

    let mut linearity: f64 = 0.0;
    if gjets.len() >= 2 {
        for i in 0..gjets.len() - 1 {
            let (a, b) = aligned(&gjets[i], &gjets[i + 1]);
            let d_sum = bgg_d(&st, &(&a + &b))?;
            for row in 0..st.rank() {
                for col in 0..st.rank() {
                    let lin = values[i].value(row, col) + values[i + 1].value(row, col);
                    linearity = linearity.max((d_sum.value(row, col) - lin).abs());
                }
            }
        }
    }
    Ok([sym, defect, cross, five, linearity])
}

fn bgg_invariance_point(
    loaded: &Loaded,
    u: &ScalarField,
    p: &[f64],
    order: usize,
) -> Result<[f64; 2]> {
    let pair = pair_at(loaded, u, p, order)?;
    let mut worst: f64 = 0.0;
    let mut worst_defect: f64 = 0.0;
    for q in &loaded.qsections {
        let g = q.field.eval(&pair.base.seeds)?;
        worst = worst.max(d_invariance_residual(&pair, &g)?);
        worst_defect = worst_defect.max(crate::bgg::d_invariance_defect(&pair, &g)?);
    }
    Ok([worst, worst_defect])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::examples::builtin;

    fn quick_opts() -> SuiteOptions {
        SuiteOptions {
            points: 8,
            seed: 7,
            order: 2,
            tol_override: None,
        }
    }

    #[test]
    fn structure_suite_passes_on_darboux3() {
        let loaded = builtin("darboux3").unwrap();
        let rep = run_suite(&loaded, "structure", &quick_opts()).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let loaded = builtin("darboux3").unwrap();
        assert!(matches!(
            run_suite(&loaded, "nope", &quick_opts()),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn impossible_tolerance_fails_with_finite_residuals() {
        let loaded = builtin("darboux3").unwrap();
        let opts = SuiteOptions {
            tol_override: Some(1e-20),
            ..quick_opts()
        };
        let rep = run_suite(&loaded, "structure", &opts).unwrap();
        assert!(!rep.pass);
        assert!(rep
            .properties
            .iter()
            .all(|p| p.max_residual.is_finite()));
    }

    #[test]
    fn all_is_the_union_of_the_suites() {
        let loaded = builtin("darboux3").unwrap();
        let opts = quick_opts();
        let all = run_suite(&loaded, "all", &opts).unwrap();
        let mut concat = Vec::new();
        for name in SUITE_NAMES {
            concat.extend(run_suite(&loaded, name, &opts).unwrap().properties);
        }
        assert_eq!(all.properties.len(), concat.len());
        for (a, b) in all.properties.iter().zip(&concat) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.max_residual, b.max_residual);
            assert_eq!(a.pass, b.pass);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let loaded = builtin("darboux5").unwrap();
        let opts = quick_opts();
        let a = run_suite(&loaded, "reeb-upsilon", &opts).unwrap().to_json();
        let b = run_suite(&loaded, "reeb-upsilon", &opts).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn bott_refuses_on_twisted5_and_agrees_on_darboux5() {
        let opts = quick_opts();
        let rep = run_suite(&builtin("twisted5").unwrap(), "bott", &opts).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.properties[0].name, "bott_refusal");
        let rep = run_suite(&builtin("darboux5").unwrap(), "bott", &opts).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.properties[0].name, "bott_agreement");
    }
}
