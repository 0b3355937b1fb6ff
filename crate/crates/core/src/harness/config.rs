//! Structure-definition files: a small TOML format describing the chart, the
//! contact form, the Legendrean frames, the sample box, and optional test
//! sections. Loading validates the structural invariants (contact condition,
//! horizontality, isotropy, frame independence) at 16 deterministic probe
//! points before anything else may run.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::contact::{evaluate, ContactStructure, LegendreanSplitting};
use crate::error::{Error, Result};
use crate::fields::{Chart, OneForm, ScalarField, VectorField};
use crate::harness::sample::BoxSampler;

const PROBE_SEED: u64 = 0x5eed_cafe;
const PROBE_COUNT: usize = 16;
const STRUCTURAL_TOL: f64 = 1e-10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    manifold: ManifoldSection,
    contact: ContactSection,
    splitting: SplittingSection,
    sample: SampleSection,
    rescale: Option<RescaleSection>,
    sections: Option<SectionsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldSection {
    coords: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContactSection {
    theta: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplittingSection {
    #[serde(rename = "E")]
    e: Vec<Vec<String>>,
    #[serde(rename = "F")]
    f: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSection {
    #[serde(rename = "box")]
    bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RescaleSection {
    u: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionsSection {
    qsec: Option<Vec<String>>,
    tsec: Option<Vec<Vec<String>>>,
}

/// A scalar test field together with its source text (for reports).
#[derive(Debug, Clone)]
pub struct NamedScalar {
    pub text: String,
    pub field: ScalarField,
}

/// A vector test field together with its component texts.
#[derive(Debug, Clone)]
pub struct NamedVector {
    pub texts: Vec<String>,
    pub field: VectorField,
}

/// A fully validated structure, ready for suites and pointwise evaluation.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub name: Option<String>,
    pub chart: Arc<Chart>,
    pub contact: ContactStructure,
    pub splitting: LegendreanSplitting,
    /// Rescaling log-factors u for the invariance suites.
    pub rescalings: Vec<NamedScalar>,
    /// Q-sections as θ(ρ) scalars.
    pub qsections: Vec<NamedScalar>,
    /// Test sections of TM/F, as representative vector fields.
    pub tractors: Vec<NamedVector>,
}

pub fn load_config(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    load_config_str(&text)
}

pub fn load_config_str(text: &str) -> Result<Loaded> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("{}", e.message_with_lines())))?;
    build(file)
}

trait TomlErrorExt {
    fn message_with_lines(&self) -> String;
}

impl TomlErrorExt for toml::de::Error {
    fn message_with_lines(&self) -> String {
        // toml's Display already reports "TOML parse error at line N, column M".
        format!("{self}")
    }
}

fn build(file: ConfigFile) -> Result<Loaded> {
    let chart = Chart::new(file.manifold.coords, file.sample.bounds)?;
    let m = chart.dim();
    let n = chart.rank();

    if file.contact.theta.len() != m {
        return Err(Error::Config(format!(
            "theta has {} components for {m} coordinates",
            file.contact.theta.len()
        )));
    }
    let theta = OneForm::from_exprs(&file.contact.theta, &chart)?;
    let contact = ContactStructure::new(chart.clone(), theta)?;

    let frames = |rows: &[Vec<String>], which: &str| -> Result<Vec<VectorField>> {
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != m {
                    return Err(Error::Config(format!(
                        "{which} frame row {i} has {} components for {m} coordinates",
                        row.len()
                    )));
                }
                VectorField::from_exprs(row, &chart)
            })
            .collect()
    };
    if file.splitting.e.len() != n || file.splitting.f.len() != n {
        return Err(Error::Config(format!(
            "splitting needs {n} rows per subbundle on a {m}-dimensional chart, got {} and {}",
            file.splitting.e.len(),
            file.splitting.f.len()
        )));
    }
    let splitting = LegendreanSplitting::new(
        frames(&file.splitting.e, "E")?,
        frames(&file.splitting.f, "F")?,
        &chart,
    )?;

    let scalar_list = |texts: Vec<String>| -> Result<Vec<NamedScalar>> {
        texts
            .into_iter()
            .map(|text| {
                let field = ScalarField::from_expr(&text, &chart)?;
                Ok(NamedScalar { text, field })
            })
            .collect()
    };
    let rescalings = match file.rescale {
        Some(r) => scalar_list(r.u)?,
        None => scalar_list(default_rescalings(&chart))?,
    };
    let (qsec_texts, tsec_rows) = match file.sections {
        Some(s) => (s.qsec, s.tsec),
        None => (None, None),
    };
    let qsections = scalar_list(qsec_texts.unwrap_or_else(|| default_qsections(&chart)))?;
    let tractors = tsec_rows
        .unwrap_or_else(|| default_tractors(&chart))
        .into_iter()
        .enumerate()
        .map(|(i, texts)| {
            if texts.len() != m {
                return Err(Error::Config(format!(
                    "tractor section {i} has {} components for {m} coordinates",
                    texts.len()
                )));
            }
            let field = VectorField::from_exprs(&texts, &chart)?;
            Ok(NamedVector { texts, field })
        })
        .collect::<Result<Vec<_>>>()?;

    let loaded = Loaded {
        name: None,
        chart,
        contact,
        splitting,
        rescalings,
        qsections,
        tractors,
    };
    validate_structure(&loaded)?;
    Ok(loaded)
}

fn default_rescalings(chart: &Chart) -> Vec<String> {
    let c0 = &chart.names()[0];
    let c1 = &chart.names()[1];
    vec![
        c0.clone(),
        format!("{c0}*{c1}"),
        format!("0.3*sin({c0})*{c1}"),
    ]
}

fn default_qsections(chart: &Chart) -> Vec<String> {
    let c0 = &chart.names()[0];
    let c1 = &chart.names()[1];
    let last = chart.names().last().expect("nonempty chart");
    vec![
        "1".to_string(),
        format!("{c0}^2"),
        format!("{c0}*{c1} - 0.5*{last}"),
    ]
}

fn default_tractors(chart: &Chart) -> Vec<Vec<String>> {
    let m = chart.dim();
    let unit_last: Vec<String> = (0..m)
        .map(|i| if i + 1 == m { "1" } else { "0" }.to_string())
        .collect();
    let ones: Vec<String> = (0..m).map(|_| "1".to_string()).collect();
    let rotated: Vec<String> = (0..m)
        .map(|i| chart.names()[(i + 1) % m].clone())
        .collect();
    vec![unit_last, ones, rotated]
}

/// Structural validation at deterministic probe points.
fn validate_structure(loaded: &Loaded) -> Result<()> {
    let mut sampler = BoxSampler::new(loaded.chart.bounds(), PROBE_SEED);
    for _ in 0..PROBE_COUNT {
        let p = sampler.next_point();
        let st = evaluate(&loaded.contact, &loaded.splitting, &p, 2).map_err(|e| match e {
            Error::NotContact { detail, .. } => Error::Validation {
                invariant: "contact-condition".into(),
                point: p.clone(),
                residual: f64::INFINITY,
            }
            .tagged(detail),
            Error::DegenerateFrame { cond, .. } => Error::Validation {
                invariant: "frame-independence".into(),
                point: p.clone(),
                residual: cond,
            },
            other => other,
        })?;
        if st.reeb_residual > STRUCTURAL_TOL {
            return Err(Error::Validation {
                invariant: "reeb-residual".into(),
                point: p,
                residual: st.reeb_residual,
            });
        }
        for (label, frames) in [("E", &st.e), ("F", &st.f)] {
            for v in frames.iter() {
                let r = st.theta_of(v).value().abs();
                if r > STRUCTURAL_TOL {
                    return Err(Error::Validation {
                        invariant: format!("theta-horizontality-{label}"),
                        point: p,
                        residual: r,
                    });
                }
            }
            for (i, a) in frames.iter().enumerate() {
                for b in frames.iter().skip(i + 1) {
                    let r = st.dtheta_of(a, b).value().abs();
                    if r > STRUCTURAL_TOL {
                        return Err(Error::Validation {
                            invariant: format!("dtheta-isotropy-{label}"),
                            point: p,
                            residual: r,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

impl Error {
    /// Append a detail string to a validation message (keeps the variant).
    fn tagged(self, detail: String) -> Error {
        match self {
            Error::Validation {
                invariant,
                point,
                residual,
            } => Error::Validation {
                invariant: format!("{invariant} ({detail})"),
                point,
                residual,
            },
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[manifold]
coords = ["x", "y", "z"]

[contact]
theta = ["-y", "0", "1"]

[splitting]
E = [["0", "1", "0"]]
F = [["1", "0", "y"]]

[sample]
box = [[-1, 1], [-1, 1], [-1, 1]]
"#;

    #[test]
    fn minimal_config_loads_with_defaults() {
        let loaded = load_config_str(MINIMAL).unwrap();
        assert_eq!(loaded.chart.dim(), 3);
        assert_eq!(loaded.rescalings.len(), 3);
        assert_eq!(loaded.qsections.len(), 3);
        assert_eq!(loaded.tractors.len(), 3);
        assert_eq!(loaded.tractors[0].texts, vec!["0", "0", "1"]);
    }

    #[test]
    fn equal_frames_fail_validation() {
        let text = MINIMAL.replace("E = [[\"0\", \"1\", \"0\"]]", "E = [[\"1\", \"0\", \"y\"]]");
        match load_config_str(&text) {
            Err(Error::Validation { invariant, .. }) => {
                assert!(invariant.contains("frame-independence") || invariant.contains("contact"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn non_contact_theta_fails_validation() {
        let text = MINIMAL.replace("theta = [\"-y\", \"0\", \"1\"]", "theta = [\"0\", \"0\", \"1\"]");
        match load_config_str(&text) {
            Err(Error::Validation { invariant, .. }) => {
                assert!(invariant.contains("contact-condition"));
            }
            other => panic!("expected contact validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_information() {
        let text = "[manifold]\ncoords = [\"x\", \"y\"\n";
        match load_config_str(text) {
            Err(Error::Config(msg)) => assert!(msg.contains("line"), "message: {msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn bad_expression_is_rejected_with_offset() {
        let text = MINIMAL.replace("\"-y\"", "\"-y +\"");
        assert!(matches!(load_config_str(&text), Err(Error::Syntax { .. })));
    }

    #[test]
    fn component_counts_are_checked() {
        let text = MINIMAL.replace("theta = [\"-y\", \"0\", \"1\"]", "theta = [\"-y\", \"0\"]");
        assert!(matches!(load_config_str(&text), Err(Error::Config(_))));
        let text = MINIMAL.replace(
            "coords = [\"x\", \"y\", \"z\"]",
            "coords = [\"x\", \"y\", \"z\", \"w\"]",
        );
        assert!(matches!(load_config_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[extra]\nfoo = 1\n");
        assert!(matches!(load_config_str(&text), Err(Error::Config(_))));
    }
}
