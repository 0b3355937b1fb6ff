//! Suite reports: per-property residual records with a text rendering and a
//! byte-stable machine-readable rendering.

/// One verified property: its residual aggregated over all sample points.
#[derive(Debug, Clone)]
pub struct PropertyRecord {
    pub name: String,
    /// The identity the property checks, as a formula.
    pub anchor: String,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub points: usize,
    pub order: usize,
    pub properties: Vec<PropertyRecord>,
    pub pass: bool,
    /// Wall-clock duration. Shown in the text rendering only; the JSON
    /// rendering pins this field to 0 so reports are byte-stable for a fixed
    /// config and seed.
    pub duration_ms: u64,
}

impl SuiteReport {
    pub fn from_properties(
        suite: &str,
        seed: u64,
        points: usize,
        order: usize,
        properties: Vec<PropertyRecord>,
        duration_ms: u64,
    ) -> SuiteReport {
        let pass = properties.iter().all(|p| p.pass);
        SuiteReport {
            suite: suite.to_string(),
            seed,
            points,
            order,
            properties,
            pass,
            duration_ms,
        }
    }

    /// Machine-readable rendering: fixed key order, floats with 17
    /// significant digits, `duration_ms` pinned to 0 for reproducibility.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(256 + 256 * self.properties.len());
        out.push_str("{\"suite\":");
        push_json_string(&mut out, &self.suite);
        out.push_str(&format!(
            ",\"seed\":{},\"points\":{},\"order\":{},\"properties\":[",
            self.seed, self.points, self.order
        ));
        for (i, p) in self.properties.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"name\":");
            push_json_string(&mut out, &p.name);
            out.push_str(",\"paper_anchor\":");
            push_json_string(&mut out, &p.anchor);
            out.push_str(",\"max_residual\":");
            out.push_str(&fmt_f64(p.max_residual));
            out.push_str(",\"tol\":");
            out.push_str(&fmt_f64(p.tol));
            out.push_str(",\"pass\":");
            out.push_str(if p.pass { "true" } else { "false" });
            out.push_str(",\"worst_point\":[");
            for (j, x) in p.worst_point.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_f64(*x));
            }
            out.push_str("]}");
        }
        out.push_str(",\"pass\":");
        out.push_str(if self.pass { "true" } else { "false" });
        out.push_str(",\"duration_ms\":0}");
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "suite: {}  (seed {}, {} points, jet order {})\n",
            self.suite, self.seed, self.points, self.order
        );
        let width = self
            .properties
            .iter()
            .map(|p| p.name.len())
            .max()
            .unwrap_or(0);
        for p in &self.properties {
            out.push_str(&format!(
                "  {}  {:width$}  max residual {:>12.5e}  tol {:>9.1e}",
                if p.pass { "PASS" } else { "FAIL" },
                p.name,
                p.max_residual,
                p.tol,
            ));
            if !p.pass && !p.worst_point.is_empty() {
                out.push_str(&format!("  worst at {:?}", p.worst_point));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "overall: {} ({} properties, {} ms)\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.properties.len(),
            self.duration_ms
        ));
        out
    }
}

/// 17 significant digits, round-trip exact for f64.
fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        // NaN cannot appear in a JSON number; residual trackers clamp to MAX
        // before this point, this is a last resort.
        fmt_f64(f64::MAX)
    } else if x > 0.0 {
        fmt_f64(f64::MAX)
    } else {
        fmt_f64(f64::MIN)
    }
}

fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Residual aggregation for one property over the sampled points.
pub(crate) struct Tracker {
    name: String,
    anchor: String,
    tol: f64,
    max_residual: f64,
    worst_point: Vec<f64>,
    seen: bool,
}

impl Tracker {
    pub fn new(name: &str, anchor: &str, tol: f64) -> Tracker {
        Tracker {
            name: name.to_string(),
            anchor: anchor.to_string(),
            tol,
            max_residual: 0.0,
            worst_point: Vec::new(),
            seen: false,
        }
    }

    pub fn observe(&mut self, residual: f64, point: &[f64]) {
        let residual = if residual.is_finite() {
            residual
        } else {
            f64::MAX
        };
        if !self.seen || residual > self.max_residual {
            self.max_residual = residual;
            self.worst_point = point.to_vec();
        }
        self.seen = true;
    }

    /// Record a hard failure (a propagated singularity or degeneracy) at a
    /// point; failures never crash a suite.
    pub fn observe_error(&mut self, point: &[f64]) {
        self.observe(f64::MAX, point);
    }

    pub fn finish(self) -> PropertyRecord {
        PropertyRecord {
            pass: self.max_residual <= self.tol,
            name: self.name,
            anchor: self.anchor,
            max_residual: self.max_residual,
            tol: self.tol,
            worst_point: self.worst_point,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_stable_and_parsable_shaped() {
        let mut t = Tracker::new("prop_a", "lhs = rhs", 1e-9);
        t.observe(2.5e-12, &[0.1, 0.2, 0.3]);
        let rep = SuiteReport::from_properties("structure", 42, 100, 2, vec![t.finish()], 17);
        let a = rep.to_json();
        assert!(a.contains("\"paper_anchor\":\"lhs = rhs\""));
        assert!(a.contains("\"duration_ms\":0"));
        assert!(a.contains(&format!("{:.16e}", 2.5e-12)));
        // 17 significant digits round-trip f64 exactly.
        let shown = format!("{:.16e}", 2.5e-12);
        assert_eq!(shown.parse::<f64>().unwrap(), 2.5e-12);
        // Duration differences must not leak into the machine-readable form.
        let mut rep2 = rep.clone();
        rep2.duration_ms = 99;
        assert_eq!(a, rep2.to_json());
    }

    #[test]
    fn non_finite_residuals_are_clamped() {
        let mut t = Tracker::new("prop", "x", 1.0);
        t.observe_error(&[0.0]);
        let rec = t.finish();
        assert!(!rec.pass);
        assert!(rec.max_residual.is_finite());
    }
}
