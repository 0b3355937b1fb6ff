//! Pointwise evaluation of the engine's operations, with both a text and a
//! machine-readable rendering.

use crate::bgg::{bgg_d, rho_tensor, splitting_operator};
use crate::connect::{tractor_connection, tractor_connection_of_split};
use crate::contact::{evaluate, StructureAt};
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::harness::config::Loaded;

pub const OP_NAMES: &[&str] = &[
    "reeb", "upsilon", "split", "nablaQ", "nablaE", "tractor", "S", "P", "D",
];

#[derive(Debug, Clone)]
pub struct EvalRequest {
    pub op: String,
    pub point: Vec<f64>,
    /// Rescaling expression (for `upsilon`); falls back to the first
    /// configured rescaling.
    pub u: Option<String>,
    /// θ(ρ) expression (for `nablaQ`, `S`, `D`); falls back to the first
    /// configured Q-section.
    pub rho: Option<String>,
    pub order: usize,
}

/// The evaluated value as labelled scalar/vector/matrix components, plus the
/// two renderings.
#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub op: String,
    pub point: Vec<f64>,
    pub text: String,
    pub json: String,
}

enum Value {
    Vector(Vec<(String, f64)>),
    Rows(Vec<(String, Vec<f64>)>),
}

pub fn eval_op(loaded: &Loaded, req: &EvalRequest) -> Result<EvalOutput> {
    if req.point.len() != loaded.chart.dim() {
        return Err(Error::Usage(format!(
            "point has {} coordinates, chart has {}",
            req.point.len(),
            loaded.chart.dim()
        )));
    }
    if !loaded.chart.contains(&req.point) {
        return Err(Error::Usage(format!(
            "point {:?} lies outside the sample box",
            req.point
        )));
    }
    let st = evaluate(&loaded.contact, &loaded.splitting, &req.point, req.order)?;
    let value = match req.op.as_str() {
        "reeb" => op_reeb(&st),
        "upsilon" => op_upsilon(loaded, req, &st)?,
        "split" => op_split(loaded, &st)?,
        "nablaQ" => op_nabla_q(loaded, req, &st)?,
        "nablaE" => op_nabla_e(&st)?,
        "tractor" => op_tractor(loaded, &st)?,
        "S" => op_splitting(loaded, req, &st)?,
        "P" => op_rho(&st)?,
        "D" => op_bgg(loaded, req, &st)?,
        other => return Err(Error::UnknownOp(other.to_string())),
    };
    Ok(render(req, value))
}

fn rho_field(loaded: &Loaded, req: &EvalRequest) -> Result<ScalarField> {
    match &req.rho {
        Some(text) => ScalarField::from_expr(text, &loaded.chart),
        None => loaded
            .qsections
            .first()
            .map(|q| q.field.clone())
            .ok_or_else(|| Error::Usage("no --rho given and no configured Q-sections".into())),
    }
}

fn u_field(loaded: &Loaded, req: &EvalRequest) -> Result<ScalarField> {
    match &req.u {
        Some(text) => ScalarField::from_expr(text, &loaded.chart),
        None => loaded
            .rescalings
            .first()
            .map(|u| u.field.clone())
            .ok_or_else(|| Error::Usage("no --u given and no configured rescalings".into())),
    }
}

fn coord_labels(loaded: &Loaded) -> Vec<String> {
    loaded.chart.names().to_vec()
}

fn op_reeb(st: &StructureAt) -> Value {
    Value::Vector(
        st.reeb
            .value_vec()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (format!("r^{i}"), v))
            .collect(),
    )
}

fn op_upsilon(loaded: &Loaded, req: &EvalRequest, st: &StructureAt) -> Result<Value> {
    let u = u_field(loaded, req)?;
    let ups = st.upsilon(&u)?;
    let names = coord_labels(loaded);
    Ok(Value::Vector(
        ups.tangent
            .value_vec()
            .into_iter()
            .zip(names)
            .map(|(v, n)| (format!("Upsilon^{n}"), v))
            .collect(),
    ))
}

fn split_rows(label: &str, sp: &crate::contact::SplitTractor) -> (String, Vec<f64>) {
    let mut row = vec![sp.rho.value()];
    row.extend(sp.mu.iter().map(|c| c.value()));
    (label.to_string(), row)
}

fn op_split(loaded: &Loaded, st: &StructureAt) -> Result<Value> {
    let t = loaded
        .tractors
        .first()
        .ok_or_else(|| Error::Usage("no configured tractor sections".into()))?;
    let tj = t.field.eval(&st.seeds)?;
    let sp = st.split_tractor(&tj)?;
    Ok(Value::Rows(vec![split_rows(
        &format!("(t)_theta for t = [{}]  (rho, mu_1..mu_n)", t.texts.join(", ")),
        &sp,
    )]))
}

fn op_nabla_q(loaded: &Loaded, req: &EvalRequest, st: &StructureAt) -> Result<Value> {
    let rho = rho_field(loaded, req)?;
    let g = rho.eval(&st.seeds)?;
    let vals = (0..st.rank())
        .map(|a| {
            let v = crate::connect::nabla_q(st, &st.f[a].clone(), &g)?;
            Ok((format!("nabla^Q_F{}", a + 1), v.value()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Vector(vals))
}

fn op_nabla_e(st: &StructureAt) -> Result<Value> {
    let mut rows = Vec::new();
    for a in 0..st.rank() {
        for b in 0..st.rank() {
            let ne = crate::connect::nabla_e(st, &st.f[a].clone(), &st.e[b].clone())?;
            rows.push((
                format!("nabla^E_F{} E{}  (E-frame coefficients)", a + 1, b + 1),
                ne.coeffs.iter().map(|c| c.value()).collect(),
            ));
        }
    }
    Ok(Value::Rows(rows))
}

fn op_tractor(loaded: &Loaded, st: &StructureAt) -> Result<Value> {
    let t = loaded
        .tractors
        .first()
        .ok_or_else(|| Error::Usage("no configured tractor sections".into()))?;
    let tj = t.field.eval(&st.seeds)?;
    let mut rows = Vec::new();
    for a in 0..st.rank() {
        let conn = tractor_connection(st, &st.f[a].clone(), &tj)?;
        rows.push(split_rows(
            &format!("nabla_F{} t  (rho, mu_1..mu_n)", a + 1),
            &conn,
        ));
    }
    Ok(Value::Rows(rows))
}

fn op_splitting(loaded: &Loaded, req: &EvalRequest, st: &StructureAt) -> Result<Value> {
    let rho = rho_field(loaded, req)?;
    let g = rho.eval(&st.seeds)?;
    let s = splitting_operator(st, &g)?;
    let mut rows = vec![split_rows("S(rho)  (rho, mu_1..mu_n)", &s)];
    for a in 0..st.rank() {
        let conn = tractor_connection_of_split(st, &st.f[a], &s)?;
        rows.push(split_rows(
            &format!("nabla_F{} S(rho)  (rho, mu_1..mu_n)", a + 1),
            &conn,
        ));
    }
    Ok(Value::Rows(rows))
}

fn op_rho(st: &StructureAt) -> Result<Value> {
    let p = rho_tensor(st)?;
    Ok(Value::Rows(
        p.entries
            .iter()
            .enumerate()
            .map(|(a, row)| {
                (
                    format!("P(F{})  (E-frame coefficients)", a + 1),
                    row.iter().map(|c| c.value()).collect(),
                )
            })
            .collect(),
    ))
}

fn op_bgg(loaded: &Loaded, req: &EvalRequest, st: &StructureAt) -> Result<Value> {
    let rho = rho_field(loaded, req)?;
    let g = rho.eval(&st.seeds)?;
    let d = bgg_d(st, &g)?;
    Ok(Value::Rows(
        d.value_matrix()
            .into_iter()
            .enumerate()
            .map(|(a, row)| (format!("D(rho)(F{}, .)", a + 1), row))
            .collect(),
    ))
}

fn render(req: &EvalRequest, value: Value) -> EvalOutput {
    let mut text = format!("op: {}\npoint: {:?}\n", req.op, req.point);
    match &value {
        Value::Vector(entries) => {
            for (label, v) in entries {
                text.push_str(&format!("  {label} = {v:.12}\n"));
            }
        }
        Value::Rows(rows) => {
            for (label, row) in rows {
                let joined = row
                    .iter()
                    .map(|v| format!("{v:.12}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                text.push_str(&format!("  {label} = ({joined})\n"));
            }
        }
    }

    let mut json = String::from("{\"op\":");
    push_json_string(&mut json, &req.op);
    json.push_str(&format!(",\"order\":{},\"point\":[", req.order));
    for (i, x) in req.point.iter().enumerate() {
        if i > 0 {
            json.push(',');
        }
        json.push_str(&format!("{x:.16e}"));
    }
    json.push_str("],\"components\":[");
    let rows: Vec<(String, Vec<f64>)> = match value {
        Value::Vector(entries) => entries.into_iter().map(|(l, v)| (l, vec![v])).collect(),
        Value::Rows(rows) => rows,
    };
    for (i, (label, row)) in rows.iter().enumerate() {
        if i > 0 {
            json.push(',');
        }
        json.push_str("{\"label\":");
        push_json_string(&mut json, label);
        json.push_str(",\"values\":[");
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                json.push(',');
            }
            json.push_str(&format!("{v:.16e}"));
        }
        json.push_str("]}");
    }
    json.push_str("]}");

    EvalOutput {
        op: req.op.clone(),
        point: req.point.clone(),
        text,
        json,
    }
}

fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Parse a point given as `x=0.5,y=0.2,z=0.1` against the chart coordinates.
pub fn parse_point(spec: &str, loaded: &Loaded) -> Result<Vec<f64>> {
    let names = loaded.chart.names();
    let mut values = vec![None; names.len()];
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part.split_once('=').ok_or_else(|| {
            Error::Config(format!("point component `{part}` is not of the form name=value"))
        })?;
        let idx = names
            .iter()
            .position(|n| n == name.trim())
            .ok_or_else(|| Error::Config(format!("unknown coordinate `{}`", name.trim())))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid number `{}`", value.trim())))?;
        values[idx] = Some(v);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Config(format!("missing coordinate `{}`", names[i]))))
        .collect()
}
