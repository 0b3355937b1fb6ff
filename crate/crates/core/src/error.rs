//! Crate-wide error type.
//!
//! Every failure mode the engine can produce is a structured variant here:
//! parse problems carry byte offsets, numerical degeneracies carry the point
//! (and, where available, a condition estimate) so that a failing run can be
//! reproduced exactly.

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("`{name}` expects {expected} argument(s), found {found} (byte {offset})")]
    Arity {
        offset: usize,
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant `{invariant}` violated at probe point {point:?} (residual {residual:e})")]
    Validation {
        invariant: String,
        point: Vec<f64>,
        residual: f64,
    },

    #[error("singularity in {what} (value {value:e}){}", opt_ctx(.expr, .point))]
    Singular {
        what: String,
        value: f64,
        expr: Option<String>,
        point: Option<Vec<f64>>,
    },

    #[error("requested derivative order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },

    #[error("degenerate frame{}: condition estimate {cond:e}", opt_point(.point))]
    DegenerateFrame { cond: f64, point: Option<Vec<f64>> },

    #[error("not a contact form{}: {detail}", opt_point(.point))]
    NotContact {
        detail: String,
        point: Option<Vec<f64>>,
    },

    #[error("F is not involutive at {point:?}: [F_{a}, F_{b}] leaves F (residual {residual:e})")]
    NonInvolutive {
        a: usize,
        b: usize,
        residual: f64,
        point: Vec<f64>,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown operation `{0}`")]
    UnknownOp(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Attach the evaluation point to errors raised below the geometry layer.
    pub fn at_point(self, p: &[f64]) -> Error {
        match self {
            Error::Singular {
                what,
                value,
                expr,
                point: None,
            } => Error::Singular {
                what,
                value,
                expr,
                point: Some(p.to_vec()),
            },
            Error::DegenerateFrame { cond, point: None } => Error::DegenerateFrame {
                cond,
                point: Some(p.to_vec()),
            },
            Error::NotContact { detail, point: None } => Error::NotContact {
                detail,
                point: Some(p.to_vec()),
            },
            other => other,
        }
    }

    /// Attach the source expression to singularities raised during evaluation.
    pub fn in_expr(self, text: &str) -> Error {
        match self {
            Error::Singular {
                what,
                value,
                expr: None,
                point,
            } => Error::Singular {
                what,
                value,
                expr: Some(text.to_string()),
                point,
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

fn opt_point(p: &Option<Vec<f64>>) -> String {
    match p {
        Some(p) => format!(" at {p:?}"),
        None => String::new(),
    }
}

fn opt_ctx(expr: &Option<String>, p: &Option<Vec<f64>>) -> String {
    let mut s = String::new();
    if let Some(e) = expr {
        s.push_str(&format!(" in `{e}`"));
    }
    s.push_str(&opt_point(p));
    s
}
