//! Built-in example structures: the Darboux models in three and five
//! dimensions and a five-dimensional structure with a twisted, non-involutive
//! F-frame. Together they span involutive and non-involutive F at ranks
//! n = 1 and n = 2.

use crate::error::{Error, Result};
use crate::harness::config::{load_config_str, Loaded};

pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "darboux3",
        description: "theta = dz - y dx on R^3 with E = <d_y>, F = <d_x + y d_z> (involutive F)",
        toml: r#"[manifold]
coords = ["x", "y", "z"]

[contact]
theta = ["-y", "0", "1"]

[splitting]
E = [["0", "1", "0"]]
F = [["1", "0", "y"]]

[sample]
box = [[-1, 1], [-1, 1], [-1, 1]]

[rescale]
u = ["x", "0.5*x*y", "0.3*sin(x)*y"]

[sections]
qsec = ["1", "x^2", "x*y - 0.5*z"]
tsec = [["0", "0", "1"], ["1", "1", "1"], ["y", "x*z", "1"]]
"#,
    },
    Builtin {
        name: "darboux5",
        description: "theta = dz - y1 dx1 - y2 dx2 on R^5 with the coordinate Darboux frames (involutive F)",
        toml: r#"[manifold]
coords = ["x1", "y1", "x2", "y2", "z"]

[contact]
theta = ["-y1", "0", "-y2", "0", "1"]

[splitting]
E = [["0", "1", "0", "0", "0"], ["0", "0", "0", "1", "0"]]
F = [["1", "0", "0", "0", "y1"], ["0", "0", "1", "0", "y2"]]

[sample]
box = [[-1, 1], [-1, 1], [-1, 1], [-1, 1], [-1, 1]]

[rescale]
u = ["x1", "x1*x2", "0.3*sin(x1)*y2"]

[sections]
qsec = ["1", "x1^2", "x1*y1 + x2*z"]
tsec = [["0", "0", "0", "0", "1"], ["1", "1", "1", "1", "1"], ["y1", "x2", "0.5", "x1*z", "1"]]
"#,
    },
    Builtin {
        name: "twisted5",
        description: "Darboux contact form on R^5 with F1 = X1 + x1 Y2, F2 = X2 + x1 Y1: dtheta-isotropic but non-involutive F",
        toml: r#"[manifold]
coords = ["x1", "y1", "x2", "y2", "z"]

[contact]
theta = ["-y1", "0", "-y2", "0", "1"]

[splitting]
E = [["0", "1", "0", "0", "0"], ["0", "0", "0", "1", "0"]]
F = [["1", "0", "0", "x1", "y1"], ["0", "x1", "1", "0", "y2"]]

[sample]
box = [[-1, 1], [-1, 1], [-1, 1], [-1, 1], [-1, 1]]

[rescale]
u = ["x1", "x1*x2", "0.3*sin(x1)*y2"]

[sections]
qsec = ["1", "x1^2", "x1*y1 + x2*z"]
tsec = [["0", "0", "0", "0", "1"], ["1", "1", "1", "1", "1"], ["y1", "x2", "0.5", "x1*z", "1"]]
"#,
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn builtin_toml(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|b| b.name == name).map(|b| b.toml)
}

pub fn builtin(name: &str) -> Result<Loaded> {
    let b = BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::Config(format!("unknown example `{name}`")))?;
    let mut loaded = load_config_str(b.toml)?;
    loaded.name = Some(b.name.to_string());
    Ok(loaded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_load_and_validate() {
        for b in BUILTINS {
            let loaded = builtin(b.name).unwrap();
            assert_eq!(loaded.name.as_deref(), Some(b.name));
            assert_eq!(loaded.rescalings.len(), 3);
            assert_eq!(loaded.qsections.len(), 3);
            assert_eq!(loaded.tractors.len(), 3);
        }
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(matches!(builtin("nope"), Err(Error::Config(_))));
    }
}
