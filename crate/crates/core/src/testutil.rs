//! Hand-built model structures shared by the unit tests. These are assembled
//! directly from field constructors, independently of the config loader, so
//! they double as a second path to the same geometry.

use std::sync::Arc;

use crate::contact::{ContactStructure, LegendreanSplitting};
use crate::fields::{Chart, OneForm, ScalarField, VectorField};

pub(crate) fn sf(text: &str, chart: &Chart) -> ScalarField {
    ScalarField::from_expr(text, chart).expect("test expression parses")
}

/// θ = dz − y dx on ℝ³ with E = ⟨∂_y⟩, F = ⟨∂_x + y ∂_z⟩.
pub(crate) fn darboux3() -> (Arc<Chart>, ContactStructure, LegendreanSplitting) {
    let chart = Chart::new(
        vec!["x".into(), "y".into(), "z".into()],
        vec![[-1.0, 1.0]; 3],
    )
    .unwrap();
    let theta = OneForm::from_exprs(&["-y", "0", "1"], &chart).unwrap();
    let cs = ContactStructure::new(chart.clone(), theta).unwrap();
    let e = vec![VectorField::from_exprs(&["0", "1", "0"], &chart).unwrap()];
    let f = vec![VectorField::from_exprs(&["1", "0", "y"], &chart).unwrap()];
    let split = LegendreanSplitting::new(e, f, &chart).unwrap();
    (chart, cs, split)
}

/// θ = dz − y₁ dx₁ − y₂ dx₂ on ℝ⁵ with the coordinate Darboux frames.
pub(crate) fn darboux5() -> (Arc<Chart>, ContactStructure, LegendreanSplitting) {
    let chart = Chart::new(
        vec![
            "x1".into(),
            "y1".into(),
            "x2".into(),
            "y2".into(),
            "z".into(),
        ],
        vec![[-1.0, 1.0]; 5],
    )
    .unwrap();
    let theta = OneForm::from_exprs(&["-y1", "0", "-y2", "0", "1"], &chart).unwrap();
    let cs = ContactStructure::new(chart.clone(), theta).unwrap();
    let e = vec![
        VectorField::from_exprs(&["0", "1", "0", "0", "0"], &chart).unwrap(),
        VectorField::from_exprs(&["0", "0", "0", "1", "0"], &chart).unwrap(),
    ];
    let f = vec![
        VectorField::from_exprs(&["1", "0", "0", "0", "y1"], &chart).unwrap(),
        VectorField::from_exprs(&["0", "0", "1", "0", "y2"], &chart).unwrap(),
    ];
    let split = LegendreanSplitting::new(e, f, &chart).unwrap();
    (chart, cs, split)
}

/// Same contact form as darboux5 but with the twisted F-frame
/// F₁ = X₁ + x₁ Y₂, F₂ = X₂ + x₁ Y₁ (dθ-isotropic, not involutive).
pub(crate) fn twisted5() -> (Arc<Chart>, ContactStructure, LegendreanSplitting) {
    let chart = Chart::new(
        vec![
            "x1".into(),
            "y1".into(),
            "x2".into(),
            "y2".into(),
            "z".into(),
        ],
        vec![[-1.0, 1.0]; 5],
    )
    .unwrap();
    let theta = OneForm::from_exprs(&["-y1", "0", "-y2", "0", "1"], &chart).unwrap();
    let cs = ContactStructure::new(chart.clone(), theta).unwrap();
    let e = vec![
        VectorField::from_exprs(&["0", "1", "0", "0", "0"], &chart).unwrap(),
        VectorField::from_exprs(&["0", "0", "0", "1", "0"], &chart).unwrap(),
    ];
    let f = vec![
        VectorField::from_exprs(&["1", "0", "0", "x1", "y1"], &chart).unwrap(),
        VectorField::from_exprs(&["0", "x1", "1", "0", "y2"], &chart).unwrap(),
    ];
    let split = LegendreanSplitting::new(e, f, &chart).unwrap();
    (chart, cs, split)
}
