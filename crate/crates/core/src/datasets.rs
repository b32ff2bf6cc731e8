//! Bundled example data.

use crate::logit::{LogitProblem, ModelId};

/// Covariate column names of [`survival`], in column order.
pub const SURVIVAL_COLUMNS: [&str; 3] = ["severity", "antitoxin", "severity:antitoxin"];

/// Survival counts for four severity/antitoxin groups.
///
/// Rows are (more severe, antitoxin), (more severe, none), (less severe,
/// antitoxin), (less severe, none); `y` counts survivors. The model set is
/// intercept-only, severity, antitoxin, both main effects, and the full
/// model with interaction.
pub fn survival() -> (LogitProblem, Vec<ModelId>) {
    let problem = LogitProblem::new(
        vec![21, 26, 20, 12],
        vec![6, 4, 15, 5],
        vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ],
        1.0,
    )
    .expect("bundled data is valid");
    let models = [vec![], vec![0], vec![1], vec![0, 1], vec![0, 1, 2]]
        .into_iter()
        .map(|m| ModelId::new(m).expect("valid column set"))
        .collect();
    (problem, models)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_shape() {
        let (p, models) = survival();
        assert_eq!(p.n, vec![21, 26, 20, 12]);
        assert_eq!(p.y, vec![6, 4, 15, 5]);
        assert_eq!(models.len(), 5);
        assert!(models[0].is_null());
        // intercept plus three columns
        assert_eq!(p.design(&models[4]).unwrap().cols, 4);
    }
}
