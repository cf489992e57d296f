use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::IndependenceError;

/// Floor applied to component p-values before taking logs.
pub const P_VALUE_FLOOR: f64 = 1e-300;

/// Fisher's combination of `c` p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherCombination {
    /// `-2 * sum(ln p_i)`.
    pub statistic: f64,
    /// `2 * c`.
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub component_p_values: Vec<f64>,
}

pub fn fisher_combine(p_values: &[f64]) -> Result<FisherCombination, IndependenceError> {
    if p_values.is_empty() {
        return Err(IndependenceError::EmptyInput);
    }
    let mut statistic = 0.0;
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(IndependenceError::InvalidPValue(p));
        }
        statistic -= 2.0 * p.max(P_VALUE_FLOOR).ln();
    }
    let degrees_of_freedom = 2 * p_values.len();
    Ok(FisherCombination {
        statistic,
        degrees_of_freedom,
        p_value: chi_square_sf(statistic, degrees_of_freedom as f64),
        component_p_values: p_values.to_vec(),
    })
}

pub(crate) fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof)
        .map(|d| d.sf(x).clamp(0.0, 1.0))
        .unwrap_or(f64::NAN)
}
