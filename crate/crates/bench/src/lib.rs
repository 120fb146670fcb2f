//! Shared fixtures for the criterion benchmarks.

use tailquant_core::approx::ApproxInputs;
use tailquant_core::catalog::{self, CatalogEntry};

/// Every reference configuration with its inputs at confidence level `alpha`.
pub fn reference_inputs(alpha: f64) -> Vec<(CatalogEntry, ApproxInputs)> {
    catalog::table1()
        .into_iter()
        .map(|e| {
            let inputs =
                ApproxInputs::new(e.model, catalog::LAMBDA, alpha, e.endpoints).expect("reference inputs are valid");
            (e, inputs)
        })
        .collect()
}
