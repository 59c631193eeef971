use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blocks::{block_decompose_cartan, BlockKind};
use super::search::{default_search_labels, definiteness_search, SearchOptions};
use super::{
    classify_so4, is_imaginary, pairs, unstable_witness, Certificate, StabilityReport, Verdict,
};
use crate::dynamics::InertiaSpec;
use crate::equilibria::EquilibriumPoint;
use crate::error::{Error, Result};
use crate::so4::{cartan_to_axis, lambda_from_values, LambdaSpec};
use crate::son::CartanElement;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Run the experimental definiteness search when every block is imaginary (n > 4).
    pub search: Option<SearchOptions>,
}

fn scaled(report: &mut StabilityReport, b: f64) {
    let spectrum: Vec<Complex64> = report.spectrum().iter().map(|z| z * b).collect();
    report.eigenvalues = pairs(&spectrum);
    report.b = Some(b);
}

/// Stability of one equilibrium `p x p^-1`.
///
/// The point is moved back to `x` and `J` replaced by `p^-1 J p`. For n = 3 the
/// verdict is exact, for n = 4 it follows the so(4) criterion, and for larger n
/// a real eigenvalue in any block means unstable while an all-imaginary
/// spectrum is indeterminate unless the search finds a certificate.
pub fn classify_equilibrium(
    j: &InertiaSpec,
    x: &CartanElement,
    eq: &EquilibriumPoint,
    opts: &ClassifyOptions,
) -> Result<StabilityReport> {
    let n = x.n();
    if j.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.n(),
        });
    }
    let jp = eq.normal_form_inertia(j)?;
    if n == 4 {
        let xs = x.values();
        let lambda = match LambdaSpec::new(lambda_from_values(jp.values())) {
            Ok(l) => l,
            Err(Error::NonGeneric(g)) => return Ok(StabilityReport::rejected(g.to_string())),
            Err(e) => return Err(e),
        };
        let (a, b) = cartan_to_axis(xs[0], xs[1]);
        let mut report = classify_so4(&lambda, a)?;
        scaled(&mut report, b);
        return Ok(report);
    }

    let blocks = block_decompose_cartan(&jp, x)?;
    let spectrum: Vec<Complex64> = blocks.iter().flat_map(|b| b.spectrum()).collect();
    let mut report = StabilityReport {
        verdict: Verdict::IndeterminateAllImaginary,
        lambda: None,
        a: None,
        b: None,
        conditions: None,
        characteristic: None,
        eigenvalues: pairs(&spectrum),
        certificate: None,
        witness: None,
        blocks,
        message: None,
    };
    if let Some(w) = unstable_witness(&spectrum) {
        report.verdict = Verdict::Unstable;
        report.witness = Some(w);
        return Ok(report);
    }
    // A discriminant on the boundary in any so(4) block has unstable neighbours.
    for block in &report.blocks {
        if let (BlockKind::So4Block { .. }, Some(lambda), Some(a)) = (block.kind, block.lambda_spec(), block.a) {
            let sub = classify_so4(&lambda, a)?;
            if sub.conditions.map(|c| c.iiib).unwrap_or(false) {
                report.verdict = Verdict::Unstable;
                report.witness = sub.witness;
                report.message = Some(format!("boundary discriminant in block {:?}", block.kind));
                return Ok(report);
            }
        }
    }
    if n == 3 {
        let z = report.blocks[0].spectrum()[0];
        if is_imaginary(z) {
            report.verdict = Verdict::Stable;
            report.certificate = Some(Certificate::Energy {
                zeta_squared: (z * z).re,
            });
        }
        return Ok(report);
    }
    if let Some(search) = &opts.search {
        if let Some(cert) = definiteness_search(j, &eq.point, &default_search_labels(n), search)? {
            report.verdict = Verdict::Stable;
            report.certificate = Some(Certificate::Search(cert));
            report.message = Some("certified by the experimental definiteness search".into());
        }
    }
    Ok(report)
}
