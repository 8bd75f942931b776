//! The full invariant suite for one body spec.

use osb_core::{realize, BodySpec, Error, ToleranceConfig};
use serde::{Deserialize, Serialize};

use crate::checks::{CheckReport, Checker};
use crate::error::OsbError;
use crate::spec::{spec_hash, SPEC_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

/// Sample counts per check.
#[derive(Debug, Clone, Copy)]
struct Budget {
    convexity: usize,
    axioms: usize,
    polarity: usize,
    pointwise: usize,
    families: usize,
    grid: usize,
    rays: usize,
    lines: usize,
    planarity: usize,
    ratio: usize,
    volume: usize,
}

impl Level {
    fn budget(self) -> Budget {
        match self {
            Level::Quick => Budget {
                convexity: 500,
                axioms: 200,
                polarity: 64,
                pointwise: 100,
                families: 20,
                grid: 4_000,
                rays: 10,
                lines: 10,
                planarity: 2,
                ratio: 10_000,
                volume: 100_000,
            },
            Level::Full => Budget {
                convexity: 4_000,
                axioms: 1_000,
                polarity: 1_000,
                pointwise: 1_000,
                families: 1_000,
                grid: 10_000,
                rays: 100,
                lines: 100,
                planarity: 8,
                ratio: 100_000,
                volume: 1_000_000,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub check: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub v: u64,
    pub body_hash: String,
    /// `None` when the construction was rejected.
    pub body_label: Option<String>,
    pub dim: Option<usize>,
    pub level: Level,
    pub seed: u64,
    /// All non-advisory checks passed.
    pub pass: bool,
    pub checks: Vec<CheckReport>,
    pub skipped: Vec<Skipped>,
}

impl VerifyReport {
    /// First failing non-advisory check.
    pub fn culprit(&self) -> Option<&CheckReport> {
        self.checks.iter().find(|c| !c.pass && !c.advisory)
    }
}

fn skip(skipped: &mut Vec<Skipped>, checks: &[&str], reason: &str) {
    for c in checks {
        skipped.push(Skipped {
            check: (*c).into(),
            reason: reason.into(),
        });
    }
}

/// Realizes `spec` and runs every applicable check. Rejected constructions
/// and failed gates come back as failing reports; malformed specs are errors.
pub fn run_verify(
    spec: &BodySpec,
    level: Level,
    seed: u64,
    tolerances: Option<ToleranceConfig>,
) -> Result<VerifyReport, OsbError> {
    let hash = spec_hash(spec);
    let mut report = VerifyReport {
        v: SPEC_VERSION,
        body_hash: hash.clone(),
        body_label: None,
        dim: None,
        level,
        seed,
        pass: false,
        checks: Vec::new(),
        skipped: Vec::new(),
    };
    let body = match realize(spec) {
        Ok(b) => b,
        Err(e @ (Error::ConstructionRejected { .. } | Error::NotSelfPolar { .. })) => {
            report.checks.push(CheckReport::rejected(&hash, &e));
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let body = match tolerances {
        Some(t) => {
            t.validate()?;
            body.with_tolerances(t)
        }
        None => body,
    };
    report.body_label = Some(body.label().into());
    report.dim = Some(body.dim());

    let b = level.budget();
    let c = Checker::new(&body, &hash, seed);
    let checks = &mut report.checks;
    checks.push(c.convexity(b.convexity));
    checks.push(c.gauge_axioms(b.axioms));
    checks.push(c.euler(b.axioms));
    let polarity = c.self_polarity(b.polarity);
    let self_polar = polarity.pass;
    checks.push(polarity);

    let dynamic = [
        "involution",
        "positivity",
        "four_periodic_edges",
        "four_periodic_area",
        "invariance",
        "star_shape",
        "transversality",
        "two_point",
        "planarity",
        "area_construction",
        "area_ratio",
        "mahler",
    ];
    if !self_polar {
        skip(&mut report.skipped, &dynamic, "body is not symplectically self-polar");
    } else {
        checks.push(c.involution(b.pointwise));
        if c.is_c2() {
            checks.push(c.positivity(b.pointwise));
        }
        checks.extend(c.four_periodic(b.families));
        checks.push(c.invariance(b.pointwise));
        checks.push(c.star_shape(b.grid, b.rays));
        if body.dim() > 2 && c.is_c2() {
            checks.push(c.transversality(b.pointwise));
        }
        checks.push(c.two_point(b.lines));
        if c.is_c2() {
            checks.push(c.planarity(b.planarity));
        } else {
            skip(&mut report.skipped, &["positivity", "transversality", "planarity"], "needs a C2 body");
        }
        if body.dim() == 2 {
            checks.push(c.area_construction(b.grid));
            checks.push(c.area_ratio(b.ratio));
        } else {
            skip(&mut report.skipped, &["area_construction", "area_ratio"], "planar only");
        }
        checks.push(c.mahler(b.volume));
    }
    report.pass = report.checks.iter().all(|c| c.pass || c.advisory);
    Ok(report)
}
