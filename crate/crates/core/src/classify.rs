//! Top-level classification: KMS weight range by the trichotomy on the
//! non-wandering part, state range, uniqueness at `β₀`, periods and factor
//! types, plus the golden reproduction table for the built-in examples.

use serde::{Deserialize, Serialize};

use crate::conformal::{state_check, StateCheck, StateVerdict};
use crate::eigen::{solve_family, FamilySolveOptions, RayKind, VertexPotential};
use crate::error::{Error, Result};
use crate::graph::{GraphFamily, NwClass, VertexId};
use crate::lattice::{LatticeWalk, RayStructure};
use crate::periods::{factor_type, periods, DPrime, FactorType, PeriodOptions, PeriodReport};
use crate::spectral::{
    beta0, depth_schedule, recurrence_test, Beta0Options, Beta0Result, RecurrenceResult, RecurrenceVerdict,
    DEFAULT_SUM_BOUND, DEFAULT_TOL,
};
use crate::structure::{non_wandering, StructureReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightRange {
    AllReals,
    Singleton { beta0: f64 },
    HalfLine { beta0: f64 },
    Undetermined,
}

impl WeightRange {
    pub fn describe(&self) -> String {
        match self {
            WeightRange::AllReals => "all of ℝ".into(),
            WeightRange::Singleton { beta0 } => format!("{{{beta0}}}"),
            WeightRange::HalfLine { beta0 } => format!("[{beta0}, ∞)"),
            WeightRange::Undetermined => "undetermined".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uniqueness {
    UniqueRay,
    Multiple,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub verdict: Uniqueness,
    pub evidence: String,
    pub recurrence: Option<RecurrenceResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRange {
    pub description: String,
    /// States exist exactly below this β (found by bisection).
    pub threshold: Option<f64>,
    /// Sampled β at which some weight normalizes to a state.
    pub state_betas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSample {
    pub beta: f64,
    pub feasible: bool,
    pub reason: Option<String>,
    pub ray_kind: Option<RayKind>,
    pub rays: usize,
    /// One state check per ray.
    pub states: Vec<StateCheck>,
    /// Only for feasible β.
    pub factor_type: Option<FactorType>,
}

impl BetaSample {
    pub fn run_samples(
        family: &GraphFamily,
        betas: &[f64],
        opts: &ClassifyOptions,
        periods: &PeriodReport,
    ) -> Result<Vec<BetaSample>> {
        if opts.jobs <= 1 || betas.len() <= 1 {
            return betas.iter().map(|&b| sample(family, b, opts, periods)).collect();
        }
        let chunk = betas.len().div_ceil(opts.jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = betas
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&b| sample(family, b, opts, periods))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut out = Vec::with_capacity(betas.len());
            for h in handles {
                out.extend(h.join().expect("sample worker panicked")?);
            }
            Ok(out)
        })
    }

    fn has_state(&self) -> bool {
        self.states
            .iter()
            .any(|s| s.verdict == StateVerdict::StateWithNormalization)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub family: serde_json::Value,
    pub structure: StructureReport,
    pub beta0: Option<Beta0Result>,
    pub kms_weight_range: WeightRange,
    pub kms_state_range: StateRange,
    pub uniqueness_at_beta0: UniquenessReport,
    pub periods: PeriodReport,
    pub samples: Vec<BetaSample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub depth: usize,
    pub tol: f64,
    /// Explicit β samples; defaults to `β₀ − 0.1, β₀, β₀ + 0.1, β₀ + 1`, or
    /// `−1, 0, 1` without loops.
    pub betas: Option<Vec<f64>>,
    /// Worker threads for the β samples; results keep the sample order.
    pub jobs: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            depth: 50,
            tol: DEFAULT_TOL,
            betas: None,
            jobs: 1,
        }
    }
}

/// Precision of the state threshold bisection.
const THRESHOLD_TOL: f64 = 1e-12;

fn sample(family: &GraphFamily, beta: f64, opts: &ClassifyOptions, periods: &PeriodReport) -> Result<BetaSample> {
    let solve_opts = FamilySolveOptions {
        depth: opts.depth,
        ..Default::default()
    };
    let ft = factor_type(periods, beta);
    match solve_family(family, beta, &VertexPotential::gauge(), &solve_opts) {
        Ok(sols) => {
            let schedule = depth_schedule(opts.depth);
            let states = sols
                .rays
                .iter()
                .map(|s| state_check(family, s, &schedule))
                .collect::<Result<Vec<_>>>()?;
            Ok(BetaSample {
                beta,
                feasible: true,
                reason: None,
                ray_kind: Some(sols.kind),
                rays: sols.rays.len(),
                states,
                factor_type: Some(ft),
            })
        }
        Err(Error::Infeasible { reason, .. }) => Ok(BetaSample {
            beta,
            feasible: false,
            reason: Some(reason),
            ray_kind: None,
            rays: 0,
            states: vec![],
            factor_type: None,
        }),
        Err(e) => Err(e),
    }
}

fn run_samples(
    family: &GraphFamily,
    betas: &[f64],
    opts: &ClassifyOptions,
    periods: &PeriodReport,
) -> Result<Vec<BetaSample>> {
    if opts.jobs <= 1 || betas.len() <= 1 {
        return betas.iter().map(|&b| sample(family, b, opts, periods)).collect();
    }
    let chunk = betas.len().div_ceil(opts.jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = betas
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&b| sample(family, b, opts, periods))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(betas.len());
        for h in handles {
            out.extend(h.join().expect("sample worker panicked")?);
        }
        Ok(out)
    })
}

fn has_state(family: &GraphFamily, beta: f64, opts: &ClassifyOptions) -> Result<Option<bool>> {
    let solve_opts = FamilySolveOptions {
        depth: opts.depth,
        ..Default::default()
    };
    let sols = match solve_family(family, beta, &VertexPotential::gauge(), &solve_opts) {
        Ok(s) => s,
        Err(Error::Infeasible { .. }) => return Ok(Some(false)),
        Err(e) => return Err(e),
    };
    let schedule = depth_schedule(opts.depth);
    let mut any = false;
    for s in &sols.rays {
        match state_check(family, s, &schedule)?.verdict {
            StateVerdict::StateWithNormalization => any = true,
            StateVerdict::WeightOnly => {}
            StateVerdict::Undetermined => return Ok(None),
        }
    }
    Ok(Some(any))
}

/// Bisection for the boundary between β with states (below) and without.
fn state_threshold(family: &GraphFamily, opts: &ClassifyOptions) -> Result<Option<f64>> {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..8 {
        match (has_state(family, lo, opts)?, has_state(family, hi, opts)?) {
            (Some(true), Some(false)) => break,
            (Some(true), Some(true)) => hi = 2.0 * hi + 1.0,
            (Some(false), Some(false)) => lo = 2.0 * lo - 1.0,
            _ => return Ok(None),
        }
    }
    if has_state(family, lo, opts)? != Some(true) || has_state(family, hi, opts)? != Some(false) {
        return Ok(None);
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        match has_state(family, mid, opts)? {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => return Ok(None),
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn uniqueness(
    family: &GraphFamily,
    structure: &StructureReport,
    b0: Option<&Beta0Result>,
    samples: &[BetaSample],
    opts: &ClassifyOptions,
) -> Result<UniquenessReport> {
    let Some(b0) = b0 else {
        return Ok(UniquenessReport {
            verdict: Uniqueness::Undetermined,
            evidence: "no loops, so there is no β₀".into(),
            recurrence: None,
        });
    };
    if structure.nw_class == NwClass::NonemptyFinite && family.is_finite() {
        return Ok(UniquenessReport {
            verdict: Uniqueness::UniqueRay,
            evidence: "finite non-wandering part: the Perron eigenvector is unique up to scaling".into(),
            recurrence: None,
        });
    }
    if let GraphFamily::LatticeWalk(w) = family {
        let rays = w.ray_structure(b0.value, opts.tol)?;
        let verdict = match rays.structure {
            RayStructure::SingleRay { .. } => Uniqueness::UniqueRay,
            RayStructure::Sphere { .. } => Uniqueness::Multiple,
        };
        return Ok(UniquenessReport {
            verdict,
            evidence: "level set of the moment generating function at β₀".into(),
            recurrence: None,
        });
    }

    let base: Option<VertexId> = family
        .metadata()
        .base_vertex
        .or_else(|| structure.nw_vertices.first().cloned());
    let recurrence = match base {
        Some(v) => Some(recurrence_test(family, b0.value, &v, opts.depth, DEFAULT_SUM_BOUND)?),
        None => None,
    };
    let at_b0 = samples.iter().find(|s| (s.beta - b0.value).abs() < 1e-12 && s.feasible);
    let solver_unique = at_b0.is_some_and(|s| s.ray_kind == Some(RayKind::Unique));
    let divergent = recurrence
        .as_ref()
        .is_some_and(|r| r.verdict == RecurrenceVerdict::Divergent);
    let (verdict, evidence) = if solver_unique {
        (
            Uniqueness::UniqueRay,
            "the solution cone at β₀ is a single ray (every arm sits at its floor)".to_string(),
        )
    } else if divergent {
        (
            Uniqueness::UniqueRay,
            "loop series diverges at β₀ (recurrence)".to_string(),
        )
    } else if at_b0.is_some_and(|s| s.ray_kind == Some(RayKind::ExtremeRays) && s.rays > 1) {
        (Uniqueness::Multiple, "several extreme rays at β₀".to_string())
    } else {
        (
            Uniqueness::Undetermined,
            "loop series not shown divergent at β₀ and no closed-form ray structure".to_string(),
        )
    };
    Ok(UniquenessReport {
        verdict,
        evidence,
        recurrence,
    })
}

pub fn classify(family: &GraphFamily, opts: &ClassifyOptions) -> Result<InvariantReport> {
    let structure = non_wandering(family, opts.depth)?;
    match structure.cofinal {
        Some(true) => {}
        Some(false) => {
            return Err(Error::InvalidArgument(
                "the graph is not cofinal, so the trichotomy does not apply".into(),
            ))
        }
        None => return Err(Error::CofinalityUnknown),
    }

    let b0 = match beta0(
        family,
        &Beta0Options {
            tol: opts.tol,
            ..Beta0Options::with_depth(opts.depth)
        },
    ) {
        Ok(r) => Some(r),
        Err(Error::NoLoops) => None,
        Err(e) => return Err(e),
    };

    let kms_weight_range = match (structure.nw_class, &b0) {
        (NwClass::Empty, _) => WeightRange::AllReals,
        (NwClass::NonemptyFinite, Some(b)) => WeightRange::Singleton { beta0: b.value },
        (NwClass::NonemptyInfinite, Some(b)) => WeightRange::HalfLine { beta0: b.value },
        _ => WeightRange::Undetermined,
    };

    let betas = match (&opts.betas, &b0) {
        (Some(b), _) => b.clone(),
        (None, Some(b)) => vec![b.value - 0.1, b.value, b.value + 0.1, b.value + 1.0],
        (None, None) => vec![-1.0, 0.0, 1.0],
    };
    let periods = periods(family, &PeriodOptions::default())?;
    let samples = run_samples(family, &betas, opts, &periods)?;

    let state_betas: Vec<f64> = samples.iter().filter(|s| s.has_state()).map(|s| s.beta).collect();
    let threshold = if kms_weight_range == WeightRange::AllReals {
        state_threshold(family, opts)?
    } else {
        None
    };
    let description = match (&threshold, &kms_weight_range) {
        (Some(t), _) => format!("β < {t}"),
        (None, WeightRange::Singleton { beta0 }) if state_betas.contains(beta0) => format!("{{{beta0}}}"),
        (None, WeightRange::HalfLine { beta0 }) if state_betas == [*beta0] => {
            format!("{{{beta0}}} (no sampled β > β₀ normalizes)")
        }
        _ if state_betas.is_empty() => "no states at the sampled β".into(),
        _ => format!("states at sampled β {state_betas:?}"),
    };

    let uniqueness_at_beta0 = uniqueness(family, &structure, b0.as_ref(), &samples, opts)?;
    Ok(InvariantReport {
        family: family.describe(),
        structure,
        beta0: b0,
        kms_weight_range,
        kms_state_range: StateRange {
            description,
            threshold,
            state_betas,
        },
        uniqueness_at_beta0,
        periods,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub example: String,
    pub quantity: String,
    pub expected: f64,
    pub computed: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub rows: Vec<GoldenRow>,
    pub pass: bool,
}

impl GoldenReport {
    pub fn ensure_pass(&self) -> Result<()> {
        let failed: Vec<String> = self
            .rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| {
                format!(
                    "{} {}: expected {} got {:?}",
                    r.example, r.quantity, r.expected, r.computed
                )
            })
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::GoldenMismatch(failed.join("; ")))
        }
    }
}

fn row(rows: &mut Vec<GoldenRow>, example: &str, quantity: &str, expected: f64, computed: Option<f64>, tolerance: f64) {
    rows.push(GoldenRow {
        example: example.into(),
        quantity: quantity.into(),
        expected,
        computed,
        tolerance,
        pass: computed.is_some_and(|c| (expected - c).abs() <= tolerance),
    });
}

fn d_prime_value(p: &PeriodReport) -> Option<f64> {
    match p.d_prime {
        DPrime::Exact { value, .. } => Some(value as f64),
        DPrime::Interval { .. } => None,
    }
}

/// Expected `log α` for three arms (real root of `x³ − x − 3`).
pub const ARMS3_BETA0: f64 = 0.513_841_001_9;
pub const LOG_GOLDEN_RATIO: f64 = 0.481_211_825_059_603_4;

pub fn symmetric_walk() -> LatticeWalk {
    LatticeWalk::new(1, vec![(vec![1], 1), (vec![-1], 1)]).expect("valid walk")
}

pub fn asymmetric_walk() -> LatticeWalk {
    LatticeWalk::new(1, vec![(vec![1], 2), (vec![-1], 1)]).expect("valid walk")
}

/// Full pipeline on the three worked examples against stored values.
pub fn reproduce_examples() -> Result<GoldenReport> {
    let opts = ClassifyOptions::default();
    let mut rows = Vec::new();
    let flag = |b: bool| Some(if b { 1.0 } else { 0.0 });

    let arms = classify(&GraphFamily::arms(3)?, &opts)?;
    let b = arms.beta0.as_ref().map(|b| b.value);
    row(&mut rows, "arms(3)", "beta_min", ARMS3_BETA0, b, 1e-9);
    row(
        &mut rows,
        "arms(3)",
        "beta_min (4 decimals)",
        0.5138,
        b.map(|b| (b * 1e4).trunc() / 1e4),
        0.0,
    );
    row(&mut rows, "arms(3)", "d_G", 1.0, Some(arms.periods.d_g as f64), 0.0);
    row(&mut rows, "arms(3)", "d'_G", 0.0, d_prime_value(&arms.periods), 0.0);
    row(
        &mut rows,
        "arms(3)",
        "unique ray at beta_min",
        1.0,
        flag(arms.uniqueness_at_beta0.verdict == Uniqueness::UniqueRay),
        0.0,
    );

    let ladder = classify(&GraphFamily::Ladder, &opts)?;
    row(
        &mut rows,
        "ladder",
        "state threshold",
        LOG_GOLDEN_RATIO,
        ladder.kms_state_range.threshold,
        1e-9,
    );
    row(&mut rows, "ladder", "d_G", 1.0, Some(ladder.periods.d_g as f64), 0.0);
    row(&mut rows, "ladder", "d'_G", 1.0, d_prime_value(&ladder.periods), 0.0);
    let lambda = match factor_type(&ladder.periods, 0.3) {
        FactorType::IiiLambda { lambda, .. } => Some(lambda),
        _ => None,
    };
    row(
        &mut rows,
        "ladder",
        "III lambda at beta=0.3",
        (-0.3f64).exp(),
        lambda,
        1e-12,
    );

    for (name, walk, expected) in [
        ("lattice d=1 symmetric", symmetric_walk(), 2f64.ln()),
        ("lattice d=1 mu(1)=2 mu(-1)=1", asymmetric_walk(), 1.5 * 2f64.ln()),
    ] {
        let r = classify(&GraphFamily::LatticeWalk(walk), &opts)?;
        row(
            &mut rows,
            name,
            "beta0",
            expected,
            r.beta0.as_ref().map(|b| b.value),
            1e-10,
        );
        row(
            &mut rows,
            name,
            "unique ray at beta0",
            1.0,
            flag(r.uniqueness_at_beta0.verdict == Uniqueness::UniqueRay),
            0.0,
        );
        row(
            &mut rows,
            name,
            "sampled states",
            0.0,
            Some(r.kms_state_range.state_betas.len() as f64),
            0.0,
        );
    }

    let pass = rows.iter().all(|r| r.pass);
    Ok(GoldenReport { rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trichotomy() {
        let opts = ClassifyOptions::default();
        let rose = classify(&GraphFamily::rose(2).unwrap(), &opts).unwrap();
        let WeightRange::Singleton { beta0 } = rose.kms_weight_range else {
            panic!()
        };
        assert!((beta0 - 2f64.ln()).abs() < 1e-10);
        assert_eq!(rose.uniqueness_at_beta0.verdict, Uniqueness::UniqueRay);
        assert_eq!(rose.kms_state_range.state_betas, vec![beta0]);
        // β₀ ± 0.1 samples are kept and marked infeasible
        assert!(!rose.samples[0].feasible && rose.samples[1].feasible && !rose.samples[2].feasible);

        let ladder = classify(&GraphFamily::Ladder, &opts).unwrap();
        assert_eq!(ladder.kms_weight_range, WeightRange::AllReals);
        assert!((ladder.kms_state_range.threshold.unwrap() - LOG_GOLDEN_RATIO).abs() < 1e-9);

        let arms = classify(&GraphFamily::arms(3).unwrap(), &opts).unwrap();
        let WeightRange::HalfLine { beta0 } = arms.kms_weight_range else {
            panic!()
        };
        assert!((beta0 - ARMS3_BETA0).abs() < 1e-9);
        assert_eq!(arms.kms_state_range.state_betas, vec![beta0]);
        assert_eq!(arms.uniqueness_at_beta0.verdict, Uniqueness::UniqueRay);
        assert!(!arms.samples[0].feasible);
        assert_eq!(arms.samples[2].rays, 3);
    }

    #[test]
    fn parallel_samples_match_serial() {
        let family = GraphFamily::arms(3).unwrap();
        let serial = classify(&family, &ClassifyOptions::default()).unwrap();
        let parallel = classify(
            &family,
            &ClassifyOptions {
                jobs: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn golden_table_passes() {
        let g = reproduce_examples().unwrap();
        for r in &g.rows {
            assert!(r.pass, "{r:?}");
        }
        g.ensure_pass().unwrap();
    }

    #[test]
    fn golden_mismatch_is_reported() {
        let mut g = reproduce_examples().unwrap();
        g.rows[0].pass = false;
        assert!(matches!(g.ensure_pass(), Err(Error::GoldenMismatch(_))));
    }
}
