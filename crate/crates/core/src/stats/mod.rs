//! Two-sample comparisons of run groups.

mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::RunAnalysis;

pub use special::{ln_gamma, regularized_incomplete_beta, student_t_two_sided};

pub const DEFAULT_ALPHA: f64 = 0.05;
/// Ascension levels at or below this count as the lower-skill group.
pub const ASCENSION_SPLIT: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    pub p: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub alpha: f64,
    pub significant: bool,
    /// Both samples were constant with different means; `t` is infinite and
    /// `p` is set to 0.
    pub degenerate_variance: bool,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    if x.iter().all(|v| *v == x[0]) {
        return (x[0], 0.0);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test, two-sided.
///
/// Two constant samples with equal means give `t = 0, p = 1`; with
/// different means the test is undefined and [`Error::DegenerateVariance`]
/// is returned.
pub fn welch_t(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientSample {
            n_a: a.len(),
            n_b: b.len(),
        });
    }
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (var_a / na, var_b / nb);
    let se2 = sa + sb;
    let mut result = TestResult {
        t: 0.0,
        df: na + nb - 2.0,
        p: 1.0,
        n_a: a.len(),
        n_b: b.len(),
        mean_a,
        mean_b,
        var_a,
        var_b,
        alpha,
        significant: false,
        degenerate_variance: false,
    };
    if se2 == 0.0 {
        if mean_a == mean_b {
            return Ok(result);
        }
        return Err(Error::DegenerateVariance { mean_a, mean_b });
    }
    result.t = (mean_a - mean_b) / se2.sqrt();
    result.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    result.p = student_t_two_sided(result.t, result.df);
    result.significant = result.p < alpha;
    Ok(result)
}

/// [`welch_t`] with the degenerate-variance case mapped to `t = ±∞, p = 0`.
pub fn welch_t_lenient(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult> {
    match welch_t(a, b, alpha) {
        Err(Error::DegenerateVariance { mean_a, mean_b }) => {
            let (_, var_a) = mean_var(a);
            let (_, var_b) = mean_var(b);
            Ok(TestResult {
                t: if mean_a > mean_b {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
                df: (a.len() + b.len()) as f64 - 2.0,
                p: 0.0,
                n_a: a.len(),
                n_b: b.len(),
                mean_a,
                mean_b,
                var_a,
                var_b,
                alpha,
                significant: true,
                degenerate_variance: true,
            })
        }
        other => other,
    }
}

/// One-sample Kolmogorov–Smirnov test against Uniform(0, 1).
/// Returns the statistic `D` and its asymptotic p-value (Stephens' small-sample correction).
pub fn ks_uniform(samples: &[f64]) -> (f64, f64) {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = v.clamp(0.0, 1.0);
            ((i as f64 + 1.0) / n - v).max(v - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    (d, kolmogorov_q(lambda))
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Defeat vs victory.
    Outcome,
    /// `ascension <= threshold` vs `ascension > threshold`.
    Ascension { threshold: u8 },
}

impl Split {
    pub fn ascension() -> Self {
        Split::Ascension {
            threshold: ASCENSION_SPLIT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Outcome => "outcome",
            Split::Ascension { .. } => "ascension",
        }
    }

    /// Labels in default order (sample A first).
    pub fn labels(self) -> (String, String) {
        match self {
            Split::Outcome => ("defeat".into(), "victory".into()),
            Split::Ascension { threshold } => (format!("ascension<={threshold}"), format!("ascension>{threshold}")),
        }
    }

    /// True when the row belongs to the default sample A.
    fn in_first(self, row: &RunAnalysis) -> bool {
        match self {
            Split::Outcome => !row.victory,
            Split::Ascension { threshold } => row.ascension <= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Act(u8),
    AllActs,
}

impl Scope {
    pub const ALL: [Scope; 4] = [Scope::Act(1), Scope::Act(2), Scope::Act(3), Scope::AllActs];

    pub fn name(self) -> String {
        match self {
            Scope::Act(n) => format!("act{n}"),
            Scope::AllActs => "all".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    Normalized,
    PerStep,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Normalized => "normalized",
            Metric::PerStep => "per-step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsConfig {
    pub alpha: f64,
    /// Put the default second group (victory, higher ascension) first.
    pub swap_groups: bool,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            alpha: DEFAULT_ALPHA,
            swap_groups: false,
        }
    }
}

impl StatsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidRecord(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

/// Rows left out of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Exclusions {
    pub discarded: usize,
    /// Run never entered the act.
    pub not_entered: usize,
    /// Act (or every act, for the all-acts scope) had min = max.
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub split: Split,
    pub scope: Scope,
    pub metric: Metric,
    pub label_a: String,
    pub label_b: String,
    pub result: TestResult,
    pub excluded: Exclusions,
}

/// The scoped metric of one row, or why it has none.
fn row_value(row: &RunAnalysis, scope: Scope, metric: Metric) -> std::result::Result<f64, Excluded> {
    if row.discarded.is_some() {
        return Err(Excluded::Discarded);
    }
    match scope {
        Scope::Act(act) => {
            let report = row.act(act).ok_or(Excluded::NotEntered)?;
            if report.degenerate {
                return Err(Excluded::Degenerate);
            }
            Ok(match metric {
                Metric::Normalized => report.normalized,
                Metric::PerStep => report.per_step,
            })
        }
        Scope::AllActs => match metric {
            Metric::Normalized => row.avg_normalized,
            Metric::PerStep => row.avg_per_step,
        }
        .ok_or(Excluded::Degenerate),
    }
}

enum Excluded {
    Discarded,
    NotEntered,
    Degenerate,
}

/// Scoped values of both groups in configured order, with labels and exclusion counts.
pub struct Groups {
    pub label_a: String,
    pub label_b: String,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub excluded: Exclusions,
}

pub fn collect_groups(rows: &[RunAnalysis], split: Split, scope: Scope, metric: Metric, swap: bool) -> Groups {
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut excluded = Exclusions::default();
    for row in rows {
        match row_value(row, scope, metric) {
            Ok(v) if split.in_first(row) => first.push(v),
            Ok(v) => second.push(v),
            Err(Excluded::Discarded) => excluded.discarded += 1,
            Err(Excluded::NotEntered) => excluded.not_entered += 1,
            Err(Excluded::Degenerate) => excluded.degenerate += 1,
        }
    }
    let (mut label_a, mut label_b) = split.labels();
    if swap {
        std::mem::swap(&mut first, &mut second);
        std::mem::swap(&mut label_a, &mut label_b);
    }
    Groups {
        label_a,
        label_b,
        a: first,
        b: second,
        excluded,
    }
}

/// Splits `rows`, extracts the scoped metric and runs Welch's test.
pub fn compare_groups(
    rows: &[RunAnalysis],
    split: Split,
    scope: Scope,
    metric: Metric,
    config: &StatsConfig,
) -> Result<GroupComparison> {
    config.validate()?;
    let groups = collect_groups(rows, split, scope, metric, config.swap_groups);
    for (values, label) in [(&groups.a, &groups.label_a), (&groups.b, &groups.label_b)] {
        if values.is_empty() {
            return Err(Error::EmptyGroup(label.clone()));
        }
    }
    let result = welch_t_lenient(&groups.a, &groups.b, config.alpha)?;
    Ok(GroupComparison {
        split,
        scope,
        metric,
        label_a: groups.label_a,
        label_b: groups.label_b,
        result,
        excluded: groups.excluded,
    })
}

/// A comparison that may not have been computable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub split: Split,
    pub scope: Scope,
    pub metric: Metric,
    pub label_a: String,
    pub label_b: String,
    pub result: Option<TestResult>,
    pub excluded: Exclusions,
    /// Why `result` is missing.
    pub note: String,
}

/// Every split against every scope for `metric`. Comparisons that fail
/// (empty or single-row groups) are kept with a note.
pub fn standard_comparisons(rows: &[RunAnalysis], metric: Metric, config: &StatsConfig) -> Result<Vec<ComparisonRow>> {
    config.validate()?;
    let mut out = Vec::new();
    for split in [Split::Outcome, Split::ascension()] {
        for scope in Scope::ALL {
            let groups = collect_groups(rows, split, scope, metric, config.swap_groups);
            let (result, note) = match compare_groups(rows, split, scope, metric, config) {
                Ok(c) => (Some(c.result), String::new()),
                Err(e) => (None, e.to_string()),
            };
            out.push(ComparisonRow {
                split,
                scope,
                metric,
                label_a: groups.label_a,
                label_b: groups.label_b,
                result,
                excluded: groups.excluded,
                note,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_samples() {
        let a = [0.3, 0.9, 0.1, 0.5];
        let r = welch_t(&a, &a, 0.05).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn reference_pair() {
        // scipy.stats.ttest_ind([1..5], [2,4,..,10], equal_var=False)
        let r = welch_t(&[1., 2., 3., 4., 5.], &[2., 4., 6., 8., 10.], 0.05).unwrap();
        assert!((r.t - -1.8973665961010275).abs() < 1e-9);
        assert!((r.p - 0.10753119493062718).abs() < 1e-6);
    }

    #[test]
    fn constant_samples() {
        let r = welch_t(&[0.4; 5], &[0.4; 3], 0.05).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        assert!(matches!(
            welch_t(&[0.9; 5], &[0.1; 3], 0.05),
            Err(Error::DegenerateVariance { .. })
        ));
        let lenient = welch_t_lenient(&[0.9; 5], &[0.1; 3], 0.05).unwrap();
        assert!(lenient.degenerate_variance);
        assert_eq!(lenient.p, 0.0);
        assert_eq!(lenient.t, f64::INFINITY);
    }

    #[test]
    fn too_few_observations() {
        assert!(matches!(
            welch_t(&[1.0], &[1.0, 2.0], 0.05),
            Err(Error::InsufficientSample { n_a: 1, n_b: 2 })
        ));
    }

    #[test]
    fn ks_detects_non_uniform() {
        let uniform: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) / 200.0).collect();
        assert!(ks_uniform(&uniform).1 > 0.99);
        let skewed: Vec<f64> = uniform.iter().map(|u| u * u).collect();
        assert!(ks_uniform(&skewed).1 < 1e-6);
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 2..40).prop_filter("non-constant", |v| v.iter().any(|x| *x != v[0]))
    }

    proptest! {
        #[test]
        fn antisymmetric(a in sample(), b in sample()) {
            let ab = welch_t(&a, &b, 0.05).unwrap();
            let ba = welch_t(&b, &a, 0.05).unwrap();
            prop_assert_eq!(ab.t, -ba.t);
            prop_assert_eq!(ab.p, ba.p);
        }

        #[test]
        fn translation_invariant(a in sample(), b in sample(), c in -1e3f64..1e3) {
            let base = welch_t(&a, &b, 0.05).unwrap();
            let shift = |v: &[f64]| v.iter().map(|x| x + c).collect::<Vec<_>>();
            let moved = welch_t(&shift(&a), &shift(&b), 0.05).unwrap();
            prop_assert!((base.t - moved.t).abs() <= 1e-9 * (1.0 + base.t.abs()));
            prop_assert!((base.p - moved.p).abs() <= 1e-9);
        }

        #[test]
        fn scale_invariant(a in sample(), b in sample(), k in -8i32..8, c in 0.01f64..100.0) {
            let base = welch_t(&a, &b, 0.05).unwrap();
            // Power-of-two scaling is exact in binary floating point.
            let pow2 = 2f64.powi(k);
            let scaled = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect::<Vec<_>>();
            let exact = welch_t(&scaled(&a, pow2), &scaled(&b, pow2), 0.05).unwrap();
            prop_assert_eq!(base.t, exact.t);
            prop_assert_eq!(base.p, exact.p);
            let general = welch_t(&scaled(&a, c), &scaled(&b, c), 0.05).unwrap();
            prop_assert!((base.t - general.t).abs() <= 1e-9 * (1.0 + base.t.abs()));
            prop_assert!((base.p - general.p).abs() <= 1e-9);
        }

        #[test]
        fn nested_alpha(a in sample(), b in sample()) {
            let strict = welch_t(&a, &b, 0.01).unwrap();
            let loose = welch_t(&a, &b, 0.05).unwrap();
            prop_assert!(!strict.significant || loose.significant);
            prop_assert!((0.0..=1.0).contains(&loose.p));
        }
    }
}
