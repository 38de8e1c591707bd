//! Two-sample t, Pearson r, Cronbach alpha, and the cohort report built
//! from them.

use serde::{Deserialize, Serialize, Serializer};

use super::scoring::{Outcome, Profile, ProfileSet};
use super::{AssessmentError, SubtestKind};

pub const STATS_REPORT_VERSION: u32 = 1;

/// Two-tailed critical values of Student's t at p < 0.05.
const T_CRITICAL_05: [(u32, f64); 34] = [
    (1, 12.706),
    (2, 4.303),
    (3, 3.182),
    (4, 2.776),
    (5, 2.571),
    (6, 2.447),
    (7, 2.365),
    (8, 2.306),
    (9, 2.262),
    (10, 2.228),
    (11, 2.201),
    (12, 2.179),
    (13, 2.160),
    (14, 2.145),
    (15, 2.131),
    (16, 2.120),
    (17, 2.110),
    (18, 2.101),
    (19, 2.093),
    (20, 2.086),
    (21, 2.080),
    (22, 2.074),
    (23, 2.069),
    (24, 2.064),
    (25, 2.060),
    (26, 2.056),
    (27, 2.052),
    (28, 2.048),
    (29, 2.045),
    (30, 2.042),
    (40, 2.021),
    (60, 2.000),
    (120, 1.980),
    (u32::MAX, 1.960),
];

/// Critical |t| for `df` degrees of freedom. Between tabulated rows the
/// next smaller df is used, which is conservative.
pub fn critical_t(df: u32) -> Option<f64> {
    if df == 0 {
        return None;
    }
    T_CRITICAL_05
        .iter()
        .rev()
        .find(|(d, _)| *d <= df)
        .map(|(_, t)| *t)
        .or(Some(T_CRITICAL_05[0].1))
}

fn degenerate(why: impl Into<String>) -> AssessmentError {
    AssessmentError::DegenerateInput(why.into())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n − 1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    #[serde(serialize_with = "fixed9")]
    pub t: f64,
    pub df: u32,
    #[serde(serialize_with = "fixed9")]
    pub critical: f64,
    pub significant: bool,
}

/// Pooled-variance two-sample t (group a minus group b).
pub fn two_sample_t(a: &[f64], b: &[f64]) -> Result<TTest, AssessmentError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(degenerate("each group needs at least two members"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0);
    if pooled == 0.0 {
        return Err(degenerate("pooled variance is zero"));
    }
    let t = (mean(a) - mean(b)) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let df = (a.len() + b.len() - 2) as u32;
    let critical = critical_t(df).expect("df >= 2");
    Ok(TTest {
        t,
        df,
        critical,
        significant: t.abs() > critical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    #[serde(serialize_with = "fixed9")]
    pub r: f64,
    pub n: usize,
    pub significant: bool,
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<Correlation, AssessmentError> {
    if x.len() != y.len() {
        return Err(degenerate("paired vectors differ in length"));
    }
    if x.len() < 3 {
        return Err(degenerate("correlation needs at least three pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(degenerate("a variable has zero variance"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = x.len() as u32 - 2;
    let critical = critical_t(df).expect("df >= 1");
    let significant = if r.abs() >= 1.0 {
        true
    } else {
        (r * (df as f64).sqrt() / (1.0 - r * r).sqrt()).abs() > critical
    };
    Ok(Correlation {
        r,
        n: x.len(),
        significant,
    })
}

/// Alpha over a respondents × items score matrix.
pub fn cronbach_alpha(matrix: &[Vec<f64>]) -> Result<f64, AssessmentError> {
    if matrix.len() < 2 {
        return Err(degenerate("alpha needs at least two respondents"));
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(degenerate("alpha needs at least two items"));
    }
    if matrix.iter().any(|row| row.len() != k) {
        return Err(degenerate("ragged item matrix"));
    }
    let item_variance: f64 = (0..k)
        .map(|j| variance(&matrix.iter().map(|row| row[j]).collect::<Vec<_>>()))
        .sum();
    let totals: Vec<f64> = matrix.iter().map(|row| row.iter().sum()).collect();
    let total_variance = variance(&totals);
    if total_variance == 0.0 {
        return Err(degenerate("total score variance is zero"));
    }
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_variance / total_variance))
}

/// Percentage of `totals` strictly below `cutoff · max`.
pub fn below_cutoff_pct(totals: &[u32], max: u32, cutoff: f64) -> f64 {
    if totals.is_empty() {
        return 0.0;
    }
    let line = cutoff * max as f64;
    let below = totals.iter().filter(|&&t| (t as f64) < line).count();
    100.0 * below as f64 / totals.len() as f64
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn fixed9<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round9(*x))
}

fn fixed9_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_some(&round9(*x)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    #[serde(serialize_with = "fixed9")]
    pub mean: f64,
    #[serde(serialize_with = "fixed9")]
    pub sd: f64,
}

impl GroupSummary {
    fn of(xs: &[f64]) -> Self {
        GroupSummary {
            mean: mean(xs),
            sd: variance(xs).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtestStats {
    pub kind: SubtestKind,
    pub max: u32,
    pub group_a: GroupSummary,
    pub group_b: GroupSummary,
    /// `None` when both groups have zero variance.
    pub t_test: Option<TTest>,
    #[serde(serialize_with = "fixed9_opt")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub version: u32,
    #[serde(serialize_with = "fixed9")]
    pub cutoff: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub subtests: Vec<SubtestStats>,
    pub total_t_test: Option<TTest>,
    #[serde(serialize_with = "fixed9_opt")]
    pub alpha: Option<f64>,
    /// Battery total against the imported external score, both groups.
    pub correlation: Option<Correlation>,
    #[serde(serialize_with = "fixed9")]
    pub below_cutoff_pct_a: f64,
    #[serde(serialize_with = "fixed9")]
    pub below_cutoff_pct_b: f64,
}

fn outcome_matrix(profiles: &[&Profile], kinds: &[SubtestKind]) -> Vec<Vec<f64>> {
    profiles
        .iter()
        .map(|p| {
            kinds
                .iter()
                .flat_map(|k| p.score(*k).map(|s| s.outcomes.as_slice()).unwrap_or(&[]))
                .map(|o| (*o == Outcome::Correct) as u8 as f64)
                .collect()
        })
        .collect()
}

fn structure(p: &Profile) -> Vec<(SubtestKind, u32)> {
    p.subtests.iter().map(|s| (s.kind, s.max)).collect()
}

/// Compares two cohorts scored on the same battery. `cutoff` is a fraction
/// of the battery maximum.
pub fn cohort_stats(a: &ProfileSet, b: &ProfileSet, cutoff: f64) -> Result<StatsReport, AssessmentError> {
    if !(0.0..=1.0).contains(&cutoff) {
        return Err(AssessmentError::InvalidCutoff(cutoff));
    }
    if a.profiles.len() < 2 || b.profiles.len() < 2 {
        return Err(degenerate("each group needs at least two members"));
    }
    let shape = structure(&a.profiles[0]);
    if let Some(odd) = a.profiles.iter().chain(&b.profiles).find(|p| structure(p) != shape) {
        return Err(AssessmentError::IncompatibleGroups(format!(
            "{} was scored on a different battery",
            odd.student_id
        )));
    }
    let everyone: Vec<&Profile> = a.profiles.iter().chain(&b.profiles).collect();
    let scores = |set: &ProfileSet, kind: SubtestKind| -> Vec<f64> {
        set.profiles
            .iter()
            .map(|p| p.score(kind).map(|s| s.correct).unwrap_or(0) as f64)
            .collect()
    };

    let subtests = shape
        .iter()
        .map(|&(kind, max)| {
            let (xa, xb) = (scores(a, kind), scores(b, kind));
            SubtestStats {
                kind,
                max,
                group_a: GroupSummary::of(&xa),
                group_b: GroupSummary::of(&xb),
                t_test: two_sample_t(&xa, &xb).ok(),
                alpha: cronbach_alpha(&outcome_matrix(&everyone, &[kind])).ok(),
            }
        })
        .collect();

    let totals = |set: &ProfileSet| -> Vec<u32> { set.profiles.iter().map(Profile::total_correct).collect() };
    let (ta, tb) = (totals(a), totals(b));
    let as_f64 = |v: &[u32]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let kinds: Vec<SubtestKind> = shape.iter().map(|(k, _)| *k).collect();
    let max = a.profiles[0].total_max();

    let paired: Vec<(f64, f64)> = everyone
        .iter()
        .filter_map(|p| p.external_score.map(|e| (p.total_correct() as f64, e)))
        .collect();
    let correlation = if paired.is_empty() {
        None
    } else {
        let (x, y): (Vec<f64>, Vec<f64>) = paired.into_iter().unzip();
        pearson_r(&x, &y).ok()
    };

    Ok(StatsReport {
        version: STATS_REPORT_VERSION,
        cutoff,
        n_a: a.profiles.len(),
        n_b: b.profiles.len(),
        subtests,
        total_t_test: two_sample_t(&as_f64(&ta), &as_f64(&tb)).ok(),
        alpha: cronbach_alpha(&outcome_matrix(&everyone, &kinds)).ok(),
        correlation,
        below_cutoff_pct_a: below_cutoff_pct(&ta, max, cutoff),
        below_cutoff_pct_b: below_cutoff_pct(&tb, max, cutoff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hand computation, exact fractions:
    //   a = 3 5 4 6 7 -> mean 5, var 5/2
    //   b = 2 4 3 3 5 -> mean 17/5, var 13/10
    //   pooled = 19/10, t = (8/5) / sqrt(19/10 · 2/5) = 8/sqrt(19)
    const A: [f64; 5] = [3.0, 5.0, 4.0, 6.0, 7.0];
    const B: [f64; 5] = [2.0, 4.0, 3.0, 3.0, 5.0];

    #[test]
    fn t_matches_hand_computation() {
        let t = two_sample_t(&A, &B).unwrap();
        assert!((t.t - 8.0 / 19f64.sqrt()).abs() < 1e-9);
        assert_eq!(t.df, 8);
        assert_eq!(t.critical, 2.306);
        assert!(!t.significant);
    }

    #[test]
    fn identical_groups_and_swap() {
        assert_eq!(two_sample_t(&A, &A).unwrap().t, 0.0);
        let ab = two_sample_t(&A, &B).unwrap().t;
        let ba = two_sample_t(&B, &A).unwrap().t;
        assert_eq!(ab, -ba);
    }

    #[test]
    fn degenerate_t() {
        assert!(two_sample_t(&[1.0], &B).is_err());
        assert!(two_sample_t(&[2.0, 2.0], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn pearson_matches_hand_computation() {
        // sxy = 6, sxx = 10, syy = 6 -> r = sqrt(3/5)
        let c = pearson_r(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
        assert!((c.r - 0.6f64.sqrt()).abs() < 1e-9);
        // t = r sqrt(3) / sqrt(2/5) = 2.121 < 3.182
        assert!(!c.significant);
        assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn alpha_matches_hand_computation() {
        // item variances 1/5, 1/5, 3/10; total variance 1 -> 3/2 · (1 − 7/10)
        let m = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ];
        assert!((cronbach_alpha(&m).unwrap() - 0.45).abs() < 1e-9);
    }

    #[test]
    fn duplicate_items_alpha_is_one() {
        let m: Vec<Vec<f64>> = [1.0, 0.0, 1.0, 1.0, 0.0, 2.0].iter().map(|&x| vec![x; 4]).collect();
        assert!((cronbach_alpha(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_table_lookup() {
        assert_eq!(critical_t(0), None);
        assert_eq!(critical_t(1), Some(12.706));
        assert_eq!(critical_t(35), Some(2.042));
        assert_eq!(critical_t(198), Some(1.980));
        assert_eq!(critical_t(100_000), Some(1.980));
        assert_eq!(critical_t(u32::MAX), Some(1.960));
    }

    #[test]
    fn critical_table_agrees_with_student_t_quantiles() {
        use statrs::distribution::{ContinuousCDF, StudentsT};
        for &(df, tabulated) in T_CRITICAL_05.iter().take(33) {
            let q = StudentsT::new(0.0, 1.0, df as f64).unwrap().inverse_cdf(0.975);
            assert!((q - tabulated).abs() < 5e-4, "df {df}: {q} vs {tabulated}");
        }
    }

    #[test]
    fn cutoff_percentage() {
        let totals: Vec<u32> = (0..100).map(|i| if i < 7 { 10 } else { 60 }).collect();
        assert_eq!(below_cutoff_pct(&totals, 80, 0.5), 7.0);
        assert_eq!(below_cutoff_pct(&[], 80, 0.5), 0.0);
    }

    #[test]
    fn rounding_on_the_wire() {
        let t = TTest {
            t: 1.0 / 3.0,
            df: 8,
            critical: 2.306,
            significant: false,
        };
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"t":0.333333333,"df":8,"critical":2.306,"significant":false}"#
        );
    }
}
