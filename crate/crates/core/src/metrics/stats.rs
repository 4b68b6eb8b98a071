//! Two-sample tests for cohort comparison.

use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use super::MetricsReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sided Mann–Whitney U with the normal approximation, tie correction
/// and continuity correction. The statistic is U of the first sample.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> TestResult {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut all: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += rank * all[i..=j].iter().filter(|x| x.1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let total = n1 + n2;
    let var = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        return TestResult {
            statistic: u,
            p_value: 1.0,
        };
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    TestResult {
        statistic: u,
        p_value: erfc(z / std::f64::consts::SQRT_2).min(1.0),
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test, two-sided.
pub fn welch_t(a: &[f64], b: &[f64]) -> TestResult {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return if ma == mb {
            TestResult {
                statistic: 0.0,
                p_value: 1.0,
            }
        } else {
            TestResult {
                statistic: (ma - mb).signum() * f64::INFINITY,
                p_value: 0.0,
            }
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    TestResult {
        statistic: t,
        p_value: beta_reg(df / 2.0, 0.5, df / (df + t * t)),
    }
}

fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub median_a: f64,
    pub median_b: f64,
    pub mann_whitney: TestResult,
    pub welch: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortComparison {
    pub epsilon: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub metrics: Vec<MetricComparison>,
}

const COMPARED: [&str; 6] = [
    "n_vertices",
    "n_edges",
    "avg_clustering",
    "avg_betweenness",
    "modularity",
    "global_efficiency",
];

fn cohort_epsilon(c: &[MetricsReport], name: &str) -> Result<f64> {
    if c.len() < 2 {
        return Err(Error::Config(format!(
            "cohort {name} needs at least 2 reports, got {}",
            c.len()
        )));
    }
    let eps = c[0].epsilon;
    match c.iter().find(|r| r.epsilon != eps) {
        Some(r) => Err(Error::EpsilonMismatch(eps, r.epsilon)),
        None => Ok(eps),
    }
}

/// Per-metric summaries and p-values for two cohorts built at the same ε.
pub fn compare_cohorts(a: &[MetricsReport], b: &[MetricsReport]) -> Result<CohortComparison> {
    let ea = cohort_epsilon(a, "a")?;
    let eb = cohort_epsilon(b, "b")?;
    if ea != eb {
        return Err(Error::EpsilonMismatch(ea, eb));
    }
    let metrics = COMPARED
        .iter()
        .map(|&name| {
            let xa: Vec<f64> = a
                .iter()
                .map(|r| r.value(name).expect("known column"))
                .collect();
            let xb: Vec<f64> = b
                .iter()
                .map(|r| r.value(name).expect("known column"))
                .collect();
            MetricComparison {
                metric: name.to_string(),
                mean_a: mean_var(&xa).0,
                mean_b: mean_var(&xb).0,
                median_a: median(&xa),
                median_b: median(&xb),
                mann_whitney: mann_whitney_u(&xa, &xb),
                welch: welch_t(&xa, &xb),
            }
        })
        .collect();
    Ok(CohortComparison {
        epsilon: ea,
        n_a: a.len(),
        n_b: b.len(),
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-10 * b.abs().max(1e-300)
    }

    /// Samples a and b, then U, its p-value, Welch t and its p-value.
    type Case = (&'static [f64], &'static [f64], f64, f64, f64, f64);

    // Reference values from scipy.stats (mannwhitneyu asymptotic with
    // continuity correction, ttest_ind with equal_var=False).
    const CASES: [Case; 3] = [
        (
            &[1., 2., 3.],
            &[101., 102., 103.],
            0.0,
            0.08085559837005224,
            -122.47448713915891,
            2.6654818961636016e-08,
        ),
        (
            &[1.5, 2.0, 2.0, 3.1, 4.0, 4.0],
            &[2.0, 3.5, 4.0, 5.5, 6.0],
            7.0,
            0.16304505585423734,
            -1.6977358724935288,
            0.13428236185462905,
        ),
        (
            &[0.2, 0.4, 0.4, 0.9, 1.3, 0.7, 0.5],
            &[0.8, 1.1, 0.4, 1.6, 2.2, 1.0, 0.9, 1.4],
            10.5,
            0.04813101378106178,
            -2.2691373977037173,
            0.04200612353310002,
        ),
    ];

    #[test]
    fn matches_reference_values() {
        for (a, b, u, pu, t, pt) in CASES {
            let mw = mann_whitney_u(a, b);
            assert_eq!(mw.statistic, u);
            assert!(close(mw.p_value, pu), "{} vs {pu}", mw.p_value);
            let w = welch_t(a, b);
            assert!(close(w.statistic, t), "{} vs {t}", w.statistic);
            assert!(close(w.p_value, pt), "{} vs {pt}", w.p_value);
        }
    }

    #[test]
    fn identical_and_constant_samples() {
        let a = [1.0, 2.0, 4.0];
        assert_eq!(
            welch_t(&a, &a),
            TestResult {
                statistic: 0.0,
                p_value: 1.0
            }
        );
        assert_eq!(mann_whitney_u(&a, &a).p_value, 1.0);
        assert_eq!(welch_t(&[2.0, 2.0], &[2.0, 2.0]).p_value, 1.0);
        assert_eq!(welch_t(&[2.0, 2.0], &[3.0, 3.0]).p_value, 0.0);
        assert_eq!(mann_whitney_u(&[2.0, 2.0], &[2.0, 2.0]).p_value, 1.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
