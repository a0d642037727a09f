//! Summary statistics of extinction (final-set hitting) times.

use super::path::SimulationPath;
use crate::error::{Error, Result};

/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionStats {
    pub paths: usize,
    /// Paths that reached the final set by `t_max`.
    pub extinct: usize,
    pub t_max: f64,
    /// Mean over extinct paths only; `None` when every path is censored.
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Normal-approximation 95% interval for the mean.
    pub ci95: Option<(f64, f64)>,
    pub fraction_censored: f64,
}

impl ExtinctionStats {
    /// Mean as text, `"> t_max"` when nothing went extinct.
    pub fn mean_display(&self) -> String {
        match self.mean {
            Some(m) => format!("{m}"),
            None => format!("> {}", self.t_max),
        }
    }

    /// `key=value` lines.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| v.to_string());
        vec![
            ("paths".into(), self.paths.to_string()),
            ("extinct".into(), self.extinct.to_string()),
            ("t_max".into(), self.t_max.to_string()),
            ("mean_extinction_time".into(), self.mean_display()),
            ("median_extinction_time".into(), opt(self.median)),
            ("ci95_low".into(), opt(self.ci95.map(|c| c.0))),
            ("ci95_high".into(), opt(self.ci95.map(|c| c.1))),
            (
                "fraction_censored".into(),
                self.fraction_censored.to_string(),
            ),
        ]
    }
}

pub fn empirical_extinction_stats(paths: &[SimulationPath]) -> Result<ExtinctionStats> {
    let t_max = paths.iter().map(|p| p.t_max).fold(0.0, f64::max);
    let times: Vec<Option<f64>> = paths.iter().map(|p| p.hitting_time_final_set).collect();
    extinction_stats_from_times(&times, t_max)
}

/// Censored entries (`None`) are counted but never averaged in.
pub fn extinction_stats_from_times(times: &[Option<f64>], t_max: f64) -> Result<ExtinctionStats> {
    if times.is_empty() {
        return Err(Error::InvalidParams(
            "extinction statistics need at least one path".into(),
        ));
    }
    let mut observed: Vec<f64> = times.iter().flatten().copied().collect();
    let paths = times.len();
    let extinct = observed.len();
    let fraction_censored = (paths - extinct) as f64 / paths as f64;
    if extinct == 0 {
        return Ok(ExtinctionStats {
            paths,
            extinct,
            t_max,
            mean: None,
            median: None,
            ci95: None,
            fraction_censored,
        });
    }
    observed.sort_by(f64::total_cmp);
    let n = extinct as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let median = if extinct % 2 == 1 {
        observed[extinct / 2]
    } else {
        0.5 * (observed[extinct / 2 - 1] + observed[extinct / 2])
    };
    let half = if extinct > 1 {
        let var = observed.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Z95 * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ExtinctionStats {
        paths,
        extinct,
        t_max,
        mean: Some(mean),
        median: Some(median),
        ci95: Some((mean - half, mean + half)),
        fraction_censored,
    })
}
