//! Population observables: per-site flip probabilities relative to the
//! initial diabatic configuration, their site average E.S(t), and the final
//! transition probability of excited states (FTPE), the mean of E.S(t) over
//! the last tenth of the sweep window.

use crate::dynamics::StateVector;
use crate::error::{Error, Result};

/// Fraction of the window, counted back from its end, that FTPE averages.
pub const FTPE_WINDOW_FRACTION: f64 = 0.1;

/// Probability that `site` differs from its value in `reference_config`.
pub fn site_flip_probability(
    psi: &StateVector,
    site: usize,
    reference_config: usize,
) -> Result<f64> {
    let n = psi.n();
    if site >= n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let mask = 1usize << (n - 1 - site);
    Ok(psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(b, _)| (b ^ reference_config) & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Flip probability of every site from basis-state populations `|ψ_b|²`.
pub fn site_flip_probabilities(populations: &[f64], n: usize, reference_config: usize) -> Vec<f64> {
    debug_assert_eq!(populations.len(), 1 << n);
    let mut flips = vec![0.0; n];
    for (b, &p) in populations.iter().enumerate() {
        let diff = b ^ reference_config;
        for (site, f) in flips.iter_mut().enumerate() {
            if (diff >> (n - 1 - site)) & 1 == 1 {
                *f += p;
            }
        }
    }
    flips
}

/// E.S(t) and its complement G.S(t) = 1 − E.S(t).
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitedSeries {
    pub times: Vec<f64>,
    pub excited: Vec<f64>,
    pub ground: Vec<f64>,
}

pub fn excited_mean(site_flips: &[f64]) -> f64 {
    site_flips.iter().sum::<f64>() / site_flips.len() as f64
}

pub fn excited_series(
    times: &[f64],
    states: &[StateVector],
    reference_config: usize,
) -> Result<ExcitedSeries> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no samples given".into()));
    }
    if times.len() != states.len() {
        return Err(Error::InvalidArgument(format!(
            "{} times for {} states",
            times.len(),
            states.len()
        )));
    }
    let excited: Vec<f64> = states
        .iter()
        .map(|psi| {
            excited_mean(&site_flip_probabilities(
                &psi.populations(),
                psi.n(),
                reference_config,
            ))
        })
        .collect();
    let ground = excited.iter().map(|e| 1.0 - e).collect();
    Ok(ExcitedSeries {
        times: times.to_vec(),
        excited,
        ground,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtpeResult {
    pub ftpe: f64,
    pub window_start: f64,
    pub samples_used: usize,
}

/// Trapezoidal average of `series` over the final tenth of the span of
/// `times`. If no sample sits exactly on the window start, the value there
/// is linearly interpolated from the two bracketing samples.
pub fn ftpe(series: &[f64], times: &[f64]) -> Result<FtpeResult> {
    if series.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "{} series values for {} times",
            series.len(),
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "times must be strictly increasing".into(),
        ));
    }
    let (Some(&t_first), Some(&t_last)) = (times.first(), times.last()) else {
        return Err(Error::TooFewSamples { found: 0 });
    };
    let window_start = t_first + (1.0 - FTPE_WINDOW_FRACTION) * (t_last - t_first);
    let first_in = times.partition_point(|&t| t < window_start);
    let samples_used = times.len() - first_in;
    if samples_used < 2 {
        return Err(Error::TooFewSamples {
            found: samples_used,
        });
    }

    let mut integral = 0.0;
    if first_in > 0 && times[first_in] > window_start {
        let (t0, t1) = (times[first_in - 1], times[first_in]);
        let (v0, v1) = (series[first_in - 1], series[first_in]);
        let at_start = v0 + (v1 - v0) * (window_start - t0) / (t1 - t0);
        integral += 0.5 * (at_start + v1) * (t1 - window_start);
    }
    for i in first_in..times.len() - 1 {
        integral += 0.5 * (series[i] + series[i + 1]) * (times[i + 1] - times[i]);
    }
    Ok(FtpeResult {
        ftpe: integral / (t_last - window_start),
        window_start,
        samples_used,
    })
}
