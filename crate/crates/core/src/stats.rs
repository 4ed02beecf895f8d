//! Activation-rate statistics: how often each input dimension fires, and how
//! concentrated that firing is.

use std::io::Write;

use serde::Serialize;

use crate::compression::ActivationBatch;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationProfile<T> {
    /// Fraction of samples in which each dimension is active.
    pub rates: Vec<T>,
    /// Dimensions sorted by rate, highest first; ties by lower index.
    pub ranked_indices: Vec<usize>,
    /// Smallest fraction of top-ranked dimensions holding half the total rate.
    pub half_mass_fraction: T,
}

impl<T: Scalar> ActivationProfile<T> {
    /// Builds a profile from rates assigned directly (each in `[0, 1]`).
    ///
    /// The half-mass cut allows for the rounding of the running sum, so
    /// exactly uniform rates give exactly one half for even `n`.
    pub fn from_rates(rates: Vec<T>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if let Some(bad) = rates.iter().find(|r| !(**r >= T::zero() && **r <= T::one())) {
            return Err(Error::Range(format!("activation rate {bad} outside [0, 1]")));
        }
        let ranked_indices = rank_descending(&rates);
        let sorted: Vec<T> = ranked_indices.iter().map(|&i| rates[i]).collect();
        let total = sorted.iter().fold(T::zero(), |a, &r| a + r);
        if total <= T::zero() {
            return Err(Error::NoActivations);
        }
        // partial sums carry rounding error of order n * eps * total
        let slack = T::from_count(sorted.len()) * T::epsilon() * total;
        let half = total / T::lit(2.0) - slack;
        let mut cum = T::zero();
        let mut count = sorted.len();
        for (c, &r) in sorted.iter().enumerate() {
            cum = cum + r;
            if cum >= half {
                count = c + 1;
                break;
            }
        }
        Ok(Self {
            half_mass_fraction: T::from_count(count) / T::from_count(sorted.len()),
            rates,
            ranked_indices,
        })
    }

    pub fn dims(&self) -> usize {
        self.rates.len()
    }

    /// Rates in ranked order.
    pub fn ranked_rates(&self) -> Vec<T> {
        self.ranked_indices.iter().map(|&i| self.rates[i]).collect()
    }

    /// `rank,rate` rows, rank starting at 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rank,rate")?;
        for (r, v) in self.ranked_rates().iter().enumerate() {
            writeln!(out, "{},{}", r + 1, v)?;
        }
        Ok(())
    }
}

fn rank_descending<T: PartialOrd>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("comparable values"));
    idx
}

/// Activation rates with a strict `> 0` test.
pub fn activation_rates<T: Scalar>(acts: &ActivationBatch<T>) -> Result<ActivationProfile<T>> {
    activation_rates_above(acts, T::zero())
}

/// Activation rates counting entries strictly above `threshold`.
///
/// The half-mass cut is decided on integer counts, so it is exact regardless
/// of the floating-point type.
pub fn activation_rates_above<T: Scalar>(acts: &ActivationBatch<T>, threshold: T) -> Result<ActivationProfile<T>> {
    let x = acts.x();
    let p = x.cols();
    if p == 0 {
        return Err(Error::EmptyBatch);
    }
    let counts: Vec<usize> = (0..x.rows())
        .map(|i| x.row(i).iter().filter(|&&v| v > threshold).count())
        .collect();
    profile_from_counts(&counts, p)
}

/// Profile from per-dimension active counts over `samples` samples.
pub fn profile_from_counts<T: Scalar>(counts: &[usize], samples: usize) -> Result<ActivationProfile<T>> {
    if samples == 0 || counts.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let ranked_indices = rank_descending(counts);
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoActivations);
    }
    let mut cum = 0usize;
    let mut cut = counts.len();
    for (c, &i) in ranked_indices.iter().enumerate() {
        cum += counts[i];
        if 2 * cum >= total {
            cut = c + 1;
            break;
        }
    }
    let p = T::from_count(samples);
    Ok(ActivationProfile {
        rates: counts.iter().map(|&c| T::from_count(c) / p).collect(),
        ranked_indices,
        half_mass_fraction: T::from_count(cut) / T::from_count(counts.len()),
    })
}

/// Source-versus-target concentration shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewReport<T> {
    pub source_half_mass: T,
    pub target_half_mass: T,
    /// `source_half_mass / target_half_mass`; above 1 means the target is
    /// more concentrated.
    pub ratio: T,
    pub source_curve: Vec<T>,
    pub target_curve: Vec<T>,
}

pub fn compare_profiles<T: Scalar>(
    source: &ActivationProfile<T>,
    target: &ActivationProfile<T>,
) -> Result<SkewReport<T>> {
    if source.dims() != target.dims() {
        return Err(Error::dim("compare_profiles", (source.dims(), 1), (target.dims(), 1)));
    }
    Ok(SkewReport {
        source_half_mass: source.half_mass_fraction,
        target_half_mass: target.half_mass_fraction,
        ratio: source.half_mass_fraction / target.half_mass_fraction,
        source_curve: source.ranked_rates(),
        target_curve: target.ranked_rates(),
    })
}

impl<T: Scalar> SkewReport<T> {
    /// `rank,source_rate,target_rate` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rank,source_rate,target_rate")?;
        for (r, (s, t)) in self.source_curve.iter().zip(&self.target_curve).enumerate() {
            writeln!(out, "{},{},{}", r + 1, s, t)?;
        }
        Ok(())
    }
}
