//! Summary statistics and delete-one jackknife standard errors.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n − 1` denominator); NaN for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> f64 {
    (sample_variance(xs) / xs.len() as f64).sqrt()
}

/// Jackknife standard error from the leave-one-out replicates of a statistic.
pub fn jackknife_stderr(leave_one_out: &[f64]) -> f64 {
    let n = leave_one_out.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(leave_one_out);
    let ss: f64 = leave_one_out.iter().map(|t| (t - m) * (t - m)).sum();
    ((n - 1) as f64 / n as f64 * ss).sqrt()
}

/// Leave-one-out unbiased variances, in `O(n)`. Needs at least three values.
pub fn leave_one_out_variances(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 3 {
        return Vec::new();
    }
    let m = mean(xs);
    // Centred sums keep the updates well conditioned.
    let s1: f64 = xs.iter().map(|x| x - m).sum();
    let s2: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    let k = (n - 1) as f64;
    xs.iter()
        .map(|x| {
            let d = x - m;
            let t1 = s1 - d;
            let t2 = s2 - d * d;
            (t2 - t1 * t1 / k) / (k - 1.0)
        })
        .collect()
}

/// Jackknife standard error of the unbiased sample variance.
pub fn variance_jackknife_stderr(xs: &[f64]) -> f64 {
    jackknife_stderr(&leave_one_out_variances(xs))
}

/// Index-of-dispersion excess `(s² − x̄)/x̄` of counts, with its leave-one-out
/// replicates.
pub fn dispersion_excess(counts: &[f64]) -> (f64, Vec<f64>) {
    let m = mean(counts);
    let v = sample_variance(counts);
    let n = counts.len() as f64;
    let total: f64 = counts.iter().sum();
    let loo_var = leave_one_out_variances(counts);
    let loo = counts
        .iter()
        .zip(&loo_var)
        .map(|(c, var)| {
            let mean_i = (total - c) / (n - 1.0);
            (var - mean_i) / mean_i
        })
        .collect();
    ((v - m) / m, loo)
}
