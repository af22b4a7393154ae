use rand::Rng;

use super::VerifyError;

/// A non-decreasing Lipschitz function `H: ℝ → ℝ` with `H(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneH {
    Identity,
    /// Linear interpolation between sorted breakpoints `(t_i, H_i)`, constant
    /// beyond the first and last one. `(0, 0)` must be a breakpoint.
    PiecewiseLinear { points: Vec<(f64, f64)> },
    /// `0` for `t ≤ M − 1/n`, `nt − nM + 1` in between, `1` for `t ≥ M`.
    /// Requires `n > 1/M`.
    Truncation { level: f64, n: u32 },
}

impl MonotoneH {
    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self, VerifyError> {
        let h = MonotoneH::PiecewiseLinear { points };
        h.validate()?;
        Ok(h)
    }

    pub fn truncation(level: f64, n: u32) -> Result<Self, VerifyError> {
        let h = MonotoneH::Truncation { level, n };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let bad = |msg: String| Err(VerifyError::HNotAdmissible(msg));
        match self {
            MonotoneH::Identity => Ok(()),
            MonotoneH::PiecewiseLinear { points } => {
                if points.iter().any(|(t, h)| !t.is_finite() || !h.is_finite()) {
                    return bad("breakpoints must be finite".into());
                }
                if !points.contains(&(0.0, 0.0)) {
                    return bad("(0, 0) must be a breakpoint".into());
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return bad(format!("breakpoints not strictly increasing at t = {}", w[1].0));
                    }
                    if w[1].1 < w[0].1 {
                        return bad(format!("decreasing segment on [{}, {}]", w[0].0, w[1].0));
                    }
                }
                Ok(())
            }
            MonotoneH::Truncation { level, n } => {
                if !(level.is_finite() && *level > 0.0) {
                    return bad(format!("level M = {level} must be positive"));
                }
                if f64::from(*n) * level <= 1.0 {
                    return bad(format!("need n > 1/M, got n = {n}, M = {level}"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            MonotoneH::Identity => t,
            MonotoneH::PiecewiseLinear { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|&(ti, _)| ti <= t);
                let (t0, h0) = points[i - 1];
                let (t1, h1) = points[i];
                // Clamping keeps the rounded interpolant monotone across breakpoints.
                (h0 + (t - t0) * (h1 - h0) / (t1 - t0)).clamp(h0, h1)
            }
            MonotoneH::Truncation { level, n } => {
                let n = f64::from(*n);
                if t >= *level {
                    1.0
                } else if t <= level - 1.0 / n {
                    0.0
                } else {
                    (n * t - n * level + 1.0).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Random piecewise-linear `H` with breakpoints in `[-span, span]`:
    /// sorted uniform draws plus `0`, cumulative nonnegative increments
    /// (some of them zero, giving flat pieces), shifted so that `H(0) = 0`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, span: f64) -> Self {
        let k = rng.random_range(2..=6);
        let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(-span..span)).collect();
        ts.push(0.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut hs = Vec::with_capacity(ts.len());
        let mut acc = 0.0;
        for i in 0..ts.len() {
            if i > 0 && !rng.random_bool(0.25) {
                acc += rng.random_range(0.0..3.0) * (ts[i] - ts[i - 1]);
            }
            hs.push(acc);
        }
        let zero = ts.iter().position(|&t| t == 0.0).expect("0 was inserted");
        let shift = hs[zero];
        let points = ts
            .into_iter()
            .zip(hs)
            .enumerate()
            .map(|(i, (t, h))| (t, if i == zero { 0.0 } else { h - shift }))
            .collect();
        MonotoneH::PiecewiseLinear { points }
    }
}
