//! The existence threshold `Λ = sup_ρ λ_ρ`.

use super::VariationalError;

fn check(p: f64, q: f64, c: f64, norm_a: f64, norm_b: f64) -> Result<(), VariationalError> {
    let bad = |msg: String| Err(VariationalError::InvalidParameters(msg));
    if !(p > 1.0 && p.is_finite()) {
        return bad(format!("p = {p} must exceed 1"));
    }
    if !(q.is_finite() && q >= p - 1.0 - EXPONENT_SLACK) {
        return bad(format!("q = {q} must be at least p - 1 = {}", p - 1.0));
    }
    if !(c > 0.0 && c.is_finite()) {
        return bad(format!("embedding constant {c} must be positive"));
    }
    if !(norm_a > 0.0 && norm_a.is_finite()) {
        return bad(format!("‖a‖₁ = {norm_a} must be positive"));
    }
    if !(norm_b > 0.0 && norm_b.is_finite()) {
        return bad(format!("‖b‖₁ = {norm_b} must be positive"));
    }
    Ok(())
}

/// `q` within this distance of `p − 1` is treated as the limit case.
const EXPONENT_SLACK: f64 = 1e-12;

/// Whether `(p, q)` is the limit case `q = p − 1`.
pub fn is_limit_case(p: f64, q: f64) -> bool {
    (q - (p - 1.0)).abs() <= EXPONENT_SLACK
}

/// `λ_ρ = ρ^{p−1} / (C‖a‖₁ + C^{q+1}‖b‖₁ρ^q)`.
pub fn lambda_rho(rho: f64, p: f64, q: f64, c: f64, norm_a: f64, norm_b: f64) -> Result<f64, VariationalError> {
    check(p, q, c, norm_a, norm_b)?;
    if !(rho > 0.0) {
        return Err(VariationalError::InvalidParameters(format!("rho = {rho} must be positive")));
    }
    Ok(rho.powf(p - 1.0) / (c * norm_a + c.powf(q + 1.0) * norm_b * rho.powf(q)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub lambda: f64,
    /// Maximizer of `λ_ρ`; infinite in the limit case, where the supremum is
    /// approached as `ρ → ∞`.
    pub rho_star: f64,
}

/// `Λ` and the maximizing radius.
pub fn threshold_lambda(p: f64, q: f64, c: f64, norm_a: f64, norm_b: f64) -> Result<Threshold, VariationalError> {
    check(p, q, c, norm_a, norm_b)?;
    if is_limit_case(p, q) {
        // Computed without ‖a‖₁ so the result cannot depend on it.
        return Ok(Threshold {
            lambda: 1.0 / (c.powf(p) * norm_b),
            rho_star: f64::INFINITY,
        });
    }
    let rho_q = (p - 1.0) * c * norm_a / (c.powf(q + 1.0) * norm_b * (q - p + 1.0));
    let rho_star = rho_q.powf(1.0 / q);
    Ok(Threshold {
        lambda: lambda_rho(rho_star, p, q, c, norm_a, norm_b)?,
        rho_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert!((lambda_rho(1.0, 2.0, 1.0, 1.0, 3.0, 3.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        let t = threshold_lambda(2.0, 3.0, 1.0, 3.0, 3.0).unwrap();
        assert!((t.rho_star.powi(3) - 0.5).abs() < 1e-15);
        assert!((t.lambda - 2f64.powf(-1.0 / 3.0) / 4.5).abs() < 1e-15);
        assert!((t.lambda - 0.176_377_89).abs() < 1e-8);
    }

    #[test]
    fn limit_case() {
        let t = threshold_lambda(2.0, 1.0, 1.0, 5.0, 3.0).unwrap();
        assert_eq!(t.lambda, 1.0 / 3.0);
        assert!(t.rho_star.is_infinite());
    }

    #[test]
    fn invalid_parameters() {
        assert!(threshold_lambda(2.0, 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(threshold_lambda(2.0, 2.0, 1.0, 0.0, 1.0).is_err());
        assert!(lambda_rho(1.0, 2.0, 2.0, 1.0, 1.0, 0.0).is_err());
        assert!(lambda_rho(0.0, 2.0, 2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn scaling_halves() {
        let a = threshold_lambda(3.0, 4.0, 0.7, 1.3, 2.1).unwrap();
        let b = threshold_lambda(3.0, 4.0, 0.7, 2.6, 4.2).unwrap();
        assert!((a.lambda / b.lambda - 2.0).abs() < 1e-13);
    }
}
