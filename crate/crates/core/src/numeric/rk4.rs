use super::NumericError;

/// One classical fourth-order Runge-Kutta step of `dx/dt = derivative(t, x)`.
///
/// Anything the closure captures (held control values, for instance) is
/// constant across the four stages.
pub fn rk4_step<F>(mut derivative: F, t: f64, x: &[f64], dt: f64) -> Result<Vec<f64>, NumericError>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(NumericError::InvalidStep { dt });
    }
    let n = x.len();
    let mut eval = |t: f64, x: &[f64]| -> Result<Vec<f64>, NumericError> {
        let d = derivative(t, x);
        debug_assert_eq!(d.len(), n);
        match d.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(NumericError::NonFiniteDerivative { t, index }),
            None => Ok(d),
        }
    };
    let half = 0.5 * dt;
    let stage = |k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(xi, ki)| xi + h * ki).collect() };

    let k1 = eval(t, x)?;
    let k2 = eval(t + half, &stage(&k1, half))?;
    let k3 = eval(t + half, &stage(&k2, half))?;
    let k4 = eval(t + dt, &stage(&k3, dt))?;

    Ok((0..n)
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
