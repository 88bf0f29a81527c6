use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Continuous branch of `log` along a sequence of nonzero values.
///
/// The first value gets the principal logarithm; every later argument is
/// continued from its predecessor. A step whose principal argument has
/// modulus `>= π` is ambiguous and is reported as [`Error::BranchJump`].
pub fn continuous_log(values: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev: Option<(Complex64, f64)> = None;
    for (index, &v) in values.iter().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) || v == Complex64::new(0.0, 0.0) {
            return Err(Error::NonFiniteEvaluation { at: v });
        }
        let arg = match prev {
            None => v.arg(),
            Some((p, parg)) => {
                let step = (v / p).arg();
                if step.abs() >= PI {
                    return Err(Error::BranchJump { index, step });
                }
                parg + step
            }
        };
        out.push(Complex64::new(v.norm().ln(), arg));
        prev = Some((v, arg));
    }
    Ok(out)
}

/// Number of turns made by a closed sequence of nonzero values (first value
/// repeated at the end is optional). Not rounded.
pub fn winding_number(values: &[Complex64]) -> Result<f64> {
    if values.is_empty() {
        return Ok(0.0);
    }
    let mut closed = values.to_vec();
    if values.first() != values.last() {
        closed.push(values[0]);
    }
    let logs = continuous_log(&closed)?;
    Ok((logs[logs.len() - 1].im - logs[0].im) / (2.0 * PI))
}
