//! Central finite-difference oracle for analytic gradients.

use hd_core::Tensor;

use crate::error::{HarnessError, Result};
use crate::tape::{Tape, Var};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates within `eps` of a kink, where the one-sided slopes disagree.
    pub skipped: usize,
}

/// Compares `analytic` against central differences of `f` at `x`.
///
/// The relative error of a coordinate is `|num − ana| / max(|num|, |ana|, 1e-3)`,
/// so near-zero derivatives are judged on an absolute scale.
pub fn grad_check(f: impl Fn(&[f64]) -> f64, x: &[f64], analytic: &[f64], eps: f64) -> Result<GradCheck> {
    if x.len() != analytic.len() {
        return Err(HarnessError::Shape(format!("grad_check: {} inputs, {} gradients", x.len(), analytic.len())));
    }
    let f0 = f(x);
    if !f0.is_finite() {
        return Err(HarnessError::NonFinite("function value".into()));
    }
    let mut out = GradCheck {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + eps;
        let fp = f(&probe);
        probe[i] = x[i] - eps;
        let fm = f(&probe);
        probe[i] = x[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(HarnessError::NonFinite(format!("function value near coordinate {i}")));
        }
        let (fwd, bwd) = ((fp - f0) / eps, (f0 - fm) / eps);
        if (fwd - bwd).abs() > 1e-3 * fwd.abs().max(bwd.abs()).max(1.0) {
            out.skipped += 1;
            continue;
        }
        let num = (fp - fm) / (2.0 * eps);
        let err = (num - analytic[i]).abs() / num.abs().max(analytic[i].abs()).max(1e-3);
        out.max_rel_error = out.max_rel_error.max(err);
        out.checked += 1;
    }
    Ok(out)
}

/// Checks one tape computation. `build` records an op over leaves holding
/// `inputs`; its output is contracted with the fixed `probe` (same shape as
/// the output) so every output element contributes to the scalar.
pub fn tape_grad_check(
    inputs: &[Tensor<f64>],
    probe: &Tensor<f64>,
    eps: f64,
    build: impl Fn(&mut Tape<f64>, &[Var]) -> Result<Var>,
) -> Result<GradCheck> {
    let record = |xs: &[Tensor<f64>]| -> Result<(Tape<f64>, Vec<Var>, Var)> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| tape.leaf(x.clone())).collect();
        let out = build(&mut tape, &vars)?;
        let pv = tape.leaf(probe.clone());
        let prod = tape.mul(out, pv)?;
        let s = tape.sum(prod);
        Ok((tape, vars, s))
    };
    let (tape, vars, s) = record(inputs)?;
    let grads = tape.backward(s)?;
    let analytic: Vec<f64> = vars
        .iter()
        .zip(inputs)
        .flat_map(|(&v, x)| grads.get(v).cloned().unwrap_or_else(|| Tensor::zeros(x.shape())).into_vec())
        .collect();
    let flat: Vec<f64> = inputs.iter().flat_map(|x| x.data().iter().copied()).collect();
    let unflatten = |f: &[f64]| -> Result<Vec<Tensor<f64>>> {
        let mut at = 0;
        inputs
            .iter()
            .map(|x| {
                let t = Tensor::from_vec(x.shape(), f[at..at + x.len()].to_vec())?;
                at += x.len();
                Ok(t)
            })
            .collect()
    };
    let f = |v: &[f64]| {
        unflatten(v)
            .and_then(|xs| record(&xs))
            .map_or(f64::NAN, |(tape, _, s)| tape.value(s).data()[0])
    };
    grad_check(f, &flat, &analytic, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_is_exact() {
        let w = [0.5, -2.0, 3.0];
        let f = |x: &[f64]| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let r = grad_check(f, &[1.0, 2.0, -1.0], &w, 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-9);
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn kinks_are_skipped() {
        let f = |x: &[f64]| x[0].max(0.0) + x[1] * x[1];
        let r = grad_check(f, &[0.0, 1.0], &[0.5, 2.0], 1e-5).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.checked, 1);
        assert!(r.max_rel_error < 1e-6);
    }

    #[test]
    fn wrong_gradient_detected() {
        let f = |x: &[f64]| x[0] * x[0];
        assert!(grad_check(f, &[1.0], &[3.0], 1e-5).unwrap().max_rel_error > 0.1);
    }
}
