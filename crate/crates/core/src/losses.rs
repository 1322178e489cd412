//! Curve-ordered 1D codes and the normalized-L1 distillation losses.
//!
//! A feature map is flattened along a mapping table into a [`LinearCode`]; the
//! teacher code is resampled to the student length with a nearest rescaler and
//! both are L2-normalized before taking the L1 distance. The loss is the plain
//! sum over slots, not a mean.

use serde::{Deserialize, Serialize};

use crate::activation::ActivationMap;
use crate::activation::FeatureStack;
use crate::curve::{Layout, MappingTable};
use crate::error::{Error, Result};
use crate::scalar::{sign, Scalar};
use crate::tensor::Tensor;

/// 1D representation of a feature map; invalid (padding) slots hold zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCode<T> {
    values: Vec<T>,
    valid: Vec<bool>,
}

impl<T: Scalar> LinearCode<T> {
    pub fn new(values: Vec<T>, valid: Vec<bool>) -> Result<Self> {
        if values.len() != valid.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                found: valid.len(),
            });
        }
        let values = values
            .into_iter()
            .zip(&valid)
            .map(|(v, &ok)| if ok { v } else { T::zero() })
            .collect();
        Ok(Self { values, valid })
    }

    /// Every slot valid.
    pub fn dense(values: Vec<T>) -> Self {
        let valid = vec![true; values.len()];
        Self { values, valid }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// L2 norm over valid slots.
    pub fn norm(&self) -> T {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v * v)
            .sum::<T>()
            .sqrt()
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * k).collect(),
            valid: self.valid.clone(),
        }
    }
}

/// Where the nearest rescaler samples inside each block of `factor` slots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// First slot of each block.
    #[default]
    Left,
    /// Slot `factor / 2` of each block.
    Center,
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Sampling::Left),
            "center" => Ok(Sampling::Center),
            other => Err(Error::Format {
                format: "sampling",
                reason: format!("unknown sampling {other:?} (expected left or center)"),
            }),
        }
    }
}

/// Loss configuration shared by the map-level entry points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossOptions {
    pub sampling: Sampling,
    /// Layout used when callers build tables on the loss's behalf.
    pub layout: Layout,
}

impl Default for LossOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::Left,
            layout: Layout::Compacted,
        }
    }
}

/// Loss value with gradients with respect to the two raw codes.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeLoss<T> {
    pub value: T,
    pub grad_teacher: Vec<T>,
    pub grad_student: Vec<T>,
}

/// Loss value with gradients shaped like the feature maps (and AMs for the
/// weighted loss).
#[derive(Clone, Debug, PartialEq)]
pub struct LossReport<T> {
    pub value: T,
    pub grad_student: Tensor<T>,
    pub grad_teacher: Option<Tensor<T>>,
    pub grad_am_student: Option<Tensor<T>>,
    pub grad_am_teacher: Option<Tensor<T>>,
}

fn check_extents<T: Scalar>(eta: &Tensor<T>, table: &MappingTable) -> Result<()> {
    if eta.shape() != table.region().extents() {
        return Err(Error::ExtentMismatch {
            expected: table.region().extents().to_vec(),
            found: eta.shape().to_vec(),
        });
    }
    Ok(())
}

/// `code[v] = η(cell)` for every mapped cell.
pub fn map_features<T: Scalar>(eta: &Tensor<T>, table: &MappingTable) -> Result<LinearCode<T>> {
    check_extents(eta, table)?;
    let data = eta.data();
    let (values, valid) = (0..table.code_length())
        .map(|s| match table.region_offset_at(s) {
            Some(o) => (data[o], true),
            None => (T::zero(), false),
        })
        .unzip();
    Ok(LinearCode { values, valid })
}

/// `code[v] = η(cell) · AM(cell)`.
pub fn map_features_weighted<T: Scalar>(
    eta: &Tensor<T>,
    am: &ActivationMap<T>,
    table: &MappingTable,
) -> Result<LinearCode<T>> {
    check_extents(eta, table)?;
    check_extents(am, table)?;
    let weighted = eta.zip_map(am, |x, w| x * w)?;
    map_features(&weighted, table)
}

/// Adjoint of [`map_features`]: places each slot's value back on its cell.
pub fn scatter_code<T: Scalar>(grad: &[T], table: &MappingTable) -> Result<Tensor<T>> {
    if grad.len() != table.code_length() {
        return Err(Error::LengthMismatch {
            expected: table.code_length(),
            found: grad.len(),
        });
    }
    let mut out = Tensor::zeros(table.region().extents());
    let data = out.data_mut();
    for (s, &g) in grad.iter().enumerate() {
        if let Some(o) = table.region_offset_at(s) {
            data[o] = g;
        }
    }
    Ok(out)
}

/// Source slot read by each output slot of the nearest rescaler.
pub fn rescale_indices(from: usize, to: usize, sampling: Sampling) -> Result<Vec<usize>> {
    if to == 0 || from < to || from % to != 0 {
        return Err(Error::NonDivisible { from, to });
    }
    let factor = from / to;
    let offset = match sampling {
        Sampling::Left => 0,
        Sampling::Center => factor / 2,
    };
    Ok((0..to).map(|k| k * factor + offset).collect())
}

/// Nearest rescaler: `out[k] = in[k·factor + offset]`; validity follows the sampled slot.
pub fn nearest_rescale<T: Scalar>(code: &LinearCode<T>, target: usize, sampling: Sampling) -> Result<LinearCode<T>> {
    let idx = rescale_indices(code.len(), target, sampling)?;
    Ok(LinearCode {
        values: idx.iter().map(|&i| code.values[i]).collect(),
        valid: idx.iter().map(|&i| code.valid[i]).collect(),
    })
}

/// Unit vector over valid slots plus the norm it was divided by.
fn normalize<T: Scalar>(code: &LinearCode<T>, which: &str) -> Result<(Vec<T>, T)> {
    if code.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput(format!("{which} code has non-finite values")));
    }
    let norm = code.norm();
    if norm == T::zero() {
        return Err(Error::DegenerateInput(format!("{which} code has zero L2 norm")));
    }
    Ok((code.values.iter().map(|&v| v / norm).collect(), norm))
}

/// `(s − u·(u·s)) / ‖a‖`, the pullback of `s` through `a ↦ a/‖a‖`, zero on invalid slots.
fn pullback<T: Scalar>(u: &[T], norm: T, s: &[T], valid: &[bool]) -> Vec<T> {
    let us: T = u.iter().zip(s).map(|(&a, &b)| a * b).sum();
    u.iter()
        .zip(s)
        .zip(valid)
        .map(|((&ui, &si), &ok)| if ok { (si - ui * us) / norm } else { T::zero() })
        .collect()
}

/// `Σ |R(t)/‖R(t)‖ − s/‖s‖|` with gradients for both raw codes.
///
/// The teacher code is rescaled to the student length first; equal lengths
/// skip the rescale. A code with zero norm over its valid slots is rejected.
pub fn hd_loss<T: Scalar>(teacher: &LinearCode<T>, student: &LinearCode<T>, sampling: Sampling) -> Result<CodeLoss<T>> {
    let idx = rescale_indices(teacher.len(), student.len(), sampling)?;
    let rt = LinearCode {
        values: idx.iter().map(|&i| teacher.values[i]).collect(),
        valid: idx.iter().map(|&i| teacher.valid[i]).collect(),
    };
    let (ut, nt) = normalize(&rt, "teacher")?;
    let (us, ns) = normalize(student, "student")?;
    let diff: Vec<T> = ut.iter().zip(&us).map(|(&a, &b)| a - b).collect();
    let value = diff.iter().map(|d| d.abs()).sum();
    let s: Vec<T> = diff.iter().map(|&d| sign(d)).collect();
    let g_rt = pullback(&ut, nt, &s, &rt.valid);
    let neg: Vec<T> = s.iter().map(|&v| -v).collect();
    let grad_student = pullback(&us, ns, &neg, &student.valid);
    let mut grad_teacher = vec![T::zero(); teacher.len()];
    for (&i, &g) in idx.iter().zip(&g_rt) {
        grad_teacher[i] = grad_teacher[i] + g;
    }
    Ok(CodeLoss {
        value,
        grad_teacher,
        grad_student,
    })
}

/// Map-level HD loss: flattens both maps, evaluates [`hd_loss`] and scatters
/// the code gradients back onto the maps.
pub fn hd_loss_maps<T: Scalar>(
    eta_t: &Tensor<T>,
    table_t: &MappingTable,
    eta_s: &Tensor<T>,
    table_s: &MappingTable,
    opts: &LossOptions,
) -> Result<LossReport<T>> {
    let ct = map_features(eta_t, table_t)?;
    let cs = map_features(eta_s, table_s)?;
    let l = hd_loss(&ct, &cs, opts.sampling)?;
    Ok(LossReport {
        value: l.value,
        grad_student: scatter_code(&l.grad_student, table_s)?,
        grad_teacher: Some(scatter_code(&l.grad_teacher, table_t)?),
        grad_am_student: None,
        grad_am_teacher: None,
    })
}

/// AM-weighted loss: [`hd_loss`] on `η·AM` codes. Gradients reach both maps
/// and both AMs.
pub fn vhd_loss<T: Scalar>(
    eta_t: &Tensor<T>,
    am_t: &ActivationMap<T>,
    table_t: &MappingTable,
    eta_s: &Tensor<T>,
    am_s: &ActivationMap<T>,
    table_s: &MappingTable,
    opts: &LossOptions,
) -> Result<LossReport<T>> {
    let ct = map_features_weighted(eta_t, am_t, table_t)?;
    let cs = map_features_weighted(eta_s, am_s, table_s)?;
    let l = hd_loss(&ct, &cs, opts.sampling)?;
    let gt = scatter_code(&l.grad_teacher, table_t)?;
    let gs = scatter_code(&l.grad_student, table_s)?;
    Ok(LossReport {
        value: l.value,
        grad_student: gs.zip_map(am_s, |g, w| g * w)?,
        grad_teacher: Some(gt.zip_map(am_t, |g, w| g * w)?),
        grad_am_student: Some(gs.zip_map(eta_s, |g, x| g * x)?),
        grad_am_teacher: Some(gt.zip_map(eta_t, |g, x| g * x)?),
    })
}

/// Channel-averaged map-level loss over aligned channel pairs. `ams` weights
/// every channel of each side when present (weighted loss).
pub fn distill_channels<T: Scalar>(
    teacher: &FeatureStack<T>,
    table_t: &MappingTable,
    student: &FeatureStack<T>,
    table_s: &MappingTable,
    ams: Option<(&ActivationMap<T>, &ActivationMap<T>)>,
    opts: &LossOptions,
) -> Result<LossReport<T>> {
    if teacher.channels() != student.channels() {
        return Err(Error::ChannelMismatch {
            expected: teacher.channels(),
            found: student.channels(),
        });
    }
    let m = teacher.channels();
    let inv = T::one() / T::lit(m as f64);
    let mut value = T::zero();
    let mut gs = Vec::with_capacity(m);
    let mut gt = Vec::with_capacity(m);
    let mut gam_s: Option<Tensor<T>> = None;
    let mut gam_t: Option<Tensor<T>> = None;
    for ch in 0..m {
        let (et, es) = (teacher.channel(ch), student.channel(ch));
        let r = match ams {
            None => hd_loss_maps(&et, table_t, &es, table_s, opts)?,
            Some((at, as_)) => vhd_loss(&et, at, table_t, &es, as_, table_s, opts)?,
        };
        value = value + r.value * inv;
        gs.push(r.grad_student.scale(inv));
        gt.push(r.grad_teacher.expect("teacher gradient").scale(inv));
        for (acc, g) in [(&mut gam_s, r.grad_am_student), (&mut gam_t, r.grad_am_teacher)] {
            if let Some(g) = g {
                match acc {
                    Some(a) => a.add_scaled(&g, inv)?,
                    None => *acc = Some(g.scale(inv)),
                }
            }
        }
    }
    Ok(LossReport {
        value,
        grad_student: Tensor::stack(&gs)?,
        grad_teacher: Some(Tensor::stack(&gt)?),
        grad_am_student: gam_s,
        grad_am_teacher: gam_t,
    })
}

/// `ce + α·distill`; α must be non-negative.
pub fn total_loss<T: Scalar>(ce: T, distill: T, alpha: T) -> Result<T> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidWeight(format!("alpha must be a finite non-negative number, got {alpha}")));
    }
    if alpha == T::zero() {
        return Ok(ce);
    }
    Ok(ce + alpha * distill)
}

/// Length-preserving affine layer `y = W·x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignLayer<T> {
    /// Row-major `len × len`.
    weights: Vec<T>,
    bias: Vec<T>,
}

/// Gradients of an [`AlignLayer`] application.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignGrads<T> {
    pub code: Vec<T>,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> AlignLayer<T> {
    pub fn new(weights: Vec<T>, bias: Vec<T>) -> Result<Self> {
        let n = bias.len();
        if weights.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: weights.len(),
            });
        }
        Ok(Self { weights, bias })
    }

    pub fn identity(len: usize) -> Self {
        let mut weights = vec![T::zero(); len * len];
        for i in 0..len {
            weights[i * len + i] = T::one();
        }
        Self {
            weights,
            bias: vec![T::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bias.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    /// Pulls `grad_out` (dL/dy) back to the input code and the parameters.
    pub fn backward(&self, code: &LinearCode<T>, grad_out: &[T]) -> Result<AlignGrads<T>> {
        let n = self.len();
        self.check(code.len())?;
        self.check(grad_out.len())?;
        let mut d_code = vec![T::zero(); n];
        let mut d_w = vec![T::zero(); n * n];
        for (i, &g) in grad_out.iter().enumerate() {
            let row = &self.weights[i * n..(i + 1) * n];
            for j in 0..n {
                d_code[j] = d_code[j] + row[j] * g;
                d_w[i * n + j] = g * code.values[j];
            }
        }
        Ok(AlignGrads {
            code: d_code,
            weights: d_w,
            bias: grad_out.to_vec(),
        })
    }
}

/// Applies the alignment layer; every output slot is valid.
pub fn fc_align<T: Scalar>(code: &LinearCode<T>, layer: &AlignLayer<T>) -> Result<LinearCode<T>> {
    layer.check(code.len())?;
    let n = layer.len();
    let values = (0..n)
        .map(|i| {
            layer.weights[i * n..(i + 1) * n]
                .iter()
                .zip(&code.values)
                .map(|(&w, &x)| w * x)
                .sum::<T>()
                + layer.bias[i]
        })
        .collect();
    Ok(LinearCode::dense(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_mapping, CurveSpec, Region};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    /// Direct evaluation of the normalized L1 distance on equal-length vectors.
    fn reference(t: &[f64], s: &[f64]) -> f64 {
        let nt = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ns = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        t.iter().zip(s).map(|(a, b)| (a / nt - b / ns).abs()).sum()
    }

    fn table(ext: &[usize], layout: Layout) -> MappingTable {
        let r = Region::new(ext).unwrap();
        let p = crate::curve::select_order(&r, ext.len()).unwrap();
        build_mapping(CurveSpec::new(ext.len(), p).unwrap(), &r, layout).unwrap()
    }

    #[test]
    fn order_one_code() {
        let t = table(&[2, 2], Layout::Padded);
        let eta = Tensor::from_vec(&[2, 2], vec![5.0, 8.0, 6.0, 7.0]).unwrap();
        assert_eq!(map_features(&eta, &t).unwrap().values(), &[5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn constant_map_gives_constant_code_and_sums_match() {
        let t = table(&[3, 5], Layout::Padded);
        let code = map_features(&Tensor::filled(&[3, 5], 2.0), &t).unwrap();
        assert_eq!(code.len(), 64);
        assert!(code.values().iter().zip(code.valid()).all(|(&v, &ok)| if ok { v == 2.0 } else { v == 0.0 }));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let eta = Tensor::from_vec(&[3, 5], rand_vec(15, &mut rng)).unwrap();
        let code = map_features(&eta, &t).unwrap();
        assert_relative_eq!(code.values().iter().sum::<f64>(), eta.sum(), epsilon = 1e-12);
    }

    #[test]
    fn weighted_mapping() {
        let t = table(&[4, 4], Layout::Compacted);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let eta = Tensor::from_vec(&[4, 4], rand_vec(16, &mut rng)).unwrap();
        let am = Tensor::from_vec(&[4, 4], rand_vec(16, &mut rng)).unwrap();
        let ones = Tensor::filled(&[4, 4], 1.0);
        assert_eq!(map_features_weighted(&eta, &ones, &t).unwrap(), map_features(&eta, &t).unwrap());
        let zero = map_features_weighted(&eta, &Tensor::zeros(&[4, 4]), &t).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let prod = eta.zip_map(&am, |a, b| a * b).unwrap();
        assert_eq!(map_features_weighted(&eta, &am, &t).unwrap(), map_features(&prod, &t).unwrap());
    }

    #[test]
    fn extent_mismatch_rejected() {
        let t = table(&[4, 4], Layout::Compacted);
        assert!(matches!(
            map_features(&Tensor::<f64>::zeros(&[4, 3]), &t),
            Err(Error::ExtentMismatch { .. })
        ));
    }

    #[test]
    fn rescale_examples() {
        let code = LinearCode::dense((0..64).map(|v| v as f64).collect());
        let out = nearest_rescale(&code, 16, Sampling::Left).unwrap();
        let want: Vec<f64> = (0..16).map(|k| (4 * k) as f64).collect();
        assert_eq!(out.values(), want.as_slice());
        let centered = nearest_rescale(&code, 16, Sampling::Center).unwrap();
        assert_eq!(centered.values()[0], 2.0);
        assert_eq!(nearest_rescale(&code, 64, Sampling::Left).unwrap(), code);
        let constant = LinearCode::dense(vec![3.0; 27]);
        assert_eq!(nearest_rescale(&constant, 9, Sampling::Left).unwrap().values(), &[3.0; 9]);
        assert!(matches!(nearest_rescale(&code, 10, Sampling::Left), Err(Error::NonDivisible { .. })));
    }

    #[test]
    fn zero_and_scale_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = LinearCode::dense(rand_vec(16, &mut rng));
        assert_eq!(hd_loss(&a, &a, Sampling::Left).unwrap().value, 0.0);
        let l = hd_loss(&a, &a.scale(3.5), Sampling::Left).unwrap().value;
        assert!(l.abs() < 1e-12);
        let zero = LinearCode::dense(vec![0.0; 16]);
        assert!(matches!(hd_loss(&a, &zero, Sampling::Left), Err(Error::DegenerateInput(_))));
        assert!(matches!(hd_loss(&zero, &a, Sampling::Left), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn value_matches_reference_with_rescale() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t = rand_vec(64, &mut rng);
        let s = rand_vec(16, &mut rng);
        let l = hd_loss(&LinearCode::dense(t.clone()), &LinearCode::dense(s.clone()), Sampling::Left).unwrap();
        let rt: Vec<f64> = (0..16).map(|k| t[4 * k]).collect();
        assert_relative_eq!(l.value, reference(&rt, &s), max_relative = 1e-12);
        // Only sampled teacher slots receive gradient.
        for (i, g) in l.grad_teacher.iter().enumerate() {
            if i % 4 != 0 {
                assert_eq!(*g, 0.0);
            }
        }
    }

    fn fd_check(f: impl Fn(&[f64]) -> f64, x: &[f64], grad: &[f64]) -> f64 {
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let num = (f(&xp) - f(&xm)) / (2.0 * h);
            let err = (num - grad[i]).abs() / num.abs().max(grad[i].abs()).max(1e-3);
            worst = worst.max(err);
        }
        worst
    }

    #[test]
    fn code_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let t = rand_vec(32, &mut rng);
            let s = rand_vec(16, &mut rng);
            let l = hd_loss(&LinearCode::dense(t.clone()), &LinearCode::dense(s.clone()), Sampling::Left).unwrap();
            let ft = |x: &[f64]| hd_loss(&LinearCode::dense(x.to_vec()), &LinearCode::dense(s.clone()), Sampling::Left).unwrap().value;
            let fs = |x: &[f64]| hd_loss(&LinearCode::dense(t.clone()), &LinearCode::dense(x.to_vec()), Sampling::Left).unwrap().value;
            assert!(fd_check(ft, &t, &l.grad_teacher) < 1e-4);
            assert!(fd_check(fs, &s, &l.grad_student) < 1e-4);
        }
    }

    #[test]
    fn padded_slots_are_excluded() {
        let t = table(&[3, 3], Layout::Padded);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = Tensor::from_vec(&[3, 3], rand_vec(9, &mut rng)).unwrap();
        let b = Tensor::from_vec(&[3, 3], rand_vec(9, &mut rng)).unwrap();
        let r = hd_loss_maps(&a, &t, &b, &t, &LossOptions::default()).unwrap();
        let tc = table(&[3, 3], Layout::Compacted);
        let rc = hd_loss_maps(&a, &tc, &b, &tc, &LossOptions::default()).unwrap();
        // Same valid slots in the same order, so padding changes nothing.
        assert_relative_eq!(r.value, rc.value, max_relative = 1e-12);
        assert_eq!(r.grad_student, rc.grad_student);
    }

    #[test]
    fn vhd_with_unit_ams_is_hd() {
        let tt = table(&[2, 4, 4], Layout::Compacted);
        let ts = table(&[4, 4], Layout::Compacted);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let et = Tensor::from_vec(&[2, 4, 4], rand_vec(32, &mut rng)).unwrap();
        let es = Tensor::from_vec(&[4, 4], rand_vec(16, &mut rng)).unwrap();
        let opts = LossOptions::default();
        let hd = hd_loss_maps(&et, &tt, &es, &ts, &opts).unwrap();
        let vhd = vhd_loss(&et, &Tensor::filled(&[2, 4, 4], 1.0), &tt, &es, &Tensor::filled(&[4, 4], 1.0), &ts, &opts).unwrap();
        assert_eq!(hd.value, vhd.value);
        assert_eq!(hd.grad_student, vhd.grad_student);
        let dead = vhd_loss(&et, &Tensor::filled(&[2, 4, 4], 1.0), &tt, &es, &Tensor::zeros(&[4, 4]), &ts, &opts);
        assert!(matches!(dead, Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn total_loss_examples() {
        assert_eq!(total_loss(1.5f64, 9.0, 0.0).unwrap(), 1.5);
        assert_relative_eq!(total_loss(0.0f64, 0.3, 10.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(total_loss(1.0f64, 1e-3, 1e3).unwrap(), 2.0, epsilon = 1e-12);
        assert!(matches!(total_loss(1.0f64, 1.0, -1.0), Err(Error::InvalidWeight(_))));
    }

    #[test]
    fn align_layer_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x = LinearCode::dense(rand_vec(8, &mut rng));
        assert_eq!(fc_align(&x, &AlignLayer::identity(8)).unwrap(), x);
        let b = rand_vec(8, &mut rng);
        let zero = AlignLayer::new(vec![0.0; 64], b.clone()).unwrap();
        assert_eq!(fc_align(&x, &zero).unwrap().values(), b.as_slice());
        let w = rand_vec(64, &mut rng);
        let layer = AlignLayer::new(w.clone(), b.clone()).unwrap();
        let y = fc_align(&x, &layer).unwrap();
        for i in 0..8 {
            let want: f64 = (0..8).map(|j| w[i * 8 + j] * x.values()[j]).sum::<f64>() + b[i];
            assert_relative_eq!(y.values()[i], want, epsilon = 1e-12);
        }
        assert!(fc_align(&LinearCode::dense(vec![1.0; 4]), &layer).is_err());
    }

    #[test]
    fn channel_average() {
        let tt = table(&[2, 4, 4], Layout::Compacted);
        let ts = table(&[4, 4], Layout::Compacted);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let t = FeatureStack::new(Tensor::from_vec(&[3, 2, 4, 4], rand_vec(96, &mut rng)).unwrap()).unwrap();
        let s = FeatureStack::new(Tensor::from_vec(&[3, 4, 4], rand_vec(48, &mut rng)).unwrap()).unwrap();
        let opts = LossOptions::default();
        let r = distill_channels(&t, &tt, &s, &ts, None, &opts).unwrap();
        let want: f64 = (0..3)
            .map(|c| hd_loss_maps(&t.channel(c), &tt, &s.channel(c), &ts, &opts).unwrap().value)
            .sum::<f64>()
            / 3.0;
        assert_relative_eq!(r.value, want, max_relative = 1e-12);
        assert_eq!(r.grad_student.shape(), &[3, 4, 4]);
    }
}
