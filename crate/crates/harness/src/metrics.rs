use crate::error::{HarnessError, Result};

/// Average relative improvement of VHD over a baseline, in percent:
/// `mean_i (vhd_i − bkd_i) / (bkd_i − stu_i) · 100`.
pub fn ari(student: &[f64], baseline: &[f64], vhd: &[f64]) -> Result<f64> {
    let m = student.len();
    if m == 0 || baseline.len() != m || vhd.len() != m {
        return Err(HarnessError::Shape(format!(
            "ari: sequences of length {}, {}, {}",
            student.len(),
            baseline.len(),
            vhd.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..m {
        let gain = baseline[i] - student[i];
        if gain == 0.0 {
            return Err(HarnessError::DivisionByZero(format!("baseline equals student at entry {i}")));
        }
        total += (vhd[i] - baseline[i]) / gain;
    }
    Ok(total / m as f64 * 100.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_comparison_is_zero() {
        assert_eq!(ari(&[60.0, 61.0], &[62.0, 63.0], &[62.0, 63.0]).unwrap(), 0.0);
    }

    #[test]
    fn equal_baseline_and_student_rejected() {
        assert!(matches!(ari(&[60.0], &[60.0], &[61.0]), Err(HarnessError::DivisionByZero(_))));
        assert!(ari(&[60.0], &[61.0, 62.0], &[63.0]).is_err());
    }
}
